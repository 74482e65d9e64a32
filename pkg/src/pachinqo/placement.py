"""Qubit grouping (greedy MaxCut or degree split), atom assignment, and
the three-trap-change initialization schedule.

All atoms start in memory SLM columns. The qubit-to-atom mapping is free
at load time, so atoms are laid out in memory pre-grouped: one memory
column per target site column (for the static group) or per target AOD
column (for the mobile group). Every pickup and deposit then runs as one
parallel trap change, giving exactly three serial trap changes at
initialization regardless of circuit size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .machine import (
    AodColumn,
    AodState,
    CapacityError,
    PhysParams,
    SlmGrid,
    ZONE_MARGIN,
    ZoneLayout,
    cache_column_slots,
    memory_column_slots,
    memory_rows,
    pair_clear_sites,
)
from .circuit import Circuit
from .metrics import movement_phase_time
from .schedule import (
    AOD_TO_SLM,
    SLM_TO_AOD,
    Event,
    TrapChange,
    TrapTransfer,
    ordered_phase_moves,
)

AOD = "aod"
SLM = "slm"

INIT_TRAP_CHANGES = 3


@dataclass
class Grouping:
    slm_qubits: list[int]
    aod_qubits: list[int]
    slm_capacity: int
    aod_capacity: int

    def __post_init__(self):
        if set(self.slm_qubits) & set(self.aod_qubits):
            raise ValueError("slm and aod groups overlap")
        if len(self.slm_qubits) > self.slm_capacity:
            raise CapacityError("SLM group exceeds capacity")
        if len(self.aod_qubits) > self.aod_capacity:
            raise CapacityError("AOD group exceeds capacity")


class _Grouper:
    def __init__(self, slm_capacity: int, aod_capacity: int):
        self.caps = {SLM: slm_capacity, AOD: aod_capacity}
        self.groups: dict[str, list[int]] = {SLM: [], AOD: []}
        self.of: dict[int, str] = {}

    def place(self, q: int, want: str) -> None:
        other = SLM if want == AOD else AOD
        for g in (want, other):
            if len(self.groups[g]) < self.caps[g]:
                self.groups[g].append(q)
                self.of[q] = g
                return
        raise CapacityError("both qubit groups are full")

    def finish(self, num_qubits: int) -> Grouping:
        # Qubits no CZ gate ever touched go mobile first: they never need
        # compute proximity, which keeps SLM sites for interacting qubits.
        for q in range(num_qubits):
            if q not in self.of:
                self.place(q, AOD)
        return Grouping(self.groups[SLM], self.groups[AOD],
                        self.caps[SLM], self.caps[AOD])


def greedy_maxcut_group(circuit: Circuit, slm_capacity: int,
                        aod_capacity: int) -> Grouping:
    """Greedy MaxCut over the CZ interaction graph, in circuit order.

    First CZ touching two fresh qubits sends the first operand mobile and
    the second static; a gate with one grouped operand sends the other to
    the complementary group; full groups fall back to whichever side still
    has room.
    """
    if slm_capacity + aod_capacity < circuit.num_qubits:
        raise CapacityError(
            f"{circuit.num_qubits} qubits exceed capacity "
            f"{slm_capacity}+{aod_capacity}"
        )
    g = _Grouper(slm_capacity, aod_capacity)
    for a, b in circuit.cz_pairs():
        ga, gb = g.of.get(a), g.of.get(b)
        if ga is None and gb is None:
            g.place(a, AOD)
            g.place(b, SLM)
        elif ga is not None and gb is None:
            g.place(b, SLM if ga == AOD else AOD)
        elif gb is not None and ga is None:
            g.place(a, SLM if gb == AOD else AOD)
    return g.finish(circuit.num_qubits)


def degree_split_group(circuit: Circuit, slm_capacity: int,
                       aod_capacity: int) -> Grouping:
    """Highest weighted-degree qubits go mobile, the rest static.

    Degree is the number of CZ gates touching the qubit (parallel edges
    add weight). Ties break toward the lower index. The AOD takes at most
    ceil(n/2) qubits so capacity pressure matches the greedy grouping.
    """
    if slm_capacity + aod_capacity < circuit.num_qubits:
        raise CapacityError(
            f"{circuit.num_qubits} qubits exceed capacity "
            f"{slm_capacity}+{aod_capacity}"
        )
    degree = [0] * circuit.num_qubits
    for a, b in circuit.cz_pairs():
        degree[a] += 1
        degree[b] += 1
    order = sorted(range(circuit.num_qubits), key=lambda q: (-degree[q], q))
    n_aod = min(aod_capacity, math.ceil(circuit.num_qubits / 2))
    g = _Grouper(slm_capacity, aod_capacity)
    for q in order[:n_aod]:
        g.place(q, AOD)
    for q in order[n_aod:]:
        g.place(q, SLM)
    return g.finish(circuit.num_qubits)


@dataclass
class MemoryGroup:
    """One loaded memory column and where its atoms are headed."""

    column: int  # cid of the ferry / final AOD column that lifts it
    kind: str  # SLM (deposit at sites) | AOD (stays mobile)
    mem_x: float
    # (atom_id, memory y, target x, target y)
    atoms: list[tuple[int, float, float, float]] = field(default_factory=list)


@dataclass
class InitialPlacement:
    grouping: Grouping
    site_of_qubit: dict[int, int]          # static qubits -> grid site index
    column_of_qubit: dict[int, tuple[int, int]]  # mobile qubits -> (cid, slot)
    aod_state: AodState                    # columns at their cache homes
    n_aod_columns: int
    n_ferries: int
    memory_groups: list[MemoryGroup]


def assign_atoms(grouping: Grouping, grid: SlmGrid, layout: ZoneLayout,
                 params: PhysParams) -> InitialPlacement:
    """Deterministic atom assignment: static qubits take clear grid sites
    in grouping-by-site order; mobile qubits pack into AOD columns parked
    in the right cache. Atom ids equal qubit ids (the load mapping is
    arbitrary, so identity is used)."""
    usable = pair_clear_sites(grid, params)
    if len(grouping.slm_qubits) > len(usable):
        raise CapacityError(
            f"insufficient SLM capacity: {len(grouping.slm_qubits)} static "
            f"qubits, {len(usable)} clear sites on the {grid.kind} grid"
        )
    site_of_qubit = {q: usable[i] for i, q in enumerate(grouping.slm_qubits)}

    per_col = params.max_atoms_per_column
    n_cols = math.ceil(len(grouping.aod_qubits) / per_col)
    if n_cols > cache_column_slots(layout, params):
        raise CapacityError("AOD columns exceed cache parking slots")

    rc = layout.right_cache
    pitch = params.storage_pitch
    column_of_qubit: dict[int, tuple[int, int]] = {}
    columns = []
    for c in range(n_cols):
        qubits = grouping.aod_qubits[c * per_col:(c + 1) * per_col]
        home_x = rc.x0 + ZONE_MARGIN + c * pitch
        atoms = []
        for slot, q in enumerate(qubits):
            column_of_qubit[q] = (c, slot)
            atoms.append((q, rc.y0 + ZONE_MARGIN + slot * pitch))
        columns.append(AodColumn(home_x, tuple(atoms), home_x))
    aod_state = AodState(tuple(columns))
    aod_state.check(params)

    # Memory loading plan. Static atoms group by target site x so each
    # ferry column delivers one site column; mobile atoms group by their
    # final AOD column. Groups sit left to right at storage pitch.
    by_site_x: dict[float, list[int]] = {}
    for q in grouping.slm_qubits:
        x = grid.sites[site_of_qubit[q]][0]
        by_site_x.setdefault(x, []).append(q)

    mem = layout.memory
    n_groups = len(by_site_x) + n_cols
    if n_groups > memory_column_slots(layout, params):
        raise CapacityError("memory columns exhausted by initialization plan")
    rows = memory_rows(layout, params)

    groups: list[MemoryGroup] = []
    n_ferries = len(by_site_x)
    for i, x in enumerate(sorted(by_site_x)):
        # Ferry cids start after the final AOD column cids.
        cid = n_cols + i
        mem_x = mem.x0 + ZONE_MARGIN + i * pitch
        qubits = sorted(by_site_x[x], key=lambda q: grid.sites[site_of_qubit[q]][1])
        if len(qubits) > rows:
            raise CapacityError("memory column height exhausted")
        g = MemoryGroup(cid, SLM, mem_x)
        for k, q in enumerate(qubits):
            sx, sy = grid.sites[site_of_qubit[q]]
            g.atoms.append((q, mem.y0 + ZONE_MARGIN + k * pitch, sx, sy))
        groups.append(g)
    for c in range(n_cols):
        mem_x = mem.x0 + ZONE_MARGIN + (n_ferries + c) * pitch
        g = MemoryGroup(c, AOD, mem_x)
        col = aod_state.columns[c]
        for k, (q, home_y) in enumerate(col.atoms):
            g.atoms.append((q, mem.y0 + ZONE_MARGIN + k * pitch, col.x, home_y))
        groups.append(g)

    return InitialPlacement(
        grouping=grouping,
        site_of_qubit=site_of_qubit,
        column_of_qubit=column_of_qubit,
        aod_state=aod_state,
        n_aod_columns=n_cols,
        n_ferries=n_ferries,
        memory_groups=groups,
    )


def initialization_schedule(placement: InitialPlacement, layout: ZoneLayout,
                            params: PhysParams,
                            serial_movement: bool = False
                            ) -> tuple[list[Event], float, int]:
    """Events realizing the three-trap-change initialization.

    1. parallel pickup of the static group out of memory (1 serial TC),
    2. ferry columns carry them over their site columns, deposit (1 TC),
    3. parallel pickup of the remaining atoms (1 TC), park in right cache.
    Ferries dissolve on deposit, so no empty return trip is emitted.
    Returns (events, end time, serial trap change count == 3).
    """
    events: list[Event] = []
    t = 0.0
    tc = params.trap_change_time
    slm_groups = [g for g in placement.memory_groups if g.kind == SLM]
    aod_groups = [g for g in placement.memory_groups if g.kind == AOD]

    # TC 1: memory SLM -> ferry AOD columns, all in parallel.
    transfers = [
        TrapTransfer(a, g.mem_x, my, column=g.column)
        for g in slm_groups for a, my, _, _ in g.atoms
    ]
    events.append(TrapChange(t, t + tc, 0, SLM_TO_AOD, transfers))
    t += tc

    # Ferries move over their target site columns.
    moves = [
        (g.column, g.mem_x, g.atoms[0][2],
         [(a, my, ty) for a, my, _, ty in g.atoms])
        for g in slm_groups
    ]
    dur = movement_phase_time(moves, params, serial_movement)
    if dur > 0:
        events.extend(ordered_phase_moves(moves, t, t + dur, 0))
        t += dur

    # TC 2: deposit into the compute SLM sites; ferries dissolve.
    transfers = [
        TrapTransfer(a, tx, ty)
        for g in slm_groups for a, _, tx, ty in g.atoms
    ]
    events.append(TrapChange(t, t + tc, 0, AOD_TO_SLM, transfers))
    t += tc

    # TC 3: remaining atoms out of memory into the final AOD columns.
    transfers = [
        TrapTransfer(a, g.mem_x, my, column=g.column)
        for g in aod_groups for a, my, _, _ in g.atoms
    ]
    events.append(TrapChange(t, t + tc, 0, SLM_TO_AOD, transfers))
    t += tc

    # Columns park in the right cache at their home slots.
    moves = [
        (g.column, g.mem_x, g.atoms[0][2],
         [(a, my, ty) for a, my, _, ty in g.atoms])
        for g in aod_groups
    ]
    dur = movement_phase_time(moves, params, serial_movement)
    if dur > 0:
        events.extend(ordered_phase_moves(moves, t, t + dur, 0))
        t += dur

    return events, t, INIT_TRAP_CHANGES
