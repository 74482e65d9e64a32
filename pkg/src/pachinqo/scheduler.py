"""Layer-by-layer schedule compiler for the zoned atom array.

Execution alternates U3 layers (parallel single-qubit rotations, location
independent) with CZ layers. A CZ layer relocates all columns to the
starting cache, then processes them from the cache side nearest compute:
each column places next to the static partner of one executable CZ (or of
one pending inserted-SWAP step), spreading its uninvolved atoms apart, or
retreats toward the opposite cache (dropping into memory when a placed
column blocks the way). One illumination then fires every staged pair at
once. Start sides toggle right-left-right so no column gets standing
priority; a layer that ends because placed columns exhaust compute access
keeps the same side for the remaining columns.

Same-trap conflicts insert SWAPs executed preemptively, one component
gate per layer. The trapchange variant resolves conflicts with mid-
circuit trap changes instead; onecache keeps a single cache and returns
moved columns to their home slots each layer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .circuit import Circuit, Frontier, Gate, decompose_swap
from .machine import (
    INTERACTION_OFFSET,
    PhysParams,
    SlmGrid,
    ZONE_MARGIN,
    ZoneLayout,
    aod_capacity,
    build_layout,
    cache_column_slots,
    generate_grid,
    pair_clear_sites,
    slm_capacity,
)
from .metrics import movement_phase_time
from .placement import (
    InitialPlacement,
    assign_atoms,
    degree_split_group,
    greedy_maxcut_group,
    initialization_schedule,
)
from .schedule import (
    AOD_TO_SLM,
    SLM_TO_AOD,
    ColumnMove,
    CzEntry,
    Illumination,
    Measure,
    Schedule,
    TrapChange,
    TrapTransfer,
    U3Entry,
    U3LayerEvent,
    ordered_phase_moves,
)

TECHNIQUES = ("pachinqo", "degreesplit", "onecache", "trapchange")

RIGHT = 1   # columns start in the right cache, processed left-most first
LEFT = -1


class SchedulerError(RuntimeError):
    """Internal contract violation; indicates a compiler bug."""


def toggle_direction(direction: int) -> int:
    return -direction


@dataclass
class _Column:
    cid: int
    x: float
    atoms: list[int] = field(default_factory=list)  # atom ids, slot order
    home_x: float = 0.0


class _Obstacles:
    """Compute-zone atom positions for crosstalk clearance checks."""

    def __init__(self, capacity: int):
        self.x = np.zeros(capacity)
        self.y = np.zeros(capacity)
        self.n = 0
        self.index_of: dict[int, int] = {}

    def reset(self) -> None:
        self.n = 0
        self.index_of.clear()

    def add(self, atom: int, x: float, y: float) -> None:
        self.x[self.n] = x
        self.y[self.n] = y
        self.index_of[atom] = self.n
        self.n += 1

    def clear_from(self, px: float, py: float, r2: float) -> bool:
        return kernels.clear_from(self.x, self.y, self.n, px, py, r2)

    def clear_from_except(self, px: float, py: float, r2: float,
                          skip_atom: int) -> bool:
        skip = self.index_of.get(skip_atom, -1)
        return kernels.clear_from_except(self.x, self.y, self.n, px, py, r2, skip)


@dataclass
class _Placement:
    """A feasible column placement produced by _try_place."""

    x: float
    active_atom: int
    active_y: float
    inactive: list[tuple[int, float]]  # (atom, target y), compute or hang


class Compiler:
    def __init__(self, circuit: Circuit, technique: str, grid: SlmGrid,
                 layout: ZoneLayout, params: PhysParams,
                 serial_movement: bool = False):
        if technique not in TECHNIQUES:
            raise ValueError(f"unknown technique {technique!r}")
        if not circuit.is_basis():
            raise ValueError("compile requires a circuit lowered to the basis")
        self.circuit = circuit
        self.technique = technique
        self.grid = grid
        self.layout = layout
        self.params = params
        self.serial = serial_movement

        n = circuit.num_qubits
        group_fn = degree_split_group if technique == "degreesplit" else greedy_maxcut_group
        grouping = group_fn(circuit, slm_capacity(grid, params),
                            aod_capacity(layout, params))
        self.placement: InitialPlacement = assign_atoms(grouping, grid, layout, params)

        # Mutable machine state. Atom ids equal initial qubit ids.
        self.atom_x = [0.0] * n
        self.atom_y = [0.0] * n
        self.atom_col: list[int | None] = [None] * n
        self.atom_site: list[int | None] = [None] * n
        self.qubit_of = list(range(n))
        self.atom_of = list(range(n))
        self.site_atom: dict[int, int] = {}  # site index -> atom id
        self.free_sites = [
            i for i in self._usable_sites()
            if i not in set(self.placement.site_of_qubit.values())
        ]
        self.columns: dict[int, _Column] = {}
        self.col_order: list[int] = []
        self.next_cid = self.placement.n_aod_columns + self.placement.n_ferries

        self.frontier = Frontier(circuit)
        self.swaps: dict[int, dict] = {}  # sid -> {gates, atom_aod, atom_slm, layer}
        self.next_swap_id = 0
        self.swap_count = 0
        self.trap_change_count = 0

        self.events: list = []
        self.t = 0.0
        self.layer = 0
        self.direction = RIGHT
        self.same_side_next = False
        self.obstacles = _Obstacles(n + 4)
        self.busy: set[int] = set()
        self._moved_this_layer: set[int] = set()

    # ------------------------------------------------------------------
    # setup helpers
    def _usable_sites(self) -> list[int]:
        return pair_clear_sites(self.grid, self.params)

    def _apply_initialization(self) -> None:
        events, t_end, tcs = initialization_schedule(
            self.placement, self.layout, self.params, self.serial
        )
        self.events.extend(events)
        self.t = t_end
        self.trap_change_count += tcs
        # Materialize the post-init state directly.
        for q, site in self.placement.site_of_qubit.items():
            x, y = self.grid.sites[site]
            self.atom_x[q], self.atom_y[q] = x, y
            self.atom_site[q] = site
            self.site_atom[site] = q
        for c, col in enumerate(self.placement.aod_state.columns):
            column = _Column(c, col.x, [a for a, _ in col.atoms], col.home_slot)
            self.columns[c] = column
            self.col_order.append(c)
            for a, y in col.atoms:
                self.atom_x[a], self.atom_y[a] = col.x, y
                self.atom_col[a] = c

    # ------------------------------------------------------------------
    # event emission with phase timing
    def _flush_moves(self, moves) -> None:
        """Close one concurrent movement phase."""
        if not moves:
            return
        dur = movement_phase_time(moves, self.params, self.serial)
        evs = ordered_phase_moves(moves, self.t, self.t + dur, self.layer)
        self.events.extend(evs)
        self.t += dur

    def _move_column(self, col: _Column, to_x: float,
                     y_targets: dict[int, float], buffer: list) -> None:
        """Queue a column move into the current phase buffer and apply it."""
        atoms = []
        for a in col.atoms:
            ty = y_targets.get(a, self.atom_y[a])
            atoms.append((a, self.atom_y[a], ty))
        if to_x == col.x and all(fy == ty for _, fy, ty in atoms):
            return
        buffer.append((col.cid, col.x, to_x, atoms))
        for a, _, ty in atoms:
            self.atom_x[a] = to_x
            self.atom_y[a] = ty
        col.x = to_x
        self._moved_this_layer.add(col.cid)

    # ------------------------------------------------------------------
    # geometry helpers
    def _cache(self, side: int):
        return self.layout.right_cache if side == RIGHT else self.layout.left_cache

    def _cache_slot_x(self, side: int, i: int) -> float:
        return self._cache(side).x0 + ZONE_MARGIN + i * self.params.storage_pitch

    def _parked_ys(self, col: _Column, zone) -> dict[int, float]:
        base = zone.y0 + ZONE_MARGIN
        return {a: base + i * self.params.storage_pitch
                for i, a in enumerate(col.atoms)}

    def _memory_stack_ys(self, col: _Column) -> dict[int, float]:
        mem = self.layout.memory
        base = mem.y0 + ZONE_MARGIN
        return {a: base + i * self.params.storage_pitch
                for i, a in enumerate(col.atoms)}

    def _hang_y(self, j: int) -> float:
        """Parking depth below compute for spread overflow atoms."""
        return self.layout.memory.y1 - ZONE_MARGIN - j * self.params.storage_pitch

    def _neighbors(self, cid: int) -> tuple[float, float]:
        """Current x of the nearest nonempty columns either side of cid."""
        idx = self.col_order.index(cid)
        lo = -math.inf
        for c in reversed(self.col_order[:idx]):
            if self.columns[c].atoms:
                lo = self.columns[c].x
                break
        hi = math.inf
        for c in self.col_order[idx + 1:]:
            if self.columns[c].atoms:
                hi = self.columns[c].x
                break
        return lo, hi

    # ------------------------------------------------------------------
    # compilation entry point
    def run(self) -> Schedule:
        self._apply_initialization()
        guard_budget = 60 * (len(self.circuit.gates) + self.circuit.num_qubits + 10)
        rounds = 0
        while not self.frontier.done():
            rounds += 1
            if rounds > guard_budget:
                raise SchedulerError("compilation did not converge")
            executed = self._u3_rounds()
            if self.frontier.done():
                break
            executed += self._cz_layer()
            if executed == 0:
                self._guard()
        self._measurement()
        schedule = Schedule(
            technique=self.technique,
            grid=self.grid.kind,
            params=self.params,
            source_name=self.circuit.source_name,
            num_qubits=self.circuit.num_qubits,
            serial_movement=self.serial,
            events=self.events,
            final_mapping={q: self.atom_of[q] for q in range(self.circuit.num_qubits)},
            swap_count=self.swap_count,
            trap_change_count=self.trap_change_count,
        )
        return schedule

    # ------------------------------------------------------------------
    # U3 layers
    def _swap_u3_due(self, layer: int) -> list[int]:
        due = []
        for sid in sorted(self.swaps):
            step = self.frontier.swap_step(sid)
            if self.swaps[sid]["gates"][step].kind == "u3" and \
                    self.swaps[sid]["layer"] < layer:
                due.append(sid)
        return due

    def _u3_rounds(self) -> int:
        """Greedy U3 layers until no rotation is frontier-exposed."""
        executed = 0
        while True:
            native = [q for q in range(self.circuit.num_qubits)
                      if self.frontier.executable_u3(q)]
            swap_due = self._swap_u3_due(self.layer + 1)
            if not native and not swap_due:
                return executed
            self.layer += 1
            entries = []
            for q in native:
                g = self.circuit.gates[self.frontier.next_gate(q)]
                entries.append(U3Entry(q, self.atom_of[q], g.params))
                self.frontier.advance(g)
            for sid in swap_due:
                info = self.swaps[sid]
                step = self.frontier.swap_step(sid)
                g = info["gates"][step]
                q = g.qubits[0]
                entries.append(U3Entry(q, self.atom_of[q], g.params,
                                       (sid, step)))
                info["layer"] = self.layer
                if self.frontier.advance(g) is not None:
                    self._complete_swap(sid)
            self.events.append(
                U3LayerEvent(self.t, self.t + self.params.u3_time, self.layer, entries)
            )
            self.t += self.params.u3_time
            executed += len(entries)

    def _complete_swap(self, sid: int) -> None:
        info = self.swaps.pop(sid)
        qa = self.qubit_of[info["atom_aod"]]
        qb = self.qubit_of[info["atom_slm"]]
        self.qubit_of[info["atom_aod"]] = qb
        self.qubit_of[info["atom_slm"]] = qa
        self.atom_of[qa] = info["atom_slm"]
        self.atom_of[qb] = info["atom_aod"]

    # ------------------------------------------------------------------
    # CZ layers
    def _start_side(self) -> int:
        return RIGHT if self.technique == "onecache" else self.direction

    def _relocate_all(self, buffer: list, side: int,
                      exclude: set[int] = frozenset()) -> None:
        """Move every nonempty column to the `side` cache parking slots."""
        cache = self._cache(side)
        live = [c for c in self.col_order
                if self.columns[c].atoms and c not in exclude]
        for i, cid in enumerate(live):
            col = self.columns[cid]
            self._move_column(col, self._cache_slot_x(side, i),
                              self._parked_ys(col, cache), buffer)

    def _cz_layer(self) -> int:
        self.layer += 1
        self.busy.clear()
        self._moved_this_layer.clear()
        staged: list[CzEntry] = []
        executed = 0

        side = self._start_side()
        self.same_side_next = False

        buffer: list = []
        if self.technique == "onecache":
            # Columns returned home at the end of the previous layer.
            pass
        else:
            self._relocate_all(buffer, side)
        self._flush_moves(buffer)

        # Static compute atoms are this layer's initial obstacle set.
        self.obstacles.reset()
        for site, atom in sorted(self.site_atom.items()):
            x, y = self.atom_x[atom], self.atom_y[atom]
            self.obstacles.add(atom, x, y)

        order = [c for c in self.col_order if self.columns[c].atoms]
        if side == LEFT:
            order.reverse()

        buffer = []
        for cid in order:
            col = self.columns[cid]
            action, detail = self._find_action(col, staged, buffer)
            if action == "placed":
                executed += 1
            elif action == "blocked":
                # Compute access is exhausted for this and later columns:
                # finish the layer, keep the same side next layer.
                self.same_side_next = True
                break
            elif action == "swap":
                executed += 1
                if not self._retreat(col, side, buffer):
                    self.same_side_next = True
                    break
            elif action == "tc":
                executed += 1
                buffer = self._trapchange_action(col, detail, buffer)
            else:  # idle
                if not self._retreat(col, side, buffer):
                    self.same_side_next = True
                    break
        self._flush_moves(buffer)

        if staged:
            self.events.append(
                Illumination(self.t, self.t + self.params.cz_time, self.layer,
                             staged)
            )
            self.t += self.params.cz_time

        if self.technique == "onecache":
            buffer = []
            cache = self.layout.right_cache
            for cid in self.col_order:
                col = self.columns[cid]
                if col.atoms and cid in self._moved_this_layer:
                    self._move_column(col, col.home_x,
                                      self._parked_ys(col, cache), buffer)
            self._flush_moves(buffer)

        if not self.same_side_next and self.technique != "onecache":
            self.direction = toggle_direction(self.direction)
        return executed

    # -- per-column decision -------------------------------------------
    def _find_action(self, col: _Column, staged: list[CzEntry],
                     buffer: list):
        """Pick and apply this column's action for the current layer."""
        wants_blocked = False
        conflict: tuple[int, int, int] | None = None  # (atom, q, partner q)
        for atom in sorted(col.atoms, key=lambda a: -self.atom_y[a]):
            q = self.qubit_of[atom]
            if q in self.frontier.lock:
                sid = self.frontier.lock[q]
                info = self.swaps[sid]
                if info["atom_aod"] != atom or info["layer"] >= self.layer:
                    continue
                step = self.frontier.swap_step(sid)
                gate = info["gates"][step]
                if gate.kind != "cz":
                    continue
                partner_atom = info["atom_slm"]
                if partner_atom in self.busy:
                    continue
                plan = self._try_place(col, atom, partner_atom)
                if plan is None:
                    wants_blocked = True
                    continue
                self._commit_placement(col, plan, partner_atom, gate, staged, buffer)
                info["layer"] = self.layer
                return "placed", None
            i = self.frontier.next_gate(q)
            if i == -1:
                continue
            g = self.circuit.gates[i]
            if g.kind != "cz":
                continue
            p = g.qubits[0] if g.qubits[1] == q else g.qubits[1]
            if not self.frontier.executable_cz(q, p):
                continue
            partner_atom = self.atom_of[p]
            if self.atom_site[partner_atom] is not None:
                if partner_atom in self.busy:
                    continue
                plan = self._try_place(col, atom, partner_atom)
                if plan is None:
                    wants_blocked = True
                    continue
                self._commit_placement(col, plan, partner_atom, g, staged, buffer)
                return "placed", None
            elif conflict is None:
                conflict = (atom, q, p)

        if conflict is not None:
            if self.technique == "trapchange":
                detail = self._plan_trapchange(col, conflict)
                if detail is not None:
                    return "tc", detail
            partner = self._select_swap_partner(conflict[0], conflict[2])
            if partner is not None:
                self._begin_swap(conflict[0], partner)
                return "swap", None
        if wants_blocked:
            return "blocked", None
        return "idle", None

    # -- placement geometry ----------------------------------------------
    def _try_place(self, col: _Column, active_atom: int,
                   partner_atom: int) -> _Placement | None:
        params = self.params
        r2 = params.crosstalk_radius ** 2
        sx, sy = self.atom_x[partner_atom], self.atom_y[partner_atom]
        x = sx + INTERACTION_OFFSET
        lo, hi = self._neighbors(col.cid)
        if not (lo < x < hi):
            return None
        if not self.obstacles.clear_from_except(x, sy, r2, partner_atom):
            return None

        comp = self.layout.compute
        inactive = [a for a in col.atoms if a != active_atom]
        inactive.sort(key=lambda a: -self.atom_y[a])
        placed_ys: list[float] = []
        plan: list[tuple[int, float]] = []
        hang = 0
        for a in inactive:
            y = self._spread_y(x, sy, placed_ys, comp, r2)
            if y is None:
                y = self._hang_y(hang)
                hang += 1
            else:
                placed_ys.append(y)
            plan.append((a, y))
        return _Placement(x, active_atom, sy, plan)

    def _spread_y(self, x: float, active_y: float, taken: list[float],
                  comp, r2: float) -> float | None:
        """First clear alternating-offset spread position, if any."""
        r = self.params.crosstalk_radius
        for k in range(1, 64):
            mag = (k + 1) // 2 * r
            y = active_y + mag if k % 2 else active_y - mag
            if not (comp.y0 <= y <= comp.y1):
                continue
            if mag > max(comp.y1 - comp.y0, 1) + r:
                break
            if any(abs(y - t) < r for t in taken):
                continue
            if not self.obstacles.clear_from(x, y, r2):
                continue
            return y
        return None

    def _commit_placement(self, col: _Column, plan: _Placement,
                          partner_atom: int, gate: Gate,
                          staged: list[CzEntry], buffer: list) -> None:
        y_targets = {plan.active_atom: plan.active_y}
        y_targets.update({a: y for a, y in plan.inactive})
        self._move_column(col, plan.x, y_targets, buffer)
        comp = self.layout.compute
        self.obstacles.add(plan.active_atom, plan.x, plan.active_y)
        for a, y in plan.inactive:
            if comp.contains(plan.x, y):
                self.obstacles.add(a, plan.x, y)
        self.busy.add(plan.active_atom)
        self.busy.add(partner_atom)
        qa = self.qubit_of[plan.active_atom]
        qp = self.qubit_of[partner_atom]
        order = gate.qubits
        apos = (plan.x, plan.active_y)
        ppos = (self.atom_x[partner_atom], self.atom_y[partner_atom])
        if order == (qa, qp):
            entry = CzEntry(order, (plan.active_atom, partner_atom), (apos, ppos),
                            (gate.origin.swap_id, gate.origin.step) if gate.origin else None)
        else:
            entry = CzEntry(order, (partner_atom, plan.active_atom), (ppos, apos),
                            (gate.origin.swap_id, gate.origin.step) if gate.origin else None)
        staged.append(entry)
        self.frontier.advance(gate)

    # -- retreat ----------------------------------------------------------
    def _retreat(self, col: _Column, side: int, buffer: list) -> bool:
        """Clear the way for later columns: park in the opposite cache, or
        next to the blocking column and down into memory. Returns False if
        no legal spot exists, in which case the column stays parked (and
        blocks the rest of the layer)."""
        if self.technique == "onecache":
            return self._onecache_clear(col, buffer)
        opposite = -side
        cache = self._cache(opposite)
        lo, hi = self._neighbors(col.cid)
        slots = [self._cache_slot_x(opposite, i)
                 for i in range(self._cache_slot_count())]
        occupied = {round(c.x, 6) for c in self.columns.values()
                    if c.atoms and c.cid != col.cid}
        free = [s for s in slots if round(s, 6) not in occupied and lo < s < hi]
        if side == LEFT:
            free.reverse()  # fill the right cache from compute outward
        if free:
            self._move_column(col, free[0], self._parked_ys(col, cache), buffer)
            return True
        # Blocked: tuck in beside the neighbor and drop into memory.
        mem = self.layout.memory
        if side == RIGHT:
            x = lo + self.params.storage_pitch
        else:
            x = hi - self.params.storage_pitch
        if not (mem.x0 <= x <= mem.x1) or not (lo < x < hi):
            return False
        self._move_column(col, x, self._memory_stack_ys(col), buffer)
        return True

    def _cache_slot_count(self) -> int:
        return cache_column_slots(self.layout, self.params)

    def _onecache_clear(self, col: _Column, buffer: list) -> bool:
        """OneCache keeps idle columns home unless they block: idle columns
        detour into memory for the layer and return home afterwards. They
        pack tightly against memory's left edge so as few site columns as
        possible fall into their shadow."""
        lo, hi = self._neighbors(col.cid)
        mem = self.layout.memory
        x = mem.x0 if lo == -math.inf else lo + self.params.storage_pitch
        x = max(x, mem.x0)
        if not (lo < x < hi) or x > mem.x1:
            return False  # cannot clear; stays parked and blocks the layer
        self._move_column(col, x, self._memory_stack_ys(col), buffer)
        return True

    # -- inserted swaps -----------------------------------------------------
    def _next_cz_partner(self, q: int) -> int | None:
        lst = self.frontier._by_qubit[q]
        for i in lst[self.frontier._pos[q]:]:
            g = self.circuit.gates[i]
            if g.kind == "cz":
                return g.qubits[0] if g.qubits[1] == q else g.qubits[1]
        return None

    def _swap_partner_rank(self, s_atom: int, forced: bool) -> int | None:
        s = self.qubit_of[s_atom]
        if s in self.frontier.lock:
            return None
        nxt = self._next_cz_partner(s)
        if nxt is None:
            if self.frontier.next_gate(s) == -1:
                return 2
            return 3
        if self.atom_site[self.atom_of[nxt]] is not None:
            return 1  # mutual benefit: its partner is static too
        return 4 if forced else None

    def _select_swap_partner(self, aod_atom: int, other_q: int,
                             forced: bool = False) -> int | None:
        """Static partner for a same-trap conflict, best rank first:
        (1) static atoms whose own next CZ partner is static, (2) finished
        atoms, (3) atoms with only rotations left; a forced search (the
        progress guard) may also pick (4) atoms whose next CZ partner is
        mobile. Nearest wins within a rank, then lowest atom id."""
        ax, ay = self.atom_x[aod_atom], self.atom_y[aod_atom]
        best = None
        for site, s_atom in sorted(self.site_atom.items()):
            if self.qubit_of[s_atom] == other_q:
                continue
            rank = self._swap_partner_rank(s_atom, forced)
            if rank is None:
                continue
            d = (self.atom_x[s_atom] - ax) ** 2 + (self.atom_y[s_atom] - ay) ** 2
            key = (rank, d, s_atom)
            if best is None or key < best:
                best = key
        return best[2] if best is not None else None

    def _begin_swap(self, aod_atom: int, slm_atom: int) -> None:
        sid = self.next_swap_id
        self.next_swap_id += 1
        qa, qb = self.qubit_of[aod_atom], self.qubit_of[slm_atom]
        self.frontier.begin_swap(sid, qa, qb)
        self.swaps[sid] = {
            "gates": decompose_swap(qa, qb, sid),
            "atom_aod": aod_atom,
            "atom_slm": slm_atom,
            "layer": 0,
        }
        self.swap_count += 1

    # -- trapchange variant ---------------------------------------------
    def _plan_trapchange(self, col: _Column, conflict):
        """Deposit the conflicted atom into a free clear site, or extract
        a statically-conflicted atom into this column's free slot."""
        atom, q, p = conflict
        params = self.params
        r2 = params.crosstalk_radius ** 2
        lo, hi = self._neighbors(col.cid)
        occupied = set(self.site_atom)
        best = None
        for site in self.free_sites:
            if site in occupied:
                continue
            sx, sy = self.grid.sites[site]
            if not (lo < sx < hi):
                continue
            if not self.obstacles.clear_from(sx, sy, r2):
                continue
            d = (sx - self.atom_x[atom]) ** 2 + (sy - self.atom_y[atom]) ** 2
            key = (d, site)
            if best is None or key < best:
                best = key
        if best is not None:
            return ("deposit", atom, best[1])
        if len(col.atoms) < params.max_atoms_per_column:
            for site, s_atom in sorted(self.site_atom.items()):
                s = self.qubit_of[s_atom]
                if s in self.frontier.lock or s_atom in self.busy:
                    continue
                nxt = self._next_cz_partner(s)
                if nxt is None:
                    continue
                if self.atom_site[self.atom_of[nxt]] is None:
                    continue  # its partner is mobile; extraction won't help
                sx, sy = self.grid.sites[site]
                if not (lo < sx < hi):
                    continue
                if any(abs(self.atom_y[a] - sy) < params.storage_pitch
                       for a in col.atoms):
                    continue
                return ("extract", s_atom, site)
        return None

    def _trapchange_action(self, col: _Column, detail, buffer: list) -> list:
        """Apply a mid-circuit trap change; returns a fresh move buffer."""
        kind, atom, site = detail
        sx, sy = self.grid.sites[site]
        params = self.params
        if kind == "deposit":
            # Align the atom over the site, tuck the others below compute.
            y_targets = {atom: sy}
            hang = 0
            for a in col.atoms:
                if a != atom:
                    y_targets[a] = self._hang_y(hang)
                    hang += 1
            self._move_column(col, sx, y_targets, buffer)
            self._flush_moves(buffer)
            self.events.append(TrapChange(
                self.t, self.t + params.trap_change_time, self.layer,
                AOD_TO_SLM, [TrapTransfer(atom, sx, sy)]))
            self.t += params.trap_change_time
            self.trap_change_count += 1
            col.atoms.remove(atom)
            self.atom_col[atom] = None
            self.atom_site[atom] = site
            self.site_atom[site] = atom
            self.free_sites.remove(site)
            self.obstacles.add(atom, sx, sy)
        else:  # extract
            y_targets = {}
            hang = 0
            for a in col.atoms:
                y_targets[a] = self._hang_y(hang)
                hang += 1
            self._move_column(col, sx, y_targets, buffer)
            self._flush_moves(buffer)
            self.events.append(TrapChange(
                self.t, self.t + params.trap_change_time, self.layer,
                SLM_TO_AOD, [TrapTransfer(atom, sx, sy, column=col.cid)]))
            self.t += params.trap_change_time
            self.trap_change_count += 1
            del self.site_atom[site]
            self.atom_site[atom] = None
            self.atom_col[atom] = col.cid
            col.atoms.append(atom)
            self.free_sites.append(site)
            self.free_sites.sort()
        buffer = []
        side = self._start_side() if self.technique == "onecache" else self.direction
        self._retreat(col, side, buffer)
        return buffer

    # ------------------------------------------------------------------
    # progress guard
    def _isolation_feasible(self, mobile_atom: int, static_atom: int) -> bool:
        """Whether an isolation layer can reach the static atom's site.

        With a dual cache the lower-cid columns always fit in the left
        cache, so any site is reachable. OneCache must tuck them into
        memory left of the target, which bounds how far left a site can
        be serviced.
        """
        if self.technique != "onecache":
            return True
        cid = self.atom_col[mobile_atom]
        idx = self.col_order.index(cid)
        k = sum(1 for c in self.col_order[:idx] if self.columns[c].atoms)
        mem = self.layout.memory
        lo_after = mem.x0 + (k - 1) * self.params.storage_pitch if k else -math.inf
        return lo_after < self.atom_x[static_atom] + INTERACTION_OFFSET

    def _guard(self) -> None:
        """Forced progress when a full round executed nothing.

        Pending inserted-SWAP CZ steps and frontier-executable CZ gates are
        serviced in an isolation layer: every other column parks out of the
        way, so the placement is geometrically guaranteed. Same-trap
        conflicts fall back to a forced swap initiation, and a onecache
        site shadowed by too many idle columns is freed by extracting its
        atom into the blocked column (one counted trap change).
        """
        for sid in sorted(self.swaps):
            step = self.frontier.swap_step(sid)
            gate = self.swaps[sid]["gates"][step]
            info = self.swaps[sid]
            if gate.kind == "cz" and self._isolation_feasible(
                    info["atom_aod"], info["atom_slm"]):
                self._isolation_layer(info["atom_aod"], info["atom_slm"], gate)
                info["layer"] = self.layer
                return
        blocked: list[tuple[int, int, Gate]] = []
        for g in self.circuit.gates:
            if g.kind != "cz":
                continue
            q1, q2 = g.qubits
            if not self.frontier.executable_cz(q1, q2):
                continue
            a1, a2 = self.atom_of[q1], self.atom_of[q2]
            s1, s2 = self.atom_site[a1] is not None, self.atom_site[a2] is not None
            if s1 != s2:
                mobile, static = (a2, a1) if s1 else (a1, a2)
                if self._isolation_feasible(mobile, static):
                    self._isolation_layer(mobile, static, g)
                    return
                blocked.append((mobile, static, g))
                continue
            if not s1:  # both mobile: force a swap for the lower qubit
                atom = a1 if q1 < q2 else a2
                other = q2 if q1 < q2 else q1
                partner = self._select_swap_partner(atom, other, forced=True)
                if partner is not None:
                    self._begin_swap(atom, partner)
                    return
                continue
            # both static: swap one operand out through a mobile atom
            donor = self._pick_swap_donor()
            if donor is not None:
                self._begin_swap(donor, a1 if q1 < q2 else a2)
                return
        for mobile, static, g in blocked:
            # Last resort (onecache only): the site is shadowed by idle
            # columns, so pull its atom into the blocked column instead.
            cid = self.atom_col[mobile]
            col = self.columns[cid]
            if len(col.atoms) >= self.params.max_atoms_per_column:
                continue
            site = self.atom_site[static]
            sx, sy = self.grid.sites[site]
            lo, hi = self._neighbors(cid)
            if not (lo < sx < hi):
                continue
            if any(abs(self.atom_y[a] - sy) < self.params.storage_pitch
                   for a in col.atoms):
                continue
            self.layer += 1
            self._moved_this_layer.clear()
            buffer: list = []
            y_targets = {a: self._hang_y(j) for j, a in enumerate(col.atoms)}
            self._move_column(col, sx, y_targets, buffer)
            self._flush_moves(buffer)
            self.events.append(TrapChange(
                self.t, self.t + self.params.trap_change_time, self.layer,
                SLM_TO_AOD, [TrapTransfer(static, sx, sy, column=cid)]))
            self.t += self.params.trap_change_time
            self.trap_change_count += 1
            del self.site_atom[site]
            self.atom_site[static] = None
            self.atom_col[static] = cid
            col.atoms.append(static)
            self.free_sites.append(site)
            self.free_sites.sort()
            buffer = []
            for c in self.col_order:
                other = self.columns[c]
                if other.atoms and c in self._moved_this_layer:
                    self._move_column(other, other.home_x,
                                      self._parked_ys(other, self.layout.right_cache),
                                      buffer)
            self._flush_moves(buffer)
            return
        raise SchedulerError("progress guard found no actionable gate")

    def _pick_swap_donor(self) -> int | None:
        """A mobile atom to pull a statically-conflicted qubit into the AOD:
        prefer finished qubits, then conflicted ones, then any unlocked."""
        best = None
        for cid in self.col_order:
            for atom in self.columns[cid].atoms:
                q = self.qubit_of[atom]
                if q in self.frontier.lock:
                    continue
                if self.frontier.next_gate(q) == -1:
                    rank = 0
                else:
                    nxt = self._next_cz_partner(q)
                    mobile_partner = (
                        nxt is not None and self.atom_site[self.atom_of[nxt]] is None
                    )
                    rank = 1 if mobile_partner else 2
                key = (rank, atom)
                if best is None or key < best:
                    best = key
        return best[1] if best is not None else None

    def _isolation_layer(self, active_atom: int, partner_atom: int,
                         gate: Gate) -> None:
        """One CZ layer with a single column placed and all others parked."""
        self.layer += 1
        self.busy.clear()
        self._moved_this_layer.clear()
        cid = self.atom_col[active_atom]
        col = self.columns[cid]
        buffer: list = []
        idx = self.col_order.index(cid)
        if self.technique == "onecache":
            mem = self.layout.memory
            k = 0
            for c in self.col_order[:idx]:
                other = self.columns[c]
                if other.atoms:
                    self._move_column(other, mem.x0 + k * self.params.storage_pitch,
                                      self._memory_stack_ys(other), buffer)
                    k += 1
        else:
            lc = self.layout.left_cache
            k = 0
            for c in self.col_order[:idx]:
                other = self.columns[c]
                if other.atoms:
                    self._move_column(other, self._cache_slot_x(LEFT, k),
                                      self._parked_ys(other, lc), buffer)
                    k += 1
        rc = self.layout.right_cache
        k = self._cache_slot_count() - 1
        for c in reversed(self.col_order[idx + 1:]):
            other = self.columns[c]
            if other.atoms:
                self._move_column(other, self._cache_slot_x(RIGHT, k),
                                  self._parked_ys(other, rc), buffer)
                k -= 1
        self._flush_moves(buffer)

        self.obstacles.reset()
        for site, atom in sorted(self.site_atom.items()):
            self.obstacles.add(atom, self.atom_x[atom], self.atom_y[atom])
        plan = self._try_place(col, active_atom, partner_atom)
        if plan is None:
            raise SchedulerError("isolation placement failed")
        staged: list[CzEntry] = []
        buffer = []
        self._commit_placement(col, plan, partner_atom, gate, staged, buffer)
        self._flush_moves(buffer)
        self.events.append(
            Illumination(self.t, self.t + self.params.cz_time, self.layer, staged)
        )
        self.t += self.params.cz_time
        if self.technique == "onecache":
            buffer = []
            for c in self.col_order:
                other = self.columns[c]
                if other.atoms and c in self._moved_this_layer:
                    self._move_column(other, other.home_x,
                                      self._parked_ys(other, rc), buffer)
            self._flush_moves(buffer)

    # ------------------------------------------------------------------
    # measurement epilogue
    def _measurement(self) -> None:
        """Readout: deposit mobile atoms in the readout cache, measure,
        then ferry the compute atoms over and measure them. Three serial
        trap changes, mirroring initialization."""
        if self.frontier.lock:
            raise SchedulerError("measurement reached with active swaps")
        self.layer += 1
        params = self.params
        rc = self.layout.right_cache

        buffer: list = []
        if self.technique == "onecache":
            # Columns are already at their right-cache homes.
            pass
        else:
            self._relocate_all(buffer, RIGHT)
        self._flush_moves(buffer)

        # TC a: deposit every mobile atom where it is parked.
        transfers = []
        measured: list[tuple[int, int, float, float]] = []
        for cid in self.col_order:
            col = self.columns[cid]
            for a in col.atoms:
                transfers.append(TrapTransfer(a, self.atom_x[a], self.atom_y[a]))
                measured.append((a, self.qubit_of[a], self.atom_x[a], self.atom_y[a]))
                self.atom_col[a] = None
            col.atoms = []
        self.events.append(TrapChange(self.t, self.t + params.trap_change_time,
                                      self.layer, AOD_TO_SLM, transfers))
        self.t += params.trap_change_time
        self.trap_change_count += 1
        if measured:
            self.events.append(Measure(self.t, self.t, self.layer,
                                       sorted(measured)))

        # TC b: pick the compute atoms up, one ferry column per site column.
        by_x: dict[float, list[int]] = {}
        for site, atom in sorted(self.site_atom.items()):
            by_x.setdefault(self.grid.sites[site][0], []).append(atom)
        transfers = []
        ferries: list[tuple[int, list[int]]] = []
        for x in sorted(by_x):
            cid = self.next_cid
            self.next_cid += 1
            ferries.append((cid, by_x[x]))
            for a in by_x[x]:
                transfers.append(TrapTransfer(a, self.atom_x[a], self.atom_y[a],
                                              column=cid))
        self.events.append(TrapChange(self.t, self.t + params.trap_change_time,
                                      self.layer, SLM_TO_AOD, transfers))
        self.t += params.trap_change_time
        self.trap_change_count += 1

        # Ferries park on the readout slots in a y band above the atoms
        # already deposited there, so positions never collide.
        y_base = rc.y0 + ZONE_MARGIN + params.max_atoms_per_column * params.storage_pitch
        moves = []
        for i, (cid, atoms) in enumerate(ferries):
            to_x = self._cache_slot_x(RIGHT, i)
            fx = self.atom_x[atoms[0]]
            pairs = []
            for j, a in enumerate(atoms):
                ty = y_base + j * params.storage_pitch
                pairs.append((a, self.atom_y[a], ty))
            moves.append((cid, fx, to_x, pairs))
            for a, _, ty in pairs:
                self.atom_x[a] = to_x
                self.atom_y[a] = ty
        dur = movement_phase_time(moves, params, self.serial)
        if dur > 0:
            self.events.extend(ordered_phase_moves(moves, self.t, self.t + dur,
                                                   self.layer))
            self.t += dur

        # TC c: deposit in readout and measure.
        transfers = []
        measured = []
        for cid, atoms in ferries:
            for a in atoms:
                transfers.append(TrapTransfer(a, self.atom_x[a], self.atom_y[a]))
                measured.append((a, self.qubit_of[a], self.atom_x[a], self.atom_y[a]))
                site = self.atom_site[a]
                if site is not None:
                    del self.site_atom[site]
                    self.atom_site[a] = None
        self.events.append(TrapChange(self.t, self.t + params.trap_change_time,
                                      self.layer, AOD_TO_SLM, transfers))
        self.t += params.trap_change_time
        self.trap_change_count += 1
        if measured:
            self.events.append(Measure(self.t, self.t, self.layer,
                                       sorted(measured)))


def compile_circuit(circuit: Circuit, technique: str = "pachinqo",
                    grid_kind: str = "large-square",
                    params: PhysParams | None = None,
                    layout: ZoneLayout | None = None,
                    serial_movement: bool = False) -> Schedule:
    """Compile a basis circuit into a full timed schedule."""
    params = params or PhysParams()
    if layout is None:
        layout = build_layout(circuit.num_qubits, "auto", params, grid_kind)
    grid = generate_grid(grid_kind, layout, params)
    compiler = Compiler(circuit, technique, grid, layout, params, serial_movement)
    return compiler.run()
