"""Independent schedule validation and a dense state-vector oracle.

The validator replays the event list with its own position/mapping
tracking and its own distance arithmetic (deliberately sharing no
placement code with the scheduler), checking: AOD column ordering, tandem
column membership, illumination blockade geometry, zone containment,
dependency order of executed gates, single measurement per atom, and
timestamp monotonicity.

Convention: atom ids equal the qubits initially mapped onto them; the
mapping then evolves only through completed inserted SWAPs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, decompose_swap
from .machine import PhysParams, SlmGrid, ZoneLayout
from .schedule import (
    AOD_TO_SLM,
    SLM_TO_AOD,
    ColumnMove,
    Illumination,
    Measure,
    Schedule,
    TrapChange,
    U3LayerEvent,
)

ORACLE_QUBIT_CAP = 12
EQUIVALENCE_QUBIT_CAP = 10
TVD_THRESHOLD = 1e-9


@dataclass
class Violation:
    code: str  # ordering|tandem|blockade|zone-bounds|dependency|double-measure|timing
    event: int
    description: str

    def __str__(self) -> str:
        return f"[{self.code}] event {self.event}: {self.description}"


class _Replay:
    def __init__(self, schedule: Schedule, layout: ZoneLayout,
                 params: PhysParams, circuit: Circuit):
        self.sched = schedule
        self.layout = layout
        self.params = params
        self.circuit = circuit
        n = circuit.num_qubits
        self.pos: dict[int, tuple[float, float]] = {}
        self.col_x: dict[int, float] = {}
        self.col_atoms: dict[int, set[int]] = {}
        self.atom_col: dict[int, int] = {}
        self.atom_of = list(range(n))
        self.cursor = [0] * n
        self.by_qubit: list[list[int]] = [[] for _ in range(n)]
        for i, g in enumerate(circuit.gates):
            for q in g.qubits:
                self.by_qubit[q].append(i)
        self.swap_progress: dict[int, int] = {}
        self.swap_qubits: dict[int, tuple[int, int]] = {}
        self.locked: dict[int, int] = {}
        self.measured: set[int] = set()
        self.violations: list[Violation] = []
        self.last_t = -math.inf

    def bad(self, code: str, i: int, msg: str) -> None:
        self.violations.append(Violation(code, i, msg))

    # -- helpers --------------------------------------------------------
    def _check_ordering(self, i: int) -> None:
        xs = [self.col_x[c] for c in sorted(self.col_atoms)
              if self.col_atoms[c]]
        for a, b in zip(xs, xs[1:]):
            if b <= a:
                self.bad("ordering", i,
                         f"column x positions not strictly increasing: {a} >= {b}")
                return

    def _check_bounds(self, i: int) -> None:
        for atom, (x, y) in self.pos.items():
            if not self.layout.in_any_zone(x, y):
                self.bad("zone-bounds", i,
                         f"atom {atom} at ({x:.2f}, {y:.2f}) outside all zones")
                return

    def _expected_gate(self, q: int) -> int | None:
        c = self.cursor[q]
        return self.by_qubit[q][c] if c < len(self.by_qubit[q]) else None

    def _native_u3(self, i: int, qubit: int, atom: int) -> None:
        if qubit in self.locked:
            self.bad("dependency", i, f"locked qubit {qubit} ran a native u3")
            return
        if self.atom_of[qubit] != atom:
            self.bad("dependency", i,
                     f"u3 on qubit {qubit} used atom {atom}, "
                     f"mapped atom is {self.atom_of[qubit]}")
        gi = self._expected_gate(qubit)
        if gi is None or self.circuit.gates[gi].kind != "u3":
            self.bad("dependency", i, f"unexpected u3 on qubit {qubit}")
            return
        self.cursor[qubit] += 1

    def _native_cz(self, i: int, qubits, atoms) -> None:
        q1, q2 = qubits
        if q1 in self.locked or q2 in self.locked:
            self.bad("dependency", i, f"locked qubit in native cz {qubits}")
            return
        if (self.atom_of[q1], self.atom_of[q2]) != tuple(atoms):
            self.bad("dependency", i, f"cz {qubits} on wrong atoms {atoms}")
        g1, g2 = self._expected_gate(q1), self._expected_gate(q2)
        if g1 is None or g1 != g2:
            self.bad("dependency", i, f"cz {qubits} not at both frontiers")
            return
        g = self.circuit.gates[g1]
        if g.kind != "cz" or set(g.qubits) != {q1, q2}:
            self.bad("dependency", i, f"cz {qubits} does not match gate {g}")
            return
        self.cursor[q1] += 1
        self.cursor[q2] += 1

    def _swap_component(self, i: int, origin, kind: str, qubits) -> None:
        sid, step = origin
        if sid not in self.swap_progress:
            if step != 0:
                self.bad("dependency", i, f"swap {sid} began at step {step}")
            qs = set(qubits)
            if len(qubits) == 1:
                # A U3 opener names one qubit; the partner shows at step 1.
                self.swap_progress[sid] = 0
                self.swap_qubits[sid] = (qubits[0], -1)
            else:
                self.swap_qubits[sid] = tuple(qubits)
            self.swap_progress[sid] = 0
            for q in qs:
                if q in self.locked:
                    self.bad("dependency", i, f"qubit {q} double-locked")
                self.locked[q] = sid
        expect = self.swap_progress[sid]
        if step != expect:
            self.bad("dependency", i,
                     f"swap {sid} step {step}, expected {expect}")
        a, b = self.swap_qubits[sid]
        if b == -1 and len(qubits) == 2:
            b = qubits[0] if qubits[1] == a else qubits[1]
            self.swap_qubits[sid] = (a, b)
            if b in self.locked and self.locked[b] != sid:
                self.bad("dependency", i, f"qubit {b} double-locked")
            self.locked[b] = sid
        known = {q for q in (a, b) if q != -1}
        if set(qubits) - known:
            if len(known) == 2:
                self.bad("dependency", i,
                         f"swap {sid} touched foreign qubits {qubits}")
        template = decompose_swap(0, 1)
        if template[step].kind != kind:
            self.bad("dependency", i,
                     f"swap {sid} step {step} should be {template[step].kind}")
        self.swap_progress[sid] = step + 1
        if step == 8:
            a, b = self.swap_qubits[sid]
            self.atom_of[a], self.atom_of[b] = self.atom_of[b], self.atom_of[a]
            del self.swap_progress[sid]
            del self.swap_qubits[sid]
            self.locked = {q: s for q, s in self.locked.items() if s != sid}

    # -- event handlers ---------------------------------------------------
    def handle(self, i: int, ev) -> None:
        if ev.t_start < self.last_t - 1e-9:
            self.bad("timing", i, f"t_start {ev.t_start} decreased")
        if ev.t_end < ev.t_start:
            self.bad("timing", i, "t_end before t_start")
        self.last_t = ev.t_start

        if isinstance(ev, TrapChange):
            self._trap_change(i, ev)
        elif isinstance(ev, ColumnMove):
            self._column_move(i, ev)
        elif isinstance(ev, U3LayerEvent):
            for g in ev.gates:
                if g.origin is not None:
                    self._swap_component(i, g.origin, "u3", (g.qubit,))
                else:
                    self._native_u3(i, g.qubit, g.atom)
        elif isinstance(ev, Illumination):
            self._illumination(i, ev)
        elif isinstance(ev, Measure):
            for atom, qubit, x, y in ev.atoms:
                if atom in self.measured:
                    self.bad("double-measure", i, f"atom {atom} measured twice")
                self.measured.add(atom)
                if self.pos.get(atom) != (x, y):
                    self.bad("tandem", i, f"measure at stale position for {atom}")
        self._check_ordering(i)
        self._check_bounds(i)

    def _trap_change(self, i: int, ev: TrapChange) -> None:
        for tr in ev.transfers:
            if ev.direction == SLM_TO_AOD:
                if tr.column is None:
                    self.bad("tandem", i, f"pickup of {tr.atom} names no column")
                    continue
                known = self.pos.get(tr.atom)
                if known is not None and known != (tr.x, tr.y):
                    self.bad("tandem", i,
                             f"pickup of {tr.atom} at wrong position")
                self.pos[tr.atom] = (tr.x, tr.y)
                if tr.column in self.col_atoms and self.col_atoms[tr.column]:
                    if abs(self.col_x[tr.column] - tr.x) > 1e-9:
                        self.bad("tandem", i,
                                 f"atom {tr.atom} joins column {tr.column} off-x")
                self.col_x[tr.column] = tr.x
                self.col_atoms.setdefault(tr.column, set()).add(tr.atom)
                self.atom_col[tr.atom] = tr.column
            else:
                col = self.atom_col.pop(tr.atom, None)
                if col is None:
                    self.bad("tandem", i, f"deposit of non-mobile atom {tr.atom}")
                    continue
                if self.pos.get(tr.atom) != (tr.x, tr.y):
                    self.bad("tandem", i, f"deposit of {tr.atom} at wrong position")
                self.col_atoms[col].discard(tr.atom)

    def _column_move(self, i: int, ev: ColumnMove) -> None:
        cid = ev.column
        if cid not in self.col_atoms:
            self.bad("tandem", i, f"move of unknown column {cid}")
            return
        members = self.col_atoms[cid]
        listed = {a for a, _, _ in ev.atoms}
        if members != listed:
            self.bad("tandem", i,
                     f"column {cid} move lists {sorted(listed)}, "
                     f"members are {sorted(members)}")
        if abs(self.col_x[cid] - ev.from_x) > 1e-9:
            self.bad("tandem", i, f"column {cid} from_x mismatch")
        for a, fy, ty in ev.atoms:
            px, py = self.pos.get(a, (None, None))
            if py is not None and abs(py - fy) > 1e-9:
                self.bad("tandem", i, f"atom {a} from_y mismatch")
            self.pos[a] = (ev.to_x, ty)
        self.col_x[cid] = ev.to_x

    def _illumination(self, i: int, ev: Illumination) -> None:
        r_int = self.params.interaction_radius
        r_ct = self.params.crosstalk_radius
        comp = self.layout.compute
        pair_of: dict[int, int] = {}
        for k, p in enumerate(ev.pairs):
            (a1, a2) = p.atoms
            for a, (x, y) in zip(p.atoms, p.positions):
                if self.pos.get(a) != (x, y):
                    self.bad("blockade", i,
                             f"pair atom {a} recorded off its tracked position")
            d = math.dist(self.pos[a1], self.pos[a2])
            if d >= r_int:
                self.bad("blockade", i,
                         f"pair {p.atoms} separated by {d:.3f} um")
            pair_of[a1] = k
            pair_of[a2] = k
            if p.origin is not None:
                self._swap_component(i, p.origin, "cz", p.qubits)
            else:
                self._native_cz(i, p.qubits, p.atoms)
        in_compute = [
            (a, xy) for a, xy in sorted(self.pos.items())
            if comp.contains(*xy) and a not in self.measured
        ]
        for ii in range(len(in_compute)):
            a, (ax, ay) = in_compute[ii]
            for jj in range(ii + 1, len(in_compute)):
                b, (bx, by) = in_compute[jj]
                if pair_of.get(a, -1) == pair_of.get(b, -2):
                    continue
                if (ax - bx) ** 2 + (ay - by) ** 2 < r_ct**2 - 1e-9:
                    self.bad("blockade", i,
                             f"atoms {a},{b} within crosstalk radius "
                             f"({math.dist((ax, ay), (bx, by)):.3f} um)")

    def finish(self) -> None:
        n_events = len(self.sched.events)
        for q in range(self.circuit.num_qubits):
            if self.cursor[q] != len(self.by_qubit[q]):
                self.bad("dependency", n_events - 1,
                         f"qubit {q} finished {self.cursor[q]} of "
                         f"{len(self.by_qubit[q])} gates")
        if self.swap_progress:
            self.bad("dependency", n_events - 1,
                     f"unfinished swaps {sorted(self.swap_progress)}")
        missing = set(range(self.circuit.num_qubits)) - self.measured
        if missing:
            self.bad("double-measure", n_events - 1,
                     f"atoms never measured: {sorted(missing)}")
        for q, a in self.sched.final_mapping.items():
            if self.atom_of[q] != a:
                self.bad("dependency", n_events - 1,
                         f"final mapping of qubit {q} is {self.atom_of[q]}, "
                         f"schedule says {a}")


def validate_schedule(schedule: Schedule, layout: ZoneLayout, grid: SlmGrid,
                      params: PhysParams, circuit: Circuit) -> list[Violation]:
    """Replay the schedule against all physical and logical constraints.

    Returns every violation found (empty list means the schedule is ok).
    """
    replay = _Replay(schedule, layout, params, circuit)
    for i, ev in enumerate(schedule.events):
        replay.handle(i, ev)
    replay.finish()
    return replay.violations


# ---------------------------------------------------------------------------
# dense state-vector oracle


def _apply_u3(state: np.ndarray, q: int, theta: float, phi: float,
              lam: float, n: int) -> np.ndarray:
    ct, st = math.cos(theta / 2), math.sin(theta / 2)
    mat = np.array(
        [[ct, -np.exp(1j * lam) * st],
         [np.exp(1j * phi) * st, np.exp(1j * (phi + lam)) * ct]],
        dtype=complex,
    )
    # qubit q is bit q (little endian): reshape (high, 2, low)
    state = state.reshape(-1, 2, 2**q)
    return np.einsum("ab,hbl->hal", mat, state).reshape(-1)


def _apply_cz(state: np.ndarray, a: int, b: int, n: int) -> np.ndarray:
    idx = np.arange(state.size)
    mask = ((idx >> a) & 1).astype(bool) & ((idx >> b) & 1).astype(bool)
    state = state.copy()
    state[mask] *= -1
    return state


def statevector_oracle(circuit: Circuit, initial: int = 0) -> np.ndarray:
    """Exact output distribution of a basis circuit from a basis state.

    Returns a 2**n probability vector indexed little-endian (qubit 0 is
    the least significant bit).
    """
    n = circuit.num_qubits
    if n > ORACLE_QUBIT_CAP:
        raise ValueError(f"oracle capped at {ORACLE_QUBIT_CAP} qubits, got {n}")
    if not circuit.is_basis():
        raise ValueError("oracle requires a basis circuit")
    state = np.zeros(2**n, dtype=complex)
    state[initial] = 1.0
    for g in circuit.gates:
        if g.kind == "u3":
            state = _apply_u3(state, g.qubits[0], *g.params, n)
        else:
            state = _apply_cz(state, g.qubits[0], g.qubits[1], n)
    return np.abs(state) ** 2


def executed_distribution(schedule: Schedule, num_qubits: int) -> np.ndarray:
    """Simulate the executed gate sequence in atom space and relabel the
    outcome bits through the final qubit-to-atom permutation."""
    state = np.zeros(2**num_qubits, dtype=complex)
    state[0] = 1.0
    for ev in schedule.events:
        if isinstance(ev, U3LayerEvent):
            for g in ev.gates:
                state = _apply_u3(state, g.atom, *g.angles, num_qubits)
        elif isinstance(ev, Illumination):
            for p in ev.pairs:
                state = _apply_cz(state, p.atoms[0], p.atoms[1], num_qubits)
    atom_probs = np.abs(state) ** 2
    out = np.zeros_like(atom_probs)
    mapping = schedule.final_mapping
    ks = np.arange(atom_probs.size)
    js = np.zeros_like(ks)
    for q in range(num_qubits):
        js |= ((ks >> mapping[q]) & 1) << q
    np.add.at(out, js, atom_probs)
    return out


def equivalence_check(schedule: Schedule, circuit: Circuit
                      ) -> tuple[bool, float]:
    """Compare the schedule's executed-sequence distribution against the
    reference circuit; returns (equal, total variation distance)."""
    n = circuit.num_qubits
    if n > EQUIVALENCE_QUBIT_CAP:
        raise ValueError(
            f"equivalence check capped at {EQUIVALENCE_QUBIT_CAP} qubits"
        )
    ref = statevector_oracle(circuit)
    got = executed_distribution(schedule, n)
    tvd = 0.5 * float(np.abs(ref - got).sum())
    return tvd < TVD_THRESHOLD, tvd
