"""CNF instances, their DIMACS form, and compilation to reversible Toffoli networks.

Qubit order of a compiled network: the V input qubits (x1 first), then the
output qubit y, then the ancillas.  A clause is computed by De Morgan,
``OR(l) = NOT AND(NOT l)``, into its own ancilla; the clause ancillas are
ANDed into y; every gate except the one writing y is then undone in reverse
order so the ancillas return to 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DimacsParseError, LayoutError
from .statevec import QuantumState, RegisterLayout, apply_permutation, as_index, to_bits

MAX_BRUTE_FORCE_VARS = 24
MAX_DENSE_QUBITS = 22


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    # literals pinned as input constraints; each also appears as a unit clause
    input_constraints: tuple[int, ...] = field(default=())

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        object.__setattr__(self, "input_constraints", tuple(int(l) for l in self.input_constraints))
        if self.num_vars < 1:
            raise ValueError("formula needs at least one variable")
        for c in clauses:
            if not c:
                raise ValueError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")
        for lit in self.input_constraints:
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"constraint literal {lit} out of range")
            if (lit,) not in clauses:
                raise ValueError(f"input constraint {lit} has no matching unit clause")

    def constrain(self, literals: Iterable[int]) -> "CnfFormula":
        """Pin input bits: each literal becomes a unit clause and an input constraint."""
        literals = tuple(int(l) for l in literals)
        new = tuple((l,) for l in literals if (l,) not in self.clauses)
        return CnfFormula(self.num_vars, self.clauses + new,
                          self.input_constraints + tuple(l for l in literals if l not in self.input_constraints))

    @property
    def fixed_inputs(self) -> dict[int, int]:
        """0-based variable index -> pinned bit value."""
        fixed: dict[int, int] = {}
        for lit in self.input_constraints:
            fixed.setdefault(abs(lit) - 1, int(lit > 0))
        return fixed

    def constraints_consistent(self) -> bool:
        lits = set(self.input_constraints)
        return not any(-l in lits for l in lits)

    def satisfied(self) -> np.ndarray:
        """Boolean truth table over all assignments (index bits: x1 most significant)."""
        if self.num_vars > MAX_BRUTE_FORCE_VARS:
            raise ValueError(f"{self.num_vars} variables exceeds brute-force limit {MAX_BRUTE_FORCE_VARS}")
        idx = np.arange(1 << self.num_vars, dtype=np.int64)
        out = np.ones(idx.shape, dtype=bool)
        for clause in self.clauses:
            sat = np.zeros(idx.shape, dtype=bool)
            for lit in clause:
                bit = (idx >> (self.num_vars - abs(lit))) & 1
                sat |= bit.astype(bool) if lit > 0 else ~bit.astype(bool)
            out &= sat
        return out

    def meets_input_constraints(self) -> np.ndarray:
        idx = np.arange(1 << self.num_vars, dtype=np.int64)
        ok = np.ones(idx.shape, dtype=bool)
        for var, val in self.fixed_inputs.items():
            ok &= ((idx >> (self.num_vars - 1 - var)) & 1) == val
        if not self.constraints_consistent():
            ok[:] = False
        return ok

    def evaluate(self, assignment: str | int) -> bool:
        a = as_index(assignment, self.num_vars)
        bits = [(a >> (self.num_vars - v)) & 1 for v in range(1, self.num_vars + 1)]
        return all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        lines += [" ".join(str(l) for l in c) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF; clauses may span lines and a line may hold several clauses."""
    header = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    current_start = None
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsParseError("second problem line", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError(f"malformed problem line {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsParseError(f"non-integer counts in {line!r}", lineno) from None
            if header[0] < 1 or header[1] < 0:
                raise DimacsParseError(f"invalid counts in {line!r}", lineno)
            continue
        if header is None:
            raise DimacsParseError("clause data before the 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                if not current:
                    raise DimacsParseError("empty clause", lineno)
                clauses.append(tuple(current))
                current = []
                continue
            if abs(lit) > header[0]:
                raise DimacsParseError(f"literal {lit} exceeds declared {header[0]} variables", lineno)
            if not current:
                current_start = lineno
            current.append(lit)
    if header is None:
        raise DimacsParseError("missing 'p cnf' header", lineno or None)
    if current:
        raise DimacsParseError("clause not terminated by 0", current_start)
    if len(clauses) != header[1]:
        raise DimacsParseError(f"header declares {header[1]} clauses, found {len(clauses)}", lineno)
    return CnfFormula(header[0], tuple(clauses))


class Gate(NamedTuple):
    op: str
    qubits: tuple[int, ...]

    def to_json(self) -> list:
        return [self.op, *self.qubits]


_ARITY = {"NOT": 1, "CNOT": 2, "TOFFOLI": 3}


def _gate(op: str, *qubits: int) -> Gate:
    if len(qubits) != _ARITY[op]:
        raise ValueError(f"{op} takes {_ARITY[op]} qubits")
    if qubits[-1] in qubits[:-1]:
        raise ValueError(f"{op} target {qubits[-1]} is also a control")
    return Gate(op, tuple(qubits))


@dataclass(frozen=True)
class ReversibleCircuit:
    num_input_qubits: int
    num_ancilla: int
    output_qubit: int
    gates: tuple[Gate, ...]

    @property
    def total_qubits(self) -> int:
        return self.num_input_qubits + 1 + self.num_ancilla

    @property
    def layout(self) -> RegisterLayout:
        regs = [("x", self.num_input_qubits), ("y", 1)]
        if self.num_ancilla:
            regs.append(("anc", self.num_ancilla))
        return RegisterLayout(regs)

    def inverse(self) -> "ReversibleCircuit":
        return ReversibleCircuit(self.num_input_qubits, self.num_ancilla,
                                 self.output_qubit, tuple(reversed(self.gates)))

    def to_json(self) -> dict:
        return {
            "num_input_qubits": self.num_input_qubits,
            "num_ancilla": self.num_ancilla,
            "output_qubit": self.output_qubit,
            "gates": [g.to_json() for g in self.gates],
        }

    @classmethod
    def from_json(cls, data) -> "ReversibleCircuit":
        if isinstance(data, str):
            data = json.loads(data)
        gates = tuple(_gate(g[0], *g[1:]) for g in data["gates"])
        return cls(int(data["num_input_qubits"]), int(data["num_ancilla"]),
                   int(data["output_qubit"]), gates)


def _canonical_clauses(formula: CnfFormula) -> list[tuple[int, ...]]:
    out = []
    for clause in formula.clauses:
        lits = tuple(dict.fromkeys(clause))
        if any(-l in lits for l in lits):
            continue  # tautology
        out.append(lits)
    return out


class _Builder:
    def __init__(self, num_inputs: int):
        self.num_inputs = num_inputs
        self.output = num_inputs
        self.next_qubit = num_inputs + 1

    def ancilla(self) -> int:
        q = self.next_qubit
        self.next_qubit += 1
        return q

    def multi_and(self, controls: Sequence[int], target: int) -> tuple[list[Gate], Gate]:
        """Gates computing scratch partial ANDs, and the final gate writing ``target``."""
        if len(controls) == 1:
            return [], _gate("CNOT", controls[0], target)
        pre = []
        acc = controls[0]
        for c in controls[1:-1]:
            s = self.ancilla()
            pre.append(_gate("TOFFOLI", acc, c, s))
            acc = s
        return pre, _gate("TOFFOLI", acc, controls[-1], target)


def compile_formula(formula: CnfFormula) -> ReversibleCircuit:
    """Reversible network leaving ``y = f(x)`` and all ancillas clean."""
    b = _Builder(formula.num_vars)
    compute: list[Gate] = []
    clause_qubits = []
    for clause in _canonical_clauses(formula):
        flips = [_gate("NOT", l - 1) for l in clause if l > 0]
        c = b.ancilla()
        pre, last = b.multi_and([abs(l) - 1 for l in clause], c)
        compute += flips + pre + [last, _gate("NOT", c)] + flips
        clause_qubits.append(c)
    if clause_qubits:
        pre, last = b.multi_and(clause_qubits, b.output)
        compute += pre
        gates = compute + [last] + compute[::-1]
    else:
        gates = [_gate("NOT", b.output)]
    return ReversibleCircuit(formula.num_vars, b.next_qubit - formula.num_vars - 1,
                             b.output, tuple(gates))


def simulate_bits(circuit: ReversibleCircuit, bits: np.ndarray) -> np.ndarray:
    """Run the gate list on a ``(samples, total_qubits)`` boolean array (copied)."""
    bits = np.array(bits, dtype=bool)
    if bits.ndim != 2 or bits.shape[1] != circuit.total_qubits:
        raise LayoutError(f"bit array shape {bits.shape} for {circuit.total_qubits} qubits")
    for g in circuit.gates:
        q = g.qubits
        if g.op == "NOT":
            bits[:, q[0]] ^= True
        elif g.op == "CNOT":
            bits[:, q[1]] ^= bits[:, q[0]]
        else:
            bits[:, q[2]] ^= bits[:, q[0]] & bits[:, q[1]]
    return bits


@dataclass(frozen=True)
class CircuitOutput:
    y: int
    ancillas: str


def _input_bits(circuit: ReversibleCircuit, inputs: np.ndarray) -> np.ndarray:
    v = circuit.num_input_qubits
    bits = np.zeros((inputs.size, circuit.total_qubits), dtype=bool)
    for i in range(v):
        bits[:, i] = (inputs >> (v - 1 - i)) & 1
    return bits


def eval_circuit(circuit: ReversibleCircuit, input_bits: str | int) -> CircuitOutput:
    """Classical run from ``|input, y=0, ancillas=0>``."""
    a = as_index(input_bits, circuit.num_input_qubits)
    out = simulate_bits(circuit, _input_bits(circuit, np.array([a])))[0]
    anc = "".join("1" if b else "0" for b in out[circuit.output_qubit + 1:])
    return CircuitOutput(int(out[circuit.output_qubit]), anc)


def truth_table(circuit: ReversibleCircuit) -> tuple[np.ndarray, np.ndarray]:
    """``(y, ancillas_clean)`` for every input assignment, indexed like :meth:`CnfFormula.satisfied`."""
    inputs = np.arange(1 << circuit.num_input_qubits, dtype=np.int64)
    out = simulate_bits(circuit, _input_bits(circuit, inputs))
    y = out[:, circuit.output_qubit]
    clean = ~out[:, circuit.output_qubit + 1:].any(axis=1)
    return y, clean


def _pack(bits: np.ndarray) -> np.ndarray:
    n = bits.shape[1]
    weights = (1 << np.arange(n - 1, -1, -1, dtype=np.int64))
    return bits.astype(np.int64) @ weights


def _unpack(idx: np.ndarray, n: int) -> np.ndarray:
    return ((idx[:, None] >> np.arange(n - 1, -1, -1, dtype=np.int64)) & 1).astype(bool)


def basis_permutation(circuit: ReversibleCircuit) -> np.ndarray:
    """Image of every basis index of the full register under the circuit."""
    n = circuit.total_qubits
    if n > MAX_DENSE_QUBITS:
        raise LayoutError(f"{n} qubits exceeds the dense limit {MAX_DENSE_QUBITS}")
    idx = np.arange(1 << n, dtype=np.int64)
    return _pack(simulate_bits(circuit, _unpack(idx, n)))


def is_bijection(perm: np.ndarray) -> bool:
    seen = np.zeros(perm.size, dtype=bool)
    seen[perm] = True
    return bool(seen.all())


def apply_circuit(state: QuantumState, circuit: ReversibleCircuit) -> QuantumState:
    """The network as a unitary: permute amplitudes over the full x, y, anc register."""
    if state.layout != circuit.layout:
        raise LayoutError(f"state layout {state.layout.registers} does not match the circuit")
    return apply_permutation(state, basis_permutation(circuit))


def network_permutation(circuit: ReversibleCircuit) -> np.ndarray:
    """The circuit restricted to clean ancillas, as a map on the ``(x, y)`` register.

    Raises if some input leaves an ancilla dirty, since the restriction would
    then not be closed.
    """
    v = circuit.num_input_qubits
    idx = np.arange(1 << (v + 1), dtype=np.int64)
    bits = np.zeros((idx.size, circuit.total_qubits), dtype=bool)
    bits[:, : v + 1] = _unpack(idx, v + 1)
    out = simulate_bits(circuit, bits)
    if out[:, v + 1:].any():
        raise LayoutError("circuit leaves ancillas dirty")
    return _pack(out[:, : v + 1])


def brute_force_sat(formula: CnfFormula) -> list[str]:
    """All satisfying assignments as bitstrings ``x1 x2 ...``, ascending."""
    if formula.num_vars > MAX_BRUTE_FORCE_VARS:
        raise ValueError(f"{formula.num_vars} variables exceeds brute-force limit {MAX_BRUTE_FORCE_VARS}")
    return [to_bits(int(a), formula.num_vars) for a in np.flatnonzero(formula.satisfied())]


def point_formula(num_vars: int, solution: int) -> CnfFormula:
    """Full-width clauses excluding every assignment except ``solution``."""
    clauses = []
    for a in range(1 << num_vars):
        if a == solution:
            continue
        bits = [(a >> (num_vars - v)) & 1 for v in range(1, num_vars + 1)]
        clauses.append(tuple(-v if bit else v for v, bit in enumerate(bits, start=1)))
    return CnfFormula(num_vars, tuple(clauses))


def random_unique_instance(num_vars: int, rng: np.random.Generator, width: int = 3) -> CnfFormula:
    """Random ``width``-literal clauses consistent with a hidden assignment, added until it is the only solution."""
    width = min(width, num_vars)
    hidden = int(rng.integers(0, 1 << num_vars))
    hidden_bits = [(hidden >> (num_vars - v)) & 1 for v in range(1, num_vars + 1)]
    clauses: list[tuple[int, ...]] = []
    alive = np.ones(1 << num_vars, dtype=bool)
    idx = np.arange(1 << num_vars, dtype=np.int64)
    while alive.sum() > 1:
        vars_ = sorted(int(v) for v in rng.choice(num_vars, size=width, replace=False) + 1)
        clause = tuple(v if rng.random() < 0.5 else -v for v in vars_)
        if not any(hidden_bits[abs(l) - 1] == (l > 0) for l in clause):
            continue
        sat = np.zeros_like(alive)
        for lit in clause:
            bit = ((idx >> (num_vars - abs(lit))) & 1).astype(bool)
            sat |= bit if lit > 0 else ~bit
        if (alive & sat).sum() == alive.sum():
            continue  # clause removes nothing
        alive &= sat
        clauses.append(clause)
    return CnfFormula(num_vars, tuple(clauses))
