"""Constrained-subspace testbed for a rotation of the output qubit of a SAT network.

The network state lives on registers ``x`` (the inputs) and ``y`` (the
output).  Ancillas of the compiled circuit are always |0> outside the
circuit itself, so they are contracted away once ``|phi>`` is built.

Three dynamics rotate y by pi/2 in ``k`` slices of ``pi/(2k)``:

``frequent``
    after each slice, a Born-sampled yes/no measurement of membership in
    H^c; a "no" ends the trajectory.
``projected``
    after each slice, deterministic projection onto H^c and renormalization
    (the k -> infinity reading of a continuous measurement).
``unitary``
    bare rotation, no measurement.

Per-step trace columns:

``survival_probability``
    frequent/projected: product of the per-slice probabilities of landing
    in H^c up to this step.  unitary: current population of H^c.
``fidelity_with_initial``
    ``|<phi|psi>|^2`` of the normalized tracked state.
``solution_overlap``
    probability mass on basis states with satisfying inputs and ``y = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import seeding
from .errors import DegenerateDynamicsError, EmptySubspaceError, NormError
from .satnet import (
    MAX_DENSE_QUBITS,
    CnfFormula,
    ReversibleCircuit,
    apply_circuit,
    compile_formula,
    network_permutation,
    point_formula,
    random_unique_instance,
    truth_table,
)
from .statevec import (
    QuantumState,
    RegisterLayout,
    UnnormalizedState,
    apply_hadamard_qubits,
    apply_permutation,
    apply_rotation,
    partial_inner,
    prepare_basis,
)

PHI_TOL = 1e-12
DEGENERATE_NORM = 1e-14
MODES = ("frequent", "projected", "unitary")


def network_layout(num_vars: int) -> RegisterLayout:
    return RegisterLayout([("x", num_vars), ("y", 1)])


@dataclass(frozen=True, eq=False)
class ConstrainedSubspace:
    """Span of the ``|x, f(x)>`` with ``x`` meeting the input constraints."""

    basis_indices: np.ndarray
    layout: RegisterLayout
    formula: CnfFormula
    circuit: Optional[ReversibleCircuit] = None

    def __post_init__(self):
        idx = np.unique(np.asarray(self.basis_indices, dtype=np.int64))
        idx.setflags(write=False)
        object.__setattr__(self, "basis_indices", idx)

    @property
    def dim(self) -> int:
        return int(self.basis_indices.size)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.layout.dim, dtype=bool)
        m[self.basis_indices] = True
        return m

    @classmethod
    def from_circuit(cls, circuit: ReversibleCircuit, formula: CnfFormula) -> "ConstrainedSubspace":
        """Membership read off the compiled network's truth table."""
        y, clean = truth_table(circuit)
        if not clean.all():
            raise NormError("circuit leaves ancillas dirty; H^c is undefined")
        allowed = np.flatnonzero(formula.meets_input_constraints())
        indices = (allowed << 1) | y[allowed].astype(np.int64)
        return cls(indices, network_layout(formula.num_vars), formula, circuit)


def f_consistent_indices(formula: CnfFormula) -> np.ndarray:
    """``(x, f(x))`` basis indices straight from clause evaluation, no circuit involved."""
    allowed = np.flatnonzero(formula.meets_input_constraints())
    f = formula.satisfied()
    return (allowed << 1) | f[allowed].astype(np.int64)


def _free_qubits(formula: CnfFormula) -> list[int]:
    fixed = formula.fixed_inputs
    return [v for v in range(formula.num_vars) if v not in fixed]


def _fixed_bits(formula: CnfFormula) -> int:
    bits = 0
    for var, val in formula.fixed_inputs.items():
        bits |= val << (formula.num_vars - 1 - var)
    return bits


def _phi_via_circuit(circuit: ReversibleCircuit, formula: CnfFormula) -> QuantumState:
    v = formula.num_vars
    free = _free_qubits(formula)
    if circuit.total_qubits <= MAX_DENSE_QUBITS:
        layout = circuit.layout
        start = _fixed_bits(formula) << (layout.total_qubits - v)
        state = apply_hadamard_qubits(prepare_basis(layout, start), free)
        state = apply_circuit(state, circuit)
        if "anc" not in layout.names:
            return state
        reduced = partial_inner(state, "anc", 0)
        if abs(reduced.norm_squared - 1.0) > PHI_TOL:
            raise NormError(f"ancillas not clean after the circuit (weight {reduced.norm_squared})")
        return QuantumState(reduced.amplitudes, reduced.layout)
    # too wide for a dense register: apply the same permutation on the clean-ancilla slice
    layout = network_layout(v)
    state = apply_hadamard_qubits(prepare_basis(layout, _fixed_bits(formula) << 1), free)
    return apply_permutation(state, network_permutation(circuit))


def _phi_by_enumeration(formula: CnfFormula) -> QuantumState:
    idx = f_consistent_indices(formula)
    amps = np.zeros(1 << (formula.num_vars + 1), dtype=np.complex128)
    amps[idx] = 1 / math.sqrt(idx.size)
    return QuantumState(amps, network_layout(formula.num_vars))


def prepare_phi_paths(circuit: ReversibleCircuit, formula: CnfFormula) -> tuple[QuantumState, QuantumState]:
    """``|phi>`` built by Hadamards plus the network, and by direct enumeration."""
    if not formula.meets_input_constraints().any():
        raise EmptySubspaceError("input constraints admit no assignment")
    return _phi_via_circuit(circuit, formula), _phi_by_enumeration(formula)


def prepare_phi(circuit: ReversibleCircuit, formula: CnfFormula) -> QuantumState:
    via_circuit, enumerated = prepare_phi_paths(circuit, formula)
    gap = via_circuit.distance(enumerated)
    if gap > PHI_TOL:
        raise NormError(f"circuit-built phi differs from enumeration by {gap}")
    return via_circuit


def projector_apply(state: QuantumState | UnnormalizedState, subspace: ConstrainedSubspace) -> UnnormalizedState:
    amps = np.where(subspace.mask, state.amplitudes, 0)
    return UnnormalizedState(amps, state.layout)


def solution_overlap(state: QuantumState, formula: CnfFormula) -> float:
    """Mass on basis states whose x satisfies ``formula`` and whose y is 1."""
    layout = state.layout
    x = layout.register_values("x")
    y = layout.register_values("y")
    hit = formula.satisfied()[x] & (y == 1)
    probs = np.abs(state.amplitudes) ** 2
    return float(min(1.0, probs[hit].sum()))


@dataclass(frozen=True)
class ZenoSample:
    step: int
    survival_probability: float
    fidelity_with_initial: float
    solution_overlap: float

    def row(self) -> list:
        return [self.step, self.survival_probability, self.fidelity_with_initial, self.solution_overlap]


@dataclass(eq=False)
class ZenoTrace:
    mode: str
    slices: int
    samples: list[ZenoSample] = field(default_factory=list)
    final_state: Optional[QuantumState] = None
    # step at which a frequent-mode trajectory left H^c, if it did
    rejected_at: Optional[int] = None
    states: Optional[list[QuantumState]] = None

    @property
    def survived(self) -> bool:
        return self.rejected_at is None

    @property
    def final(self) -> ZenoSample:
        return self.samples[-1]

    @property
    def ensemble_fidelity(self) -> float:
        """Probability of the survival record times the conditioned fidelity, at the last step."""
        return self.final.survival_probability * self.final.fidelity_with_initial


def _fidelity(phi: QuantumState, psi: QuantumState) -> float:
    return float(min(1.0, abs(phi.inner(psi)) ** 2))


def _check_slices(slices: int) -> float:
    if int(slices) != slices or slices < 1:
        raise ValueError(f"slices must be a positive integer, got {slices}")
    return math.pi / (2 * slices)


def run_frequent(phi: QuantumState, subspace: ConstrainedSubspace, slices: int,
                 rng: np.random.Generator) -> ZenoTrace:
    angle = _check_slices(slices)
    qubit = phi.layout.qubit("y")
    formula = subspace.formula
    trace = ZenoTrace("frequent", slices, [ZenoSample(0, 1.0, 1.0, solution_overlap(phi, formula))])
    state, survival = phi, 1.0
    for step in range(1, slices + 1):
        rotated = apply_rotation(state, qubit, angle)
        inside = projector_apply(rotated, subspace)
        p = inside.norm_squared
        survival *= p
        if rng.random() < p:
            state = inside.normalized()
        else:
            outside = UnnormalizedState(rotated.amplitudes - inside.amplitudes, rotated.layout)
            state = outside.normalized()
            trace.rejected_at = step
        trace.samples.append(ZenoSample(step, survival, _fidelity(phi, state), solution_overlap(state, formula)))
        if trace.rejected_at is not None:
            break
    trace.final_state = state
    return trace


def run_projected(phi: QuantumState, subspace: ConstrainedSubspace, slices: int,
                  keep_states: bool = False) -> ZenoTrace:
    angle = _check_slices(slices)
    qubit = phi.layout.qubit("y")
    formula = subspace.formula
    trace = ZenoTrace("projected", slices, [ZenoSample(0, 1.0, 1.0, solution_overlap(phi, formula))])
    trace.states = [phi] if keep_states else None
    state, survival = phi, 1.0
    for step in range(1, slices + 1):
        inside = projector_apply(apply_rotation(state, qubit, angle), subspace)
        if math.sqrt(inside.norm_squared) < DEGENERATE_NORM:
            raise DegenerateDynamicsError(
                f"projection annihilated the state at step {step} of {slices}", step=step)
        survival *= inside.norm_squared
        state = inside.normalized()
        trace.samples.append(ZenoSample(step, survival, _fidelity(phi, state), solution_overlap(state, formula)))
        if keep_states:
            trace.states.append(state)
    trace.final_state = state
    return trace


def run_unitary(phi: QuantumState, slices: int, subspace: ConstrainedSubspace,
                keep_states: bool = False) -> ZenoTrace:
    angle = _check_slices(slices)
    qubit = phi.layout.qubit("y")
    formula = subspace.formula
    trace = ZenoTrace("unitary", slices, [ZenoSample(0, 1.0, 1.0, solution_overlap(phi, formula))])
    trace.states = [phi] if keep_states else None
    state = phi
    for step in range(1, slices + 1):
        state = apply_rotation(state, qubit, angle)
        population = projector_apply(state, subspace).norm_squared
        trace.samples.append(ZenoSample(step, population, _fidelity(phi, state), solution_overlap(state, formula)))
        if keep_states:
            trace.states.append(state)
    trace.final_state = state
    return trace


def rotation_generator(layout: RegisterLayout) -> np.ndarray:
    """Real matrix ``A`` with ``R(theta) = expm(theta A)`` acting on qubit y."""
    q = layout.qubit("y")
    n = layout.total_qubits
    single = np.array([[0.0, -1.0], [1.0, 0.0]])
    return np.kron(np.kron(np.eye(1 << q), single), np.eye(1 << (n - q - 1)))


def projected_generator_limit(phi: QuantumState, subspace: ConstrainedSubspace,
                              angle: float = math.pi / 2) -> QuantumState:
    """k -> infinity limit of projected slicing, by diagonalizing the generator compressed to H^c."""
    basis = np.eye(phi.layout.dim)[:, subspace.basis_indices]
    compressed = basis.T @ rotation_generator(phi.layout) @ basis
    w, u = np.linalg.eigh(1j * compressed)
    propagator = u @ np.diag(np.exp(-1j * angle * w)) @ u.conj().T
    coeffs = propagator @ (basis.T @ phi.amplitudes)
    out = basis @ coeffs
    return QuantumState(out / np.linalg.norm(out), phi.layout)


def k_doubling_distances(phi: QuantumState, subspace: ConstrainedSubspace,
                         ks: list[int]) -> list[float]:
    """For each k, the largest distance between step j of a k-slice run and step 2j of a 2k-slice run."""
    out = []
    for k in ks:
        coarse = run_projected(phi, subspace, k, keep_states=True).states
        fine = run_projected(phi, subspace, 2 * k, keep_states=True).states
        out.append(max(coarse[j].distance(fine[2 * j]) for j in range(k + 1)))
    return out


def build_testbed(formula: CnfFormula) -> tuple[ReversibleCircuit, ConstrainedSubspace, QuantumState]:
    circuit = compile_formula(formula)
    subspace = ConstrainedSubspace.from_circuit(circuit, formula)
    if subspace.dim == 0:
        raise EmptySubspaceError("H^c is empty")
    return circuit, subspace, prepare_phi(circuit, formula)


def instance_suite(seed: int = 0, random_sizes=range(4, 9)) -> list[tuple[str, CnfFormula]]:
    """Every single-solution point formula on 1-3 variables, plus seeded random ones on 4-8."""
    suite = []
    for v in (1, 2, 3):
        for s in range(1 << v):
            suite.append((f"point{v}_{s:0{v}b}", point_formula(v, s)))
    for v in random_sizes:
        rng = seeding.stream(seed, seeding.INSTANCE, v)
        suite.append((f"random{v}", random_unique_instance(v, rng)))
    return suite


def run_mode(mode: str, phi: QuantumState, subspace: ConstrainedSubspace, slices: int,
             rng: Optional[np.random.Generator] = None) -> ZenoTrace:
    if mode == "frequent":
        if rng is None:
            raise ValueError("frequent mode needs a random generator")
        return run_frequent(phi, subspace, slices, rng)
    if mode == "projected":
        return run_projected(phi, subspace, slices)
    if mode == "unitary":
        return run_unitary(phi, slices, subspace)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
