"""Born-rule measurement, collapse, and the post-selection identities of Simon's circuit."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LayoutError, NormError, PostSelectionError
from .oracle import PeriodicOracle, brute_force_reverse
from .statevec import (
    QuantumState,
    as_index,
    apply_hadamard,
    apply_oracle,
    partial_inner,
    prepare_basis,
    product_state,
    to_bits,
)

PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    register: str
    outcome: str
    probability: float
    post_state: QuantumState


def marginal_probabilities(state: QuantumState, register: str) -> np.ndarray:
    """Probability of each value of ``register``, indexed by value."""
    view = state.register_view(register)
    return np.einsum("ijk,ijk->j", view, view.conj()).real


def exact_distribution(state: QuantumState, register: str) -> dict[str, float]:
    """Outcome bitstring -> Born probability, for every value of ``register``."""
    width = state.layout.width(register)
    probs = marginal_probabilities(state, register)
    return {to_bits(v, width): float(p) for v, p in enumerate(probs)}


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw: one uniform variate per call, first bin whose cumulative mass exceeds it."""
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    i = int(np.searchsorted(cdf, u, side="right"))
    # u can land on the final edge through rounding; step back to a nonzero bin
    i = min(i, len(probs) - 1)
    while probs[i] <= 0.0 and i > 0:
        i -= 1
    return i


def collapse(state: QuantumState, register: str, outcome: str | int) -> MeasurementRecord:
    """Post-state and probability of reading ``outcome`` on ``register`` (project, then renormalize)."""
    layout = state.layout
    width = layout.width(register)
    v = as_index(outcome, width)
    projected = partial_inner(state, register, v)
    p = projected.norm_squared
    if p == 0.0:
        raise PostSelectionError(f"outcome {to_bits(v, width)} on {register!r} has probability 0")
    out = np.zeros(layout.split(register), dtype=np.complex128)
    before, _, after = layout.split(register)
    out[:, v, :] = projected.amplitudes.reshape(before, after) / math.sqrt(p)
    return MeasurementRecord(register, to_bits(v, width), p, QuantumState(out.reshape(-1), layout))


def measure(state: QuantumState, register: str, rng: np.random.Generator) -> MeasurementRecord:
    probs = marginal_probabilities(state, register)
    return collapse(state, register, sample_index(probs, rng))


def simon_t2_state(oracle: PeriodicOracle) -> QuantumState:
    """``(1/sqrt N) sum_x |x>_a |f(x)>_b``: steps (a)-(c) of Simon's circuit."""
    phi = prepare_basis(oracle.layout, 0)
    phi = apply_hadamard(phi, "a")
    return apply_oracle(phi, oracle)


def eq1_selected_state(state_t2: QuantumState, f_bar: str | int) -> QuantumState:
    """``sqrt(N/2) <f_bar|_b |phi(t2)>``: the register-a state fixed jointly by preparation and outcome."""
    layout = state_t2.layout
    if layout.names != ("a", "b"):
        raise LayoutError(f"expected registers ('a', 'b'), got {layout.names}")
    projected = partial_inner(state_t2, "b", f_bar)
    if projected.norm_squared == 0.0:
        raise PostSelectionError(f"f_bar={f_bar!r} is not in the image of f")
    selected = projected.amplitudes * math.sqrt(layout.size("a") / 2)
    norm = float(np.linalg.norm(selected))
    if abs(norm - 1.0) > PROB_TOL:
        raise NormError(f"selected state has norm {norm}; input is not a 2-to-1 oracle state")
    return QuantumState(selected, projected.layout)


def pair_state(n: int, x0: int, x1: int) -> np.ndarray:
    """Amplitude vector of ``(|x0> + |x1>)/sqrt 2`` on n qubits."""
    vec = np.zeros(1 << n, dtype=np.complex128)
    vec[x0] += 1 / math.sqrt(2)
    vec[x1] += 1 / math.sqrt(2)
    return vec


def backdated_state(oracle: PeriodicOracle, f_bar: str | int) -> QuantumState:
    """``(|x_bar> + |x_bar ^ r>)_a |0>_b``: the outcome moved back to just after the first Hadamard."""
    preimages = brute_force_reverse(oracle, f_bar)
    if preimages is None:
        raise PostSelectionError(f"f_bar={f_bar!r} is not in the image of f")
    x0, x1 = preimages
    return product_state(oracle.layout, {"a": pair_state(oracle.n, x0, x1), "b": 0})


def backdated_run(oracle: PeriodicOracle, f_bar: str | int) -> QuantumState:
    """Start from the back-dated state and run the oracle forward.

    The preimages come from the exhaustive classical reverse; the result
    must coincide with collapsing ``b`` on ``|phi(t2)>`` to ``f_bar``.
    """
    return apply_oracle(backdated_state(oracle, f_bar), oracle)
