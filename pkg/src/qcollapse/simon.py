"""Simon's period-finding circuit with explicit measurements, plus GF(2) post-processing."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceededError
from .measure import marginal_probabilities, sample_index, simon_t2_state
from .oracle import PeriodicOracle
from .statevec import QuantumState, apply_hadamard, partial_inner

DEFAULT_SAMPLE_FACTOR = 20


def dot2(a: int, b: int) -> int:
    """Inner product of two bit vectors modulo 2."""
    return bin(a & b).count("1") & 1


@dataclass
class Gf2System:
    """Homogeneous constraints ``z . r = 0`` over GF(2), one row per distinct nonzero z."""

    n: int
    rows: list[int] = field(default_factory=list)

    def add(self, z: int) -> bool:
        """Record a row; returns False for zero or duplicate rows."""
        if z == 0 or z in self.rows:
            return False
        self.rows.append(z)
        return True

    def echelon(self) -> dict[int, int]:
        """Reduced row-echelon form as ``{pivot bit: row}``."""
        pivots: dict[int, int] = {}
        for row in self.rows:
            for bit, prow in pivots.items():
                if row >> bit & 1:
                    row ^= prow
            if row == 0:
                continue
            bit = row.bit_length() - 1
            for other in list(pivots):
                if pivots[other] >> bit & 1:
                    pivots[other] ^= row
            pivots[bit] = row
        return pivots

    @property
    def rank(self) -> int:
        return len(self.echelon())


def nullspace_basis(system: Gf2System) -> list[int]:
    pivots = system.echelon()
    basis = []
    for free in range(system.n):
        if free in pivots:
            continue
        vec = 1 << free
        for bit, row in pivots.items():
            if row >> free & 1:
                vec |= 1 << bit
        basis.append(vec)
    return basis


def gf2_solve(system: Gf2System) -> list[int]:
    """Every nonzero ``r'`` with ``z . r' = 0`` for all rows, ascending."""
    basis = nullspace_basis(system)
    span = {0}
    for vec in basis:
        span |= {v ^ vec for v in span}
    return sorted(span - {0})


@dataclass
class SimonRunReport:
    recovered_r: int
    samples_used: int
    z_samples: list[int]
    skip_step_d: bool = False

    def to_json(self) -> dict:
        return {
            "recovered_r": self.recovered_r,
            "samples_used": self.samples_used,
            "z_samples": list(self.z_samples),
            "skip_step_d": self.skip_step_d,
        }


class _SimonSampler:
    """Holds the deterministic part of the circuit (steps a-c) so repeated runs reuse it."""

    def __init__(self, oracle: PeriodicOracle):
        self.oracle = oracle
        self.phi_t2 = simon_t2_state(oracle)
        self.b_probs = marginal_probabilities(self.phi_t2, "b")
        self._deferred: Optional[np.ndarray] = None

    def sample(self, rng: np.random.Generator, skip_step_d: bool) -> int:
        if skip_step_d:
            if self._deferred is None:
                self._deferred = marginal_probabilities(apply_hadamard(self.phi_t2, "a"), "a")
            z = sample_index(self._deferred, rng)
        else:
            f_bar = sample_index(self.b_probs, rng)
            # once b is read, the state is |beta>_a |f_bar>_b; carry on with the a factor
            beta_a = partial_inner(self.phi_t2, "b", f_bar).normalized()
            z = sample_index(marginal_probabilities(apply_hadamard(beta_a, "a"), "a"), rng)
        if dot2(z, self.oracle.r):
            raise AssertionError(f"sampled z={z:b} violates z.r = 0 for r={self.oracle.r:b}")
        return z


def run_once(oracle: PeriodicOracle, rng: np.random.Generator, skip_step_d: bool = False) -> int:
    """One pass of steps (a)-(f); returns the measured z as an int."""
    return _SimonSampler(oracle).sample(rng, skip_step_d)


def _conditioned_z_distribution(phi_t2: QuantumState) -> np.ndarray:
    """Mixture over b outcomes of the z distribution after collapse on each outcome."""
    total = np.zeros(phi_t2.layout.size("a"))
    for f_bar, p in enumerate(marginal_probabilities(phi_t2, "b")):
        if p == 0.0:
            continue
        beta_a = partial_inner(phi_t2, "b", f_bar).normalized()
        total += p * marginal_probabilities(apply_hadamard(beta_a, "a"), "a")
    return total


def z_distribution(oracle: PeriodicOracle, skip_step_d: bool = False) -> dict[int, float]:
    """Exact probability of each z, with or without measuring b first."""
    phi_t2 = simon_t2_state(oracle)
    if skip_step_d:
        probs = marginal_probabilities(apply_hadamard(phi_t2, "a"), "a")
    else:
        probs = _conditioned_z_distribution(phi_t2)
    return {z: float(p) for z, p in enumerate(probs)}


def recover_period(oracle: PeriodicOracle, rng: np.random.Generator,
                   max_samples: Optional[int] = None, skip_step_d: bool = False) -> SimonRunReport:
    """Repeat the circuit until the GF(2) nullspace of the observed z's is a single vector."""
    n = oracle.n
    if max_samples is None:
        max_samples = DEFAULT_SAMPLE_FACTOR * n
    if max_samples < n:
        raise ValueError(f"max_samples={max_samples} is below n={n}")
    system = Gf2System(n)
    z_samples: list[int] = []
    sampler = None
    while system.rank < n - 1:
        if len(z_samples) >= max_samples:
            raise BudgetExceededError(
                f"r not identified after {max_samples} samples (rank {system.rank} of {n - 1})",
                system=system, z_samples=z_samples,
            )
        if sampler is None:
            sampler = _SimonSampler(oracle)
        z = sampler.sample(rng, skip_step_d)
        z_samples.append(z)
        system.add(z)
    (recovered,) = gf2_solve(system)
    return SimonRunReport(recovered, len(z_samples), z_samples, skip_step_d)
