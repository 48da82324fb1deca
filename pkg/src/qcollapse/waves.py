"""Retarded/advanced wave decomposition of a forward and a backward state.

With gauge phase ``delta``::

    psi_plus  = +(phi + e^{i delta} beta) / 2
    psi_minus = -(phi - e^{i delta} beta) / 2

so ``phi = psi_plus - psi_minus`` and ``beta = e^{-i delta}(psi_plus + psi_minus)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import LayoutError
from .statevec import QuantumState, RegisterLayout


@dataclass(frozen=True, eq=False)
class WavePair:
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    delta: float
    layout: RegisterLayout | None = None

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        return reconstruct(self)


def _wrap(delta: float) -> float:
    return math.fmod(delta, 2 * math.pi) % (2 * math.pi)


def _vectors(phi, beta) -> tuple[np.ndarray, np.ndarray, RegisterLayout | None]:
    layout = None
    if isinstance(phi, QuantumState) and isinstance(beta, QuantumState):
        if phi.layout != beta.layout:
            raise LayoutError("phi and beta live on different layouts")
        layout = phi.layout
    p = np.asarray(getattr(phi, "amplitudes", phi), dtype=np.complex128)
    b = np.asarray(getattr(beta, "amplitudes", beta), dtype=np.complex128)
    if p.shape != b.shape:
        raise LayoutError(f"phi has shape {p.shape}, beta has {b.shape}")
    return p, b, layout


def decompose(phi, beta, delta: float) -> WavePair:
    p, b, layout = _vectors(phi, beta)
    phase = cmath.exp(1j * delta)
    return WavePair(0.5 * (p + phase * b), -0.5 * (p - phase * b), _wrap(delta), layout)


def reconstruct(pair: WavePair) -> tuple[np.ndarray, np.ndarray]:
    """Invert :func:`decompose`; returns ``(phi, beta)`` amplitude vectors."""
    phi = pair.psi_plus - pair.psi_minus
    beta = cmath.exp(-1j * pair.delta) * (pair.psi_plus + pair.psi_minus)
    return phi, beta


def wave_norm_squared(phi, beta, delta: float, which: str) -> float:
    """Closed form ``(2 +/- 2 Re(e^{i delta} <phi|beta>)) / 4``."""
    p, b, _ = _vectors(phi, beta)
    sign = _sign(which)
    overlap = np.vdot(p, b)
    return float((np.vdot(p, p).real + np.vdot(b, b).real
                  + sign * 2 * (cmath.exp(1j * delta) * overlap).real) / 4)


def _sign(which: str) -> int:
    if which == "plus":
        return 1
    if which == "minus":
        return -1
    raise ValueError(f"which must be 'plus' or 'minus', got {which!r}")


def delta_averaged_density(phi, beta, which: str, grid: int) -> np.ndarray:
    """Average of ``|psi><psi|`` over ``delta = 2 pi k / grid``, ``k = 0..grid-1``."""
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    _sign(which)
    p, b, _ = _vectors(phi, beta)
    rho = np.zeros((p.size, p.size), dtype=np.complex128)
    for k in range(grid):
        pair = decompose(p, b, 2 * math.pi * k / grid)
        psi = pair.psi_plus if which == "plus" else pair.psi_minus
        rho += np.outer(psi, psi.conj())
    return rho / grid


def gauge_indistinguishability(phi, beta, grid: int = 8) -> dict:
    """Both averaged densities and the max-entry gap between them."""
    plus = delta_averaged_density(phi, beta, "plus", grid)
    minus = delta_averaged_density(phi, beta, "minus", grid)
    return {"grid": grid, "rho_plus": plus, "rho_minus": minus,
            "max_abs_difference": float(np.max(np.abs(plus - minus)))}
