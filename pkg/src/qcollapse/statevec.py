"""Dense state-vector representation over named qubit registers.

Index encoding: registers are laid out in the order given, the first
register occupying the most significant bits, and within a register the
first qubit is the most significant.  ``|x>_a |y>_b`` is therefore the
basis index ``(x << width_b) | y``.

All operations return new states; inputs are never mutated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import LayoutError, NormError

NORM_TOL = 1e-10
_S2 = 1.0 / math.sqrt(2.0)


def as_index(value: int | str, width: int) -> int:
    """Turn a bitstring (``'0110'``) or an int into a basis index of ``width`` bits."""
    if isinstance(value, str):
        if len(value) != width or any(c not in "01" for c in value):
            raise LayoutError(f"bitstring {value!r} is not {width} binary digits")
        return int(value, 2) if value else 0
    value = int(value)
    if not 0 <= value < (1 << width):
        raise LayoutError(f"value {value} does not fit in {width} bits")
    return value


def to_bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, int], ...]

    def __init__(self, registers: Iterable[tuple[str, int]]):
        regs = tuple((str(name), int(width)) for name, width in registers)
        names = [name for name, _ in regs]
        if len(set(names)) != len(names):
            raise LayoutError(f"duplicate register names in {names}")
        for name, width in regs:
            if width < 1:
                raise LayoutError(f"register {name!r} has width {width} < 1")
        object.__setattr__(self, "registers", regs)

    @classmethod
    def of(cls, **widths: int) -> "RegisterLayout":
        return cls(widths.items())

    @property
    def total_qubits(self) -> int:
        return sum(width for _, width in self.registers)

    @property
    def dim(self) -> int:
        return 1 << self.total_qubits

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.registers)

    def width(self, name: str) -> int:
        for reg, width in self.registers:
            if reg == name:
                return width
        raise LayoutError(f"unknown register {name!r}; layout has {self.names}")

    def size(self, name: str) -> int:
        return 1 << self.width(name)

    def offset(self, name: str) -> int:
        """Global index of the register's first (most significant) qubit."""
        start = 0
        for reg, width in self.registers:
            if reg == name:
                return start
            start += width
        raise LayoutError(f"unknown register {name!r}; layout has {self.names}")

    def shift(self, name: str) -> int:
        """Bit position of the register's least significant qubit in a basis index."""
        return self.total_qubits - self.offset(name) - self.width(name)

    def qubit(self, name: str, i: int = 0) -> int:
        if not 0 <= i < self.width(name):
            raise LayoutError(f"qubit {i} out of range for register {name!r}")
        return self.offset(name) + i

    def without(self, name: str) -> "RegisterLayout":
        self.width(name)
        return RegisterLayout(r for r in self.registers if r[0] != name)

    def split(self, name: str) -> tuple[int, int, int]:
        """Shape ``(before, register, after)`` for viewing amplitudes around a register."""
        off, width = self.offset(name), self.width(name)
        return 1 << off, 1 << width, 1 << (self.total_qubits - off - width)

    def register_values(self, name: str) -> np.ndarray:
        """Value held by register ``name`` for every basis index."""
        idx = np.arange(self.dim, dtype=np.int64)
        return (idx >> self.shift(name)) & ((1 << self.width(name)) - 1)


def _as_amplitudes(amplitudes, layout: RegisterLayout) -> np.ndarray:
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if amps.shape[0] != layout.dim:
        raise LayoutError(
            f"{amps.shape[0]} amplitudes for a {layout.total_qubits}-qubit layout "
            f"(expected {layout.dim})"
        )
    return amps


@dataclass(frozen=True, eq=False)
class UnnormalizedState:
    """Amplitudes without the unit-norm invariant, e.g. a partial inner product."""

    amplitudes: np.ndarray
    layout: RegisterLayout
    norm_squared: float = field(init=False)

    def __post_init__(self):
        amps = _as_amplitudes(self.amplitudes, self.layout)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        nsq = float(np.vdot(amps, amps).real)
        if nsq > 1.0 + NORM_TOL:
            raise NormError(f"squared norm {nsq} exceeds 1")
        object.__setattr__(self, "norm_squared", nsq)

    def normalized(self) -> "QuantumState":
        if self.norm_squared == 0.0:
            raise NormError("cannot normalize the zero vector")
        return QuantumState(self.amplitudes / math.sqrt(self.norm_squared), self.layout)

    def scaled(self, factor: complex) -> "UnnormalizedState | QuantumState":
        amps = self.amplitudes * factor
        nsq = float(np.vdot(amps, amps).real)
        if abs(nsq - 1.0) <= NORM_TOL:
            return QuantumState(amps, self.layout)
        return UnnormalizedState(amps, self.layout)


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray
    layout: RegisterLayout

    def __post_init__(self):
        amps = _as_amplitudes(self.amplitudes, self.layout)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        norm = math.sqrt(float(np.vdot(amps, amps).real))
        if abs(norm - 1.0) > NORM_TOL:
            raise NormError(f"state norm {norm!r} differs from 1 by more than {NORM_TOL}")

    @property
    def num_qubits(self) -> int:
        return self.layout.total_qubits

    def register_view(self, name: str) -> np.ndarray:
        """Amplitudes reshaped to ``(before, register, after)``."""
        return self.amplitudes.reshape(self.layout.split(name))

    def inner(self, other: "QuantumState | UnnormalizedState") -> complex:
        """``<self|other>``."""
        if other.layout != self.layout:
            raise LayoutError("inner product between different layouts")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def distance(self, other: "QuantumState") -> float:
        if other.layout != self.layout:
            raise LayoutError("distance between different layouts")
        return float(np.linalg.norm(self.amplitudes - other.amplitudes))

    def to_json(self) -> dict:
        return {
            "layout": [[name, width] for name, width in self.layout.registers],
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "QuantumState":
        layout = RegisterLayout((name, width) for name, width in data["layout"])
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]], dtype=np.complex128)
        return cls(amps, layout)


def prepare_basis(layout: RegisterLayout, bits: str | int) -> QuantumState:
    """Computational basis state; ``bits`` spans the whole layout, MSB first."""
    index = as_index(bits, layout.total_qubits)
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[index] = 1.0
    return QuantumState(amps, layout)


def product_state(layout: RegisterLayout, parts: Mapping[str, Sequence[complex] | np.ndarray | int | str]) -> QuantumState:
    """Tensor product of per-register vectors (ints/bitstrings mean basis vectors)."""
    if set(parts) != set(layout.names):
        raise LayoutError(f"product_state needs exactly the registers {layout.names}")
    amps = np.ones(1, dtype=np.complex128)
    for name, width in layout.registers:
        part = parts[name]
        if isinstance(part, (int, np.integer, str)):
            vec = np.zeros(1 << width, dtype=np.complex128)
            vec[as_index(part, width)] = 1.0
        else:
            vec = np.asarray(part, dtype=np.complex128)
            if vec.shape != (1 << width,):
                raise LayoutError(f"register {name!r} vector has shape {vec.shape}")
        amps = np.kron(amps, vec)
    return QuantumState(amps, layout)


def _butterfly(state: QuantumState, qubit: int, m00, m01, m10, m11) -> np.ndarray:
    n = state.num_qubits
    if not 0 <= qubit < n:
        raise LayoutError(f"qubit index {qubit} out of range for {n} qubits")
    view = state.amplitudes.reshape(1 << qubit, 2, 1 << (n - qubit - 1))
    lo, hi = view[:, 0, :], view[:, 1, :]
    out = np.empty_like(view)
    out[:, 0, :] = m00 * lo + m01 * hi
    out[:, 1, :] = m10 * lo + m11 * hi
    return out.reshape(-1)


def _hadamard_amplitudes(amps: np.ndarray, n: int, qubits: Iterable[int]) -> np.ndarray:
    count = 0
    for q in qubits:
        view = amps.reshape(1 << q, 2, 1 << (n - q - 1))
        out = np.empty_like(view)
        np.add(view[:, 0, :], view[:, 1, :], out=out[:, 0, :])
        np.subtract(view[:, 0, :], view[:, 1, :], out=out[:, 1, :])
        amps = out.reshape(-1)
        count += 1
    # one scaling for all butterflies; exact power of two when count is even
    scale = 2.0 ** -(count // 2) * (_S2 if count % 2 else 1.0)
    return amps * scale if count else amps.copy()


def apply_hadamard_qubits(state: QuantumState, qubits: Iterable[int]) -> QuantumState:
    qubits = list(qubits)
    for q in qubits:
        if not 0 <= q < state.num_qubits:
            raise LayoutError(f"qubit index {q} out of range for {state.num_qubits} qubits")
    amps = _hadamard_amplitudes(state.amplitudes, state.num_qubits, qubits)
    return QuantumState(amps, state.layout)


def apply_hadamard(state: QuantumState, register: str) -> QuantumState:
    """Walsh-Hadamard transform on every qubit of ``register``."""
    off, width = state.layout.offset(register), state.layout.width(register)
    return apply_hadamard_qubits(state, range(off, off + width))


def apply_permutation(state: QuantumState, perm: np.ndarray) -> QuantumState:
    """Send basis index ``i`` to ``perm[i]``; ``perm`` must be a bijection."""
    perm = np.asarray(perm)
    if perm.shape != (state.layout.dim,):
        raise LayoutError(f"permutation of length {perm.shape} for dim {state.layout.dim}")
    out = np.zeros_like(state.amplitudes)
    out[perm] = state.amplitudes
    return QuantumState(out, state.layout)


def oracle_permutation(layout: RegisterLayout, table: np.ndarray,
                       input_register: str = "a", output_register: str = "b") -> np.ndarray:
    """Index map of ``|x>|y> -> |x>|y XOR table[x]>``."""
    table = np.asarray(table, dtype=np.int64)
    if table.shape[0] != layout.size(input_register):
        raise LayoutError(
            f"table has {table.shape[0]} entries, register {input_register!r} "
            f"holds {layout.size(input_register)} values"
        )
    if table.size and int(table.max()) >= layout.size(output_register):
        raise LayoutError(f"table values do not fit in register {output_register!r}")
    idx = np.arange(layout.dim, dtype=np.int64)
    x = layout.register_values(input_register)
    return idx ^ (table[x] << layout.shift(output_register))


def apply_oracle(state: QuantumState, oracle, input_register: str = "a",
                 output_register: str = "b") -> QuantumState:
    """XOR the oracle's output into ``output_register``, controlled on ``input_register``."""
    layout = state.layout
    if layout.width(input_register) != oracle.n or layout.width(output_register) != oracle.n:
        raise LayoutError(
            f"oracle of width {oracle.n} on registers of widths "
            f"{layout.width(input_register)}/{layout.width(output_register)}"
        )
    perm = oracle_permutation(layout, oracle.table, input_register, output_register)
    return apply_permutation(state, perm)


def apply_rotation(state: QuantumState, qubit: int, angle: float) -> QuantumState:
    """Real rotation: ``|0> -> cos|0> + sin|1>``, ``|1> -> -sin|0> + cos|1>``."""
    c, s = math.cos(angle), math.sin(angle)
    # exact endpoints keep R(pi/2)|0> = |1> free of 6e-17 residue
    if angle == math.pi / 2:
        c, s = 0.0, 1.0
    return QuantumState(_butterfly(state, qubit, c, -s, s, c), state.layout)


def partial_inner(state: QuantumState, register: str, value: str | int) -> UnnormalizedState:
    """Contract ``register`` against the basis bra ``<value|``.

    The squared norm of the result is the Born probability of reading ``value``.
    """
    layout = state.layout
    v = as_index(value, layout.width(register))
    remaining = state.register_view(register)[:, v, :].reshape(-1).copy()
    return UnnormalizedState(remaining, layout.without(register))
