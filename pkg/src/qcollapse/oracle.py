"""Two-to-one functions with a hidden XOR period, and their brute-force inverses."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidPeriodError, LayoutError
from .statevec import RegisterLayout, as_index

MAX_WIDTH = 16


@dataclass(frozen=True, eq=False)
class PeriodicOracle:
    """``f: B^n -> B^n`` with ``f(x) == f(x ^ r)`` and no other collisions."""

    n: int
    r: int
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.int64).copy()
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        self.validate()

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def layout(self) -> RegisterLayout:
        """Input register ``a`` followed by output register ``b``, both n wide."""
        return RegisterLayout.of(a=self.n, b=self.n)

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def validate(self) -> None:
        n, r, table = self.n, self.r, self.table
        if not 1 <= n <= MAX_WIDTH:
            raise LayoutError(f"oracle width {n} outside [1, {MAX_WIDTH}]")
        if r == 0:
            raise InvalidPeriodError("period r must be nonzero")
        if not 0 < r < (1 << n):
            raise InvalidPeriodError(f"period {r} does not fit in {n} bits")
        if table.shape != (1 << n,):
            raise LayoutError(f"table must have {1 << n} entries, got {table.shape}")
        if table.min() < 0 or table.max() >= (1 << n):
            raise LayoutError("table values must be n-bit")
        x = np.arange(1 << n)
        if not np.array_equal(table, table[x ^ r]):
            raise InvalidPeriodError(f"table is not invariant under x -> x ^ {r}")
        _, counts = np.unique(table, return_counts=True)
        if not np.all(counts == 2):
            raise InvalidPeriodError("table is not exactly 2-to-1")

    def image(self) -> list[int]:
        return sorted(set(int(v) for v in self.table))

    def to_json(self) -> dict:
        return {"n": self.n, "r": self.r, "table": [int(v) for v in self.table]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "PeriodicOracle":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["n"]), int(data["r"]), np.asarray(data["table"], dtype=np.int64))


def random_periodic(n: int, r: int, seed) -> PeriodicOracle:
    """Seeded random oracle with period ``r``.

    Cosets ``{x, x ^ r}`` are taken in order of their smaller element and
    receive the first ``2**(n-1)`` entries of a seeded permutation of all
    n-bit outputs, so distinct cosets get distinct values.
    """
    if r == 0:
        raise InvalidPeriodError("period r must be nonzero")
    if not 1 <= n <= MAX_WIDTH:
        raise LayoutError(f"oracle width {n} outside [1, {MAX_WIDTH}]")
    if not 0 < r < (1 << n):
        raise InvalidPeriodError(f"period {r} does not fit in {n} bits")
    rng = np.random.default_rng(seed)
    values = rng.permutation(1 << n)[: 1 << (n - 1)]
    x = np.arange(1 << n)
    reps = np.minimum(x, x ^ r)
    # rank of each coset representative among all representatives
    coset_rank = np.searchsorted(np.unique(reps), reps)
    return PeriodicOracle(n, r, values[coset_rank])


def random_period(n: int, rng: np.random.Generator) -> int:
    return int(rng.integers(1, 1 << n))


def brute_force_reverse(oracle: PeriodicOracle, value: int | str) -> Optional[tuple[int, int]]:
    """Both preimages of ``value`` in ascending order, by exhaustive scan."""
    v = as_index(value, oracle.n)
    hits = []
    for x in range(oracle.N):
        if oracle.table[x] == v:
            hits.append(x)
    if not hits:
        return None
    return hits[0], hits[1]


def brute_force_period(oracle: PeriodicOracle) -> int:
    """Recover ``r`` from the first collision found by a linear scan."""
    seen: dict[int, int] = {}
    for x in range(oracle.N):
        v = int(oracle.table[x])
        if v in seen:
            return seen[v] ^ x
        seen[v] = x
    raise InvalidPeriodError("no collision found; oracle is not 2-to-1")
