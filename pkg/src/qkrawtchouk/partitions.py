"""Young diagrams in an n x k box.

A partition is a plain tuple of row lengths.  Inside a box it is always
padded to exactly ``n`` entries so that it has ``n`` particle coordinates
``a_i = lambda_i + n - i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterator, Sequence

import numpy as np

Partition = tuple[int, ...]
PointConfig = tuple[int, ...]

DEFAULT_ENUMERATION_CAP = 10**7


class BoxError(ValueError):
    """Raised when a diagram does not fit the requested box."""


def normalize(lam: Sequence[int], n: int | None = None) -> Partition:
    """Validate a weakly decreasing sequence and pad/trim zeros to length n."""
    lam = tuple(int(x) for x in lam)
    if any(x < 0 for x in lam):
        raise ValueError(f"negative row length in {lam}")
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
        raise ValueError(f"rows must be weakly decreasing: {lam}")
    if n is None:
        return lam
    nonzero = tuple(x for x in lam if x > 0)
    if len(nonzero) > n:
        raise BoxError(f"{lam} has more than {n} nonzero rows")
    return nonzero + (0,) * (n - len(nonzero))


def fits_box(lam: Sequence[int], n: int, k: int) -> bool:
    lam = [x for x in lam if x > 0]
    return len(lam) <= n and all(x <= k for x in lam)


def check_box(lam: Sequence[int], n: int, k: int) -> Partition:
    lam = normalize(lam)
    if not fits_box(lam, n, k):
        raise BoxError(f"{lam} does not fit the {n}x{k} box")
    return normalize(lam, n)


def size(lam: Sequence[int]) -> int:
    return sum(lam)


def conjugate(lam: Sequence[int], length: int | None = None) -> Partition:
    """Transpose; optionally padded with zeros to ``length`` rows."""
    lam = normalize(lam)
    first = lam[0] if lam else 0
    cols = tuple(sum(1 for x in lam if x > j) for j in range(first))
    if length is None:
        return cols
    return normalize(cols, length)


def complement_conjugate(lam: Sequence[int], n: int, k: int) -> Partition:
    """Transpose of the complement of lam inside the n x k box (k rows)."""
    lam = check_box(lam, n, k)
    comp = tuple(k - x for x in reversed(lam))
    return conjugate(comp, k)


def content_stat(lam: Sequence[int]) -> int:
    """||lam|| = sum_i (i - 1) lam_i."""
    return sum(i * x for i, x in enumerate(lam))


def dual_content_stat(lam: Sequence[int], n: int, k: int) -> int:
    """||complement_conjugate(lam)|| computed from the rows of lam."""
    lam = check_box(lam, n, k)
    return sum((k - x) * (k - x - 1) // 2 for x in lam)


def to_coords(lam: Sequence[int], n: int) -> PointConfig:
    lam = normalize(lam, n)
    return tuple(x + n - i for i, x in enumerate(lam, start=1))


def from_coords(coords: Sequence[int], n: int | None = None) -> Partition:
    coords = tuple(int(a) for a in coords)
    if n is None:
        n = len(coords)
    if len(coords) != n:
        raise ValueError(f"expected {n} coordinates, got {len(coords)}")
    if any(coords[i] <= coords[i + 1] for i in range(n - 1)) or (coords and coords[-1] < 0):
        raise ValueError(f"coordinates must be strictly decreasing and >= 0: {coords}")
    return tuple(a - n + i for i, a in enumerate(coords, start=1))


def count_in_box(n: int, k: int) -> int:
    return comb(n + k, n)


def enumerate_in_box(n: int, k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Partition]:
    """All partitions in the n x k box, lexicographically increasing."""
    total = count_in_box(n, k)
    if total > cap:
        raise OverflowError(f"{total} partitions in the {n}x{k} box exceed the cap {cap}")

    def rec(prefix: tuple[int, ...], bound: int) -> Iterator[Partition]:
        if len(prefix) == n:
            yield prefix
            return
        for x in range(bound + 1):
            yield from rec(prefix + (x,), x)

    if n == 0:
        yield ()
        return
    for first in range(k + 1):
        yield from rec((first,), first)


@dataclass(frozen=True)
class Profile:
    """Upper boundary of the rotated diagram, sampled at the integers 0..n+k.

    ``values[j]`` is the height at x = j; the slope on [j, j+1) is -1
    exactly when j is one of the particle coordinates.
    """

    n: int
    k: int
    values: np.ndarray
    descents: tuple[int, ...]

    @property
    def xs(self) -> np.ndarray:
        return np.arange(self.n + self.k + 1, dtype=float)

    def __call__(self, x, scaled: bool = False):
        """Evaluate f_n; with ``scaled`` both axes are divided by n."""
        x = np.asarray(x, dtype=float)
        if scaled:
            return np.interp(x * self.n, self.xs, self.values) / self.n
        return np.interp(x, self.xs, self.values)


def profile(lam: Sequence[int], n: int, k: int) -> Profile:
    lam = check_box(lam, n, k)
    coords = set(to_coords(lam, n))
    steps = np.array([-1 if j in coords else 1 for j in range(n + k)])
    values = np.concatenate([[n], n + np.cumsum(steps)]).astype(float)
    return Profile(n=n, k=k, values=values, descents=tuple(sorted(coords, reverse=True)))
