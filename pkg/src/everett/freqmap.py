"""Relative frequencies and their finite-resolution quantization.

Everything here is exact: counts are integers and grid values are
``Fraction`` objects, so tie-breaking never depends on rounding.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

IGNORANT = 0


@dataclass(frozen=True)
class PhiGrid:
    """Output values of a frequency meter with ``resolution`` steps.

    Index 0 is the ignorance value ``-1/resolution``; index ``k >= 1`` holds
    ``(k-1)/resolution``.
    """

    resolution: int

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 1:
            raise ValueError(f"resolution must be a positive integer, got {self.resolution!r}")

    @cached_property
    def values(self) -> tuple[Fraction, ...]:
        nu = self.resolution
        return (Fraction(-1, nu),) + tuple(Fraction(k - 1, nu) for k in range(1, nu + 2))

    @property
    def n_bins(self) -> int:
        """Number of labels including the ignorance label."""
        return self.resolution + 2

    def phi(self, k: int) -> Fraction:
        return self.values[k]

    @property
    def half_width(self) -> Fraction:
        return Fraction(1, 2 * self.resolution)


def _check_string(s: Sequence[int]) -> None:
    if len(s) < 1:
        raise ValueError("outcome string must be non-empty")
    for x in s:
        if x not in (0, 1, 2):
            raise ValueError(f"outcome entries must be 0, 1 or 2, got {x!r}")


def rel_freq(s: Sequence[int]) -> Fraction:
    """Fraction of entries equal to 1; every entry must be a definite result."""
    _check_string(s)
    if IGNORANT in s:
        raise ValueError("relative frequency is undefined when an observer is ignorant")
    return Fraction(sum(1 for x in s if x == 1), len(s))


def quantize(fval, grid: PhiGrid) -> int:
    """Index ``k`` in ``1..ν+1`` of the grid value nearest ``fval``.

    Ties go to the smaller grid value.
    """
    fval = Fraction(fval)
    if not 0 <= fval <= 1:
        raise ValueError(f"frequency must lie in [0, 1], got {fval}")
    best, best_dist = 1, abs(grid.phi(1) - fval)
    for k in range(2, grid.resolution + 2):
        d = abs(grid.phi(k) - fval)
        if d < best_dist:
            best, best_dist = k, d
    return best


def quantize_tilde(s: Sequence[int], grid: PhiGrid) -> int:
    """Like :func:`quantize` on the string's frequency, but 0 if any observer is ignorant."""
    _check_string(s)
    if IGNORANT in s:
        return 0
    return quantize(rel_freq(s), grid)


def bin_of_count(l: int, n: int, grid: PhiGrid) -> int:
    """Bin ``k`` whose interval ``(n(φ_k - 1/2ν), n(φ_k + 1/2ν)]`` contains ``l``."""
    if not 0 <= l <= n:
        raise ValueError(f"count {l} outside 0..{n}")
    nu = grid.resolution
    # n(φ_k ± 1/2ν) = n(2(k-1) ± 1)/2ν, so k-1 = ceil((2νl - n) / 2n)
    return -((n - 2 * nu * l) // (2 * n)) + 1


def bin_range(k: int, n: int, grid: PhiGrid) -> range:
    """Counts ``l`` in ``0..n`` that fall into bin ``k`` (empty for ``k = 0``)."""
    if k == 0:
        return range(0)
    nu = grid.resolution
    lo = (n * (2 * (k - 1) - 1)) // (2 * nu) + 1
    hi = (n * (2 * (k - 1) + 1)) // (2 * nu)
    return range(max(lo, 0), min(hi, n) + 1)
