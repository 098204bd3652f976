"""Closed-form copy weights from binomial sums, in exact or floating arithmetic."""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from everett.freqmap import PhiGrid, bin_range

Mode = Literal["exact", "float"]
MODES = ("exact", "float")


def as_rational(x) -> Fraction:
    """Exact value of a number given as Fraction, int, str or float.

    Floats are read through their shortest decimal repr, so ``0.3`` means
    ``3/10`` rather than the nearest binary double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"expected a finite number, got {x}")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def as_probability(p1) -> Fraction:
    value = as_rational(p1)
    if not 0 <= value <= 1:
        raise ValueError(f"probability must lie in [0, 1], got {value}")
    return value


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


@dataclass(frozen=True)
class WeightTable:
    """Weights of the meter copies ``k = 0..ν+1`` for one ensemble size."""

    n: int
    nu: int
    p1: object
    weights: tuple
    mode: str

    @property
    def grid(self) -> PhiGrid:
        return PhiGrid(self.nu)

    def phi(self, k: int) -> Fraction:
        return self.grid.phi(k)

    def total(self):
        if self.mode == "exact":
            return sum(self.weights, Fraction(0))
        return math.fsum(self.weights)

    def weight_at_phi(self, phi) -> object:
        return self.weights[self.grid.values.index(Fraction(phi))]

    def as_floats(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])


# -- binomial masses ---------------------------------------------------------

def _exact_numerators(n: int, p1: Fraction) -> tuple[list[int], int]:
    """Integers ``C(n,l) a^l b^(n-l)`` and the common denominator ``d^n``."""
    d = p1.denominator
    a = p1.numerator
    b = d - a
    nums = [0] * (n + 1)
    if b == 0:
        nums[n] = 1
        return nums, 1
    if a == 0:
        nums[0] = 1
        return nums, 1
    cur = b ** n
    nums[0] = cur
    for l in range(n):
        cur = cur * (n - l) * a // ((l + 1) * b)
        nums[l + 1] = cur
    return nums, d ** n


def _float_masses(n: int, p: float, q: float) -> np.ndarray:
    out = np.zeros(n + 1)
    if p == 0.0:
        out[0] = 1.0
        return out
    if q == 0.0:
        out[n] = 1.0
        return out
    m = min(n, int((n + 1) * p))
    up_l = np.arange(m, n, dtype=float)
    up = (n - up_l) / (up_l + 1.0) * (p / q)
    down_l = np.arange(m, 0, -1, dtype=float)
    down = down_l / (n - down_l + 1.0) * (q / p)
    out[m] = 1.0
    out[m + 1:] = np.cumprod(up)
    out[:m] = np.cumprod(down)[::-1]
    # the seed at the mode is fixed by the binomial theorem
    return out / math.fsum(out)


def binomial_masses(n: int, p1, mode: Mode = "float"):
    """All masses ``p_{n,l}``, ``l = 0..n``.

    Exact mode returns a list of ``Fraction``; float mode walks the ratio
    ``p_{l+1}/p_l = (n-l)/(l+1) · p/q`` outward from the mode.
    """
    _check_mode(mode)
    if n < 0:
        raise ValueError("n must be nonnegative")
    p1 = as_probability(p1)
    if mode == "exact":
        nums, den = _exact_numerators(n, p1)
        return [Fraction(x, den) for x in nums]
    return _float_masses(n, float(p1), float(1 - p1))


def binomial_mass(n: int, l: int, p1, mode: Mode = "float"):
    if not 0 <= l <= n:
        raise ValueError(f"count {l} outside 0..{n}")
    _check_mode(mode)
    p1 = as_probability(p1)
    if mode == "exact":
        return Fraction(math.comb(n, l) * p1.numerator ** l * (p1.denominator - p1.numerator) ** (n - l),
                        p1.denominator ** n)
    return float(binomial_masses(n, p1, "float")[l])


# -- bin weights -------------------------------------------------------------

def closed_form_weights(n: int, nu: int, p1, mode: Mode = "float") -> WeightTable:
    """Meter-copy weights as binomial sums over each bin's count interval."""
    _check_mode(mode)
    if n < 1 or nu < 1:
        raise ValueError("need n >= 1 and nu >= 1")
    p1 = as_probability(p1)
    grid = PhiGrid(nu)
    if mode == "exact":
        nums, den = _exact_numerators(n, p1)
        ws = [Fraction(0)]
        for k in range(1, nu + 2):
            r = bin_range(k, n, grid)
            ws.append(Fraction(sum(nums[r.start:r.stop]), den))
        return WeightTable(n, nu, p1, tuple(ws), mode)
    masses = _float_masses(n, float(p1), float(1 - p1))
    ws = [0.0]
    for k in range(1, nu + 2):
        r = bin_range(k, n, grid)
        ws.append(math.fsum(masses[r.start:r.stop]))
    return WeightTable(n, nu, float(p1), tuple(ws), mode)


def observer_weight(i: int, scen, mode: Mode = "float"):
    """Weight of observer copy ``i``: ``|c_i|²``, the same for every system."""
    if i not in (1, 2):
        raise ValueError(f"observer copy must be 1 or 2, got {i}")
    _check_mode(mode)
    if mode == "exact":
        if scen.p1_exact is None:
            raise ValueError("exact observer weights need a scenario built with an exact p1")
        return scen.p1_exact if i == 1 else 1 - scen.p1_exact
    return abs(scen.c1) ** 2 if i == 1 else abs(scen.c2) ** 2


# -- nearest grid values -----------------------------------------------------

def find_k_prime(p1, grid: PhiGrid) -> tuple[int, ...]:
    """Bins nearest ``p1``: one index, or two adjacent ones when ``p1`` is a midpoint."""
    p1 = as_probability(p1)
    dists = {k: abs(grid.phi(k) - p1) for k in range(1, grid.resolution + 2)}
    best = min(dists.values())
    return tuple(k for k, d in dists.items() if d == best)


def gap_delta(p1, grid: PhiGrid) -> tuple[Fraction, str]:
    """Distance from ``p1`` to its nearest grid value and which side it lies on."""
    p1 = as_probability(p1)
    ks = find_k_prime(p1, grid)
    if len(ks) == 2:
        return grid.half_width, "midpoint"
    phi = grid.phi(ks[0])
    if phi == p1:
        return Fraction(0), "on-grid"
    return abs(phi - p1), ("below" if p1 < phi else "above")


def default_epsilon(p1, grid: PhiGrid) -> Fraction:
    """Tail half-width separating the nearest bin(s) from all others.

    Half of ``1/2ν - Δ`` for a unique nearest bin.  For a midpoint every other
    bin sits at least ``1/ν`` away, and ``1/2ν`` is used.
    """
    delta, side = gap_delta(p1, grid)
    if side == "midpoint":
        return grid.half_width
    return (grid.half_width - delta) / 2


# -- law of large numbers tail ------------------------------------------------

def tail_indices(n: int, p1, eps) -> list[int]:
    """Counts ``l`` with ``|l - n p1| > n eps``."""
    p1, eps = as_probability(p1), as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    lo_end = math.ceil(n * (p1 - eps)) - 1
    hi_start = math.floor(n * (p1 + eps)) + 1
    return [l for l in range(0, n + 1) if l <= lo_end or l >= hi_start]


def lln_tail(n: int, p1, eps, mode: Mode = "float", subset: Callable[[int], bool] | None = None):
    """Binomial mass outside ``n p1 ± n eps``, optionally only over ``subset``."""
    _check_mode(mode)
    idx = tail_indices(n, p1, eps)
    if subset is not None:
        idx = [l for l in idx if subset(l)]
    if mode == "exact":
        nums, den = _exact_numerators(n, as_probability(p1))
        return Fraction(sum(nums[l] for l in idx), den)
    masses = binomial_masses(n, p1, "float")
    return math.fsum(masses[idx]) if idx else 0.0


# -- the tie at p1 = 1/2 ------------------------------------------------------

@dataclass(frozen=True)
class TieDecomposition:
    n: int
    nu: int
    k_less: int
    k_greater: int
    w_less: object
    w_greater: object
    t_shared: object
    t_less: object
    t_greater: object
    mode: str

    @property
    def identity_gap(self):
        """``(W< - W>) - (T< - T>)``; exactly zero in exact mode."""
        return (self.w_less - self.w_greater) - (self.t_less - self.t_greater)


def central_term_exact(n: int) -> Fraction:
    if n % 2:
        return Fraction(0)
    return Fraction(math.comb(n, n // 2), 2 ** n)


def central_term_asymptotic(n: int) -> float:
    """Stirling estimate ``sqrt(2/(πn))`` of ``C(n, n/2) / 2^n``."""
    if n < 2 or n % 2:
        raise ValueError(f"need an even n >= 2, got {n}")
    return math.sqrt(2.0 / (math.pi * n))


def tie_decomposition(n: int, nu: int, mode: Mode = "exact", p1=Fraction(1, 2)) -> TieDecomposition:
    """Split the two tied weights at ``p1 = 1/2`` (odd ``ν``) into shared and distinct terms."""
    p1 = as_probability(p1)
    if p1 != Fraction(1, 2):
        raise ValueError("the tie decomposition needs p1 = 1/2")
    if nu < 1 or nu % 2 == 0:
        raise ValueError(f"the tie decomposition needs an odd resolution, got {nu}")
    if n < 2:
        raise ValueError("the tie decomposition needs n >= 2")
    grid = PhiGrid(nu)
    k_less, k_greater = find_k_prime(p1, grid)
    table = closed_form_weights(n, nu, p1, mode)
    t_less = central_term_exact(n)
    far = Fraction(n * (nu + 2), 2 * nu)
    # the far endpoint lies beyond n when nu = 1
    if far.denominator == 1 and 0 < far <= n:
        t_greater = Fraction(math.comb(n, int(far)), 2 ** n)
    else:
        t_greater = Fraction(0)
    if mode == "float":
        t_less, t_greater = float(t_less), float(t_greater)
    w_less, w_greater = table.weights[k_less], table.weights[k_greater]
    return TieDecomposition(n, nu, k_less, k_greater, w_less, w_greater,
                            w_less - t_less, t_less, t_greater, mode)


def shared_term_direct(n: int, nu: int) -> Fraction:
    """The shared tie term summed directly over ``n(ν-2)/2ν < l < n/2``."""
    lo = Fraction(n * (nu - 2), 2 * nu)
    total = sum(math.comb(n, l) for l in range(0, n + 1) if lo < l < Fraction(n, 2))
    return Fraction(total, 2 ** n)
