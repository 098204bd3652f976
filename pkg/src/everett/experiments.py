"""Finite-N convergence studies of the meter-copy weights."""
from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from everett.freqmap import PhiGrid
from everett.weights import (
    TieDecomposition,
    WeightTable,
    as_probability,
    as_rational,
    central_term_asymptotic,
    closed_form_weights,
    default_epsilon,
    find_k_prime,
    gap_delta,
    lln_tail,
    tie_decomposition,
)

DEFAULT_N_LIST = (10, 100, 1000, 10_000)
EXACT_MAX_N = 2000
CONVERGENCE_LEVELS = (1e-3, 1e-6, 1e-9)


def _check_n_list(n_list: Sequence[int]) -> list[int]:
    ns = [int(n) for n in n_list]
    if not ns:
        raise ValueError("n_list must be non-empty")
    if any(n < 1 for n in ns):
        raise ValueError("ensemble sizes must be positive")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_list must be strictly ascending")
    return ns


def _check_exact_cap(ns: list[int], mode: str, exact_max_n: int) -> None:
    if mode == "exact" and ns[-1] > exact_max_n:
        raise ValueError(f"exact mode is capped at N={exact_max_n}; use float mode for N={ns[-1]}")


def _sum(values, mode: str):
    values = list(values)
    if mode == "exact":
        return sum(values, Fraction(0))
    return math.fsum(values)


@dataclass
class SweepRow:
    n: int
    table: WeightTable
    k_prime: tuple[int, ...]
    mass_at_kprime: object
    mass_elsewhere: object
    lln_tail: object
    tie: TieDecomposition | None = None
    stirling: float | None = None

    @property
    def converged_to(self) -> float | None:
        """Tightest of the reporting thresholds met by ``1 - mass_at_kprime``."""
        met = [lvl for lvl in CONVERGENCE_LEVELS if float(self.mass_at_kprime) >= 1 - lvl]
        return min(met) if met else None


@dataclass
class SweepResult:
    nu: int
    p1: Fraction
    mode: str
    epsilon: Fraction
    epsilon_is_default: bool
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def grid(self) -> PhiGrid:
        return PhiGrid(self.nu)

    def masses_at_kprime(self) -> list[float]:
        return [float(r.mass_at_kprime) for r in self.rows]

    def bound_violations(self, rel_tol: float = 1e-12) -> list[int]:
        """Sizes where the mass away from the nearest bin(s) exceeds the tail sum."""
        bad = []
        for r in self.rows:
            if self.mode == "exact":
                ok = r.mass_elsewhere <= r.lln_tail
            else:
                ok = r.mass_elsewhere <= r.lln_tail * (1 + rel_tol) + 1e-300
            if not ok:
                bad.append(r.n)
        return bad

    def tie_identity_failures(self) -> list[int]:
        out = []
        for r in self.rows:
            if r.tie is None:
                continue
            gap = r.tie.identity_gap
            if (gap != 0) if self.mode == "exact" else (abs(gap) > 1e-12):
                out.append(r.n)
        return out


def _row(n: int, nu: int, p1: Fraction, mode: str, eps: Fraction, ks: tuple[int, ...]) -> SweepRow:
    table = closed_form_weights(n, nu, p1, mode)
    at = _sum((table.weights[k] for k in ks), mode)
    elsewhere = _sum((w for k, w in enumerate(table.weights) if k not in ks), mode)
    return SweepRow(n, table, ks, at, elsewhere, lln_tail(n, p1, eps, mode))


def run_sweep(p1, nu: int, n_list: Sequence[int] = DEFAULT_N_LIST, mode: str = "float",
              epsilon=None, exact_max_n: int = EXACT_MAX_N) -> SweepResult:
    """Weight tables along ``n_list`` with the mass concentration at the nearest bin(s).

    Each row also carries the binomial tail outside ``N p1 ± N ε``; with the
    default ``ε`` that tail bounds the mass away from the nearest bin(s).
    """
    p1 = as_probability(p1)
    ns = _check_n_list(n_list)
    _check_exact_cap(ns, mode, exact_max_n)
    grid = PhiGrid(nu)
    ks = find_k_prime(p1, grid)
    eps = default_epsilon(p1, grid) if epsilon is None else as_rational(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    result = SweepResult(nu, p1, mode, eps, epsilon is None)
    for n in ns:
        result.rows.append(_row(n, nu, p1, mode, eps, ks))
    return result


def run_tie_study(nu: int, n_list: Sequence[int], mode: str = "exact",
                  exact_max_n: int = EXACT_MAX_N) -> SweepResult:
    """The ``p1 = 1/2`` tie for odd ``ν``: both tied weights and their split into terms."""
    if nu < 1 or nu % 2 == 0:
        raise ValueError(f"the tie study needs an odd resolution, got {nu}")
    ns = _check_n_list(n_list)
    if any(n % 2 for n in ns):
        raise ValueError("the tie study needs even ensemble sizes")
    _check_exact_cap(ns, mode, exact_max_n)
    p1 = Fraction(1, 2)
    grid = PhiGrid(nu)
    ks = find_k_prime(p1, grid)
    eps = default_epsilon(p1, grid)
    result = SweepResult(nu, p1, mode, eps, True)
    for n in ns:
        row = _row(n, nu, p1, mode, eps, ks)
        row.tie = tie_decomposition(n, nu, mode)
        row.stirling = central_term_asymptotic(n)
        result.rows.append(row)
    return result


@dataclass
class LLNRow:
    epsilon: Fraction
    n: int
    tail: object
    subset_tail: object | None = None


def run_lln_study(p1, eps_list: Sequence, n_list: Sequence[int], mode: str = "float",
                  subset: Callable[[int], bool] | None = None,
                  exact_max_n: int = EXACT_MAX_N) -> list[LLNRow]:
    """Binomial tail ``S_N`` for every ``(ε, N)``; ``subset`` adds the restricted sum."""
    p1 = as_probability(p1)
    ns = _check_n_list(n_list)
    _check_exact_cap(ns, mode, exact_max_n)
    epss = [as_rational(e) for e in eps_list]
    if not epss or any(e <= 0 for e in epss):
        raise ValueError("every epsilon must be positive")
    rows = []
    for eps in epss:
        for n in ns:
            sub = lln_tail(n, p1, eps, mode, subset) if subset is not None else None
            rows.append(LLNRow(eps, n, lln_tail(n, p1, eps, mode), sub))
    return rows


def lln_trend(rows: Sequence[LLNRow]) -> dict[Fraction, str]:
    """Per ``ε``: ``decreasing``, ``nonincreasing`` or ``mixed`` along ``N``."""
    out = {}
    for eps in dict.fromkeys(r.epsilon for r in rows):
        vals = [r.tail for r in rows if r.epsilon == eps]
        pairs = list(zip(vals, vals[1:]))
        if all(b < a for a, b in pairs):
            out[eps] = "decreasing"
        elif all(b <= a for a, b in pairs):
            out[eps] = "nonincreasing"
        else:
            out[eps] = "mixed"
    return out


def describe_gap(p1, nu: int) -> str:
    delta, side = gap_delta(p1, PhiGrid(nu))
    return f"delta={delta} ({side})"
