"""Brute-force cross-checks: dense tensor simulation and outcome enumeration."""
from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from everett import heisenberg, linalg
from everett.freqmap import PhiGrid, quantize_tilde
from everett.scenario import (
    Scenario,
    Structure,
    build_initial_state,
    build_observable,
    build_total_U,
    build_U_F,
    build_U_O,
    build_U_p,
    label_projectors_O,
)
from everett.weights import WeightTable, as_probability, closed_form_weights, observer_weight

MAX_ENUMERATION_N = 22

UNITARY_TOL = 1e-12
OPERATOR_TOL = 1e-12
LABELED_FORM_TOL = 1e-10
FAMILY_TOL = 1e-10
AGREEMENT_TOL = 1e-10
COMPLETION_TOL = 1e-12


@dataclass
class Check:
    name: str
    deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol


@dataclass
class OracleReport:
    params: dict
    checks: list[Check] = field(default_factory=list)
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, deviation: float, tol: float) -> Check:
        if deviation < 0 or math.isnan(deviation):
            raise ValueError(f"bad deviation {deviation} for {name}")
        c = Check(name, float(deviation), tol)
        self.checks.append(c)
        return c

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_text(self) -> str:
        head = ", ".join(f"{k}={v}" for k, v in self.params.items())
        width = max(len(c.name) for c in self.checks) if self.checks else 10
        lines = [head]
        for c in self.checks:
            lines.append(f"  {c.name:<{width}}  {c.deviation:.3e}  {'pass' if c.passed else 'FAIL'}")
        lines.append(f"  {'all passed' if self.passed else 'FAILED'} in {self.runtime_ms:.0f} ms")
        return "\n".join(lines)

    def csv_rows(self) -> list[tuple[str, str, str]]:
        return [(c.name, format(c.deviation, ".17g"), "true" if c.passed else "false") for c in self.checks]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("check_name", "deviation", "pass"))
        w.writerows(self.csv_rows())
        return buf.getvalue()


def full_tensor_weights(scen: Scenario, total_unitary=None) -> WeightTable:
    """Meter-copy weights from matrix algebra alone.

    Evolves ``f`` with the total unitary, decomposes it over the label
    operators and takes their expectation values in the initial state.
    """
    linalg.check_dim(scen.layout.total_dim)
    if total_unitary is None:
        f_t1 = heisenberg.evolved_observable("f", scen.structure)
    else:
        f_t1 = heisenberg.evolve(linalg.as_matrix(total_unitary), build_observable("f", scen))
    dec = heisenberg.decompose(f_t1, heisenberg.label_family_L(scen), build_initial_state(scen), source="f")
    return WeightTable(scen.n_systems, scen.resolution, scen.p1, tuple(dec.weights), "float")


def schrodinger_weights(scen: Scenario, total_unitary=None) -> list[float]:
    """``<ψ| U† Π_k U |ψ>`` with ``Π_k`` the meter eigenprojectors."""
    u = build_total_U(scen) if total_unitary is None else linalg.as_matrix(total_unitary)
    psi_t1 = u @ build_initial_state(scen)
    fdim = scen.resolution + 2
    amps = np.abs(psi_t1.reshape(fdim, -1)) ** 2
    return [math.fsum(row) for row in amps]


def enumerate_outcome_weights(n: int, nu: int, p1, mode: str = "float", p2=None) -> WeightTable:
    """Sum ``Π|c|²`` over all ``2^n`` system outcome strings, bin by bin.

    ``p2`` defaults to ``1 - p1``; pass ``|c2|²`` to mirror a scenario's
    amplitudes exactly.
    """
    if n > MAX_ENUMERATION_N:
        raise ValueError(f"enumeration limited to n <= {MAX_ENUMERATION_N}, got {n}")
    if n < 1:
        raise ValueError("n must be >= 1")
    grid = PhiGrid(nu)
    if mode == "exact":
        a = as_probability(p1)
        b = 1 - a if p2 is None else as_probability(p2)
    else:
        a = float(p1)
        b = 1.0 - a if p2 is None else float(p2)
    acc = [[] for _ in range(grid.n_bins)]
    for s in itertools.product((1, 2), repeat=n):
        ones = s.count(1)
        acc[quantize_tilde(s, grid)].append(a ** ones * b ** (n - ones))
    if mode == "exact":
        ws = tuple(sum(x, Fraction(0)) for x in acc)
        return WeightTable(n, nu, a, ws, "exact")
    return WeightTable(n, nu, a, tuple(math.fsum(x) for x in acc), "float")


def _max_dev(xs, ys) -> float:
    return max(abs(float(x) - float(y)) for x, y in zip(xs, ys))


def structural_checks(struct: Structure, total_unitary=None) -> list[Check]:
    """Amplitude-independent operator checks for one ``(N, ν, completion)``."""
    if total_unitary is None:
        return list(_structural_checks_cached(struct))
    return _structural_checks(struct, linalg.as_matrix(total_unitary))


@lru_cache(maxsize=32)
def _structural_checks_cached(struct: Structure) -> tuple[Check, ...]:
    return tuple(_structural_checks(struct, build_total_U(struct)))


def _structural_checks(struct: Structure, u: np.ndarray) -> list[Check]:
    checks: list[Check] = []

    def add(name, dev, tol):
        checks.append(Check(name, float(dev), tol))

    n = struct.n_systems
    dims = struct.layout.dims
    u_o, u_f = build_U_O(struct), build_U_F(struct)
    unitary_dev = linalg.unitarity_deviation
    for p in range(1, n + 1):
        add(f"unitary_U_p{p}", unitary_dev(build_U_p(p, struct)), UNITARY_TOL)
    add("unitary_U_O", unitary_dev(u_o), UNITARY_TOL)
    add("unitary_U_F", unitary_dev(u_f), UNITARY_TOL)
    add("unitary_U", unitary_dev(u), UNITARY_TOL)
    add("U_equals_UF_UO", linalg.max_norm(u - linalg.compose(u_f, u_o)), UNITARY_TOL)

    orth, comp = linalg.family_deviation(label_projectors_O(struct))
    add("label_O_orthogonal", orth, FAMILY_TOL)
    add("label_O_complete", comp, FAMILY_TOL)
    orth, comp = linalg.family_deviation(heisenberg.label_family_L(struct))
    add("label_L_orthogonal", orth, FAMILY_TOL)
    add("label_L_complete", comp, FAMILY_TOL)

    for p in range(1, n + 1):
        a = build_observable("a", struct, p)
        add(f"a{p}_unchanged", linalg.max_norm(heisenberg.evolve(u, a) - a), OPERATOR_TOL)
        b = build_observable("b", struct, p)
        add(f"X_b{p}_identity", linalg.max_norm(heisenberg.intermediate_b(p, struct) - b), OPERATOR_TOL)
        b_t1 = heisenberg.evolve(u, b)
        add(f"b{p}_labeled_form", linalg.max_norm(b_t1 - heisenberg.labeled_form_b(p, struct)), LABELED_FORM_TOL)
        orth, comp = linalg.family_deviation(heisenberg.label_family_S(p, struct))
        add(f"label_S{p}_family", max(orth, comp), FAMILY_TOL)

    f_t1 = heisenberg.evolve(u, build_observable("f", struct))
    add("f_labeled_form", linalg.max_norm(f_t1 - heisenberg.labeled_form_f(struct)), LABELED_FORM_TOL)
    x_f_expected = sum(
        linalg.compose(linalg.embed(fk, [0], dims), linalg.embed(pk, struct.observer_factors, dims))
        for fk, pk in zip(heisenberg.meter_copy_operators(struct), label_projectors_O(struct))
    )
    add("X_f_form", linalg.max_norm(heisenberg.intermediate_f(struct) - x_f_expected), LABELED_FORM_TOL)
    return checks


def verify_scenario(scen: Scenario, total_unitary=None) -> OracleReport:
    """Run every structural and weight check on one scenario.

    ``total_unitary`` replaces the constructed total unitary, which is how
    negative controls feed a corrupted operator through the same checks.
    Failures are recorded in the report, never raised.
    """
    t0 = time.perf_counter()
    report = OracleReport({"N": scen.n_systems, "nu": scen.resolution,
                           "p1": format(scen.p1, ".17g"), "completion": scen.completion})
    report.checks.extend(structural_checks(scen.structure, total_unitary))
    u = build_total_U(scen) if total_unitary is None else linalg.as_matrix(total_unitary)

    psi = build_initial_state(scen)
    for p in range(1, scen.n_systems + 1):
        if total_unitary is None:
            b_t1 = heisenberg.evolved_observable("b", scen.structure, p)
        else:
            b_t1 = heisenberg.evolve(u, build_observable("b", scen, p))
        dec = heisenberg.decompose(b_t1, heisenberg.label_family_S(p, scen), psi, source=f"b{p}")
        report.add(f"W_b{p}_born", _max_dev(dec.weights, (observer_weight(1, scen), observer_weight(2, scen))),
                   AGREEMENT_TOL)

    tensor = full_tensor_weights(scen, total_unitary)
    enum = enumerate_outcome_weights(scen.n_systems, scen.resolution, scen.p1, p2=scen.p2)
    closed = closed_form_weights(scen.n_systems, scen.resolution, scen.p1, "float")
    report.add("W_f0_zero", abs(tensor.weights[0]), AGREEMENT_TOL)
    report.add("tensor_vs_enumeration", _max_dev(tensor.weights, enum.weights), AGREEMENT_TOL)
    report.add("tensor_vs_closed_form", _max_dev(tensor.weights, closed.weights), AGREEMENT_TOL)
    report.add("enumeration_vs_closed_form", _max_dev(enum.weights, closed.weights), AGREEMENT_TOL)
    report.add("tensor_vs_schrodinger", _max_dev(tensor.weights, schrodinger_weights(scen, total_unitary)),
               AGREEMENT_TOL)
    report.add("tensor_normalized", abs(tensor.total() - 1.0), AGREEMENT_TOL)

    other = "cyclic" if scen.completion == "transposition" else "transposition"
    alt = full_tensor_weights(scen.with_completion(other))
    report.add(f"completion_independent_{other}", _max_dev(tensor.weights, alt.weights), COMPLETION_TOL)

    report.runtime_ms = (time.perf_counter() - t0) * 1e3
    return report


def corrupt(u: np.ndarray, eps: float = 1e-3, index: tuple[int, int] = (0, 0)) -> np.ndarray:
    """Copy of ``u`` with one entry shifted by ``eps``."""
    out = np.array(u, dtype=np.complex128)
    out[index] += eps
    return out


def random_scenarios(max_n: int, max_nu: int, trials: int, seed: int) -> list[Scenario]:
    """``trials`` random-amplitude scenarios for each ``(N, ν)`` on the grid."""
    rng = np.random.default_rng(seed)
    return [Scenario.random(n, nu, rng)
            for n in range(1, max_n + 1) for nu in range(1, max_nu + 1) for _ in range(trials)]
