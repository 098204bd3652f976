import math
import time
from fractions import Fraction

import numpy as np
import pytest

from everett import freqmap, oracle
from everett.cli import main
from everett.experiments import run_lln_study, run_tie_study
from everett.freqmap import PhiGrid
from everett.heisenberg import decompose, evolved_observable, label_family_S
from everett.scenario import Scenario
from everett.weights import central_term_asymptotic, closed_form_weights, find_k_prime, observer_weight

ORACLE_SIZES = [(n, nu) for n in (1, 2, 3) for nu in (1, 2, 3)]
AGREEMENT = ("tensor_vs_enumeration", "tensor_vs_closed_form", "enumeration_vs_closed_form")


def check_all(problems):
    assert not problems, "; ".join(problems)


@pytest.fixture(scope="module")
def oracle_reports():
    t0 = time.perf_counter()
    reports = [oracle.verify_scenario(s) for s in oracle.random_scenarios(3, 3, 5, seed=42)]
    return reports, time.perf_counter() - t0


@pytest.mark.criterion(1, "three-way weight agreement at oracle sizes within 1e-10, under 60 s")
def test_oracle_agreement(oracle_reports):
    reports, elapsed = oracle_reports
    assert {(r.params["N"], r.params["nu"]) for r in reports} == set(ORACLE_SIZES)
    assert len(reports) == 45
    problems = [f"{r.params} {c.name}={c.deviation:.2e}"
                for r in reports for c in r.checks if c.name in AGREEMENT and c.deviation > 1e-10]
    if elapsed >= 60:
        problems.append(f"runtime {elapsed:.1f} s")
    check_all(problems)


@pytest.mark.criterion(2, "operator identities, unitarity and label families at oracle sizes")
def test_operator_forms(oracle_reports):
    reports, _ = oracle_reports
    tol = {"unitary": 1e-12, "U_equals": 1e-12, "label": 1e-10}
    problems = []
    seen = set()
    for r in reports:
        for c in r.checks:
            if c.name.endswith("_unchanged"):
                limit = 1e-12
            elif c.name.endswith("_labeled_form") or c.name == "X_f_form":
                limit = 1e-10
            elif c.name.startswith("X_b"):
                limit = 1e-12
            else:
                limit = next((v for k, v in tol.items() if c.name.startswith(k)), None)
            if limit is None:
                continue
            seen.add(c.name.rstrip("0123456789"))
            if c.deviation > limit:
                problems.append(f"{r.params} {c.name}={c.deviation:.2e}")
    expected = {"unitary_U_p", "unitary_U_O", "unitary_U_F", "unitary_U", "U_equals_UF_UO",
                "label_O_orthogonal", "label_O_complete", "label_L_orthogonal", "label_L_complete",
                "f_labeled_form", "X_f_form"}
    missing = expected - seen
    if missing:
        problems.append(f"missing checks {sorted(missing)}")
    for n, nu in ORACLE_SIZES:
        names = {c.name for r in reports if (r.params["N"], r.params["nu"]) == (n, nu) for c in r.checks}
        for p in range(1, n + 1):
            for stem in ("a{}_unchanged", "b{}_labeled_form", "X_b{}_identity", "label_S{}_family"):
                if stem.format(p) not in names:
                    problems.append(f"N={n} nu={nu} missing {stem.format(p)}")
    check_all(problems)


def _exact_observer_weights(n, c1, c2):
    """Observer copy weights with rational amplitudes, all arithmetic in Fractions."""
    scen = Scenario(n, 1, float(c1), float(c2))
    psi = np.array([Fraction(1)], dtype=object)
    for _ in range(n):
        psi = np.kron(psi, np.array([Fraction(1), Fraction(0), Fraction(0)], dtype=object))
    for _ in range(n):
        psi = np.kron(psi, np.array([c1, c2], dtype=object))
    psi = np.kron(np.array([Fraction(1)] + [Fraction(0)] * 2, dtype=object), psi)
    out = []
    for p in range(1, n + 1):
        b_t1 = np.rint(evolved_observable("b", scen.structure, p).real).astype(int).astype(object)
        fam = [np.rint(x.real).astype(int).astype(object) for x in label_family_S(p, scen)]
        out.append(decompose(b_t1, fam, psi).weights)
    return out


@pytest.mark.criterion(3, "observer weights are Born weights, no ignorant meter copy, normalization")
def test_weight_laws():
    problems = []
    for c1, c2 in [(Fraction(3, 5), Fraction(4, 5)), (Fraction(5, 13), Fraction(12, 13)),
                   (Fraction(1), Fraction(0)), (Fraction(-8, 17), Fraction(15, 17))]:
        for n in (1, 2, 3):
            for ws in _exact_observer_weights(n, c1, c2):
                if ws != [c1 * c1, c2 * c2]:
                    problems.append(f"W_b at N={n}, c=({c1},{c2}): {ws}")
        scen = Scenario.from_p1(2, 2, c1 * c1)
        if (observer_weight(1, scen, "exact"), observer_weight(2, scen, "exact")) != (c1 * c1, c2 * c2):
            problems.append(f"closed-form W_b at c1={c1}")
    p1s = [Fraction(3, 10), Fraction(1, 2), Fraction(1, 3), Fraction(0), Fraction(1)]
    for n in range(1, 2001):
        t = closed_form_weights(n, 10, p1s[n % len(p1s)], "exact")
        if t.weights[0] != 0 or t.total() != 1:
            problems.append(f"exact table N={n}")
    for n in (2000, 1999):
        for nu in (1, 2, 7, 20):
            for p1 in (Fraction(29, 100), Fraction(1, 7)):
                t = closed_form_weights(n, nu, p1, "exact")
                if t.weights[0] != 0 or t.total() != 1:
                    problems.append(f"exact table N={n} nu={nu} p1={p1}")
    for n in (10, 1000, 10**4, 10**5):
        for p1 in (0.3, 0.5, 0.917):
            t = closed_form_weights(n, 10, p1)
            if t.weights[0] != 0 or abs(t.total() - 1) > 1e-9:
                problems.append(f"float table N={n} p1={p1}: {t.total() - 1:.2e}")
    check_all(problems)


@pytest.mark.criterion(4, "p1=0.3, nu=10: W(0.3) >= 0.9 at N=100, >= 0.999 and rest <= 1e-9 at N=1e4")
def test_born_rule_convergence():
    t0 = time.perf_counter()
    grid = PhiGrid(10)
    (k,) = find_k_prime(0.3, grid)
    assert grid.phi(k) == Fraction(3, 10)
    problems = []
    w100 = closed_form_weights(100, 10, 0.3)
    if not w100.weights[k] >= 0.9:
        problems.append(f"W(0.3) at N=100 is {w100.weights[k]:.6f} < 0.9")
    w1e4 = closed_form_weights(10**4, 10, 0.3)
    if not w1e4.weights[k] >= 0.999:
        problems.append(f"W(0.3) at N=1e4 is {w1e4.weights[k]:.6f}")
    rest = math.fsum(w for j, w in enumerate(w1e4.weights) if j != k)
    if not rest <= 1e-9:
        problems.append(f"mass elsewhere at N=1e4 is {rest:.3e}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 10:
        problems.append(f"runtime {elapsed:.1f} s")
    check_all(problems)


@pytest.mark.criterion(5, "tie at p1=1/2, nu=5: exact identity, Stirling bound, both copies share the mass")
def test_tie_case():
    problems = []
    study = run_tie_study(5, [10, 100, 1000], mode="exact")
    for row in study.rows:
        t = row.tie
        if (t.w_less - t.w_greater) != (t.t_less - t.t_greater):
            problems.append(f"identity at N={row.n}")
        if PhiGrid(5).phi(t.k_less) != Fraction(2, 5):
            problems.append("k_less is not the 0.4 bin")
    k_less = find_k_prime(Fraction(1, 2), PhiGrid(5))[0]
    for n in range(2, 10**4 + 1, 2):
        w = closed_form_weights(n, 5, 0.5).weights[k_less]
        if abs(w - 0.5) > central_term_asymptotic(n) + 1e-6:
            problems.append(f"|W(0.4)-1/2| at N={n} is {abs(w - 0.5):.3e}")
    last = closed_form_weights(10**4, 5, 0.5)
    total = sum(last.weights[k] for k in find_k_prime(Fraction(1, 2), PhiGrid(5)))
    if total < 1 - 1e-6:
        problems.append(f"W(0.4)+W(0.6) at N=1e4 is {total}")
    check_all(problems)


@pytest.mark.criterion(6, "p1=0.3, eps=0.05: tail strictly decreasing, below 1e-10 at N=1e4")
def test_lln_decay():
    rows = run_lln_study(0.3, [Fraction(1, 20)], [100, 1000, 10**4])
    tails = [r.tail for r in rows]
    problems = []
    if not all(b < a for a, b in zip(tails, tails[1:])):
        problems.append(f"not strictly decreasing: {tails}")
    if not tails[-1] <= 1e-10:
        problems.append(f"S at N=1e4 is {tails[-1]:.3e}")
    check_all(problems)


@pytest.mark.criterion(7, "count intervals agree with nearest-value quantization, N <= 200, nu <= 20")
def test_binning_consistency():
    problems = []
    for nu in range(1, 21):
        grid = PhiGrid(nu)
        for n in range(1, 201):
            for l in range(n + 1):
                k = freqmap.bin_of_count(l, n, grid)
                if k != freqmap.quantize(Fraction(l, n), grid):
                    problems.append(f"N={n} nu={nu} l={l}")
                elif l not in freqmap.bin_range(k, n, grid):
                    problems.append(f"interval of N={n} nu={nu} misses l={l}")
    check_all(problems[:10])


@pytest.mark.criterion(8, "weights unchanged by the alternative copy-unitary completion, within 1e-12")
def test_completion_independence(oracle_reports):
    reports, _ = oracle_reports
    problems = []
    for r in reports:
        checks = [c for c in r.checks if c.name.startswith("completion_independent")]
        if len(checks) != 1:
            problems.append(f"{r.params} missing completion check")
        problems += [f"{r.params} {c.deviation:.2e}" for c in checks if c.deviation > 1e-12]
    check_all(problems)


@pytest.mark.criterion(9, "a corrupted total unitary makes verify exit nonzero")
def test_negative_control(tmp_path):
    code = main(["verify", "--max-n", "2", "--max-nu", "2", "--trials", "1", "--seed", "42",
                 "--corrupt", "1e-3", "--out", str(tmp_path / "bad.csv")])
    assert code != 0
    clean = main(["verify", "--max-n", "2", "--max-nu", "2", "--trials", "1", "--seed", "42",
                  "--out", str(tmp_path / "good.csv")])
    assert clean == 0
