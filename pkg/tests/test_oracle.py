from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from everett import oracle
from everett.scenario import Scenario, build_total_U
from everett.weights import closed_form_weights


def test_full_tensor_single_system():
    t = oracle.full_tensor_weights(Scenario.from_p1(1, 1, 0.3))
    assert np.allclose(t.weights, [0, 0.7, 0.3], atol=1e-14, rtol=0)


def test_full_tensor_two_systems():
    t = oracle.full_tensor_weights(Scenario.from_p1(2, 2, 0.5))
    assert np.allclose(t.weights, [0, 0.25, 0.5, 0.25], atol=1e-14, rtol=0)


def test_enumeration_four_systems():
    t = oracle.enumerate_outcome_weights(4, 2, 0.3)
    assert np.allclose(t.weights, [0, 0.6517, 0.3402, 0.0081], atol=1e-14, rtol=0)
    e = oracle.enumerate_outcome_weights(4, 2, "3/10", "exact")
    assert e.weights == closed_form_weights(4, 2, "3/10", "exact").weights


def test_enumeration_certain_failure():
    t = oracle.enumerate_outcome_weights(6, 3, 0)
    assert t.weights[1] == 1 and sum(t.weights) == 1


def test_enumeration_size_limit():
    with pytest.raises(ValueError):
        oracle.enumerate_outcome_weights(oracle.MAX_ENUMERATION_N + 1, 2, 0.5)


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 20), st.integers(1, 10), st.floats(0, 1))
def test_enumeration_matches_closed_form(n, nu, p1):
    a = oracle.enumerate_outcome_weights(n, nu, p1)
    b = closed_form_weights(n, nu, p1)
    assert max(abs(x - y) for x, y in zip(a.weights, b.weights)) <= 1e-12


def test_verify_small_scenario_passes():
    rep = oracle.verify_scenario(Scenario.from_p1(1, 1, 0.3))
    assert rep.passed, rep.to_text()
    assert all(c.deviation <= 1e-12 for c in rep.checks)
    assert all(c.deviation >= 0 for c in rep.checks)


def test_verify_largest_scenario_passes():
    rep = oracle.verify_scenario(Scenario.random(3, 3, np.random.default_rng(7)))
    assert rep.passed, rep.to_text()


def test_corrupted_unitary_fails():
    scen = Scenario.from_p1(1, 2, 0.4)
    bad = oracle.corrupt(build_total_U(scen), 1e-3)
    rep = oracle.verify_scenario(scen, bad)
    assert not rep.passed
    names = {c.name for c in rep.failures()}
    assert "unitary_U" in names


def test_report_csv():
    rep = oracle.verify_scenario(Scenario.from_p1(1, 1, Fraction(1, 4)))
    text = rep.to_csv()
    lines = text.splitlines()
    assert lines[0] == "check_name,deviation,pass"
    assert all(line.endswith(",true") for line in lines[1:])
    assert len(lines) == len(rep.checks) + 1


def test_random_scenarios_deterministic():
    a = oracle.random_scenarios(2, 2, 3, seed=5)
    b = oracle.random_scenarios(2, 2, 3, seed=5)
    assert len(a) == 12 and a == b
