from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from everett.freqmap import PhiGrid, bin_of_count, bin_range, quantize, quantize_tilde, rel_freq


def test_grid_values():
    assert PhiGrid(1).values == (Fraction(-1), Fraction(0), Fraction(1))
    g = PhiGrid(4)
    assert g.n_bins == 6
    assert g.phi(0) == Fraction(-1, 4) and g.phi(5) == 1
    assert g.half_width == Fraction(1, 8)
    with pytest.raises(ValueError):
        PhiGrid(0)


@pytest.mark.parametrize("s, f", [([1, 1, 1], 1), ([2, 2], 0), ([1, 2, 1, 2], Fraction(1, 2))])
def test_rel_freq(s, f):
    assert rel_freq(s) == f


def test_rel_freq_rejects_ignorance():
    with pytest.raises(ValueError):
        rel_freq([1, 0])
    with pytest.raises(ValueError):
        rel_freq([])


def test_quantize_examples():
    assert quantize(Fraction(1, 4), PhiGrid(2)) == 1
    assert quantize(Fraction(31, 100), PhiGrid(10)) == 4
    assert quantize(1, PhiGrid(1)) == 2
    with pytest.raises(ValueError):
        quantize(Fraction(3, 2), PhiGrid(2))


def test_quantize_tilde_examples():
    for nu in (1, 2, 7):
        assert quantize_tilde([0, 1], PhiGrid(nu)) == 0
    assert quantize_tilde([1, 2], PhiGrid(2)) == 2
    assert quantize_tilde([1], PhiGrid(1)) == 2


def test_bin_of_count_examples():
    assert bin_of_count(1, 4, PhiGrid(2)) == 1
    assert bin_of_count(2, 4, PhiGrid(2)) == 2
    g = PhiGrid(5)
    assert g.phi(bin_of_count(5, 10, g)) == Fraction(2, 5)
    with pytest.raises(ValueError):
        bin_of_count(5, 4, g)


def test_bin_range_partitions_counts():
    for n in range(1, 80):
        for nu in range(1, 12):
            g = PhiGrid(nu)
            seen = [l for k in range(g.n_bins) for l in bin_range(k, n, g)]
            assert seen == list(range(n + 1))
            for k in range(1, g.n_bins):
                assert all(bin_of_count(l, n, g) == k for l in bin_range(k, n, g))


@given(st.integers(1, 200), st.integers(1, 20), st.data())
def test_bin_of_count_matches_quantize(n, nu, data):
    l = data.draw(st.integers(0, n))
    g = PhiGrid(nu)
    k = bin_of_count(l, n, g)
    assert 1 <= k <= nu + 1
    assert k == quantize(Fraction(l, n), g)


@given(st.integers(1, 20), st.fractions(0, 1), st.fractions(0, 1))
def test_quantize_monotone(nu, a, b):
    lo, hi = sorted((a, b))
    g = PhiGrid(nu)
    assert quantize(lo, g) <= quantize(hi, g)


@given(st.lists(st.sampled_from([0, 1, 2]), min_size=1, max_size=12), st.integers(1, 10))
def test_quantize_tilde_zero_iff_ignorant(s, nu):
    assert (quantize_tilde(s, PhiGrid(nu)) == 0) == (0 in s)
