import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobisums import characters as ch
from jacobisums.charsums import gauss_all, jacobi_via_gauss, moments
from jacobisums.equidist import (BOUND_COLUMNS, ET_CONSTANTS, AngleSet, DiscMethod,
                                 angles_from_subsets, bound_e0_rhs, bound_e1_rhs,
                                 bound_eM1_rhs, bound_eM2_rhs, bound_report, choose_K_e0,
                                 choose_K_e1, choose_s, discrepancy_exact, erdos_turan_rhs,
                                 fitted_constant, weyl_moments)
from jacobisums.errors import DomainError, SOutOfRange
from jacobisums.field import build_field

# independent evaluations with mpmath at 30 digits
E0_TERM1_Q101 = 0.463389765542633307825   # 101 ** (-1/6)
E0_TERM2_Q101 = 0.459221655155819964839   # log(101) / sqrt(101)
EM2_Q101_A10 = 100.498756211208902702     # sqrt(10 * 10 * 101)


def mesh_discrepancy(x, M=10_000, delta=1e-9):
    """sup |count/N - length| over arcs with endpoints on a mesh plus data points +- delta."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    cand = np.unique(np.concatenate([np.arange(M) / M, x, (x - delta) % 1.0, (x + delta) % 1.0]))
    ext = np.concatenate([x, x + 1.0])
    best = 0.0
    for a in cand:
        b = a + np.concatenate([[0.0], np.sort((cand - a) % 1.0)[1:], [1.0]])
        # closed arcs [a, b] and open arcs (a, b)
        closed = np.searchsorted(ext, b, "right") - np.searchsorted(ext, a, "left")
        opened = np.searchsorted(ext, b, "left") - np.searchsorted(ext, a, "right")
        length = b - a
        closed = np.minimum(closed, n)
        best = max(best, float(np.max(np.abs(closed / n - length))),
                   float(np.max(np.abs(opened / n - length))))
    return best


def test_angles_match_jacobi_quotients_in_enumeration_order():
    gt = gauss_all(build_field(3, 3))
    a1 = ch.random_subset(27, 9, 1)
    a2 = ch.random_subset(27, 11, 2)
    tail = ch.random_tail(27, 4, 3, 3)
    got = angles_from_subsets(gt, a1, a2, tail, chunk=40)
    tuples = list(ch.enumerate_a_circle(a1, a2, tail))
    assert len(got) == len(tuples)
    want = np.array([jacobi_via_gauss(gt, t).angle for t in tuples])
    diff = (got.thetas - want + 0.5) % 1.0 - 0.5
    assert np.max(np.abs(diff)) <= 1e-12
    assert np.all((got.thetas >= 0) & (got.thetas < 1))
    assert not got.is_empty_convention


def test_angles_empty_sets_convention():
    gt = gauss_all(build_field(11))
    got = angles_from_subsets(gt, ch.explicit_subset(11, [1]), ch.explicit_subset(11, [9]),
                              ch.empty_tail())
    assert got.is_empty_convention and len(got) == 0
    rep = discrepancy_exact(got)
    assert rep.d_exact == 1.0 and rep.method is DiscMethod.CONVENTION


def test_discrepancy_examples():
    assert discrepancy_exact(np.array([0.0])).d_exact == 1.0
    assert discrepancy_exact(np.array([0.37])).d_exact == 1.0
    for n in (2, 4, 8, 64):
        x = np.arange(n) / n
        for method in ("quadratic", "sorted"):
            assert abs(discrepancy_exact(x, method=method).d_exact - 1 / n) <= 1e-12
    assert discrepancy_exact(np.array([]), method="sorted").d_exact == 1.0
    with pytest.raises(ValueError):
        discrepancy_exact(np.array([0.1]), method="bogus")


def test_discrepancy_all_points_coincide():
    rep = discrepancy_exact(np.full(7, 0.25))
    assert rep.d_exact == 1.0


@pytest.mark.parametrize("seed", range(8))
def test_discrepancy_matches_mesh_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 40))
    x = rng.random(n)
    if seed % 2:
        x = np.round(x * 8) / 8 % 1.0  # ties
    want = mesh_discrepancy(x, M=2000)
    for method in ("quadratic", "sorted"):
        got = discrepancy_exact(x, method=method).d_exact
        assert want - 1e-8 <= got <= want + 2 / 2000 + 1e-8


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=120))
def test_quadratic_equals_sorted_and_star_bracket(xs):
    x = np.array(xs)
    rq = discrepancy_exact(x, method="quadratic")
    rs = discrepancy_exact(x, method="sorted")
    assert abs(rq.d_exact - rs.d_exact) <= 1e-12
    assert rq.d_star <= rq.d_exact + 1e-12
    assert rq.d_exact <= 2 * rq.d_star + 1e-12
    assert 0 <= rq.d_exact <= 1


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=60))
def test_discrepancy_invariant_under_duplication_and_rotation(xs):
    x = np.array(xs)
    d = discrepancy_exact(x).d_exact
    assert abs(discrepancy_exact(np.concatenate([x, x])).d_exact - d) <= 1e-12
    shifted = (x + 0.3125) % 1.0
    assert abs(discrepancy_exact(shifted).d_exact - d) <= 1e-9


def test_auto_method_and_star_fallback():
    x = np.random.default_rng(0).random(50)
    assert discrepancy_exact(x, exact_cap=100).method is DiscMethod.EXACT_QUADRATIC
    assert discrepancy_exact(x, exact_cap=10).method is DiscMethod.EXACT_SORTED
    star = discrepancy_exact(x, method="star")
    assert star.method is DiscMethod.STAR_ONLY and star.d_exact == min(1.0, 2 * star.d_star)


def test_overwrite_sorts_in_place():
    x = np.array([0.5, 0.1, 0.9])
    discrepancy_exact(AngleSet(x), overwrite=True)
    assert list(x) == [0.1, 0.5, 0.9]


def test_weyl_moments():
    x = np.arange(8) / 8
    m = weyl_moments(x, [1, 7, 8, 16])
    assert np.allclose(m[:2], 0, atol=1e-12)
    assert np.allclose(m[2:], 8)


def test_erdos_turan_examples():
    assert erdos_turan_rhs([0, 0, 0], 10, 3) == pytest.approx(1 / 3)
    assert erdos_turan_rhs([5], 5, 1) == pytest.approx(sum(ET_CONSTANTS))
    assert erdos_turan_rhs([1j, 2], 4, 2, (2.0, 1.0)) == pytest.approx(1 + (1 + 1) / 4)
    with pytest.raises(ValueError):
        erdos_turan_rhs([1], 1, 0)
    with pytest.raises(ValueError):
        erdos_turan_rhs([1], 0, 1)
    with pytest.raises(ValueError):
        erdos_turan_rhs([1], 3, 2)


def test_erdos_turan_equally_spaced():
    n = 32
    x = np.arange(n) / n
    moms = weyl_moments(x, range(1, n))
    for K in range(1, n):
        assert discrepancy_exact(x).d_exact <= erdos_turan_rhs(moms, n, K) + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=100))
def test_erdos_turan_holds_with_default_constants(xs):
    x = np.array(xs)
    d = discrepancy_exact(x).d_exact
    moms = weyl_moments(x, range(1, 65))
    for K in (1, 2, 5, 16, 64):
        assert d <= erdos_turan_rhs(moms, x.size, K) * (1 + 1e-12)


def test_bound_e0_e1_values():
    assert bound_e0_rhs(101, 101, 101, 1) == pytest.approx(E0_TERM1_Q101 + E0_TERM2_Q101, rel=1e-14)
    assert bound_e0_rhs(101, 101, 101, 1, c=2.0) == pytest.approx(2 * (E0_TERM1_Q101 + E0_TERM2_Q101))
    assert bound_e1_rhs(100, 10, 10, 3.5) == pytest.approx(3.5)
    assert bound_e1_rhs(1009, 4, 10) > bound_e1_rhs(1009, 5, 10) > bound_e1_rhs(1009, 5, 11)
    with pytest.raises(ValueError):
        bound_e1_rhs(2, 1, 1)


def test_bound_moment_values():
    assert bound_eM2_rhs(101, 10, 10, 1, 1) == pytest.approx(EM2_Q101_A10, rel=1e-14)
    assert bound_eM2_rhs(101, 10, 10, 3, 2) == pytest.approx(6 * EM2_Q101_A10, rel=1e-14)
    q, a1, a2, b, n = 1009, 40, 70, 2, 3
    s1 = math.sqrt(a1) * math.sqrt(a2 * q + a2**2 * (n * math.sqrt(q) + 1)) * b
    assert bound_eM1_rhs(q, a1, a2, b, 1, n) == pytest.approx(s1, rel=1e-13)
    s3 = a1 ** (5 / 6) * (6 * a2**3 * q + 3 * a2**6 * (n * math.sqrt(q) + 1)) ** (1 / 6) * b
    assert bound_eM1_rhs(q, a1, a2, b, 3, n) == pytest.approx(s3, rel=1e-13)
    # large s stays finite in log space
    assert math.isfinite(bound_eM1_rhs(10**6, 10**6, 10**6, 1, 20, 8))
    with pytest.raises(SOutOfRange):
        bound_eM1_rhs(101, 1, 1, 1, 21, 1)


def test_choose_s_and_K():
    assert choose_s(10**6, 0.5) == 2
    assert choose_s(101, 0.5) == 1
    with pytest.raises(DomainError):
        choose_s(101, 0.6)
    with pytest.raises(DomainError):
        choose_s(101, 0.0)
    with pytest.raises(DomainError):
        choose_s(2, 0.5)
    assert choose_K_e1(101, 16, 101) == pytest.approx(2.0)
    assert choose_K_e1(101, 1, 1) == 1.0
    assert choose_K_e0(101, 5, 1) == 1.0
    assert choose_K_e0(10**4, 10**4, 1) == pytest.approx(100 ** (1 / 3))


def test_fitted_constant():
    assert fitted_constant([1, 2, 3], [2, 2, 2]) == 1.5
    assert math.isnan(fitted_constant([], []))


def test_bound_report_rows():
    gt = gauss_all(build_field(101))
    a1 = ch.random_subset(101, 11, 1)
    a2 = ch.random_subset(101, 11, 2)
    rep = bound_report(gt, a1, a2, ch.empty_tail(), 2, 4)
    rows = rep.rows()
    assert [r["bound"] for r in rows[:3]] == ["e0", "e1", "ET"]
    assert len(rows) == 3 + 2 * 4
    assert all(tuple(r) == BOUND_COLUMNS for r in rows)
    assert all(r["rhs"] >= 0 for r in rows)
    moms, count = moments(gt, a1, a2, ch.empty_tail(), range(1, 5))
    assert rep.count == count
    assert rep.d_exact <= rep.et_rhs
    for r in rows[3:]:
        assert r["measured"] <= r["rhs"]
    assert rep.to_dict()["moments"][0] == [moms[0].real, moms[0].imag]
