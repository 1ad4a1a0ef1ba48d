import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contagion_cds import closed_form as cf
from contagion_cds.model import FirmId, SymmetricCompetitorParams

# quadrature of the density over [1, inf) x [2, inf), cross-checked by 10^6-path MC
V1 = 0.6094647020649667
# quadrature over [2, inf) x [0, inf)
V2 = 0.8331240491393064

symmetric = st.builds(
    lambda b0, c0, fb, fc: SymmetricCompetitorParams(b0, c0, fb * b0, fc * c0),
    st.floats(0.01, 2.0),
    st.floats(0.01, 2.0),
    st.floats(0.0, 0.99),
    st.floats(0.0, 0.99),
)
times = st.floats(0.0, 30.0)


def test_origin_is_certain(p0):
    assert cf.joint_survival(p0, 0.0, 0.0) == 1.0


def test_diagonal_example(p0):
    assert cf.joint_survival(p0, 1.0, 1.0) == pytest.approx(math.exp(-0.3), abs=1e-15)
    assert cf.joint_survival(p0, 1.0, 1.0) == pytest.approx(0.7408182207, abs=1e-10)


def test_golden_joint_survival(p0):
    assert cf.joint_survival(p0, 1.0, 2.0) == pytest.approx(V1, abs=1e-10)


@pytest.mark.parametrize("t1, t2", [(1.0, 2.0), (0.3, 4.0), (3.0, 0.5), (2.5, 2.4)])
def test_factored_form_equals_printed_branches(p0, t1, t2):
    branch = 1 if t1 <= t2 else 2
    assert cf.joint_survival(p0, t1, t2) == pytest.approx(
        cf.joint_survival_branch(p0, t1, t2, branch), rel=1e-14
    )


def test_density_branch_two_example(p0):
    b, b0, c0 = 0.05, 0.1, 0.2
    expected = b * b0 * c0 * (1 + 1 / b - 1 / b0) * math.exp(-0.2 - 0.2)
    got = cf.joint_density(p0, 2.0, 1.0)
    assert got.value == pytest.approx(expected, rel=1e-14)
    assert not got.diagonal


def test_density_on_diagonal_is_flagged(p0):
    got = cf.joint_density(p0, 1.0, 1.0)
    assert got.diagonal
    assert got.value == pytest.approx(cf.diagonal_limits(p0, 1.0)[0], rel=1e-14)


def test_diagonal_one_sided_limits(p0):
    t = 1.3
    below, above = cf.diagonal_limits(p0, t)
    eps = 1e-9
    assert cf.joint_density(p0, t + eps, t).value == pytest.approx(below, rel=1e-7)
    assert cf.joint_density(p0, t, t + eps).value == pytest.approx(above, rel=1e-7)
    decay = math.exp(-0.3 * t)
    assert below == pytest.approx(0.2 * 0.05 * decay, rel=1e-14)
    assert above == pytest.approx(0.1 * 0.1 * decay, rel=1e-14)


def test_density_continuous_when_balanced():
    # c b0 == b c0
    p = SymmetricCompetitorParams(0.1, 0.2, 0.04, 0.08)
    below, above = cf.diagonal_limits(p, 2.0)
    assert below == pytest.approx(above, rel=1e-14)


def test_density_matches_finite_difference(p0):
    h = 1e-4
    s = lambda a, b: cf.joint_survival(p0, a, b)  # noqa: E731
    fd = (s(1.5 + h, 0.5 + h) - s(1.5 + h, 0.5 - h) - s(1.5 - h, 0.5 + h) + s(1.5 - h, 0.5 - h)) / (
        4 * h * h
    )
    assert cf.joint_density(p0, 1.5, 0.5).value == pytest.approx(fd, rel=1e-5)


def test_marginal_examples(p0):
    assert cf.marginal_survival(p0, FirmId.B, 0.0) == 1.0
    indep = SymmetricCompetitorParams(0.1, 0.2, 0.0, 0.1)
    assert cf.marginal_survival(indep, FirmId.B, 3.0) == pytest.approx(0.7408182207, abs=1e-10)
    assert cf.marginal_survival(p0, FirmId.B, 2.0) == pytest.approx(V2, abs=1e-10)


def test_marginal_matches_printed_formulas(p0):
    b0, c0, b, c = 0.1, 0.2, 0.05, 0.1
    for t in (0.5, 2.0, 7.0):
        eq_b = math.exp(-b0 * t) + b / c0 * math.exp(-b0 * t) * (math.exp(-c0 * t) - 1 + c0 * t)
        eq_c = math.exp(-c0 * t) + c / b0 * math.exp(-c0 * t) * (math.exp(-b0 * t) - 1 + b0 * t)
        assert cf.marginal_survival(p0, FirmId.B, t) == pytest.approx(eq_b, rel=1e-13)
        assert cf.marginal_survival(p0, FirmId.C, t) == pytest.approx(eq_c, rel=1e-13)


def test_increment_examples(p0):
    assert cf.survival_increment_and_bound(p0, FirmId.B, 0.0) == (0.0, 0.0)
    inc, bound = cf.survival_increment_and_bound(p0, FirmId.B, 2.0)
    assert inc == pytest.approx(0.25 * math.exp(-0.2) * (math.exp(-0.4) - 1 + 0.4), rel=1e-13)
    assert bound == pytest.approx(0.5 * 0.05 * 0.2 * 4 * math.exp(-0.2), rel=1e-14)


def test_increment_is_marginal_excess(p0):
    for firm, own in ((FirmId.B, 0.1), (FirmId.C, 0.2)):
        inc, _ = cf.survival_increment_and_bound(p0, firm, 3.0)
        assert cf.marginal_survival(p0, firm, 3.0) - math.exp(-own * 3.0) == pytest.approx(
            inc, rel=1e-12
        )


def test_independent_examples():
    assert cf.independent_joint_survival(0.1, 0.2, 0.0, 0.0) == 1.0
    assert cf.independent_joint_survival(0.1, 0.2, 1.0, 1.0) == pytest.approx(math.exp(-0.3))
    tiny = SymmetricCompetitorParams(0.1, 0.2, 1e-8, 1e-8)
    for t1, t2 in ((0.5, 3.0), (4.0, 1.0), (2.0, 2.0)):
        assert cf.joint_survival(tiny, t1, t2) == pytest.approx(
            cf.independent_joint_survival(0.1, 0.2, t1, t2), abs=1e-6
        )


def test_excess_exp_series_and_direct_agree_at_cutoff():
    x = cf.SERIES_CUTOFF
    assert cf.excess_exp(x * (1 - 1e-12)) == pytest.approx(math.expm1(-x) + x, rel=1e-12)
    assert cf.excess_exp(1e-8) == pytest.approx(5e-17, rel=1e-7)


def test_negative_times_rejected(p0):
    with pytest.raises(ValueError):
        cf.joint_survival(p0, -0.1, 1.0)
    with pytest.raises(ValueError):
        cf.marginal_survival(p0, FirmId.C, -1.0)
    with pytest.raises(ValueError):
        cf.survival_increment_and_bound(p0, FirmId.B, -1.0)


def test_beyond_horizon_warns(p0):
    with pytest.warns(cf.HorizonWarning):
        cf.joint_survival(p0, 6.0, 1.0, horizon=5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cf.joint_survival(p0, 5.0, 1.0, horizon=5.0)


@given(symmetric, times)
def test_diagonal_identity(params, t):
    expected = math.exp(-(params.base_b + params.base_c) * t)
    assert abs(cf.joint_survival(params, t, t) - expected) < 1e-13


@given(symmetric.filter(lambda p: p.atten_b > 1e-6 and p.atten_c > 1e-6), times)
def test_branch_continuity(params, t):
    one = cf.joint_survival_branch(params, t, t, 1)
    two = cf.joint_survival_branch(params, t, t, 2)
    assert abs(one - two) < 1e-12


@given(symmetric, times)
def test_marginal_consistency(params, t):
    assert cf.joint_survival(params, t, 0.0) == cf.marginal_survival(params, FirmId.B, t)
    assert cf.joint_survival(params, 0.0, t) == cf.marginal_survival(params, FirmId.C, t)


@given(symmetric)
def test_monotone_in_each_argument(params):
    grid = np.linspace(0.0, 20.0, 41)
    surface = np.array([[cf.joint_survival(params, a, b) for b in grid] for a in grid])
    assert np.all(np.diff(surface, axis=0) <= 1e-15)
    assert np.all(np.diff(surface, axis=1) <= 1e-15)
    assert np.all((surface >= 0) & (surface <= 1))


@given(symmetric, times, times)
def test_density_positive(params, t1, t2):
    assert cf.joint_density(params, t1, t2).value > 0


@given(symmetric, times)
def test_diagonal_jump_size(params, t):
    below, above = cf.diagonal_limits(params, t)
    b0, c0, b, c = params.base_b, params.base_c, params.atten_b, params.atten_c
    gap = abs(c0 * (b0 - b) - b0 * (c0 - c)) * math.exp(-(b0 + c0) * t)
    assert abs(below - above) == pytest.approx(gap, abs=1e-14 * (below + above))


@given(symmetric, times, st.sampled_from(list(FirmId)))
def test_increment_bounded(params, t, firm):
    inc, bound = cf.survival_increment_and_bound(params, firm, t)
    assert 0.0 <= inc <= bound


@given(st.floats(0.0, 50.0))
def test_excess_ratio_in_unit_interval(x):
    r = cf.excess_exp_ratio(x)
    assert 0.0 < r <= 1.0
    if x > 0:
        assert r * x * x / 2 == pytest.approx(cf.excess_exp(x), rel=1e-12)
