import math

import pytest
from hypothesis import given, strategies as st

from protorwalk.params import WalkParams, derive_perturbation, one_sided_lambda

probs = st.floats(0.0, 1.0)
open_p = st.floats(1e-6, 1 - 1e-6)


def test_one_sided_example():
    pert = derive_perturbation(WalkParams(0.75, 1.0, 0.0))
    assert pert.a == pytest.approx(2 / 3)
    assert pert.b == 0.0
    assert pert.lam == pytest.approx(2.0)
    assert pert.scale == pytest.approx(math.sqrt(1 / 3))


def test_negative_perturbation_example():
    pert = derive_perturbation(WalkParams(0.25, 1.0, 1.0))
    assert pert.a == pytest.approx(-2.0)
    assert pert.b == pytest.approx(-2.0)
    assert pert.lam is None


@pytest.mark.parametrize("p,alpha,beta", [(0.0, 0.5, 0.5), (1.0, 0.5, 0.5), (-0.1, 0, 0),
                                          (0.5, 1.5, 0), (0.5, 0, -0.2), (float("nan"), 0, 0)])
def test_invalid_params_rejected(p, alpha, beta):
    with pytest.raises(ValueError):
        WalkParams(p, alpha, beta)


def test_degenerate_params_need_opt_in():
    wp = WalkParams(1.0, 1.0, 1.0, allow_degenerate=True)
    with pytest.raises(ValueError):
        derive_perturbation(wp)


@given(open_p, probs, probs)
def test_perturbation_below_one_and_same_sign(p, alpha, beta):
    pert = derive_perturbation(WalkParams(p, alpha, beta))
    assert pert.a < 1 and pert.b < 1
    assert pert.a * pert.b >= 0


@given(open_p, probs, probs)
def test_zero_iff_balanced_or_native(p, alpha, beta):
    pert = derive_perturbation(WalkParams(p, alpha, beta))
    both_zero = pert.a == 0 and pert.b == 0
    assert both_zero == (2 * p - 1 == 0 or (alpha == 0 and beta == 0))


@given(open_p, probs)
def test_lambda_matches_independent_closed_form(p, alpha):
    pert = derive_perturbation(WalkParams(p, alpha, 0.0))
    assert pert.lam == pytest.approx(one_sided_lambda(p, alpha), rel=1e-9, abs=1e-9)


@given(open_p, probs, probs)
def test_corrected_constant_dominates_and_agrees_when_nonnegative(p, alpha, beta):
    pert = derive_perturbation(WalkParams(p, alpha, beta))
    assert pert.corrected_bound_constant >= 1.0 - 1e-12 * (1 + abs(pert.a) + abs(pert.b))
    if pert.a >= 0 and pert.b >= 0:
        assert pert.corrected_bound_constant == pytest.approx(
            max(1 / (1 - pert.a), 1 / (1 - pert.b)))
