import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from protorwalk.limit import (INTERIOR, NEW_INF, NEW_SUP, GridSpec, brownian_path, dpbm_marginals,
                              dpbm_sample, fixed_point_solve, one_sided_limit_marginals,
                              one_sided_limit_sample, sample_bm_with_max, solve_dpbm)
from protorwalk.params import WalkParams, derive_perturbation
from protorwalk.stats import ks_two_sample

coef = st.floats(-3.0, 0.95)


def _normal_sf(x):
    return 0.5 * math.erfc(x / math.sqrt(2))


def test_grid_spec():
    g = GridSpec(1.0, 100)
    assert g.dt == 0.01 and len(g.times) == 101
    assert g.index(0.5) == 50
    with pytest.raises(ValueError):
        g.index(0.505)
    with pytest.raises(ValueError):
        GridSpec(1.0, 0)


def test_brownian_increments_have_grid_variance():
    g = GridSpec(2.0, 1000)
    paths = np.stack([brownian_path(g, s) for s in range(400)])
    assert (paths[:, 0] == 0).all()
    var = np.var(np.diff(paths, axis=1))
    assert var == pytest.approx(g.dt, rel=0.03)
    end = paths[:, -1]
    assert abs(end.var() - 2.0) < 4 * 2.0 * math.sqrt(2 / len(end))


@settings(max_examples=50)
@given(coef, coef, st.integers(0, 2**32))
def test_solver_satisfies_equation(a, b, seed):
    g = GridSpec(1.0, 2000)
    path = solve_dpbm(brownian_path(g, seed), a, b, g)
    assert path.residual(a, b) < 1e-12 * max(1.0, np.abs(path.solved).max())
    assert np.array_equal(path.sup, np.maximum.accumulate(path.solved))
    assert np.array_equal(path.inf, np.minimum.accumulate(path.solved))


@settings(max_examples=30)
@given(st.floats(-3.0, 0.95), st.integers(0, 2**32))
def test_one_sided_closed_form(a, seed):
    B = brownian_path(GridSpec(1.0, 5000), seed)
    path = solve_dpbm(B, a, 0.0)
    closed = B + a / (1 - a) * np.maximum.accumulate(B)
    assert np.max(np.abs(path.solved - closed)) < 1e-12 * max(1.0, np.abs(closed).max())


def test_fixed_point_agreement_on_100_paths():
    rng = np.random.default_rng(5)
    g = GridSpec(1.0, 2000)
    worst = 0.0
    for _ in range(100):
        a, b = rng.uniform(-0.45, 0.45, 2)
        B = brownian_path(g, rng)
        worst = max(worst, np.max(np.abs(solve_dpbm(B, a, b).solved - fixed_point_solve(B, a, b))))
    assert worst < 1e-10


def test_cases_are_exclusive_and_consistent():
    g = GridSpec(1.0, 5000)
    path = solve_dpbm(brownian_path(g, 3), 0.5, -0.7, g)
    c = path.cases[1:]
    assert set(np.unique(c)) <= {INTERIOR, NEW_SUP, NEW_INF}
    up = np.diff(path.sup) > 0
    down = np.diff(path.inf) < 0
    assert not (up & down).any()
    assert np.array_equal(up, c == NEW_SUP) and np.array_equal(down, c == NEW_INF)


def test_monotone_in_driving_path():
    g = GridSpec(1.0, 3000)
    B = brownian_path(g, 8)
    shift = np.linspace(0, 0.3, len(B))
    for a, b in ((0.6, 0.6), (0.3, -0.5)):
        assert (solve_dpbm(B + shift, a, b).solved >= solve_dpbm(B, a, b).solved - 1e-12).all()


def test_solver_rejects_coefficients_at_one():
    with pytest.raises(ValueError):
        solve_dpbm(np.zeros(3), 1.0, 0.0)
    with pytest.raises(ValueError):
        solve_dpbm(np.zeros(3), 0.0, 1.5)


def test_sampler_tail_and_support():
    x, m = sample_bm_with_max(1.0, 17, 1_000_000)
    assert (m >= np.maximum(0.0, x)).all()
    p0 = 2 * _normal_sf(1.0)
    frac = np.mean(m >= 1.0)
    assert abs(frac - p0) <= 3 * math.sqrt(p0 * (1 - p0) / m.size)


def test_sampler_moments_scale_with_time():
    t = 2.5
    x, m = sample_bm_with_max(t, 4, 400_000)
    assert abs(m.mean() - math.sqrt(2 * t / math.pi)) < 4 * m.std() / math.sqrt(m.size)
    assert abs(x.var() - t) < 0.02 * t


def test_sampler_matches_fine_grid_maximum():
    x, m = sample_bm_with_max(1.0, 9, 4000)
    g = GridSpec(1.0, 20_000)
    rng = np.random.default_rng(10)
    disc = np.array([brownian_path(g, rng).max() for _ in range(4000)])
    # Grid maxima are biased low by about 0.58 sqrt(dt); allow for it.
    r = ks_two_sample(m, disc, 0.01, slack=0.6 * math.sqrt(g.dt) * 1.0)
    assert r.passed, r


def test_symmetric_dpbm_median_is_zero():
    pert = derive_perturbation(WalkParams(0.75, 1.0, 1.0))
    X, S = dpbm_marginals(pert, [0.5, 1.0], 4000, 3, grid_steps=2000)
    for row in X:
        frac = np.mean(row > 0)
        assert abs(frac - 0.5) <= 3 * math.sqrt(0.25 / row.size)
    assert (S >= X - 1e-12).all() and (S >= 0).all()


def test_dpbm_marginals_match_direct_solver():
    pert = derive_perturbation(WalkParams(0.75, 1.0, 1.0))
    X, _ = dpbm_marginals(pert, [1.0], 3000, 1, grid_steps=1000)
    direct = dpbm_sample(pert, 1.0, 1000, 2, size=3000)
    assert ks_two_sample(X[0], direct, 0.01).passed


def test_one_sided_sampler_shape_and_scale():
    params = WalkParams(0.75, 1.0, 0.0)
    X, S = one_sided_limit_marginals(params, [0.25, 1.0], 1000, 4)
    assert X.shape == S.shape == (2, 1000)
    assert (S >= X - 1e-12).all()
    assert np.median(X[1]) > np.median(X[0]) > 0
    single = one_sided_limit_sample(params, 1.0, 0, 5)
    assert single.shape == (5,)
    with pytest.raises(ValueError):
        one_sided_limit_sample(WalkParams(0.75, 1.0, 0.5), 1.0, 0)


def test_one_sided_limit_equals_solver_with_b_zero():
    params = WalkParams(0.75, 1.0, 0.0)
    pert = derive_perturbation(params)
    exact, _ = one_sided_limit_marginals(params, [1.0], 4000, 11)
    grid, _ = dpbm_marginals(pert, [1.0], 4000, 12, grid_steps=4000)
    assert ks_two_sample(exact[0], grid[0], 0.01, slack=0.02).passed
