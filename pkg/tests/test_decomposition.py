import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from protorwalk.decomposition import (SiteKind, bound_grid, classify_site,
                                      compensator_closed_form, conditional_drift, decompose,
                                      extrema_identities, martingale_residual,
                                      max_diff_bound_check, max_diff_inequality_check,
                                      quadratic_variation_formula, quadratic_variation_ratio,
                                      reconstruct_from_extrema, theta_map, theta_residual,
                                      verification_report, verify_c_identity,
                                      verify_extrema_identities)
from protorwalk.params import WalkParams, derive_perturbation
from protorwalk.rng import trajectory_seed
from protorwalk.walk import run_walk, run_walk_streaming

GRID = [(p, a, b) for p in (0.1, 0.25, 0.5, 0.75, 0.9) for a in (0.0, 0.5, 1.0)
        for b in (0.0, 0.5, 1.0)]
param_sets = st.sampled_from(GRID)


def _drift_oracle(traj):
    """Step-by-step conditional drifts from StepRecords, independent of the vectorised path."""
    out = []
    M = m = 0
    for rec in traj.steps:
        kind = classify_site(rec.index, rec.position, M, m, rec.fresh)
        out.append(conditional_drift(traj.params, kind,
                                     rec.rotor_before if kind is SiteKind.VISITED else None))
        M, m = max(M, rec.position), min(m, rec.position)
    return np.array(out)


def _c_oracle(traj, n):
    x, M, m = traj.positions, traj.running_max, traj.running_min
    total = m[n - 1] + M[n - 1]
    for k in range(1, n):
        if m[k - 1] <= x[k] <= M[k - 1]:
            total += x[k] - x[k - 1]
    return total


def test_drift_examples():
    assert conditional_drift(WalkParams(0.75, 0.5, 0.5), SiteKind.VISITED, 1) == pytest.approx(0.5)
    for p in (0.1, 0.6, 0.9):
        assert conditional_drift(WalkParams(p, 0.5, 0.3), SiteKind.NEW_MAX) == 0.0
    assert conditional_drift(WalkParams(0.25, 0.5, 1.0), SiteKind.NEW_MIN) == pytest.approx(0.5)
    assert conditional_drift(WalkParams(0.25, 0.5, 1.0), SiteKind.ORIGIN) == 0.0


def test_inconsistent_context_rejected():
    with pytest.raises(ValueError):
        classify_site(5, 0, 3, -3, fresh=True)
    with pytest.raises(ValueError):
        classify_site(5, 4, 3, -3, fresh=False)
    with pytest.raises(ValueError):
        conditional_drift(WalkParams(0.5, 0, 0), SiteKind.VISITED)


def test_streaming_summary_rejected():
    s = run_walk_streaming(WalkParams(0.5, 0, 0), 10, 0)
    with pytest.raises(TypeError):
        decompose(s)


def test_balanced_coin_has_no_compensator():
    traj = run_walk(WalkParams(0.5, 1.0, 0.0), 5000, seed=1)
    rec = decompose(traj)
    assert (rec.Z == 0).all()
    assert np.array_equal(rec.Y, traj.positions.astype(float))
    assert all(compensator_closed_form(traj, traj.params, n) == 0 for n in (1, 10, 5000))


@settings(max_examples=40)
@given(param_sets, st.integers(0, 2**32))
def test_drift_matches_stepwise_oracle(ps, seed):
    traj = run_walk(WalkParams(*ps), 1500, seed)
    rec = decompose(traj)
    assert np.array_equal(rec.drift, _drift_oracle(traj))
    assert (np.abs(rec.xi) <= 2).all()


def test_compensator_closed_form_against_summed_drifts():
    worst = 0.0
    for i in range(100):
        traj = run_walk(WalkParams(*GRID[i % len(GRID)]), 10_000, trajectory_seed(31, i))
        Z = np.cumsum(_drift_oracle(traj))
        closed = [compensator_closed_form(traj, traj.params, n) for n in range(1, 10_001)]
        worst = max(worst, float(np.max(np.abs(np.array(closed) - Z))))
    assert worst < 1e-9


def test_compensator_rejects_n_zero():
    traj = run_walk(WalkParams(0.75, 1, 0), 10, 0)
    with pytest.raises(ValueError):
        compensator_closed_form(traj, traj.params, 0)
    with pytest.raises(ValueError):
        compensator_closed_form(traj, traj.params, 11)
    assert compensator_closed_form(traj, traj.params, 1) == 0.0


@settings(max_examples=30)
@given(param_sets, st.integers(0, 2**32))
def test_c_identity_matches_definition(ps, seed):
    traj = run_walk(WalkParams(*ps), 300, seed)
    rec = decompose(traj)
    for n in range(1, traj.n_steps + 1):
        assert rec.C[n] == _c_oracle(traj, n) == traj.positions[n - 1]
    assert verify_c_identity(traj) == 0


def test_c_identity_straight_path():
    traj = run_walk(WalkParams(1.0, 1.0, 1.0, allow_degenerate=True), 20, 0, {0: 1})
    assert verify_c_identity(traj) == 0
    assert traj.positions[:-1].tolist() == list(range(20))


@settings(max_examples=40)
@given(param_sets, st.integers(0, 2**32))
def test_exact_identities(ps, seed):
    traj = run_walk(WalkParams(*ps), 3001, seed)
    rec = decompose(traj)
    pert = derive_perturbation(traj.params)
    assert martingale_residual(traj, rec) < 1e-9
    assert reconstruct_from_extrema(rec, traj, pert) < 1e-9
    assert theta_residual(rec, traj, pert) < 1e-9
    emax, emin = verify_extrema_identities(rec, traj, pert)
    assert emax < 1e-9 and emin < 1e-9


def test_extrema_helpers_track_scaled_extrema():
    traj = run_walk(WalkParams(0.75, 0.5, 0.5), 2001, seed=4)
    rec = decompose(traj)
    pert = derive_perturbation(traj.params)
    ext = extrema_identities(rec, traj, pert)
    N = len(ext.g)
    assert np.allclose(ext.g, (1 - pert.b) * traj.running_min[:N], atol=1e-9)
    assert np.allclose(ext.G, (1 - pert.a) * traj.running_max[:N], atol=1e-9)


def test_theta_examples():
    assert theta_map([0, 1, 2], 0.5, 0.0).tolist() == [0.0, 0.5, 1.0]
    assert theta_map([0, -1, -2], 0.0, 0.5).tolist() == [0.0, -0.5, -1.0]
    h = np.array([0.0, 1.0, -1.0, 0.5])
    assert np.array_equal(theta_map(h, 0.0, 0.0), h)


def test_horizon_beyond_w_rejected():
    traj = run_walk(WalkParams(0.75, 1, 1), 100, 0)
    rec = decompose(traj)
    with pytest.raises(ValueError):
        theta_residual(rec, traj, horizon=100)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60), st.data())
def test_max_difference_inequality(xs, data):
    j = data.draw(st.integers(0, len(xs) - 1))
    n = data.draw(st.integers(0, len(xs) - 1 - j))
    assert max_diff_inequality_check(xs, n, j)


def test_max_difference_inequality_is_not_vacuous():
    # The reversed inequality fails: a drop after time j is invisible on the left.
    x = [0.0, 5.0, 1.0, 3.0]
    assert max_diff_inequality_check(x, 2, 1)
    lhs = max(x[:4]) - max(x[:2])
    assert lhs == 0.0 < max(v - x[2] for v in x[2:4])


def test_bound_grid_shape():
    g = bound_grid(10_000)
    assert (0, 1) in g and (9000, 1000) in g and (5000, 100) in g
    assert all(j + n <= 10_000 for j, n in g)
    assert len(g) == 30


@settings(max_examples=30)
@given(st.sampled_from([ps for ps in GRID if ps[0] >= 0.5]), st.integers(0, 2**32))
def test_max_diff_bound_with_textbook_constant_when_nonnegative(ps, seed):
    traj = run_walk(WalkParams(*ps), 4001, seed)
    rec = decompose(traj)
    assert max_diff_bound_check(rec, traj, horizon=4000)


@settings(max_examples=45)
@given(param_sets, st.integers(0, 2**32))
def test_max_diff_bound_with_corrected_constant(ps, seed):
    traj = run_walk(WalkParams(*ps), 4001, seed)
    rec = decompose(traj)
    pert = derive_perturbation(traj.params)
    assert max_diff_bound_check(rec, traj, pert, horizon=4000,
                                constant=pert.corrected_bound_constant)


def test_textbook_constant_fails_for_negative_coefficients():
    # a = 0, b = -4: new minima push X up, so M can outrun W by more than C = 1.
    params = WalkParams(0.1, 0.0, 0.5)
    fails = 0
    for i in range(20):
        traj = run_walk(params, 10_001, trajectory_seed(77, i))
        fails += not max_diff_bound_check(decompose(traj), traj, horizon=10_000)
    assert fails > 0


@settings(max_examples=40)
@given(param_sets, st.integers(0, 2**32))
def test_quadratic_variation_formula_and_bound(ps, seed):
    params = WalkParams(*ps)
    traj = run_walk(params, 5001, seed)
    rec = decompose(traj)
    for n in (1, 10, 1000, 5000):
        r = quadratic_variation_ratio(rec, n)
        assert r == pytest.approx(quadratic_variation_formula(traj, params, n), abs=1e-12)
        bound = (2 * params.p - 1) ** 2 * (traj.running_max[n] - traj.running_min[n]) / n
        assert abs(r - 4 * params.p * (1 - params.p)) <= bound + 1e-12


def test_quadratic_variation_long_path():
    params = WalkParams(0.75, 0.5, 0.5)
    traj = run_walk(params, 100_001, seed=12)
    r = quadratic_variation_ratio(decompose(traj), 100_000)
    assert abs(r - 0.75) < 0.01
    with pytest.raises(ValueError):
        quadratic_variation_ratio(decompose(traj), 0)


def test_y_is_centred():
    traj = run_walk(WalkParams(0.75, 1.0, 1.0), 200_001, seed=3)
    xi = decompose(traj).xi
    assert abs(xi.mean()) < 4 * xi.std() / np.sqrt(xi.size)


def test_verification_report_shape():
    traj = run_walk(WalkParams(0.75, 0.5, 1.0), 1001, seed=2)
    rep = verification_report(traj, horizon=1000)
    assert rep["c_identity"] == {"residual": 0.0, "tolerance": 0.0, "pass": True}
    assert all(v["pass"] for v in rep.values())
    assert rep["max_diff_bound_textbook_constant"]["gating"] is False
