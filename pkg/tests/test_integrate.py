"""Tests for the fixed-step and adaptive integrators and trajectory output."""

import math

import numpy as np
import pytest

from gdadlab.dynamics import StepSizes, schedule_for_regime
from gdadlab.errors import ConfigurationError, DivergenceError
from gdadlab.integrate import (IntegratorConfig, State, auto_dt, integrate,
                               richardson_check, step_rk4,
                               write_trajectory_csv)
from gdadlab.problems import (make_bilinear, make_nc_sc_problem,
                              make_quadratic_saddle)

UNIT_STEPS = StepSizes(alpha=1.0, beta=1.0, gamma=1.0)


def _bilinear_exact(t, x0, y0):
    """Closed-form flow of x' = -y, y' = x: a rotation of (x0, y0)."""
    return (x0 * math.cos(t) - y0 * math.sin(t),
            x0 * math.sin(t) + y0 * math.cos(t))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        IntegratorConfig(horizon=-1.0)
    with pytest.raises(ConfigurationError):
        IntegratorConfig(horizon=1.0, dt=0.0)
    with pytest.raises(ConfigurationError):
        IntegratorConfig(horizon=1.0, dt=2.0)
    with pytest.raises(ConfigurationError):
        IntegratorConfig(horizon=1.0, record_every=0)
    with pytest.raises(ConfigurationError):
        IntegratorConfig(horizon=1.0, method="euler")


def test_auto_dt_is_capped_and_scales():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    s = schedule_for_regime(p.regime, p.constants)
    dt = auto_dt(p, s)
    assert 0 < dt <= 1e-2
    fast = StepSizes(alpha=s.alpha, beta=100.0 * s.beta, gamma=s.gamma)
    assert auto_dt(p, fast) < dt


def test_horizon_hit_exactly():
    p = make_bilinear()
    traj = integrate(p, UNIT_STEPS, np.array([1.0]), np.array([0.0]),
                     IntegratorConfig(horizon=1.0, dt=0.3))
    assert traj.ts[-1] == pytest.approx(1.0, abs=1e-15)
    assert traj.dt <= 0.3


def test_zero_horizon_single_sample():
    p = make_bilinear()
    traj = integrate(p, UNIT_STEPS, np.array([2.0]), np.array([3.0]),
                     IntegratorConfig(horizon=0.0))
    assert traj.n_samples == 1
    np.testing.assert_allclose(traj.xs[0], [2.0])


def test_rk4_matches_rotation():
    p = make_bilinear()
    T = 2.0 * math.pi
    traj = integrate(p, UNIT_STEPS, np.array([1.0]), np.array([0.0]),
                     IntegratorConfig(horizon=T, dt=1e-3))
    xe, ye = _bilinear_exact(T, 1.0, 0.0)
    assert traj.xs[-1, 0] == pytest.approx(xe, abs=1e-10)
    assert traj.ys[-1, 0] == pytest.approx(ye, abs=1e-10)


def test_rk4_fourth_order_convergence():
    p = make_bilinear()
    T = 2.0 * math.pi
    errs = []
    for dt in (0.05, 0.025):
        traj = integrate(p, UNIT_STEPS, np.array([1.0]), np.array([0.0]),
                         IntegratorConfig(horizon=T, dt=dt))
        xe, ye = _bilinear_exact(T, 1.0, 0.0)
        errs.append(math.hypot(traj.xs[-1, 0] - xe, traj.ys[-1, 0] - ye))
    ratio = errs[0] / errs[1]
    assert 14.0 <= ratio <= 18.0


def test_generic_path_matches_fast_path():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    s = schedule_for_regime(p.regime, p.constants)
    cfg = IntegratorConfig(horizon=2.0, dt=1e-3, record_every=100)
    fast = integrate(p, s, np.array([1.0]), np.array([1.0]), cfg)
    p.family = None  # force the reference python loop
    ref = integrate(p, s, np.array([1.0]), np.array([1.0]), cfg)
    np.testing.assert_allclose(fast.xs, ref.xs, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(fast.ys, ref.ys, rtol=1e-13, atol=1e-15)


def test_rk45_agrees_with_rk4():
    p = make_nc_sc_problem(1.0, 1.0)
    s = schedule_for_regime(p.regime, p.constants)
    x0, y0 = np.array([0.8]), np.array([0.5])
    a = integrate(p, s, x0, y0, IntegratorConfig(horizon=2.0, dt=1e-4,
                                                 record_every=2000))
    b = integrate(p, s, x0, y0, IntegratorConfig(horizon=2.0, dt=0.2,
                                                 method="rk45"))
    np.testing.assert_allclose(a.xs[-1], b.xs[-1], atol=1e-7)
    np.testing.assert_allclose(a.ys[-1], b.ys[-1], atol=1e-7)


def test_record_every_thins_samples():
    p = make_bilinear()
    cfg = IntegratorConfig(horizon=1.0, dt=0.1, record_every=3)
    traj = integrate(p, UNIT_STEPS, np.array([1.0]), np.array([0.0]), cfg)
    # steps 0,3,6,9 plus the final step 10
    np.testing.assert_allclose(traj.ts, [0.0, 0.3, 0.6, 0.9, 1.0])


def test_divergence_raises_with_partial_trajectory():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    wild = StepSizes(alpha=1000.0, beta=1000.0, gamma=1.0)
    with pytest.raises(DivergenceError) as exc_info:
        integrate(p, wild, np.array([1.0]), np.array([1.0]),
                  IntegratorConfig(horizon=10.0, dt=1.0))
    err = exc_info.value
    assert err.trajectory is not None and err.trajectory.n_samples >= 1
    assert isinstance(err.last_state, State)
    assert np.all(np.isfinite(err.trajectory.xs))


def test_step_rk4_single_step():
    p = make_bilinear()
    state = State(0.0, np.array([1.0]), np.array([0.0]))
    nxt = step_rk4(p, UNIT_STEPS, state, 0.01)
    xe, ye = _bilinear_exact(0.01, 1.0, 0.0)
    assert nxt.t == pytest.approx(0.01)
    assert nxt.x[0] == pytest.approx(xe, abs=1e-12)
    assert nxt.y[0] == pytest.approx(ye, abs=1e-12)


def test_richardson_budget_small_on_smooth_flow():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    s = schedule_for_regime(p.regime, p.constants)
    est = richardson_check(p, s, np.array([1.0]), np.array([1.0]),
                           IntegratorConfig(horizon=5.0, dt=1e-3,
                                            record_every=100))
    assert 0.0 <= est.max_discrepancy < 1e-10
    assert est.n_shared > 2


def test_lyapunov_columns_absent_without_oracles():
    p = make_bilinear()
    traj = integrate(p, UNIT_STEPS, np.array([1.0]), np.array([0.0]),
                     IntegratorConfig(horizon=1.0, dt=0.1))
    assert not traj.has_lyapunov
    assert traj.v1s is None
    assert traj.gx_norms is not None


def test_csv_roundtrip(tmp_path):
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    s = schedule_for_regime(p.regime, p.constants)
    traj = integrate(p, s, np.array([1.0]), np.array([1.0]),
                     IntegratorConfig(horizon=0.5, dt=0.01, record_every=10))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x_0,y_0,gx_norm,gy_norm,v1,v2,v"
    assert len(lines) == 1 + traj.n_samples
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    np.testing.assert_array_equal(data[:, 0], traj.ts)
    np.testing.assert_array_equal(data[:, 1], traj.xs[:, 0])
    np.testing.assert_array_equal(data[:, 7], traj.vs)


def test_csv_empty_lyapunov_fields(tmp_path):
    p = make_bilinear()
    traj = integrate(p, UNIT_STEPS, np.array([1.0]), np.array([0.0]),
                     IntegratorConfig(horizon=0.2, dt=0.1))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    first_row = path.read_text().splitlines()[1]
    assert first_row.endswith(",,,")
