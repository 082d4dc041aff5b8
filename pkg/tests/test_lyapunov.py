"""Tests for the regime-specific Lyapunov functions and FD rates."""

import numpy as np
import pytest

from gdadlab.dynamics import StepSizes, schedule_for_regime
from gdadlab.errors import MissingOracleError
from gdadlab.integrate import IntegratorConfig, integrate
from gdadlab.lyapunov import (audit_fd_step_limit, dv_dt_fd, lyapunov_eval,
                              max_gap)
from gdadlab.problems import (make_bilinear, make_nc_pl_problem,
                              make_nc_sc_problem, make_quadratic_saddle,
                              make_sc_nc_problem)


def _steps(problem):
    return schedule_for_regime(problem.regime, problem.constants)


def test_two_sided_values():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    s = _steps(p)
    x, y = np.array([1.0]), np.array([1.0])
    lv = lyapunov_eval(p, x, y, s)
    # max value at x=1 is (1/2 + 2)*1 = 2.5; f(1,1) = 2.
    assert lv.v1 == pytest.approx(2.5)
    assert lv.v2 == pytest.approx(0.5)
    assert lv.v == pytest.approx(lv.v1 + s.coupling_weight * lv.v2)


def test_two_sided_nonnegative_and_zero_at_saddle():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    s = _steps(p)
    lv0 = lyapunov_eval(p, np.zeros(1), np.zeros(1), s)
    assert lv0.v1 == pytest.approx(0.0) and lv0.v2 == pytest.approx(0.0)
    rng = np.random.default_rng(0)
    for _ in range(50):
        lv = lyapunov_eval(p, p.box.sample(rng, 1), p.box.sample(rng, 1), s)
        assert lv.v1 >= -1e-12 and lv.v2 >= -1e-12 and lv.v >= -1e-12


def test_nonconvex_pl_values():
    p = make_nc_pl_problem(1.0, 1.0)
    s = _steps(p)
    x, y = np.array([1.0]), np.array([0.5])
    lv = lyapunov_eval(p, x, y, s)
    assert lv.v1 == pytest.approx(p.eval_f(x, y) - p.f_lower)
    assert lv.v2 == pytest.approx(max_gap(p, x, y))
    assert lv.v2 >= 0.0


def test_nc_sc_values():
    p = make_nc_sc_problem(1.0, 1.0)
    s = _steps(p)
    x, y = np.array([0.3]), np.array([-0.2])
    lv = lyapunov_eval(p, x, y, s)
    gy = p.grad_y(x, y)
    assert lv.v2 == pytest.approx(0.5 * float(np.sum((s.beta * gy) ** 2)))


def test_sc_nc_values_and_orientation():
    p = make_sc_nc_problem(1.0, 1.0)
    s = _steps(p)
    x, y = np.array([0.3]), np.array([-0.2])
    lv = lyapunov_eval(p, x, y, s)
    gx = p.grad_x(x, y)
    assert lv.v1 == pytest.approx(0.5 * float(np.sum((s.alpha * gx) ** 2)))
    assert lv.v2 == pytest.approx(p.f_ref_upper - p.eval_f(x, y))
    # Fast-x coupling: V = V2 + w * V1.
    assert lv.v == pytest.approx(lv.v2 + s.coupling_weight * lv.v1)


def test_missing_oracle_is_named():
    p = make_bilinear()
    s = StepSizes(alpha=1.0, beta=1.0, gamma=1.0)
    with pytest.raises(MissingOracleError, match="f_lower"):
        lyapunov_eval(p, np.zeros(1), np.zeros(1), s)


def test_max_gap_oracle_and_fallback_agree():
    p = make_nc_pl_problem(1.0, 1.0)
    x, y = np.array([0.8]), np.array([0.1])
    with_oracle = max_gap(p, x, y)
    p.max_oracle = None
    without = max_gap(p, x, y)
    assert without == pytest.approx(with_oracle, abs=1e-8)


def test_dv_dt_fd_matches_chain_rule():
    """FD Lyapunov rate along the flow matches -beta^2||gy||^2-analytic terms
    for the nc-sc V1 = f - f_lower: dV1/dt = -alpha||gx||^2 + beta||gy||^2."""
    p = make_nc_sc_problem(1.0, 1.0)
    s = _steps(p)
    traj = integrate(p, s, np.array([1.0]), np.array([1.0]),
                     IntegratorConfig(horizon=0.01, dt=1e-5))
    i = traj.n_samples // 2
    rates = dv_dt_fd(p, traj, s, i)
    gx = traj.gx_norms[i]
    gy = traj.gy_norms[i]
    expected = -s.alpha * gx ** 2 + s.beta * gy ** 2
    assert not rates.one_sided
    assert rates.dv1 == pytest.approx(expected, rel=1e-5)


def test_dv_dt_fd_boundary_is_one_sided():
    p = make_nc_sc_problem(1.0, 1.0)
    s = _steps(p)
    traj = integrate(p, s, np.array([1.0]), np.array([1.0]),
                     IntegratorConfig(horizon=0.01, dt=1e-3))
    assert dv_dt_fd(p, traj, s, 0).one_sided
    assert dv_dt_fd(p, traj, s, traj.n_samples - 1).one_sided
    with pytest.raises(IndexError):
        dv_dt_fd(p, traj, s, traj.n_samples)


def test_audit_fd_step_limit_scales_with_fast_rate():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    s = _steps(p)
    base = audit_fd_step_limit(p.constants, s)
    faster = StepSizes(alpha=s.alpha, beta=10.0 * s.beta, gamma=s.gamma)
    assert audit_fd_step_limit(p.constants, faster) < base
    assert base <= 1e-3
