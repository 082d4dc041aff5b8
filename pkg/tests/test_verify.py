"""Tests for bound checks, lemma audits and the gradient checker."""

import dataclasses

import numpy as np
import pytest

from gdadlab.dynamics import StepSizes, schedule_for_regime
from gdadlab.errors import ConfigurationError, InsufficientDataError
from gdadlab.integrate import IntegratorConfig, integrate
from gdadlab.lyapunov import audit_fd_step_limit
from gdadlab.problems import (make_nc_pl_problem, make_nc_sc_problem,
                              make_quadratic_saddle, make_sc_nc_problem)
from gdadlab.verify import (audit_lemma, check_exponential_bound,
                            check_min_gradnorm_bound, gradcheck)

X0 = np.array([1.0])
Y0 = np.array([1.0])


def _run(problem, horizon, dt, record_every=1):
    steps = schedule_for_regime(problem.regime, problem.constants)
    cfg = IntegratorConfig(horizon=horizon, dt=dt, record_every=record_every)
    return integrate(problem, steps, X0, Y0, cfg)


def test_exponential_bound_passes_on_schedule():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    traj = _run(p, horizon=30.0, dt=1e-3, record_every=10)
    report = check_exponential_bound(traj)
    assert report.passed
    assert report.extras["kappa"] == pytest.approx(2.0)
    assert report.extras["rate"] == pytest.approx(1.0 / 80.0)
    # The actual flow decays much faster than the worst-case envelope.
    assert report.extras["fitted_exponent"] > report.extras["rate"]


def test_exponential_bound_vacuous_at_saddle():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    steps = schedule_for_regime(p.regime, p.constants)
    traj = integrate(p, steps, np.zeros(1), np.zeros(1),
                     IntegratorConfig(horizon=1.0, dt=1e-2))
    report = check_exponential_bound(traj)
    assert report.passed and report.extras["vacuous"]


def test_exponential_bound_rejects_off_schedule():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    steps = StepSizes(alpha=0.1, beta=0.1, gamma=1.0)
    traj = integrate(p, steps, X0, Y0, IntegratorConfig(horizon=1.0, dt=1e-2))
    with pytest.raises(ConfigurationError):
        check_exponential_bound(traj)


def test_exponential_bound_detects_violation():
    """A fabricated envelope violation must fail the check."""
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    traj = _run(p, horizon=10.0, dt=1e-3, record_every=100)
    traj.vs = traj.vs.copy()
    traj.vs[-1] = 10.0 * traj.vs[0]
    report = check_exponential_bound(traj)
    assert not report.passed
    assert report.worst_violation_t == pytest.approx(traj.ts[-1])


@pytest.mark.parametrize("maker,theorem", [
    (lambda: make_nc_pl_problem(1.0, 1.0), "thm2"),
    (lambda: make_nc_sc_problem(1.0, 1.0), "thm3"),
    (lambda: make_sc_nc_problem(1.0, 1.0), "thm4"),
])
def test_min_gradnorm_bounds_pass(maker, theorem):
    p = maker()
    traj = _run(p, horizon=80.0, dt=5e-3, record_every=10)
    report = check_min_gradnorm_bound(traj, theorem)
    assert report.passed
    assert len(report.ts) == 5
    assert report.ts[-1] == pytest.approx(80.0)
    # measured running-min never exceeds the bound anywhere on the grid
    assert np.all(report.measured_values
                  <= report.bound_values * (1 + 1e-6) + report.budget)


def test_min_gradnorm_wrong_regime_rejected():
    p = make_nc_pl_problem(1.0, 1.0)
    traj = _run(p, horizon=5.0, dt=1e-2)
    with pytest.raises(ConfigurationError):
        check_min_gradnorm_bound(traj, "thm3")
    with pytest.raises(ConfigurationError):
        check_min_gradnorm_bound(traj, "thm9")


def test_thm4_records_labeling_discrepancy():
    p = make_sc_nc_problem(1.0, 1.0)
    traj = _run(p, horizon=40.0, dt=5e-3, record_every=10)
    report = check_min_gradnorm_bound(traj, "thm4")
    assert "v1_v2_labeling_discrepancy" in report.extras


def _audit_run(problem, horizon=3.0):
    steps = schedule_for_regime(problem.regime, problem.constants)
    dt = audit_fd_step_limit(problem.constants, steps)
    cfg = IntegratorConfig(horizon=horizon, dt=dt)
    return integrate(problem, steps, X0, Y0, cfg)


@pytest.mark.parametrize("maker,lemma", [
    (lambda: make_quadratic_saddle(1.0, 1.0, 2.0), "lem2"),
    (lambda: make_nc_pl_problem(1.0, 1.0), "lem3"),
    (lambda: make_nc_sc_problem(1.0, 1.0), "lem4"),
    (lambda: make_sc_nc_problem(1.0, 1.0), "lem5"),
])
def test_lemma_audits_pass_on_schedule(maker, lemma):
    p = maker()
    traj = _audit_run(p)
    report = audit_lemma(traj, lemma)
    assert report.fraction_satisfied >= 0.99
    assert report.n_interior == traj.n_samples - 2
    assert report.worst_margin <= 0.0 or report.fraction_satisfied >= 0.99


def test_lemma_audit_statement_constants_reported():
    p = make_nc_pl_problem(1.0, 1.0)
    traj = _audit_run(p)
    report = audit_lemma(traj, "lem3")
    assert "fraction_v2_statement_constants" in report.extras


def test_lemma_audit_needs_samples():
    p = make_nc_sc_problem(1.0, 1.0)
    steps = schedule_for_regime(p.regime, p.constants)
    traj = integrate(p, steps, X0, Y0,
                     IntegratorConfig(horizon=0.02, dt=0.01))
    with pytest.raises(InsufficientDataError):
        audit_lemma(traj, "lem4")


def test_lemma_audit_wrong_regime_rejected():
    p = make_nc_sc_problem(1.0, 1.0)
    traj = _audit_run(p, horizon=0.1)
    with pytest.raises(ConfigurationError):
        audit_lemma(traj, "lem2")


def test_gradcheck_passes_builtins():
    for p in (make_quadratic_saddle(1.0, 1.0, 2.0),
              make_nc_sc_problem(1.0, 1.0)):
        report = gradcheck(p, points=None, seed=3)
        assert report.passed
        assert report.max_rel_error <= 1e-6


def test_gradcheck_catches_wrong_gradient():
    p = make_nc_sc_problem(1.0, 1.0)
    good = p.grad_x
    p.grad_x = lambda x, y: 1.01 * good(x, y)
    report = gradcheck(p)
    assert not report.passed


def test_rate_report_serialization_caps_points():
    p = make_quadratic_saddle(1.0, 1.0, 2.0)
    traj = _run(p, horizon=10.0, dt=1e-3)
    report = check_exponential_bound(traj)
    d = report.to_dict(max_points=50)
    assert len(d["ts"]) <= 50
    assert d["theorem_id"] == "thm1"
    assert set(d) >= {"bound_values", "measured_values", "tolerance",
                      "budget", "passed"}
