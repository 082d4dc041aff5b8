"""Gradient descent-ascent vector field, step-size schedules, condition number.

The dynamics are x' = -alpha * grad_x f, y' = +beta * grad_y f.  Each regime
has a fixed schedule for (alpha, beta) and the Lyapunov coupling weight gamma;
the schedules are pure functions of the declared smoothness constants and are
adopted verbatim, with no adaptive retuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, FieldEvaluationError, ScheduleError
from .problems import ObjectiveProblem, RegimeTag, SmoothnessConstants


class Orientation(Enum):
    FAST_Y = "fast-y"
    FAST_X = "fast-x"


@dataclass(frozen=True)
class StepSizes:
    """Step sizes (alpha, beta), coupling weight gamma and which variable runs
    at the faster time scale.

    Schedules always emit strictly positive values; zero alpha or beta is
    permitted only for off-schedule calibration runs.
    """

    alpha: float
    beta: float
    gamma: float
    orientation: Orientation = Orientation.FAST_Y

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ScheduleError(f"{name} must be finite and >= 0, got {v}")

    @property
    def coupling_weight(self) -> float:
        """Weight on the secondary Lyapunov term in the coupled V."""
        if self.orientation is Orientation.FAST_Y:
            return self.gamma * self.alpha / self.beta
        return self.gamma * self.beta / self.alpha


@dataclass(frozen=True)
class ConditionNumber:
    mu: float
    kappa: float


def gdad_field(problem: ObjectiveProblem, x: np.ndarray, y: np.ndarray,
               steps: StepSizes) -> tuple[np.ndarray, np.ndarray]:
    """Velocities (-alpha * grad_x f, +beta * grad_y f) at (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (problem.m,) or y.shape != (problem.n,):
        raise ConfigurationError(
            f"state dims {x.shape}/{y.shape} do not match problem "
            f"({problem.m}, {problem.n})")
    gx = problem.grad_x(x, y)
    gy = problem.grad_y(x, y)
    if not (np.all(np.isfinite(gx)) and np.all(np.isfinite(gy))):
        raise FieldEvaluationError("non-finite gradient", x=x, y=y)
    return -steps.alpha * gx, steps.beta * gy


def condition_number(constants: SmoothnessConstants) -> ConditionNumber:
    """kappa = L_xy / min(mu_x, mu_y)."""
    if constants.mu_x <= 0 or constants.mu_y <= 0:
        raise ScheduleError(
            "condition number is undefined unless mu_x > 0 and mu_y > 0")
    mu = min(constants.mu_x, constants.mu_y)
    return ConditionNumber(mu=mu, kappa=constants.L_xy / mu)


def stepsizes_two_sided_pl(constants: SmoothnessConstants) -> StepSizes:
    """Two-sided PL schedule: gamma = L_xy^2/mu_y^2, alpha = mu^2/(10 mu_x L_xy^2),
    beta = mu^2/(mu_x mu_y^2)."""
    c = constants
    if c.mu_x <= 0 or c.mu_y <= 0 or c.L_xy <= 0:
        raise ScheduleError("two-sided PL schedule needs mu_x, mu_y, L_xy > 0")
    mu = min(c.mu_x, c.mu_y)
    return StepSizes(
        alpha=mu * mu / (10.0 * c.mu_x * c.L_xy ** 2),
        beta=mu * mu / (c.mu_x * c.mu_y ** 2),
        gamma=c.L_xy ** 2 / c.mu_y ** 2,
        orientation=Orientation.FAST_Y,
    )


def stepsizes_one_sided_pl(constants: SmoothnessConstants) -> StepSizes:
    """One-sided (y) PL schedule: gamma = 32 L_xy^2/mu_y^2, alpha = 1/(8 L_xy^2),
    beta = 1/mu_y^2."""
    c = constants
    if c.mu_y <= 0 or c.L_xy <= 0:
        raise ScheduleError("one-sided PL schedule needs mu_y, L_xy > 0")
    return StepSizes(
        alpha=1.0 / (8.0 * c.L_xy ** 2),
        beta=1.0 / c.mu_y ** 2,
        gamma=32.0 * c.L_xy ** 2 / c.mu_y ** 2,
        orientation=Orientation.FAST_Y,
    )


def stepsizes_nc_sc(constants: SmoothnessConstants) -> StepSizes:
    """Nonconvex-strongly-concave schedule: gamma = mu_y L_xy^2,
    alpha = 1/L_xy^2, beta = 4/mu_y^2."""
    c = constants
    if c.mu_y <= 0 or c.L_xy <= 0:
        raise ScheduleError("nc-sc schedule needs mu_y, L_xy > 0")
    return StepSizes(
        alpha=1.0 / c.L_xy ** 2,
        beta=4.0 / c.mu_y ** 2,
        gamma=c.mu_y * c.L_xy ** 2,
        orientation=Orientation.FAST_Y,
    )


def stepsizes_sc_nc(constants: SmoothnessConstants) -> StepSizes:
    """Strongly-convex-nonconcave schedule: gamma = mu_x L_xy^2,
    alpha = 4/mu_x^2, beta = 1/L_xy^2 (x is the fast variable)."""
    c = constants
    if c.mu_x <= 0 or c.L_xy <= 0:
        raise ScheduleError("sc-nc schedule needs mu_x, L_xy > 0")
    return StepSizes(
        alpha=4.0 / c.mu_x ** 2,
        beta=1.0 / c.L_xy ** 2,
        gamma=c.mu_x * c.L_xy ** 2,
        orientation=Orientation.FAST_X,
    )


_SCHEDULES = {
    RegimeTag.TWO_SIDED_PL: stepsizes_two_sided_pl,
    RegimeTag.NONCONVEX_PL: stepsizes_one_sided_pl,
    RegimeTag.NONCONVEX_STRONGLY_CONCAVE: stepsizes_nc_sc,
    RegimeTag.STRONGLY_CONVEX_NONCONCAVE: stepsizes_sc_nc,
}


def schedule_for_regime(regime: RegimeTag,
                        constants: SmoothnessConstants) -> StepSizes:
    return _SCHEDULES[regime](constants)


def schedule_identities(regime: RegimeTag,
                        constants: SmoothnessConstants) -> dict[str, float]:
    """Relative residuals of the coefficient cancellations each schedule is
    designed to produce.  All residuals are ~0 (machine precision) when the
    schedule is consistent with its derivation.
    """
    c = constants
    s = schedule_for_regime(regime, c)
    a, b, g = s.alpha, s.beta, s.gamma

    def rel(value: float, *terms: float) -> float:
        scale = max([abs(t) for t in terms] + [1.0])
        return abs(value) / scale

    if regime is RegimeTag.TWO_SIDED_PL:
        t1 = 0.5 - 3.0 * g * a / b
        t2 = 1.5 * c.mu_y * g - c.L_xy ** 2 / c.mu_y \
            - 5.0 * c.L_xy ** 2 * g * a / (c.mu_y * b)
        return {
            "half_minus_3ga_over_b_is_one_fifth": rel(t1 - 0.2, 0.5, 3 * g * a / b),
            "v2_coefficient_cancels": rel(t2, 1.5 * c.mu_y * g, c.L_xy ** 2 / c.mu_y),
            "mu_x_alpha_le_mu_y_beta": max(0.0, c.mu_x * a - c.mu_y * b)
            / max(c.mu_y * b, 1.0),
        }
    if regime is RegimeTag.NONCONVEX_PL:
        return {
            "beta_minus_ga_over_4": rel(b - g * a / 4.0, b, g * a / 4.0),
            "one_minus_4L2a_over_mu2b_is_half": rel(
                (1.0 - 4.0 * c.L_xy ** 2 * a / (c.mu_y ** 2 * b)) - 0.5, 1.0),
            "one_minus_ga_over_4b": rel(1.0 - g * a / (4.0 * b), 1.0),
        }
    if regime is RegimeTag.NONCONVEX_STRONGLY_CONCAVE:
        return {
            "mu_y_ga_over_4_minus_inv_beta": rel(
                c.mu_y * g * a / 4.0 - 1.0 / b, c.mu_y * g * a / 4.0, 1.0 / b),
        }
    if regime is RegimeTag.STRONGLY_CONVEX_NONCONCAVE:
        return {
            "mu_x_gb_over_4_minus_inv_alpha": rel(
                c.mu_x * g * b / 4.0 - 1.0 / a, c.mu_x * g * b / 4.0, 1.0 / a),
        }
    raise ScheduleError(f"unknown regime {regime}")
