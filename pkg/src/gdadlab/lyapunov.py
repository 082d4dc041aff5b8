"""Regime-specific Lyapunov functions and their finite-difference rates.

Each regime pairs a slow-variable function V1 with a fast-variable function V2
and couples them as V = V1 + w*V2 (fast y) or V = V2 + w*V1 (fast x), where w
is the time-scale coupling weight from the step sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Orientation, StepSizes
from .errors import MissingOracleError
from .problems import ObjectiveProblem, RegimeTag, inner_max_solve

INNER_SOLVE_TOL = 1e-10


@dataclass(frozen=True)
class LyapunovValues:
    v1: float
    v2: float
    v: float
    regime: RegimeTag


@dataclass(frozen=True)
class LyapunovRates:
    """Finite-difference time derivatives (dv1, dv2, dv) at one sample.

    ``one_sided`` flags boundary samples, where only a first-order one-sided
    difference is available and tolerances must be widened.
    """

    dv1: float
    dv2: float
    dv: float
    one_sided: bool = False


def max_gap(problem: ObjectiveProblem, x: np.ndarray, y: np.ndarray) -> float:
    """max_y f(x, y) - f(x, y), via the oracle or the iterative fallback."""
    if problem.max_oracle is not None:
        top = problem.max_oracle.max_value(x)
    else:
        _, top = inner_max_solve(problem, x, tol=INNER_SOLVE_TOL)
    return top - problem.eval_f(x, y)


def lyapunov_eval(problem: ObjectiveProblem, x: np.ndarray, y: np.ndarray,
                  steps: StepSizes) -> LyapunovValues:
    """Evaluate (V1, V2, V) for the problem's regime at state (x, y).

    Raises MissingOracleError naming the absent oracle/reference when the
    regime's required ingredients are not available.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    regime = problem.regime
    if regime is RegimeTag.TWO_SIDED_PL:
        if problem.max_oracle is None and problem.constants.L_y + problem.constants.L_xy == 0:
            raise MissingOracleError("max_oracle")
        if problem.minmax_value is None:
            raise MissingOracleError("minmax_value")
        if problem.max_oracle is not None:
            top = problem.max_oracle.max_value(x)
        else:
            _, top = inner_max_solve(problem, x, tol=INNER_SOLVE_TOL)
        v1 = top - problem.minmax_value
        v2 = top - problem.eval_f(x, y)
    elif regime is RegimeTag.NONCONVEX_PL:
        if problem.f_lower is None:
            raise MissingOracleError("f_lower")
        v1 = problem.eval_f(x, y) - problem.f_lower
        v2 = max_gap(problem, x, y)
    elif regime is RegimeTag.NONCONVEX_STRONGLY_CONCAVE:
        if problem.f_lower is None:
            raise MissingOracleError("f_lower")
        v1 = problem.eval_f(x, y) - problem.f_lower
        gy = problem.grad_y(x, y)
        v2 = 0.5 * float(np.sum((steps.beta * gy) ** 2))
    elif regime is RegimeTag.STRONGLY_CONVEX_NONCONCAVE:
        if problem.f_ref_upper is None:
            raise MissingOracleError("f_ref_upper")
        gx = problem.grad_x(x, y)
        v1 = 0.5 * float(np.sum((steps.alpha * gx) ** 2))
        v2 = problem.f_ref_upper - problem.eval_f(x, y)
    else:  # pragma: no cover - enum is exhaustive
        raise MissingOracleError("regime")
    w = steps.coupling_weight
    if steps.orientation is Orientation.FAST_Y:
        v = v1 + w * v2
    else:
        v = v2 + w * v1
    return LyapunovValues(v1=v1, v2=v2, v=v, regime=regime)


def dv_dt_fd(problem: ObjectiveProblem, trajectory, steps: StepSizes,
             index: int, h: float | None = None) -> LyapunovRates:
    """Central-difference time derivatives of (v1, v2, v) at a sample.

    Re-evaluates the Lyapunov functions at the neighboring samples of the
    (uniformly spaced) trajectory; boundary samples fall back to a one-sided
    difference and are flagged.
    """
    k = trajectory.n_samples
    if index < 0 or index >= k:
        raise IndexError(f"sample index {index} out of range [0, {k})")
    spacing = trajectory.sample_spacing
    if h is None:
        h = spacing

    def lv(i: int) -> LyapunovValues:
        return lyapunov_eval(problem, trajectory.xs[i], trajectory.ys[i], steps)

    if 0 < index < k - 1:
        a, b = lv(index - 1), lv(index + 1)
        denom = trajectory.ts[index + 1] - trajectory.ts[index - 1]
        return LyapunovRates(
            dv1=(b.v1 - a.v1) / denom,
            dv2=(b.v2 - a.v2) / denom,
            dv=(b.v - a.v) / denom,
            one_sided=False,
        )
    if k < 2:
        return LyapunovRates(0.0, 0.0, 0.0, one_sided=True)
    i0, i1 = (0, 1) if index == 0 else (k - 2, k - 1)
    a, b = lv(i0), lv(i1)
    denom = trajectory.ts[i1] - trajectory.ts[i0]
    return LyapunovRates(
        dv1=(b.v1 - a.v1) / denom,
        dv2=(b.v2 - a.v2) / denom,
        dv=(b.v - a.v) / denom,
        one_sided=True,
    )


def audit_fd_step_limit(constants, steps: StepSizes) -> float:
    """Largest sample spacing acceptable for lemma audits: 1e-3 times the
    time scale of the fastest dynamics."""
    fast_rate = max(
        steps.beta * (constants.L_y + constants.L_xy),
        steps.alpha * (constants.L_x + constants.L_xy),
    )
    return 1e-3 / (fast_rate + 1.0)
