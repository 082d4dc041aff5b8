"""Min-max test problems with analytically known constants and oracles.

The built-in suite fixes one canonical instance per regime so that smoothness
and PL constants are exact (or conservatively estimated over a declared
certification box) and inner maximizers have closed forms.  Every objective in
the suite belongs to a separable family

    f(x, y) = (qx/2)||x||^2 + tx * sum_i w(x_i) + b * <x, y>
              - (qy/2)||y||^2 - ty * sum_i w(y_i),

with w(u) = u^2 sin^2(u) as the fixed smooth nonconvex component.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConfigurationError,
    ConstantOrderingError,
    InnerMaxDidNotConverge,
    UnsupportedCertificateError,
)

Vector = np.ndarray

PL_CERT_RTOL = 1e-9
LIPSCHITZ_CERT_RTOL = 1e-9
# Safety inflation applied to grid-estimated curvature bounds so that sampled
# Lipschitz ratios stay below 1 despite the finite estimation grid.
CURVATURE_SAFETY = 1e-3


class RegimeTag(Enum):
    TWO_SIDED_PL = "two-sided-pl"
    NONCONVEX_PL = "nonconvex-pl"
    NONCONVEX_STRONGLY_CONCAVE = "nonconvex-strongly-concave"
    STRONGLY_CONVEX_NONCONCAVE = "strongly-convex-nonconcave"


@dataclass(frozen=True)
class SmoothnessConstants:
    """Declared gradient-Lipschitz and PL/strong-convexity constants.

    ``mu_x``/``mu_y`` are 0 when the corresponding side has no curvature
    guarantee.
    """

    L_x: float
    L_y: float
    L_xy: float
    mu_x: float = 0.0
    mu_y: float = 0.0

    def __post_init__(self):
        for name in ("L_x", "L_y", "L_xy", "mu_x", "mu_y"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ConstantOrderingError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class Box:
    """Axis-aligned certification box with uniform per-axis bounds."""

    low: float = -2.0
    high: float = 2.0

    def __post_init__(self):
        if not self.low < self.high:
            raise ConfigurationError(f"empty box [{self.low}, {self.high}]")

    def grid(self, points: int) -> np.ndarray:
        return np.linspace(self.low, self.high, points)

    def sample(self, rng: np.random.Generator, dim: int) -> Vector:
        return rng.uniform(self.low, self.high, size=dim)


@dataclass(frozen=True)
class MaxOracle:
    """Closed-form inner maximizer y*(x) and its value f(x, y*(x))."""

    y_star: Callable[[Vector], Vector]
    max_value: Callable[[Vector], float]


@dataclass(frozen=True)
class MinOracle:
    """Closed-form per-y minimizer x*(y) and its value f(x*(y), y)."""

    x_star: Callable[[Vector], Vector]
    min_value: Callable[[Vector], float]


@dataclass(frozen=True)
class SeparableFamily:
    """Coefficients of the built-in objective family (see module docstring)."""

    quad_x: float
    trig_x: float
    bilinear: float
    quad_y: float
    trig_y: float


def _w(u: np.ndarray) -> np.ndarray:
    return u * u * np.sin(u) ** 2


def _w_prime(u: np.ndarray) -> np.ndarray:
    return 2.0 * u * np.sin(u) ** 2 + u * u * np.sin(2.0 * u)


def _w_second(u: np.ndarray) -> np.ndarray:
    return 2.0 * np.sin(u) ** 2 + 4.0 * u * np.sin(2.0 * u) + 2.0 * u * u * np.cos(2.0 * u)


def family_eval(fam: SeparableFamily, x: Vector, y: Vector) -> float:
    v = 0.5 * fam.quad_x * float(x @ x) - 0.5 * fam.quad_y * float(y @ y)
    if fam.bilinear != 0.0:
        v += fam.bilinear * float(x @ y)
    if fam.trig_x != 0.0:
        v += fam.trig_x * float(np.sum(_w(x)))
    if fam.trig_y != 0.0:
        v -= fam.trig_y * float(np.sum(_w(y)))
    return v


def family_grad_x(fam: SeparableFamily, x: Vector, y: Vector) -> Vector:
    g = fam.quad_x * x + fam.bilinear * y
    if fam.trig_x != 0.0:
        g = g + fam.trig_x * _w_prime(x)
    return g


def family_grad_y(fam: SeparableFamily, x: Vector, y: Vector) -> Vector:
    g = fam.bilinear * x - fam.quad_y * y
    if fam.trig_y != 0.0:
        g = g - fam.trig_y * _w_prime(y)
    return g


@dataclass
class ObjectiveProblem:
    """A smooth min-max objective with analytic partial gradients.

    Optional oracles and reference values enable the regime-specific Lyapunov
    functions: ``max_oracle`` for max-gap terms, ``minmax_value`` for the
    global min-max level, ``f_lower``/``f_ref_upper`` as finite references for
    the value-gap terms (computed over ``box`` for the built-ins).
    """

    name: str
    m: int
    n: int
    eval_f: Callable[[Vector, Vector], float]
    grad_x: Callable[[Vector, Vector], Vector]
    grad_y: Callable[[Vector, Vector], Vector]
    constants: SmoothnessConstants
    regime: RegimeTag
    box: Box = field(default_factory=Box)
    max_oracle: Optional[MaxOracle] = None
    min_oracle: Optional[MinOracle] = None
    f_lower: Optional[float] = None
    f_ref_upper: Optional[float] = None
    minmax_value: Optional[float] = None
    family: Optional[SeparableFamily] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ConfigurationError("zero-dimensional problems are rejected")


def _check_two_sided_ordering(constants: SmoothnessConstants) -> None:
    lmin = min(constants.L_x, constants.L_y, constants.L_xy)
    if constants.mu_x <= 0 or constants.mu_y <= 0:
        raise ConstantOrderingError("two-sided PL regime requires mu_x, mu_y > 0")
    if constants.mu_x > lmin or constants.mu_y > lmin:
        raise ConstantOrderingError(
            f"two-sided PL regime requires mu_x, mu_y <= min(L_x, L_y, L_xy) = {lmin}"
        )


def make_quadratic_saddle(mu_x: float, mu_y: float, b: float, dim: int = 1,
                          box: Box = Box()) -> ObjectiveProblem:
    """Saddle quadratic f = (mu_x/2)||x||^2 + b<x,y> - (mu_y/2)||y||^2.

    The declared PL constants are min(mu_x, mu_y) on both sides so the
    constant ordering holds for asymmetric curvatures; a smaller PL constant
    is always admissible.
    """
    if mu_x <= 0 or mu_y <= 0:
        raise ConstantOrderingError("mu_x and mu_y must be positive")
    if abs(b) < max(mu_x, mu_y):
        raise ConstantOrderingError(
            f"|b|={abs(b)} must be >= max(mu_x, mu_y)={max(mu_x, mu_y)} "
            "for the PL constant ordering to hold"
        )
    mu = min(mu_x, mu_y)
    constants = SmoothnessConstants(L_x=mu_x, L_y=mu_y, L_xy=abs(b), mu_x=mu, mu_y=mu)
    _check_two_sided_ordering(constants)
    fam = SeparableFamily(mu_x, 0.0, b, mu_y, 0.0)

    def y_star(x):
        return (b / mu_y) * np.asarray(x, dtype=float)

    def max_value(x):
        x = np.asarray(x, dtype=float)
        return (0.5 * mu_x + b * b / (2.0 * mu_y)) * float(x @ x)

    def x_star(y):
        return (-b / mu_x) * np.asarray(y, dtype=float)

    def min_value(y):
        y = np.asarray(y, dtype=float)
        return -(0.5 * mu_y + b * b / (2.0 * mu_x)) * float(y @ y)

    return ObjectiveProblem(
        name="quadratic-saddle",
        m=dim, n=dim,
        eval_f=lambda x, y: family_eval(fam, x, y),
        grad_x=lambda x, y: family_grad_x(fam, x, y),
        grad_y=lambda x, y: family_grad_y(fam, x, y),
        constants=constants,
        regime=RegimeTag.TWO_SIDED_PL,
        box=box,
        max_oracle=MaxOracle(y_star, max_value),
        min_oracle=MinOracle(x_star, min_value),
        minmax_value=0.0,
        family=fam,
        params={"mu_x": mu_x, "mu_y": mu_y, "b": b, "dim": dim},
    )


def _pairwise_extremes(fam: SeparableFamily, box: Box, points: int = 801):
    """Min and max of the per-coordinate-pair term of f over box^2."""
    u = box.grid(points)
    xg, yg = np.meshgrid(u, u, indexing="ij")
    vals = (0.5 * fam.quad_x * xg * xg + fam.trig_x * _w(xg)
            + fam.bilinear * xg * yg
            - 0.5 * fam.quad_y * yg * yg - fam.trig_y * _w(yg))
    return float(vals.min()), float(vals.max())


def _trig_curvature_bound(box: Box, points: int = 4001) -> float:
    u = box.grid(points)
    return float(np.max(np.abs(_w_second(u)))) * (1.0 + CURVATURE_SAFETY)


def _make_nonconvex_vs_concave(mu_y: float, b: float, dim: int, box: Box,
                               regime: RegimeTag, name: str) -> ObjectiveProblem:
    if mu_y <= 0:
        raise ConstantOrderingError("mu_y must be positive")
    if b == 0:
        raise ConstantOrderingError("b must be nonzero")
    fam = SeparableFamily(0.0, 1.0, b, mu_y, 0.0)
    L_x = _trig_curvature_bound(box)
    constants = SmoothnessConstants(L_x=L_x, L_y=mu_y, L_xy=abs(b), mu_x=0.0, mu_y=mu_y)
    f_lo, _ = _pairwise_extremes(fam, box)

    def y_star(x):
        return (b / mu_y) * np.asarray(x, dtype=float)

    def max_value(x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(_w(x))) + b * b / (2.0 * mu_y) * float(x @ x)

    return ObjectiveProblem(
        name=name,
        m=dim, n=dim,
        eval_f=lambda x, y: family_eval(fam, x, y),
        grad_x=lambda x, y: family_grad_x(fam, x, y),
        grad_y=lambda x, y: family_grad_y(fam, x, y),
        constants=constants,
        regime=regime,
        box=box,
        max_oracle=MaxOracle(y_star, max_value),
        f_lower=dim * f_lo,
        family=fam,
        params={"mu_y": mu_y, "b": b, "dim": dim},
    )


def make_nc_sc_problem(mu_y: float, b: float, dim: int = 1,
                       box: Box = Box()) -> ObjectiveProblem:
    """Nonconvex-strongly-concave instance g(x) + b<x,y> - (mu_y/2)||y||^2
    with g(x) = sum_i x_i^2 sin^2(x_i)."""
    return _make_nonconvex_vs_concave(
        mu_y, b, dim, box, RegimeTag.NONCONVEX_STRONGLY_CONCAVE, "nc-sc")


def make_nc_pl_problem(mu_y: float, b: float, dim: int = 1,
                       box: Box = Box()) -> ObjectiveProblem:
    """One-sided-PL instance: same construction as :func:`make_nc_sc_problem`
    (strong concavity in y implies the PL condition in y with the same mu_y),
    tagged for the nonconvex-PL Lyapunov pair and schedule."""
    return _make_nonconvex_vs_concave(
        mu_y, b, dim, box, RegimeTag.NONCONVEX_PL, "nc-pl")


def make_sc_nc_problem(mu_x: float, b: float, dim: int = 1,
                       box: Box = Box()) -> ObjectiveProblem:
    """Strongly-convex-nonconcave mirror: (mu_x/2)||x||^2 + b<x,y> - h(y)
    with h(y) = sum_i y_i^2 sin^2(y_i)."""
    if mu_x <= 0:
        raise ConstantOrderingError("mu_x must be positive")
    if b == 0:
        raise ConstantOrderingError("b must be nonzero")
    fam = SeparableFamily(mu_x, 0.0, b, 0.0, 1.0)
    L_y = _trig_curvature_bound(box)
    constants = SmoothnessConstants(L_x=mu_x, L_y=L_y, L_xy=abs(b), mu_x=mu_x, mu_y=0.0)
    _, f_hi = _pairwise_extremes(fam, box)

    def x_star(y):
        return (-b / mu_x) * np.asarray(y, dtype=float)

    def min_value(y):
        y = np.asarray(y, dtype=float)
        return -b * b / (2.0 * mu_x) * float(y @ y) - float(np.sum(_w(y)))

    return ObjectiveProblem(
        name="sc-nc",
        m=dim, n=dim,
        eval_f=lambda x, y: family_eval(fam, x, y),
        grad_x=lambda x, y: family_grad_x(fam, x, y),
        grad_y=lambda x, y: family_grad_y(fam, x, y),
        constants=constants,
        regime=RegimeTag.STRONGLY_CONVEX_NONCONCAVE,
        box=box,
        min_oracle=MinOracle(x_star, min_value),
        f_ref_upper=dim * f_hi,
        family=fam,
        params={"mu_x": mu_x, "b": b, "dim": dim},
    )


def make_bilinear(dim: int = 1, box: Box = Box()) -> ObjectiveProblem:
    """Pure bilinear coupling f = <x, y>, used for integrator calibration.

    Carries no curvature on either side (mu_x = mu_y = 0) and no oracles, so
    Lyapunov columns are absent; the y-side PL certificate passes trivially.
    """
    if dim < 1:
        raise ConfigurationError("dim must be >= 1")
    fam = SeparableFamily(0.0, 0.0, 1.0, 0.0, 0.0)
    return ObjectiveProblem(
        name="bilinear",
        m=dim, n=dim,
        eval_f=lambda x, y: family_eval(fam, x, y),
        grad_x=lambda x, y: family_grad_x(fam, x, y),
        grad_y=lambda x, y: family_grad_y(fam, x, y),
        constants=SmoothnessConstants(L_x=0.0, L_y=0.0, L_xy=1.0),
        regime=RegimeTag.NONCONVEX_PL,
        box=box,
        family=fam,
        params={"dim": dim},
    )


@dataclass
class CertificateRecord:
    """Outcome of a numerical certificate over the certification box."""

    kind: str
    problem: str
    box: tuple
    passed: bool
    details: dict
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "problem": self.problem,
            "box": list(self.box),
            "passed": bool(self.passed),
            "details": self.details,
            "notes": list(self.notes),
        }


_DEFAULT_PL_SIDES = {
    RegimeTag.TWO_SIDED_PL: ("x", "y"),
    RegimeTag.NONCONVEX_PL: ("y",),
    RegimeTag.NONCONVEX_STRONGLY_CONCAVE: ("y",),
    RegimeTag.STRONGLY_CONVEX_NONCONCAVE: ("x",),
}


def certify_pl(problem: ObjectiveProblem, box: Optional[Box] = None,
               grid_points_per_axis: int = 21,
               sides: Optional[tuple] = None) -> CertificateRecord:
    """Grid-check the declared PL inequalities 2*mu*gap <= ||grad||^2.

    Reports, per side, the maximum violation max(2*mu*gap - ||grad||^2) over
    the grid.  The certificate is a finite-box check, not a global proof; the
    box is recorded in the record.  Built-in problems have unique inner
    maximizers, so the projection onto the solution set is the oracle point.
    """
    box = box or problem.box
    if sides is None:
        sides = _DEFAULT_PL_SIDES[problem.regime]
    axes = [box.grid(grid_points_per_axis)] * (problem.m + problem.n)
    details: dict = {}
    passed = True
    for side in sides:
        mu = problem.constants.mu_y if side == "y" else problem.constants.mu_x
        if mu == 0.0:
            # Left side is 0 * gap: the inequality is vacuous.
            details[side] = {"mu": 0.0, "max_violation": 0.0, "gap_scale": 0.0,
                             "passed": True, "trivial": True}
            continue
        if side == "y" and problem.max_oracle is None:
            raise UnsupportedCertificateError(
                "y-side PL certificate needs a max oracle")
        if side == "x" and problem.min_oracle is None:
            raise UnsupportedCertificateError(
                "x-side PL certificate needs a per-y minimizer oracle")
        worst = -math.inf
        scale = 0.0
        for point in itertools.product(*axes):
            x = np.array(point[:problem.m])
            y = np.array(point[problem.m:])
            fv = problem.eval_f(x, y)
            if side == "y":
                gap = problem.max_oracle.max_value(x) - fv
                g2 = float(np.sum(problem.grad_y(x, y) ** 2))
            else:
                gap = fv - problem.min_oracle.min_value(y)
                g2 = float(np.sum(problem.grad_x(x, y) ** 2))
            worst = max(worst, 2.0 * mu * gap - g2)
            scale = max(scale, abs(gap))
        ok = worst <= PL_CERT_RTOL * (1.0 + scale)
        passed = passed and ok
        details[side] = {"mu": mu, "max_violation": worst, "gap_scale": scale,
                         "passed": ok, "trivial": False}
    return CertificateRecord(
        kind="pl", problem=problem.name, box=(box.low, box.high),
        passed=passed, details=details,
        notes=["finite-box grid check; unique inner maximizer assumed"],
    )


def certify_lipschitz(problem: ObjectiveProblem, box: Optional[Box] = None,
                      samples: int = 200, seed: int = 0) -> CertificateRecord:
    """Sampled check of the declared gradient Lipschitz constants.

    Draws deterministic pseudo-random point pairs in the box and reports the
    empirical maxima of ||grad difference|| / (L_own * ||dx|| + L_xy * ||dy||)
    for both partial gradients.  Zero-distance pairs are skipped.
    """
    if samples < 2:
        raise ConfigurationError("samples must be >= 2")
    box = box or problem.box
    rng = np.random.default_rng(seed)
    c = problem.constants
    ratio_x = 0.0
    ratio_y = 0.0
    for _ in range(samples):
        x1, x2 = box.sample(rng, problem.m), box.sample(rng, problem.m)
        y1, y2 = box.sample(rng, problem.n), box.sample(rng, problem.n)
        dx = float(np.linalg.norm(x1 - x2))
        dy = float(np.linalg.norm(y1 - y2))
        if dx == 0.0 and dy == 0.0:
            continue
        num_x = float(np.linalg.norm(problem.grad_x(x1, y1) - problem.grad_x(x2, y2)))
        num_y = float(np.linalg.norm(problem.grad_y(x1, y1) - problem.grad_y(x2, y2)))
        den_x = c.L_x * dx + c.L_xy * dy
        den_y = c.L_xy * dx + c.L_y * dy
        if den_x > 0.0:
            ratio_x = max(ratio_x, num_x / den_x)
        elif num_x > 0.0:
            ratio_x = math.inf
        if den_y > 0.0:
            ratio_y = max(ratio_y, num_y / den_y)
        elif num_y > 0.0:
            ratio_y = math.inf
    limit = 1.0 + LIPSCHITZ_CERT_RTOL
    passed = ratio_x <= limit and ratio_y <= limit
    return CertificateRecord(
        kind="lipschitz", problem=problem.name, box=(box.low, box.high),
        passed=passed,
        details={"ratio_x": ratio_x, "ratio_y": ratio_y,
                 "samples": samples, "seed": seed},
    )


def inner_max_solve(problem: ObjectiveProblem, x: Vector, tol: float,
                    max_iter: int = 10 ** 6) -> tuple[Vector, float]:
    """Solve max_y f(x, y) by gradient ascent with step 1/L_y.

    Fallback for problems without a closed-form max oracle; requires the
    y-side to be PL or strongly concave.
    """
    if problem.regime is RegimeTag.STRONGLY_CONVEX_NONCONCAVE:
        raise ConfigurationError(
            "inner maximization is not available for a nonconcave y-side")
    c = problem.constants
    L = c.L_y if c.L_y > 0 else c.L_y + c.L_xy
    if L <= 0:
        raise ConfigurationError("no usable step size: L_y and L_xy are both 0")
    x = np.asarray(x, dtype=float)
    y = np.zeros(problem.n)
    step = 1.0 / L
    for _ in range(max_iter):
        g = problem.grad_y(x, y)
        if float(np.linalg.norm(g)) <= tol:
            return y, problem.eval_f(x, y)
        y = y + step * g
    gnorm = float(np.linalg.norm(problem.grad_y(x, y)))
    raise InnerMaxDidNotConverge(
        f"inner maximization did not reach tol={tol} within {max_iter} "
        f"iterations (final grad norm {gnorm:.3e})", grad_norm=gnorm)
