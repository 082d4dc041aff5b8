"""Deterministic ODE integration of the descent-ascent field.

Fixed-step classical RK4 is the default and the method all reports are based
on; an embedded adaptive pair (scipy's RK45) is available for stiff
off-schedule runs.  Trajectories are recorded on a uniform grid: the requested
step is shrunk (never grown) so the horizon is hit exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _fastpath
from .dynamics import StepSizes, gdad_field
from .errors import ConfigurationError, DivergenceError, MissingOracleError
from .lyapunov import lyapunov_eval
from .problems import ObjectiveProblem

DIVERGENCE_LIMIT = _fastpath.DIVERGENCE_LIMIT


@dataclass(frozen=True)
class State:
    t: float
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class IntegratorConfig:
    horizon: float
    dt: float | str = "auto"
    record_every: int = 1
    method: str = "rk4"
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12

    def __post_init__(self):
        if not math.isfinite(self.horizon) or self.horizon < 0:
            raise ConfigurationError(f"horizon must be >= 0, got {self.horizon}")
        if self.dt != "auto":
            if not (isinstance(self.dt, (int, float)) and self.dt > 0):
                raise ConfigurationError(f"dt must be positive or 'auto', got {self.dt}")
            if self.horizon > 0 and self.dt > self.horizon:
                raise ConfigurationError("dt must not exceed the horizon")
        if self.record_every < 1:
            raise ConfigurationError("record_every must be >= 1")
        if self.method not in ("rk4", "rk45"):
            raise ConfigurationError(f"unknown method {self.method!r}")


def auto_dt(problem: ObjectiveProblem, steps: StepSizes) -> float:
    """Step tied to the field's Lipschitz scale so the fast time scale is
    resolved."""
    c = problem.constants
    rate = steps.beta * (c.L_y + c.L_xy) + steps.alpha * (c.L_x + c.L_xy)
    return min(1e-2, 0.1 / (rate + 1.0))


@dataclass
class Trajectory:
    """Recorded samples of one integration with per-sample diagnostics.

    Lyapunov columns are present only when the regime's oracles exist
    (``has_lyapunov``); the column arrays are None otherwise.
    """

    problem: ObjectiveProblem
    steps: StepSizes
    config: IntegratorConfig
    dt: float
    ts: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    gx_norms: Optional[np.ndarray] = None
    gy_norms: Optional[np.ndarray] = None
    v1s: Optional[np.ndarray] = None
    v2s: Optional[np.ndarray] = None
    vs: Optional[np.ndarray] = None
    has_lyapunov: bool = False

    @property
    def problem_id(self) -> str:
        return self.problem.name

    @property
    def n_samples(self) -> int:
        return len(self.ts)

    @property
    def sample_spacing(self) -> float:
        if self.n_samples < 2:
            return 0.0
        return float(self.ts[1] - self.ts[0])

    def state(self, i: int) -> State:
        return State(float(self.ts[i]), self.xs[i].copy(), self.ys[i].copy())


def step_rk4(problem: ObjectiveProblem, steps: StepSizes, state: State,
             dt: float) -> State:
    """One classical fourth-order step of the descent-ascent field."""
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    x, y = state.x, state.y
    kx1, ky1 = gdad_field(problem, x, y, steps)
    kx2, ky2 = gdad_field(problem, x + 0.5 * dt * kx1, y + 0.5 * dt * ky1, steps)
    kx3, ky3 = gdad_field(problem, x + 0.5 * dt * kx2, y + 0.5 * dt * ky2, steps)
    kx4, ky4 = gdad_field(problem, x + dt * kx3, y + dt * ky3, steps)
    xn = x + (dt / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4)
    yn = y + (dt / 6.0) * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4)
    if not (np.all(np.isfinite(xn)) and np.all(np.isfinite(yn))):
        raise DivergenceError("non-finite RK4 stage", last_state=state)
    return State(state.t + dt, xn, yn)


def _recorded_steps(n_steps: int, record_every: int) -> np.ndarray:
    rec = list(range(0, n_steps + 1, record_every))
    if rec[-1] != n_steps:
        rec.append(n_steps)
    return np.asarray(rec, dtype=np.int64)


def _resolve_grid(problem: ObjectiveProblem, steps: StepSizes,
                  config: IntegratorConfig) -> tuple[float, int]:
    T = config.horizon
    if T == 0.0:
        return 0.0, 0
    dt_req = auto_dt(problem, steps) if config.dt == "auto" else float(config.dt)
    n_steps = max(1, math.ceil(T / dt_req - 1e-9))
    return T / n_steps, n_steps


def integrate(problem: ObjectiveProblem, steps: StepSizes,
              x0: np.ndarray, y0: np.ndarray, config: IntegratorConfig,
              diagnostics: bool = True) -> Trajectory:
    """Integrate from (x0, y0) over the configured horizon.

    Raises DivergenceError (with the partial trajectory attached) if any
    coordinate leaves the finite region.
    """
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if x0.shape != (problem.m,) or y0.shape != (problem.n,):
        raise ConfigurationError(
            f"initial state dims {x0.shape}/{y0.shape} do not match problem "
            f"({problem.m}, {problem.n})")
    dt, n_steps = _resolve_grid(problem, steps, config)
    if n_steps == 0:
        traj = Trajectory(problem, steps, config, dt,
                          ts=np.zeros(1),
                          xs=x0[None, :].copy(), ys=y0[None, :].copy())
        if diagnostics:
            _fill_diagnostics(traj)
        return traj
    rec_steps = _recorded_steps(n_steps, config.record_every)
    ts = rec_steps * dt
    diverged_at = 0
    if config.method == "rk45":
        zs = _run_rk45(problem, steps, x0, y0, ts, config)
        ri = len(ts)
    elif problem.family is not None and problem.m == problem.n:
        fam = problem.family
        z0 = np.concatenate([x0, y0])
        rec = np.empty((len(rec_steps), problem.m + problem.n))
        diverged_at, ri = _fastpath.rk4_family(
            z0, problem.m, problem.n,
            fam.quad_x, fam.trig_x, fam.bilinear, fam.quad_y, fam.trig_y,
            steps.alpha, steps.beta, dt, n_steps, config.record_every, rec)
        zs = rec
    else:
        zs = np.empty((len(rec_steps), problem.m + problem.n))
        diverged_at, ri = _run_python_rk4(
            problem, steps, x0, y0, dt, n_steps, config.record_every, zs)
    zs = zs[:ri]
    ts = ts[:ri]
    if diverged_at:
        # Keep only finite samples in the partial trajectory.
        finite = np.all(np.isfinite(zs), axis=1)
        zs, ts = zs[finite], ts[finite]
    traj = Trajectory(problem, steps, config, dt,
                      ts=ts, xs=zs[:, :problem.m].copy(),
                      ys=zs[:, problem.m:].copy())
    if diverged_at:
        raise DivergenceError(
            f"trajectory diverged at step {diverged_at} (t={diverged_at * dt:.6g})",
            trajectory=traj,
            last_state=traj.state(traj.n_samples - 1) if traj.n_samples else None)
    if diagnostics:
        _fill_diagnostics(traj)
    return traj


def _run_python_rk4(problem, steps, x0, y0, dt, n_steps, record_every, zs):
    state = State(0.0, x0.copy(), y0.copy())
    zs[0, :problem.m] = state.x
    zs[0, problem.m:] = state.y
    ri = 1
    for step in range(1, n_steps + 1):
        state = step_rk4(problem, steps, state, dt)
        bad = (np.max(np.abs(state.x)) > DIVERGENCE_LIMIT
               or np.max(np.abs(state.y)) > DIVERGENCE_LIMIT)
        if step % record_every == 0 or step == n_steps:
            zs[ri, :problem.m] = state.x
            zs[ri, problem.m:] = state.y
            ri += 1
        if bad:
            return step, ri
    return 0, ri


def _run_rk45(problem, steps, x0, y0, ts, config):
    from scipy.integrate import solve_ivp

    m = problem.m

    def fun(_t, z):
        vx, vy = gdad_field(problem, z[:m], z[m:], steps)
        return np.concatenate([vx, vy])

    sol = solve_ivp(fun, (0.0, float(ts[-1])), np.concatenate([x0, y0]),
                    method="RK45", t_eval=ts,
                    rtol=config.rel_tol, atol=config.abs_tol)
    if not sol.success or not np.all(np.isfinite(sol.y)):
        raise DivergenceError(f"adaptive integration failed: {sol.message}")
    return sol.y.T.copy()


def _fill_diagnostics(traj: Trajectory) -> None:
    problem, steps = traj.problem, traj.steps
    k = traj.n_samples
    gx = np.empty(k)
    gy = np.empty(k)
    for i in range(k):
        gx[i] = float(np.linalg.norm(problem.grad_x(traj.xs[i], traj.ys[i])))
        gy[i] = float(np.linalg.norm(problem.grad_y(traj.xs[i], traj.ys[i])))
    traj.gx_norms = gx
    traj.gy_norms = gy
    try:
        first = lyapunov_eval(problem, traj.xs[0], traj.ys[0], steps)
    except MissingOracleError:
        traj.has_lyapunov = False
        return
    v1 = np.empty(k)
    v2 = np.empty(k)
    v = np.empty(k)
    v1[0], v2[0], v[0] = first.v1, first.v2, first.v
    for i in range(1, k):
        lv = lyapunov_eval(problem, traj.xs[i], traj.ys[i], steps)
        v1[i], v2[i], v[i] = lv.v1, lv.v2, lv.v
    traj.v1s, traj.v2s, traj.vs = v1, v2, v
    traj.has_lyapunov = True


@dataclass(frozen=True)
class RichardsonEstimate:
    """Integration error budget from a dt vs dt/2 self-comparison."""

    max_discrepancy: float
    dt: float
    n_shared: int


def richardson_check(problem: ObjectiveProblem, steps: StepSizes,
                     x0: np.ndarray, y0: np.ndarray,
                     config: IntegratorConfig) -> RichardsonEstimate:
    """Max state discrepancy over shared sample times between runs at dt and
    dt/2; used as the additive error budget in bound checks."""
    if config.method != "rk4":
        raise ConfigurationError("richardson_check requires the fixed-step method")
    coarse = integrate(problem, steps, x0, y0, config, diagnostics=False)
    if coarse.n_samples < 2:
        return RichardsonEstimate(0.0, coarse.dt, coarse.n_samples)
    fine_cfg = IntegratorConfig(
        horizon=config.horizon, dt=coarse.dt / 2.0,
        record_every=2 * config.record_every, method="rk4",
        rel_tol=config.rel_tol, abs_tol=config.abs_tol)
    fine = integrate(problem, steps, x0, y0, fine_cfg, diagnostics=False)
    if fine.n_samples != coarse.n_samples:
        raise ConfigurationError("richardson runs produced misaligned grids")
    dz = np.hstack([coarse.xs - fine.xs, coarse.ys - fine.ys])
    disc = float(np.max(np.linalg.norm(dz, axis=1)))
    return RichardsonEstimate(disc, coarse.dt, coarse.n_samples)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV with header t, x_0.., y_0.., gx_norm, gy_norm, v1, v2, v; floats at
    17 significant digits, absent Lyapunov columns as empty fields."""
    cols = (["t"]
            + [f"x_{i}" for i in range(traj.problem.m)]
            + [f"y_{j}" for j in range(traj.problem.n)]
            + ["gx_norm", "gy_norm", "v1", "v2", "v"])

    def fmt(v: float) -> str:
        return format(float(v), ".17g")

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(traj.n_samples):
            row = [fmt(traj.ts[i])]
            row += [fmt(v) for v in traj.xs[i]]
            row += [fmt(v) for v in traj.ys[i]]
            row += [fmt(traj.gx_norms[i]), fmt(traj.gy_norms[i])]
            if traj.has_lyapunov:
                row += [fmt(traj.v1s[i]), fmt(traj.v2s[i]), fmt(traj.vs[i])]
            else:
                row += ["", "", ""]
            fh.write(",".join(row) + "\n")
