"""Experiment runner: integrates a configured problem, runs the enabled
checks and emits a trajectory CSV, a JSON report and SVG plots.

Exit codes: 0 all enabled checks pass, 1 a check failed, 2 configuration
error (nothing written), 3 integration divergence.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify
from .dynamics import (Orientation, StepSizes, schedule_for_regime,
                       schedule_identities)
from .errors import DivergenceError, GdadError
from .integrate import (IntegratorConfig, Trajectory, auto_dt, integrate,
                        richardson_check, write_trajectory_csv)
from .lyapunov import audit_fd_step_limit
from .problems import (ObjectiveProblem, RegimeTag, certify_lipschitz,
                       certify_pl, make_bilinear, make_nc_pl_problem,
                       make_nc_sc_problem, make_quadratic_saddle,
                       make_sc_nc_problem)
from .svg import line_chart_svg

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

LEMMA_PASS_FRACTION = 0.99
# Default recorded-sample spacing; keeps the running-min gradient curve
# resolved.
DEFAULT_RECORD_SPACING = 1e-2
AUDIT_HORIZON = 3.0

ALL_CHECKS = ("rate", "lemmas", "certificates", "gradcheck")

_RATE_CHECK = {
    RegimeTag.TWO_SIDED_PL: "thm1",
    RegimeTag.NONCONVEX_PL: "thm2",
    RegimeTag.NONCONVEX_STRONGLY_CONCAVE: "thm3",
    RegimeTag.STRONGLY_CONVEX_NONCONCAVE: "thm4",
}
_LEMMA_FOR_REGIME = {
    RegimeTag.TWO_SIDED_PL: "lem2",
    RegimeTag.NONCONVEX_PL: "lem3",
    RegimeTag.NONCONVEX_STRONGLY_CONCAVE: "lem4",
    RegimeTag.STRONGLY_CONVEX_NONCONCAVE: "lem5",
}


@dataclass
class ExperimentConfig:
    problem: str
    params: dict = field(default_factory=dict)
    regime: str | None = None
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    horizon: float = 10.0
    dt: float | str = "auto"
    method: str = "rk4"
    record_every: int | None = None
    x0: list | None = None
    y0: list | None = None
    seed: int = 0
    out: str | None = None
    checks: tuple = ALL_CHECKS

    @property
    def off_schedule(self) -> bool:
        return any(v is not None for v in (self.alpha, self.beta, self.gamma))

    def canonical(self) -> str:
        d = {k: getattr(self, k) for k in (
            "problem", "params", "regime", "alpha", "beta", "gamma",
            "horizon", "dt", "method", "record_every", "x0", "y0", "seed")}
        d["checks"] = list(self.checks)
        return json.dumps(d, sort_keys=True)

    @property
    def run_id(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]


def build_problem(name: str, params: dict) -> ObjectiveProblem:
    dim = int(params.get("dim", 1))
    if name == "quadratic-saddle":
        return make_quadratic_saddle(params.get("mu_x", 1.0),
                                     params.get("mu_y", 1.0),
                                     params.get("b", 2.0), dim=dim)
    if name == "nc-pl":
        return make_nc_pl_problem(params.get("mu_y", 1.0),
                                  params.get("b", 1.0), dim=dim)
    if name == "nc-sc":
        return make_nc_sc_problem(params.get("mu_y", 1.0),
                                  params.get("b", 1.0), dim=dim)
    if name == "sc-nc":
        return make_sc_nc_problem(params.get("mu_x", 1.0),
                                  params.get("b", 1.0), dim=dim)
    if name == "bilinear":
        return make_bilinear(dim=dim)
    raise GdadError(f"unknown problem {name!r}")


def _resolve_steps(cfg: ExperimentConfig, problem: ObjectiveProblem) -> StepSizes:
    if cfg.off_schedule:
        if cfg.alpha is None or cfg.beta is None:
            raise GdadError("off-schedule runs must set both --alpha and --beta")
        gamma = cfg.gamma if cfg.gamma is not None else 1.0
        orient = Orientation.FAST_Y if cfg.beta >= cfg.alpha else Orientation.FAST_X
        return StepSizes(alpha=cfg.alpha, beta=cfg.beta, gamma=gamma,
                         orientation=orient)
    return schedule_for_regime(problem.regime, problem.constants)


def _initial_state(cfg: ExperimentConfig, problem: ObjectiveProblem):
    rng = np.random.default_rng(cfg.seed)
    if cfg.x0 is not None:
        x0 = np.asarray(cfg.x0, dtype=float)
    else:
        x0 = problem.box.sample(rng, problem.m)
    if cfg.y0 is not None:
        y0 = np.asarray(cfg.y0, dtype=float)
    else:
        y0 = problem.box.sample(rng, problem.n)
    return x0, y0


def _audit_trajectory(problem, steps, x0, y0) -> Trajectory:
    """Short fine-grid run whose sample spacing meets the FD audit limit."""
    limit = audit_fd_step_limit(problem.constants, steps)
    return integrate(problem, steps, x0, y0,
                     IntegratorConfig(horizon=AUDIT_HORIZON, dt=limit,
                                      record_every=1))


def run_experiment(cfg: ExperimentConfig, outdir: Path) -> tuple[int, dict]:
    """Execute one configured run into ``outdir``; returns (exit_code, report)."""
    problem = build_problem(cfg.problem, cfg.params)
    if cfg.regime is not None and cfg.regime != problem.regime.value:
        raise GdadError(
            f"--regime {cfg.regime} does not match problem regime "
            f"{problem.regime.value}")
    steps = _resolve_steps(cfg, problem)
    x0, y0 = _initial_state(cfg, problem)
    dt_req = auto_dt(problem, steps) if cfg.dt == "auto" else float(cfg.dt)
    record_every = cfg.record_every
    if record_every is None:
        record_every = max(1, int(DEFAULT_RECORD_SPACING / dt_req))
    iconfig = IntegratorConfig(horizon=cfg.horizon, dt=dt_req,
                               record_every=record_every, method=cfg.method)

    report: dict = {
        "run_id": cfg.run_id,
        "problem": problem.name,
        "regime": problem.regime.value,
        "steps": {"alpha": steps.alpha, "beta": steps.beta,
                  "gamma": steps.gamma,
                  "orientation": steps.orientation.value},
        "integrator": {"method": cfg.method, "dt": None,
                       "T": cfg.horizon, "budget": 0.0},
        "certificates": [],
        "rate_checks": [],
        "lemma_audits": [],
        "pass": False,
        "off_schedule": cfg.off_schedule,
        "seed": cfg.seed,
        "x0": [float(v) for v in x0],
        "y0": [float(v) for v in y0],
    }
    outdir.mkdir(parents=True, exist_ok=True)

    try:
        traj = integrate(problem, steps, x0, y0, iconfig)
    except DivergenceError as exc:
        if exc.trajectory is not None and exc.trajectory.n_samples:
            report["integrator"]["dt"] = exc.trajectory.dt
        report["divergence"] = str(exc)
        (outdir / "report.json").write_text(json.dumps(report, indent=2))
        return EXIT_DIVERGED, report
    report["integrator"]["dt"] = traj.dt

    budget = 0.0
    if cfg.method == "rk4":
        rich = richardson_check(problem, steps, x0, y0, iconfig)
        budget = rich.max_discrepancy
    report["integrator"]["budget"] = budget

    failures = []
    checks = cfg.checks

    if "certificates" in checks:
        for record in (certify_pl(problem), certify_lipschitz(problem)):
            report["certificates"].append(record.to_dict())
            if not record.passed:
                failures.append(f"certificate:{record.kind}")

    if "gradcheck" in checks:
        gc = verify.gradcheck(problem, seed=cfg.seed)
        report["gradcheck"] = gc.to_dict()
        if not gc.passed:
            failures.append("gradcheck")

    if "rate" in checks:
        if cfg.off_schedule:
            report["rate_checks_skipped"] = "off-schedule step sizes"
        elif not traj.has_lyapunov:
            report["rate_checks_skipped"] = "no Lyapunov oracles for this problem"
        else:
            thm = _RATE_CHECK[problem.regime]
            if thm == "thm1":
                rr = verify.check_exponential_bound(traj, budget=budget)
            else:
                rr = verify.check_min_gradnorm_bound(traj, thm, budget=budget)
            report["rate_checks"].append(rr.to_dict())
            if not rr.passed:
                failures.append(f"rate:{thm}")
            report["schedule_identities"] = schedule_identities(
                problem.regime, problem.constants)

    if "lemmas" in checks and not cfg.off_schedule and traj.has_lyapunov:
        lemma = _LEMMA_FOR_REGIME[problem.regime]
        limit = audit_fd_step_limit(problem.constants, steps)
        if traj.sample_spacing > limit and traj.n_samples >= 2:
            audit_traj = _audit_trajectory(problem, steps, x0, y0)
            aux = {"auxiliary_run": True, "dt": audit_traj.dt,
                   "T": AUDIT_HORIZON}
        else:
            audit_traj, aux = traj, {"auxiliary_run": False}
        la = verify.audit_lemma(audit_traj, lemma, budget=budget)
        entry = la.to_dict()
        entry["extras"].update(aux)
        report["lemma_audits"].append(entry)
        if la.fraction_satisfied < LEMMA_PASS_FRACTION:
            failures.append(f"lemma:{lemma}")

    if problem.name == "bilinear" or (cfg.off_schedule and cfg.alpha == cfg.beta):
        z0 = math.hypot(float(np.linalg.norm(x0)), float(np.linalg.norm(y0)))
        norms = np.sqrt(np.sum(traj.xs ** 2, axis=1) + np.sum(traj.ys ** 2, axis=1))
        report["conservation_drift"] = float(np.max(np.abs(norms - z0)))

    report["pass"] = not failures
    report["failures"] = failures

    write_trajectory_csv(traj, outdir / "trajectory.csv")
    _write_plots(traj, report, outdir)
    (outdir / "report.json").write_text(json.dumps(report, indent=2))
    return (EXIT_OK if not failures else EXIT_CHECK_FAILED), report


def _write_plots(traj: Trajectory, report: dict, outdir: Path) -> None:
    for rc in report.get("rate_checks", []):
        if rc["theorem_id"] == "thm1":
            line_chart_svg(
                outdir / "lyapunov_decay.svg",
                "Coupled Lyapunov value vs. theoretical envelope",
                [("measured v(t)", rc["ts"], rc["measured_values"]),
                 ("envelope", rc["ts"], rc["bound_values"])],
                xlabel="t", ylabel="v", ylog=True)
        else:
            ts = traj.ts[1:]
            stacked = np.hypot(traj.gx_norms, traj.gy_norms)
            running = np.minimum.accumulate(stacked)[1:]
            line_chart_svg(
                outdir / "gradnorm_bound.svg",
                "Running-min gradient norm vs. 1/sqrt(T) bound",
                [("running min ||grad||", ts, running),
                 ("bound", rc["ts"], rc["bound_values"])],
                xlabel="T", ylabel="gradient norm", ylog=True)
    if "conservation_drift" in report and traj.n_samples > 1:
        norms = np.sqrt(np.sum(traj.xs ** 2, axis=1) + np.sum(traj.ys ** 2, axis=1))
        line_chart_svg(
            outdir / "norm_drift.svg", "State norm along the flow",
            [("||z(t)||", traj.ts, norms)], xlabel="t", ylabel="norm")


def _canonical_suite_runs() -> list[tuple[str, ExperimentConfig]]:
    return [
        ("thm1-two-sided-pl", ExperimentConfig(
            problem="quadratic-saddle",
            params={"mu_x": 1.0, "mu_y": 1.0, "b": 2.0},
            horizon=200.0, dt=1e-3, x0=[1.0], y0=[1.0])),
        ("thm2-one-sided-pl", ExperimentConfig(
            problem="nc-pl", params={"mu_y": 1.0, "b": 1.0},
            horizon=400.0, x0=[1.0], y0=[1.0])),
        ("thm3-nc-sc", ExperimentConfig(
            problem="nc-sc", params={"mu_y": 1.0, "b": 1.0},
            horizon=400.0, x0=[1.0], y0=[1.0])),
        ("thm4-sc-nc", ExperimentConfig(
            problem="sc-nc", params={"mu_x": 1.0, "b": 1.0},
            horizon=400.0, x0=[1.0], y0=[1.0])),
    ]


def run_suite(preset: str, out_root: Path, workers: int = 4) -> tuple[int, dict]:
    if preset == "all-theorems":
        runs = _canonical_suite_runs()
        summary = {"preset": preset, "runs": [], "pass": True}
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                name: pool.submit(run_experiment, cfg, out_root / name)
                for name, cfg in runs
            }
            for name, fut in futures.items():
                code, report = fut.result()
                summary["runs"].append({"name": name,
                                        "run_id": report["run_id"],
                                        "exit": code,
                                        "pass": report["pass"]})
                summary["pass"] = summary["pass"] and code == EXIT_OK
        summary["runs"].sort(key=lambda r: r["name"])
    elif preset == "calibration":
        summary = {"preset": preset, "gradchecks": [], "certificates": [],
                   "pass": True}
        builtins = [
            build_problem("quadratic-saddle", {"mu_x": 1.0, "mu_y": 1.0, "b": 2.0}),
            build_problem("nc-pl", {"mu_y": 1.0, "b": 1.0}),
            build_problem("nc-sc", {"mu_y": 1.0, "b": 1.0}),
            build_problem("sc-nc", {"mu_x": 1.0, "b": 1.0}),
            build_problem("bilinear", {}),
        ]
        for problem in builtins:
            gc = verify.gradcheck(problem)
            summary["gradchecks"].append({"problem": problem.name,
                                          **gc.to_dict()})
            summary["pass"] = summary["pass"] and gc.passed
            for record in (certify_pl(problem), certify_lipschitz(problem)):
                summary["certificates"].append(record.to_dict())
                summary["pass"] = summary["pass"] and record.passed
        out_root.mkdir(parents=True, exist_ok=True)
        code, report = run_experiment(
            ExperimentConfig(problem="bilinear", alpha=1.0, beta=1.0,
                             horizon=100.0, dt=1e-3, x0=[1.0], y0=[0.0],
                             checks=("certificates", "gradcheck")),
            out_root / "bilinear-conservation")
        drift_ok = (code == EXIT_OK
                    and report.get("conservation_drift", math.inf) <= 1e-8)
        summary["conservation"] = {"drift": report.get("conservation_drift"),
                                   "passed": drift_ok}
        summary["pass"] = summary["pass"] and drift_ok
    else:
        raise GdadError(f"unknown preset {preset!r}")
    out_root.mkdir(parents=True, exist_ok=True)
    (out_root / "summary.json").write_text(json.dumps(summary, indent=2))
    return (EXIT_OK if summary["pass"] else EXIT_CHECK_FAILED), summary


def _parse_vector(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _load_config_file(path: str) -> dict:
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise GdadError(f"malformed config line: {line!r}")
        key, val = line.split("=", 1)
        values[key.strip()] = val.strip()
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdadlab",
        description="Simulate descent-ascent dynamics and verify rate bounds")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--config", help="key=value config file; flags override")
    run.add_argument("--problem", choices=["quadratic-saddle", "nc-pl",
                                           "nc-sc", "sc-nc", "bilinear"])
    run.add_argument("--regime")
    run.add_argument("--mu-x", type=float, dest="mu_x")
    run.add_argument("--mu-y", type=float, dest="mu_y")
    run.add_argument("--b", type=float)
    run.add_argument("--dim", type=int, default=1)
    run.add_argument("--alpha", type=float)
    run.add_argument("--beta", type=float)
    run.add_argument("--gamma", type=float)
    run.add_argument("--T", type=float, dest="horizon", default=10.0)
    run.add_argument("--dt", default="auto")
    run.add_argument("--method", choices=["rk4", "rk45"], default="rk4")
    run.add_argument("--record-every", type=int, dest="record_every")
    run.add_argument("--x0")
    run.add_argument("--y0")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out")
    run.add_argument("--checks", default="all")

    suite = sub.add_parser("suite", help="run a preset experiment suite")
    suite.add_argument("preset", choices=["all-theorems", "calibration"])
    suite.add_argument("--out")
    suite.add_argument("--workers", type=int, default=4)
    return parser


def _out_root(explicit: str | None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get("GDAD_OUT", "gdadlab-out"))


def _config_from_args(args) -> ExperimentConfig:
    raw: dict = {}
    if args.config:
        raw = _load_config_file(args.config)

    def pick(name, cast, default=None):
        cli_val = getattr(args, name, None)
        if cli_val is not None:
            return cli_val
        if name in raw:
            return cast(raw[name])
        return default

    problem = pick("problem", str)
    if problem is None:
        raise GdadError("--problem is required")
    params = {}
    for key, cast in (("mu_x", float), ("mu_y", float), ("b", float),
                      ("dim", int)):
        val = pick(key, cast)
        if val is not None:
            params[key] = val
    dt = pick("dt", str, "auto")
    if dt != "auto":
        dt = float(dt)
    horizon = float(pick("horizon", float, 10.0))
    if horizon < 0:
        raise GdadError(f"T must be >= 0, got {horizon}")
    checks_raw = pick("checks", str, "all")
    if checks_raw == "all":
        checks = ALL_CHECKS
    elif checks_raw == "none":
        checks = ()
    else:
        checks = tuple(tok.strip() for tok in checks_raw.split(",") if tok.strip())
        unknown = set(checks) - set(ALL_CHECKS)
        if unknown:
            raise GdadError(f"unknown checks: {sorted(unknown)}")
    x0 = pick("x0", str)
    y0 = pick("y0", str)
    return ExperimentConfig(
        problem=problem,
        params=params,
        regime=pick("regime", str),
        alpha=pick("alpha", float),
        beta=pick("beta", float),
        gamma=pick("gamma", float),
        horizon=horizon,
        dt=dt,
        method=pick("method", str, "rk4"),
        record_every=pick("record_every", int),
        x0=_parse_vector(x0) if isinstance(x0, str) else x0,
        y0=_parse_vector(y0) if isinstance(y0, str) else y0,
        seed=int(pick("seed", int, 0)),
        out=pick("out", str),
        checks=checks,
    )


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = _config_from_args(args)
            # Validate problem/steps before creating any output files.
            problem = build_problem(cfg.problem, cfg.params)
            if cfg.regime is not None and cfg.regime != problem.regime.value:
                raise GdadError(
                    f"--regime {cfg.regime} does not match problem regime "
                    f"{problem.regime.value}")
            _resolve_steps(cfg, problem)
            outdir = _out_root(cfg.out)
            if cfg.out is None:
                outdir = outdir / f"run-{cfg.run_id}"
            code, report = run_experiment(cfg, outdir)
            print(json.dumps({"run_id": report["run_id"],
                              "pass": report["pass"],
                              "out": str(outdir)}, indent=2))
            return code
        preset = args.preset
        out_root = _out_root(args.out) / preset
        code, summary = run_suite(preset, out_root, workers=args.workers)
        print(json.dumps({"preset": preset, "pass": summary["pass"],
                          "out": str(out_root)}, indent=2))
        return code
    except GdadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
