"""Simulation and numerical verification of continuous-time two-time-scale
gradient descent-ascent dynamics on smooth min-max problems."""

from .dynamics import (ConditionNumber, Orientation, StepSizes,
                       condition_number, gdad_field, schedule_for_regime,
                       schedule_identities, stepsizes_nc_sc,
                       stepsizes_one_sided_pl, stepsizes_sc_nc,
                       stepsizes_two_sided_pl)
from .errors import (ConfigurationError, ConstantOrderingError,
                     DivergenceError, FieldEvaluationError, GdadError,
                     InnerMaxDidNotConverge, InsufficientDataError,
                     MissingOracleError, ScheduleError,
                     UnsupportedCertificateError)
from .integrate import (IntegratorConfig, RichardsonEstimate, State,
                        Trajectory, auto_dt, integrate, richardson_check,
                        step_rk4, write_trajectory_csv)
from .lyapunov import (LyapunovRates, LyapunovValues, audit_fd_step_limit,
                       dv_dt_fd, lyapunov_eval, max_gap)
from .problems import (Box, CertificateRecord, MaxOracle, MinOracle,
                       ObjectiveProblem, RegimeTag, SeparableFamily,
                       SmoothnessConstants, certify_lipschitz, certify_pl,
                       inner_max_solve, make_bilinear, make_nc_pl_problem,
                       make_nc_sc_problem, make_quadratic_saddle,
                       make_sc_nc_problem)
from .verify import (GradCheckReport, LemmaAuditReport, RateReport,
                     audit_lemma, check_exponential_bound,
                     check_min_gradnorm_bound, gradcheck)

__version__ = "0.1.0"

__all__ = [
    "Box", "CertificateRecord", "ConditionNumber", "ConfigurationError",
    "ConstantOrderingError", "DivergenceError", "FieldEvaluationError",
    "GdadError", "GradCheckReport", "InnerMaxDidNotConverge",
    "InsufficientDataError", "IntegratorConfig", "LemmaAuditReport",
    "LyapunovRates", "LyapunovValues", "MaxOracle", "MinOracle",
    "MissingOracleError", "ObjectiveProblem", "Orientation", "RateReport",
    "RegimeTag", "RichardsonEstimate", "ScheduleError", "SeparableFamily",
    "SmoothnessConstants", "State", "StepSizes", "Trajectory",
    "UnsupportedCertificateError", "audit_fd_step_limit", "audit_lemma",
    "auto_dt", "certify_lipschitz", "certify_pl", "check_exponential_bound",
    "check_min_gradnorm_bound", "condition_number", "dv_dt_fd", "gdad_field",
    "gradcheck", "inner_max_solve", "integrate", "lyapunov_eval", "max_gap",
    "make_bilinear", "make_nc_pl_problem", "make_nc_sc_problem",
    "make_quadratic_saddle", "make_sc_nc_problem", "richardson_check",
    "schedule_for_regime", "schedule_identities", "step_rk4",
    "stepsizes_nc_sc", "stepsizes_one_sided_pl", "stepsizes_sc_nc",
    "stepsizes_two_sided_pl", "write_trajectory_csv",
]
