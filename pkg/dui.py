"""Differentiation under the integral sign, checked against the classified formal integrand."""
import argparse
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

import config
from classify import ConvergenceVerdict, PartialIntegralTrace, build_trace, classify
from closedform import closed_form_b_derivative, closed_form_for
from common import AccuracyError, DomainError, IntegrandSpec, UsageError, log, require_tag, TRIGS
from oscquad import QuadratureConfig, integrate_segments, partial_integrals, uniform_grid

DECISIONS = ("interchange_valid", "interchange_invalid", "inconclusive")
CONTROL = "control"
PROBE_SOURCES = ("E5", "E6", CONTROL)

STEP_SCALE = 1e-5
LIMIT_SLACK = 1e-4
CONTROL_T_MAX = 60.0
PROBE_T, PROBE_T2, PROBE_POINTS = 20.0, 40.0, 8

# equation -> (formal-derivative linear trig, sign of d/db l(bx) = sign · x · l'(bx))
_FORMAL = {"E5": ("sin", -1.0), "E6": ("cos", 1.0)}


@dataclass
class DUIReport:
    source_eq: str
    quad_trig: str
    a: float
    b: float
    outer_derivative: float
    analytic_derivative: float
    formal_verdict: ConvergenceVerdict
    uniform_tail_sup: float
    decision: str
    reason: str = ""

    def __post_init__(self):
        require_tag("decision", self.decision, DECISIONS)
        if self.decision == "interchange_valid" and not self.formal_verdict.is_convergent:
            raise UsageError("A valid interchange needs a convergent formal integral.")

    @property
    def derivative_gap(self) -> float:
        return abs(self.outer_derivative - self.analytic_derivative)

    def to_dict(self) -> dict:
        return {
            "source_eq": self.source_eq,
            "quad_trig": self.quad_trig,
            "a": self.a,
            "b": self.b,
            "outer_derivative": self.outer_derivative,
            "analytic_derivative": self.analytic_derivative,
            "formal_verdict": self.formal_verdict.kind,
            "formal_limit": self.formal_verdict.to_dict()["limit_estimate"],
            "uniform_tail_sup": self.uniform_tail_sup,
            "decision": self.decision,
            "reason": self.reason,
        }

    def __str__(self):
        return "\n".join([
            f"family={self.source_eq} quad={self.quad_trig} a={self.a:g} b={self.b:g}",
            f"outer_derivative={self.outer_derivative:.17g}",
            f"analytic_derivative={self.analytic_derivative:.17g}",
            f"formal_verdict={self.formal_verdict.kind}",
            f"uniform_tail_sup={self.uniform_tail_sup:.6g}",
            f"decision={self.decision}",
            f"reason={self.reason}",
        ])


def central_difference(func, x: float, h: float) -> float:
    return (func(x + h) - func(x - h)) / (2.0 * h)


def formal_spec(source_eq: str, quad_trig: str, a: float, b: float):
    """(weight-x spec, sign) with d/db integrand = sign · spec integrand."""
    require_tag("source equation", source_eq, tuple(_FORMAL))
    lin, sign = _FORMAL[source_eq]
    return IntegrandSpec("x", quad_trig, lin, a, b), sign


def _control_integrand(b: float):
    return lambda x: -x * np.exp(-x) * np.sin(b * x)


def _control_partials(b: float, T_lo: float, Ts, cfg: QuadratureConfig):
    """∫_{T_lo}^{T} -x e^{-x} sin(bx) dx at each T of the increasing grid Ts."""
    Ts = np.asarray(Ts, dtype=float)
    width = min(0.25, 1.0 / max(b, 1.0))
    fine = np.arange(T_lo, Ts[-1], width)
    breaks = np.unique(np.concatenate(([T_lo], fine, Ts)))
    cum = integrate_segments(_control_integrand(b), breaks, cfg)
    return cum[np.searchsorted(breaks, Ts)]


def _decide(verdict: ConvergenceVerdict, outer: float, tol: float):
    if not verdict.is_convergent:
        return "interchange_invalid", f"formal integral is {verdict.kind}"
    gap = abs(verdict.limit_estimate - outer)
    if gap <= LIMIT_SLACK + tol:
        return "interchange_valid", f"formal limit within {gap:.3g} of the outer derivative"
    return "interchange_invalid", f"formal limit misses the outer derivative by {gap:.3g}"


def _inconclusive_report(source_eq, quad_trig, a, b, outer, analytic, error: AccuracyError) -> DUIReport:
    log.warn(f"DUI check for {source_eq} at b={b:g} is inconclusive: {error}")
    verdict = ConvergenceVerdict("Inconclusive", reason=str(error))
    return DUIReport(source_eq, quad_trig, a, b, outer, analytic, verdict, math.nan, "inconclusive", str(error))


def check_interchange(source_eq: str, quad_trig: str, a: float, b: float, cfg: QuadratureConfig,
                      T_max: float | None = None, n: int | None = None, tol: float | None = None) -> DUIReport:
    require_tag("source equation", source_eq, tuple(_FORMAL))
    require_tag("quadratic trig", quad_trig, TRIGS)
    if not (a > 0 and b > 0):
        raise DomainError(f"a and b must be positive, got a={a}, b={b}.")
    T_max = config.TRACE_T_MAX if T_max is None else T_max
    n = config.TRACE_SAMPLES if n is None else n
    tol = config.CLASSIFY_TOL if tol is None else tol

    outer = central_difference(lambda v: closed_form_for(source_eq, quad_trig, a, v).value, b, b * STEP_SCALE)
    analytic = closed_form_b_derivative(a, b, source_eq, quad_trig)

    spec, sign = formal_spec(source_eq, quad_trig, a, b)
    try:
        trace = build_trace(spec, T_max, n, "uniform_phase", cfg).scaled(sign)
        if trace.flagged:
            raise AccuracyError(f"formal trace of {spec.spec_id} exceeds tolerance", trace.p, trace.error_bound)
        verdict = classify(trace, tol, config.CLASSIFY_WINDOWS, cfg.acceleration_depth)
        tail = uniform_tail_probe(source_eq, quad_trig, a, 0.5 * b, 2.0 * b, PROBE_T, PROBE_T2, PROBE_POINTS, cfg)
    except AccuracyError as e:
        return _inconclusive_report(source_eq, quad_trig, a, b, outer, analytic, e)

    decision, reason = _decide(verdict, outer, tol)
    return DUIReport(source_eq, quad_trig, a, b, outer, analytic, verdict, tail, decision, reason)


def control_value(b: float) -> float:
    return 1.0 / (1.0 + b * b)


def control_derivative(b: float) -> float:
    return -2.0 * b / (1.0 + b * b) ** 2


def control_trace(b: float, cfg: QuadratureConfig, T_max: float = CONTROL_T_MAX, n: int | None = None) -> PartialIntegralTrace:
    Ts = uniform_grid(T_max, config.TRACE_SAMPLES if n is None else n)
    return PartialIntegralTrace(Ts, _control_partials(b, 0.0, Ts, cfg), f"control-b{b:g}", "uniform_T")


def check_interchange_control(b: float, cfg: QuadratureConfig, T_max: float = CONTROL_T_MAX,
                              n: int | None = None, tol: float | None = None) -> DUIReport:
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}.")
    tol = config.CLASSIFY_TOL if tol is None else tol

    outer = central_difference(control_value, b, b * STEP_SCALE)
    analytic = control_derivative(b)
    try:
        trace = control_trace(b, cfg, T_max, n)
        verdict = classify(trace, tol, config.CLASSIFY_WINDOWS, cfg.acceleration_depth)
        tail = uniform_tail_probe(CONTROL, "cos", 1.0, 0.5 * b, 2.0 * b, PROBE_T, PROBE_T2, PROBE_POINTS, cfg)
    except AccuracyError as e:
        return _inconclusive_report(CONTROL, "cos", 1.0, b, outer, analytic, e)

    decision, reason = _decide(verdict, outer, tol)
    return DUIReport(CONTROL, "cos", 1.0, b, outer, analytic, verdict, tail, decision, reason)


def _formal_tail(source_eq: str, quad_trig: str, a: float, b: float, T: float, T2: float, cfg: QuadratureConfig) -> float:
    if T2 == T:
        return 0.0
    if source_eq == CONTROL:
        return abs(float(_control_partials(b, T, [T2], cfg)[0]))
    spec, sign = formal_spec(source_eq, quad_trig, a, b)
    p = partial_integrals(spec, [T, T2], cfg)
    return abs(sign * (p[1] - p[0]))


def uniform_tail_probe(source_eq: str, quad_trig: str, a: float, b_lo: float, b_hi: float,
                       T: float, T2: float, n_b: int, cfg: QuadratureConfig) -> float:
    """sup over b in [b_lo, b_hi] of |∫_T^{T2} formal derivative integrand dx|."""
    require_tag("probe source", source_eq, PROBE_SOURCES)
    require_tag("quadratic trig", quad_trig, TRIGS)
    if not 0 < T <= T2:
        raise UsageError(f"Need 0 < T <= T2, got T={T}, T2={T2}.")
    if not 0 < b_lo < b_hi:
        raise UsageError(f"Need 0 < b_lo < b_hi, got ({b_lo}, {b_hi}).")
    if n_b < 8:
        raise UsageError(f"The b-grid needs at least 8 points, got {n_b}.")

    grid = np.linspace(b_lo, b_hi, n_b)
    with ThreadPoolExecutor(max_workers=config.thread_count()) as executor:
        tails = list(executor.map(lambda v: _formal_tail(source_eq, quad_trig, a, float(v), T, T2, cfg), grid))
    return float(max(tails))


def run(args):
    cfg = QuadratureConfig.from_config()
    if args.family == CONTROL:
        report = check_interchange_control(args.b, cfg)
    else:
        if args.quad is None or args.a is None:
            raise UsageError("--quad and --a are required for the E5/E6 families.")
        report = check_interchange(args.family, args.quad, args.a, args.b, cfg)
    print(report)
    if report.formal_verdict.limit_estimate is not None:
        print(f"formal_limit={report.formal_verdict.limit_estimate:.17g}")
    return 2 if report.decision == "inconclusive" else 0

def add_parser(subparsers):
    parser = subparsers.add_parser(
        "dui",
        help="Checks whether d/db may be taken under the integral sign.",
        formatter_class=argparse.RawTextHelpFormatter
    )
    parser.set_defaults(func=run)

    parser.add_argument("--family", choices=PROBE_SOURCES, required=True,
                        help="E5 / E6: the convergent families.\ncontrol: ∫ e^{-x} cos(bx) dx, where the interchange is valid.")
    parser.add_argument("--quad", choices=TRIGS, help="Trig applied to a·x² (E5/E6 only).")
    parser.add_argument("--a", type=float, help="Positive coefficient of x² (E5/E6 only).")
    parser.add_argument("--b", type=float, required=True, help="Positive coefficient of x.")

    return parser
