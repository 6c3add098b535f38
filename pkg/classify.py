"""Convergence verdicts from partial-integral traces over geometric windows [T/2^{k+1}, T/2^k]."""
import argparse
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

import config
from closedform import spec_for_equation
from common import EQUATIONS, AccuracyError, IntegrandSpec, UsageError, log, require_tag, TRIGS
from oscquad import (QuadratureConfig, boundary_term, iterated_average, partial_integrals,
                     phase_lattice, symmetric_decomposition, uniform_grid)

GRID_KINDS = ("uniform_T", "uniform_phase")
VERDICT_KINDS = ("Convergent", "DivergentBounded", "DivergentUnbounded", "Inconclusive")
MIN_TRACE_SAMPLES = 32
MIN_WINDOW_SAMPLES = 4
# rows of the pairwise distance matrix held at once
_DIAMETER_BLOCK = 256

GROWTH_FACTOR = 2.0
DECAY_FACTOR = 0.6
STEP_SLACK = 1.1
MEDIAN_SPREAD = 10.0


@dataclass
class PartialIntegralTrace:
    T: np.ndarray
    p: np.ndarray
    spec_id: str
    grid_kind: str = "uniform_phase"
    lag: int = 1
    error_bound: float = 0.0
    flagged: bool = False

    def __post_init__(self):
        require_tag("grid kind", self.grid_kind, GRID_KINDS)
        self.T = np.asarray(self.T, dtype=float)
        self.p = np.asarray(self.p)
        if self.T.ndim != 1 or self.T.shape != self.p.shape:
            raise UsageError("Trace T and p must be 1-D arrays of equal length.")
        if np.any(np.diff(self.T) <= 0):
            raise UsageError("Trace T values must be strictly increasing.")
        if self.lag < 1:
            raise UsageError(f"Trace lag must be >= 1, got {self.lag}.")

    def __len__(self):
        return self.T.size

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.p)

    def scaled(self, factor) -> "PartialIntegralTrace":
        return PartialIntegralTrace(self.T.copy(), self.p * factor, self.spec_id, self.grid_kind,
                                    self.lag, self.error_bound * abs(factor), self.flagged)

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator="\n")
            if self.is_complex:
                writer.writerow(["T", "p_re", "p_im"])
                for t, v in zip(self.T, self.p):
                    writer.writerow([f"{t:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
            else:
                writer.writerow(["T", "p_re"])
                for t, v in zip(self.T, self.p):
                    writer.writerow([f"{t:.17g}", f"{v:.17g}"])

    @classmethod
    def from_csv(cls, path, spec_id: str = "", grid_kind: str = "uniform_phase", lag: int = 1):
        with open(path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header not in (["T", "p_re"], ["T", "p_re", "p_im"]):
                raise UsageError(f"'{path}' is not a trace file (header {header}).")
            rows = [row for row in reader if row]
        T = [float(row[0]) for row in rows]
        if len(header) == 3:
            p = np.array([complex(float(row[1]), float(row[2])) for row in rows])
        else:
            p = np.array([float(row[1]) for row in rows])
        return cls(np.array(T), p, spec_id or Path(path).stem, grid_kind, lag)


@dataclass
class ConvergenceVerdict:
    kind: str
    limit_estimate: complex | float | None = None
    oscillation_envelope: float | None = None
    window_report: list = field(default_factory=list)
    reason: str = ""

    def __post_init__(self):
        require_tag("verdict", self.kind, VERDICT_KINDS)
        if (self.limit_estimate is not None) != (self.kind == "Convergent"):
            raise UsageError("A limit estimate is present exactly for Convergent verdicts.")
        if (self.oscillation_envelope is not None) != (self.kind == "DivergentBounded"):
            raise UsageError("An envelope is present exactly for DivergentBounded verdicts.")

    @property
    def is_convergent(self) -> bool:
        return self.kind == "Convergent"

    def to_dict(self) -> dict:
        limit = self.limit_estimate
        if isinstance(limit, complex):
            limit = [limit.real, limit.imag]
        return {
            "kind": self.kind,
            "limit_estimate": limit,
            "oscillation_envelope": self.oscillation_envelope,
            "windows": [{"t_lo": lo, "t_hi": hi, "samples": count,
                         "oscillation": osc if math.isfinite(osc) else None}
                        for lo, hi, count, osc in self.window_report],
            "reason": self.reason,
        }

    def __str__(self):
        lines = [f"verdict={self.kind}"]
        if self.limit_estimate is not None:
            lines.append(f"limit_estimate={_format_value(self.limit_estimate)}")
        if self.oscillation_envelope is not None:
            lines.append(f"oscillation_envelope={self.oscillation_envelope:.6g}")
        if self.reason:
            lines.append(f"reason={self.reason}")
        for lo, hi, count, osc in self.window_report:
            lines.append(f"  window [{lo:10.5g}, {hi:10.5g}]  n={count:5d}  oscillation={osc:.6g}")
        return "\n".join(lines)


def _format_value(value) -> str:
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return f"{value:.17g}"


def build_trace(spec: IntegrandSpec, T_max: float, n: int, grid_kind: str, cfg: QuadratureConfig) -> PartialIntegralTrace:
    require_tag("grid kind", grid_kind, GRID_KINDS)
    if grid_kind == "uniform_phase":
        Ts, lag = phase_lattice(spec.a, T_max, n)
    else:
        Ts, lag = uniform_grid(T_max, n), 1

    try:
        p = partial_integrals(spec, Ts, cfg)
        return PartialIntegralTrace(Ts, p, spec.spec_id, grid_kind, lag)
    except AccuracyError as e:
        if e.best_estimate is None:
            raise
        log.warn(f"Trace of {spec.spec_id} exceeds the quadrature tolerance (bound {e.error_bound:.3g}).")
        return PartialIntegralTrace(Ts, np.asarray(e.best_estimate), spec.spec_id, grid_kind, lag,
                                    error_bound=e.error_bound, flagged=True)


def residual_trace(spec: IntegrandSpec, T_max: float, n: int, grid_kind: str, cfg: QuadratureConfig) -> PartialIntegralTrace:
    """Trace of P(T) - B(T) for a weight-x integrand."""
    if spec.weight != "x":
        raise UsageError("Residual traces exist only for weight-x integrands.")
    trace = build_trace(spec, T_max, n, grid_kind, cfg)
    return PartialIntegralTrace(trace.T, trace.p - boundary_term(spec, trace.T), f"{spec.spec_id}-residual",
                                trace.grid_kind, trace.lag, trace.error_bound, trace.flagged)


def _oscillation(values) -> float:
    if values.size == 0:
        return math.nan
    if np.iscomplexobj(values):
        return max(float(np.abs(values[start:start + _DIAMETER_BLOCK, None] - values[None, :]).max())
                   for start in range(0, values.size, _DIAMETER_BLOCK))
    return float(values.max() - values.min())


def _windows(T: np.ndarray, count: int):
    end = T[-1]
    bounds = []
    for k in reversed(range(count)):
        bounds.append((end / 2.0 ** (k + 1), end / 2.0 ** k))
    return bounds


def _accelerated_tail(trace: PartialIntegralTrace, window, depth: int):
    lo, hi = window
    span = depth * trace.lag
    if len(trace) <= span:
        return None
    accelerated = iterated_average(trace.p, depth, trace.lag)
    centers = trace.T[np.arange(accelerated.size) + span // 2]
    return accelerated[(centers > lo) & (centers <= hi)]


def classify(trace: PartialIntegralTrace, tol: float = 1e-3, windows: int = 8, depth: int | None = None) -> ConvergenceVerdict:
    if len(trace) < MIN_TRACE_SAMPLES:
        raise UsageError(f"Trace {trace.spec_id} has {len(trace)} samples; at least {MIN_TRACE_SAMPLES} are needed.")
    if tol <= 0 or windows < 3:
        raise UsageError(f"Need tol > 0 and windows >= 3, got tol={tol}, windows={windows}.")
    depth = config.ACCELERATION_DEPTH if depth is None else depth

    report = []
    for lo, hi in _windows(trace.T, windows):
        mask = (trace.T > lo) & (trace.T <= hi)
        report.append((float(lo), float(hi), int(mask.sum()), _oscillation(trace.p[mask])))

    if trace.flagged and trace.error_bound >= tol:
        return ConvergenceVerdict("Inconclusive", window_report=report,
                                  reason=f"quadrature error bound {trace.error_bound:.3g} >= tol")

    usable = [w for w in report if w[2] >= MIN_WINDOW_SAMPLES]
    if len(usable) < 3:
        return ConvergenceVerdict("Inconclusive", window_report=report, reason="fewer than 3 populated windows")

    o1, o2, o3 = (w[3] for w in usable[-3:])
    if o3 >= tol and o3 >= GROWTH_FACTOR * o1:
        return ConvergenceVerdict("DivergentUnbounded", window_report=report,
                                  reason=f"oscillation grew {o3 / max(o1, 1e-300):.3g}x over three windows")

    decaying = o3 <= DECAY_FACTOR * o1 and o2 <= STEP_SLACK * o1 and o3 <= STEP_SLACK * o2
    if o3 < tol or decaying:
        tail = _accelerated_tail(trace, usable[-1][:2], depth)
        if tail is None or tail.size == 0:
            return ConvergenceVerdict("Inconclusive", window_report=report, reason="trace too short to accelerate")
        spread = _oscillation(tail)
        if spread <= tol:
            limit = tail.mean()
            limit = complex(limit) if np.iscomplexobj(tail) else float(limit)
            return ConvergenceVerdict("Convergent", limit_estimate=limit, window_report=report,
                                      reason=f"accelerated spread {spread:.3g}")
        return ConvergenceVerdict("Inconclusive", window_report=report,
                                  reason=f"oscillation decays but accelerated spread {spread:.3g} > tol")

    median = float(np.median([w[3] for w in usable]))
    if min(o1, o2, o3) >= tol and all(w[3] <= MEDIAN_SPREAD * median for w in usable):
        return ConvergenceVerdict("DivergentBounded", oscillation_envelope=0.5 * o3, window_report=report,
                                  reason="oscillation persists without trend")

    return ConvergenceVerdict("Inconclusive", window_report=report, reason="no stable trend")


def principal_value_trace(T_max: float, n: int, cfg: QuadratureConfig) -> PartialIntegralTrace:
    """Trace of A_T = ∫_{-T}^{T} x e^{i(x²+x)} dx on the a = 1 phase lattice."""
    Ts, lag = phase_lattice(1.0, T_max, n)
    oscillating, integral_term = symmetric_decomposition(Ts, cfg)
    return PartialIntegralTrace(Ts, oscillating - integral_term, "symmetric-x-exp-a1-b1", "uniform_phase", lag)


def principal_value_probe(T_max: float, n: int, cfg: QuadratureConfig,
                          tol: float | None = None, windows: int | None = None) -> ConvergenceVerdict:
    trace = principal_value_trace(T_max, n, cfg)
    return classify(trace,
                    config.CLASSIFY_TOL if tol is None else tol,
                    config.CLASSIFY_WINDOWS if windows is None else windows,
                    cfg.acceleration_depth)


def principal_value_limit() -> complex:
    """(√π/2)·e^{i(π-1)/4}, the limit of the integral term of A_T."""
    return math.sqrt(math.pi) / 2.0 * complex(math.cos((math.pi - 1) / 4), math.sin((math.pi - 1) / 4))


def _spec_from_args(args) -> IntegrandSpec:
    return spec_for_equation(args.family, args.quad, args.a, args.b, args.lin)


def _trace_from_args(args, cfg):
    spec = _spec_from_args(args)
    grid = "uniform_phase" if args.grid == "phase" else "uniform_T"
    if args.residual:
        return residual_trace(spec, args.tmax, args.samples, grid, cfg)
    return build_trace(spec, args.tmax, args.samples, grid, cfg)


def run_trace(args):
    cfg = QuadratureConfig.from_config()
    trace = _trace_from_args(args, cfg)
    trace.to_csv(args.out)
    log.info(f"Wrote {len(trace)} samples of {trace.spec_id} to '{args.out}'.")
    return 0


def run_classify(args):
    cfg = QuadratureConfig.from_config()
    trace = _trace_from_args(args, cfg)
    verdict = classify(trace, args.tol, args.windows, cfg.acceleration_depth)
    print(f"spec_id={trace.spec_id}")
    print(f"samples={len(trace)} grid={trace.grid_kind} lag={trace.lag}")
    print(verdict)
    return 0 if verdict.kind != "Inconclusive" else 2


def run_pv_probe(args):
    cfg = QuadratureConfig.from_config()
    verdict = principal_value_probe(args.tmax, args.samples, cfg, args.tol, args.windows)
    _, integral_term = symmetric_decomposition([args.tmax], cfg)
    target = principal_value_limit()
    print("A_T = e^{iT²} sin T - (e^{-i/4}/2)·∫_{-T+1/2}^{T+1/2} e^{ix²} dx")
    print(verdict)
    print(f"integral_term(T={args.tmax:g})={_format_value(complex(integral_term[0]))}")
    print(f"integral_term_limit={_format_value(target)}")
    print(f"integral_term_deviation={abs(integral_term[0] - target):.3e}")
    return 0 if verdict.kind != "Inconclusive" else 2


def _add_trace_arguments(parser):
    parser.add_argument("--family", choices=EQUATIONS, required=True, help="Family whose integrand is traced.")
    parser.add_argument("--quad", choices=TRIGS, required=True, help="Trig applied to a·x².")
    parser.add_argument("--lin", choices=TRIGS, help="Trig applied to b·x (implied by the family).")
    parser.add_argument("--a", type=float, required=True, help="Positive coefficient of x².")
    parser.add_argument("--b", type=float, required=True, help="Nonnegative coefficient of x.")
    parser.add_argument("--tmax", type=float, default=config.TRACE_T_MAX, help=f"Largest truncation point (default: {config.TRACE_T_MAX:g}).")
    parser.add_argument("--samples", type=int, default=config.TRACE_SAMPLES, help=f"Minimum sample count (default: {config.TRACE_SAMPLES}).")
    parser.add_argument("--grid", choices=("phase", "uniform"), default="phase", help="phase: nodes at a·T² = π(1/4 + k); uniform: equal T steps.")
    parser.add_argument("--residual", action="store_true", help="Trace P(T) - B(T) instead of P(T) (weight-x families only).")

def _add_verdict_arguments(parser):
    parser.add_argument("--tol", type=float, default=config.CLASSIFY_TOL, help=f"Oscillation tolerance (default: {config.CLASSIFY_TOL:g}).")
    parser.add_argument("--windows", type=int, default=config.CLASSIFY_WINDOWS, help=f"Geometric windows (default: {config.CLASSIFY_WINDOWS}).")

def add_parser(subparsers):
    trace_parser = subparsers.add_parser(
        "trace",
        help="Writes the partial-integral trace P(T) of an integrand to CSV.",
        formatter_class=argparse.RawTextHelpFormatter
    )
    trace_parser.set_defaults(func=run_trace)
    _add_trace_arguments(trace_parser)
    trace_parser.add_argument("--out", required=True, help="Output CSV path (header T,p_re).")

    classify_parser = subparsers.add_parser(
        "classify",
        help="Classifies an integral as convergent or divergent from its trace.",
        formatter_class=argparse.RawTextHelpFormatter
    )
    classify_parser.set_defaults(func=run_classify)
    _add_trace_arguments(classify_parser)
    _add_verdict_arguments(classify_parser)

    pv_parser = subparsers.add_parser(
        "pv-probe",
        help="Classifies the symmetric partials A_T of ∫ x·e^{i(x²+x)} (principal value).",
        formatter_class=argparse.RawTextHelpFormatter
    )
    pv_parser.set_defaults(func=run_pv_probe)
    pv_parser.add_argument("--tmax", type=float, default=config.TRACE_T_MAX, help=f"Largest T (default: {config.TRACE_T_MAX:g}).")
    pv_parser.add_argument("--samples", type=int, default=config.TRACE_SAMPLES, help=f"Minimum sample count (default: {config.TRACE_SAMPLES}).")
    _add_verdict_arguments(pv_parser)

    return classify_parser
