"""Oscillatory quadrature for the a·x² phase family, reduced to the Gauss kernel ∫ e^{iu²} du."""
import argparse
import cmath
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from common import AccuracyError, DomainError, IntegrandSpec, UsageError, log, require_finite

GL_ORDER = 15
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)

# node-to-node segments summed past the head of an infinite tail
TAIL_SEGMENTS = 64
_CHUNK = 1 << 16

# [T/8, T/4] holds about 3/64 of the lattice nodes; 128 keeps it above MIN_WINDOW_SAMPLES
MIN_LATTICE_NODES = 128


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_segments: int = 1_000_000
    acceleration_depth: int = 12

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise UsageError(f"Tolerances must be positive, got abs_tol={self.abs_tol}, rel_tol={self.rel_tol}.")
        if self.max_segments < 1 or self.acceleration_depth < 1:
            raise UsageError("max_segments and acceleration_depth must be >= 1.")

    @classmethod
    def from_config(cls) -> "QuadratureConfig":
        import config
        return cls(config.ABS_TOL, config.REL_TOL, config.MAX_SEGMENTS, config.ACCELERATION_DEPTH)

    def tolerance(self, scale: float) -> float:
        return self.abs_tol + self.rel_tol * abs(scale)

    def to_dict(self) -> dict:
        return asdict(self)


def _kernel(u):
    return np.exp(1j * u * u)


def _rule(f, lo, hi):
    out = np.empty(lo.shape, dtype=complex)
    for start in range(0, lo.size, _CHUNK):
        l = lo[start:start + _CHUNK]
        h = hi[start:start + _CHUNK]
        half = 0.5 * (h - l)
        x = (0.5 * (h + l))[:, None] + half[:, None] * _GL_X
        out[start:start + _CHUNK] = half * (f(x) @ _GL_W)
    return out


def _segment_integrals(f, lo, hi, cfg: QuadratureConfig):
    """Per-segment integrals and error estimates, refining once where needed."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size == 0:
        return np.zeros(0, dtype=complex), np.zeros(0)
    mid = 0.5 * (lo + hi)
    whole = _rule(f, lo, hi)
    values = _rule(f, lo, mid) + _rule(f, mid, hi)
    errors = np.abs(whole - values)

    bad = np.flatnonzero(errors > cfg.abs_tol / lo.size)
    if bad.size:
        l, m, h = lo[bad], mid[bad], hi[bad]
        q1 = 0.5 * (l + m)
        q3 = 0.5 * (m + h)
        quarters = _rule(f, l, q1) + _rule(f, q1, m) + _rule(f, m, q3) + _rule(f, q3, h)
        errors[bad] = np.abs(values[bad] - quarters)
        values[bad] = quarters
    return values, errors


def _phase_nodes(lo: float, hi: float, budget: int):
    """Nodes ±√(πm) strictly inside (lo, hi); thinned if over budget."""
    m_hi = math.floor(max(lo * lo, hi * hi) / math.pi)
    if m_hi > 2 * budget:
        return np.linspace(lo, hi, budget + 1)[1:-1], True
    r = np.sqrt(np.pi * np.arange(1, m_hi + 1))
    nodes = np.concatenate((-r[::-1], r))
    nodes = nodes[(nodes > lo) & (nodes < hi)]
    if nodes.size + 1 > budget:
        keep = np.linspace(0, nodes.size - 1, max(budget - 1, 1)).astype(int)
        return nodes[np.unique(keep)], True
    return nodes, False


def _kernel_cumulative(start: float, stops, cfg: QuadratureConfig):
    """G(start, stop) for each stop ≥ start: (values, error bounds, budget exhausted)."""
    stops = np.asarray(stops, dtype=float)
    if stops.size == 0:
        return np.zeros(0, dtype=complex), np.zeros(0), False
    if not np.all(np.isfinite(stops)) or not math.isfinite(start):
        raise DomainError("Gauss-kernel limits must be finite.")
    if np.any(stops < start):
        raise UsageError("Gauss-kernel stops must not precede the start.")

    top = float(stops.max())
    nodes, exhausted = _phase_nodes(start, top, cfg.max_segments)
    breaks = np.unique(np.concatenate(([start], stops.ravel(), nodes)))
    values, errors = _segment_integrals(_kernel, breaks[:-1], breaks[1:], cfg)
    cum = np.concatenate(([0.0 + 0.0j], np.cumsum(values)))
    cum_err = np.concatenate(([0.0], np.cumsum(errors)))
    idx = np.searchsorted(breaks, stops)
    return cum[idx], cum_err[idx], exhausted


def _check(best, error_bound: float, exhausted: bool, cfg: QuadratureConfig, what: str):
    scale = float(np.max(np.abs(best))) if np.size(best) else 0.0
    if exhausted:
        raise AccuracyError(f"{what}: segment budget of {cfg.max_segments} exhausted.", best, math.inf)
    if error_bound > cfg.tolerance(scale):
        raise AccuracyError(f"{what}: error bound {error_bound:.3g} exceeds tolerance.", best, error_bound)


def gauss_kernel_cumulative(start: float, stops, cfg: QuadratureConfig):
    """Vector of ∫_start^stop e^{iu²} du for every stop (stops ≥ start, any order)."""
    values, errors, exhausted = _kernel_cumulative(start, stops, cfg)
    _check(values, float(errors.max(initial=0.0)), exhausted, cfg, "Gauss kernel")
    return values


def integrate_gauss_kernel(c: float, d: float, cfg: QuadratureConfig) -> complex:
    c = require_finite("c", c)
    d = require_finite("d", d)
    if c > d:
        raise UsageError(f"Gauss-kernel limits must satisfy c <= d, got ({c}, {d}).")
    return complex(gauss_kernel_cumulative(c, [d], cfg)[0])


def integrate_segments(f, breakpoints, cfg: QuadratureConfig):
    """Cumulative ∫_{t0}^{t_k} f for sorted breakpoints t0 < t1 < ...; f takes numpy arrays."""
    breaks = np.asarray(breakpoints, dtype=float)
    if breaks.ndim != 1 or breaks.size < 1 or np.any(np.diff(breaks) <= 0):
        raise UsageError("Breakpoints must be a strictly increasing 1-D sequence.")
    if breaks.size - 1 > cfg.max_segments:
        raise AccuracyError(f"{breaks.size - 1} segments exceed the budget of {cfg.max_segments}.")
    values, errors = _segment_integrals(f, breaks[:-1], breaks[1:], cfg)
    cum = np.concatenate(([0.0], np.cumsum(values)))
    if np.all(np.isreal(cum)):
        cum = cum.real
    _check(cum, float(errors.sum()), False, cfg, "segment quadrature")
    return cum


def _reduction(a: float, b: float):
    """(e^{-iφ}/√a, β, √a) for the phase ax² + bx, b signed."""
    root = math.sqrt(a)
    return cmath.exp(-1j * b * b / (4.0 * a)) / root, b / (2.0 * root), root


def chirp_integral(a: float, b: float, lo: float, hi: float, cfg: QuadratureConfig) -> complex:
    """∫_lo^hi e^{i(ax²+bx)} dx for a > 0 and any real b."""
    a, b = require_finite("a", a), require_finite("b", b)
    if a <= 0:
        raise DomainError(f"a must be positive, got {a}.")
    lo, hi = require_finite("lo", lo), require_finite("hi", hi)
    if lo > hi:
        raise UsageError(f"Need lo <= hi, got ({lo}, {hi}).")
    factor, beta, root = _reduction(a, b)
    return factor * integrate_gauss_kernel(root * lo + beta, root * hi + beta, cfg)


def weighted_chirp_integral(a: float, b: float, lo: float, hi: float, cfg: QuadratureConfig) -> complex:
    """∫_lo^hi x e^{i(ax²+bx)} dx for a > 0 and any real b."""
    plain = chirp_integral(a, b, lo, hi, cfg)
    edge = cmath.exp(1j * (a * hi * hi + b * hi)) - cmath.exp(1j * (a * lo * lo + b * lo))
    return edge / (2j * a) - b / (2.0 * a) * plain


def _combine(lin_trig: str, plus, minus):
    if lin_trig == "cos":
        return 0.5 * (plus + minus)
    return (plus - minus) / 2j


def _project(quad_trig: str, z):
    return np.real(z) if quad_trig == "cos" else np.imag(z)


def _exponential_partials(a: float, b: float, Ts, cfg: QuadratureConfig):
    """E±(T) = ∫₀^T e^{i(ax²±bx)} dx on a vector of T, with error bounds."""
    factor, beta, root = _reduction(a, b)
    plus, err_p, ex_p = _kernel_cumulative(beta, root * Ts + beta, cfg)
    minus, err_m, ex_m = _kernel_cumulative(-beta, root * Ts - beta, cfg)
    scale = abs(factor)
    return factor * plus, factor * minus, scale * (err_p + err_m), ex_p or ex_m


def partial_integrals(spec: IntegrandSpec, Ts, cfg: QuadratureConfig):
    """P(T) = ∫₀^T integrand for every T in Ts, in one cumulative pass."""
    Ts = np.asarray(Ts, dtype=float)
    if not np.all(np.isfinite(Ts)) or np.any(Ts < 0):
        raise DomainError("Truncation points must be finite and nonnegative.")
    a, b = spec.a, spec.b
    e_plus, e_minus, err, exhausted = _exponential_partials(a, b, Ts, cfg)

    if spec.weight == "one":
        plus, minus = e_plus, e_minus
    else:
        edge_p = (np.exp(1j * (a * Ts * Ts + b * Ts)) - 1.0) / (2j * a)
        edge_m = (np.exp(1j * (a * Ts * Ts - b * Ts)) - 1.0) / (2j * a)
        plus = edge_p - b / (2.0 * a) * e_plus
        minus = edge_m + b / (2.0 * a) * e_minus
        err = err * b / (2.0 * a)

    values = _project(spec.quad_trig, _combine(spec.lin_trig, plus, minus))
    _check(values, float(err.max(initial=0.0)), exhausted, cfg, f"P(T) for {spec.spec_id}")
    return values


def partial_integral(spec: IntegrandSpec, T: float, cfg: QuadratureConfig) -> float:
    T = require_finite("T", T)
    if T < 0:
        raise DomainError(f"T must be nonnegative, got {T}.")
    try:
        return float(partial_integrals(spec, [T], cfg)[0])
    except AccuracyError as e:
        if e.best_estimate is not None:
            e.best_estimate = float(np.asarray(e.best_estimate)[0])
        raise


def complex_partial(a: float, b: float, T: float, weight: str, cfg: QuadratureConfig) -> complex:
    """∫₀^T w(x) e^{i(ax²+bx)} dx, w ∈ {one, x}, b of either sign."""
    if weight == "one":
        return chirp_integral(a, b, 0.0, T, cfg)
    if weight == "x":
        return weighted_chirp_integral(a, b, 0.0, T, cfg)
    raise UsageError(f"Unknown weight '{weight}'.")


def ibp_identity_rhs(T1: float, T2: float, cfg: QuadratureConfig) -> complex:
    """Closed side of ∫_{-T1}^{T2} x e^{i(x²+x)} dx after one integration by parts."""
    T1, T2 = require_finite("T1", T1), require_finite("T2", T2)
    if T1 <= 0 or T2 <= 0:
        raise DomainError(f"T1 and T2 must be positive, got ({T1}, {T2}).")
    bracket = (cmath.exp(1j * (T2 * T2 + T2)) - cmath.exp(1j * (T1 * T1 - T1))) / 2j
    kernel = integrate_gauss_kernel(-T1 + 0.5, T2 + 0.5, cfg)
    return bracket - cmath.exp(-0.25j) / 2.0 * kernel


def symmetric_partial(T: float, cfg: QuadratureConfig) -> complex:
    """A_T = ∫_{-T}^{T} x e^{i(x²+x)} dx."""
    return ibp_identity_rhs(T, T, cfg)


def symmetric_decomposition(Ts, cfg: QuadratureConfig):
    """(e^{iT²} sin T, (e^{-i/4}/2)·G(-T+½, T+½)) on a vector of T; A_T is their difference."""
    Ts = np.asarray(Ts, dtype=float)
    if np.any(Ts <= 0) or not np.all(np.isfinite(Ts)):
        raise DomainError("Symmetric truncation points must be positive and finite.")
    upper = Ts + 0.5
    lower = 0.5 - Ts
    cum = gauss_kernel_cumulative(0.0, np.concatenate((upper, np.abs(lower))), cfg)
    kernel = cum[:Ts.size] - np.sign(lower) * cum[Ts.size:]
    oscillating = np.exp(1j * Ts * Ts) * np.sin(Ts)
    return oscillating, np.exp(-0.25j) / 2.0 * kernel


def symmetric_partials(Ts, cfg: QuadratureConfig):
    oscillating, integral_term = symmetric_decomposition(Ts, cfg)
    return oscillating - integral_term


def boundary_term(spec: IntegrandSpec, T, include_lower: bool = False):
    """Non-decaying integration-by-parts term B(T) of a weight-x integrand.

    With include_lower the full bracket from 0 to T is returned, which only
    differs for (sin, cos) by the constant 1/(2a).
    """
    if spec.weight != "x":
        raise UsageError("Boundary terms exist only for weight-x integrands.")
    T = np.asarray(T, dtype=float)
    a, b = spec.a, spec.b
    lin = np.cos(b * T) if spec.lin_trig == "cos" else np.sin(b * T)
    if spec.quad_trig == "cos":
        out = np.sin(a * T * T) * lin / (2.0 * a)
    else:
        out = -np.cos(a * T * T) * lin / (2.0 * a)
        if include_lower and spec.lin_trig == "cos":
            out = out + 1.0 / (2.0 * a)
    return float(out) if out.ndim == 0 else out


def iterated_average(seq, depth: int, lag: int = 1):
    """Repeated pairwise averaging of terms `lag` apart; shortens by depth·lag."""
    arr = np.asarray(seq)
    if depth < 0 or lag < 1:
        raise UsageError(f"Need depth >= 0 and lag >= 1, got depth={depth}, lag={lag}.")
    if arr.size <= depth * lag:
        raise UsageError(f"Sequence of {arr.size} terms is too short for depth {depth} at lag {lag}.")
    for _ in range(depth):
        arr = 0.5 * (arr[:-lag] + arr[lag:])
    return arr


def _kernel_tail(c: float, cfg: QuadratureConfig):
    """∫_c^∞ e^{iv²} dv and its error estimate."""
    m0 = max(1, math.ceil(c * c / math.pi)) if c >= 0 else 1
    count = TAIL_SEGMENTS + cfg.acceleration_depth
    nodes = np.sqrt(np.pi * np.arange(m0, m0 + count + 1))
    head, head_err, _ = _kernel_cumulative(c, [nodes[0]], cfg)
    segs, seg_err = _segment_integrals(_kernel, nodes[:-1], nodes[1:], cfg)
    partial = head[0] + np.concatenate(([0.0], np.cumsum(segs)))

    depth = cfg.acceleration_depth
    accelerated = iterated_average(partial, depth)
    previous = iterated_average(partial, depth - 1)
    change = abs(accelerated[-1] - previous[-1])
    return complex(accelerated[-1]), change + float(head_err[0]) + float(seg_err.sum())


def _exponential_limits(a: float, b: float, cfg: QuadratureConfig):
    factor, beta, _ = _reduction(a, b)
    tail_p, err_p = _kernel_tail(beta, cfg)
    tail_m, err_m = _kernel_tail(-beta, cfg)
    return factor * tail_p, factor * tail_m, abs(factor) * (err_p + err_m)


def improper_value(spec: IntegrandSpec, cfg: QuadratureConfig) -> float:
    """∫₀^∞ of a weight-one integrand."""
    if spec.weight != "one":
        raise UsageError(f"{spec.spec_id} diverges; improper_value covers weight-one integrands only.")
    e_plus, e_minus, err = _exponential_limits(spec.a, spec.b, cfg)
    value = float(_project(spec.quad_trig, _combine(spec.lin_trig, e_plus, e_minus)))
    _check(value, err, False, cfg, f"improper value of {spec.spec_id}")
    return value


def residual_limit(spec: IntegrandSpec, cfg: QuadratureConfig) -> float:
    """lim (P(T) - B(T)) for a weight-x integrand; what the tables printed."""
    if spec.weight != "x":
        raise UsageError("Residual limits are defined for weight-x integrands only.")
    a, b = spec.a, spec.b
    e_plus, e_minus, err = _exponential_limits(a, b, cfg)
    constant = -1.0 / (2j * a)
    plus = constant - b / (2.0 * a) * e_plus
    minus = constant + b / (2.0 * a) * e_minus
    value = float(_project(spec.quad_trig, _combine(spec.lin_trig, plus, minus)))
    _check(value, err * b / (2.0 * a), False, cfg, f"residual limit of {spec.spec_id}")
    return value


def phase_lattice(a: float, T_max: float, n: int):
    """Truncation points on aT² = π(¼ + j·s/r) up to T_max, and the averaging lag r.

    Groups of r consecutive points advance the phase by the odd multiple sπ.
    At least max(n, MIN_LATTICE_NODES) points are returned.
    """
    a, T_max = require_finite("a", a), require_finite("T_max", T_max)
    if a <= 0:
        raise DomainError(f"a must be positive, got {a}.")
    if n < 32:
        raise UsageError(f"A trace needs at least 32 samples, got {n}.")
    span = a * T_max * T_max / math.pi - 0.25
    if span <= 0:
        raise UsageError(f"T_max={T_max} does not reach the first phase node for a={a}.")

    steps = max(n, MIN_LATTICE_NODES) - 1
    r, s = 1, 1
    if span < steps:
        r = math.ceil(steps / span)
    elif span >= 3 * steps:
        s = math.floor(span / steps)
        if s % 2 == 0:
            s -= 1
    last = math.floor(span * r / s)
    j = np.arange(last + 1)
    Ts = np.sqrt(np.pi * (0.25 + j * s / r) / a)
    return np.minimum(Ts, T_max), r


def uniform_grid(T_max: float, n: int):
    T_max = require_finite("T_max", T_max)
    if T_max <= 0:
        raise DomainError(f"T_max must be positive, got {T_max}.")
    if n < 32:
        raise UsageError(f"A trace needs at least 32 samples, got {n}.")
    return T_max * np.arange(1, n + 1) / n


def reference_integral(func, lo: float, hi: float, piece: float, epsabs: float = 1e-13) -> complex:
    """Adaptive quadrature (QUADPACK) of a complex integrand over pieces of width ≤ piece."""
    count = max(1, math.ceil((hi - lo) / piece))
    edges = np.linspace(lo, hi, count + 1)
    total = 0.0 + 0.0j
    for left, right in zip(edges[:-1], edges[1:]):
        re, _ = integrate.quad(lambda x: func(x).real, left, right, epsabs=epsabs, epsrel=1e-13, limit=200)
        im, _ = integrate.quad(lambda x: func(x).imag, left, right, epsabs=epsabs, epsrel=1e-13, limit=200)
        total += complex(re, im)
    return total


def direct_ibp_lhs(T1: float, T2: float) -> complex:
    piece = math.pi / (2.0 * max(T1, T2) + 1.0)
    return reference_integral(lambda x: x * cmath.exp(1j * (x * x + x)), -T1, T2, piece)


def run(args):
    cfg = QuadratureConfig.from_config()
    rhs = ibp_identity_rhs(args.t1, args.t2, cfg)
    lhs = direct_ibp_lhs(args.t1, args.t2)
    diff = abs(lhs - rhs)
    print(f"T1={args.t1:.17g} T2={args.t2:.17g}")
    print(f"rhs={rhs.real:.17g}{rhs.imag:+.17g}j")
    print(f"lhs={lhs.real:.17g}{lhs.imag:+.17g}j")
    print(f"abs_diff={diff:.3e}")
    if diff > args.tol:
        log.warn(f"Identity residual {diff:.3e} exceeds {args.tol:g}.")
        return 2
    log.info("Integration-by-parts identity holds.")
    return 0

def add_parser(subparsers):
    parser = subparsers.add_parser(
        "ibp-check",
        help="Checks the integration-by-parts identity for ∫ x·e^{i(x²+x)} over [-T1, T2].",
        formatter_class=argparse.RawTextHelpFormatter
    )
    parser.set_defaults(func=run)

    parser.add_argument("--t1", type=float, required=True, help="Lower truncation (integral starts at -T1).")
    parser.add_argument("--t2", type=float, required=True, help="Upper truncation.")
    parser.add_argument("--tol", type=float, default=1e-8, help="Allowed |lhs - rhs| (default: 1e-8).")

    return parser
