"""Closed-form right-hand sides of the trigonometric integral family.

With φ = b²/(4a), K = √(π/(2a)) and C, S the Fresnel integrals in the paper
convention, the sign table is::

    E5  ∫ q(ax²) cos(bx)      = ½K [cos φ + σ sin φ]              σ = -1 (q=sin), +1 (q=cos)
    E6  ∫ q(ax²) sin(bx)      = K [t₁(φ) C(φ) + σ t₂(φ) S(φ)]      q=sin: t₁=cos, t₂=sin, σ=+1
                                                                 q=cos: t₁=sin, t₂=cos, σ=-1
    E1  ∫ x q(ax²) sin(bx)   "=" (b/4a) K [sin φ + σ cos φ]         σ = +1 (q=sin), -1 (q=cos)
    E2  ∫ x q(ax²) cos(bx)   "=" (1/2a)·{1;0} + σ (b/2a) K [t₁ C + τ t₂ S]
                                       q=sin: σ=-1, t₁=sin, t₂=cos, τ=-1, constant 1/(2a)
                                       q=cos: σ=+1, t₁=cos, t₂=sin, τ=+1, constant 0

All integrals run over (0, ∞). E5 and E6 are valid. E1 and E2 are the
divergent table entries; their printed values are what formal
differentiation in b yields: E1 = -d/db E5 and E2 = +d/db E6.
"""
import argparse
import math

from common import EQUATIONS, ClosedFormValue, DomainError, IntegrandSpec, UsageError, require_finite, require_tag, TRIGS
from fresnel import fresnel_cs, fresnel_derivative

# quad_trig -> (sigma,) for E5 and (t1, t2, sigma) for E6
_E5_SIGN = {"sin": -1.0, "cos": 1.0}
_E6_TERMS = {"sin": (math.cos, math.sin, 1.0), "cos": (math.sin, math.cos, -1.0)}
_E1_SIGN = {"sin": 1.0, "cos": -1.0}
_E2_TERMS = {
    "sin": (-1.0, math.sin, math.cos, -1.0, 1.0),
    "cos": (1.0, math.cos, math.sin, 1.0, 0.0),
}


def _check_params(a: float, b: float, strict_b: bool = False) -> tuple[float, float]:
    a = require_finite("a", a)
    b = require_finite("b", b)
    if a <= 0:
        raise DomainError(f"a must be positive, got {a}.")
    if strict_b and b <= 0:
        raise DomainError(f"b must be positive here, got {b}.")
    if b < 0:
        raise DomainError(f"b must be nonnegative, got {b}.")
    return a, b


def _phase(a: float, b: float) -> float:
    return b * b / (4.0 * a)


def eval_convergent_cos_family(a: float, b: float, quad_trig: str) -> ClosedFormValue:
    """∫₀^∞ q(ax²) cos(bx) dx."""
    require_tag("quadratic trig", quad_trig, TRIGS)
    a, b = _check_params(a, b)
    phi = _phase(a, b)
    value = 0.5 * math.sqrt(math.pi / (2.0 * a)) * (math.cos(phi) + _E5_SIGN[quad_trig] * math.sin(phi))
    return ClosedFormValue(value, "valid", "E5")


def eval_convergent_sin_family(a: float, b: float, quad_trig: str) -> ClosedFormValue:
    """∫₀^∞ q(ax²) sin(bx) dx."""
    require_tag("quadratic trig", quad_trig, TRIGS)
    a, b = _check_params(a, b)
    phi = _phase(a, b)
    t1, t2, sigma = _E6_TERMS[quad_trig]
    fr = fresnel_cs(phi)
    value = math.sqrt(math.pi / (2.0 * a)) * (t1(phi) * fr.c + sigma * t2(phi) * fr.s)
    return ClosedFormValue(value, "valid", "E6")


def eval_convergent(spec: IntegrandSpec) -> ClosedFormValue:
    if spec.weight != "one":
        raise UsageError(f"{spec.spec_id} is a weight-x integrand; it has no valid closed form.")
    if spec.lin_trig == "cos":
        return eval_convergent_cos_family(spec.a, spec.b, spec.quad_trig)
    return eval_convergent_sin_family(spec.a, spec.b, spec.quad_trig)


def purported_value(spec: IntegrandSpec) -> ClosedFormValue:
    """The value printed in the tables for the divergent weight-x integrals."""
    if spec.weight != "x":
        raise UsageError("Purported values exist only for the weight-x integrals of E1 and E2.")
    a, b = _check_params(spec.a, spec.b, strict_b=True)
    phi = _phase(a, b)
    k = math.sqrt(math.pi / (2.0 * a))

    if spec.lin_trig == "sin":
        sigma = _E1_SIGN[spec.quad_trig]
        value = b / (4.0 * a) * k * (math.sin(phi) + sigma * math.cos(phi))
        return ClosedFormValue(value, "purported_erroneous", "E1")

    sigma, t1, t2, tau, constant = _E2_TERMS[spec.quad_trig]
    fr = fresnel_cs(phi)
    value = constant / (2.0 * a) + sigma * b / (2.0 * a) * k * (t1(phi) * fr.c + tau * t2(phi) * fr.s)
    return ClosedFormValue(value, "purported_erroneous", "E2")


def closed_form_b_derivative(a: float, b: float, source_eq: str, quad_trig: str) -> float:
    """d/db of the E5 or E6 right-hand side, chain rule through C'(φ), S'(φ)."""
    require_tag("source equation", source_eq, ("E5", "E6"))
    require_tag("quadratic trig", quad_trig, TRIGS)
    a, b = _check_params(a, b, strict_b=True)
    phi = _phase(a, b)
    k = math.sqrt(math.pi / (2.0 * a))
    dphi = b / (2.0 * a)

    if source_eq == "E5":
        sigma = _E5_SIGN[quad_trig]
        return 0.5 * k * dphi * (-math.sin(phi) + sigma * math.cos(phi))

    fr = fresnel_cs(phi)
    dc, ds = fresnel_derivative(phi)
    if quad_trig == "sin":
        # d/dφ [cos φ C + sin φ S]
        bracket = -math.sin(phi) * fr.c + math.cos(phi) * dc + math.cos(phi) * fr.s + math.sin(phi) * ds
    else:
        # d/dφ [sin φ C - cos φ S]
        bracket = math.cos(phi) * fr.c + math.sin(phi) * dc + math.sin(phi) * fr.s - math.cos(phi) * ds
    return k * dphi * bracket


def closed_form_for(source_eq: str, quad_trig: str, a: float, b: float) -> ClosedFormValue:
    require_tag("source equation", source_eq, ("E5", "E6"))
    if source_eq == "E5":
        return eval_convergent_cos_family(a, b, quad_trig)
    return eval_convergent_sin_family(a, b, quad_trig)


def spec_for_equation(source_eq: str, quad_trig: str, a: float, b: float, lin_trig: str | None = None) -> IntegrandSpec:
    """The integrand whose left side the equation tag names."""
    require_tag("source equation", source_eq, ("E1", "E2", "E5", "E6"))
    weight = "x" if source_eq in ("E1", "E2") else "one"
    expected_lin = {"E1": "sin", "E2": "cos", "E5": "cos", "E6": "sin"}[source_eq]
    if lin_trig is not None and lin_trig != expected_lin:
        raise UsageError(f"{source_eq} carries {expected_lin}(bx), not {lin_trig}(bx).")
    return IntegrandSpec(weight, quad_trig, expected_lin, a, b)


def run(args):
    spec = spec_for_equation(args.family, args.quad, args.a, args.b, args.lin)
    if spec.weight == "one":
        result = eval_convergent(spec)
    else:
        result = purported_value(spec)
        print("!" * 60)
        print("status=purported_erroneous")
        print(f"{spec} DIVERGES. The value below is the historical table entry,")
        print("not the value of the integral. Run 'classify' for the verdict.")
        print("!" * 60)
    print(f"integral: {spec}")
    print(f"value={result.value:.17g}")
    print(f"source_eq={result.source_eq}")
    print(f"status={result.status}")
    return 0

def add_parser(subparsers):
    parser = subparsers.add_parser(
        "eval",
        help="Evaluates a closed-form right-hand side (E5/E6 valid, E1/E2 purported).",
        formatter_class=argparse.RawTextHelpFormatter
    )
    parser.set_defaults(func=run)

    parser.add_argument("--family", choices=EQUATIONS, required=True, help="Family tag: E5, E6 (convergent) or E1, E2 (weight x, divergent).")
    parser.add_argument("--quad", choices=TRIGS, required=True, help="Trig applied to a·x².")
    parser.add_argument("--lin", choices=TRIGS, help="Trig applied to b·x (implied by the family).")
    parser.add_argument("--a", type=float, required=True, help="Positive coefficient of x².")
    parser.add_argument("--b", type=float, required=True, help="Nonnegative coefficient of x.")

    return parser
