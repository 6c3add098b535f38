"""Fresnel integrals in three normalization conventions.

Conventions
-----------
paper      C(x) = (2π)^{-1/2} ∫₀^x cos t · t^{-1/2} dt,  S(x) likewise with sin.
classical  C̃(u) = ∫₀^u cos(πt²/2) dt,  S̃(u) likewise.
amplitude  Ĉ(u) = ∫₀^u cos(t²) dt,      Ŝ(u) likewise.

Relations (t = u² in the paper form)::

    C(x) = C̃(√(2x/π))              S(x) = S̃(√(2x/π))
    C(x) = √(2/π) · Ĉ(√x)          S(x) = √(2/π) · Ŝ(√x)

so the classical and paper conventions agree in value and differ only in
argument scaling, while the amplitude convention also rescales the value.
A FresnelPair always records the argument in its own convention, which is
what makes a conversion reversible.

In the paper convention C(x), S(x) → 1/2 as x → ∞ and the derivatives are
C'(x) = cos x / √(2πx), S'(x) = sin x / √(2πx).

Evaluation delegates to scipy.special.fresnel (cephes), which uses the
power series for small arguments and the rational auxiliary-function
(amplitude/phase) form f, g for large ones; both branches are accurate to
near machine precision.
"""
import argparse
import cmath
import math
from dataclasses import dataclass

from scipy import special

from common import DomainError, log, require_tag

CONVENTIONS = ("paper", "classical", "amplitude")

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)


@dataclass(frozen=True)
class FresnelPair:
    c: float
    s: float
    convention: str = "paper"
    argument: float = 0.0

    def __post_init__(self):
        require_tag("convention", self.convention, CONVENTIONS)
        for name, value in (("c", self.c), ("s", self.s), ("argument", self.argument)):
            if not math.isfinite(value):
                raise DomainError(f"FresnelPair.{name} must be finite, got {value}.")

    def as_complex(self) -> complex:
        return complex(self.c, self.s)


def fresnel_cs(x: float) -> FresnelPair:
    """C(x), S(x) in the paper convention for finite x ≥ 0."""
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"fresnel_cs requires a finite nonnegative argument, got {x}.")
    if x == 0.0:
        return FresnelPair(0.0, 0.0, "paper", 0.0)
    s_tilde, c_tilde = special.fresnel(math.sqrt(x / (math.pi / 2.0)))
    return FresnelPair(float(c_tilde), float(s_tilde), "paper", x)


def fresnel_derivative(x: float) -> tuple[float, float]:
    """(C'(x), S'(x)) for x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"Fresnel derivatives are singular at 0 and undefined below; got {x}.")
    scale = 1.0 / math.sqrt(2.0 * math.pi * x)
    return math.cos(x) * scale, math.sin(x) * scale


def fresnel_limit() -> complex:
    """∫_{-∞}^{∞} e^{ix²} dx = e^{iπ/4}√π, equal real and imaginary parts."""
    component = _SQRT_PI_OVER_2
    return complex(component, component)


def _to_root(p: FresnelPair) -> FresnelPair:
    if p.convention == "paper":
        return p
    if p.convention == "classical":
        return FresnelPair(p.c, p.s, "paper", 0.5 * math.pi * p.argument * p.argument)
    return FresnelPair(p.c * _SQRT_2_OVER_PI, p.s * _SQRT_2_OVER_PI, "paper", p.argument * p.argument)


def _from_root(p: FresnelPair, target: str) -> FresnelPair:
    if target == "paper":
        return p
    if target == "classical":
        return FresnelPair(p.c, p.s, "classical", math.sqrt(p.argument / (math.pi / 2.0)))
    return FresnelPair(p.c * _SQRT_PI_OVER_2, p.s * _SQRT_PI_OVER_2, "amplitude", math.sqrt(p.argument))


def convert_normalization(p: FresnelPair, target: str) -> FresnelPair:
    require_tag("convention", target, CONVENTIONS)
    if p.convention == target:
        return p
    if p.argument < 0:
        raise DomainError(f"Fresnel arguments are nonnegative, got {p.argument}.")
    return _from_root(_to_root(p), target)


def fresnel_in(x: float, convention: str = "paper") -> FresnelPair:
    """Evaluate at an argument given in `convention`'s own scaling."""
    require_tag("convention", convention, CONVENTIONS)
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"Fresnel arguments must be finite and nonnegative, got {x}.")
    if convention == "paper":
        return fresnel_cs(x)
    source = FresnelPair(0.0, 0.0, convention, x)
    root_argument = _to_root(source).argument
    return convert_normalization(fresnel_cs(root_argument), convention)


def run(args):
    pair = fresnel_in(args.x, args.convention)
    print(f"convention={pair.convention}")
    print(f"argument={pair.argument:.17g}")
    print(f"C={pair.c:.17g}")
    print(f"S={pair.s:.17g}")
    if args.convention == "paper":
        limit = fresnel_limit()
        log.info(f"C(∞)+iS(∞) = (e^(iπ/4)√π)/√(2π) = {limit / math.sqrt(2 * math.pi):.15g}"
                 f", |e^(iπ/4)√π| = {abs(limit):.15g}, arg = {cmath.phase(limit):.15g}")
    return 0

def add_parser(subparsers):
    parser = subparsers.add_parser(
        "fresnel",
        help="Evaluates the Fresnel integrals C and S in a chosen normalization.",
        formatter_class=argparse.RawTextHelpFormatter
    )
    parser.set_defaults(func=run)

    parser.add_argument("--x", type=float, required=True, help="Argument (in the chosen convention's own scaling).")
    parser.add_argument(
        "--convention",
        choices=CONVENTIONS,
        default="paper",
        help="paper: (2π)^-1/2 ∫ cos t/√t; classical: ∫ cos(πt²/2); amplitude: ∫ cos(t²)."
    )

    return parser
