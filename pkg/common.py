import math
import sys
from dataclasses import dataclass

TOOL_NAME = "oscint"
__version__ = "1.0.0"

WEIGHTS = ("one", "x")
TRIGS = ("sin", "cos")
EQUATIONS = ("E1", "E2", "E5", "E6")
PURPORTED_EQUATIONS = ("E1", "E2")
STATUSES = ("valid", "purported_erroneous")

# (weight, lin_trig) -> equation whose left side carries that integrand shape
EQUATION_BY_SHAPE = {
    ("one", "cos"): "E5",
    ("one", "sin"): "E6",
    ("x", "sin"): "E1",
    ("x", "cos"): "E2",
}


class OscintError(Exception):
    pass


class DomainError(OscintError, ValueError):
    pass


class UsageError(OscintError, ValueError):
    pass


class AccuracyError(OscintError, RuntimeError):
    def __init__(self, message, best_estimate=None, error_bound=math.inf):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_bound = error_bound


class _Log:
    @staticmethod
    def info(message: str):
        print(f"[INFO] {message}")

    @staticmethod
    def warn(message: str):
        print(f"[WARN] {message}", file=sys.stderr)

    @staticmethod
    def error(message: str):
        print(f"[ERROR] {message}", file=sys.stderr)


log = _Log()


def require_tag(name: str, value: str, allowed) -> str:
    if value not in allowed:
        raise UsageError(f"Unknown {name} '{value}'. Expected one of: {', '.join(allowed)}.")
    return value


def require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}.")
    return value


def sanitize_filename(name):
    if not name: return ""
    name = name.replace('\\', '_').replace('/', '_').replace('.', 'p')
    invalid_chars = '<>:"|?* \n\r\t'
    for char in invalid_chars:
        name = name.replace(char, '')
    return name.strip()


def _format_param(value: float) -> str:
    return f"{value:g}"


@dataclass(frozen=True)
class IntegrandSpec:
    """One member of the family w(x)·q(ax²)·l(bx) with w ∈ {1, x}, q, l ∈ {sin, cos}."""
    weight: str
    quad_trig: str
    lin_trig: str
    a: float
    b: float

    def __post_init__(self):
        require_tag("weight", self.weight, WEIGHTS)
        require_tag("quadratic trig", self.quad_trig, TRIGS)
        require_tag("linear trig", self.lin_trig, TRIGS)
        a = require_finite("a", self.a)
        b = require_finite("b", self.b)
        if a <= 0:
            raise DomainError(f"a must be positive, got {a}.")
        if b < 0:
            raise DomainError(f"b must be nonnegative, got {b}.")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def source_eq(self) -> str:
        return EQUATION_BY_SHAPE[(self.weight, self.lin_trig)]

    @property
    def spec_id(self) -> str:
        return "-".join([self.weight, self.quad_trig, self.lin_trig,
                         f"a{_format_param(self.a)}", f"b{_format_param(self.b)}"])

    @staticmethod
    def parse_spec_id(spec_id: str) -> "IntegrandSpec":
        parts = spec_id.split("-")
        if len(parts) != 5 or not parts[3].startswith("a") or not parts[4].startswith("b"):
            raise UsageError(f"Malformed spec id '{spec_id}'.")
        try:
            a = float(parts[3][1:])
            b = float(parts[4][1:])
        except ValueError:
            raise UsageError(f"Malformed spec id '{spec_id}'.") from None
        return IntegrandSpec(parts[0], parts[1], parts[2], a, b)

    def __str__(self):
        w = "x·" if self.weight == "x" else ""
        return f"∫₀^∞ {w}{self.quad_trig}({_format_param(self.a)}x²)·{self.lin_trig}({_format_param(self.b)}x) dx"


@dataclass(frozen=True)
class ClosedFormValue:
    value: float
    status: str
    source_eq: str

    def __post_init__(self):
        require_tag("status", self.status, STATUSES)
        require_tag("source equation", self.source_eq, EQUATIONS)
        if (self.status == "purported_erroneous") != (self.source_eq in PURPORTED_EQUATIONS):
            raise UsageError(f"Status '{self.status}' is inconsistent with {self.source_eq}.")

    @property
    def is_purported(self) -> bool:
        return self.status == "purported_erroneous"

    def to_dict(self) -> dict:
        return {"value": self.value, "status": self.status, "source_eq": self.source_eq}

    def __str__(self):
        return f"{self.value:.17g} (source={self.source_eq}, status={self.status})"
