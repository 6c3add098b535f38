"""Built-in table corpus. Only (a, b) = (3.1, 2.2) comes from a recorded computer-algebra session."""
from dataclasses import dataclass, field

from closedform import eval_convergent, purported_value
from common import ClosedFormValue, IntegrandSpec, UsageError, require_tag

TRUTHS = ("convergent_with_closed_form", "divergent")

_E1_SOURCE = "G&R 3.851 / Prudnikov I 2.5.22 / de Haan 150.4, 150.7 (1867), 193.17-18 (1858)"
_E2_SOURCE = "G&R 3.851 / Prudnikov I 2.5.22 / de Haan (1862) p. 443"
_E5_SOURCE = "Cauchy (1815, 1825), stated for a = 1"
_E6_SOURCE = "Prudnikov I 2.5.22 / de Haan (1862) p. 443"
_DESK = "desk-scale a,b"

_SOURCES = {"E1": _E1_SOURCE, "E2": _E2_SOURCE, "E5": _E5_SOURCE, "E6": _E6_SOURCE}
_CAS_NOTES = {
    "E1": "Maple V.4 reports divergence; Mathematica 4.0 returns the table value.",
    "E2": "Maple V.4 reports divergence; Mathematica 4.0 returns the table value.",
    "E5": "Maple V.4 and Mathematica 4.0 agree with the closed form for symbolic a, b.",
    "E6": "Maple V.4 and Mathematica 4.0 agree with the closed form for symbolic a, b.",
}
DE_HAAN_ZERO = "de Haan (1862) p. 443: 0"


@dataclass(frozen=True)
class CorpusEntry:
    case_id: str
    spec: IntegrandSpec
    truth: str
    claimed_value: ClosedFormValue | None
    source_label: str
    cas_notes: str = ""
    cas_value: float | None = None
    alternate_claims: tuple = field(default_factory=tuple)

    def __post_init__(self):
        require_tag("truth", self.truth, TRUTHS)
        if (self.truth == "divergent") != (self.spec.weight == "x"):
            raise UsageError(f"{self.case_id}: weight-x integrands are the divergent ones.")

    @property
    def source_eq(self) -> str:
        return self.spec.source_eq

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "spec_id": self.spec.spec_id,
            "truth": self.truth,
            "claimed_value": self.claimed_value.to_dict() if self.claimed_value else None,
            "source_label": self.source_label,
            "cas_notes": self.cas_notes,
            "cas_value": self.cas_value,
            "alternate_claims": [{"label": label, "value": value} for label, value in self.alternate_claims],
        }


def _case_id(spec: IntegrandSpec) -> str:
    return f"{spec.source_eq}-{spec.spec_id}"


def corpus_entry(spec: IntegrandSpec, desk_scale: bool = True, cas_value: float | None = None,
                 cas_notes: str | None = None, source_label: str | None = None) -> CorpusEntry:
    eq = spec.source_eq
    if spec.weight == "x":
        truth, claimed = "divergent", purported_value(spec)
    else:
        truth, claimed = "convergent_with_closed_form", eval_convergent(spec)
    label = source_label or _SOURCES[eq]
    if desk_scale:
        label = f"{label}; {_DESK}"
    alternates = ((DE_HAAN_ZERO, 0.0),) if eq in ("E2", "E6") else ()
    return CorpusEntry(_case_id(spec), spec, truth, claimed, label,
                       _CAS_NOTES[eq] if cas_notes is None else cas_notes, cas_value, alternates)


def builtin_corpus() -> list:
    entries = []
    for a, b in ((1.0, 1.0), (1.0, 2.0)):
        for lin in ("sin", "cos"):
            for quad in ("sin", "cos"):
                entries.append(corpus_entry(IntegrandSpec("x", quad, lin, a, b)))

    for lin in ("cos", "sin"):
        for quad in ("sin", "cos"):
            entries.append(corpus_entry(IntegrandSpec("one", quad, lin, 1.0, 1.0)))

    entries.append(corpus_entry(
        IntegrandSpec("one", "sin", "cos", 3.1, 2.2),
        desk_scale=False,
        cas_value=0.0,
        cas_notes="Maple V.4 returns 0 for this numeric instance; the closed form gives a nonzero value.",
        source_label=f"{_E5_SOURCE}; Maple V.4 numeric case",
    ))
    return sorted(entries, key=lambda e: e.case_id)
