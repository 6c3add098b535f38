import argparse
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from tqdm import tqdm

import config
from classify import build_trace, classify
from closedform import eval_convergent
from common import AccuracyError, UsageError, __version__, log, sanitize_filename
from corpus import CorpusEntry, builtin_corpus
from dui import check_interchange
from oscquad import QuadratureConfig, improper_value, residual_limit

VALUE_AGREEMENT = 1e-6
RESIDUAL_AGREEMENT = 1e-4

# weight-x equation -> the convergent family it was derived from
PARENT_FAMILY = {"E1": "E5", "E2": "E6", "E5": "E5", "E6": "E6"}


@dataclass
class RunReport:
    tool_version: str
    config: dict
    entries: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 2 if any(e["agreement_flag"] == "inconclusive" for e in self.entries) else 0

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "config": self.config,
            "entries": self.entries,
            "timing": self.timing,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=4, ensure_ascii=False)

    def write(self, out_path: Path):
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        tmp_path = out_path.with_name(out_path.name + ".tmp")
        with open(tmp_path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(self.to_json())
            f.write("\n")
        os.replace(tmp_path, out_path)


def _finite_or_none(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _flag(verdict_kind: str, numeric, claimed, truth: str) -> str:
    if verdict_kind == "Inconclusive":
        return "inconclusive"
    if claimed is None:
        return "unclaimed"
    if verdict_kind != "Convergent":
        return "mismatch"
    if truth == "divergent" or numeric is None:
        return "mismatch"
    return "agreement" if abs(numeric - claimed) <= VALUE_AGREEMENT else "mismatch"


def evaluate_entry(entry: CorpusEntry, cfg: QuadratureConfig, T_max: float, n: int, tol: float, windows: int):
    """(entry dict, trace, seconds) for one corpus case; numerical failures mark the entry inconclusive."""
    spec = entry.spec
    started = time.perf_counter()
    result = {
        "case_id": entry.case_id,
        "spec_id": spec.spec_id,
        "integral": str(spec),
        "source_eq": entry.source_eq,
        "source_label": entry.source_label,
        "truth": entry.truth,
        "verdict": None,
        "numeric_value": None,
        "closed_form": None,
        "claimed_value": entry.claimed_value.to_dict() if entry.claimed_value else None,
        "alternate_claims": [],
        "residual_limit": None,
        "cas_value": entry.cas_value,
        "cas_notes": entry.cas_notes,
        "cas_agreement": None,
        "agreement_flag": "inconclusive",
        "dui_decision": None,
        "trace_file": None,
        "error": None,
    }
    trace = None
    try:
        trace = build_trace(spec, T_max, n, "uniform_phase", cfg)
        verdict = classify(trace, tol, windows, cfg.acceleration_depth)
        result["verdict"] = verdict.to_dict()

        numeric = None
        if spec.weight == "one":
            numeric = improper_value(spec, cfg)
            result["numeric_value"] = numeric
            result["closed_form"] = eval_convergent(spec).value
        else:
            result["residual_limit"] = residual_limit(spec, cfg)

        claimed = entry.claimed_value.value if entry.claimed_value else None
        result["agreement_flag"] = _flag(verdict.kind, numeric, claimed, entry.truth)
        result["alternate_claims"] = [
            {"label": label, "value": value, "agreement_flag": _flag(verdict.kind, numeric, value, entry.truth)}
            for label, value in entry.alternate_claims
        ]
        if entry.cas_value is not None and numeric is not None:
            result["cas_agreement"] = "agreement" if abs(numeric - entry.cas_value) <= VALUE_AGREEMENT else "mismatch"

        if spec.b > 0:
            dui = check_interchange(PARENT_FAMILY[entry.source_eq], spec.quad_trig, spec.a, spec.b, cfg,
                                    T_max, n, tol)
            result["dui_decision"] = dui.decision
    except AccuracyError as e:
        log.warn(f"{entry.case_id}: {e}")
        result["agreement_flag"] = "inconclusive"
        result["error"] = str(e)

    if result["agreement_flag"] == "inconclusive" and result["error"] is None:
        result["error"] = "classifier could not reach a verdict"
    return result, trace, time.perf_counter() - started


def run_report(corpus, cfg: QuadratureConfig, out_path, T_max: float | None = None, n: int | None = None,
               tol: float | None = None, windows: int | None = None, threads: int | None = None) -> RunReport:
    out_path = Path(out_path)
    T_max = config.TRACE_T_MAX if T_max is None else T_max
    n = config.TRACE_SAMPLES if n is None else n
    tol = config.CLASSIFY_TOL if tol is None else tol
    windows = config.CLASSIFY_WINDOWS if windows is None else windows
    threads = config.thread_count() if threads is None else threads

    ordered = sorted(corpus, key=lambda e: e.case_id)
    ids = [e.case_id for e in ordered]
    if len(set(ids)) != len(ids):
        raise UsageError("Corpus case ids must be unique.")

    started = time.perf_counter()
    with ThreadPoolExecutor(max_workers=threads) as executor:
        results = list(tqdm(
            executor.map(lambda e: evaluate_entry(e, cfg, T_max, n, tol, windows), ordered),
            total=len(ordered), desc="Corpus", unit="case", disable=not ordered
        ))

    trace_dir = out_path.parent / f"{out_path.stem}_traces"
    entries, timing = [], {}
    for entry_dict, trace, seconds in results:
        if trace is not None:
            trace_path = trace_dir / f"{sanitize_filename(entry_dict['case_id'])}.csv"
            trace.to_csv(trace_path)
            entry_dict["trace_file"] = trace_path.relative_to(out_path.parent).as_posix()
        entry_dict["residual_limit"] = _finite_or_none(entry_dict["residual_limit"])
        entries.append(entry_dict)
        timing[entry_dict["case_id"]] = round(seconds, 6)
    timing = {"total_seconds": round(time.perf_counter() - started, 6), "entries": timing}

    report = RunReport(
        tool_version=__version__,
        config={
            "quadrature": cfg.to_dict(),
            "classify": {"tol": tol, "windows": windows, "samples": n, "t_max": T_max, "grid": "uniform_phase"},
            "value_agreement": VALUE_AGREEMENT,
        },
        entries=entries,
        timing=timing,
    )
    report.write(out_path)

    flags = [e["agreement_flag"] for e in entries]
    log.info(f"Report written to '{out_path}': {len(entries)} entries, "
             f"{flags.count('agreement')} agreement, {flags.count('mismatch')} mismatch, "
             f"{flags.count('inconclusive')} inconclusive.")
    return report


def print_summary(report: RunReport):
    for e in report.entries:
        verdict = e["verdict"]["kind"] if e["verdict"] else "error"
        line = f"{e['case_id']:<28} {verdict:<18} {e['agreement_flag']:<12}"
        claimed = e["claimed_value"]
        if claimed and claimed["status"] == "purported_erroneous":
            line += f" claimed={claimed['value']:.10g} status=purported_erroneous (integral diverges)"
        elif e["numeric_value"] is not None:
            line += f" numeric={e['numeric_value']:.10g}"
        print(line)


def run(args):
    cfg = QuadratureConfig.from_config()
    out_path = Path(args.out) if args.out else config.REPORT_PATH
    report = run_report(builtin_corpus(), cfg, out_path)
    print_summary(report)
    return report.exit_code

def add_parser(subparsers):
    parser = subparsers.add_parser(
        "report",
        help="Runs the built-in corpus and writes a JSON report plus trace CSVs.",
        formatter_class=argparse.RawTextHelpFormatter
    )
    parser.set_defaults(func=run)

    parser.add_argument("--out", help=f"Report path (default: {config.REPORT_PATH}).\nTraces go to <stem>_traces/ next to it.")

    return parser
