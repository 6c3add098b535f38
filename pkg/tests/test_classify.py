import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from classify import (ConvergenceVerdict, PartialIntegralTrace, _oscillation, build_trace, classify, principal_value_limit,
                      principal_value_probe, principal_value_trace, residual_trace)
from closedform import eval_convergent, purported_value
from common import IntegrandSpec, UsageError
from oscquad import QuadratureConfig, symmetric_decomposition, symmetric_partials

GRID = [0.5, 1.0, 2.0]
SHAPES = [("sin", "sin"), ("sin", "cos"), ("cos", "sin"), ("cos", "cos")]


def eighth_lattice(count=4096):
    """T with T² = kπ/8; eight steps advance T² by π."""
    return np.sqrt(np.pi * np.arange(1, count + 1) / 8.0)


def synthetic(p_of_T, lag=1, count=4096):
    T = eighth_lattice(count)
    return PartialIntegralTrace(T, p_of_T(T), "synthetic", "uniform_phase", lag)


def test_trace_validation():
    with pytest.raises(UsageError):
        PartialIntegralTrace([1.0, 1.0], [0.0, 0.0], "bad")
    with pytest.raises(UsageError):
        PartialIntegralTrace([1.0, 2.0], [0.0], "bad")
    with pytest.raises(UsageError):
        PartialIntegralTrace([1.0, 2.0], [0.0, 0.0], "bad", grid_kind="log_T")
    with pytest.raises(UsageError):
        PartialIntegralTrace([1.0, 2.0], [0.0, 0.0], "bad", lag=0)


def test_constant_trace_is_convergent():
    T = np.linspace(1.0, 64.0, 64)
    verdict = classify(PartialIntegralTrace(T, np.full(64, 0.7), "const", "uniform_T"))
    assert verdict.kind == "Convergent"
    assert verdict.limit_estimate == pytest.approx(0.7, abs=1e-15)
    assert verdict.oscillation_envelope is None


def test_short_trace_is_rejected():
    T = np.linspace(1.0, 10.0, 31)
    with pytest.raises(UsageError):
        classify(PartialIntegralTrace(T, np.zeros(31), "short", "uniform_T"))


def test_bad_classifier_arguments():
    trace = synthetic(lambda T: np.zeros_like(T))
    with pytest.raises(UsageError):
        classify(trace, tol=0.0)
    with pytest.raises(UsageError):
        classify(trace, windows=2)


def test_bounded_oscillation_reports_its_envelope():
    verdict = classify(synthetic(lambda T: 0.3 + 0.5 * np.sin(T * T)))
    assert verdict.kind == "DivergentBounded"
    assert verdict.oscillation_envelope == pytest.approx(0.5, abs=1e-9)
    assert verdict.limit_estimate is None


def test_growing_oscillation_is_unbounded():
    verdict = classify(synthetic(lambda T: T * np.sin(T * T)))
    assert verdict.kind == "DivergentUnbounded"
    assert verdict.limit_estimate is None and verdict.oscillation_envelope is None


def test_decaying_alternation_is_accelerated_to_its_limit():
    verdict = classify(synthetic(lambda T: 0.25 + np.sin(T * T) / (2 * T), lag=8))
    assert verdict.kind == "Convergent"
    assert verdict.limit_estimate == pytest.approx(0.25, abs=1e-8)


def test_slow_monotone_decay_is_inconclusive():
    T = np.linspace(1.0, 40.0, 512)
    verdict = classify(PartialIntegralTrace(T, 1.0 / T, "harmonic", "uniform_T"))
    assert verdict.kind == "Inconclusive"
    assert "accelerated spread" in verdict.reason


def test_too_few_populated_windows_is_inconclusive():
    T = np.linspace(39.0, 40.0, 64)
    verdict = classify(PartialIntegralTrace(T, np.sin(T), "narrow", "uniform_T"))
    assert verdict.kind == "Inconclusive"
    assert sum(w[2] > 0 for w in verdict.window_report) == 1


@pytest.mark.parametrize("factor", [-1.0, 10.0])
@pytest.mark.parametrize("make", [
    lambda: synthetic(lambda T: 0.25 + np.sin(T * T) / (2 * T), lag=8),
    lambda: synthetic(lambda T: 0.3 + 0.5 * np.sin(T * T)),
    lambda: synthetic(lambda T: T * np.sin(T * T)),
])
def test_verdict_is_scale_equivariant(make, factor):
    trace = make()
    base = classify(trace, tol=1e-3)
    scaled = classify(trace.scaled(factor), tol=1e-3 * abs(factor))
    assert scaled.kind == base.kind
    if base.limit_estimate is not None:
        assert scaled.limit_estimate == pytest.approx(factor * base.limit_estimate, abs=1e-8 * abs(factor))
    if base.oscillation_envelope is not None:
        assert scaled.oscillation_envelope == pytest.approx(abs(factor) * base.oscillation_envelope, rel=1e-12)


@pytest.mark.parametrize("quad,lin", SHAPES)
@pytest.mark.parametrize("a", GRID)
@pytest.mark.parametrize("b", GRID)
def test_weight_one_traces_converge_to_the_closed_form(quad, lin, a, b, cfg):
    spec = IntegrandSpec("one", quad, lin, a, b)
    verdict = classify(build_trace(spec, 40.0, 512, "uniform_phase", cfg))
    assert verdict.kind == "Convergent"
    assert abs(verdict.limit_estimate - eval_convergent(spec).value) <= 1e-6


@pytest.mark.parametrize("quad,lin", SHAPES)
@pytest.mark.parametrize("a", GRID)
@pytest.mark.parametrize("b", GRID)
def test_weight_x_traces_are_bounded_divergent(quad, lin, a, b, cfg):
    spec = IntegrandSpec("x", quad, lin, a, b)
    verdict = classify(build_trace(spec, 40.0, 512, "uniform_phase", cfg))
    assert verdict.kind == "DivergentBounded"
    assert 0.1 / a <= verdict.oscillation_envelope <= 1.0 / a


@pytest.mark.parametrize("n", [32, 64])
def test_small_sample_counts_still_reach_a_verdict(n, cfg):
    convergent = IntegrandSpec("one", "sin", "sin", 1.0, 1.0)
    one = classify(build_trace(convergent, 40.0, n, "uniform_phase", cfg))
    x = classify(build_trace(IntegrandSpec("x", "sin", "sin", 1.0, 1.0), 40.0, n, "uniform_phase", cfg))
    assert one.kind == "Convergent"
    assert abs(one.limit_estimate - eval_convergent(convergent).value) <= 1e-4
    assert x.kind == "DivergentBounded"
    assert sum(w[2] >= 4 for w in x.window_report) >= 3


@pytest.mark.parametrize("quad,lin", SHAPES)
@pytest.mark.parametrize("a,b", [(1.0, 1.0), (1.0, 2.0), (0.5, 1.0)])
def test_residual_traces_converge_to_the_table_value(quad, lin, a, b, cfg):
    spec = IntegrandSpec("x", quad, lin, a, b)
    trace = residual_trace(spec, 40.0, 512, "uniform_phase", cfg)
    verdict = classify(trace)
    assert trace.spec_id.endswith("-residual")
    assert verdict.kind == "Convergent"
    assert abs(verdict.limit_estimate - purported_value(spec).value) <= 1e-6


def test_residual_trace_needs_weight_x(cfg):
    with pytest.raises(UsageError):
        residual_trace(IntegrandSpec("one", "sin", "cos", 1.0, 1.0), 40.0, 512, "uniform_phase", cfg)


def test_uniform_grid_trace(cfg):
    trace = build_trace(IntegrandSpec("one", "cos", "cos", 1.0, 1.0), 10.0, 64, "uniform_T", cfg)
    assert (trace.grid_kind, trace.lag, len(trace)) == ("uniform_T", 1, 64)
    assert_allclose(trace.T, 10.0 * np.arange(1, 65) / 64)


def test_exhausted_budget_flags_the_trace():
    spec = IntegrandSpec("x", "sin", "sin", 1.0, 1.0)
    trace = build_trace(spec, 40.0, 512, "uniform_phase", QuadratureConfig(max_segments=50))
    assert trace.flagged and trace.error_bound == math.inf
    verdict = classify(trace)
    assert verdict.kind == "Inconclusive"
    assert "error bound" in verdict.reason


def test_symmetric_partials_are_bounded_but_do_not_converge(cfg):
    verdict = principal_value_probe(40.0, 512, cfg, tol=1e-3, windows=8)
    assert verdict.kind == "DivergentBounded"
    assert 0.8 <= verdict.oscillation_envelope <= 1.2


def test_principal_value_trace_is_complex(cfg):
    trace = principal_value_trace(20.0, 128, cfg)
    assert trace.is_complex and trace.lag >= 1
    assert_allclose(trace.p[::25], symmetric_partials(trace.T[::25], cfg), atol=1e-12)


def test_symmetric_partials_at_multiples_of_pi(cfg):
    Ts = np.pi * np.arange(1, 8)
    _, integral_term = symmetric_decomposition(Ts, cfg)
    assert_allclose(symmetric_partials(Ts, cfg), -integral_term, atol=1e-12)


def test_complex_window_diameter_matches_the_pairwise_maximum(rng):
    values = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    brute = np.abs(values[:, None] - values[None, :]).max()
    assert _oscillation(values) == pytest.approx(brute, rel=1e-15)
    assert _oscillation(values[:3]) == pytest.approx(np.abs(values[:3, None] - values[None, :3]).max())


def test_dense_principal_value_trace_classifies(cfg):
    trace = principal_value_trace(40.0, 20000, cfg)
    assert len(trace) >= 20000
    assert classify(trace).kind == "DivergentBounded"


def test_principal_value_limit_constant():
    value = principal_value_limit()
    assert abs(value) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    assert math.atan2(value.imag, value.real) == pytest.approx((math.pi - 1) / 4, rel=1e-14)


def test_real_trace_csv_round_trip(tmp_path, cfg):
    trace = build_trace(IntegrandSpec("x", "cos", "sin", 1.0, 2.0), 10.0, 64, "uniform_phase", cfg)
    path = tmp_path / "traces" / "real.csv"
    trace.to_csv(path)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "T,p_re"
    back = PartialIntegralTrace.from_csv(path, trace.spec_id, lag=trace.lag)
    assert np.array_equal(back.T, trace.T) and np.array_equal(back.p, trace.p)


def test_complex_trace_csv_round_trip(tmp_path, cfg):
    trace = principal_value_trace(10.0, 64, cfg)
    path = tmp_path / "pv.csv"
    trace.to_csv(path)
    back = PartialIntegralTrace.from_csv(path)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "T,p_re,p_im"
    assert back.spec_id == "pv"
    assert np.array_equal(back.p, trace.p)


def test_csv_header_is_checked(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("x,y\n1,2\n", encoding="utf-8")
    with pytest.raises(UsageError):
        PartialIntegralTrace.from_csv(path)


def test_verdict_invariants():
    with pytest.raises(UsageError):
        ConvergenceVerdict("Convergent")
    with pytest.raises(UsageError):
        ConvergenceVerdict("DivergentBounded", limit_estimate=1.0, oscillation_envelope=0.5)
    with pytest.raises(UsageError):
        ConvergenceVerdict("Inconclusive", oscillation_envelope=0.5)
    with pytest.raises(UsageError):
        ConvergenceVerdict("Divergent")


def test_verdict_serialization():
    verdict = ConvergenceVerdict("DivergentBounded", oscillation_envelope=0.5,
                                 window_report=[(1.0, 2.0, 0, math.nan), (2.0, 4.0, 10, 1.0)])
    data = verdict.to_dict()
    assert data["windows"][0]["oscillation"] is None
    assert data["windows"][1] == {"t_lo": 2.0, "t_hi": 4.0, "samples": 10, "oscillation": 1.0}
    assert str(verdict).startswith("verdict=DivergentBounded")
    assert ConvergenceVerdict("Convergent", limit_estimate=1 + 2j).to_dict()["limit_estimate"] == [1.0, 2.0]
