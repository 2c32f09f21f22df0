"""Cost construction, error metrics, fitting, and the existence report."""

import numpy as np
import pytest

from conftest import synthetic_record
from fracrheo.calib import (
    cost_ssr,
    existence_report,
    fit,
    fit_to_json,
    lse_percent,
    make_cost,
    render_report,
    report_to_json,
    rmse_percent,
)
from fracrheo.errors import ConfigError, FitError
from fracrheo.models import FQLVParams, SBParams
from fracrheo.pso import PsoConfig

DT = 0.495


def test_metric_identities(rng):
    measured = np.abs(rng.standard_normal(500)) + 0.1
    predicted = measured + 0.01 * rng.standard_normal(500)
    r = np.linalg.norm(predicted - measured)
    assert cost_ssr(predicted, measured) == pytest.approx(r**2, rel=1e-12)
    lse = lse_percent(predicted, measured)
    rmse = rmse_percent(predicted, measured)
    assert lse == pytest.approx(100 * r / np.linalg.norm(measured), rel=1e-12)
    # the two percentages are proportional through norm/(peak*sqrt(N))
    factor = np.linalg.norm(measured) / (np.max(measured) * np.sqrt(len(measured)))
    assert rmse == pytest.approx(lse * factor, rel=1e-12)
    assert lse_percent(measured, measured) == 0.0


def test_metric_degenerate_inputs():
    with pytest.raises(FitError):
        lse_percent(np.zeros(3), np.zeros(3))
    with pytest.raises(FitError):
        rmse_percent(np.zeros(3), -np.ones(3))


def test_cost_zero_at_truth():
    p = SBParams(E=18190.1, alpha=0.226)
    rec = synthetic_record(p, "syn-sb")
    cost_fn, info = make_cost(rec, "sb", dt=DT)
    assert cost_fn([p.E, p.alpha]) == pytest.approx(0.0, abs=1e-12)
    assert cost_fn([0.0, 0.5]) > 1e6
    # linear kinds calibrate against the first relaxation step only
    assert info["window_s"] == (0.0, 1800.0)


def test_fqlv_window_spans_full_series():
    p = FQLVParams(A=53882.3, B=0.7803, E=0.7298, alpha=0.2928)
    rec = synthetic_record(p, "syn-fqlv")
    _, info = make_cost(rec, "fqlv", dt=DT)
    assert info["window_s"][1] == pytest.approx(12600.0, abs=1.0)


def test_unknown_kind_rejected():
    rec = synthetic_record(SBParams(E=1.0e4, alpha=0.3), "syn")
    with pytest.raises(ConfigError):
        make_cost(rec, "zener")
    with pytest.raises(ConfigError):
        fit(rec, "sb", restarts=0)


def test_fit_recovers_sb_parameters():
    p = SBParams(E=18190.1, alpha=0.226)
    rec = synthetic_record(p, "syn-sb")
    res = fit(rec, "sb", dt=DT, cfg=PsoConfig(n_pop=20, n_iter=150, seed=11))
    assert res.params.alpha == pytest.approx(p.alpha, abs=1e-3)
    assert res.params.E == pytest.approx(p.E, rel=1e-2)
    assert res.rmse_pct < 0.1
    assert res.pso.trace.n_evals == 20 * 151


def test_fit_is_noise_robust(rng):
    p = SBParams(E=18190.1, alpha=0.226)
    rec = synthetic_record(p, "syn-sb-noisy", noise_rel=0.005, rng=rng)
    res = fit(rec, "sb", dt=DT, cfg=PsoConfig(n_pop=20, n_iter=150, seed=11),
              smooth_window=31)
    assert res.params.alpha == pytest.approx(p.alpha, abs=0.03)
    assert res.params.E == pytest.approx(p.E, rel=0.10)


def test_fit_restarts_keep_best():
    p = SBParams(E=18190.1, alpha=0.226)
    rec = synthetic_record(p, "syn-sb")
    one = fit(rec, "sb", dt=DT, cfg=PsoConfig(n_pop=10, n_iter=40, seed=2))
    two = fit(rec, "sb", dt=DT, cfg=PsoConfig(n_pop=10, n_iter=40, seed=2),
              restarts=3)
    assert two.cost <= one.cost


def test_fit_json_embeds_settings():
    p = SBParams(E=18190.1, alpha=0.226)
    rec = synthetic_record(p, "syn-sb")
    res = fit(rec, "sb", dt=DT, cfg=PsoConfig(n_pop=10, n_iter=30, seed=4))
    d = fit_to_json(res)
    assert d["kind"] == "sb"
    assert d["params"]["model"] == "sb"
    assert d["settings"]["pso"]["seed"] == 4
    assert d["n_evals"] == 10 * 31


def test_existence_report_captures_failures():
    rec = synthetic_record(SBParams(E=1.0e4, alpha=0.3), "syn")
    rep = existence_report(rec, kinds=("sb", "zener"), dt=DT,
                           cfg=PsoConfig(n_pop=10, n_iter=40, seed=0))
    assert rep.ranking == ["sb"]
    assert "zener" in rep.failures
    assert "ConfigError" in rep.failures["zener"]
    text = render_report(rep)
    assert "failed" in text and "verdict" in text
    d = report_to_json(rep)
    assert d["failures"]["zener"].startswith("ConfigError")
    assert d["preferred"] == "sb"


def test_render_report_uses_kpa():
    rec = synthetic_record(SBParams(E=18190.1, alpha=0.226), "syn-sb")
    rep = existence_report(rec, kinds=("sb",), dt=DT,
                           cfg=PsoConfig(n_pop=15, n_iter=120, seed=0))
    text = render_report(rep)
    assert "kPa" in text
    assert "18.19" in text  # 18190.1 Pa rendered as kPa
