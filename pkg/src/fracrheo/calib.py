"""Model calibration against relaxation records.

A candidate parameter vector is scored by simulating the record's strain
protocol on a uniform grid, interpolating the simulated stress back onto
the measured sample times, and summing squared residuals over the fit
window.  The linear models (Scott-Blair, Kelvin-Voigt, fractional
Maxwell) assume strain-independent moduli, so they are fitted to the
first relaxation step only; the quasi-linear model is fitted to the full
multi-step series.  Minimization uses the bounded particle swarm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataio import (
    DEFAULT_DT_S,
    ExperimentRecord,
    TimeSeries,
    estimate_modulus,
    moving_average,
    recommend_model,
    resample_to_nonuniform,
)
from .errors import ConfigError, FitError
from .l1solver import StrainProtocol, UniformGrid, forward_solve, rasterize_protocol
from .models import (
    FKVParams,
    FMParams,
    FQLVParams,
    ModelParams,
    SBParams,
    params_to_json,
)
from .pso import PsoConfig, PsoResult, optimize

E_BOUND = (0.0, 1.0e8)  # pseudo-constants [Pa*s^alpha]
ALPHA_BOUND = (0.0001, 0.9999)
A_BOUND = (1.0e4, 1.0e5)  # elastic scale [Pa]
B_BOUND = (0.0, 2.0)
E_REDUCED_BOUND = (0.0, 1.0)

DEFAULT_BOUNDS = {
    "sb": (E_BOUND, ALPHA_BOUND),
    "fkv": (E_BOUND, ALPHA_BOUND, E_BOUND, ALPHA_BOUND),
    "fm": (E_BOUND, ALPHA_BOUND, E_BOUND, ALPHA_BOUND),
    "fqlv": (A_BOUND, B_BOUND, E_REDUCED_BOUND, ALPHA_BOUND),
}

_PARAM_BUILDERS = {
    "sb": lambda x: SBParams(E=x[0], alpha=x[1]),
    "fkv": lambda x: FKVParams(E1=x[0], alpha1=x[1], E2=x[2], alpha2=x[3]),
    "fm": lambda x: FMParams(E1=x[0], alpha1=x[1], E2=x[2], alpha2=x[3]),
    "fqlv": lambda x: FQLVParams(A=x[0], B=x[1], E=x[2], alpha=x[3]),
}

N_PARAMS = {"sb": 2, "fkv": 4, "fm": 4, "fqlv": 4}

# models whose modulus does not depend on strain level; fitted to the
# first relaxation step, where superposition is not yet violated
LINEAR_KINDS = ("sb", "fkv", "fm")


def cost_ssr(predicted: np.ndarray, measured: np.ndarray) -> float:
    """Sum of squared residuals [Pa^2]."""
    r = predicted - measured
    return float(r @ r)


def lse_percent(predicted: np.ndarray, measured: np.ndarray) -> float:
    """Residual 2-norm relative to the data 2-norm, in percent."""
    r = np.linalg.norm(predicted - measured)
    d = np.linalg.norm(measured)
    if d == 0:
        raise FitError("relative error undefined for all-zero data")
    return float(100.0 * r / d)


def rmse_percent(predicted: np.ndarray, measured: np.ndarray) -> float:
    """Root-mean-square residual relative to the peak stress, in percent."""
    n = len(measured)
    peak = float(np.max(measured))
    if peak <= 0:
        raise FitError("peak-relative error undefined for nonpositive peak stress")
    r = np.linalg.norm(predicted - measured)
    return float(100.0 * r / (peak * np.sqrt(n)))


@dataclass
class FitResult:
    """Calibrated parameters and goodness-of-fit for one model kind."""

    kind: str
    params: ModelParams
    cost: float  # SSR over the fit window [Pa^2]
    lse_pct: float
    rmse_pct: float
    n_points: int
    window_s: tuple[float, float]
    pso: PsoResult
    settings: dict = field(default_factory=dict)


def _fit_window(rec: ExperimentRecord, kind: str) -> tuple[float, float]:
    onsets = rec.protocol.onsets
    t = rec.stress.t
    if kind in LINEAR_KINDS and len(onsets) > 1:
        return float(t[0]), float(onsets[1])
    return float(t[0]), float(t[-1])


def make_cost(rec: ExperimentRecord, kind: str, dt: float = DEFAULT_DT_S,
              smooth_window: int | None = None):
    """Build the SSR cost over the fit window for a parameter vector.

    Returns (cost_fn, info).  The simulated strain follows the record's
    protocol rasterized on a dt-spaced grid; simulated stress is
    interpolated back to the measured sample times inside the window.
    """
    if kind not in _PARAM_BUILDERS:
        raise ConfigError(f"unknown model kind: {kind!r}")
    stress = rec.stress
    if smooth_window is not None:
        stress = moving_average(stress, smooth_window)
    lo, hi = _fit_window(rec, kind)
    mask = (stress.t >= lo) & (stress.t < hi) if hi < stress.t[-1] else (stress.t >= lo)
    t_fit = stress.t[mask]
    sigma_fit = stress.y[mask]
    if len(t_fit) < N_PARAMS[kind]:
        raise FitError(
            f"fit window [{lo:g}, {hi:g})s holds {len(t_fit)} samples; "
            f"fewer than the {N_PARAMS[kind]} parameters of {kind!r}"
        )

    t0 = min(0.0, float(stress.t[0]))
    # causality: stress inside the fit window never depends on later strain
    # steps, so the simulation grid and protocol are truncated to the window
    t_sim_end = hi if hi < float(stress.t[-1]) else float(stress.t[-1])
    n = int(np.ceil((t_sim_end - t0) / dt))
    grid = UniformGrid(dt=dt, n_steps=n, t0=t0)
    proto = rec.protocol
    kept = tuple(s for s in proto.steps if s[0] < grid.t_end - proto.ramp_s)
    if len(kept) < len(proto.steps):
        proto = StrainProtocol(steps=kept, ramp_s=proto.ramp_s)
    strain, _ = rasterize_protocol(proto, grid)
    build = _PARAM_BUILDERS[kind]

    def cost_fn(x):
        params = build(x)  # DomainError propagates; the optimizer scores it inf
        sigma_model = forward_solve(params, strain, grid)
        resampled = resample_to_nonuniform(grid, sigma_model, t_fit)
        return cost_ssr(resampled.y, sigma_fit)

    info = {
        "window_s": (lo, hi),
        "t_fit": t_fit,
        "sigma_fit": sigma_fit,
        "grid": grid,
        "strain": strain,
        "dt_s": dt,
        "smooth_window": smooth_window,
    }
    return cost_fn, info


def fit(rec: ExperimentRecord, kind: str, dt: float = DEFAULT_DT_S,
        cfg: PsoConfig | None = None, bounds=None, restarts: int = 1,
        smooth_window: int | None = None, map_fn=map) -> FitResult:
    """Calibrate one model kind to a record.

    `restarts` reruns the swarm with decorrelated seeds and keeps the
    lowest-cost result; with a fixed `cfg.seed` the whole procedure is
    deterministic.
    """
    if kind not in _PARAM_BUILDERS:
        raise ConfigError(f"unknown model kind: {kind!r}")
    if restarts < 1:
        raise ConfigError(f"restarts must be >= 1, got {restarts}")
    if cfg is None:
        cfg = PsoConfig()
    if bounds is None:
        bounds = DEFAULT_BOUNDS[kind]
    cost_fn, info = make_cost(rec, kind, dt=dt, smooth_window=smooth_window)

    best = None
    for r in range(restarts):
        seed = None if cfg.seed is None else cfg.seed + r
        run_cfg = PsoConfig(n_pop=cfg.n_pop, n_iter=cfg.n_iter, inertia=cfg.inertia,
                            cognitive=cfg.cognitive, social=cfg.social, seed=seed)
        res = optimize(cost_fn, bounds, run_cfg, map_fn=map_fn)
        if best is None or res.cost < best.cost:
            best = res
    if not np.isfinite(best.cost):
        raise FitError(f"no feasible {kind!r} parameters found within bounds")

    params = _PARAM_BUILDERS[kind](best.x)
    sigma_model = forward_solve(params, info["strain"], info["grid"])
    pred = resample_to_nonuniform(info["grid"], sigma_model, info["t_fit"]).y
    measured = info["sigma_fit"]
    return FitResult(
        kind=kind,
        params=params,
        cost=cost_ssr(pred, measured),
        lse_pct=lse_percent(pred, measured),
        rmse_pct=rmse_percent(pred, measured),
        n_points=len(measured),
        window_s=info["window_s"],
        pso=best,
        settings={
            "dt_s": dt,
            "bounds": [list(b) for b in bounds],
            "restarts": restarts,
            "smooth_window": smooth_window,
            "pso": {"n_pop": cfg.n_pop, "n_iter": cfg.n_iter, "seed": cfg.seed},
        },
    )


RMSE_TIE_PP = 0.25  # within this many percentage points, prefer fewer parameters


@dataclass
class ExistenceReport:
    """Ranked comparison of candidate models on one record."""

    sample_id: str
    fits: list  # FitResult, ranked
    failures: dict  # kind -> error message
    ranking: list  # kinds in preference order
    preferred: str | None
    slope_recommendation: tuple[str, str]
    verdict: str


def existence_report(rec: ExperimentRecord, kinds=("sb", "fkv", "fm", "fqlv"),
                     dt: float = DEFAULT_DT_S, cfg: PsoConfig | None = None,
                     fqlv_cfg: PsoConfig | None = None, restarts: int = 1,
                     smooth_window: int | None = None, map_fn=map) -> ExistenceReport:
    """Fit every candidate kind and rank them by peak-relative RMSE.

    Kinds whose RMSE agree within RMSE_TIE_PP percentage points are
    ordered by parameter count, so a simpler model wins a near-tie.  The
    verdict states whether the winner is consistent with the slope-based
    recommendation from the measured relaxation moduli.
    """
    fits = []
    failures = {}
    for kind in kinds:
        kind_cfg = fqlv_cfg if (kind == "fqlv" and fqlv_cfg is not None) else cfg
        try:
            fits.append(fit(rec, kind, dt=dt, cfg=kind_cfg, restarts=restarts,
                            smooth_window=smooth_window, map_fn=map_fn))
        except Exception as exc:  # per-kind capture: one failure must not sink the report
            failures[kind] = f"{type(exc).__name__}: {exc}"

    fits.sort(key=lambda f: f.rmse_pct)
    ranked = list(fits)
    i = 0
    while i < len(ranked) - 1:
        j = i
        while (j + 1 < len(ranked)
               and ranked[j + 1].rmse_pct - ranked[i].rmse_pct <= RMSE_TIE_PP):
            j += 1
        ranked[i:j + 1] = sorted(ranked[i:j + 1],
                                 key=lambda f: (N_PARAMS[f.kind], f.rmse_pct))
        i = j + 1

    try:
        recommendation = recommend_model(estimate_modulus(rec))
    except Exception as exc:
        recommendation = ("unavailable", f"{type(exc).__name__}: {exc}")

    preferred = ranked[0].kind if ranked else None
    verdict = _verdict(preferred, recommendation[0])
    return ExistenceReport(
        sample_id=rec.sample_id,
        fits=ranked,
        failures=failures,
        ranking=[f.kind for f in ranked],
        preferred=preferred,
        slope_recommendation=recommendation,
        verdict=verdict,
    )


_FAMILY = {"sb": "SB", "fkv": "FKV-family", "fm": "FM-family", "fqlv": None}


def _verdict(preferred: str | None, slope_rec: str) -> str:
    if preferred is None:
        return "no model could be calibrated"
    family = _FAMILY.get(preferred)
    if slope_rec in ("insufficient data", "unavailable"):
        return f"best fit is {preferred!r}; slope analysis unavailable for cross-check"
    if family is None:
        return (f"best fit is {preferred!r} (strain-dependent); slope analysis "
                f"suggested {slope_rec!r} among the linear families")
    if family == slope_rec:
        return f"best fit {preferred!r} agrees with the slope-based recommendation"
    return (f"best fit {preferred!r} disagrees with the slope-based "
            f"recommendation {slope_rec!r}; inspect the per-step moduli")


def _params_kpa_text(p: ModelParams) -> str:
    if isinstance(p, SBParams):
        return f"E={p.E / 1e3:.4g} kPa*s^a, alpha={p.alpha:.4f}"
    if isinstance(p, (FKVParams, FMParams)):
        return (f"E1={p.E1 / 1e3:.4g} kPa*s^a1, alpha1={p.alpha1:.4f}, "
                f"E2={p.E2 / 1e3:.4g} kPa*s^a2, alpha2={p.alpha2:.4f}")
    if isinstance(p, FQLVParams):
        return (f"A={p.A / 1e3:.4g} kPa, B={p.B:.4f}, "
                f"E={p.E:.4f} s^a, alpha={p.alpha:.4f}")
    raise TypeError(f"not a parameter set: {p!r}")


def render_report(report: ExistenceReport) -> str:
    """Plain-text ranking table; stresses and moduli shown in kPa."""
    lines = [
        f"sample: {report.sample_id}",
        f"{'rank':<5}{'model':<7}{'RMSE %':>8}{'LSE %':>8}{'SSR [kPa^2]':>13}  parameters",
    ]
    for i, f in enumerate(report.fits, start=1):
        lines.append(
            f"{i:<5}{f.kind:<7}{f.rmse_pct:>8.3f}{f.lse_pct:>8.3f}"
            f"{f.cost / 1e6:>13.4g}  {_params_kpa_text(f.params)}"
        )
    for kind, msg in report.failures.items():
        lines.append(f"-    {kind:<7}failed: {msg}")
    rec_kind, rec_detail = report.slope_recommendation
    lines.append(f"slope analysis: {rec_kind} ({rec_detail})")
    lines.append(f"verdict: {report.verdict}")
    return "\n".join(lines)


def fit_to_json(f: FitResult) -> dict:
    return {
        "kind": f.kind,
        "params": params_to_json(f.params),
        "cost_Pa2": f.cost,
        "lse_pct": f.lse_pct,
        "rmse_pct": f.rmse_pct,
        "n_points": f.n_points,
        "window_s": list(f.window_s),
        "n_evals": f.pso.trace.n_evals,
        "settings": f.settings,
    }


def report_to_json(report: ExistenceReport) -> dict:
    return {
        "sample_id": report.sample_id,
        "ranking": report.ranking,
        "preferred": report.preferred,
        "fits": [fit_to_json(f) for f in report.fits],
        "failures": report.failures,
        "slope_recommendation": {
            "family": report.slope_recommendation[0],
            "detail": report.slope_recommendation[1],
        },
        "verdict": report.verdict,
    }
