"""Ingestion and analysis of relaxation records.

Reads force/area or stress CSVs, applies a centered moving-average
filter, estimates per-step relaxation moduli G(t) = sigma(t)/eps_i with
short/long-time log-log slopes, recommends a candidate model family from
the slope ordering, and resamples between nonuniform and uniform grids.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, SchemaError
from .l1solver import StrainProtocol, UniformGrid

DEFAULT_FILTER_WINDOW = 31  # "thirty neighbor points", rounded up to odd
DEFAULT_SLOPE_SHORT_MAX_S = 3.0
DEFAULT_SLOPE_LONG_MIN_S = 400.0
DEFAULT_ONSET_SKIP = 2
DEFAULT_DT_S = 0.495


@dataclass(frozen=True)
class TimeSeries:
    """Sampled signal on a strictly increasing time base."""

    t: np.ndarray
    y: np.ndarray
    unit: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if t.shape != y.shape or t.ndim != 1:
            raise DataError("time and value arrays must be 1-D and equal length")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.t)


@dataclass
class ExperimentRecord:
    """One relaxation experiment: stress and strain on a shared time base."""

    sample_id: str
    stress: TimeSeries
    strain: TimeSeries
    protocol: StrainProtocol
    metadata: dict = field(default_factory=dict)


@dataclass
class SlopeFit:
    slope: float
    stderr: float
    n_points: int


@dataclass
class ModulusEstimate:
    """Per-step relaxation modulus curves and their limiting slopes."""

    per_step: list  # (step index, eps_i, TimeSeries with re-origined time)
    beta1: SlopeFit | None
    beta2: SlopeFit | None
    windows: tuple[float, float]  # (t_short_max, t_long_min) [s]
    settings: dict = field(default_factory=dict)


def _validate_time(t: np.ndarray, context: str) -> None:
    bad = np.where(np.diff(t) <= 0)[0]
    if bad.size:
        raise DataError(
            f"{context}: time must be strictly increasing; first violation at "
            f"row {bad[0] + 3} (t={t[bad[0] + 1]:g} after t={t[bad[0]]:g})"
        )


def ingest_csv(path, mode: str, sample_id: str = "", protocol: StrainProtocol | None = None,
               min_rise: float = 1e-9) -> ExperimentRecord:
    """Read a relaxation record.

    `mode` is "force_area" (columns time_s,force_N,area_m2,strain; true
    stress computed as F/A) or "stress" (columns time_s,stress_Pa,strain).
    The step protocol is inferred from the strain column unless given.
    """
    if mode == "force_area":
        required = ["time_s", "force_N", "area_m2", "strain"]
    elif mode == "stress":
        required = ["time_s", "stress_Pa", "strain"]
    else:
        raise SchemaError(f"unknown ingestion mode: {mode!r}")

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}; header is {header}")
        rows = {c: [] for c in required}
        for i, row in enumerate(reader, start=2):
            for c in required:
                try:
                    rows[c].append(float(row[c]))
                except (TypeError, ValueError):
                    raise DataError(f"{path}: row {i}: bad value for {c!r}: {row[c]!r}")

    t = np.asarray(rows["time_s"])
    if t.size < 2:
        raise DataError(f"{path}: need at least two rows")
    _validate_time(t, str(path))
    strain = np.asarray(rows["strain"])
    if mode == "force_area":
        area = np.asarray(rows["area_m2"])
        nonpos = np.where(area <= 0)[0]
        if nonpos.size:
            raise DataError(f"{path}: nonpositive area at row {nonpos[0] + 2}")
        stress = np.asarray(rows["force_N"]) / area
    else:
        stress = np.asarray(rows["stress_Pa"])

    if protocol is None:
        protocol = infer_protocol(TimeSeries(t, strain), min_rise=min_rise)
    return ExperimentRecord(
        sample_id=sample_id or str(path),
        stress=TimeSeries(t, stress, unit="Pa"),
        strain=TimeSeries(t, strain),
        protocol=protocol,
        metadata={"source": str(path), "mode": mode},
    )


def infer_protocol(strain: TimeSeries, min_rise: float = 1e-9) -> StrainProtocol:
    """Detect step onsets and hold levels from a rasterized strain signal.

    A step starts where the strain increases by more than `min_rise`
    after a hold; its level is the value reached at the next hold.
    """
    y = strain.y
    t = strain.t
    rising = np.diff(y) > min_rise
    steps = []
    i = 0
    n = len(y) - 1
    while i < n:
        if rising[i]:
            onset = t[i]
            while i < n and rising[i]:
                i += 1
            steps.append((onset, y[i]))
        else:
            i += 1
    if not steps:
        raise DataError("no strain steps detected; protocol cannot be inferred")
    ramps = [t[np.searchsorted(t, o):][:2] for o, _ in steps]
    ramp_s = max(float(np.median(np.diff(t))), min(r[1] - r[0] for r in ramps if len(r) == 2))
    return StrainProtocol(steps=tuple(steps), ramp_s=ramp_s)


def moving_average(series: TimeSeries, window: int = DEFAULT_FILTER_WINDOW) -> TimeSeries:
    """Centered moving average with symmetric truncation at the edges.

    The window must be odd so the filter is centered and does not shift
    relaxation onsets; at the boundaries the radius shrinks to what is
    available on both sides (constants and linear interiors pass through
    unchanged).
    """
    if window < 1 or window % 2 == 0:
        raise DomainError(f"filter window must be a positive odd count, got {window}")
    y = series.y
    n = len(y)
    half = window // 2
    out = np.empty(n)
    csum = np.concatenate(([0.0], np.cumsum(y)))
    for i in range(n):
        r = min(half, i, n - 1 - i)
        out[i] = (csum[i + r + 1] - csum[i - r]) / (2 * r + 1)
    return TimeSeries(series.t, out, unit=series.unit)


def loglog_slope(t: np.ndarray, y: np.ndarray) -> SlopeFit:
    """Least-squares slope of log(y) against log(t)."""
    if np.any(t <= 0) or np.any(y <= 0):
        raise DataError("log-log slope needs positive times and values")
    x = np.log(t)
    z = np.log(y)
    n = len(x)
    A = np.column_stack([x, np.ones(n)])
    coef, *_ = np.linalg.lstsq(A, z, rcond=None)
    resid = z - A @ coef
    if n > 2:
        s2 = float(resid @ resid) / (n - 2)
        xc = x - x.mean()
        denom = float(xc @ xc)
        stderr = float(np.sqrt(s2 / denom)) if denom > 0 else float("nan")
    else:
        stderr = 0.0
    return SlopeFit(slope=float(coef[0]), stderr=stderr, n_points=n)


def estimate_modulus(rec: ExperimentRecord,
                     t_short_max: float = DEFAULT_SLOPE_SHORT_MAX_S,
                     t_long_min: float = DEFAULT_SLOPE_LONG_MIN_S,
                     onset_skip: int = DEFAULT_ONSET_SKIP,
                     min_samples: int = 5) -> ModulusEstimate:
    """Per-step relaxation moduli G(t) = sigma(t)/eps_i and slope fits.

    Each step window runs from its onset to the next onset; time is
    re-origined to the window's first sample.  Short/long-time slopes
    pool the log-log points of all steps, skipping `onset_skip` samples
    after each onset so the loading ramp does not bias the fit.
    """
    onsets = list(rec.protocol.onsets)
    levels = list(rec.protocol.levels)
    t = rec.stress.t
    sigma = rec.stress.y
    per_step = []
    short_pts = ([], [])
    long_pts = ([], [])
    for i, (onset, level) in enumerate(zip(onsets, levels)):
        if level <= 0:
            raise DataError(f"step {i}: cumulative strain level must be > 0")
        end = onsets[i + 1] if i + 1 < len(onsets) else np.inf
        mask = (t >= onset) & (t < end)
        if not mask.any():
            continue
        tw = t[mask]
        gw = sigma[mask] / level
        t_rel = tw - tw[0]
        per_step.append((i, level, TimeSeries(t_rel, gw, unit="Pa")))
        sel = np.arange(len(t_rel)) >= onset_skip
        ok = sel & (t_rel > 0) & (gw > 0)
        m_short = ok & (t_rel <= t_short_max)
        m_long = ok & (t_rel >= t_long_min)
        short_pts[0].extend(t_rel[m_short]); short_pts[1].extend(gw[m_short])
        long_pts[0].extend(t_rel[m_long]); long_pts[1].extend(gw[m_long])
    if not per_step:
        raise DataError("no usable relaxation steps in record")

    def _fit(pts):
        tt, yy = np.asarray(pts[0]), np.asarray(pts[1])
        if len(tt) < min_samples:
            return None
        return loglog_slope(tt, yy)

    return ModulusEstimate(
        per_step=per_step,
        beta1=_fit(short_pts),
        beta2=_fit(long_pts),
        windows=(t_short_max, t_long_min),
        settings={"onset_skip": onset_skip, "min_samples": min_samples},
    )


def resample_to_uniform(series: TimeSeries, dt: float, t_end: float | None = None):
    """Linear interpolation onto a uniform grid anchored at the first sample.

    Returns (grid, values).  The grid covers [t[0], t_end] (default: the
    last sample); requests beyond the sampled range are range errors.
    """
    if dt <= 0:
        raise DomainError(f"dt must be > 0, got {dt:g}")
    t0 = float(series.t[0])
    t_last = float(series.t[-1])
    if t_end is None:
        t_end = t_last
    if t_end > t_last + 1e-12 * max(1.0, abs(t_last)):
        raise DataError(f"resampling to {t_end:g}s would extrapolate past {t_last:g}s")
    n = int(np.floor((t_end - t0) / dt + 1e-9))
    if n < 1:
        raise DataError("resampling range shorter than one grid step")
    grid = UniformGrid(dt=dt, n_steps=n, t0=t0)
    values = np.interp(grid.times(), series.t, series.y)
    return grid, values


def resample_to_nonuniform(grid: UniformGrid, values: np.ndarray,
                           target_times: np.ndarray) -> TimeSeries:
    """Linear interpolation from a uniform grid back to arbitrary times."""
    target_times = np.asarray(target_times, dtype=float)
    tg = grid.times()
    eps = 1e-9 * max(1.0, abs(grid.t_end))
    if target_times.min() < tg[0] - eps or target_times.max() > tg[-1] + eps:
        raise DataError(
            f"target times [{target_times.min():g}, {target_times.max():g}]s fall "
            f"outside the grid [{tg[0]:g}, {tg[-1]:g}]s"
        )
    return TimeSeries(target_times, np.interp(target_times, tg, values))


def recommend_model(est: ModulusEstimate, tol: float = 0.05):
    """Pick a candidate family from the slope ordering.

    Equal slopes (within `tol`) mean a single scale-free power law (SB);
    a shallower short-time slope means slower-to-faster relaxation
    (FM family); the reverse ordering means FKV family.
    """
    if est.beta1 is None or est.beta2 is None:
        return "insufficient data", "short- or long-time slope unavailable"
    b1, b2 = est.beta1.slope, est.beta2.slope
    detail = (
        f"beta1 = {b1:.4f} (±{est.beta1.stderr:.4f}), "
        f"beta2 = {b2:.4f} (±{est.beta2.stderr:.4f})"
    )
    if abs(b1 - b2) <= tol:
        return "SB", f"single power law: {detail}"
    if abs(b1) < abs(b2):
        return "FM-family", f"slower-to-faster relaxation: {detail}"
    return "FKV-family", f"faster-to-slower relaxation: {detail}"


def modulus_to_json(est: ModulusEstimate) -> dict:
    """JSON-ready dict with per-step arrays, slopes, and settings."""
    def _slope(s):
        return None if s is None else {"slope": s.slope, "stderr": s.stderr,
                                       "n_points": s.n_points}
    return {
        "per_step": [
            {"step": i, "strain_level": lvl,
             "t_s": ts.t.tolist(), "G_Pa": ts.y.tolist()}
            for i, lvl, ts in est.per_step
        ],
        "beta1": _slope(est.beta1),
        "beta2": _slope(est.beta2),
        "window_short_max_s": est.windows[0],
        "window_long_min_s": est.windows[1],
        "settings": est.settings,
    }
