"""Command-line front end.

Subcommands: ingest, analyze, simulate, fit, report.  A JSON config file
(--config) supplies defaults that explicit flags override.  Every output
JSON embeds the effective configuration needed to re-run the command;
the only non-deterministic field is `created_utc` in the metadata.  All
files are written atomically (temp file + rename).

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical or fit
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .calib import (
    DEFAULT_BOUNDS,
    existence_report,
    fit as run_fit,
    fit_to_json,
    render_report,
    report_to_json,
)
from .dataio import (
    DEFAULT_DT_S,
    DEFAULT_FILTER_WINDOW,
    DEFAULT_ONSET_SKIP,
    DEFAULT_SLOPE_LONG_MIN_S,
    DEFAULT_SLOPE_SHORT_MAX_S,
    estimate_modulus,
    ingest_csv,
    modulus_to_json,
    moving_average,
    recommend_model,
)
from .errors import ConfigError, DataError, DomainError, FitError, FracRheoError
from .l1solver import (
    StrainProtocol,
    UniformGrid,
    forward_solve,
    paper_protocol,
    rasterize_protocol,
)
from .models import params_from_json, params_to_json
from .pso import PsoConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

DEFAULT_PSO_LINEAR = (30, 1000)
DEFAULT_PSO_FQLV = (30, 100)


def _atomic_write(path: str, data: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: str, header: list, columns: list) -> None:
    rows = zip(*columns)
    lines = [",".join(header)]
    lines += [",".join(format(v, ".17g") for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def _meta(effective_config: dict, extra: dict | None = None) -> dict:
    payload = {
        "tool": "fracrheo",
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "config": effective_config,
    }
    if extra:
        payload.update(extra)
    return payload


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise DataError(f"config file is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    """File config fills in every flag the user left at its default."""
    cfg = _load_config_file(getattr(args, "config", None))
    merged = {}
    for key, value in vars(args).items():
        if key in ("func", "config"):
            continue
        if key in cfg and value == parser.get_default(key):
            merged[key] = cfg[key]
        else:
            merged[key] = value
    unknown = set(cfg) - set(vars(args))
    if unknown:
        raise ConfigError(f"config file has unknown keys: {sorted(unknown)}")
    return merged


def _print_defaults() -> None:
    print(
        f"defaults: dt={DEFAULT_DT_S}s, filter_window={DEFAULT_FILTER_WINDOW}, "
        f"pso_linear={DEFAULT_PSO_LINEAR[0]}x{DEFAULT_PSO_LINEAR[1]}, "
        f"pso_fqlv={DEFAULT_PSO_FQLV[0]}x{DEFAULT_PSO_FQLV[1]}"
    )


def _parse_protocol(cfg: dict) -> StrainProtocol:
    if cfg.get("protocol") == "paper":
        return paper_protocol(ramp_s=cfg["ramp"] if cfg.get("ramp") else DEFAULT_DT_S)
    steps = cfg.get("step") or []
    if not steps:
        raise ConfigError("no protocol: give --protocol paper or at least one --step")
    parsed = []
    for s in steps:
        if ":" in s:
            onset_s, level_s = s.split(":", 1)
        else:
            onset_s, level_s = "0", s
        try:
            parsed.append((float(onset_s), float(level_s)))
        except ValueError:
            raise ConfigError(f"bad --step {s!r}; expected LEVEL or ONSET:LEVEL")
    ramp = cfg.get("ramp") or cfg["dt"]
    return StrainProtocol(steps=tuple(parsed), ramp_s=ramp)


def _params_from_cfg(cfg: dict):
    if cfg.get("params"):
        with open(cfg["params"], encoding="utf-8") as fh:
            return params_from_json(json.load(fh))
    kind = cfg.get("model")
    if not kind:
        raise ConfigError("no model: give --model or a --params file")
    flag_map = {
        "sb": {"E_Pa_s_alpha": "E", "alpha": "alpha"},
        "fkv": {"E1_Pa_s_alpha1": "E1", "alpha1": "alpha1",
                "E2_Pa_s_alpha2": "E2", "alpha2": "alpha2"},
        "fm": {"E1_Pa_s_alpha1": "E1", "alpha1": "alpha1",
               "E2_Pa_s_alpha2": "E2", "alpha2": "alpha2"},
        "fqlv": {"A_Pa": "A", "B": "B", "E_s_alpha": "E", "alpha": "alpha"},
    }
    if kind not in flag_map:
        raise ConfigError(f"unknown model kind: {kind!r}")
    d = {"model": kind}
    missing = []
    for field, flag in flag_map[kind].items():
        v = cfg.get(flag)
        if v is None:
            missing.append(f"--{flag}")
        else:
            d[field] = v
    if missing:
        raise ConfigError(f"model {kind!r} needs {', '.join(missing)}")
    return params_from_json(d)


def cmd_simulate(cfg: dict) -> int:
    params = _params_from_cfg(cfg)
    proto = _parse_protocol(cfg)
    dt = cfg["dt"]
    duration = cfg.get("duration")
    if duration is None:
        duration = proto.onsets[-1] + 2700.0  # paper-style final hold
    grid = UniformGrid(dt=dt, n_steps=int(np.ceil(duration / dt)))
    strain, raster_meta = rasterize_protocol(proto, grid)
    sigma = forward_solve(params, strain, grid)

    out = cfg["out_dir"]
    stress_path = os.path.join(out, "stress.csv")
    _write_csv(stress_path, ["time_s", "stress_Pa", "strain"],
               [grid.times(), sigma, strain])
    with open(stress_path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    _write_json(os.path.join(out, "meta.json"), _meta(cfg, {
        "params": params_to_json(params),
        "grid": {"dt_s": grid.dt, "n_steps": grid.n_steps, "t0_s": grid.t0},
        "protocol": {"steps": list(proto.steps), "ramp_s": proto.ramp_s},
        "raster": raster_meta,
        "stress_csv_sha256": digest,
    }))
    print(f"wrote {stress_path} ({grid.n_steps + 1} samples, sha256 {digest[:12]}...)")
    return EXIT_OK


def _ingest(cfg: dict):
    rec = ingest_csv(cfg["input"], mode=cfg["mode"])
    if cfg.get("filter_window", 0):
        rec.stress = moving_average(rec.stress, cfg["filter_window"])
    return rec


def cmd_ingest(cfg: dict) -> int:
    rec = _ingest(cfg)
    out = cfg["out_dir"]
    _write_csv(os.path.join(out, "record.csv"), ["time_s", "stress_Pa", "strain"],
               [rec.stress.t, rec.stress.y, rec.strain.y])
    _write_json(os.path.join(out, "meta.json"), _meta(cfg, {
        "sample_id": rec.sample_id,
        "n_samples": len(rec.stress),
        "protocol": {"steps": list(rec.protocol.steps), "ramp_s": rec.protocol.ramp_s},
    }))
    print(f"ingested {len(rec.stress)} samples, "
          f"{len(rec.protocol.steps)} strain steps")
    return EXIT_OK


def cmd_analyze(cfg: dict) -> int:
    rec = _ingest(cfg)
    est = estimate_modulus(rec, t_short_max=cfg["slope_short_max"],
                           t_long_min=cfg["slope_long_min"],
                           onset_skip=cfg["onset_skip"])
    family, detail = recommend_model(est)
    out = cfg["out_dir"]
    for i, _, ts in est.per_step:
        _write_csv(os.path.join(out, f"modulus_step_{i}.csv"),
                   ["time_s", "G_Pa"], [ts.t, ts.y])
    _write_json(os.path.join(out, "slopes.json"), _meta(cfg, {
        "modulus": modulus_to_json(est),
        "recommendation": {"family": family, "detail": detail},
    }))
    print(f"recommendation: {family} ({detail})")
    return EXIT_OK


def _pso_config(cfg: dict, kind: str) -> PsoConfig:
    default = DEFAULT_PSO_FQLV if kind == "fqlv" else DEFAULT_PSO_LINEAR
    return PsoConfig(
        n_pop=cfg.get("n_pop") or default[0],
        n_iter=cfg.get("n_iter") or default[1],
        seed=cfg.get("seed"),
    )


def cmd_fit(cfg: dict) -> int:
    rec = _ingest(cfg)
    kind = cfg["model"]
    if kind not in DEFAULT_BOUNDS:
        raise ConfigError(f"unknown model kind: {kind!r}")
    result = run_fit(rec, kind, dt=cfg["dt"], cfg=_pso_config(cfg, kind),
                     restarts=cfg["restarts"])
    out = cfg["out_dir"]
    _write_json(os.path.join(out, "fit.json"),
                _meta(cfg, {"fit": fit_to_json(result)}))
    lo, hi = result.window_s
    mask = (rec.stress.t >= lo) & (rec.stress.t < hi) if hi < rec.stress.t[-1] \
        else (rec.stress.t >= lo)
    t0 = min(0.0, float(rec.stress.t[0]))
    grid = UniformGrid(dt=cfg["dt"],
                       n_steps=int(np.ceil((rec.stress.t[-1] - t0) / cfg["dt"])),
                       t0=t0)
    strain, _ = rasterize_protocol(rec.protocol, grid)
    sigma_model = forward_solve(result.params, strain, grid)
    pred = np.interp(rec.stress.t[mask], grid.times(), sigma_model)
    _write_csv(os.path.join(out, "residuals.csv"),
               ["time_s", "stress_Pa", "model_Pa", "residual_Pa"],
               [rec.stress.t[mask], rec.stress.y[mask], pred,
                pred - rec.stress.y[mask]])
    trace = result.pso.trace
    _write_csv(os.path.join(out, "trace.csv"), ["iteration", "best_cost"],
               [np.arange(len(trace.best_cost)), np.asarray(trace.best_cost)])
    print(f"fit {kind}: RMSE {result.rmse_pct:.3f}%, LSE {result.lse_pct:.3f}%, "
          f"{trace.n_evals} evaluations")
    return EXIT_OK


def cmd_report(cfg: dict) -> int:
    rec = _ingest(cfg)
    kinds = tuple(cfg["models"].split(",")) if cfg.get("models") else ("sb", "fkv", "fm", "fqlv")
    linear = PsoConfig(n_pop=cfg.get("n_pop") or DEFAULT_PSO_LINEAR[0],
                       n_iter=cfg.get("n_iter") or DEFAULT_PSO_LINEAR[1],
                       seed=cfg.get("seed"))
    fqlv = PsoConfig(n_pop=cfg.get("n_pop") or DEFAULT_PSO_FQLV[0],
                     n_iter=cfg.get("n_iter_fqlv") or DEFAULT_PSO_FQLV[1],
                     seed=cfg.get("seed"))
    report = existence_report(rec, kinds=kinds, dt=cfg["dt"], cfg=linear,
                              fqlv_cfg=fqlv, restarts=cfg["restarts"])
    out = cfg["out_dir"]
    text = render_report(report)
    _atomic_write(os.path.join(out, "report.txt"), text + "\n")
    _write_json(os.path.join(out, "report.json"),
                _meta(cfg, {"report": report_to_json(report)}))

    # plot-data bundle: log-log modulus series and fitted stress overlays
    try:
        est = estimate_modulus(rec)
        for i, _, ts in est.per_step:
            _write_csv(os.path.join(out, f"plot_modulus_step_{i}.csv"),
                       ["time_s", "G_Pa"], [ts.t, ts.y])
    except DataError:
        pass
    grid = UniformGrid(dt=cfg["dt"],
                       n_steps=int(np.ceil((rec.stress.t[-1] - min(0.0, rec.stress.t[0]))
                                           / cfg["dt"])),
                       t0=min(0.0, float(rec.stress.t[0])))
    strain, _ = rasterize_protocol(rec.protocol, grid)
    for f in report.fits:
        sigma_model = forward_solve(f.params, strain, grid)
        _write_csv(os.path.join(out, f"plot_stress_{f.kind}.csv"),
                   ["time_s", "stress_Pa"], [grid.times(), sigma_model])
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracrheo",
        description="Fractional viscoelastic relaxation: simulation, analysis, "
                    "and two-stage model calibration.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--out-dir", dest="out_dir", default=".",
                       help="output directory (default: current)")

    def data_flags(p):
        p.add_argument("--input", required=True, help="input CSV path")
        p.add_argument("--mode", choices=["force_area", "stress"], default="stress")
        p.add_argument("--filter-window", dest="filter_window", type=int,
                       default=DEFAULT_FILTER_WINDOW,
                       help="moving-average window, odd; 0 disables")

    def model_flags(p):
        p.add_argument("--model", choices=["sb", "fkv", "fm", "fqlv"])
        p.add_argument("--params", help="JSON file with a serialized parameter set")
        for flag in ("E", "alpha", "E1", "alpha1", "E2", "alpha2", "A", "B"):
            p.add_argument(f"--{flag}", type=float, default=None,
                           help=f"model parameter {flag} (SI units: Pa)")

    def fit_flags(p):
        p.add_argument("--dt", type=float, default=DEFAULT_DT_S,
                       help="simulation grid step [s]")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--n-pop", dest="n_pop", type=int, default=None)
        p.add_argument("--n-iter", dest="n_iter", type=int, default=None)
        p.add_argument("--restarts", type=int, default=1)

    p = sub.add_parser("ingest", help="validate and normalize a relaxation CSV")
    common(p); data_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="per-step moduli, slopes, model recommendation")
    common(p); data_flags(p)
    p.add_argument("--slope-short-max", dest="slope_short_max", type=float,
                   default=DEFAULT_SLOPE_SHORT_MAX_S)
    p.add_argument("--slope-long-min", dest="slope_long_min", type=float,
                   default=DEFAULT_SLOPE_LONG_MIN_S)
    p.add_argument("--onset-skip", dest="onset_skip", type=int,
                   default=DEFAULT_ONSET_SKIP)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="forward-solve a model under a strain protocol")
    common(p); model_flags(p)
    p.add_argument("--dt", type=float, default=DEFAULT_DT_S)
    p.add_argument("--duration", type=float, default=None, help="total time [s]")
    p.add_argument("--step", action="append", default=None, metavar="LEVEL|ONSET:LEVEL",
                   help="strain step; repeatable")
    p.add_argument("--protocol", choices=["paper"], default=None,
                   help="named protocol: five steps to strain 2.0 over 210 min")
    p.add_argument("--ramp", type=float, default=None, help="ramp duration [s]")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="calibrate one model to a record")
    common(p); data_flags(p); fit_flags(p)
    p.add_argument("--model", choices=["sb", "fkv", "fm", "fqlv"], required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="existence study: fit and rank all candidates")
    common(p); data_flags(p); fit_flags(p)
    p.add_argument("--models", default=None, help="comma-separated kinds (default all)")
    p.add_argument("--n-iter-fqlv", dest="n_iter_fqlv", type=int, default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args, parser)
        _print_defaults()
        return args.func(cfg)
    except (DataError,) as exc:  # includes SchemaError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FracRheoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
