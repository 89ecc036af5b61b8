"""Command-line front end: ``relaydof verify | sweep | lp``.

Exit codes: 0 success, 1 a verify invariant failed, 2 a sweep estimate is
invalid (too many aborted trials), 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import converse
from .channel import DEFAULT_H_MAX, DEFAULT_H_MIN, draw_realization
from .dof import MAX_REDRAWS, estimate_dof
from .errors import ConfigError, DegenerateDraw
from .schemes import SCHEME_IDS, resolve

log = logging.getLogger("relaydof")

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_INVALID, EXIT_CONFIG = 0, 1, 2, 3

DEFAULTS = {
    "scheme": "y",
    "k": None,
    "n": None,
    "relays": None,
    "snr_start": 50.0,
    "snr_stop": 90.0,
    "snr_step": 5.0,
    "trials": 200,
    "seed": 0,
    "hmin": DEFAULT_H_MIN,
    "hmax": DEFAULT_H_MAX,
    "out": ".",
    "genie_relay": False,
}

# noise-off thresholds
SYMBOL_TOL = 1e-8
RESIDUAL_TOL = 1e-18  # interference power relative to desired power
NEUTRALIZATION_TOL = 1e-9


def load_config(args: argparse.Namespace) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        unknown = set(doc) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(doc)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    if cfg["scheme"] not in SCHEME_IDS:
        raise ConfigError(f"unknown scheme {cfg['scheme']!r}")
    if not 0 < cfg["hmin"] < cfg["hmax"]:
        raise ConfigError("need 0 < hmin < hmax")
    return cfg


def snr_grid(cfg: dict) -> np.ndarray:
    start, stop, step = cfg["snr_start"], cfg["snr_stop"], cfg["snr_step"]
    if step <= 0 or stop <= start:
        raise ConfigError("need snr_step > 0 and snr_stop > snr_start")
    count = int(round((stop - start) / step)) + 1
    return start + step * np.arange(count)


# -- verify ----------------------------------------------------------------

def _check_round(result, spec, channels) -> dict:
    """Noise-off invariants of one round; returns the measured quantities."""
    out = {
        "symbol_error": result.max_symbol_error(),
        "residual_interference": result.max_residual_interference(),
        "rank_deficit": max(r.h_eff.shape[1] - r.rank for r in result.reports),
        "half_duplex": 0.0 if result.plan.check_half_duplex() else 1.0,
    }
    ex = result.extras
    if "isolation" in ex:
        out["isolation"] = ex["isolation"]
    if "neutralization_residual" in ex:
        out["neutralization_residual"] = ex["neutralization_residual"]
    if spec.scheme == "ic_af":
        from . import scheme_pairwise as sp

        df = sp.run_round(channels, "IC_nullspace", result.power, noise_on=False,
                          rng=np.random.default_rng(0))
        out["af_df_gap"] = float(np.max(np.abs(ex["relay_signal"] - df.extras["relay_signal"])))
    return out


LIMITS = {
    "symbol_error": SYMBOL_TOL,
    "residual_interference": RESIDUAL_TOL,
    "rank_deficit": 0,
    "half_duplex": 0,
    "isolation": RESIDUAL_TOL,
    "neutralization_residual": NEUTRALIZATION_TOL,
    "af_df_gap": 1e-9,
}


def cmd_verify(cfg: dict) -> tuple[int, dict]:
    spec = resolve(cfg["scheme"], cfg["k"], cfg["n"], cfg["relays"])
    worst: dict = {}
    null_dims = Counter()
    aborted = 0
    P = 1.0
    for t in range(cfg["trials"]):
        for attempt in range(MAX_REDRAWS + 1):
            seed = np.random.SeedSequence([cfg["seed"], t, attempt])
            ch = draw_realization(spec.topology, spec.slot_count, seed, cfg["hmin"], cfg["hmax"])
            try:
                res = spec.run(ch, P, noise_on=False, rng=np.random.default_rng(seed),
                               genie_relay=cfg["genie_relay"])
            except DegenerateDraw:
                continue
            break
        else:
            aborted += 1
            continue
        for key, val in _check_round(res, spec, ch).items():
            worst[key] = max(worst.get(key, 0.0), float(val))
        if "null_dim" in res.extras:
            null_dims[res.extras["null_dim"]] += 1

    failed = next((k for k, v in worst.items() if v > LIMITS[k]), None)
    if failed is None and aborted > 0.01 * cfg["trials"]:
        failed = "abort_rate"
    report = {
        "scheme": spec.scheme,
        "trials": cfg["trials"],
        "seed": cfg["seed"],
        "aborted": aborted,
        "passed": failed is None,
        "failed_invariant": failed,
        "max": worst,
        "limits": {k: LIMITS[k] for k in worst},
    }
    if null_dims:
        report["null_dim_histogram"] = {str(k): v for k, v in sorted(null_dims.items())}
    return (EXIT_OK if failed is None else EXIT_VERIFY_FAILED), report


# -- sweep -----------------------------------------------------------------

def render_svg(est, width: int = 640, height: int = 420) -> str:
    """Static SVG 1.1 line chart of mean sum-rate against SNR with the fitted slope."""
    x = np.asarray(est.snr_grid_db)
    y = np.asarray(est.mean_rates)
    left, right, top, bottom = 70, 20, 40, 60
    pw, ph = width - left - right, height - top - bottom
    y_lo = float(np.floor(min(y.min(), 0.0)))
    y_hi = float(np.ceil(y.max() + 1e-9)) or 1.0
    x_lo, x_hi = float(x[0]), float(x[-1])

    def px(v):
        return left + (v - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return top + ph - (v - y_lo) / (y_hi - y_lo) * ph

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{est.scheme}: mean sum-rate vs SNR</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for v in x:
        parts.append(f'<line x1="{px(v):.2f}" y1="{top + ph}" x2="{px(v):.2f}" '
                     f'y2="{top + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(v):.2f}" y="{top + ph + 20}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{v:g}</text>')
    for v in np.linspace(y_lo, y_hi, 5):
        parts.append(f'<line x1="{left - 5}" y1="{py(v):.2f}" x2="{left}" y2="{py(v):.2f}" '
                     f'stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{py(v) + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{v:.1f}</text>')
    parts.append(f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12">SNR (dB)</text>')
    parts.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 18 {top + ph / 2:.1f})">sum-rate (bits/slot)</text>')
    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="2"/>')
    for a, b in zip(x, y):
        parts.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="#1f4e9c"/>')
    # fitted line over the fit window
    k = est.fit_points
    xf = x[-k:]
    lx = xf * np.log2(10.0) / 10.0
    intercept = float(np.mean(y[-k:]) - est.slope * np.mean(lx))
    fx = np.array([xf[0], xf[-1]])
    fy = intercept + est.slope * fx * np.log2(10.0) / 10.0
    parts.append(f'<line x1="{px(fx[0]):.2f}" y1="{py(fy[0]):.2f}" x2="{px(fx[1]):.2f}" '
                 f'y2="{py(fy[1]):.2f}" stroke="#c0392b" stroke-dasharray="6,4" stroke-width="1.5"/>')
    parts.append(f'<text x="{left + 10}" y="{top + 16}" font-family="sans-serif" font-size="12" '
                 f'fill="#c0392b">fitted slope {est.slope:.4f} &#177; {est.stderr:.1e} '
                 f'(nominal {est.nominal:.4f})</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_sweep(cfg: dict) -> tuple[int, dict]:
    est = estimate_dof(cfg["scheme"], snr_grid(cfg), cfg["trials"], cfg["seed"],
                       K=cfg["k"], N=cfg["n"], R=cfg["relays"],
                       h_min=cfg["hmin"], h_max=cfg["hmax"], genie_relay=cfg["genie_relay"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(est.to_csv(), encoding="utf-8")
    (out / "sweep.svg").write_text(render_svg(est), encoding="utf-8")
    (out / "dof.json").write_text(est.to_json(), encoding="utf-8")
    summary = {"scheme": est.scheme, "slope": est.slope, "stderr": est.stderr,
               "nominal_dof": est.nominal, "valid": est.valid, "aborted": est.aborted,
               "out": str(out)}
    return (EXIT_OK if est.valid else EXIT_INVALID), summary


# -- lp --------------------------------------------------------------------

def cmd_lp(K: int) -> tuple[int, dict]:
    res = converse.lp_bound(K)
    doc = res.to_dict()
    doc["sum_bound"] = converse.lemma1_sum_bound(K).value
    return EXIT_OK, doc


# -- entry point -----------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with any of the options below")
    p.add_argument("--scheme", choices=SCHEME_IDS)
    p.add_argument("--k", type=int, help="number of users")
    p.add_argument("--n", type=int, help="relay antennas")
    p.add_argument("--relays", type=int, help="distributed relay count")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--hmin", type=float, help="smallest channel magnitude")
    p.add_argument("--hmax", type=float, help="largest channel magnitude")
    p.add_argument("--genie-relay", action="store_true", dest="genie_relay",
                   help="relay forwards exact symbols")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaydof", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="noise-off algebraic checks over random draws")
    _add_common(p)

    p = sub.add_parser("sweep", help="sum-rate sweep and DoF slope")
    _add_common(p)
    p.add_argument("--snr-start", type=float, dest="snr_start")
    p.add_argument("--snr-stop", type=float, dest="snr_stop")
    p.add_argument("--snr-step", type=float, dest="snr_step")
    p.add_argument("--out", help="output directory")

    p = sub.add_parser("lp", help="cut-set LP bound")
    p.add_argument("--k", type=int, required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "lp":
            code, doc = cmd_lp(args.k)
        else:
            cfg = load_config(args)
            if args.command == "verify":
                code, doc = cmd_verify(cfg)
            else:
                code, doc = cmd_sweep(cfg)
    except ConfigError as exc:
        print(f"relaydof: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(doc, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
