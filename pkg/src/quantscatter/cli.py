"""Command-line front end.

Subcommands: fig1, scan, fit, oracle, visibility. Every command validates
its inputs before computing and writes its output atomically, so a failed
run never leaves a partial file behind.

Exit codes: 0 success, 2 validation error, 3 numerical failure,
4 ambiguous fit (the report is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import analysis, inverse, oracle, presets
from .analysis import UNITS_NOTE, Signal1D, _atomic_write
from .config import ConfigError, RunConfig, load_config, validate
from .correlators import Detector
from .geometry import polarization_basis
from .states import SpectralEnvelope, make_one_photon, symmetrize_two_photon

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_AMBIGUOUS = 0, 2, 3, 4


class Ambiguous(Exception):
    pass


def _emit(text: str, out) -> None:
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _fmt(args, default="csv") -> str:
    if args.format:
        return args.format
    if args.out and str(args.out).endswith(".json"):
        return "json"
    return default


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig({}, "<command line>")
    if getattr(args, "preset", None):
        if cfg.preset and cfg.preset != args.preset:
            raise ConfigError(f"--preset {args.preset!r} conflicts with config preset {cfg.preset!r}")
        cfg.values["preset"] = args.preset
        validate(cfg)
    return cfg


def scenario_from_config(cfg: RunConfig):
    if cfg.preset and cfg.explicit:
        raise ConfigError(f"{cfg.source}: give either a preset or an explicit spec, not both")
    if cfg.preset:
        try:
            return presets.get_preset(cfg.preset)
        except ValueError as exc:
            raise ConfigError(f"{cfg.source}: field 'preset': {exc}") from None
    if not cfg.explicit:
        raise ConfigError(f"{cfg.source}: need a 'preset' or an explicit spec ('state = ...')")
    v = cfg.values
    kw = {"state": v["state"]}
    mapping = {"model": "model_kind", "lambda": "lam", "axis": "axis", "s1": "s1", "n1": "n1",
               "s2": "s2", "n2": "n2", "pol1": "pol1", "pol_matrix": "pol_matrix",
               "component1": "component1", "component2": "component2", "ratio": "ratio",
               "omega0": "omega0", "angular_width": "angular_width", "chi": "chi"}
    for key, attr in mapping.items():
        if key in v:
            kw[attr] = v[key]
    try:
        return presets.ExplicitScenario(**kw)
    except ValueError as exc:
        raise ConfigError(f"{cfg.source}: explicit spec: {exc}") from None


# ---------------------------------------------------------------------------
# fig1


def fig1_table(chi: float, x) -> str:
    curves = presets.fig1_curves(chi, x)
    buf = io.StringIO()
    buf.write(f"# {UNITS_NOTE}\n# chi = {chi!r}; x = a*omega\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "red", "black", "green"])
    for row in zip(curves["x"], curves["red"], curves["black"], curves["green"]):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def cmd_fig1(args) -> int:
    cfg = _config(args)
    chi = args.chi if args.chi is not None else cfg.get("chi", 0.9)
    if not 0.5 < chi < 1:
        raise ConfigError(f"chi = {chi} violates the sub-optimal resolution constraint 1/2 < chi < 1")
    x = cfg.grid() if ("start" in cfg.values or "stop" in cfg.values) else \
        np.linspace(0.0, cfg.get("stop", 4 * math.pi), cfg.get("points", 10000))
    if _fmt(args) == "json":
        c = presets.fig1_curves(chi, x)
        text = json.dumps({"units": UNITS_NOTE, "chi": chi,
                           **{k: np.asarray(v).tolist() for k, v in c.items()}}, indent=1)
    else:
        text = fig1_table(chi, x)
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan


def run_scan(cfg: RunConfig, seed: int | None = None, threads: int = 1) -> Signal1D:
    sc = scenario_from_config(cfg)
    variable = cfg.get("variable", "x")
    grid = cfg.grid()
    a = cfg.get("a", 1.3)
    if variable == "x":
        fn = lambda x: sc.evaluate(x / sc.omega0)
    else:
        if grid[0] <= 0:
            raise ConfigError(f"{cfg.source}: omega scans need start > 0")
        fn = lambda w: sc.evaluate(a, w)
    meta = {"scenario": getattr(sc, "name", "explicit"), "variable": variable,
            "omega0": sc.omega0, "chi": sc.chi}
    if variable == "omega":
        meta["a"] = a
    if cfg.preset is None:
        meta["spec"] = {k: v for k, v in cfg.values.items()}
    sig = analysis.scan(fn, grid, threads=threads, metadata=meta)
    noise = cfg.get("noise", 0.0)
    if noise > 0:
        rng = np.random.default_rng(seed)
        sig = Signal1D(sig.x, inverse.add_noise(sig.y, noise, rng),
                       {**sig.metadata, "noise": noise, "seed": seed})
    return sig


def cmd_scan(args) -> int:
    cfg = _config(args)
    sig = run_scan(cfg, args.seed, args.threads)
    fmt = _fmt(args)
    _emit(analysis.signal_to_json(sig) if fmt == "json" else analysis.signal_to_csv(sig), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit


def fit_problem(cfg: RunConfig, sig: Signal1D, threads: int = 1) -> tuple:
    if cfg.preset is None and not cfg.explicit:
        name = sig.metadata.get("scenario")
        if name in presets.PRESETS:
            cfg.values["preset"] = name
    sc = scenario_from_config(cfg)
    if sig.metadata.get("variable", "omega") != "omega":
        raise ConfigError("fit needs a frequency scan (variable = omega); "
                          f"data has variable = {sig.metadata.get('variable')!r}")
    if np.any(sig.x <= 0):
        raise ConfigError("fit data must have positive frequencies")
    bounds = cfg.get("bounds", (0.2, 4.0))
    try:
        prob = inverse.FitProblem(
            observed=sig, forward=sc.forward_many, bounds=tuple(bounds),
            prior_domain=cfg.get("prior_domain"), chi=sc.chi, omega_ref=sc.omega0,
            noise=cfg.get("fit_noise", sig.metadata.get("noise")),
            n_grid=cfg.get("n_grid", 400), threads=threads, label=getattr(sc, "name", ""))
    except ValueError as exc:
        raise ConfigError(f"{cfg.source}: {exc}") from None
    return sc, prob


def cmd_fit(args) -> int:
    cfg = _config(args)
    try:
        sig = analysis.read_signal(args.data)
    except OSError as exc:
        raise ConfigError(f"cannot read data {args.data}: {exc.strerror}") from None
    sc, prob = fit_problem(cfg, sig, args.threads)
    res = inverse.fit(prob)
    ident = inverse.identifiability_report(prob, a=res.a_hat)
    report = {"scenario": prob.label, **res.to_dict(), "aliases": ident["aliases"],
              "alias_spacing": ident["spacing"], "prior_domain": prob.prior_domain,
              "bounds": list(prob.bounds)}
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    if res.ambiguous:
        raise Ambiguous(f"ambiguous fit: tied minima at {res.candidates}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle


def oracle_rows(cfg: RunConfig) -> list[dict]:
    widths = cfg.get("widths", (0.04, 0.02, 0.01))
    try:
        quad = oracle.QuadratureSpec(cfg.get("n_theta", 24), cfg.get("n_phi", 24))
    except ValueError as exc:
        raise ConfigError(f"{cfg.source}: {exc}") from None
    scale = cfg.get("lambda_scale", presets.LAMBDA_SCALE)
    a = cfg.get("a", 1.3)
    z = presets.Z
    if cfg.get("correlator", "phi1") == "phi1":
        sc = presets.get_preset("one-photon-backscatter")
        model = presets.TwoPointCenters(presets.generic_lambda(scale), a * z)
        det = Detector(-z, sc.omega0, component=1, distance=presets.DISTANCE)
        make = lambda w: make_one_photon(sc.omega0, z, [1, 0], angular_width=w)
        return oracle.width_sweep(make, det, model, widths, quad)
    sc = presets.get_preset("two-photon-chi09")
    g = presets.ChiGeometry(sc.chi, sc.ratio)
    w1, w2 = sc.omega0, sc.ratio * sc.omega0
    model = presets.TwoPointCenters(scale * np.eye(3), a * z)
    c = np.array([[0.0, 1.0], [1.0, 0.0]]) / math.sqrt(2)
    base = symmetrize_two_photon((SpectralEnvelope(w1, g.s1), SpectralEnvelope(w2, g.s2)), c)
    from .correlators import theta_tensor, transverse_projector
    th = theta_tensor(base.pol_matrix, *base.bases)
    i1, i2 = presets._best_components(transverse_projector(g.n1) @ th @ transverse_projector(g.n2).T)
    d1 = Detector(g.n1, w1, i1, presets.DISTANCE)
    d2 = Detector(g.n2, w2, i2, presets.DISTANCE)
    make = lambda w: symmetrize_two_photon((SpectralEnvelope(w1, g.s1, w), SpectralEnvelope(w2, g.s2, w)), c)
    return oracle.width_sweep_two_photon(make, d1, d2, model, widths, quad)


def cmd_oracle(args) -> int:
    cfg = _config(args)
    rows = oracle_rows(cfg)
    errs = [r["rel_error"] for r in rows]
    monotone = all(b <= a for a, b in zip(errs, errs[1:]))
    if _fmt(args, "json") == "csv":
        buf = io.StringIO()
        buf.write(f"# {UNITS_NOTE}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["width", "closed_form", "quadrature", "rel_error"])
        for r in rows:
            w.writerow([repr(float(r[k])) for k in ("width", "closed_form", "quadrature", "rel_error")])
        text = buf.getvalue()
    else:
        text = json.dumps({"units": UNITS_NOTE, "rows": rows, "monotone": monotone}, indent=2) + "\n"
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# visibility


def cmd_visibility(args) -> int:
    try:
        sig = analysis.read_signal(args.data)
    except OSError as exc:
        raise ConfigError(f"cannot read data {args.data}: {exc.strerror}") from None
    window = tuple(args.window) if args.window else None
    report = {"visibility": analysis.visibility(sig if window is None else sig.window(*window))}
    try:
        st = analysis.spacing_stats(sig, window)
        report.update({"extrema_spacing": st.mean, "spread": st.spread, "pairs": st.n_pairs,
                       "flagged": st.flagged})
    except ValueError:
        report["extrema_spacing"] = None
    if args.chi is not None and window is not None:
        report["domain"] = analysis.classify_window(window, args.chi)
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output path (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int, default=0, help="seed for synthetic noise")
    common.add_argument("--threads", type=int, default=1)

    p = argparse.ArgumentParser(prog="quantscatter", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fig1", parents=[common], help="emit the three resolution curves")
    f.add_argument("--chi", type=float)
    f.set_defaults(func=cmd_fig1)

    s = sub.add_parser("scan", parents=[common], help="scan a correlator")
    s.add_argument("--preset", help="preset name (alternative to 'preset' in the config)")
    s.set_defaults(func=cmd_scan)

    t = sub.add_parser("fit", parents=[common], help="fit a scanned signal")
    t.add_argument("data")
    t.add_argument("--preset")
    t.set_defaults(func=cmd_fit)

    o = sub.add_parser("oracle", parents=[common], help="closed form vs quadrature sweep")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("visibility", parents=[common], help="visibility and extrema spacing of a signal")
    v.add_argument("data")
    v.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    v.add_argument("--chi", type=float)
    v.set_defaults(func=cmd_visibility)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except Ambiguous as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except (oracle.QuadratureError, inverse.Unidentifiable, FloatingPointError,
            analysis.ScanError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
