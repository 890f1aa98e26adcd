"""Command-line front end: rule and grid generation, kernel diagnostics,
frame verification, transforms, norm computation, and bundled reports.

Conventions: exit 0 on success, 1 on a numeric-tolerance failure or
computation defect (with machine-readable JSON on stderr), 2 on usage
errors.  JSON output is canonical (sorted keys, %.17g floats) so identical
configurations and seeds produce byte-identical artifacts; wall-clock
metadata only ever goes to a sidecar file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .cutoffs import CutoffPair, CutoffSpec, frame_alt, frame_default, make_cutoff, make_dual_pair
from .kernels import kernel_decay_profile, lambda_kernel, lower_bound_check
from .needlets import CoeffFn, NeedletCoeffs, analyze, build_system, synthesize
from .quadrature import cubature_grid, gauss_laguerre
from .spaces import (B_norm_cont, F_norm_cont, NormParams, b_norm_seq,
                     equivalence_report, f_norm_seq, make_test_corpus,
                     nikolskii_report)

RECON_TOL = 1e-9
PARSEVAL_TOL = 1e-10

CONFIG_DEFAULTS = {
    "alpha": [0.0],
    "d": 1,
    "J": 2,
    "delta": 0.03,
    "c_star": 1.0,
    "cutoff": "frame_default",
    "cutoff_alt": "frame_alt",
    "tight": False,
    "seed": 0,
    "trials": 20,
    "point_cap": 10_000_000,
    "sigma": 6.0,
    "out_format": "json",
}

_CONFIG_TYPES = {
    "alpha": "float_list", "d": "int", "J": "int", "delta": "float",
    "c_star": "float", "cutoff": "str", "cutoff_alt": "str", "tight": "bool",
    "seed": "int", "trials": "int", "point_cap": "int", "sigma": "float",
    "out_format": "str",
}


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys and %.17g float formatting."""

    def render(o) -> str:
        if isinstance(o, dict):
            items = sorted(o.items(), key=lambda kv: str(kv[0]))
            return "{" + ",".join(json.dumps(str(k)) + ":" + render(v) for k, v in items) + "}"
        if isinstance(o, np.ndarray):
            o = o.tolist()
        if isinstance(o, (list, tuple)):
            return "[" + ",".join(render(v) for v in o) + "]"
        if isinstance(o, bool):
            return "true" if o else "false"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            v = float(o)
            if math.isnan(v):
                return '"nan"'
            if math.isinf(v):
                return '"inf"' if v > 0 else '"-inf"'
            return f"{v:.17g}"
        if o is None:
            return "null"
        return json.dumps(str(o))

    return render(obj)


def _fail(message: str, code: int = 1) -> int:
    sys.stderr.write(canonical_json({"error": message, "code": code}) + "\n")
    return code


def parse_config_text(text: str) -> dict:
    """Parse flat key=value configuration text with typed values."""
    cfg = dict(CONFIG_DEFAULTS)
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {ln}: expected key=value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        kind = _CONFIG_TYPES.get(key)
        if kind is None:
            raise ValueError(f"line {ln}: unknown configuration key {key!r}")
        if kind == "int":
            cfg[key] = int(val)
        elif kind == "float":
            cfg[key] = float(val)
        elif kind == "bool":
            if val.lower() not in ("true", "false", "0", "1"):
                raise ValueError(f"line {ln}: boolean key {key!r} got {val!r}")
            cfg[key] = val.lower() in ("true", "1")
        elif kind == "float_list":
            cfg[key] = [float(v) for v in val.split(",") if v.strip() != ""]
        else:
            cfg[key] = val
    return cfg


def render_config_text(cfg: dict) -> str:
    lines = []
    for key in sorted(cfg):
        val = cfg[key]
        if isinstance(val, bool):
            out = "true" if val else "false"
        elif isinstance(val, list):
            out = ",".join(f"{v:.17g}" for v in val)
        elif isinstance(val, float):
            out = f"{val:.17g}"
        else:
            out = str(val)
        lines.append(f"{key}={out}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def parse_cutoff(spec: str) -> CutoffSpec:
    """Cut-off specification strings: frame_default, frame_alt, kind:k=v,..."""
    if spec == "frame_default":
        return frame_default()
    if spec == "frame_alt":
        return frame_alt()
    if ":" in spec:
        kind, _, body = spec.partition(":")
        params = {}
        for item in body.split(","):
            if not item:
                continue
            k, _, v = item.partition("=")
            params[k.strip()] = float(v)
        return make_cutoff(kind.strip(), **params)
    raise ValueError(f"unrecognized cutoff specification {spec!r}")


def pair_from_config(cfg: dict) -> CutoffPair:
    return make_dual_pair(parse_cutoff(cfg["cutoff"]), tight=bool(cfg["tight"]))


def system_from_config(cfg: dict):
    return build_system(int(cfg["J"]), int(cfg["d"]), cfg["alpha"],
                        pair_from_config(cfg), float(cfg["delta"]),
                        float(cfg["c_star"]), point_cap=int(cfg["point_cap"]))


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------- commands


def cmd_quadrature(args) -> int:
    if args.n < 1:
        return _fail("n must be >= 1", 2)
    if args.alpha < 0.0:
        return _fail("alpha must be >= 0", 2)
    try:
        rule = gauss_laguerre(args.n, args.alpha)
    except ArithmeticError as exc:
        return _fail(f"quadrature defect: {exc}", 1)
    if args.format == "json":
        payload = {"n": rule.n, "alpha": rule.alpha,
                   "nodes": list(rule.nodes),
                   "log_weights": list(rule.log_weights),
                   "cub_coeffs": list(rule.cub_coeffs)}
        _write(args.out, canonical_json(payload))
    else:
        rows = [(nu + 1, f"{t:.17g}", f"{lw:.17g}", f"{c:.17g}")
                for nu, (t, lw, c) in enumerate(zip(rule.nodes, rule.log_weights,
                                                    rule.cub_coeffs))]
        _write(args.out, _csv_text(["nu", "t", "log_w", "c"], rows))
    return 0


def cmd_grid(args) -> int:
    alpha = [float(v) for v in args.alpha.split(",")]
    try:
        grid = cubature_grid(args.j, args.d, alpha, args.delta, args.c_star)
    except (ResourceWarning, ValueError) as exc:
        return _fail(str(exc), 2)
    boxes = [[list(map(float, (grid.axis_breaks[ax][g], grid.axis_breaks[ax][g + 1])))
              for ax, g in enumerate(np.unravel_index(i, (grid.n_j,) * grid.d))]
             for i in range(grid.point_count)]
    payload = {
        "j": grid.j, "d": grid.d, "alpha": list(grid.alpha.alpha),
        "n_j": grid.n_j, "delta": grid.delta, "c_star": grid.c_star,
        "points": [list(p) for p in grid.points()],
        "coeffs": list(grid.coeffs()),
        "tile_boxes": boxes,
        "tile_measures": list(grid.tile_measures()),
    }
    _write(args.out, canonical_json(payload))
    return 0


def cmd_kernel_eval(args) -> int:
    a_hat = parse_cutoff(args.cutoff)
    alpha = [float(v) for v in args.alpha.split(",")]
    xs = [float(v) for v in args.x.split(",")]
    points = [[float(v) for v in chunk.split(",")]
              for chunk in args.points.split(";") if chunk]
    vals = [lambda_kernel(args.n, alpha, a_hat, xs, p) for p in points]
    payload = {"n": args.n, "alpha": alpha, "cutoff": a_hat.describe(),
               "x": xs, "points": points, "values": vals}
    _write(args.out, canonical_json(payload))
    return 0


def _decay_rows(cfg: dict, n_list) -> tuple[list, dict]:
    a_hat = parse_cutoff(cfg["cutoff"])
    rows, fitted = [], {}
    for n in n_list:
        prof = kernel_decay_profile(n, cfg["alpha"], a_hat, sigma=cfg["sigma"])
        fitted[n] = prof["fitted_c"]
        for sep, nv, bv in zip(prof["separation"], prof["normalized_value"],
                               prof["bound_value"]):
            rows.append((n, f"{cfg['sigma']:.17g}", f"{sep:.17g}",
                         f"{nv:.17g}", f"{bv:.17g}", f"{prof['fitted_c']:.17g}"))
    return rows, fitted


def cmd_kernel_decay(args) -> int:
    cfg = dict(CONFIG_DEFAULTS)
    cfg["alpha"] = [args.alpha]
    cfg["sigma"] = args.sigma
    cfg["cutoff"] = args.cutoff
    n_list = [int(v) for v in args.n_list.split(",")]
    rows, fitted = _decay_rows(cfg, n_list)
    text = _csv_text(["n", "sigma", "separation", "normalized_value",
                      "bound_value", "fitted_c"], rows)
    _write(args.out, text)
    cs = list(fitted.values())
    return 0 if max(cs) / min(cs) < 2.0 else 1


def cmd_lower_bound(args) -> int:
    a_hat = parse_cutoff(args.cutoff)
    n_list = [int(v) for v in args.n_list.split(",")]
    minima = {}
    for n in n_list:
        rep = lower_bound_check(n, [args.alpha], a_hat, delta=args.delta)
        minima[n] = rep["minimum"]
    payload = {"alpha": args.alpha, "delta": args.delta, "cutoff": a_hat.describe(),
               "minima": {str(k): v for k, v in minima.items()}}
    _write(args.out, canonical_json(payload))
    vals = list(minima.values())
    return 0 if min(vals) > 0.0 and max(vals) / min(vals) < 2.0 else 1


def _frame_report(cfg: dict, corrupt: bool = False) -> dict:
    pair = pair_from_config(cfg)
    if corrupt:
        bad = parse_cutoff(cfg["cutoff"])
        wrecked = make_cutoff("raw", fn=lambda t: 1.3 * np.asarray(bad(t)),
                              support=bad.support, name="corrupted")
        pair = CutoffPair(pair.a_hat, wrecked, tight=False)
    system = build_system(int(cfg["J"]), int(cfg["d"]), cfg["alpha"], pair,
                          float(cfg["delta"]), float(cfg["c_star"]),
                          point_cap=int(cfg["point_cap"]))
    deg = 4 ** (system.J - 1) if system.J >= 1 else 0
    recon_max, parseval_max = 0.0, 0.0
    for t in range(int(cfg["trials"])):
        f = CoeffFn.random(system.alpha, deg, seed=int(cfg["seed"]) + t)
        coeffs = analyze(system, f)
        g = synthesize(system, coeffs)
        sl = (slice(0, deg + 1),) * system.d
        err = np.max(np.abs(g.coeffs[sl] - f.coeffs)) / f.norm2()
        recon_max = max(recon_max, float(err))
        if system.pair.tight:
            par = abs(coeffs.total_energy() - f.norm2() ** 2) / f.norm2() ** 2
            parseval_max = max(parseval_max, float(par))
    report = {
        "config": {k: cfg[k] for k in sorted(cfg)},
        "degree": deg,
        "reconstruction_max_err": recon_max,
        "tight": system.pair.tight,
    }
    if system.pair.tight:
        report["parseval_max_err"] = parseval_max
    report["pass"] = recon_max < RECON_TOL and (not system.pair.tight
                                                or parseval_max < PARSEVAL_TOL)
    return report


def cmd_frame_verify(args) -> int:
    cfg = dict(CONFIG_DEFAULTS)
    cfg.update({"J": args.J, "d": args.d,
                "alpha": [float(v) for v in args.alpha.split(",")],
                "delta": args.delta, "tight": args.tight,
                "trials": args.trials, "seed": args.seed})
    report = _frame_report(cfg, corrupt=args.corrupt)
    _write(args.out, canonical_json(report))
    return 0 if report["pass"] else 1


def _coeff_fn_from_file(path: str) -> CoeffFn:
    with open(path, "r", encoding="utf-8") as fh:
        return CoeffFn.from_json_dict(json.load(fh))


def _needlet_coeffs_to_payload(coeffs: NeedletCoeffs) -> dict:
    return {
        "system_hash": coeffs.system_hash,
        "levels": [
            {"j": j, "shape": list(lv.shape),
             "re": list(lv.real.reshape(-1)), "im": list(lv.imag.reshape(-1))}
            for j, lv in enumerate(coeffs.levels)
        ],
    }


def _needlet_coeffs_from_payload(data: dict) -> NeedletCoeffs:
    levels = []
    for item in data["levels"]:
        shape = tuple(int(v) for v in item["shape"])
        arr = (np.asarray(item["re"], dtype=float)
               + 1j * np.asarray(item["im"], dtype=float)).reshape(shape)
        levels.append(arr)
    return NeedletCoeffs(tuple(levels), data["system_hash"])


def _needlet_coeffs_csv(system, coeffs: NeedletCoeffs) -> str:
    rows = []
    for j, lv in enumerate(coeffs.levels):
        grid = system.grids[j]
        for flat, val in enumerate(lv.reshape(-1)):
            gamma = np.unravel_index(flat, lv.shape)
            xi = [f"{grid.axis_xi[ax][g]:.17g}" for ax, g in enumerate(gamma)]
            rows.append([j, flat, *xi, f"{val.real:.17g}", f"{val.imag:.17g}"])
    d = system.d
    header = ["level", "node_index"] + [f"xi_{ax + 1}" for ax in range(d)] + ["re", "im"]
    return _csv_text(header, rows)


def cmd_transform(args) -> int:
    try:
        cfg = load_config(args.system)
    except FileNotFoundError:
        return _fail(f"missing system config {args.system}", 2)
    except ValueError as exc:
        return _fail(str(exc), 2)
    system = system_from_config(cfg)
    if args.direction == "analyze":
        f = _coeff_fn_from_file(args.input)
        coeffs = analyze(system, f)
        if args.format == "csv":
            _write(args.out, _needlet_coeffs_csv(system, coeffs))
        else:
            _write(args.out, canonical_json(_needlet_coeffs_to_payload(coeffs)))
    else:
        with open(args.input, "r", encoding="utf-8") as fh:
            coeffs = _needlet_coeffs_from_payload(json.load(fh))
        g = synthesize(system, coeffs)
        _write(args.out, canonical_json(g.to_json_dict()))
    return 0


def _parse_q(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def cmd_norms(args) -> int:
    try:
        cfg = load_config(args.system)
    except FileNotFoundError:
        return _fail(f"missing system config {args.system}", 2)
    system = system_from_config(cfg)
    params = NormParams(args.s, args.rho, _parse_q(args.p), _parse_q(args.q))
    f = _coeff_fn_from_file(args.input)

    def seq_for(coeffs):
        if args.space == "f-seq":
            return f_norm_seq(coeffs, params, system)
        return b_norm_seq(coeffs, params, system)

    per_level = []
    if args.space in ("f-seq", "b-seq"):
        coeffs = analyze(system, f)
        value = seq_for(coeffs)
        for j in range(coeffs.level_count):
            only = NeedletCoeffs(tuple(lv if k == j else np.zeros_like(lv)
                                       for k, lv in enumerate(coeffs.levels)),
                                 coeffs.system_hash)
            per_level.append(seq_for(only))
    elif args.space == "F-cont":
        value = F_norm_cont(f, params, system, system.J + 1)
    else:
        value = B_norm_cont(f, params, system, system.J + 1)
    payload = {"space": args.space, "norm": value, "per_level": per_level,
               "params": {"s": params.s, "rho": params.rho, "p": params.p,
                          "q": params.q}}
    _write(args.out, canonical_json(payload))
    return 0


def cmd_equivalence_report(args) -> int:
    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        return _fail(f"missing config {args.config}", 2)
    system = system_from_config(cfg)
    corpus = make_test_corpus(system, count=20, seed=int(cfg["seed"]))
    params = NormParams(args.s, args.rho, _parse_q(args.p), _parse_q(args.q))
    space = "B" if math.isinf(params.q) or math.isinf(params.p) else args.space
    rep = equivalence_report(system, params, corpus, space=space)
    rows = [(r["function_id"], f"{r['cont_norm']:.17g}", f"{r['seq_norm']:.17g}",
             f"{r['ratio']:.17g}") for r in rep["rows"]]
    _write(args.out, _csv_text(["function_id", "cont_norm", "seq_norm", "ratio"], rows))
    return 0 if rep["width"] <= args.max_width else 1


SUITES = ("kernel-decay", "lower-bound", "nikolskii", "equivalence", "frame-verify")


def cmd_report(args) -> int:
    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        return _fail(f"missing config file {args.config}", 2)
    except ValueError as exc:
        return _fail(str(exc), 2)
    only = args.only.split(",") if args.only else list(SUITES)
    for name in only:
        if name not in SUITES:
            return _fail(f"unknown suite {name!r}; choose from {SUITES}", 2)
    out_dir = args.out or os.path.join(
        os.environ.get("LAGNEED_CACHE_DIR", "."), "lagneed-report")
    os.makedirs(out_dir, exist_ok=True)

    summary, status = {}, 0
    alpha0 = cfg["alpha"][0]

    if "kernel-decay" in only:
        decay_cfg = dict(cfg)
        decay_cfg["alpha"] = [alpha0]  # univariate diagnostic
        rows, fitted = _decay_rows(decay_cfg, [64, 256])
        with open(os.path.join(out_dir, "kernel_decay.csv"), "w", encoding="utf-8") as fh:
            fh.write(_csv_text(["n", "sigma", "separation", "normalized_value",
                                "bound_value", "fitted_c"], rows))
        cs = list(fitted.values())
        ok = max(cs) / min(cs) < 2.0
        summary["kernel-decay"] = {"pass": ok, "fitted_c": {str(k): v for k, v in fitted.items()},
                                   "tolerance": "fitted constant ratio < 2 across n"}
        status |= 0 if ok else 1

    if "lower-bound" in only:
        minima = {}
        a_hat = parse_cutoff(cfg["cutoff"])
        for n in (64, 256):
            minima[str(n)] = lower_bound_check(n, [alpha0], a_hat, delta=0.5)["minimum"]
        vals = list(minima.values())
        ok = min(vals) > 0.0 and max(vals) / min(vals) < 2.0
        summary["lower-bound"] = {"pass": ok, "minima": minima,
                                  "tolerance": "positive minima, ratio < 2"}
        status |= 0 if ok else 1

    if "nikolskii" in only:
        rep = nikolskii_report(16, [alpha0], p=math.inf, q=2.0,
                               trials=min(int(cfg["trials"]), 10), seed=int(cfg["seed"]),
                               n_set=(16, 64))
        ok = (rep["exponent_plain"] <= rep["theory_exponent_plain"] + 0.1
              and rep["exponent_weighted"] <= rep["theory_exponent_weighted"] + 0.1)
        with open(os.path.join(out_dir, "nikolskii.json"), "w", encoding="utf-8") as fh:
            fh.write(canonical_json(rep))
        summary["nikolskii"] = {"pass": ok,
                                "tolerance": "measured exponent <= theory + 0.1"}
        status |= 0 if ok else 1

    if "equivalence" in only:
        system = system_from_config(cfg)
        corpus = make_test_corpus(system, count=10, seed=int(cfg["seed"]))
        rep = equivalence_report(system, NormParams(0.0, 0.0, 2.0, 2.0), corpus)
        rows = [(r["function_id"], f"{r['cont_norm']:.17g}", f"{r['seq_norm']:.17g}",
                 f"{r['ratio']:.17g}") for r in rep["rows"]]
        with open(os.path.join(out_dir, "equivalence.csv"), "w", encoding="utf-8") as fh:
            fh.write(_csv_text(["function_id", "cont_norm", "seq_norm", "ratio"], rows))
        ok = rep["width"] <= 50.0
        summary["equivalence"] = {"pass": ok, "width": rep["width"],
                                  "tolerance": "ratio bracket width <= 50"}
        status |= 0 if ok else 1

    if "frame-verify" in only:
        rep = _frame_report(cfg)
        with open(os.path.join(out_dir, "frame_verify.json"), "w", encoding="utf-8") as fh:
            fh.write(canonical_json(rep))
        summary["frame-verify"] = {"pass": rep["pass"],
                                   "reconstruction_max_err": rep["reconstruction_max_err"],
                                   "tolerance": f"reconstruction < {RECON_TOL:g}"}
        status |= 0 if rep["pass"] else 1

    with open(os.path.join(out_dir, "config.resolved"), "w", encoding="utf-8") as fh:
        fh.write(render_config_text(cfg))
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json({"suites": summary, "exit_status": status}))
    with open(os.path.join(out_dir, "meta.sidecar.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"timestamp": time.time(), "version": __version__}))
    sys.stdout.write(canonical_json({"out_dir": out_dir, "suites": summary}) + "\n")
    return status


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lagneed",
        description="Laguerre needlet frames: quadrature, kernels, transforms, norms")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap BLAS-level parallelism")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quadrature", help="emit a Gauss-Laguerre rule")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_quadrature)

    p = sub.add_parser("grid", help="emit a level-j cubature grid")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--alpha", required=True, help="comma-separated per-axis values")
    p.add_argument("--delta", type=float, default=0.03)
    p.add_argument("--c-star", dest="c_star", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("kernel-eval", help="evaluate the localized kernel on points")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--cutoff", default="frame_default")
    p.add_argument("--x", required=True, help="first argument, comma-separated")
    p.add_argument("--points", required=True,
                   help="semicolon-separated second arguments")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_kernel_eval)

    p = sub.add_parser("kernel-decay", help="off-diagonal decay diagnostics (CSV)")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=6.0)
    p.add_argument("--n-list", dest="n_list", default="64,256")
    p.add_argument("--cutoff", default="frame_default")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_kernel_decay)

    p = sub.add_parser("lower-bound", help="on-diagonal lower-bound sweep")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--n-list", dest="n_list", default="64,256")
    p.add_argument("--cutoff", default="frame_default")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_lower_bound)

    p = sub.add_parser("frame-verify", help="reconstruction and Parseval checks")
    p.add_argument("--J", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--alpha", required=True)
    p.add_argument("--delta", type=float, default=0.03)
    p.add_argument("--tight", action="store_true")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrupt", action="store_true",
                   help="deliberately break the synthesis cut-off (negative control)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_frame_verify)

    p = sub.add_parser("transform", help="needlet analysis / synthesis")
    p.add_argument("direction", choices=("analyze", "synthesize"))
    p.add_argument("--system", required=True, help="system config file")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("norms", help="sequence / continuous norms of a coefficient file")
    p.add_argument("--space", choices=("f-seq", "b-seq", "F-cont", "B-cont"),
                   required=True)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--p", default="2")
    p.add_argument("--q", default="2")
    p.add_argument("--system", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("equivalence-report", help="continuous vs sequence norm ratios")
    p.add_argument("--config", required=True)
    p.add_argument("--space", choices=("F", "B"), default="F")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--p", default="2")
    p.add_argument("--q", default="2")
    p.add_argument("--max-width", dest="max_width", type=float, default=50.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_equivalence_report)

    p = sub.add_parser("report", help="run the diagnostic suites into a bundle")
    p.add_argument("--config", required=True)
    p.add_argument("--only", default=None, help="comma-separated suite names")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def _cap_threads(n: int) -> None:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(n)
    except ImportError:  # env vars still cap pools created later
        pass


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        _cap_threads(max(1, args.threads))
    try:
        return args.func(args)
    except (ValueError, ResourceWarning) as exc:
        return _fail(str(exc), 2)
    except ArithmeticError as exc:
        return _fail(str(exc), 1)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
