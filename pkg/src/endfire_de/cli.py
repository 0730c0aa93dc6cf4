"""Command-line entry point.

Exit codes: 0 for a feasible result, 2 for invalid input, 3 when the design
is infeasible or no feasible initial population could be drawn, 1 for I/O
failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import replace
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from . import results as R
from .config import ConfigError, RunConfig, config_hash, load_config_file, parse_config
from .de import InitializationError
from .model import ArrayLayout, evaluate
from .workflows import (
    DesignResult,
    design_parasitic,
    optimize_active,
    optimize_parasitic,
    pattern_export,
    sensitivity,
    ula_baseline,
)

log = logging.getLogger("endfire_de")

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2, 3

COMMANDS = (
    "optimize-active",
    "optimize-parasitic",
    "ula",
    "evaluate",
    "sensitivity",
    "pattern",
    "reproduce-tables",
)


class Infeasible(RuntimeError):
    pass


def reference_tables() -> dict:
    """Published reference values bundled with the package."""
    text = resources.files("endfire_de").joinpath("data/reference_tables.json").read_text("utf-8")
    return json.loads(text)


def _floats(text: str):
    return [float(v) for v in text.split(",")]


def _loads(text: str):
    out = []
    for v in text.split(","):
        v = v.strip()
        out.append(None if v in ("", "-", "nan") else float(v))
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("run")
    g.add_argument("--config", help="JSON config file; explicit flags override its values")
    g.add_argument("--n", dest="N", type=int, help="number of elements")
    g.add_argument("--seed", type=int)
    g.add_argument("--freq-hz", dest="f_hz", type=float)
    g.add_argument("--out", help="output directory (default: print to stdout)")
    g.add_argument("--format", choices=("json", "csv"))
    g.add_argument("-v", "--verbose", action="store_true", default=False)
    o = common.add_argument_group("optimizer")
    o.add_argument("--np", dest="NP", type=int, help="population size")
    o.add_argument("--iters", dest="iterations", type=int)
    o.add_argument("--cr", dest="CR", type=float)
    o.add_argument("--f-factor", dest="F", type=float)
    o.add_argument("--gap-min-lambda", dest="gap_min_lambda", type=float)
    o.add_argument("--gap-max-lambda", dest="gap_max_lambda", type=float)
    o.add_argument("--feed", help="'sweep' or a 1-based port number")
    d = common.add_argument_group("design input")
    d.add_argument("--mode", choices=("active", "parasitic"))
    d.add_argument("--design", help="JSON result file from an earlier run")
    d.add_argument("--positions-lambda", dest="positions_lambda", type=_floats,
                   help="comma-separated element positions in wavelengths")
    d.add_argument("--loads-ohm", dest="loads_ohm", type=_loads,
                   help="comma-separated load reactances; '-' marks the fed port")
    d.add_argument("--spacing-lambda", dest="spacing_lambda", type=float)
    a = common.add_argument_group("analysis")
    a.add_argument("--scale", type=float, help="sensitivity sweep half-width (fraction)")
    a.add_argument("--samples", type=int)
    a.add_argument("--cut", choices=("azimuth", "sphere"))
    a.add_argument("--resolution", type=float, help="pattern step in degrees")

    parser = argparse.ArgumentParser(
        prog="endfire-de",
        description="Analytical modeling and DE optimization of end-fire dipole arrays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "optimize-active": "optimize gaps of a fully driven array",
        "optimize-parasitic": "optimize gaps of a single-feed loaded array",
        "ula": "uniform half-wave-spaced array steered to end-fire",
        "evaluate": "analyze an explicit layout or a saved design",
        "sensitivity": "one-at-a-time perturbation of a parasitic design",
        "pattern": "sample the realized-gain pattern",
        "reproduce-tables": "rerun every design procedure and compare with the reference values",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    ns.pop("verbose", None)
    file_values = load_config_file(ns.pop("config")) if "config" in ns else {}
    if command == "reproduce-tables" and "N" not in ns and "N" not in file_values:
        ns["N"] = 7  # largest size in the reference tables
    return parse_config(file_values, ns, command=command)


def _explicit_design(cfg: RunConfig) -> DesignResult:
    p = cfg.model_params()
    try:
        layout = ArrayLayout.from_wavelengths(np.asarray(cfg.positions_lambda), p)
    except ValueError as exc:
        raise ConfigError("positions_lambda", str(exc)) from None
    t0 = time.perf_counter()
    if cfg.mode == "active":
        rep = evaluate(layout, p, "active")
        return DesignResult("active", p, layout, rep, rep.currents,
                            eval_runtime_s=time.perf_counter() - t0)
    if cfg.loads_ohm is None:
        rep, feed, loads = design_parasitic(layout, p, cfg.feed_index)
    else:
        if cfg.feed == "sweep":
            raise ConfigError("feed", "explicit loads need an explicit feed port")
        feed = cfg.feed_index
        if not 0 <= feed < layout.N:
            raise ConfigError("feed", f"port {cfg.feed} does not exist for N={layout.N}")
        loads = np.array([math.nan if v is None else v for v in cfg.loads_ohm])
        if len(loads) == layout.N - 1:
            loads = np.insert(loads, feed, math.nan)
        if len(loads) != layout.N:
            raise ConfigError("loads_ohm", f"expected {layout.N - 1} or {layout.N} values")
        loads[feed] = math.nan
        rep = evaluate(layout, p, "parasitic", feed=feed, loads=loads)
    return DesignResult("parasitic", p, layout, rep, rep.currents, feed=feed, loads=loads,
                        eval_runtime_s=time.perf_counter() - t0)


def _optimized(cfg: RunConfig, mode: str) -> DesignResult:
    p = cfg.model_params()
    de_cfg = cfg.de_config(mode)
    if mode == "active":
        return optimize_active(cfg.N, p, de_cfg)
    return optimize_parasitic(cfg.N, p, de_cfg, feed=cfg.feed_index)


def _design(cfg: RunConfig) -> DesignResult:
    if cfg.design is not None:
        try:
            return R.load_design(cfg.design)
        except OSError as exc:
            raise OSError(f"cannot read design {cfg.design}: {exc.strerror}") from None
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError("design", f"{cfg.design} is not a saved design ({exc})") from None
    if cfg.positions_lambda is not None:
        return _explicit_design(cfg)
    return _optimized(cfg, cfg.mode)


def _require_feasible(d: DesignResult):
    if not d.report.feasible:
        raise Infeasible(d.report.reason or "design is infeasible")


def _design_payload(d: DesignResult):
    runtime = {"optimization_s": d.runtime_s, "evaluation_s": d.eval_runtime_s}
    return R.design_to_dict(d), R.design_csv(d), runtime


def _summary(d: DesignResult) -> str:
    pos = ", ".join(f"{v:.3f}" for v in d.positions_lambda)
    s = f"{d.mode} N={d.N}: realized gain {d.realized_gain_db:.3f} dB, positions [{pos}] lambda"
    if d.feed is not None:
        s += f", feed port {d.feed + 1}"
    return s


def run_reproduce(cfg: RunConfig):
    """Rerun the ULA, driven and parasitic designs for N = 2 .. cfg.N (at most 7).

    Returns the JSON payload and a printable comparison with the reference values.
    """
    ref = reference_tables()
    p = cfg.model_params()
    nmax = min(cfg.N, 7)
    rows, lines = [], []
    lines.append(f"{'N':>2} | {'ULA':>13} | {'driven':>13} | {'parasitic':>13} | sizes [lambda]")
    par5 = None
    for N in range(2, nmax + 1):
        key = str(N)
        u = ula_baseline(N, p, cfg.spacing_lambda)
        c = replace(cfg, N=N)
        a = optimize_active(N, p, c.de_config("active"))
        q = optimize_parasitic(N, p, c.de_config("parasitic"), feed=cfg.feed_index)
        if N == 5:
            par5 = q
        g = ref["realized_gain_db"]
        row = {
            "N": N,
            "ula_db": u.realized_gain_db, "ula_ref_db": g["ula"][key],
            "active_db": a.realized_gain_db, "active_ref_db": g["active"][key],
            "parasitic_db": q.realized_gain_db, "parasitic_ref_db": g["parasitic"][key],
            "active_size_lambda": float(a.layout.size / p.lam),
            "parasitic_size_lambda": float(q.layout.size / p.lam),
            "active_positions_lambda": a.positions_lambda.tolist(),
            "parasitic_positions_lambda": q.positions_lambda.tolist(),
            "parasitic_loads_ohm": [R._num(x) for x in q.loads],
            "parasitic_feed_port": q.feed + 1,
        }
        rows.append(row)
        lines.append(
            f"{N:>2} | {u.realized_gain_db:5.2f} ({g['ula'][key]:5.2f}) "
            f"| {a.realized_gain_db:5.2f} ({g['active'][key]:5.2f}) "
            f"| {q.realized_gain_db:5.2f} ({g['parasitic'][key]:5.2f}) "
            f"| {row['active_size_lambda']:.2f} / {row['parasitic_size_lambda']:.2f}"
        )
    sens = []
    if par5 is not None:
        lines.append("")
        lines.append("N=5 parasitic sensitivity, realized gain [dB] (reference)")
        for r in sensitivity(par5, cfg.sensitivity_spec()):
            lo, hi = ref["sensitivity_n5"][r.parameter]["gain_db"]
            sens.append({"parameter": r.parameter, "gain_range_db": list(r.gain_range_db),
                         "ref_gain_range_db": [lo, hi], "infeasible": r.infeasible})
            lines.append(
                f"  {r.parameter:>3}: [{r.gain_range_db[0]:.2f}, {r.gain_range_db[1]:.2f}]"
                f"  ([{lo:.2f}, {hi:.2f}])"
            )
    return {"designs": rows, "sensitivity": sens}, "\n".join(lines) + "\n"


def execute(cfg: RunConfig):
    """Run one command.  Returns ``(payload, csv_text, runtime, summary)``."""
    cmd = cfg.command
    if cmd in ("optimize-active", "optimize-parasitic"):
        d = _optimized(cfg, "active" if cmd == "optimize-active" else "parasitic")
        _require_feasible(d)
        return (*_design_payload(d), _summary(d))
    if cmd == "ula":
        d = ula_baseline(cfg.N, cfg.model_params(), cfg.spacing_lambda)
        _require_feasible(d)
        return (*_design_payload(d), _summary(d))
    if cmd == "evaluate":
        if cfg.design is None and cfg.positions_lambda is None:
            raise ConfigError("positions_lambda", "evaluate needs --positions-lambda or --design")
        d = _design(cfg)
        _require_feasible(d)
        return (*_design_payload(d), _summary(d))
    if cmd == "sensitivity":
        if cfg.design is None and cfg.positions_lambda is None:
            cfg = replace(cfg, mode="parasitic")
        d = _design(cfg)
        if d.mode != "parasitic":
            raise ConfigError("mode", "sensitivity needs a parasitic design")
        _require_feasible(d)
        t0 = time.perf_counter()
        rows = sensitivity(d, cfg.sensitivity_spec())
        payload = {"design": R.design_to_dict(d), **R.sensitivity_to_dict(rows)}
        runtime = {"optimization_s": d.runtime_s, "sweep_s": time.perf_counter() - t0}
        text = ", ".join(f"{r.parameter} [{r.gain_range_db[0]:.2f}, {r.gain_range_db[1]:.2f}]" for r in rows)
        return payload, R.sensitivity_csv(rows), runtime, text
    if cmd == "pattern":
        d = _design(cfg)
        _require_feasible(d)
        t0 = time.perf_counter()
        s = pattern_export(d, cfg.cut, cfg.resolution)
        payload = {"design": R.design_to_dict(d), "pattern": R.pattern_to_dict(s)}
        runtime = {"optimization_s": d.runtime_s, "pattern_s": time.perf_counter() - t0}
        k = int(np.argmax(s.realized_gain_db))
        text = (f"{s.cut} pattern, {len(s.theta_deg)} samples, peak {s.realized_gain_db[k]:.3f} dB "
                f"at theta={s.theta_deg[k]:g}, phi={s.phi_deg[k]:g}")
        return payload, R.pattern_csv(s), runtime, text
    if cmd == "reproduce-tables":
        t0 = time.perf_counter()
        payload, table = run_reproduce(cfg)
        return payload, None, {"total_s": time.perf_counter() - t0}, table
    raise ConfigError("command", f"unknown command {cmd!r}")


def envelope(cfg: RunConfig, payload, runtime) -> dict:
    conf = cfg.to_dict()
    conf.pop("out")
    return {
        "command": cfg.command,
        "seed": cfg.seed,
        "config_hash": config_hash(cfg),
        "config": conf,
        "result": payload,
        "runtime": runtime,
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    verbose = "-v" in (argv or sys.argv[1:]) or "--verbose" in (argv or sys.argv[1:])
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_INVALID if exc.code else EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    t0 = time.perf_counter()
    try:
        payload, csv_text, runtime, summary = execute(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (Infeasible, InitializationError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    runtime = {**runtime, "total_s": time.perf_counter() - t0}

    if cfg.format == "csv" and csv_text is not None:
        text, ext = csv_text, "csv"
    else:
        text, ext = R.dumps(envelope(cfg, payload, runtime)), "json"
    name = f"{cfg.command}.{ext}"
    try:
        path = R.write_output(text, cfg.out, name)
    except OSError as exc:
        print(f"error: cannot write {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    if path is None:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    else:
        print(summary)
        print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
