"""Serialization of designs, sensitivity tables and patterns to JSON and CSV."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .em import ModelParams
from .model import ArrayLayout
from .workflows import DesignResult, PatternSamples, SensitivityRow

__all__ = [
    "design_to_dict",
    "design_from_dict",
    "load_design",
    "sensitivity_to_dict",
    "pattern_to_dict",
    "design_csv",
    "sensitivity_csv",
    "pattern_csv",
    "dumps",
    "write_output",
]


def _num(x):
    """JSON-safe float: non-finite values become null."""
    x = float(x)
    return x if math.isfinite(x) else None


def _params_dict(p: ModelParams) -> dict:
    return {
        "f_hz": p.f,
        "l_m": p.l,
        "rho_m": p.rho,
        "sigma_c": _num(p.sigma_c),
        "P_t": p.P_t,
        "Z0": p.Z0,
        "mu": p.mu,
        "self_reactance": p.self_reactance,
        "active_reflection": p.active_reflection,
        "reflection_weighting": p.reflection_weighting,
    }


def _params_from(d: dict) -> ModelParams:
    d = dict(d)
    f, l, rho = d.pop("f_hz"), d.pop("l_m"), d.pop("rho_m")
    if d.get("sigma_c") is None:
        d["sigma_c"] = math.inf
    return ModelParams(f=f, l=l, rho=rho, **d)


def design_to_dict(d: DesignResult) -> dict:
    rep, p = d.report, d.p
    i = np.asarray(d.currents, dtype=complex)
    inorm = d.normalized_currents
    loads = None if d.loads is None else np.asarray(d.loads, dtype=float)
    zact = rep.driving_impedances
    elements = []
    for n in range(d.N):
        el = {
            "n": n + 1,
            "d_m": float(d.layout.positions[n]),
            "d_lambda": float(d.layout.positions[n] / p.lam),
            "current_re": float(i[n].real),
            "current_im": float(i[n].imag),
            "abs_i_normalized": float(abs(inorm[n])),
            "phase_deg": float(np.degrees(np.angle(inorm[n]))),
            "load_ohm": None if loads is None else _num(loads[n]),
        }
        if len(zact) == d.N:
            el["Z_in_re"] = _num(zact[n].real)
            el["Z_in_im"] = _num(zact[n].imag)
        elements.append(el)
    return {
        "mode": d.mode,
        "N": d.N,
        "feed_port": None if d.feed is None else d.feed + 1,
        "model": _params_dict(p),
        "elements": elements,
        "performance": {
            "feasible": rep.feasible,
            "realized_gain_db": _num(rep.realized_gain_db),
            "gain_dbi": _num(rep.gain_dbi) if rep.feasible else None,
            "directivity_dbi": _num(rep.directivity_dbi) if rep.feasible else None,
            "e_cd": _num(rep.e_cd),
            "e_r": _num(rep.e_r),
            "e_t": _num(rep.e_t),
            "P_in_w": _num(rep.P_in),
            "P_rad_w": _num(rep.P_rad),
            "P_loss_w": _num(rep.P_loss),
            "array_size_m": float(d.layout.size),
            "array_size_lambda": float(d.layout.size / p.lam),
            "reason": rep.reason,
        },
        "optimizer": None if d.config is None else {
            "NP": d.config.NP,
            "iterations": d.config.iterations,
            "CR": d.config.CR,
            "F": d.config.F,
            "bounds_lambda": [list(b) for b in d.config.bounds],
            "trace": d.trace.to_dict() if d.trace is not None else None,
        },
    }


def design_from_dict(data: dict) -> DesignResult:
    """Rebuild a design (without trace) and re-evaluate it."""
    p = _params_from(data["model"])
    els = sorted(data["elements"], key=lambda e: e["n"])
    layout = ArrayLayout(np.array([e["d_m"] for e in els]))
    currents = np.array([complex(e["current_re"], e["current_im"]) for e in els])
    feed = data.get("feed_port")
    feed = None if feed is None else int(feed) - 1
    loads = None
    if data["mode"] == "parasitic":
        loads = np.array([math.nan if e["load_ohm"] is None else e["load_ohm"] for e in els])
    d = DesignResult(data["mode"], p, layout, None, currents, feed=feed, loads=loads)
    d.report = d.recompute()
    if data["mode"] == "parasitic":
        d.currents = d.report.currents
    return d


def load_design(path) -> DesignResult:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if "result" in data:
        data = data["result"]
    return design_from_dict(data)


def sensitivity_to_dict(rows: Sequence[SensitivityRow]) -> dict:
    return {
        "rows": [
            {
                "parameter": r.parameter,
                "values": [_num(v) for v in r.values],
                "gain_range_db": [_num(v) for v in r.gain_range_db],
                "samples_db": [_num(v) for v in r.samples_db],
                "infeasible": r.infeasible,
            }
            for r in rows
        ]
    }


def pattern_to_dict(s: PatternSamples) -> dict:
    return {
        "cut": s.cut,
        "e_r": _num(s.e_r),
        "theta_deg": [float(v) for v in s.theta_deg],
        "phi_deg": [float(v) for v in s.phi_deg],
        "realized_gain_db": [_num(v) for v in s.realized_gain_db],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if not math.isfinite(x):
        return ""
    return "0" if x == 0 else repr(x)


def design_csv(d: DesignResult) -> str:
    """One row per element.

    Parasitic designs list the current only on the fed row and the load only
    on the others; driven designs list normalized currents and no loads.
    """
    p = d.p
    g = d.report.realized_gain_db
    inorm = d.normalized_currents
    rows = []
    for n in range(d.N):
        pos = d.layout.positions[n]
        if d.mode == "parasitic":
            fed = n == d.feed
            amp = 1.0 if fed else None
            ph = 0.0 if fed else None
            X = None if fed else d.loads[n]
        else:
            amp, ph, X = abs(inorm[n]), np.degrees(np.angle(inorm[n])), None
        rows.append([n + 1, _fmt(pos / p.lam), _fmt(amp), _fmt(ph), _fmt(X), _fmt(g), _fmt(pos)])
    return _csv(["n", "d_n_lambda", "abs_i", "phase_deg", "X_n_ohm", "G_re_db", "d_n_m"], rows)


def sensitivity_csv(rows: Sequence[SensitivityRow]) -> str:
    out = [
        [r.parameter, _fmt(r.values[0]), _fmt(r.values[1]),
         _fmt(r.gain_range_db[0]), _fmt(r.gain_range_db[1]), r.infeasible]
        for r in rows
    ]
    return _csv(["parameter", "value_min", "value_max", "gain_min_db", "gain_max_db", "infeasible"], out)


def pattern_csv(s: PatternSamples) -> str:
    rows = [[_fmt(t), _fmt(ph), _fmt(g)] for t, ph, g in zip(s.theta_deg, s.phi_deg, s.realized_gain_db)]
    return _csv(["theta_deg", "phi_deg", "realized_gain_db"], rows)


def write_output(text: str, out: Optional[str], name: str) -> Optional[Path]:
    """Write ``text`` to ``out/name``, or return None when ``out`` is unset."""
    if out is None:
        return None
    path = Path(out) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    return path
