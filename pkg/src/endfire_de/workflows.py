"""End-to-end design procedures: driven and parasitic optimization, the
uniform reference array, sensitivity sweeps and pattern sampling."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .de import DEConfig, OptimizationTrace, optimize
from .em import ENDFIRE, Direction, ModelParams
from .model import (
    ArrayLayout,
    PerformanceReport,
    assemble_active,
    assemble_parasitic,
    driving_impedances,
    evaluate,
    gain_pattern,
    loads_from_active,
    optimal_excitation,
    InfeasibleDesign,
    to_db,
)

logger = logging.getLogger(__name__)

__all__ = [
    "DesignResult",
    "SensitivitySpec",
    "SensitivityRow",
    "PatternSamples",
    "default_de_config",
    "design_parasitic",
    "optimize_active",
    "optimize_parasitic",
    "ula_baseline",
    "sensitivity",
    "pattern_export",
]

GAP_BOUNDS = (0.05, 0.5)

# (population factor range, iteration range) across N = 2 .. 7
_HYPER = {
    "active": ((5, 15), (20, 150)),
    "parasitic": ((5, 13), (20, 100)),
}


def default_de_config(
    N: int,
    mode: str,
    seed: int = 0,
    gap_bounds: Sequence[float] = GAP_BOUNDS,
    **overrides,
) -> DEConfig:
    """DE settings for an N-element design.

    Population factor and iteration count grow linearly from their lower
    values at N = 2 to their upper values at N = 7 and are clamped outside.
    Genes are inter-element gaps in wavelengths.
    """
    if N < 2:
        raise ValueError("optimization needs at least two elements")
    (f_lo, f_hi), (it_lo, it_hi) = _HYPER[mode]
    t = min(max((N - 2) / 5, 0.0), 1.0)
    NP = int(round((f_lo + t * (f_hi - f_lo)) * N))
    its = int(round(it_lo + t * (it_hi - it_lo)))
    kw = dict(bounds=[tuple(gap_bounds)] * (N - 1), NP=NP, iterations=its, seed=seed)
    kw.update(overrides)
    return DEConfig(**kw)


@dataclass
class DesignResult:
    mode: str  # "active", "parasitic" or "ula"
    p: ModelParams
    layout: ArrayLayout
    report: PerformanceReport
    currents: np.ndarray
    feed: Optional[int] = None
    loads: Optional[np.ndarray] = None
    trace: Optional[OptimizationTrace] = None
    config: Optional[DEConfig] = None
    runtime_s: float = 0.0
    eval_runtime_s: float = 0.0

    @property
    def N(self) -> int:
        return self.layout.N

    @property
    def realized_gain_db(self) -> float:
        return self.report.realized_gain_db

    @property
    def positions_lambda(self) -> np.ndarray:
        return self.layout.in_wavelengths(self.p)

    @property
    def normalized_currents(self) -> np.ndarray:
        i = np.asarray(self.currents, dtype=complex)
        return i / np.max(np.abs(i))

    def recompute(self) -> PerformanceReport:
        """Re-evaluate the stored design from its parameters alone."""
        if self.mode == "parasitic":
            return evaluate(self.layout, self.p, "parasitic", feed=self.feed, loads=self.loads)
        return evaluate(self.layout, self.p, "active", currents=self.currents)


def _timed_eval(fn, repeats=20):
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def design_parasitic(
    layout: ArrayLayout,
    p: ModelParams,
    feed: Union[str, int] = "sweep",
    direction: Direction = ENDFIRE,
):
    """Turn the gain-optimal driven array at ``layout`` into a single-feed array.

    Every non-feed port is terminated in the reactance that cancels its
    active input reactance.  With ``feed="sweep"`` each port is tried as the
    feed and the best realized gain wins (lowest index on ties).

    Returns ``(report, feed, loads)``; ``report.feasible`` is False when the
    driven array itself has a port with non-positive input resistance.
    """
    cm = assemble_active(layout, p)
    try:
        i = optimal_excitation(cm, direction, layout, p)
    except InfeasibleDesign as exc:
        return _no_design(direction, str(exc)), None, None
    zact = driving_impedances(cm, i)
    if np.any(zact.real <= 0):
        return _no_design(direction, "active input resistance not positive"), None, None
    feeds = range(layout.N) if feed == "sweep" else [int(feed)]
    best = (_no_design(direction, "no feasible feed port"), None, None)
    for f in feeds:
        X = loads_from_active(zact, f)
        pcm = assemble_parasitic(layout, f, X, p, Z_lossless=cm.Z_lossless)
        rep = evaluate(layout, p, "parasitic", direction=direction, cm=pcm)
        if rep.feasible and (not best[0].feasible or rep.realized_gain > best[0].realized_gain):
            best = (rep, f, X)
    return best


def _no_design(direction, reason) -> PerformanceReport:
    return PerformanceReport(direction=direction, mode="parasitic", feasible=False, reason=reason)


def _fitness_active(p, direction):
    def fitness(genome):
        rep = evaluate(ArrayLayout.from_gaps(genome, p), p, "active", direction=direction)
        return rep.realized_gain_db if rep.feasible else -math.inf

    return fitness


def _fitness_parasitic(p, direction, feed):
    def fitness(genome):
        rep, _, _ = design_parasitic(ArrayLayout.from_gaps(genome, p), p, feed, direction)
        return rep.realized_gain_db if rep.feasible else -math.inf

    return fitness


def optimize_active(
    N: int,
    p: Optional[ModelParams] = None,
    cfg: Optional[DEConfig] = None,
    *,
    seed: int = 0,
    direction: Direction = ENDFIRE,
    map_fn: Callable = map,
) -> DesignResult:
    """Optimize the gaps of a fully driven array for realized gain.

    Currents are the gain-optimal excitation for each candidate layout.
    """
    p = p or ModelParams()
    cfg = cfg or default_de_config(N, "active", seed=seed)
    if cfg.dim != N - 1:
        raise ValueError(f"config has {cfg.dim} genes, need {N - 1}")
    t0 = time.perf_counter()
    best, trace = optimize(_fitness_active(p, direction), cfg, map_fn=map_fn)
    runtime = time.perf_counter() - t0
    layout = ArrayLayout.from_gaps(best, p)
    report = evaluate(layout, p, "active", direction=direction)
    eval_t = _timed_eval(lambda: evaluate(layout, p, "active", direction=direction))
    logger.info("active N=%d: %.3f dB in %.2f s", N, report.realized_gain_db, runtime)
    return DesignResult(
        "active", p, layout, report, report.currents,
        trace=trace, config=cfg, runtime_s=runtime, eval_runtime_s=eval_t,
    )


def optimize_parasitic(
    N: int,
    p: Optional[ModelParams] = None,
    cfg: Optional[DEConfig] = None,
    *,
    seed: int = 0,
    feed: Union[str, int] = "sweep",
    direction: Direction = ENDFIRE,
    map_fn: Callable = map,
) -> DesignResult:
    """Optimize the gaps of a single-feed reactively loaded array.

    The loads are not genes: every candidate layout derives them from its
    own gain-optimal driven excitation.
    """
    p = p or ModelParams()
    cfg = cfg or default_de_config(N, "parasitic", seed=seed)
    if cfg.dim != N - 1:
        raise ValueError(f"config has {cfg.dim} genes, need {N - 1}")
    t0 = time.perf_counter()
    best, trace = optimize(_fitness_parasitic(p, direction, feed), cfg, map_fn=map_fn)
    runtime = time.perf_counter() - t0
    layout = ArrayLayout.from_gaps(best, p)
    report, f, X = design_parasitic(layout, p, feed, direction)
    eval_t = _timed_eval(lambda: design_parasitic(layout, p, f, direction))
    logger.info("parasitic N=%d: %.3f dB (feed %s) in %.2f s", N, report.realized_gain_db, f, runtime)
    return DesignResult(
        "parasitic", p, layout, report, report.currents, feed=f, loads=X,
        trace=trace, config=cfg, runtime_s=runtime, eval_runtime_s=eval_t,
    )


def ula_baseline(
    N: int,
    p: Optional[ModelParams] = None,
    spacing: float = 0.5,
    direction: Direction = ENDFIRE,
) -> DesignResult:
    """Uniform-amplitude array with ``spacing`` (wavelengths), phased for ``direction``."""
    if N < 1:
        raise ValueError("need at least one element")
    p = p or ModelParams()
    layout = ArrayLayout.from_wavelengths(np.arange(N) * spacing, p)
    u = math.sin(direction.theta) * math.cos(direction.phi)
    i = np.exp(1j * p.k * layout.positions * u)
    t0 = time.perf_counter()
    report = evaluate(layout, p, "active", currents=i, direction=direction)
    return DesignResult("ula", p, layout, report, i, eval_runtime_s=time.perf_counter() - t0)


@dataclass(frozen=True)
class SensitivitySpec:
    """One-at-a-time perturbation sweep.

    ``targets`` names parameters as ``"X<n>"`` (load of port n) or ``"d<n>"``
    (position of element n), 1-based; ``None`` means every load and every
    position.
    """

    scale: float = 0.05
    samples: int = 21
    targets: Optional[Sequence[str]] = None

    def __post_init__(self):
        if not self.scale > -1.0:
            raise ValueError("scale factor must exceed -100 %")
        if self.samples < 1:
            raise ValueError("need at least one sample")


@dataclass
class SensitivityRow:
    parameter: str
    values: tuple  # (min, max) of the swept parameter; positions in wavelengths
    gain_range_db: tuple  # (min, max) realized gain over feasible samples
    samples_db: np.ndarray
    infeasible: int = 0


def _sweep_factors(spec: SensitivitySpec) -> np.ndarray:
    if spec.samples == 1:
        return np.array([1.0])
    return np.linspace(1 - abs(spec.scale), 1 + abs(spec.scale), spec.samples)


def sensitivity(design: DesignResult, spec: SensitivitySpec = SensitivitySpec()):
    """Realized-gain ranges under one-at-a-time parameter perturbations.

    Loads are scaled by the sweep factors.  A position perturbation scales the
    gap in front of that element and keeps every other gap, so the elements
    behind it move along.  The first element has no gap in front of it; it is
    shifted by the sweep fraction of the first gap, which with all gaps held
    moves the whole array.
    """
    if design.mode != "parasitic":
        raise ValueError("sensitivity sweeps apply to parasitic designs")
    p, feed = design.p, design.feed
    loads = np.asarray(design.loads, dtype=float)
    x0 = design.layout.positions
    gaps = np.diff(x0)
    N = design.N
    targets = spec.targets
    if targets is None:
        targets = [f"X{n + 1}" for n in range(N) if n != feed] + [f"d{n + 1}" for n in range(N)]
    fac = _sweep_factors(spec)

    def run(layout, X):
        rep = evaluate(layout, p, "parasitic", feed=feed, loads=X)
        return rep.realized_gain_db if rep.feasible else math.nan

    rows = []
    for name in targets:
        kind, n = name[0], int(name[1:]) - 1
        if not 0 <= n < N:
            raise ValueError(f"no element {n + 1} in a {N}-element design")
        vals, gains = [], []
        if kind == "X":
            if n == feed:
                raise ValueError(f"port {n + 1} is the feed and has no load")
            for s in fac:
                X = loads.copy()
                X[n] = loads[n] * s
                vals.append(X[n])
                gains.append(run(design.layout, X))
        elif kind == "d":
            for s in fac:
                if n == 0:
                    shift = (s - 1.0) * (gaps[0] if N > 1 else p.lam)
                    x = x0 + shift
                    vals.append(x[0] / p.lam)
                else:
                    g = gaps.copy()
                    g[n - 1] *= s
                    x = x0[0] + np.concatenate([[0.0], np.cumsum(g)])
                    vals.append(x[n] / p.lam)
                if np.all(np.diff(x) > 0):
                    gains.append(run(ArrayLayout(x), loads))
                else:
                    gains.append(math.nan)  # gap scaled through zero
        else:
            raise ValueError(f"unknown sensitivity target {name!r}")
        gains = np.array(gains)
        ok = np.isfinite(gains)
        rng = (float(gains[ok].min()), float(gains[ok].max())) if ok.any() else (math.nan, math.nan)
        rows.append(
            SensitivityRow(name, (float(min(vals)), float(max(vals))), rng, gains, int((~ok).sum()))
        )
    return rows


@dataclass
class PatternSamples:
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    realized_gain_db: np.ndarray
    cut: str = "azimuth"
    e_r: float = 1.0
    gain_linear: np.ndarray = field(default=None, repr=False)


def pattern_export(design: DesignResult, cut: str = "azimuth", resolution: float = 1.0) -> PatternSamples:
    """Sample the realized-gain pattern.

    ``cut="azimuth"`` sweeps phi over [-180, 180] degrees at theta = 90;
    ``cut="sphere"`` covers theta in [0, 180] and phi in [-180, 180).
    """
    if not 0.1 <= resolution <= 10.0:
        raise ValueError("resolution must lie in [0.1, 10] degrees")
    p = design.p
    if design.mode == "parasitic":
        cm = assemble_parasitic(design.layout, design.feed, design.loads, p)
    else:
        cm = assemble_active(design.layout, p)
    e_r = design.report.e_r
    if cut == "azimuth":
        n = int(round(360 / resolution)) + 1
        ph = np.linspace(-180.0, 180.0, n)
        th = np.full_like(ph, 90.0)
    elif cut == "sphere":
        th1 = np.linspace(0.0, 180.0, int(round(180 / resolution)) + 1)
        ph1 = np.arange(-180.0, 180.0, resolution)
        T, P = np.meshgrid(th1, ph1, indexing="ij")
        th, ph = T.ravel(), P.ravel()
    else:
        raise ValueError(f"unknown cut {cut!r}")
    g = gain_pattern(np.deg2rad(th), np.deg2rad(ph), design.layout, design.currents, cm, p)
    return PatternSamples(th, ph, to_db(e_r * g), cut=cut, e_r=e_r, gain_linear=g)
