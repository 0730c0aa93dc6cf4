"""DE/best/1/bin for bounded real genomes, maximizing a scalar fitness.

Infeasible candidates score ``-inf``.  All randomness for one generation is
drawn before any candidate is evaluated, so a parallel ``map_fn`` gives the
same trace as the serial one.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "DEConfig",
    "OptimizationTrace",
    "InitializationError",
    "optimize",
    "sample_feasible_population",
]


class InitializationError(RuntimeError):
    """No feasible initial population within the sampling budget."""


@dataclass(frozen=True)
class DEConfig:
    """Hyperparameters of one run.

    ``bounds`` has one ``(lo, hi)`` row per gene.  ``init_draws`` is the
    number of random draws allowed per population member while building a
    feasible initial population.
    """

    bounds: tuple
    NP: int = 20
    CR: float = 0.8
    F: float = 0.7
    iterations: int = 50
    seed: int = 0
    init_draws: int = 1000

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2 or b.shape[0] < 1:
            raise ValueError("bounds must be a sequence of (lo, hi) pairs")
        if not np.all(np.isfinite(b)) or np.any(b[:, 0] >= b[:, 1]):
            raise ValueError("every gene needs finite bounds with lo < hi")
        object.__setattr__(self, "bounds", tuple(map(tuple, b.tolist())))
        if self.NP < 4:
            raise ValueError("population size must be at least 4")
        if not 0.0 <= self.CR <= 1.0:
            raise ValueError("CR must lie in [0, 1]")
        if not 0.0 < self.F <= 2.0:
            raise ValueError("F must lie in (0, 2]")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.init_draws < 1:
            raise ValueError("init_draws must be positive")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])


@dataclass
class OptimizationTrace:
    best_fitness: list = field(default_factory=list)
    best_genome: Optional[np.ndarray] = None
    evaluations: int = 0
    rejected: int = 0

    def to_dict(self) -> dict:
        return {
            "best_fitness": [float(v) for v in self.best_fitness],
            "best_genome": None if self.best_genome is None else [float(v) for v in self.best_genome],
            "evaluations": self.evaluations,
            "rejected": self.rejected,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _streams(cfg: DEConfig):
    ss = np.random.SeedSequence(cfg.seed)
    init, gens = ss.spawn(2)
    return np.random.Generator(np.random.PCG64(init)), gens


def sample_feasible_population(
    cfg: DEConfig,
    feasibility: Callable[[np.ndarray], bool],
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Draw ``cfg.NP`` uniform genomes that all pass ``feasibility``."""
    pop, _, _ = _initial(cfg, lambda g: 0.0 if feasibility(g) else -math.inf, rng, map)
    return pop


def _initial(cfg, fitness, rng, map_fn):
    if rng is None:
        rng, _ = _streams(cfg)
    lo, hi = cfg.lower, cfg.upper
    budget = cfg.NP * cfg.init_draws
    pop, fit = [], []
    drawn = 0
    while len(pop) < cfg.NP:
        if drawn >= budget:
            raise InitializationError(
                f"only {len(pop)} of {cfg.NP} feasible genomes after {drawn} draws"
            )
        batch = min(cfg.NP - len(pop), budget - drawn)
        cand = lo + rng.random((batch, cfg.dim)) * (hi - lo)
        drawn += batch
        for g, f in zip(cand, map_fn(fitness, list(cand))):
            if np.isfinite(f) and not np.isnan(f):
                pop.append(g)
                fit.append(float(f))
    return np.array(pop), np.array(fit), drawn


def optimize(
    fitness: Callable[[np.ndarray], float],
    cfg: DEConfig,
    map_fn: Callable[[Callable, Iterable], Iterable] = map,
    callback: Optional[Callable[[int, np.ndarray, float], None]] = None,
):
    """Maximize ``fitness`` over the box ``cfg.bounds``.

    Returns
    -------
    best : ndarray
        Best genome found.
    trace : OptimizationTrace
        ``best_fitness[0]`` belongs to the initial population, then one entry
        per generation.
    """
    rng, gen_seq = _streams(cfg)
    lo, hi = cfg.lower, cfg.upper
    pop, fit, drawn = _initial(cfg, fitness, rng, map_fn)
    trace = OptimizationTrace(evaluations=drawn, rejected=drawn - cfg.NP)
    b = int(np.argmax(fit))
    trace.best_fitness.append(float(fit[b]))
    NP, D = pop.shape
    idx = np.arange(NP)

    for gen, child in enumerate(gen_seq.spawn(cfg.iterations), start=1):
        g_rng = np.random.Generator(np.random.PCG64(child))
        best = pop[b]
        trials = np.empty_like(pop)
        for i in range(NP):
            pool = idx[(idx != i) & (idx != b)]
            r1, r2 = g_rng.choice(pool, 2, replace=False)
            mutant = best + cfg.F * (pop[r1] - pop[r2])
            cross = g_rng.random(D) < cfg.CR
            cross[g_rng.integers(D)] = True
            trial = np.where(cross, mutant, pop[i])
            trials[i] = np.clip(trial, lo, hi)
        tfit = np.array([float(v) for v in map_fn(fitness, list(trials))])
        tfit[np.isnan(tfit)] = -math.inf
        trace.evaluations += NP
        trace.rejected += int(np.sum(~np.isfinite(tfit)))
        better = tfit >= fit
        pop[better] = trials[better]
        fit[better] = tfit[better]
        b = int(np.argmax(fit))
        trace.best_fitness.append(float(fit[b]))
        if callback is not None:
            callback(gen, pop[b], float(fit[b]))
        logger.debug("generation %d: best %.6f", gen, fit[b])

    trace.best_genome = pop[b].copy()
    return pop[b].copy(), trace
