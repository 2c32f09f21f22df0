"""Bounded particle swarm optimizer.

Global-best PSO with constriction-style coefficients.  Particles that
leave the search box are reflected back inside with damped velocity.
Hard clamping would trap the swarm on flat boundary plateaus (every
attractor collapses onto the wall and the velocity in that dimension
never regenerates); reflection keeps sampling the interior while still
guaranteeing every evaluated position lies within bounds.  Runs are
deterministic for a fixed seed, and the cost function is called exactly
n_pop * (n_iter + 1) times (initial evaluation plus one per iteration).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

DEFAULT_INERTIA = 0.7298
DEFAULT_COGNITIVE = 1.4962
DEFAULT_SOCIAL = 1.4962


@dataclass(frozen=True)
class PsoConfig:
    """Swarm size, iteration budget, update coefficients, and seed."""

    n_pop: int = 30
    n_iter: int = 1000
    inertia: float = DEFAULT_INERTIA
    cognitive: float = DEFAULT_COGNITIVE
    social: float = DEFAULT_SOCIAL
    seed: int | None = None

    def __post_init__(self):
        if self.n_pop < 1:
            raise ConfigError(f"swarm size must be >= 1, got {self.n_pop}")
        if self.n_iter < 0:
            raise ConfigError(f"iteration count must be >= 0, got {self.n_iter}")
        for name in ("inertia", "cognitive", "social"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ConfigError(f"{name} coefficient must be finite and >= 0, got {v!r}")


@dataclass
class PsoTrace:
    """Best cost after initialization and after each iteration."""

    best_cost: list = field(default_factory=list)
    n_evals: int = 0


@dataclass
class PsoResult:
    x: np.ndarray
    cost: float
    trace: PsoTrace


def _eval_costs(cost_fn, positions, map_fn):
    """Evaluate the swarm; domain violations and non-finite values score inf."""
    def safe(x):
        try:
            c = float(cost_fn(x))
        except DomainError:
            return np.inf
        return c if np.isfinite(c) else np.inf
    return np.fromiter(map_fn(safe, positions), dtype=float, count=len(positions))


_REFLECT_DAMPING = 0.5


def _reflect(pos, vel, lo, hi):
    """Mirror out-of-bounds coordinates back into the box, damping and
    reversing the violating velocity components each bounce."""
    for _ in range(64):
        under = pos < lo
        over = pos > hi
        out = under | over
        if not out.any():
            return pos, vel
        pos = np.where(under, 2.0 * lo - pos, pos)
        pos = np.where(over, 2.0 * hi - pos, pos)
        vel = np.where(out, -_REFLECT_DAMPING * vel, vel)
    # pathological velocity (many box widths); land on the wall instead
    clamped = np.clip(pos, lo, hi)
    vel[clamped != pos] = 0.0
    return clamped, vel


def optimize(cost_fn, bounds, cfg: PsoConfig = PsoConfig(), map_fn=map) -> PsoResult:
    """Minimize `cost_fn` over the box given by `bounds`.

    `bounds` is a sequence of (low, high) pairs, one per dimension.
    `map_fn` evaluates the swarm each iteration and may be a parallel map
    (results must preserve order).  Ties on the global best are broken by
    the lowest particle index, which keeps runs reproducible under any
    evaluation order.
    """
    bounds = np.asarray(bounds, dtype=float)
    if bounds.ndim != 2 or bounds.shape[1] != 2:
        raise ConfigError("bounds must be a sequence of (low, high) pairs")
    lo, hi = bounds[:, 0], bounds[:, 1]
    if np.any(hi <= lo) or not np.all(np.isfinite(bounds)):
        raise ConfigError("each bound must be a finite pair with low < high")
    ndim = len(bounds)
    rng = np.random.default_rng(cfg.seed)
    span = hi - lo

    pos = lo + span * rng.random((cfg.n_pop, ndim))
    vel = span * (rng.random((cfg.n_pop, ndim)) - 0.5)
    cost = _eval_costs(cost_fn, pos, map_fn)

    pbest = pos.copy()
    pbest_cost = cost.copy()
    g = int(np.argmin(pbest_cost))  # argmin takes the first index on ties
    gbest = pbest[g].copy()
    gbest_cost = float(pbest_cost[g])

    trace = PsoTrace(best_cost=[gbest_cost], n_evals=cfg.n_pop)
    for _ in range(cfg.n_iter):
        r1 = rng.random((cfg.n_pop, ndim))
        r2 = rng.random((cfg.n_pop, ndim))
        vel = (cfg.inertia * vel
               + cfg.cognitive * r1 * (pbest - pos)
               + cfg.social * r2 * (gbest - pos))
        pos = pos + vel
        pos, vel = _reflect(pos, vel, lo, hi)

        cost = _eval_costs(cost_fn, pos, map_fn)
        trace.n_evals += cfg.n_pop
        improved = cost < pbest_cost
        pbest[improved] = pos[improved]
        pbest_cost[improved] = cost[improved]
        g = int(np.argmin(pbest_cost))
        if pbest_cost[g] < gbest_cost:
            gbest = pbest[g].copy()
            gbest_cost = float(pbest_cost[g])
        trace.best_cost.append(gbest_cost)

    return PsoResult(x=gbest, cost=gbest_cost, trace=trace)
