"""Inertial-weight particle swarm optimisation with reflecting walls."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .greens import UniaxialLayer, WaimStack

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SwarmConfig:
    """PSO calibration.

    ``K`` counts iterations including the initial population, so ``K = 1``
    only evaluates the random start.
    """

    R: int = 10
    zeta1: float = 0.4
    zeta2: float = 2.0
    zeta3: float = 2.0
    K: int = 200
    window: int = 30
    threshold: float = 1e-4
    seed: int = 0
    v_max_fraction: float = 0.5

    def problems(self) -> list[str]:
        out = []
        if self.R < 1:
            out.append("R must be >= 1")
        if not 0 <= self.zeta1 < 1:
            out.append("zeta1 must lie in [0, 1)")
        if self.K < 1:
            out.append("K must be >= 1")
        if self.window < 1:
            out.append("window must be >= 1")
        if not self.threshold > 0:
            out.append("threshold must be positive")
        if not self.v_max_fraction > 0:
            out.append("v_max_fraction must be positive")
        return out


@dataclass
class SwarmState:
    x: np.ndarray
    v: np.ndarray
    cost: np.ndarray
    pbest_x: np.ndarray
    pbest_cost: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    vmax: np.ndarray
    rng: np.random.Generator
    evals: int = 0

    @property
    def gbest_index(self) -> int:
        return int(np.argmin(self.pbest_cost))

    @property
    def gbest_x(self) -> np.ndarray:
        return self.pbest_x[self.gbest_index]

    @property
    def gbest_cost(self) -> float:
        return float(self.pbest_cost[self.gbest_index])


@dataclass
class RunTrace:
    best_cost: list[float] = field(default_factory=list)
    best_cost_normalized: list[float] = field(default_factory=list)
    best_position: list[np.ndarray] = field(default_factory=list)
    evals: list[int] = field(default_factory=list)
    elapsed: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.best_cost)

    def record(self, state: SwarmState, normalizer: float, elapsed: float):
        self.best_cost.append(state.gbest_cost)
        self.best_cost_normalized.append(state.gbest_cost / normalizer)
        self.best_position.append(state.gbest_x.copy())
        self.evals.append(state.evals)
        self.elapsed.append(elapsed)


def thread_count() -> int:
    """Evaluation concurrency from ``WAIMFORGE_THREADS`` (0 or unset = all cores)."""
    raw = os.environ.get("WAIMFORGE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValidationError([f"WAIMFORGE_THREADS must be an integer, got {raw!r}"]) from exc
    if n < 0:
        raise ValidationError(["WAIMFORGE_THREADS must be >= 0"])
    return n or (os.cpu_count() or 1)


def _evaluate_all(evaluate, xs, workers: int) -> np.ndarray:
    def safe(x):
        try:
            c = float(evaluate(x))
        except Exception as exc:  # noqa: BLE001 - any failure scores +inf
            log.warning("evaluation failed at %s: %s", x, exc)
            return np.inf
        return c if np.isfinite(c) else np.inf

    if workers <= 1 or len(xs) == 1:
        return np.array([safe(x) for x in xs])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(safe, xs)))


def init_swarm(config: SwarmConfig, bounds: Sequence[tuple[float, float]]) -> SwarmState:
    """Uniform random start inside ``bounds``; costs are left at +inf."""
    if len(bounds) == 0:
        raise ValidationError(["empty search space"])
    lo = np.array([b[0] for b in bounds], float)
    hi = np.array([b[1] for b in bounds], float)
    if np.any(hi < lo):
        raise ValidationError(["a lower bound exceeds its upper bound"])
    rng = np.random.default_rng(config.seed)
    span = hi - lo
    vmax = config.v_max_fraction * span
    x = lo + span * rng.random((config.R, lo.size))
    v = vmax * (2 * rng.random((config.R, lo.size)) - 1)
    inf = np.full(config.R, np.inf)
    return SwarmState(x, v, inf.copy(), x.copy(), inf.copy(), lo, hi, vmax, rng)


def _reflect(x, v, lo, hi):
    over = x > hi
    x = np.where(over, 2 * hi - x, x)
    v = np.where(over, -v, v)
    under = x < lo
    x = np.where(under, 2 * lo - x, x)
    v = np.where(under, -v, v)
    return np.clip(x, lo, hi), v


def _update_bests(state: SwarmState):
    better = state.cost < state.pbest_cost
    state.pbest_x[better] = state.x[better]
    state.pbest_cost[better] = state.cost[better]


def move_swarm(state: SwarmState, config: SwarmConfig):
    """Velocity and position update for every agent (no evaluation).

    Random factors are drawn agent by agent: ``r1`` for every dimension,
    then ``r2`` for every dimension.
    """
    R, D = state.x.shape
    r = state.rng.random((R, 2, D))
    g = state.gbest_x
    v = (config.zeta1 * state.v
         + config.zeta2 * r[:, 0] * (state.pbest_x - state.x)
         + config.zeta3 * r[:, 1] * (g - state.x))
    v = np.clip(v, -state.vmax, state.vmax)
    state.x, state.v = _reflect(state.x + v, v, state.lo, state.hi)


def swarm_step(state: SwarmState, config: SwarmConfig, evaluate: Callable, workers: int = 1) -> SwarmState:
    move_swarm(state, config)
    state.cost = _evaluate_all(evaluate, list(state.x), workers)
    state.evals += len(state.cost)
    _update_bests(state)
    return state


def stagnation_check(trace: RunTrace | Sequence[float], config: SwarmConfig) -> bool:
    """True when the latest normalized best sits within ``threshold`` of its trailing-window mean."""
    values = trace.best_cost_normalized if isinstance(trace, RunTrace) else list(trace)
    w = config.window
    if len(values) < w + 1:
        return False
    last = values[-1]
    prev = np.asarray(values[-w - 1:-1], float)
    if not np.all(np.isfinite(prev)) or not np.isfinite(last):
        return False
    return bool(abs(last - prev.mean()) <= config.threshold)


@dataclass
class OptimizeResult:
    x: np.ndarray
    cost: float
    trace: RunTrace
    iterations: int
    stagnated: bool
    explore_time: float


def optimize(evaluate: Callable[[np.ndarray], float], bounds, config: SwarmConfig = SwarmConfig(),
             normalizer: float = 1.0, workers: int | None = None,
             callback: Callable[[int, SwarmState], None] | None = None) -> OptimizeResult:
    """Minimise ``evaluate`` over the box ``bounds``."""
    errs = config.problems()
    if errs:
        raise ValidationError(errs)
    workers = thread_count() if workers is None else workers
    t0 = time.perf_counter()
    explore = 0.0
    te = time.perf_counter()
    state = init_swarm(config, bounds)
    explore += time.perf_counter() - te
    state.cost = _evaluate_all(evaluate, list(state.x), workers)
    state.evals += config.R
    _update_bests(state)
    trace = RunTrace()
    trace.record(state, normalizer, time.perf_counter() - t0)
    if callback:
        callback(0, state)
    stagnated = False
    for k in range(1, config.K):
        te = time.perf_counter()
        move_swarm(state, config)
        explore += time.perf_counter() - te
        state.cost = _evaluate_all(evaluate, list(state.x), workers)
        state.evals += config.R
        _update_bests(state)
        trace.record(state, normalizer, time.perf_counter() - t0)
        if callback:
            callback(k, state)
        if stagnation_check(trace, config):
            stagnated = True
            break
    return OptimizeResult(state.gbest_x.copy(), state.gbest_cost, trace, len(trace), stagnated, explore)


@dataclass(frozen=True)
class StackEncoding:
    """Maps a flat search vector to a superstrate.

    Layout: ``t_1 .. t_L`` followed by one permittivity per layer
    (isotropic) or ``eps_xx, eps_yy, eps_zz`` per layer (anisotropic).
    """

    L: int
    anisotropic: bool
    t_bounds: tuple[float, float]
    eps_bounds: tuple[float, float]

    @property
    def dims(self) -> int:
        return self.L * (4 if self.anisotropic else 2)

    def bounds(self) -> list[tuple[float, float]]:
        n_eps = self.L * (3 if self.anisotropic else 1)
        return [self.t_bounds] * self.L + [self.eps_bounds] * n_eps

    def decode(self, x) -> WaimStack:
        x = np.asarray(x, float)
        t = x[: self.L]
        e = x[self.L:]
        if self.anisotropic:
            e = e.reshape(self.L, 3)
            return WaimStack(tuple(UniaxialLayer(float(ti), *map(float, ei)) for ti, ei in zip(t, e)))
        return WaimStack.isotropic([float(v) for v in t], [float(v) for v in e])

    def encode(self, stack: WaimStack) -> np.ndarray:
        t = [layer.t for layer in stack.layers]
        if self.anisotropic:
            e = [c for layer in stack.layers for c in (layer.eps_xx, layer.eps_yy, layer.eps_zz)]
        else:
            e = [layer.eps_xx for layer in stack.layers]
        return np.array(t + e, float)
