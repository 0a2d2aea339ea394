"""Superstrate synthesis: the swarm wired to the scan cost."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

import numpy as np

from .greens import WaimStack
from .moments import arl_atc, reflection
from .objective import CostReport, Problem, feasibility_check
from .swarm import OptimizeResult, RunTrace, StackEncoding, SwarmConfig, optimize


@dataclass
class Timing:
    """Wall-clock split of a run, in seconds.

    ``explore`` covers swarm bookkeeping, ``em`` the impedance evaluations
    and ``linkage`` the rest of each cost evaluation.
    """

    total: float = 0.0
    explore: float = 0.0
    linkage: float = 0.0
    em: float = 0.0


@dataclass
class SynthesisResult:
    stack: WaimStack
    report: CostReport
    trace: RunTrace
    timing: Timing
    iterations: int
    stagnated: bool
    encoding: StackEncoding
    best_x: np.ndarray


class _Objective:
    def __init__(self, problem: Problem, encoding: StackEncoding):
        self.problem = problem
        self.encoding = encoding
        self.em = 0.0
        self.linkage = 0.0
        self._lock = threading.Lock()

    def __call__(self, x) -> float:
        t0 = time.perf_counter()
        stack = self.encoding.decode(x)
        t1 = time.perf_counter()
        zb, Z = self.problem.impedances(stack)
        t2 = time.perf_counter()
        arl, _ = arl_atc(reflection(Z, zb[:, None, None]), self.problem.arl_cap)
        w = self.problem.grid.angular_weights(self.problem.solid_angle)
        psi = np.einsum("ftp,tp->f", arl, w)
        c = self.problem.cost_from_psi(psi)
        t3 = time.perf_counter()
        with self._lock:
            self.em += t2 - t1
            self.linkage += (t1 - t0) + (t3 - t2)
        return c


def run_synthesis(problem: Problem, config: SwarmConfig = SwarmConfig(), layers: int = 2,
                  anisotropic: bool = False, workers: int | None = None, callback=None) -> SynthesisResult:
    """Search thicknesses and permittivities of an ``layers``-layer superstrate."""
    t0 = time.perf_counter()
    encoding = StackEncoding(layers, anisotropic, problem.bounds.thickness_bounds(problem.scan),
                             (problem.bounds.eps_min, problem.bounds.eps_max))
    objective = _Objective(problem, encoding)
    base = problem.cost_from_psi(problem.baseline_psi)
    res: OptimizeResult = optimize(objective, encoding.bounds(), config, normalizer=base, workers=workers,
                                   callback=callback)
    stack = encoding.decode(res.x)
    ok, bad = feasibility_check(stack, problem.bounds, problem.scan)
    if not ok:  # reflecting walls keep agents inside; this guards the contract
        raise RuntimeError("optimizer returned an infeasible design: " + "; ".join(bad))
    report = problem.cost(stack)
    timing = Timing(time.perf_counter() - t0, res.explore_time, objective.linkage, objective.em)
    return SynthesisResult(stack, report, res.trace, timing, res.iterations, res.stagnated, encoding, res.x)
