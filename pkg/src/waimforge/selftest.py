"""Quick physical sanity checks runnable from the command line."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .greens import UNCOATED, WaimStack
from .lattice import ArrayDescriptors
from .moments import TruncationConfig, active_impedances, arl_atc, reflection

# Example-1 geometry (square lattice, 2.2 substrate, 10 GHz).
DEFAULT_ARRAY = ArrayDescriptors(1.575e-3, 2.2, 1.185e-2, 9.06e-3, 2.298e-3, 5.925e-3, (0.015, 0.0), (0.0, 0.015))


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name}: {self.value:.3e} (tol {self.tolerance:.0e})"


def _atc(thetas, phis, f, d, stack, trunc):
    th = np.concatenate([[0.0], np.ravel(thetas)])
    ph = np.concatenate([[0.0], np.ravel(phis)])
    z = active_impedances(th, ph, f, d, stack, trunc)
    g = reflection(z, z[0])
    return g, arl_atc(g)[1]


def _angles(rng, n):
    return rng.uniform(1.0, 89.0, n), rng.uniform(0.0, 90.0, n)


def invisible_layer(d: ArrayDescriptors, f: float, trunc: TruncationConfig, rng, n_stacks=3, n_angles=12):
    th, ph = _angles(rng, n_angles)
    _, ref = _atc(th, ph, f, d, UNCOATED, trunc)
    worst = 0.0
    for _ in range(n_stacks):
        L = int(rng.integers(1, 4))
        stack = WaimStack.isotropic(list(rng.uniform(1e-4, 0.015, L)), [1.0] * L)
        _, atc = _atc(th, ph, f, d, stack, trunc)
        worst = max(worst, float(np.max(np.abs(atc - ref))))
    return CheckResult("invisible layer max |dATC|", worst <= 1e-9, worst, 1e-9)


def broadside(d: ArrayDescriptors, f: float, trunc: TruncationConfig, rng, n_stacks=3):
    worst = 0.0
    for _ in range(n_stacks):
        stack = WaimStack.isotropic(list(rng.uniform(1e-4, 0.015, 2)), list(rng.uniform(1.0, 30.0, 2)))
        _, atc = _atc([], [], f, d, stack, trunc)
        worst = max(worst, abs(float(atc[0]) - 1.0))
    return CheckResult("broadside |ATC - 1|", worst <= 1e-12, worst, 1e-12)


def scale_invariance(d: ArrayDescriptors, f: float, trunc: TruncationConfig, rng, scales=(0.5, 2.0), n_angles=8):
    th, ph = _angles(rng, n_angles)
    stack = WaimStack.isotropic([0.004, 0.012], [1.5, 3.0])
    g0, _ = _atc(th, ph, f, d, stack, trunc)
    worst = 0.0
    for s in scales:
        g, _ = _atc(th, ph, f / s, d.scaled(s), stack.scaled(s), trunc)
        worst = max(worst, float(np.max(np.abs(g[1:] - g0[1:]) / np.maximum(np.abs(g0[1:]), 1e-300))))
    return CheckResult("scale invariance max rel |dGamma|", worst <= 1e-9, worst, 1e-9)


def run_selftest(d: ArrayDescriptors = DEFAULT_ARRAY, f: float = 10e9,
                 trunc: TruncationConfig = TruncationConfig(15, 15, 6), seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [invisible_layer(d, f, trunc, rng), broadside(d, f, trunc, rng), scale_invariance(d, f, trunc, rng)]
