"""Scan-integrated return-loss cost, feasibility and tolerance sweeps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C0
from scipy.signal import find_peaks

from .engine import ScanEngine
from .errors import NonFiniteError, ValidationError
from .greens import UNCOATED, WaimStack
from .lattice import ArrayDescriptors, SteeringPoint
from .moments import TruncationConfig, active_impedances, arl_atc, reflection


@dataclass(frozen=True)
class ScanSpec:
    """Angular and frequency ranges (degrees, hertz) with midpoint sample counts."""

    theta_min: float = 0.0
    theta_max: float = 90.0
    phi_min: float = 0.0
    phi_max: float = 90.0
    f_min: float = 10e9
    f_max: float = 10e9
    n_theta: int = 30
    n_phi: int = 30
    n_freq: int = 1

    def problems(self) -> list[str]:
        out = []
        for lo, hi, n, name in ((self.theta_min, self.theta_max, self.n_theta, "theta"),
                                (self.phi_min, self.phi_max, self.n_phi, "phi"),
                                (self.f_min, self.f_max, self.n_freq, "freq")):
            if n < 1:
                out.append(f"n_{name} must be >= 1")
            if hi < lo:
                out.append(f"{name} range is reversed")
            elif hi == lo and n != 1:
                out.append(f"degenerate {name} range requires n_{name} = 1")
        if not (0.0 <= self.theta_min and self.theta_max <= 90.0):
            out.append("theta range must lie within [0, 90] deg")
        if not self.f_min > 0:
            out.append("f_min must be positive")
        return out

    def validate(self) -> "ScanSpec":
        errs = self.problems()
        if errs:
            raise ValidationError(errs)
        return self

    @property
    def centre_frequency(self) -> float:
        return 0.5 * (self.f_min + self.f_max)


def _midpoints(lo, hi, n):
    if hi == lo:
        return np.array([lo], float), np.array([1.0])
    step = (hi - lo) / n
    return lo + step * (np.arange(n) + 0.5), np.full(n, step)


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor midpoint grid. Angular weights are in radians."""

    thetas: np.ndarray
    phis: np.ndarray
    freqs: np.ndarray
    w_theta: np.ndarray
    w_phi: np.ndarray
    w_freq: np.ndarray

    def angular_weights(self, solid_angle: bool = False) -> np.ndarray:
        w = np.outer(self.w_theta, self.w_phi)
        if solid_angle:
            w = w * np.sin(np.radians(self.thetas))[:, None]
        return w


def quadrature(spec: ScanSpec) -> QuadratureGrid:
    spec.validate()
    th, wt = _midpoints(spec.theta_min, spec.theta_max, spec.n_theta)
    ph, wp = _midpoints(spec.phi_min, spec.phi_max, spec.n_phi)
    fr, wf = _midpoints(spec.f_min, spec.f_max, spec.n_freq)
    if spec.theta_max > spec.theta_min:
        wt = np.radians(wt)
    if spec.phi_max > spec.phi_min:
        wp = np.radians(wp)
    return QuadratureGrid(th, ph, fr, wt, wp, wf)


def scan_grid(spec: ScanSpec) -> list[tuple[SteeringPoint, float]]:
    """Flattened quadrature nodes with their product weights."""
    g = quadrature(spec)
    out = []
    for f, wf in zip(g.freqs, g.w_freq):
        for t, wt in zip(g.thetas, g.w_theta):
            for p, wp in zip(g.phis, g.w_phi):
                out.append((SteeringPoint(float(t), float(p), float(f)), float(wt * wp * wf)))
    return out


@dataclass(frozen=True)
class FeasibilitySets:
    """Closed bounds on layer thickness (metres) and permittivity components.

    ``t_max`` of ``None`` means half a wavelength at the top scan frequency.
    """

    t_min: float = 0.0
    t_max: float | None = None
    eps_min: float = 1.0
    eps_max: float = 30.0

    def problems(self) -> list[str]:
        out = []
        if self.t_min < 0:
            out.append("t_min must be >= 0")
        if self.t_max is not None and self.t_max < self.t_min:
            out.append("t_max below t_min")
        if self.eps_min < 1:
            out.append("eps_min below physical floor 1")
        if self.eps_max < self.eps_min:
            out.append("eps_max below eps_min")
        return out

    def thickness_bounds(self, spec: ScanSpec) -> tuple[float, float]:
        t_max = self.t_max if self.t_max is not None else 0.5 * C0 / spec.f_max
        return self.t_min, t_max


def feasibility_check(stack: WaimStack, sets: FeasibilitySets, spec: ScanSpec = ScanSpec()):
    """Return ``(feasible, violations)``; violations name the layer and bound."""
    t_lo, t_hi = sets.thickness_bounds(spec)
    bad = []
    for i, layer in enumerate(stack.layers, start=1):
        if not t_lo <= layer.t <= t_hi:
            bad.append(f"layer {i}: t={layer.t:g} m outside [{t_lo:g}, {t_hi:g}]")
        for name in ("eps_xx", "eps_yy", "eps_zz"):
            v = getattr(layer, name)
            if not sets.eps_min <= v <= sets.eps_max:
                bad.append(f"layer {i}: {name}={v:g} outside [{sets.eps_min:g}, {sets.eps_max:g}]")
    return not bad, bad


@dataclass
class CostReport:
    psi_f: np.ndarray
    Psi: float
    Psi_norm: float
    delta_psi: float


@dataclass
class ScanResult:
    """Per-node response of one stack on the quadrature grid."""

    freqs: np.ndarray
    thetas: np.ndarray
    phis: np.ndarray
    Z: np.ndarray            # (n_freq, n_theta, n_phi)
    z_broadside: np.ndarray  # (n_freq,)
    gamma: np.ndarray
    arl: np.ndarray
    atc: np.ndarray


@dataclass
class Problem:
    """Everything needed to score a superstrate on a fixed array.

    The evaluator precomputes lattice sums on first use. Stacks with
    in-plane anisotropy, or permittivities above ``bounds.eps_max``, fall
    back to direct summation.
    """

    array: ArrayDescriptors
    scan: ScanSpec = field(default_factory=ScanSpec)
    trunc: TruncationConfig = field(default_factory=TruncationConfig)
    bounds: FeasibilitySets = field(default_factory=FeasibilitySets)
    delta: float = 1e-9
    arl_cap: float = 1e6
    solid_angle: bool = False
    fast: bool = True
    tail_nodes: int = 128

    def __post_init__(self):
        errs = self.array.problems() + self.scan.problems() + self.trunc.problems() + self.bounds.problems()
        if not self.arl_cap > 1:
            errs.append("arl_cap must exceed 1")
        if not self.delta >= 0:
            errs.append("delta must be >= 0")
        if errs:
            raise ValidationError(errs)
        self.grid = quadrature(self.scan)
        self._engine = None
        self._baseline = None
        self._cut_engines = {}

    @property
    def engine(self) -> ScanEngine:
        if self._engine is None:
            th, ph = np.meshgrid(self.grid.thetas, self.grid.phis, indexing="ij")
            th = np.concatenate([[0.0], th.ravel()])
            ph = np.concatenate([[0.0], ph.ravel()])
            self._engine = ScanEngine(self.array, [(f, th, ph) for f in self.grid.freqs], self.trunc,
                                      self.delta, self.bounds.eps_max, self.tail_nodes)
        return self._engine

    def impedances(self, stack: WaimStack):
        """Broadside and grid impedances per frequency."""
        nt, nph = self.grid.thetas.size, self.grid.phis.size
        if self.fast:
            zs = self.engine.impedances(stack)
        else:
            th, ph = np.meshgrid(self.grid.thetas, self.grid.phis, indexing="ij")
            th = np.concatenate([[0.0], th.ravel()])
            ph = np.concatenate([[0.0], ph.ravel()])
            zs = [active_impedances(th, ph, f, self.array, stack, self.trunc, self.delta) for f in self.grid.freqs]
        zb = np.array([z[0] for z in zs])
        Z = np.array([z[1:].reshape(nt, nph) for z in zs])
        return zb, Z

    def evaluate(self, stack: WaimStack = UNCOATED) -> ScanResult:
        zb, Z = self.impedances(stack)
        gamma = reflection(Z, zb[:, None, None])
        arl, atc = arl_atc(gamma, self.arl_cap)
        if not np.all(np.isfinite(Z)):
            raise NonFiniteError("non-finite active impedance on the scan grid")
        return ScanResult(self.grid.freqs, self.grid.thetas, self.grid.phis, Z, zb, gamma, arl, atc)

    def psi(self, stack: WaimStack = UNCOATED, result: ScanResult | None = None) -> np.ndarray:
        """Angular integral of the capped ARL at each frequency node."""
        r = result if result is not None else self.evaluate(stack)
        w = self.grid.angular_weights(self.solid_angle)
        return np.einsum("ftp,tp->f", r.arl, w)

    @property
    def baseline_psi(self) -> np.ndarray:
        if self._baseline is None:
            self._baseline = self.psi(UNCOATED)
        return self._baseline

    def cost_from_psi(self, psi_f) -> float:
        total = float(np.dot(self.grid.w_freq, psi_f))
        if not total > 0:
            raise ValidationError(["integral ARL is not positive"])
        return 1.0 / total

    def cost(self, stack: WaimStack = UNCOATED, result: ScanResult | None = None) -> CostReport:
        psi_f = self.psi(stack, result)
        Psi = self.cost_from_psi(psi_f)
        Psi0 = self.cost_from_psi(self.baseline_psi)
        norm = Psi / Psi0
        return CostReport(psi_f, Psi, norm, norm - 1.0)

    def cuts(self, stack: WaimStack, phis, thetas=None, f: float | None = None):
        """ATC along constant-phi planes. Returns ``{phi: (thetas, atc, Z)}``."""
        f = self.scan.centre_frequency if f is None else f
        thetas = self.grid.thetas if thetas is None else np.asarray(thetas, float)
        phis = [float(p) for p in phis]
        th = np.concatenate([[0.0]] + [thetas] * len(phis))
        ph = np.concatenate([[0.0]] + [np.full(thetas.size, p) for p in phis])
        if self.fast:
            key = (f, th.tobytes(), ph.tobytes())
            if key not in self._cut_engines:
                self._cut_engines[key] = ScanEngine(self.array, [(f, th, ph)], self.trunc, self.delta,
                                                    self.bounds.eps_max, self.tail_nodes)
            z = self._cut_engines[key].impedances(stack)[0]
        else:
            z = active_impedances(th, ph, f, self.array, stack, self.trunc, self.delta)
        zb, z = z[0], z[1:].reshape(len(phis), thetas.size)
        _, atc = arl_atc(reflection(z, zb), self.arl_cap)
        return {p: (thetas, atc[i], z[i]) for i, p in enumerate(phis)}


def integral_arl(stack: WaimStack, d: ArrayDescriptors, spec: ScanSpec = ScanSpec(),
                 trunc: TruncationConfig = TruncationConfig(), **kw) -> np.ndarray:
    return Problem(d, spec, trunc, **kw).psi(stack)


def cost(stack: WaimStack, d: ArrayDescriptors, spec: ScanSpec = ScanSpec(),
         trunc: TruncationConfig = TruncationConfig(), **kw) -> CostReport:
    return Problem(d, spec, trunc, **kw).cost(stack)


def worst_cut_threshold(thetas, atc_map, level: float = 0.9) -> float:
    """Largest theta up to which every phi sample keeps ``atc >= level``.

    ``atc_map`` has shape ``(n_theta, n_phi)``. The boundary is placed
    midway between the last passing and first failing theta sample.
    """
    worst = np.min(atc_map, axis=1)
    fail = np.flatnonzero(worst < level)
    if fail.size == 0:
        return float(thetas[-1])
    i = fail[0]
    if i == 0:
        return 0.0
    return 0.5 * (thetas[i - 1] + thetas[i])


def dip_location(thetas, atc) -> float:
    """Theta of the deepest ATC dip along a cut."""
    return float(np.asarray(thetas)[int(np.argmin(atc))])


def blind_spots(thetas, atc, prominence: float = 0.05) -> np.ndarray:
    """Thetas of local ATC minima that sink at least ``prominence`` below their surroundings."""
    idx, _ = find_peaks(-np.asarray(atc, float), prominence=prominence)
    return np.asarray(thetas, float)[idx]


@dataclass
class SweepVariant:
    label: str
    factors: tuple[float, ...]
    stack: WaimStack
    report: CostReport | None
    feasible: bool
    violations: list[str]
    cuts: dict
    error: str | None = None


def tolerance_sweep(problem: Problem, stack: WaimStack, perturbation: float = 0.1,
                    phis=(0.0, 45.0, 90.0), cut_thetas=None) -> list[SweepVariant]:
    """Nominal stack plus every sign combination of ``+-perturbation`` on the thicknesses."""
    if not 0 <= perturbation < 1:
        raise ValidationError([f"perturbation {perturbation} outside [0, 1)"])
    combos = [((), "nominal")]
    for signs in itertools.product((1, -1), repeat=stack.L):
        combos.append((signs, "t" + "".join("+" if s > 0 else "-" for s in signs)))
    out = []
    for signs, label in combos:
        factors = tuple(1 + s * perturbation for s in signs) if signs else (1.0,) * stack.L
        st = stack.with_thickness_factors(factors)
        ok, bad = feasibility_check(st, problem.bounds, problem.scan)
        try:
            rep = problem.cost(st)
            cuts = problem.cuts(st, phis, cut_thetas)
            err = None
        except (NonFiniteError, ArithmeticError) as exc:
            rep, cuts, err = None, {}, str(exc)
        out.append(SweepVariant(label, factors, st, rep, ok, bad, cuts, err))
    return out
