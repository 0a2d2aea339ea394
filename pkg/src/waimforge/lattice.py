"""Planar lattice geometry and Floquet wavevectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0

from .errors import ValidationError


@dataclass(frozen=True)
class ArrayDescriptors:
    """Fixed geometry of the probe-fed patch array.

    The patch occupies ``x in [-d4/2, d4/2]`` and ``y in [-d3/2, d3/2]``,
    so the resonant length ``d4`` runs along x. The probe sits at
    ``(d5, d6)`` relative to the patch centre.

    Attributes:
        d1: Substrate thickness in metres.
        d2: Substrate relative permittivity.
        d3: Patch width (y extent) in metres.
        d4: Patch length (x extent, resonant) in metres.
        d5: Probe offset along x in metres.
        d6: Probe offset along y in metres.
        w1: First lattice vector in metres.
        w2: Second lattice vector in metres.
    """

    d1: float
    d2: float
    d3: float
    d4: float
    d5: float
    d6: float
    w1: tuple[float, float]
    w2: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "w1", tuple(float(v) for v in self.w1))
        object.__setattr__(self, "w2", tuple(float(v) for v in self.w2))

    def problems(self) -> list[str]:
        out = []
        if not self.d1 > 0:
            out.append("d1 must be positive")
        if not self.d2 >= 1:
            out.append("d2 (substrate permittivity) must be >= 1")
        if not self.d3 > 0:
            out.append("d3 must be positive")
        if not self.d4 > 0:
            out.append("d4 must be positive")
        tol = 1e-12
        if abs(self.d5) > self.d4 / 2 * (1 + tol):
            out.append("feed offset d5 lies outside the patch length d4")
        if abs(self.d6) > self.d3 / 2 * (1 + tol):
            out.append("feed offset d6 lies outside the patch width d3")
        if abs(_cross(self.w1, self.w2)) <= 1e-18:
            out.append("lattice vectors w1, w2 are degenerate")
        return out

    def validate(self) -> "ArrayDescriptors":
        errs = self.problems()
        if errs:
            raise ValidationError(errs)
        return self

    def scaled(self, s: float) -> "ArrayDescriptors":
        """Return the geometry with every length multiplied by ``s``."""
        return ArrayDescriptors(
            self.d1 * s, self.d2, self.d3 * s, self.d4 * s, self.d5 * s, self.d6 * s,
            (self.w1[0] * s, self.w1[1] * s), (self.w2[0] * s, self.w2[1] * s),
        )


@dataclass(frozen=True)
class ReciprocalLattice:
    nu1: tuple[float, float]
    nu2: tuple[float, float]
    area: float


@dataclass(frozen=True)
class SpectralPoint:
    p: int
    q: int
    kx: float
    ky: float

    @property
    def kt(self) -> float:
        return float(np.hypot(self.kx, self.ky))


@dataclass(frozen=True)
class SteeringPoint:
    """Scan direction in degrees and frequency in hertz."""

    theta: float
    phi: float
    f: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 90.0:
            raise ValidationError([f"theta={self.theta} outside [0, 90] deg"])
        if not self.f > 0:
            raise ValidationError([f"frequency must be positive, got {self.f}"])

    @property
    def wavelength(self) -> float:
        return C0 / self.f

    @property
    def k0(self) -> float:
        return 2 * np.pi * self.f / C0

    def phase_gradient(self) -> tuple[float, float]:
        th, ph = np.radians(self.theta), np.radians(self.phi)
        s = self.k0 * np.sin(th)
        return s * np.cos(ph), s * np.sin(ph)


def _cross(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


def reciprocal_lattice(w1, w2) -> ReciprocalLattice:
    """Reciprocal vectors with ``nu_i . w_j = 2 pi delta_ij``."""
    cr = _cross(w1, w2)
    if abs(cr) <= 1e-18:
        raise ValidationError([f"degenerate lattice: |w1 x w2| = {abs(cr):g} m^2"])
    nu1 = (2 * np.pi * w2[1] / cr, -2 * np.pi * w2[0] / cr)
    nu2 = (-2 * np.pi * w1[1] / cr, 2 * np.pi * w1[0] / cr)
    return ReciprocalLattice(nu1, nu2, abs(cr))


def floquet_wavevector(p: int, q: int, steer: SteeringPoint, rl: ReciprocalLattice) -> SpectralPoint:
    gx, gy = steer.phase_gradient()
    kx = p * rl.nu1[0] + q * rl.nu2[0] + gx
    ky = p * rl.nu1[1] + q * rl.nu2[1] + gy
    return SpectralPoint(p, q, kx, ky)


def harmonic_indices(P: int, Q: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened ``(p, q)`` index arrays over ``[-P, P] x [-Q, Q]``."""
    p, q = np.meshgrid(np.arange(-P, P + 1), np.arange(-Q, Q + 1), indexing="ij")
    return p.ravel(), q.ravel()


def floquet_grid(rl: ReciprocalLattice, P: int, Q: int, gx, gy):
    """Vectorised wavevectors for every harmonic and steering gradient.

    ``gx`` and ``gy`` may be scalars or arrays of shape ``(S,)``; the result
    has shape ``(S, H)`` (or ``(H,)`` for scalar input).
    """
    p, q = harmonic_indices(P, Q)
    bx = p * rl.nu1[0] + q * rl.nu2[0]
    by = p * rl.nu1[1] + q * rl.nu2[1]
    gx = np.asarray(gx, dtype=float)
    gy = np.asarray(gy, dtype=float)
    return bx + gx[..., None], by + gy[..., None]
