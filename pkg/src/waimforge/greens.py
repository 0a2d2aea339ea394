"""Spectral Green's functions of a grounded substrate under a layered superstrate.

Each Floquet harmonic is split into TM and TE waves with respect to its
transverse wavevector. Every layer then behaves as a transmission line, and
the patch sees the parallel combination of the grounded substrate (looking
down) and the stack terminated by free space (looking up). Time dependence
is ``exp(+j omega t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import c as C0
from scipy.constants import epsilon_0 as EPS0
from scipy.constants import mu_0 as MU0

from .errors import NonFiniteError, ValidationError

_TINY = 1e-300


@dataclass(frozen=True)
class UniaxialLayer:
    """One superstrate layer with a diagonal permittivity tensor."""

    t: float
    eps_xx: float
    eps_yy: float
    eps_zz: float

    @classmethod
    def isotropic(cls, t: float, eps: float) -> "UniaxialLayer":
        return cls(t, eps, eps, eps)

    @property
    def in_plane_isotropic(self) -> bool:
        return self.eps_xx == self.eps_yy

    def problems(self, eps_max: float = 30.0) -> list[str]:
        out = []
        if not self.t >= 0:
            out.append(f"thickness {self.t} is negative")
        for name in ("eps_xx", "eps_yy", "eps_zz"):
            v = getattr(self, name)
            if not 1.0 <= v <= eps_max:
                out.append(f"{name}={v} outside [1, {eps_max}]")
        return out


@dataclass(frozen=True)
class WaimStack:
    """Ordered superstrate layers; index 0 touches the substrate."""

    layers: tuple[UniaxialLayer, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @classmethod
    def isotropic(cls, thicknesses, permittivities) -> "WaimStack":
        if len(thicknesses) != len(permittivities):
            raise ValidationError(["thickness and permittivity counts differ"])
        return cls(tuple(UniaxialLayer.isotropic(t, e) for t, e in zip(thicknesses, permittivities)))

    @property
    def L(self) -> int:
        return len(self.layers)

    @property
    def in_plane_isotropic(self) -> bool:
        return all(layer.in_plane_isotropic for layer in self.layers)

    def scaled(self, s: float) -> "WaimStack":
        return WaimStack(tuple(replace(layer, t=layer.t * s) for layer in self.layers))

    def with_thickness_factors(self, factors) -> "WaimStack":
        return WaimStack(tuple(replace(layer, t=layer.t * f) for layer, f in zip(self.layers, factors)))


UNCOATED = WaimStack()


def _branch(beta_sq):
    beta = np.sqrt(np.asarray(beta_sq, dtype=complex))
    return np.where(beta.imag > 0, -beta, beta)


def propagation_constant(eps, f, kt, kt_weight=1.0):
    """Longitudinal wavenumber ``sqrt(k0^2 eps - kt_weight kt^2)``.

    ``kt_weight`` is ``eps_t / eps_zz`` for TM waves in a uniaxial layer and
    1 otherwise. The root with ``Im(beta) <= 0`` is returned, so evanescent
    fields decay away from the source.
    """
    k0 = 2 * np.pi * f / C0
    kt = np.asarray(kt, dtype=float)
    return _branch(k0 * k0 * eps - kt_weight * (kt * kt))


def wave_impedance_admittance(beta, eps, f):
    """TM wave impedance and TE wave admittance of a layer."""
    w = 2 * np.pi * f
    return beta / (w * EPS0 * eps), beta / (w * MU0)


@dataclass
class LayerWaveState:
    """Transmission-line state of one layer (or of the free-space cap)."""

    beta_tm: np.ndarray
    beta_te: np.ndarray
    Z: np.ndarray
    Y: np.ndarray
    Gamma: np.ndarray
    Phi: np.ndarray
    ZT: np.ndarray
    YT: np.ndarray


def _effective_eps(layer: UniaxialLayer, cos2):
    if layer.in_plane_isotropic:
        return layer.eps_xx, layer.eps_xx
    sin2 = 1.0 - cos2
    eu = layer.eps_xx * cos2 + layer.eps_yy * sin2
    ev = layer.eps_xx * sin2 + layer.eps_yy * cos2
    return eu, ev


def _line_state(eps_tm, eps_zz, eps_te, f, kt):
    b_tm = propagation_constant(eps_tm, f, kt, eps_tm / eps_zz)
    b_te = propagation_constant(eps_te, f, kt)
    Z, _ = wave_impedance_admittance(b_tm, eps_tm, f)
    _, Y = wave_impedance_admittance(b_te, eps_te, f)
    return b_tm, b_te, Z, Y


def free_space_state(kt, f) -> LayerWaveState:
    b, _, Z, Y = _line_state(1.0, 1.0, 1.0, f, kt)
    zero = np.zeros_like(Z)
    return LayerWaveState(b, b, Z, Y, zero, zero, Z, Y)


def reflection_recursion(stack: WaimStack, kt, phi_k, f) -> list[LayerWaveState]:
    """Top-down reflection recursion through the superstrate.

    Returns one state per layer, bottom layer first, followed by the
    free-space cap as the last entry. For an uncoated array the list holds
    only the cap.
    """
    kt = np.asarray(kt, dtype=float)
    cos2 = np.cos(phi_k) ** 2 if not stack.in_plane_isotropic else None
    top = free_space_state(kt, f)
    states = [top]
    ZT, YT = top.ZT, top.YT
    for layer in reversed(stack.layers):
        eu, ev = _effective_eps(layer, cos2)
        b_tm, b_te, Z, Y = _line_state(eu, layer.eps_zz, ev, f, kt)
        gam = np.exp(-2j * b_tm * layer.t) * (Z - ZT) / (Z + ZT)
        phi = np.exp(-2j * b_te * layer.t) * (Y - YT) / (Y + YT)
        ZT = Z * (1 - gam) / (1 + gam)
        YT = Y * (1 - phi) / (1 + phi)
        states.append(LayerWaveState(b_tm, b_te, Z, Y, gam, phi, ZT, YT))
    if any(not np.all(np.isfinite(s.ZT)) or not np.all(np.isfinite(s.YT)) for s in states):
        raise NonFiniteError("non-finite transferred impedance in superstrate recursion")
    return states[1:][::-1] + [top]


@dataclass
class SubstrateBoundary:
    beta_sub: np.ndarray
    Gamma_sub: np.ndarray
    Phi_sub: np.ndarray
    a_sub: np.ndarray
    b_sub: np.ndarray
    A_coef: np.ndarray
    B_coef: np.ndarray
    one_minus_gamma_over_beta: np.ndarray


def _one_minus_exp_over_beta(beta, d):
    # (1 - exp(-2j beta d)) / beta, finite as beta -> 0
    safe = np.where(beta == 0, 1.0, beta)
    return np.where(beta == 0, 2j * d, -np.expm1(-2j * beta * d) / safe)


def substrate_boundary(d1, eps_sub, first: LayerWaveState, kt, f, delta=1e-9) -> SubstrateBoundary:
    """Boundary unknowns at the patch plane.

    ``first`` is the state of the bottom superstrate layer, or the free-space
    cap for an uncoated array. ``delta`` is a small loss tangent applied to
    the substrate so that guided-wave poles leave the real axis.
    """
    w = 2 * np.pi * f
    es = eps_sub * (1 - 1j * delta)
    b_s = propagation_constant(es, f, kt)
    Zs, Ys = wave_impedance_admittance(b_s, es, f)
    ex = np.exp(-2j * b_s * d1)
    g_s, p_s = ex, -ex
    g1, p1 = first.Gamma, first.Phi
    A = 1j * w * EPS0 * (Zs * (1 - g_s) * (1 + g1) + first.Z * (1 - g1) * (1 + g_s))
    B = 1j * w * MU0 * (Ys * (1 - p_s) * (1 + p1) + first.Y * (1 - p1) * (1 + p_s))
    if np.any(np.abs(A) < _TINY) or np.any(np.abs(B) < _TINY):
        raise NonFiniteError("surface-wave pole hit exactly at the substrate boundary")
    a_sub = -(1 - g1) * (w * EPS0 * first.Z) / A
    b_sub = w * MU0 * (1 + p1) / B
    return SubstrateBoundary(b_s, g_s, p_s, a_sub, b_sub, A, B, _one_minus_exp_over_beta(b_s, d1))


@dataclass
class LineQuantities:
    """Scalar spectral kernels at the patch plane.

    ``z_tm`` and ``z_te`` are the TM and TE input impedances seen at the
    patch plane. The probe coupling vector is ``w_coef * (kx, ky)``.
    """

    z_tm: np.ndarray
    z_te: np.ndarray
    w_coef: np.ndarray
    beta_sub: np.ndarray


def line_quantities(kt, f, d1, eps_sub, stack: WaimStack = UNCOATED, phi_k=0.0, delta=1e-9) -> LineQuantities:
    kt = np.asarray(kt, dtype=float)
    states = reflection_recursion(stack, kt, phi_k, f)
    sb = substrate_boundary(d1, eps_sub, states[0], kt, f, delta)
    w = 2 * np.pi * f
    es = eps_sub * (1 - 1j * delta)
    w_coef = sb.one_minus_gamma_over_beta * sb.a_sub / (w * EPS0 * es)
    z_tm = -1j * sb.beta_sub**2 * w_coef
    z_te = 1j * (1 + sb.Phi_sub) * sb.b_sub
    out = LineQuantities(z_tm, z_te, w_coef, sb.beta_sub)
    if not (np.all(np.isfinite(z_tm)) and np.all(np.isfinite(z_te)) and np.all(np.isfinite(w_coef))):
        raise NonFiniteError("non-finite spectral kernel")
    return out


@dataclass
class SpectralGreens:
    Gxx: complex
    Gxy: complex
    Gyx: complex
    Gyy: complex
    Gzx: complex
    Gzy: complex
    Gxz: complex
    Gyz: complex


def transverse_unit(kx, ky):
    """Unit vector along the transverse wavevector, ``x`` at ``kt = 0``."""
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    kt = np.hypot(kx, ky)
    zero = kt == 0
    safe = np.where(zero, 1.0, kt)
    return np.where(zero, 1.0, kx / safe), np.where(zero, 0.0, ky / safe), kt


def greens_dyad(kx, ky, f, d1, eps_sub, stack: WaimStack = UNCOATED, delta=1e-9) -> SpectralGreens:
    """Dyad components at one or many spectral points.

    The tangential block maps patch current to tangential field at the patch
    plane. ``Gzx``/``Gzy`` give the probe voltage, i.e. the z field
    integrated across the substrate, produced by a tangential current.
    """
    ux, uy, kt = transverse_unit(kx, ky)
    lq = line_quantities(kt, f, d1, eps_sub, stack, np.arctan2(uy, ux), delta)
    zt, ze = lq.z_tm, lq.z_te
    gxy = -(zt - ze) * ux * uy
    gzx = lq.w_coef * np.asarray(kx)
    gzy = lq.w_coef * np.asarray(ky)
    return SpectralGreens(
        Gxx=-(zt * ux * ux + ze * uy * uy),
        Gxy=gxy,
        Gyx=gxy,
        Gyy=-(zt * uy * uy + ze * ux * ux),
        Gzx=gzx,
        Gzy=gzy,
        Gxz=-gzx,
        Gyz=-gzy,
    )
