"""Galerkin moment-method solution for the active impedance of the array."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0

from .errors import NonFiniteError, SingularSystemError, ValidationError
from .greens import UNCOATED, WaimStack, line_quantities, transverse_unit
from .lattice import ArrayDescriptors, SteeringPoint, floquet_grid, reciprocal_lattice


@dataclass(frozen=True)
class TruncationConfig:
    P: int = 60
    Q: int = 60
    M: int = 6

    def problems(self) -> list[str]:
        out = []
        if self.P < 1 or self.Q < 1:
            out.append("truncation P and Q must be >= 1")
        if self.M < 1:
            out.append("mode count M must be >= 1")
        return out


@dataclass(frozen=True)
class Mode:
    direction: str  # "x" or "y"
    n: int


@dataclass(frozen=True)
class ModalBasis:
    """Entire-domain sinusoidal modes on the rectangular patch.

    x-directed modes vary as ``sin(n pi (x + a/2) / a)`` and are uniform in
    y; y-directed modes are the same construction rotated. ``a`` is the
    x extent (patch length ``d4``) and ``b`` the y extent (width ``d3``).
    """

    a: float
    b: float
    modes: tuple[Mode, ...]

    @classmethod
    def standard(cls, d: ArrayDescriptors, M: int = 6) -> "ModalBasis":
        return cls(d.d4, d.d3, tuple(default_modes(M)))

    @property
    def M(self) -> int:
        return len(self.modes)


def default_modes(M: int) -> list[Mode]:
    """Four odd x harmonics then two y harmonics; extra modes alternate."""
    if M < 1:
        raise ValidationError([f"mode count must be >= 1, got {M}"])
    modes = [Mode("x", 1), Mode("x", 3), Mode("x", 5), Mode("x", 7), Mode("y", 1), Mode("y", 2)]
    nx, ny = 9, 3
    while len(modes) < M:
        if len(modes) % 2 == 0:
            modes.append(Mode("x", nx))
            nx += 2
        else:
            modes.append(Mode("y", ny))
            ny += 1
    return modes[:M]


def basis_mode_eval(m: int, x, y, basis: ModalBasis):
    """Current shape of mode ``m`` (1-based) at ``(x, y)``; zero off the patch."""
    if not 1 <= m <= basis.M:
        raise ValidationError([f"mode index {m} outside [1, {basis.M}]"])
    mode = basis.modes[m - 1]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a, b = basis.a, basis.b
    inside = (np.abs(x) <= a / 2) & (np.abs(y) <= b / 2)
    if mode.direction == "x":
        val = np.sin(mode.n * np.pi * (x + a / 2) / a)
        return np.where(inside, val, 0.0), np.zeros_like(val)
    val = np.sin(mode.n * np.pi * (y + b / 2) / b)
    return np.zeros_like(val), np.where(inside, val, 0.0)


def _sinc(u):
    return np.sinc(u / np.pi)


def sine_transform(k, L, n):
    """Transform of ``sin(n pi (s + L/2) / L)`` on ``[-L/2, L/2]`` with kernel ``exp(+j k s)``."""
    kn = n * np.pi / L
    h = L / 2
    return (L / 2j) * (np.exp(1j * kn * h) * _sinc((k + kn) * h) - np.exp(-1j * kn * h) * _sinc((k - kn) * h))


def uniform_transform(k, L):
    return L * _sinc(k * L / 2)


def mode_transform(m: int, kx, ky, basis: ModalBasis):
    """Fourier transform ``(Jx, Jy)`` of mode ``m`` (1-based)."""
    if not 1 <= m <= basis.M:
        raise ValidationError([f"mode index {m} outside [1, {basis.M}]"])
    mode = basis.modes[m - 1]
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    if mode.direction == "x":
        j = sine_transform(kx, basis.a, mode.n) * uniform_transform(ky, basis.b)
        return j, np.zeros_like(j)
    j = uniform_transform(kx, basis.a) * sine_transform(ky, basis.b, mode.n)
    return np.zeros_like(j), j


def modal_projections(kx, ky, basis: ModalBasis):
    """Per-mode scalar transforms projected on the TM, TE and wavevector axes.

    Returns ``(tm, te, kj)`` of shape ``(M, ...)`` where ``tm = u . J``,
    ``te = v . J`` with ``v = z x u``, and ``kj = k . J``.
    """
    ux, uy, _ = transverse_unit(kx, ky)
    tm, te, kj = [], [], []
    for m, mode in enumerate(basis.modes, start=1):
        jx, jy = mode_transform(m, kx, ky, basis)
        if mode.direction == "x":
            tm.append(ux * jx)
            te.append(-uy * jx)
            kj.append(kx * jx)
        else:
            tm.append(uy * jy)
            te.append(ux * jy)
            kj.append(ky * jy)
    return np.array(tm), np.array(te), np.array(kj)


@dataclass
class MomentSystem:
    """Galerkin system ``sigma^T C = U`` plus the expansion voltages ``V``.

    ``sigma[m, h]`` is the reaction of mode ``m`` on testing mode ``h``.
    ``r_probe`` is the radiation resistance of the bare probe current.
    """

    sigma: np.ndarray
    U: np.ndarray
    V: np.ndarray
    r_probe: float
    steer: SteeringPoint | None = None
    P: int = 0
    Q: int = 0

    def condition(self) -> float:
        return float(np.linalg.cond(self.sigma))


def _assemble_batch(gx, gy, f, d: ArrayDescriptors, stack: WaimStack, trunc: TruncationConfig, delta: float):
    """Fused pass over the Floquet grid for a batch of phase gradients."""
    rl = reciprocal_lattice(d.w1, d.w2)
    basis = ModalBasis.standard(d, trunc.M)
    kx, ky = floquet_grid(rl, trunc.P, trunc.Q, gx, gy)
    ux, uy, kt = transverse_unit(kx, ky)
    lq = line_quantities(kt, f, d.d1, d.d2, stack, np.arctan2(uy, ux), delta)
    tm, te, kj = modal_projections(kx, ky, basis)  # (M, S, H)
    tm = np.moveaxis(tm, 0, -2)  # (S, M, H)
    te = np.moveaxis(te, 0, -2)
    kj = np.moveaxis(kj, 0, -2)
    inv_a = 1.0 / rl.area
    # sigma[s, m, h] = -(1/A) sum_k [Ztm tm_m conj(tm_h) + Zte te_m conj(te_h)]
    sigma = -inv_a * (
        (tm * lq.z_tm[..., None, :]) @ np.swapaxes(tm.conj(), -1, -2)
        + (te * lq.z_te[..., None, :]) @ np.swapaxes(te.conj(), -1, -2)
    )
    feed = np.exp(1j * (kx * d.d5 + ky * d.d6))
    wk = lq.w_coef[..., None, :]
    U = inv_a * np.sum(wk * kj.conj() * feed[..., None, :], axis=-1)
    V = inv_a * np.sum(wk * kj * feed.conj()[..., None, :], axis=-1)
    k0 = 2 * np.pi * f / C0
    vis = kt < k0
    bs = np.where(vis, lq.beta_sub, 1.0)
    r = np.where(vis, (kt * kt * lq.z_tm / bs**4).real, 0.0)
    r_probe = inv_a * r.sum(axis=-1)
    if not (np.all(np.isfinite(sigma)) and np.all(np.isfinite(U)) and np.all(np.isfinite(V))):
        raise NonFiniteError("non-finite moment system entries")
    return sigma, U, V, r_probe


def assemble_moment_system(steer: SteeringPoint, d: ArrayDescriptors, stack: WaimStack = UNCOATED,
                           trunc: TruncationConfig = TruncationConfig(), delta: float = 1e-9) -> MomentSystem:
    gx, gy = steer.phase_gradient()
    sigma, U, V, r = _assemble_batch(gx, gy, steer.f, d, stack, trunc, delta)
    return MomentSystem(sigma, U, V, float(r), steer, trunc.P, trunc.Q)


def expansion_voltages(steer: SteeringPoint, d: ArrayDescriptors, stack: WaimStack = UNCOATED,
                       trunc: TruncationConfig = TruncationConfig(), delta: float = 1e-9) -> np.ndarray:
    return assemble_moment_system(steer, d, stack, trunc, delta).V


def solve_mode_currents(system: MomentSystem) -> np.ndarray:
    """Mode amplitudes ``C`` with ``sigma^T C = U``."""
    return _solve(np.asarray(system.sigma), np.asarray(system.U), system.steer)


def _solve(sigma, U, steer=None):
    a = np.swapaxes(sigma, -1, -2)
    try:
        C = np.linalg.solve(a, U[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"singular moment matrix at {steer}") from exc
    if not np.all(np.isfinite(C)):
        raise SingularSystemError(f"singular moment matrix at {steer}")
    return C


def impedance_from_system(sigma, U, V, r_probe):
    """``Z = -sum_m C_m V_m`` plus the probe radiation resistance."""
    C = _solve(sigma, U)
    return -np.sum(C * V, axis=-1) + r_probe


def active_impedance(steer: SteeringPoint, d: ArrayDescriptors, stack: WaimStack = UNCOATED,
                     trunc: TruncationConfig = TruncationConfig(), delta: float = 1e-9) -> complex:
    s = assemble_moment_system(steer, d, stack, trunc, delta)
    return complex(impedance_from_system(s.sigma, s.U, s.V, s.r_probe))


def active_impedances(thetas, phis, f, d: ArrayDescriptors, stack: WaimStack = UNCOATED,
                      trunc: TruncationConfig = TruncationConfig(), delta: float = 1e-9,
                      batch: int | None = None) -> np.ndarray:
    """Active impedance at many steering directions (degrees) for one frequency."""
    th = np.radians(np.asarray(thetas, dtype=float)).ravel()
    ph = np.radians(np.asarray(phis, dtype=float)).ravel()
    k0 = 2 * np.pi * f / C0
    gx = k0 * np.sin(th) * np.cos(ph)
    gy = k0 * np.sin(th) * np.sin(ph)
    H = (2 * trunc.P + 1) * (2 * trunc.Q + 1)
    if batch is None:
        batch = max(1, 400_000 // H)
    out = np.empty(th.size, dtype=complex)
    for i in range(0, th.size, batch):
        sl = slice(i, i + batch)
        sigma, U, V, r = _assemble_batch(gx[sl], gy[sl], f, d, stack, trunc, delta)
        out[sl] = impedance_from_system(sigma, U, V, r)
    return out.reshape(np.shape(thetas))


@dataclass(frozen=True)
class ActiveResponse:
    Z: complex
    Gamma: complex
    ARL: float
    ATC: float


def reflection(z, z_ref):
    """Active reflection coefficient referenced to the broadside impedance.

    The conjugate reference keeps ``|Gamma| <= 1`` whenever both impedances
    are passive, so ``1 - |Gamma|^2`` is a true power fraction.
    """
    z = np.asarray(z, dtype=complex)
    den = z + np.conj(z_ref)
    if np.any(np.abs(den) < 1e-300):
        raise NonFiniteError("degenerate reflection reference")
    return (z - z_ref) / den


def arl_atc(gamma, arl_cap: float = 1e6):
    g2 = np.abs(gamma) ** 2
    with np.errstate(divide="ignore"):
        arl = np.where(g2 > 0, 1.0 / np.where(g2 > 0, g2, 1.0), np.inf)
    return np.minimum(arl, arl_cap), 1.0 - g2


def active_response(steer: SteeringPoint, d: ArrayDescriptors, stack: WaimStack = UNCOATED,
                    trunc: TruncationConfig = TruncationConfig(), z_broadside: complex | None = None,
                    arl_cap: float = 1e6, delta: float = 1e-9) -> ActiveResponse:
    if z_broadside is None:
        z_broadside = active_impedance(SteeringPoint(0.0, 0.0, steer.f), d, stack, trunc, delta)
    if steer.theta == 0.0:
        z = z_broadside
    else:
        z = active_impedance(steer, d, stack, trunc, delta)
    g = complex(reflection(z, z_broadside))
    arl, atc = arl_atc(g, arl_cap)
    return ActiveResponse(complex(z), g, float(arl), float(atc))
