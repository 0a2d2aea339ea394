"""Fast repeated evaluation of the active impedance over a fixed scan grid.

For stacks whose layers are isotropic in the patch plane the spectral
kernels depend on the harmonic only through ``kt``. Everything else
(mode transforms, feed phases, lattice sums) is fixed by the array and the
scan grid, so it is precomputed once.

Harmonics with ``kt`` below a cut that clears every possible guided-wave
pole are kept individually and evaluated exactly. The remaining tail is
smooth in ``log(kt)``; its kernels are sampled on a small set of nodes and
the lattice sums are projected onto those nodes with local cubic Lagrange
weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.constants import c as C0

from .greens import WaimStack, line_quantities, transverse_unit
from .lattice import ArrayDescriptors, floquet_grid, reciprocal_lattice
from .moments import ModalBasis, TruncationConfig, active_impedances, impedance_from_system, modal_projections


def _lagrange4(u, nodes):
    """Indices and weights of 4-point Lagrange interpolation on uniform nodes."""
    n = nodes.size
    h = nodes[1] - nodes[0]
    i0 = np.clip(np.floor((u - nodes[0]) / h).astype(int) - 1, 0, n - 4)
    idx = i0[:, None] + np.arange(4)
    xs = nodes[idx]
    w = np.ones_like(xs)
    for a in range(4):
        for b in range(4):
            if a != b:
                w[:, a] *= (u - xs[:, b]) / (xs[:, a] - xs[:, b])
    return idx, w


@dataclass
class _FreqTables:
    f: float
    n_steer: int
    kt_near: np.ndarray      # (S, N)
    near_tm: np.ndarray      # (S, N, npair)
    near_te: np.ndarray
    near_u: np.ndarray       # (S, N, M)
    near_v: np.ndarray
    rad_weight: np.ndarray   # (S, N) kt^2 on visible harmonics, else 0
    kt_nodes: np.ndarray     # (K,)
    tail_tm: np.ndarray      # (S, K, npair)
    tail_te: np.ndarray
    tail_u: np.ndarray       # (S, K, M)
    tail_v: np.ndarray


class ScanEngine:
    """Precomputed evaluator for one array, truncation and set of scan grids.

    Args:
        d: Array geometry.
        grids: Sequence of ``(f, thetas_deg, phis_deg)``; each entry lists
            the steering directions needed at that frequency.
        trunc: Floquet truncation and mode count.
        delta: Substrate loss tangent used for pole regularisation.
        eps_ceiling: Largest permittivity any evaluated stack may use. It
            sets the exact-evaluation cut, so it must bound every layer.
        nodes: Interpolation nodes for the tail kernels.
    """

    cut_factor = 2.0

    def __init__(self, d: ArrayDescriptors, grids, trunc: TruncationConfig = TruncationConfig(),
                 delta: float = 1e-9, eps_ceiling: float = 30.0, nodes: int = 128, chunk: int | None = None):
        self.d = d
        self.trunc = trunc
        self.delta = delta
        self.eps_ceiling = float(eps_ceiling)
        self.rl = reciprocal_lattice(d.w1, d.w2)
        self.basis = ModalBasis.standard(d, trunc.M)
        M = self.basis.M
        self._iu = np.triu_indices(M)
        self.grids = [(float(f), np.asarray(t, float).ravel(), np.asarray(p, float).ravel()) for f, t, p in grids]
        H = (2 * trunc.P + 1) * (2 * trunc.Q + 1)
        self._chunk = chunk or max(1, 120_000 // H)
        self.tables = [self._build(f, th, ph, nodes) for f, th, ph in self.grids]

    def supports(self, stack: WaimStack) -> bool:
        return stack.in_plane_isotropic and all(
            max(layer.eps_xx, layer.eps_zz) <= self.eps_ceiling for layer in stack.layers)

    def _build(self, f, th_deg, ph_deg, n_nodes) -> _FreqTables:
        d, M = self.d, self.basis.M
        iu, ju = self._iu
        k0 = 2 * np.pi * f / C0
        kt_cut = self.cut_factor * k0 * np.sqrt(max(self.eps_ceiling, d.d2))
        th, ph = np.radians(th_deg), np.radians(ph_deg)
        gx, gy = k0 * np.sin(th) * np.cos(ph), k0 * np.sin(th) * np.sin(ph)
        S = th.size
        inv_a = 1.0 / self.rl.area

        kx0, ky0 = floquet_grid(self.rl, self.trunc.P, self.trunc.Q, 0.0, 0.0)
        g_max = np.hypot(kx0, ky0).max() + k0
        u_lo = np.log(kt_cut / g_max) - 1e-9
        u_nodes = np.linspace(u_lo, 0.0, n_nodes)
        kt_nodes = kt_cut / np.exp(u_nodes)

        # near harmonics: the count per steer varies slightly, so pad
        kxa, kya = floquet_grid(self.rl, self.trunc.P, self.trunc.Q, gx, gy)
        near_mask = np.hypot(kxa, kya) < kt_cut
        n_near = int(near_mask.sum(axis=1).max())
        del kxa, kya

        npair = iu.size
        kt_near = np.zeros((S, n_near))
        near_tm = np.zeros((S, n_near, npair), complex)
        near_te = np.zeros((S, n_near, npair), complex)
        near_u = np.zeros((S, n_near, M), complex)
        near_v = np.zeros((S, n_near, M), complex)
        rad_w = np.zeros((S, n_near))
        tail_tm = np.zeros((S, n_nodes, npair), complex)
        tail_te = np.zeros((S, n_nodes, npair), complex)
        tail_u = np.zeros((S, n_nodes, M), complex)
        tail_v = np.zeros((S, n_nodes, M), complex)

        for s0 in range(0, S, self._chunk):
            sl = slice(s0, min(S, s0 + self._chunk))
            kx, ky = floquet_grid(self.rl, self.trunc.P, self.trunc.Q, gx[sl], gy[sl])
            ux, uy, kt = transverse_unit(kx, ky)
            tm, te, kj = modal_projections(kx, ky, self.basis)  # (M, s, H)
            feed = np.exp(1j * (kx * d.d5 + ky * d.d6))
            ptm = tm[iu] * tm[ju].conj()          # (npair, s, H)
            pte = te[iu] * te[ju].conj()
            pu = kj.conj() * feed                  # (M, s, H)
            pv = kj * feed.conj()
            near = kt < kt_cut
            for r in range(kt.shape[0]):
                s = s0 + r
                sel = np.flatnonzero(near[r])
                n = sel.size
                kt_near[s, :n] = kt[r, sel]
                near_tm[s, :n] = ptm[:, r, sel].T
                near_te[s, :n] = pte[:, r, sel].T
                near_u[s, :n] = pu[:, r, sel].T
                near_v[s, :n] = pv[:, r, sel].T
                vis = kt[r, sel] < k0
                rad_w[s, :n] = np.where(vis, kt[r, sel] ** 2, 0.0)

            # tail projection as one block-sparse product per chunk
            rows, cols = np.nonzero(~near)
            ktt = kt[rows, cols]
            idx, w = _lagrange4(np.log(kt_cut / ktt), u_nodes)
            nr = kt.shape[0]
            H = kt.shape[1]
            R = sp.csr_matrix(
                (w.ravel(), ((rows[:, None] * n_nodes + idx).ravel(), np.repeat(rows * H + cols, 4))),
                shape=(nr * n_nodes, nr * H),
            )
            # kernels are factored as Ztm = kt*h_tm, Zte = h_te/kt, Wc = h_w/kt
            scale_tm = np.where(near, 0.0, kt).ravel()
            scale_inv = np.where(near, 0.0, 1.0 / np.where(kt == 0, 1.0, kt)).ravel()

            def project(arr, scale):
                flat = arr.reshape(arr.shape[0], -1).T * scale[:, None]
                return (R @ flat).reshape(nr, n_nodes, arr.shape[0])

            tail_tm[sl] = project(ptm, scale_tm)
            tail_te[sl] = project(pte, scale_inv)
            tail_u[sl] = project(pu, scale_inv)
            tail_v[sl] = project(pv, scale_inv)

        return _FreqTables(f, S, kt_near, near_tm * -inv_a, near_te * -inv_a, near_u * inv_a, near_v * inv_a,
                           rad_w * inv_a, kt_nodes, tail_tm * -inv_a, tail_te * -inv_a, tail_u * inv_a,
                           tail_v * inv_a)

    def _evaluate(self, tab: _FreqTables, stack: WaimStack):
        d = self.d
        M = self.basis.M
        iu, ju = self._iu
        lq = line_quantities(tab.kt_near, tab.f, d.d1, d.d2, stack, 0.0, self.delta)
        ln = line_quantities(tab.kt_nodes, tab.f, d.d1, d.d2, stack, 0.0, self.delta)
        h_tm = ln.z_tm / tab.kt_nodes
        h_te = ln.z_te * tab.kt_nodes
        h_w = ln.w_coef * tab.kt_nodes

        def pair_sum(z_near, near, h, tail):
            # sum of Z*P and Z*conj(P) from separate real and imaginary parts of Z
            re = np.einsum("sn,snp->sp", z_near.real, near) + np.einsum("k,skp->sp", h.real, tail)
            im = np.einsum("sn,snp->sp", z_near.imag, near) + np.einsum("k,skp->sp", h.imag, tail)
            return re + 1j * im, re.conj() + 1j * im.conj()

        a_tm, b_tm = pair_sum(lq.z_tm, tab.near_tm, h_tm, tab.tail_tm)
        a_te, b_te = pair_sum(lq.z_te, tab.near_te, h_te, tab.tail_te)
        sigma = np.empty((tab.n_steer, M, M), complex)
        sigma[:, iu, ju] = a_tm + a_te
        sigma[:, ju, iu] = b_tm + b_te
        U = np.einsum("sn,snm->sm", lq.w_coef, tab.near_u) + np.einsum("k,skm->sm", h_w, tab.tail_u)
        V = np.einsum("sn,snm->sm", lq.w_coef, tab.near_v) + np.einsum("k,skm->sm", h_w, tab.tail_v)
        bs = lq.beta_sub
        r = np.sum(tab.rad_weight * (lq.z_tm / bs**4).real, axis=1)
        return impedance_from_system(sigma, U, V, r)

    def impedances(self, stack: WaimStack) -> list[np.ndarray]:
        """Active impedance for every grid entry, one array per frequency."""
        if not self.supports(stack):
            return [active_impedances(th, ph, f, self.d, stack, self.trunc, self.delta)
                    for f, th, ph in self.grids]
        return [self._evaluate(tab, stack) for tab in self.tables]
