"""Independent reference models used only by the tests."""

from __future__ import annotations

import numpy as np
from scipy.constants import c as C0, epsilon_0 as EPS0, mu_0 as MU0


def _root(x):
    b = np.sqrt(complex(x))
    return -b if b.imag > 0 else b


def _match(bottom_ratio, regions, top_ratio, source_row):
    """Solve continuity of (F, G) across stacked regions.

    In region ``i`` the field is ``F = A e^{-j b (z - z_i)} + B e^{j b (z - z_i - t)}``
    and ``G = kap (A e^{...} - B e^{...})``. The substrate contributes one
    unknown ``C`` with ``F = C``, ``G = bottom_ratio * C`` at its top; free
    space one unknown ``D`` with ``G = top_ratio * D``. The unit source sits
    in the jump of row ``source_row`` (0: F, 1: G) at the substrate top.
    Returns ``C``.
    """
    L = len(regions)
    n = 2 + 2 * L
    M = np.zeros((n, n), complex)
    rhs = np.zeros(n, complex)

    def put(r, idx, sign, at_top):
        if idx == L:
            M[r, n - 1] += sign
            M[r + 1, n - 1] += sign * top_ratio
            return
        beta, kap, t = regions[idx]
        E = np.exp(-1j * beta * t)
        fa, fb = (E, 1.0) if at_top else (1.0, E)
        c = 1 + 2 * idx
        M[r, c] += sign * fa
        M[r, c + 1] += sign * fb
        M[r + 1, c] += sign * kap * fa
        M[r + 1, c + 1] -= sign * kap * fb

    M[0, 0] = 1.0
    M[1, 0] = bottom_ratio
    put(0, 0, -1.0, False)
    rhs[source_row] = 1.0
    for i in range(L):
        put(2 + 2 * i, i, 1.0, True)
        put(2 + 2 * i, i + 1, -1.0, False)
    return np.linalg.solve(M, rhs)[0]


def slab_fields(kt, f, d1, eps_sub, layers=(), delta=1e-9):
    """Patch-plane fields of a unit surface current by direct boundary matching.

    ``layers`` holds ``(t, eps_u, eps_v, eps_zz)`` per superstrate layer,
    bottom first, with ``u`` along the transverse wavevector. Returns
    ``(Eu/Ju, Ev/Jv, int_0^d1 Ez dz / Ju)``.
    """
    w = 2 * np.pi * f
    k0 = w / C0
    es = eps_sub * (1 - 1j * delta)
    bs = _root(k0**2 * es - kt**2)
    b0 = _root(k0**2 - kt**2)
    tan = np.tan(bs * d1)

    # TM: F = H_v, G = E_u = -(1/(j w eps0 eps_u)) dH_v/dz; H_v jumps by -J_u going up
    tm = [(_root(k0**2 * eu - (eu / ez) * kt**2), None, t) for t, eu, _, ez in layers]
    tm = [(b, b / (w * EPS0 * eu), t) for (b, _, t), (_, eu, _, _) in zip(tm, layers)]
    ks = bs * tan / (1j * w * EPS0 * es)
    C = _match(ks, tm, b0 / (w * EPS0), 0)
    g_tm = C * ks
    v_tm = -kt * C * tan / (bs * w * EPS0 * es)

    # TE: F = E_v, G = H_u = (1/(j w mu0)) dE_v/dz; H_u jumps by +J_v going up
    te = [(_root(k0**2 * ev - kt**2), t) for t, _, ev, _ in layers]
    te = [(b, -b / (w * MU0), t) for b, t in te]
    hs = bs / (tan * 1j * w * MU0)
    g_te = _match(hs, te, -b0 / (w * MU0), 1) * -1.0
    return g_tm, g_te, v_tm


def pozar_slab(kx, ky, f, d, eps_r):
    """Closed-form grounded-slab dyad (Gxx, Gxy, Gyy) for a surface current, lossless."""
    k0 = 2 * np.pi * f / C0
    z0 = np.sqrt(MU0 / EPS0)
    b2 = kx * kx + ky * ky
    k1 = _root(eps_r * k0**2 - b2)
    k2 = _root(k0**2 - b2)
    s, c = np.sin(k1 * d), np.cos(k1 * d)
    te = k1 * c + 1j * k2 * s
    tm = eps_r * k2 * c + 1j * k1 * s
    pre = -1j * z0 / k0 * s / (te * tm)
    gxx = pre * ((eps_r * k0**2 - kx**2) * k2 * c + 1j * k1 * (k0**2 - kx**2) * s)
    gyy = pre * ((eps_r * k0**2 - ky**2) * k2 * c + 1j * k1 * (k0**2 - ky**2) * s)
    gxy = pre * (-kx * ky) * (k2 * c + 1j * k1 * s)
    return gxx, gxy, gyy


def numeric_mode_transform(fx, fy, a, b, kx, ky, n=400):
    """Gauss-Legendre quadrature of ``int f(x, y) exp(j(kx x + ky y))`` over the patch."""
    xg, wx = np.polynomial.legendre.leggauss(n)
    x = xg * a / 2
    y = xg * b / 2
    X, Y = np.meshgrid(x, y, indexing="ij")
    W = np.outer(wx, wx) * (a / 2) * (b / 2)
    ph = np.exp(1j * (kx * X + ky * Y))
    return np.sum(W * fx(X, Y) * ph), np.sum(W * fy(X, Y) * ph)


def midpoint_integral(g, lo, hi, n):
    """Reference midpoint rule of a 1-D function."""
    h = (hi - lo) / n
    return h * sum(g(lo + (i + 0.5) * h) for i in range(n))
