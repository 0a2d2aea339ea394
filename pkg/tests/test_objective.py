import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import midpoint_integral
from waimforge.errors import ValidationError
from waimforge.greens import UNCOATED, WaimStack
from waimforge.moments import TruncationConfig
from waimforge.objective import (FeasibilitySets, Problem, ScanSpec, blind_spots, dip_location, feasibility_check,
                                 quadrature, scan_grid, tolerance_sweep, worst_cut_threshold)

small = st.integers(1, 12)


@settings(max_examples=30)
@given(small, small)
def test_quadrature_integrates_like_reference_midpoint(nt, nph):
    spec = ScanSpec(0, 90, 0, 90, 10e9, 10e9, nt, nph, 1)
    g = quadrature(spec)
    w = g.angular_weights()
    fn = lambda t, p: np.cos(np.radians(t)) ** 2 * (1 + np.sin(np.radians(p)))  # noqa: E731
    val = np.sum(w * fn(g.thetas[:, None], g.phis[None, :]))
    ref_t = midpoint_integral(lambda t: np.cos(t) ** 2, 0, np.pi / 2, nt)
    ref_p = midpoint_integral(lambda p: 1 + np.sin(p), 0, np.pi / 2, nph)
    assert val == pytest.approx(ref_t * ref_p, rel=1e-12)


def test_quadrature_converges_to_exact_integral():
    g = quadrature(ScanSpec(0, 90, 0, 90, n_theta=200, n_phi=200))
    w = g.angular_weights(solid_angle=True)
    # solid angle of an octant-quarter: int_0^{pi/2} sin t dt * pi/2
    assert w.sum() == pytest.approx(np.pi / 2, rel=1e-4)


def test_grid_layout_and_weights():
    spec = ScanSpec(0, 90, 0, 90, 9e9, 11e9, 30, 30, 5)
    pts = scan_grid(spec)
    assert len(pts) == 30 * 30 * 5
    assert pts[0][0].theta == 1.5 and pts[0][0].f == pytest.approx(9.2e9)
    assert sum(w for _, w in pts) == pytest.approx((np.pi / 2) ** 2 * 2e9)


def test_degenerate_frequency_axis_has_unit_weight():
    g = quadrature(ScanSpec())
    assert g.freqs.tolist() == [10e9] and g.w_freq.tolist() == [1.0]


@pytest.mark.parametrize("kw", [dict(theta_max=95), dict(n_theta=0), dict(f_min=-1.0), dict(phi_min=90, phi_max=0),
                                dict(f_min=10e9, f_max=10e9, n_freq=3)])
def test_bad_scan_specs(kw):
    with pytest.raises(ValidationError):
        ScanSpec(**kw).validate()


def test_feasibility_reports_each_violation():
    stack = WaimStack.isotropic([0.02, 0.001], [0.5, 31.0])
    ok, bad = feasibility_check(stack, FeasibilitySets(), ScanSpec())
    assert not ok and len(bad) == 1 + 3 + 3
    assert any("layer 1: t=" in b for b in bad)
    ok, bad = feasibility_check(WaimStack.isotropic([0.0, 0.0149], [1.0, 30.0]), FeasibilitySets(), ScanSpec())
    assert ok and bad == []


def test_default_thickness_bound_is_half_wavelength():
    lo, hi = FeasibilitySets().thickness_bounds(ScanSpec(f_min=9e9, f_max=11e9, n_freq=3))
    assert lo == 0 and hi == pytest.approx(0.5 * 299792458 / 11e9)


def test_physical_floor():
    assert "eps_min below physical floor 1" in FeasibilitySets(eps_min=0.5).problems()


def test_worst_cut_threshold():
    th = np.array([5.0, 15.0, 25.0, 35.0])
    atc = np.array([[1.0, 0.99], [0.95, 0.91], [0.92, 0.85], [0.95, 0.95]])
    assert worst_cut_threshold(th, atc) == 20.0
    assert worst_cut_threshold(th, np.ones((4, 2))) == 35.0
    assert worst_cut_threshold(th, np.zeros((4, 2))) == 0.0
    assert dip_location(th, atc[:, 1]) == 25.0


@pytest.fixture(scope="module")
def tiny(ex1):
    spec = ScanSpec(0, 90, 0, 90, 10e9, 10e9, 6, 4, 1)
    return Problem(ex1.array, spec, TruncationConfig(8, 8, 6))


def test_uncoated_cost_is_reference(tiny):
    r = tiny.cost(UNCOATED)
    assert r.Psi_norm == 1.0 and r.delta_psi == 0.0


def test_invisible_stack_cost(tiny):
    r = tiny.cost(WaimStack.isotropic([0.004, 0.009], [1.0, 1.0]))
    assert r.delta_psi == 0.0


def test_fast_and_exact_paths_agree(tiny, ex1):
    stack = ex1.waim.design
    exact = dataclasses.replace(tiny, fast=False)
    assert tiny.cost(stack).Psi == pytest.approx(exact.cost(stack).Psi, rel=1e-6)


def test_cuts_shape(tiny, ex1):
    cuts = tiny.cuts(ex1.waim.design, [0.0, 90.0], np.array([10.0, 50.0, 80.0]))
    assert set(cuts) == {0.0, 90.0}
    th, atc, z = cuts[0.0]
    assert th.shape == atc.shape == z.shape == (3,)


def test_tolerance_sweep_variants(tiny, ex1):
    out = tolerance_sweep(tiny, ex1.waim.design, 0.1, phis=[0.0], cut_thetas=np.array([30.0]))
    assert [v.label for v in out] == ["nominal", "t++", "t+-", "t-+", "t--"]
    assert out[0].factors == (1.0, 1.0) and out[1].factors == (1.1, 1.1)
    assert all(v.report is not None for v in out)


def test_sweep_flags_infeasible_variant(tiny):
    stack = WaimStack.isotropic([0.0149, 0.001], [2.0, 3.0])
    out = tolerance_sweep(tiny, stack, 0.1, phis=[0.0], cut_thetas=np.array([30.0]))
    assert out[0].feasible and not out[1].feasible
    assert out[1].report is not None


def test_sweep_rejects_bad_fraction(tiny, ex1):
    with pytest.raises(ValidationError):
        tolerance_sweep(tiny, ex1.waim.design, 1.5)


def test_blind_spots_ignore_shallow_ripple_and_edges():
    th = np.linspace(0, 90, 181)
    atc = 1 - 0.6 * np.exp(-((th - 64.5) / 2) ** 2) + 0.01 * np.sin(th)
    atc[-1] = 0.0  # monotone fall at the edge is not a dip
    assert blind_spots(th, atc).tolist() == [64.5]
    assert blind_spots(th, 1 + 0.01 * np.sin(th)).size == 0
