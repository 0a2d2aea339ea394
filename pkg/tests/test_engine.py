import numpy as np
import pytest

from waimforge.engine import ScanEngine
from waimforge.greens import UNCOATED, UniaxialLayer, WaimStack
from waimforge.moments import TruncationConfig, active_impedances

TRUNC = TruncationConfig(20, 20, 6)
TH = np.array([0.0, 10.0, 33.0, 58.0, 75.0, 89.0])
PH = np.array([0.0, 90.0, 45.0, 0.0, 20.0, 70.0])


@pytest.fixture(scope="module")
def engine(ex1_array):
    return ScanEngine(ex1_array, [(10e9, TH, PH), (9e9, TH, PH)], TRUNC)


@pytest.mark.parametrize("stack", [
    UNCOATED,
    WaimStack.isotropic([0.00465, 0.0134], [1.04, 3.13]),
    WaimStack.isotropic([0.001, 0.001], [29.3, 23.8]),
    WaimStack((UniaxialLayer(0.004, 2.0, 2.0, 12.0),)),
])
def test_matches_direct_summation(engine, ex1_array, stack):
    for (f, th, ph), z in zip(engine.grids, engine.impedances(stack)):
        ref = active_impedances(th, ph, f, ex1_array, stack, TRUNC)
        assert np.max(np.abs(z - ref) / np.abs(ref)) < 1e-6


def test_in_plane_anisotropy_falls_back(engine, ex1_array):
    stack = WaimStack((UniaxialLayer(0.005, 1.5, 6.0, 3.0),))
    assert not engine.supports(stack)
    z = engine.impedances(stack)[0]
    assert np.array_equal(z, active_impedances(TH, PH, 10e9, ex1_array, stack, TRUNC))


def test_permittivity_above_ceiling_falls_back(engine):
    assert not engine.supports(WaimStack.isotropic([0.001], [45.0]))
    assert engine.supports(WaimStack.isotropic([0.001], [30.0]))
