import numpy as np
import pytest
from scipy.signal import convolve2d

from phasequant import fields, groupoid, rep, starprod
from phasequant.core import PhaseGrid


@pytest.fixture(scope="module")
def grid():
    return PhaseGrid(8.0, 64)


def test_gaussian_oracle(grid):
    for hb in (0.5, 1.0):
        K = groupoid.quantize(fields.gaussian(grid), hb)
        np.testing.assert_allclose(K.samples, groupoid.gaussian_kernel_oracle(grid, hb), atol=1e-12)


def test_round_trip(grid):
    f = fields.hermite(grid, 2, 1) + 0.3j * fields.gaussian(grid, 0.8, (1.0, 0.0))
    for hb in (0.5, 1.0):
        back = groupoid.dequantize(groupoid.quantize(f, hb), hb)
        assert (back - f).sup() < 1e-8


def test_round_trip_fails_when_aliased():
    # h L / (2 hbar) > pi: the transform cannot be inverted on the grid
    g = PhaseGrid(8.0, 64)
    f = fields.gaussian(g)
    back = groupoid.dequantize(groupoid.quantize(f, 0.1), 0.1)
    assert (back - f).sup() > 1e-3


def test_kernel_shape_and_identity(grid):
    K = groupoid.quantize(fields.gaussian(grid), 0.5)
    assert K.samples.shape == (2 * grid.n - 1,) * 2
    assert K.m == grid.n - 1
    assert K.at_identity() == pytest.approx(1.0)
    assert K.trivialization == "geodesic"


def test_involution_matches_conjugate_field(grid):
    f = fields.gaussian(grid, 1.0, (0.5, -0.5)) * (1 + 2j)
    hb = 0.5
    lhs = groupoid.quantize(f, hb).star()
    rhs = groupoid.quantize(f.conj(), hb)
    np.testing.assert_allclose(lhs.samples, rhs.samples, atol=1e-12)


def test_kernel_validation(grid):
    with pytest.raises(ValueError):
        groupoid.PairKernel(grid, np.zeros((4, 4)))
    with pytest.raises(ValueError):
        groupoid.PairKernel(grid, np.zeros((3, 5)))
    K = groupoid.quantize(fields.gaussian(grid), 0.5)
    with pytest.raises(ValueError):
        K + groupoid.quantize(fields.gaussian(PhaseGrid(8.0, 32)), 0.5)
    np.testing.assert_array_equal((2 * K - K).samples, K.samples)


def test_untwisted_is_plain_convolution():
    g = PhaseGrid(4.0, 8)
    rng = np.random.default_rng(1)
    K1 = groupoid.PairKernel(g, rng.normal(size=(15, 15)))
    K2 = groupoid.PairKernel(g, rng.normal(size=(15, 15)))
    out = groupoid.twisted_convolve(K1, K2, 0.5, twist=False)
    ref = convolve2d(K1.samples, K2.samples)[7:22, 7:22] * g.spacing**2 / (4 * np.pi * 0.5)
    np.testing.assert_allclose(out.samples, ref, atol=1e-12)


def test_morphism_small():
    g = PhaseGrid(8.0, 64)
    hb = 1.0
    a, b = fields.gaussian(g), fields.gaussian(g, 1.0, (0.5, -0.3))
    lhs = groupoid.quantize(starprod.moyal_fast(a, b, hb), hb)
    rhs = groupoid.twisted_convolve(groupoid.quantize(a, hb), groupoid.quantize(b, hb), hb)
    assert np.abs(lhs.samples - rhs.samples).max() / np.abs(rhs.samples).max() < 1e-3
    plain = groupoid.twisted_convolve(groupoid.quantize(a, hb), groupoid.quantize(b, hb), hb, twist=False)
    assert np.abs(lhs.samples - plain.samples).max() / np.abs(rhs.samples).max() > 1e-2


def test_unit_acts_as_identity():
    g = PhaseGrid(16.0, 128)
    hb = 0.5
    psi = fields.gaussian(g, 1.0, (0.5, 0.5))
    out = rep.act_kernel(groupoid.quantize(fields.unit(g), hb), psi, hb)
    assert (out.field - psi).interior_sup() < 2e-2


def test_rotate_field():
    g = PhaseGrid(8.0, 64)
    f = fields.gaussian(g, 1.0, (1.0, 0.0))
    r = groupoid.rotate_field(f, np.pi / 2)
    np.testing.assert_allclose(r.samples, fields.gaussian(g, 1.0, (0.0, 1.0)).samples, atol=1e-3)
    back = groupoid.rotate_field(r, -np.pi / 2)
    assert (back - f).sup() < 1e-3
