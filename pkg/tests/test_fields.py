import numpy as np
import pytest

from phasequant import fields
from phasequant.core import PhaseGrid


def test_smooth_step_limits():
    x = np.linspace(-3, 3, 601)
    s = fields.smooth_step(x, 1.0, 2.0)
    assert np.all(s[np.abs(x) <= 1] == 1)
    assert np.all(s[np.abs(x) >= 2] == 0)
    assert np.all(np.diff(s[x >= 0]) <= 0)


def test_window_region():
    g = PhaseGrid(10.0, 100)
    w = fields.window(g)
    Q, P = g.mesh()
    assert np.all(w[(np.abs(Q) <= 7.5) & (np.abs(P) <= 7.5)] == 1)
    assert np.all(w[np.abs(Q) >= 9.5] == 0)


def test_windowed_coordinates_interior():
    g = PhaseGrid(8.0, 64)
    m = g.interior_mask()
    Q, P = g.mesh()
    np.testing.assert_array_equal(fields.coordinate_q(g).samples[m], Q[m])
    np.testing.assert_array_equal(fields.coordinate_p(g).samples[m], P[m])


def test_hermite_function():
    x = np.linspace(-2, 2, 5)
    np.testing.assert_allclose(fields.hermite_function(x, 2), (x**2 - 1) * np.exp(-x**2 / 2))


@pytest.mark.parametrize("name", ["gaussian", "unit", "coordinate-q-windowed",
                                  "coordinate-p-windowed", "bump", "hermite-3"])
def test_named_fields(name):
    g = PhaseGrid(4.0, 16)
    assert fields.named_field(name, g).samples.shape == (16, 16)


@pytest.mark.parametrize("name", ["nope", "hermite-x", "hermite--1"])
def test_named_field_errors(name):
    with pytest.raises(ValueError):
        fields.named_field(name, PhaseGrid(4.0, 16))


def test_bump_support():
    g = PhaseGrid(4.0, 40)
    Q, P = g.mesh()
    b = fields.bump(g, radius=2.0).samples
    assert np.all(b[Q**2 + P**2 >= 4] == 0)
    assert b.real.max() <= 1
