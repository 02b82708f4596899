import numpy as np
import pytest

from phasequant import fields
from phasequant.core import (PhaseField, PhaseGrid, QuadratureWeights, check_hbar, integrate,
                             poisson_bracket, polygon_area, signed_area_triangle, symplectic_form,
                             twisted_lattice_sum)


def test_grid_is_cell_centered():
    g = PhaseGrid(2.0, 4)
    assert g.spacing == 1.0
    np.testing.assert_allclose(g.axis, [-1.5, -0.5, 0.5, 1.5])
    np.testing.assert_allclose(g.lattice_axis(), np.arange(-3, 4))
    Q, P = g.mesh()
    assert Q[1, 0] == -0.5 and P[0, 1] == -0.5


@pytest.mark.parametrize("extent,n", [(0, 4), (-1, 4), (1, 3), (1, 0), (np.inf, 4)])
def test_grid_rejects_bad_parameters(extent, n):
    with pytest.raises(ValueError):
        PhaseGrid(extent, n)


@pytest.mark.parametrize("h", [0, -1, np.nan, np.inf])
def test_check_hbar(h):
    with pytest.raises(ValueError):
        check_hbar(h)


def test_field_is_immutable_and_checked():
    g = PhaseGrid(1.0, 4)
    a = np.ones((4, 4))
    f = PhaseField(g, a)
    a[0, 0] = 5
    assert f.samples[0, 0] == 1
    with pytest.raises(ValueError):
        f.samples[0, 0] = 2
    with pytest.raises(ValueError):
        PhaseField(g, np.ones((3, 4)))
    with pytest.raises(ValueError):
        PhaseField(g, np.full((4, 4), np.nan))


def test_field_arithmetic():
    g = PhaseGrid(1.0, 4)
    f = PhaseField.from_function(g, lambda q, p: q + 1j * p)
    h = (2 * f - f) * 1.0 / 1.0 + 0
    np.testing.assert_array_equal(h.samples, f.samples)
    np.testing.assert_array_equal((-f).conj().samples, -f.samples.conj())
    with pytest.raises(ValueError):
        f + PhaseField(PhaseGrid(2.0, 4), np.zeros((4, 4)))


def test_gaussian_integral():
    g = PhaseGrid(8.0, 64)
    f = fields.gaussian(g)
    assert abs(integrate(f) - 2 * np.pi) < 1e-12
    assert abs(integrate(f, QuadratureWeights("trapezoid")) - 2 * np.pi) < 1e-12


def test_quadrature_weights_total():
    g = PhaseGrid(3.0, 10)
    for rule in ("midpoint", "trapezoid"):
        assert QuadratureWeights(rule).weights(g).sum() == pytest.approx(36.0)
    with pytest.raises(ValueError):
        QuadratureWeights("simpson")


def test_trapezoid_exact_for_linear():
    g = PhaseGrid(2.0, 8)
    f = PhaseField.from_function(g, lambda q, p: 1 + q + 2 * p)
    assert integrate(f, QuadratureWeights("trapezoid")) == pytest.approx(16.0)


def test_areas():
    assert signed_area_triangle((0, 0), (1, 0), (0, 1)) == pytest.approx(0.5)
    assert symplectic_form((1, 0), (0, 1)) == 1
    # counter-clockwise unit square
    assert polygon_area((0, 0), (1, 0), (1, 1), (0, 1)) == pytest.approx(1.0)


def test_poisson_bracket_of_coordinates():
    g = PhaseGrid(4.0, 32)
    Q, P = g.mesh()
    pb = poisson_bracket(PhaseField(g, Q), PhaseField(g, P))
    np.testing.assert_allclose(pb.samples, 1.0)


def test_twisted_lattice_sum_matches_brute_force():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    bi = np.arange(-1, 3)
    oi = np.arange(-2, 3)
    coords = lambda k: 0.3 * k  # noqa: E731
    alpha = 0.7
    out = twisted_lattice_sum(A, 3, b, bi, oi, coords, alpha)
    ref = np.zeros((oi.size, oi.size), complex)
    for i, I in enumerate(oi):
        for k, K in enumerate(oi):
            for j, J in enumerate(bi):
                for l, L in enumerate(bi):
                    r, c = I - J + 3, K - L + 3
                    if 0 <= r < 7 and 0 <= c < 7:
                        ref[i, k] += A[r, c] * b[j, l] * np.exp(1j * alpha * (coords(K) * coords(J) - coords(I) * coords(L)))
    np.testing.assert_allclose(out, ref, atol=1e-12)
