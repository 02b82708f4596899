"""Quantization into kernels on the pair groupoid of the plane.

A kernel ``K(u, v)`` that is polarized along the groupoid's difference map
depends only on ``v - u``; it is stored over the difference lattice
``Delta = (a h, b h)``, ``|a|, |b| <= m``, which contains every difference of
two grid points when ``m = n - 1``.  The base-point phase of the geodesic
trivialization is applied by :mod:`phasequant.rep`, not here.

Conventions (``alpha = 1 / 2 hbar``, ``sigma(x, y) = q_x p_y - p_x q_y``)::

    Q_f(Delta)      = (4 pi hbar)^-1 int f(z) exp(i alpha sigma(Delta, z)) dz
    f(z)            = (4 pi hbar)^-1 int Q_f(Delta) exp(-i alpha sigma(Delta, z)) dDelta
    (K1 * K2)(Delta) = (4 pi hbar)^-1 int K1(Delta - eta) K2(eta) exp(i alpha sigma(eta, Delta)) deta

``sigma(Delta, z) = p (Delta q) - q (Delta p)`` for ``z = (q, p)``.  The
integrality condition on the groupoid is vacuous here: the plane carries no
non-trivial 2-spheres.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PhaseField, PhaseGrid, check_hbar, twisted_lattice_sum

TRIVIALIZATION = "geodesic"


@dataclass(frozen=True, eq=False)
class PairKernel:
    grid: PhaseGrid
    samples: np.ndarray = field(repr=False)
    trivialization: str = TRIVIALIZATION

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2 == 0:
            raise ValueError(f"kernel samples must be a square odd-sized array, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("kernel samples must be finite")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def m(self) -> int:
        return (self.samples.shape[0] - 1) // 2

    @property
    def axis(self) -> np.ndarray:
        return self.grid.lattice_axis(self.m)

    def mesh(self):
        d = self.axis
        return np.meshgrid(d, d, indexing="ij")

    def _other(self, other):
        if isinstance(other, PairKernel):
            if other.grid != self.grid or other.m != self.m:
                raise ValueError("kernel grid mismatch")
            return other.samples
        return other

    def __add__(self, other):
        return PairKernel(self.grid, self.samples + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return PairKernel(self.grid, self.samples - self._other(other))

    def __mul__(self, other):
        return PairKernel(self.grid, self.samples * self._other(other))

    __rmul__ = __mul__

    def star(self) -> "PairKernel":
        """Groupoid involution ``K*(Delta) = conj(K(-Delta))``."""
        return PairKernel(self.grid, self.samples[::-1, ::-1].conj())

    def at_identity(self) -> complex:
        return complex(self.samples[self.m, self.m])

    def sup(self) -> float:
        return float(np.abs(self.samples).max())


def _transform_mats(grid: PhaseGrid, m: int, hbar: float):
    alpha = 1.0 / (2.0 * hbar)
    x = grid.axis
    d = grid.lattice_axis(m)
    E1 = np.exp(1j * alpha * np.outer(d, x))    # [Delta_q, p]
    E2 = np.exp(-1j * alpha * np.outer(x, d))   # [q, Delta_p]
    return E1, E2


def quantize(f: PhaseField, hbar: float, m: int | None = None) -> PairKernel:
    """Symplectic Fourier transform of ``f`` onto the difference lattice."""
    hbar = check_hbar(hbar)
    grid = f.grid
    m = grid.n - 1 if m is None else int(m)
    E1, E2 = _transform_mats(grid, m, hbar)
    c = grid.spacing**2 / (4 * np.pi * hbar)
    return PairKernel(grid, c * (E1 @ (f.samples.T @ E2)))


def dequantize(K: PairKernel, hbar: float) -> PhaseField:
    """Inverse of :func:`quantize`, sampled back on the phase grid."""
    hbar = check_hbar(hbar)
    grid = K.grid
    E1, E2 = _transform_mats(grid, K.m, hbar)
    c = grid.spacing**2 / (4 * np.pi * hbar)
    return PhaseField(grid, c * (E2.conj() @ (K.samples.T @ E1.conj())))


def twisted_convolve(K1: PairKernel, K2: PairKernel, hbar: float, twist: bool = True) -> PairKernel:
    """Convolution of kernels twisted by the area cocycle.

    ``twist=False`` drops the cocycle phase, leaving an ordinary convolution.
    """
    hbar = check_hbar(hbar)
    if K1.grid != K2.grid or K1.m != K2.m:
        raise ValueError("kernel grid mismatch")
    grid, m = K1.grid, K1.m
    idx = np.arange(-m, m + 1)
    h = grid.spacing
    alpha = 1.0 / (2.0 * hbar) if twist else 0.0
    out = twisted_lattice_sum(K1.samples, m, K2.samples, idx, idx, lambda k: k * h, alpha)
    return PairKernel(grid, out * h**2 / (4 * np.pi * hbar))


def gaussian_kernel_oracle(grid: PhaseGrid, hbar: float, m: int | None = None) -> np.ndarray:
    """Closed form of ``quantize(exp(-(q^2+p^2)/2))``: ``(2 hbar)^-1 exp(-|Delta|^2 / 8 hbar^2)``."""
    m = grid.n - 1 if m is None else m
    d = grid.lattice_axis(m)
    DQ, DP = np.meshgrid(d, d, indexing="ij")
    return np.exp(-(DQ**2 + DP**2) / (8 * hbar**2)) / (2 * hbar)


def rotate_field(f: PhaseField, angle: float) -> PhaseField:
    """``f o R^-1`` for ``R`` the rotation by ``angle``, by spline resampling."""
    from scipy.ndimage import map_coordinates

    grid = f.grid
    Q, P = grid.mesh()
    c, s = np.cos(angle), np.sin(angle)
    q0 = c * Q + s * P
    p0 = -s * Q + c * P
    h, L = grid.spacing, grid.extent
    coords = [(q0 + L) / h - 0.5, (p0 + L) / h - 0.5]
    re = map_coordinates(f.samples.real, coords, order=5, mode="constant")
    im = map_coordinates(f.samples.imag, coords, order=5, mode="constant")
    return PhaseField(grid, re + 1j * im)

