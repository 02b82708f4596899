"""Phase-plane geometry on a uniform grid.

Coordinates are ``(q, p)``.  Grids are cell-centered: sample ``j`` sits at
``-L + (j + 1/2) * h`` with ``h = 2L / n``.  Differences of two grid points
therefore live on the integer lattice ``m * h``; pair kernels are stored there
(see :mod:`phasequant.groupoid`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "PhasePoint",
    "PhaseGrid",
    "PhaseField",
    "QuadratureWeights",
    "check_hbar",
    "symplectic_form",
    "signed_area_triangle",
    "polygon_area",
    "poisson_bracket",
    "integrate",
    "twisted_lattice_sum",
]


class PhasePoint(NamedTuple):
    q: float
    p: float


def check_hbar(hbar) -> float:
    hbar = float(hbar)
    if not np.isfinite(hbar) or hbar <= 0:
        raise ValueError(f"hbar must be a positive finite number, got {hbar!r}")
    return hbar


@dataclass(frozen=True)
class PhaseGrid:
    """Square cell-centered grid covering ``[-extent, extent]**2``."""

    extent: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.extent) and self.extent > 0):
            raise ValueError(f"extent must be positive, got {self.extent!r}")
        if int(self.n) != self.n or self.n <= 0 or self.n % 2:
            raise ValueError(f"n must be a positive even integer, got {self.n!r}")
        object.__setattr__(self, "extent", float(self.extent))
        object.__setattr__(self, "n", int(self.n))

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def axis(self) -> np.ndarray:
        return -self.extent + (np.arange(self.n) + 0.5) * self.spacing

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(Q, P)`` arrays of shape ``(n, n)``; rows index q."""
        x = self.axis
        return np.meshgrid(x, x, indexing="ij")

    def interior_mask(self, fraction: float = 0.5) -> np.ndarray:
        Q, P = self.mesh()
        r = fraction * self.extent
        return (np.abs(Q) <= r) & (np.abs(P) <= r)

    def contains(self, q, p) -> bool:
        return bool(abs(q) <= self.extent and abs(p) <= self.extent)

    def lattice_axis(self, m: int | None = None) -> np.ndarray:
        """Offsets ``k * h`` for ``k = -m..m`` (default ``m = n - 1``)."""
        m = self.n - 1 if m is None else m
        return np.arange(-m, m + 1) * self.spacing


@dataclass(frozen=True, eq=False)
class PhaseField:
    """Complex samples of a function on a :class:`PhaseGrid`."""

    grid: PhaseGrid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"samples must have shape {(self.grid.n, self.grid.n)}, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid: PhaseGrid, func) -> "PhaseField":
        Q, P = grid.mesh()
        return cls(grid, np.broadcast_to(func(Q, P), Q.shape))

    def _other(self, other):
        if isinstance(other, PhaseField):
            require_same_grid(self, other)
            return other.samples
        return other

    def __add__(self, other):
        return PhaseField(self.grid, self.samples + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return PhaseField(self.grid, self.samples - self._other(other))

    def __rsub__(self, other):
        return PhaseField(self.grid, self._other(other) - self.samples)

    def __mul__(self, other):
        return PhaseField(self.grid, self.samples * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return PhaseField(self.grid, self.samples / self._other(other))

    def __neg__(self):
        return PhaseField(self.grid, -self.samples)

    def conj(self) -> "PhaseField":
        return PhaseField(self.grid, self.samples.conj())

    def sup(self, mask: np.ndarray | None = None) -> float:
        a = np.abs(self.samples)
        return float(a[mask].max() if mask is not None else a.max())

    def interior_sup(self, fraction: float = 0.5) -> float:
        return self.sup(self.grid.interior_mask(fraction))


def require_same_grid(*fields) -> PhaseGrid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ValueError(f"grid mismatch: {grid} vs {f.grid}")
    return grid


@dataclass(frozen=True)
class QuadratureWeights:
    """Tensor-product weights; ``midpoint`` is exact for cell-centered grids."""

    rule: str = "midpoint"

    def __post_init__(self):
        if self.rule not in ("midpoint", "trapezoid"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")

    def weights(self, grid: PhaseGrid) -> np.ndarray:
        h = grid.spacing
        w1 = np.full(grid.n, h)
        if self.rule == "trapezoid":
            # piecewise-linear interpolant, linearly extrapolated over the two
            # half-cells between the outer samples and +-L
            w1[[0, -1]] = 9 * h / 8
            w1[[1, -2]] = 7 * h / 8
        return np.outer(w1, w1)


def symplectic_form(u, v):
    """``sigma(u, v) = q_u p_v - p_u q_v`` for points given as ``(q, p)`` pairs."""
    return u[0] * v[1] - u[1] * v[0]


def signed_area_triangle(u, v, z):
    """Signed area of the triangle ``(u, v, z)``.

    Equals ``1/2 * det[[p_z - p_u, p_v - p_u], [q_z - q_u, q_v - q_u]]``;
    arguments broadcast, so whole meshes can be passed.
    """
    qu, pu = u[0], u[1]
    qv, pv = v[0], v[1]
    qz, pz = z[0], z[1]
    return 0.5 * ((pz - pu) * (qv - qu) - (qz - qu) * (pv - pu))


def polygon_area(base, u, v, z):
    """Signed area of the quadrilateral ``(base, u, v, z)`` by fan decomposition."""
    return signed_area_triangle(base, u, v) + signed_area_triangle(base, v, z)


def poisson_bracket(f: PhaseField, g: PhaseField) -> PhaseField:
    """``{f, g} = f_q g_p - f_p g_q`` by central differences (one-sided at edges)."""
    grid = require_same_grid(f, g)
    h = grid.spacing
    fq, fp = np.gradient(f.samples, h, edge_order=1)
    gq, gp = np.gradient(g.samples, h, edge_order=1)
    return PhaseField(grid, fq * gp - fp * gq)


def integrate(f: PhaseField, w: QuadratureWeights | None = None) -> complex:
    """Weighted sum of samples.

    The flattened product is reduced by ``np.sum`` on a contiguous 1-D array,
    which numpy performs pairwise; the order is fixed by the array layout.
    """
    w = QuadratureWeights() if w is None else w
    terms = np.ascontiguousarray((f.samples * w.weights(f.grid)).ravel())
    return complex(np.sum(terms))


def twisted_lattice_sum(A, a_origin, b, b_index, out_index, coords, alpha):
    """Discrete twisted convolution on the integer lattice.

    Computes, for every output lattice point ``(i, k)``::

        out[i, k] = sum_{j, l} A[i - j, k - l] * b[j, l]
                    * exp(1j * alpha * (y_k * x_j - x_i * y_l))

    where lattice index ``m`` has coordinate ``coords(m)`` (the same on both
    axes).  ``A`` is indexed by offset ``m`` at array position ``m + a_origin``;
    offsets outside ``A`` contribute zero.  ``b_index`` / ``out_index`` are
    integer lattice indices of the rows/columns of ``b`` and of the output.

    The inner sum over ``l`` is a 1-D convolution per ``(i, j)`` and is done
    with FFTs; cost is ``O(N_out * N_b * M log M)``.
    """
    from scipy.signal import fftconvolve

    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    b_index = np.asarray(b_index)
    out_index = np.asarray(out_index)
    xb = coords(b_index)
    xo = coords(out_index)
    na = A.shape[0]
    # A column c <-> offset c - a_origin; b column l <-> index b_index[l]
    # full-convolution position t = c + l  <->  offset + index = (c - a_origin) + b_index[0] + l
    shift = b_index[0] - a_origin
    t_out = out_index - shift
    ncols = A.shape[1] + b.shape[1] - 1
    valid_t = (t_out >= 0) & (t_out < ncols)
    out = np.zeros((out_index.size, out_index.size), dtype=complex)
    mod_out = np.exp(1j * alpha * np.outer(xo, xb))  # [k, j] -> exp(i a y_k x_j)
    for i, (oi, xi) in enumerate(zip(out_index, xo)):
        rows = oi - b_index + a_origin
        ok = (rows >= 0) & (rows < na)
        if not ok.any():
            continue
        bmod = b[ok] * np.exp(-1j * alpha * xi * xb)[None, :]
        conv = fftconvolve(A[rows[ok]], bmod, mode="full", axes=1)
        sub = np.zeros((ok.sum(), out_index.size), dtype=complex)
        sub[:, valid_t] = conv[:, t_out[valid_t]]
        out[i] = np.einsum("jk,kj->k", sub, mod_out[:, ok])
    return out
