"""Non-perturbative Moyal product on the phase plane.

The product implemented is the oscillatory integral

    (f * g)(u) = (4 pi hbar)^-2  int f(v) g(z) exp(i/hbar * area(u, v, z)) dv dz

with ``area`` the signed triangle area.  Expanding it gives
``f*g = fg + 2 i hbar {f, g} + O(hbar^2)``: this kernel is the Weyl-Moyal
product at effective Planck constant ``HBAR_EFF_FACTOR * hbar = 4 hbar``, so
``q*p - p*q = 4 i hbar``.

Three evaluation routes:

* :func:`moyal_direct` -- the 4-D quadrature itself at chosen targets;
* :func:`moyal_fast` -- Weyl symbol -> integral kernel, matrix product, back;
* :func:`moyal_series` -- truncated bidifferential expansion.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from scipy.ndimage import correlate1d
from scipy.signal import resample

from .core import PhaseField, PhaseGrid, check_hbar, require_same_grid

HBAR_EFF_FACTOR = 4.0
MAX_SERIES_ORDER = 8
DIRECT_FULL_GRID_MAX_N = 32


def hbar_eff(hbar: float) -> float:
    return HBAR_EFF_FACTOR * check_hbar(hbar)


@dataclass(frozen=True)
class EvaluationSet:
    """Target points for the O(n^3)-per-point quadrature routes."""

    points: tuple

    def __post_init__(self):
        pts = tuple((float(q), float(p)) for q, p in self.points)
        if not pts:
            raise ValueError("EvaluationSet needs at least one point")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def check_inside(self, grid: PhaseGrid):
        for q, p in self.points:
            if not grid.contains(q, p):
                raise ValueError(f"target ({q}, {p}) lies outside the grid extent {grid.extent}")

    @classmethod
    def full_grid(cls, grid: PhaseGrid) -> "EvaluationSet":
        if grid.n > DIRECT_FULL_GRID_MAX_N:
            raise ValueError(
                f"full-grid direct evaluation is limited to n <= {DIRECT_FULL_GRID_MAX_N}")
        Q, P = grid.mesh()
        return cls(tuple(zip(Q.ravel(), P.ravel())))

    @classmethod
    def random_interior(cls, grid: PhaseGrid, count: int, seed: int = 0,
                        fraction: float = 0.5) -> "EvaluationSet":
        rng = np.random.default_rng(seed)
        r = fraction * grid.extent
        return cls(tuple(map(tuple, rng.uniform(-r, r, size=(count, 2)))))


def triangle_quadrature(f: PhaseField, g: PhaseField, hbar: float, targets) -> np.ndarray:
    """``(4 pi hbar)^-2 sum f(v) g(z) exp(i/hbar area(u,v,z)) h^4`` at each target ``u``.

    The phase factorizes as ``exp(ic (p_z-p)(q_v-q)) * exp(-ic (q_z-q)(p_v-p))``
    with ``c = 1/(2 hbar)``, so the quadruple sum is evaluated as two matrix
    products and one elementwise reduction per target.  The terms are the
    same; only the summation order differs from the naive loop.
    """
    grid = require_same_grid(f, g)
    hbar = check_hbar(hbar)
    x = grid.axis
    h = grid.spacing
    c = 1.0 / (2.0 * hbar)
    F, G = f.samples, g.samples
    out = np.empty(len(targets), dtype=complex)
    for t, (q, p) in enumerate(targets):
        A = np.exp(1j * c * np.outer(x - q, x - p))   # [q_v, p_z]
        M = np.conj(A).T @ G                          # [p_v, p_z], summed over q_z
        N = F @ M                                     # [q_v, p_z], summed over p_v
        out[t] = np.sum(A * N)
    return out * h**4 / (4 * np.pi * hbar) ** 2


def moyal_direct(f: PhaseField, g: PhaseField, hbar: float, targets) -> np.ndarray:
    """Star product by direct oscillatory quadrature at ``targets``."""
    grid = require_same_grid(f, g)
    targets = targets if isinstance(targets, EvaluationSet) else EvaluationSet(targets)
    targets.check_inside(grid)
    return triangle_quadrature(f, g, hbar, targets)


class _KernelRoute:
    """Weyl symbol <-> integral kernel on an operator grid of spacing ``h / r``.

    The symbol at ``hbar_e`` maps to ``K(x, y) = (2 pi hbar_e)^-1 int
    f((x+y)/2, p) exp(i p (x-y)/hbar_e) dp``.  Midpoints ``(x+y)/2`` fall on a
    grid of spacing ``h / 2r``; the symbol is band-limited-interpolated there.
    Separations are cut at ``pi hbar_e / h``, beyond which a symbol sampled at
    momentum spacing ``h`` carries no information.
    """

    def __init__(self, grid: PhaseGrid, hbar_e: float):
        self.grid = grid
        self.he = hbar_e
        n, L, h = grid.n, grid.extent, grid.spacing
        # the back-transform samples separations with step 2d; its momentum
        # period pi*hbar_e/d must cover the grid's 2L
        self.r = max(1, int(np.ceil(2 * L * h / (np.pi * hbar_e))))
        self.d = h / self.r
        self.N = (n - 1) * self.r + 1
        self.s = self.d * np.arange(-(self.N - 1), self.N)
        smax = min(np.pi * hbar_e / h, 2 * L)
        self.E = np.exp(1j * np.outer(grid.axis, self.s) / hbar_e) * (h / (2 * np.pi * hbar_e))
        self.E[:, np.abs(self.s) > smax + 1e-12] = 0.0
        j = np.arange(self.N)
        self.mid = j[:, None] + j[None, :]
        self.sep = j[:, None] - j[None, :] + self.N - 1

    def kernel(self, f: PhaseField) -> np.ndarray:
        F = resample(f.samples, 2 * self.r * self.grid.n, axis=0)
        W = F[: 2 * self.N - 1] @ self.E
        return W[self.mid, self.sep]

    def symbol(self, K: np.ndarray) -> np.ndarray:
        n, r, d, N = self.grid.n, self.r, self.d, self.N
        x = self.grid.axis
        out = np.empty((n, n), dtype=complex)
        for i in range(n):
            m = 2 * r * i
            j = np.arange(max(0, m - (N - 1)), min(N - 1, m) + 1)
            k = m - j
            s = d * (j - k)
            out[i] = np.exp(-1j * np.outer(x, s) / self.he) @ K[j, k] * (2 * d)
        return out


def moyal_fast(f: PhaseField, g: PhaseField, hbar: float) -> PhaseField:
    """Full-grid star product through the operator-kernel route."""
    grid = require_same_grid(f, g)
    route = _KernelRoute(grid, hbar_eff(hbar))
    K = route.kernel(f) @ route.kernel(g) * route.d
    return PhaseField(grid, route.symbol(K))


def _stencil(order: int, half_width: int) -> np.ndarray:
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    V = np.vander(offsets, increasing=True).T
    rhs = np.zeros(offsets.size)
    rhs[order] = factorial(order)
    return np.linalg.solve(V, rhs)


def derivative(samples: np.ndarray, h: float, order: int, axis: int) -> np.ndarray:
    """Central finite difference of the given order, ~8th-order accurate.

    Zero padding at the boundary: fields are assumed to vanish there.
    """
    if order == 0:
        return samples
    w = _stencil(order, (order + 1) // 2 + 4) / h**order
    re = correlate1d(samples.real, w, axis=axis, mode="constant")
    im = correlate1d(samples.imag, w, axis=axis, mode="constant")
    return re + 1j * im


def bidifferential(f: PhaseField, g: PhaseField, k: int) -> PhaseField:
    """``B_k(f, g) = sum_j C(k,j) (-1)^j d_q^{k-j} d_p^j f * d_p^{k-j} d_q^j g``.

    ``B_1`` is the Poisson bracket ``f_q g_p - f_p g_q``.
    """
    grid = require_same_grid(f, g)
    h = grid.spacing
    if k == 0:
        return f * g
    total = np.zeros((grid.n, grid.n), dtype=complex)
    for j in range(k + 1):
        df = derivative(derivative(f.samples, h, k - j, 0), h, j, 1)
        dg = derivative(derivative(g.samples, h, j, 0), h, k - j, 1)
        total += comb(k, j) * (-1) ** j * df * dg
    return PhaseField(grid, total)


def moyal_series(f: PhaseField, g: PhaseField, hbar: float, order: int) -> PhaseField:
    """Truncated expansion ``sum_{k<=order} (i hbar_e/2)^k / k! B_k(f, g)``."""
    require_same_grid(f, g)
    if int(order) != order or order < 0:
        raise ValueError(f"order must be a non-negative integer, got {order!r}")
    if order > MAX_SERIES_ORDER:
        raise ValueError(f"series order {order} exceeds the stencil bound {MAX_SERIES_ORDER}")
    lam = 0.5j * hbar_eff(hbar)
    out = f * g
    for k in range(1, int(order) + 1):
        out = out + bidifferential(f, g, k) * (lam**k / factorial(k))
    return out


@dataclass
class HbarScan:
    hbars: np.ndarray
    errors: np.ndarray
    slope: float
    order: int

    def rows(self):
        return [{"hbar": float(h), "error": float(e)} for h, e in zip(self.hbars, self.errors)]


def fit_slope(hbars, errors) -> float:
    return float(np.polyfit(np.log(hbars), np.log(errors), 1)[0])


def hbar_scan(f: PhaseField, g: PhaseField, hbars, order: int,
              interior: float = 0.5) -> HbarScan:
    """Interior sup-norm of ``moyal_fast - moyal_series(order)`` over a decreasing hbar list."""
    hbars = np.asarray(hbars, dtype=float)
    if hbars.size < 4:
        raise ValueError("an hbar scan needs at least 4 values")
    if np.any(np.diff(hbars) >= 0):
        raise ValueError("hbar values must be strictly decreasing")
    mask = f.grid.interior_mask(interior)
    errs = np.array([
        (moyal_fast(f, g, hb) - moyal_series(f, g, hb, order)).sup(mask) for hb in hbars])
    return HbarScan(hbars, errs, fit_slope(hbars, errs), int(order))
