"""Built-in test fields: Gaussians, Hermite products, windowed coordinates.

Coordinate observables are not integrable, so they are multiplied by a smooth
window that is identically 1 on ``|q|, |p| <= r_flat`` and vanishes beyond
``r_zero``.  Defaults: ``r_flat = 0.75 L`` and ``r_zero = 0.95 L``.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.hermite_e import hermeval

from .core import PhaseField, PhaseGrid

WINDOW_FLAT = 0.75
WINDOW_ZERO = 0.95


def _psi(u):
    return np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)


def smooth_step(x, a, b):
    """C-infinity step: 1 for ``|x| <= a``, 0 for ``|x| >= b``."""
    s = np.clip((np.abs(x) - a) / (b - a), 0.0, 1.0)
    return _psi(1.0 - s) / (_psi(1.0 - s) + _psi(s))


def window(grid: PhaseGrid, flat: float = WINDOW_FLAT, zero: float = WINDOW_ZERO) -> np.ndarray:
    Q, P = grid.mesh()
    a, b = flat * grid.extent, zero * grid.extent
    return smooth_step(Q, a, b) * smooth_step(P, a, b)


def unit(grid: PhaseGrid, **kw) -> PhaseField:
    return PhaseField(grid, window(grid, **kw))


def coordinate_q(grid: PhaseGrid, **kw) -> PhaseField:
    Q, _ = grid.mesh()
    return PhaseField(grid, Q * window(grid, **kw))


def coordinate_p(grid: PhaseGrid, **kw) -> PhaseField:
    _, P = grid.mesh()
    return PhaseField(grid, P * window(grid, **kw))


def linear(grid: PhaseGrid, a, b, **kw) -> PhaseField:
    """Windowed ``a q + b p`` (coefficients may be complex)."""
    Q, P = grid.mesh()
    return PhaseField(grid, (a * Q + b * P) * window(grid, **kw))


def gaussian(grid: PhaseGrid, width: float = 1.0, center=(0.0, 0.0)) -> PhaseField:
    Q, P = grid.mesh()
    q0, p0 = center
    return PhaseField(grid, np.exp(-((Q - q0) ** 2 + (P - p0) ** 2) / (2 * width**2)))


def hermite_function(x, k: int, width: float = 1.0):
    """Unnormalized ``He_k(x/w) exp(-x^2 / 2w^2)``; accepts complex ``x``."""
    c = np.zeros(k + 1)
    c[k] = 1.0
    t = np.asarray(x) / width
    return hermeval(t, c) * np.exp(-t * t / 2)


def hermite(grid: PhaseGrid, kq: int, kp: int = 0, width: float = 1.0) -> PhaseField:
    Q, P = grid.mesh()
    return PhaseField(grid, hermite_function(Q, kq, width) * hermite_function(P, kp, width))


def bump(grid: PhaseGrid, radius: float = 2.0, center=(0.0, 0.0)) -> PhaseField:
    Q, P = grid.mesh()
    r2 = ((Q - center[0]) ** 2 + (P - center[1]) ** 2) / radius**2
    inside = r2 < 1
    out = np.zeros_like(Q)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return PhaseField(grid, out)


NAMED = {
    "gaussian": lambda g: gaussian(g),
    "unit": unit,
    "coordinate-q-windowed": coordinate_q,
    "coordinate-p-windowed": coordinate_p,
    "bump": lambda g: bump(g),
}


def named_field(name: str, grid: PhaseGrid) -> PhaseField:
    """Look up a built-in field; ``hermite-k`` gives ``He_k(q) He_0(p)`` Gaussian-weighted."""
    if name in NAMED:
        return NAMED[name](grid)
    if name.startswith("hermite-"):
        try:
            k = int(name.split("-", 1)[1])
        except ValueError:
            raise ValueError(f"bad hermite order in {name!r}") from None
        if k < 0:
            raise ValueError(f"bad hermite order in {name!r}")
        return hermite(grid, k)
    raise ValueError(f"unknown field {name!r}; choose from {sorted(NAMED)} or hermite-k")
