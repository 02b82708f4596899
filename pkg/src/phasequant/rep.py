"""Prequantum sections, the kernel representation and polarized states.

Sections are functions on the plane in the trivialization by geodesics from
the origin; the connection there is ``(p dq - q dp) / 2`` and parallel
transport from ``u0`` to ``u`` multiplies by ``exp(i/2hbar (p q0 - q p0))``.

A section is polarized for ``(a, b, c, d)`` with ``ad - bc = 1`` when it has
the form ``exp(i/2hbar (aq+bp)(cq+dp)) psi(cq+dp)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline, make_lsq_spline

from .core import PhaseField, PhaseGrid, check_hbar, require_same_grid, twisted_lattice_sum
from .fields import linear
from .groupoid import PairKernel
from .starprod import EvaluationSet, triangle_quadrature

DET_TOL = 1e-12


@dataclass(frozen=True)
class Polarization:
    a: complex
    b: complex
    c: complex
    d: complex
    name: str = "custom"

    def __post_init__(self):
        for k in "abcd":
            object.__setattr__(self, k, complex(getattr(self, k)))
        if self.c == 0 and self.d == 0:
            raise ValueError("polarization needs (c, d) != (0, 0)")
        if abs(self.det - 1) > DET_TOL:
            raise ValueError(f"polarization determinant ad - bc = {self.det} != 1")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def is_real(self) -> bool:
        return all(abs(getattr(self, k).imag) == 0 for k in "abcd")

    def coordinate(self, Q, P):
        """``(aq + bp, cq + dp)``."""
        return self.a * Q + self.b * P, self.c * Q + self.d * P

    def phase(self, Q, P, hbar):
        x, s = self.coordinate(Q, P)
        return np.exp(0.5j / hbar * x * s)

    @classmethod
    def position(cls):
        return cls(0, -1, 1, 0, "position")

    @classmethod
    def momentum(cls):
        return cls(1, 0, 0, 1, "momentum")

    @classmethod
    def bargmann(cls):
        # cq + dp = p + iq; this (a, b) turns the phase into exp(-|p+iq|^2 / 4hbar)
        return cls(0.5, 0.5j, 1j, 1, "bargmann")

    @classmethod
    def real(cls, c: float, d: float, name: str = "real"):
        """A real polarization with the given ``(c, d)``; ``(a, b)`` chosen orthogonal."""
        n2 = c * c + d * d
        return cls(d / n2, -c / n2, c, d, name)

    @classmethod
    def preset(cls, name: str):
        try:
            return {"position": cls.position, "momentum": cls.momentum,
                    "bargmann": cls.bargmann}[name]()
        except KeyError:
            raise ValueError(f"unknown polarization preset {name!r}") from None


@dataclass(frozen=True, eq=False)
class Profile1D:
    """A one-variable profile ``psi``.

    ``x`` / ``samples`` tabulate it on a real grid; ``func``, when present,
    evaluates it exactly (and at complex arguments).  Without ``func`` the
    samples are interpolated by a cubic spline and continued by zero.
    """

    x: np.ndarray
    samples: np.ndarray
    func: Callable | None = field(default=None, repr=False)

    @classmethod
    def from_function(cls, func, extent: float, m: int = 513):
        x = np.linspace(-extent, extent, m)
        return cls(x, np.asarray(func(x), dtype=complex), func)

    @classmethod
    def from_samples(cls, x, samples):
        x = np.asarray(x, dtype=float)
        samples = np.asarray(samples, dtype=complex)
        spline = CubicSpline(x, samples)
        lo, hi = x[0], x[-1]

        def func(s):
            s = np.asarray(s)
            if np.iscomplexobj(s):
                if np.any(np.abs(s.imag) > 0):
                    raise ValueError("a tabulated profile cannot be evaluated off the real axis")
                s = s.real
            inside = (s >= lo) & (s <= hi)
            return np.where(inside, spline(np.clip(s, lo, hi)), 0.0)

        return cls(x, samples, func)

    def __call__(self, s):
        return self.func(s)

    def derivative(self, s, step: float = 1e-3):
        s = np.asarray(s)
        f = self.func
        return (f(s - 2 * step) - 8 * f(s - step) + 8 * f(s + step) - f(s + 2 * step)) / (12 * step)


def profile_extent(grid: PhaseGrid) -> float:
    return grid.extent * np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class Section:
    """Grid samples of a section, plus its polarized form when known."""

    field: PhaseField
    polarization: Polarization | None = None
    profile: Profile1D | None = None
    hbar: float | None = None

    @property
    def grid(self) -> PhaseGrid:
        return self.field.grid

    @property
    def samples(self) -> np.ndarray:
        return self.field.samples

    @property
    def has_form(self) -> bool:
        return self.profile is not None and self.polarization is not None

    def evaluate(self, Q, P):
        if not self.has_form:
            raise ValueError("section has no polarized form; it can only be used on its grid")
        _, s = self.polarization.coordinate(Q, P)
        return self.polarization.phase(Q, P, self.hbar) * self.profile(s)


def as_section(x) -> Section:
    return x if isinstance(x, Section) else Section(x)


def transport_phase(frm, to, hbar):
    """Parallel transport ``frm -> to`` along the straight segment."""
    hbar = check_hbar(hbar)
    return np.exp(0.5j / hbar * (to[1] * frm[0] - to[0] * frm[1]))


def act_kernel(K: PairKernel, psi, hbar: float) -> Section:
    """``(K psi)(u) = (4 pi hbar)^-1 int K(u - u0) T(u0 -> u) psi(u0) du0``."""
    hbar = check_hbar(hbar)
    psi = as_section(psi)
    grid = psi.grid
    if K.grid != grid:
        raise ValueError(f"grid mismatch: {K.grid} vs {grid}")
    n, h = grid.n, grid.spacing
    idx = np.arange(n)
    coords = lambda j: (j - (n - 1) / 2) * h  # noqa: E731
    out = twisted_lattice_sum(K.samples, K.m, psi.samples, idx, idx, coords, 0.5 / hbar)
    return Section(PhaseField(grid, out * h**2 / (4 * np.pi * hbar)), psi.polarization, None, hbar)


def act_triangle(f: PhaseField, psi, hbar: float, targets) -> np.ndarray:
    """Triangle-kernel form of the action, evaluated at ``targets`` only."""
    psi = as_section(psi)
    grid = require_same_grid(f, psi.field)
    targets = targets if isinstance(targets, EvaluationSet) else EvaluationSet(targets)
    targets.check_inside(grid)
    return triangle_quadrature(f, psi.field, hbar, targets)


def act_polarized(f: PhaseField, psi: Section, hbar: float) -> Section:
    """``(4 pi hbar)^-1 int f(u') psi(u' - u) exp(i/2hbar (q p' - p q')) du'``.

    Needs ``psi`` off the grid (at all differences of grid points), so the
    section must carry its polarized form.
    """
    hbar = check_hbar(hbar)
    grid = require_same_grid(f, psi.field)
    n, h = grid.n, grid.spacing
    d = grid.lattice_axis(n - 1)
    DQ, DP = np.meshgrid(d, d, indexing="ij")
    reflected = psi.evaluate(-DQ, -DP)
    idx = np.arange(n)
    coords = lambda j: (j - (n - 1) / 2) * h  # noqa: E731
    out = twisted_lattice_sum(reflected, n - 1, f.samples, idx, idx, coords, -0.5 / hbar)
    return Section(PhaseField(grid, out * h**2 / (4 * np.pi * hbar)), psi.polarization, None, hbar)


def make_polarized(pol: Polarization, psi, hbar: float, grid: PhaseGrid) -> Section:
    """Sample ``exp(i/2hbar (aq+bp)(cq+dp)) psi(cq+dp)`` on ``grid``.

    ``psi`` is a :class:`Profile1D` or a vectorized callable.
    """
    hbar = check_hbar(hbar)
    if not isinstance(pol, Polarization):
        raise TypeError("pol must be a Polarization")
    if not isinstance(psi, Profile1D):
        psi = Profile1D.from_function(psi, profile_extent(grid))
    sec = Section(PhaseField(grid, np.zeros((grid.n, grid.n))), pol, psi, hbar)
    Q, P = grid.mesh()
    return Section(PhaseField(grid, sec.evaluate(Q, P)), pol, psi, hbar)


def polarization_residual(psi, pol: Polarization, hbar: float, fraction: float = 0.5,
                          degree: int = 12, knot_spacing: float | None = None):
    """Fit ``psi`` to the polarized form for ``pol`` on the interior region.

    Returns ``(profile, residual)`` with ``residual = |psi - fit|_2 / |psi|_2``
    over ``|q|, |p| <= fraction * L``.

    Real polarizations: grid-aligned ``cq + dp`` is fitted by exact averaging
    over level sets, otherwise by a least-squares cubic spline.  Complex
    polarizations: least squares over polynomials of the given degree in
    ``cq + dp``, weighted by the modulus of the phase factor.
    """
    hbar = check_hbar(hbar)
    psi = as_section(psi)
    grid = psi.grid
    mask = grid.interior_mask(fraction)
    Q, P = grid.mesh()
    E = pol.phase(Q, P, hbar)[mask]
    _, s = pol.coordinate(Q, P)
    s = s[mask]
    y = psi.samples[mask]
    norm = np.linalg.norm(y)
    if norm == 0:
        return Profile1D.from_function(lambda x: np.zeros_like(x, dtype=complex),
                                       profile_extent(grid)), 0.0
    if pol.is_real:
        s = s.real
        phi = y / E
        scale = np.abs(s).max() or 1.0
        keys = np.round(s / scale, 11)
        uniq, inv = np.unique(keys, return_inverse=True)
        if uniq.size <= 4 * grid.n:
            sums = np.bincount(inv, weights=phi.real) + 1j * np.bincount(inv, weights=phi.imag)
            means = sums / np.bincount(inv)
            fit = E * means[inv]
            xs = np.array([s[inv == k][0] for k in range(uniq.size)])
            profile = Profile1D.from_samples(xs, means)
        else:
            order = np.argsort(s)
            ss, pp = s[order], phi[order]
            ks = knot_spacing or grid.spacing / 2
            inner = np.arange(ss[0] + ks, ss[-1] - ks / 2, ks)
            t = np.r_[[ss[0]] * 4, inner, [ss[-1]] * 4]
            spl_re = make_lsq_spline(ss, pp.real, t, k=3)
            spl_im = make_lsq_spline(ss, pp.imag, t, k=3)
            fit = E * (spl_re(s) + 1j * spl_im(s))
            lo, hi = ss[0], ss[-1]

            def func(x, lo=lo, hi=hi):
                x = np.asarray(x)
                if np.iscomplexobj(x):
                    x = x.real
                inside = (x >= lo) & (x <= hi)
                xc = np.clip(x, lo, hi)
                return np.where(inside, spl_re(xc) + 1j * spl_im(xc), 0.0)

            xg = np.linspace(lo, hi, 513)
            profile = Profile1D(xg, func(xg), func)
    else:
        scale = np.abs(s).max() or 1.0
        V = (s / scale)[:, None] ** np.arange(degree + 1)[None, :]
        coef, *_ = np.linalg.lstsq(E[:, None] * V, y, rcond=None)
        fit = E * (V @ coef)

        def func(x, coef=coef, scale=scale):
            x = np.asarray(x, dtype=complex) / scale
            return np.polynomial.polynomial.polyval(x, coef)

        profile = Profile1D.from_function(func, profile_extent(grid))
    return profile, float(np.linalg.norm(y - fit) / norm)


@dataclass
class LadderReport:
    polarization: str
    derivative_error: float
    multiplication_error: float
    derivative_multiplier: complex
    multiplication_multiplier: complex
    profile_commutator_error: float

    def as_dict(self):
        d = dict(self.__dict__)
        for k in ("derivative_multiplier", "multiplication_multiplier"):
            d[k] = [d[k].real, d[k].imag]
        return d


def _fit_multiplier(actual, expected):
    return complex(np.vdot(expected, actual) / np.vdot(expected, expected))


def ladder_check(pol: Polarization, psi, hbar: float, grid: PhaseGrid,
                 fraction: float = 0.5) -> LadderReport:
    """Compare the actions of ``aq+bp`` and ``cq+dp`` with ``(hbar/i) psi'`` and ``s psi``.

    Errors are interior sup-norms relative to the expected section; the
    multipliers are least-squares factors ``actual ~ m * expected``.
    """
    hbar = check_hbar(hbar)
    sec = make_polarized(pol, psi, hbar, grid)
    prof = sec.profile
    mask = grid.interior_mask(fraction)
    Q, P = grid.mesh()
    E = pol.phase(Q, P, hbar)
    _, s = pol.coordinate(Q, P)

    got_d = act_polarized(linear(grid, pol.a, pol.b), sec, hbar).samples[mask]
    exp_d = (E * (hbar / 1j) * prof.derivative(s))[mask]
    got_m = act_polarized(linear(grid, pol.c, pol.d), sec, hbar).samples[mask]
    exp_m = (E * s * prof(s))[mask]

    # (hbar/i)(x psi' - (x psi)') = -(hbar/i) psi on the profile grid
    x = prof.x[4:-4]
    vals = prof(x)
    xpsi = Profile1D(x, x * vals, lambda t: t * prof(t))
    comm = (hbar / 1j) * (x * prof.derivative(x) - xpsi.derivative(x))
    comm_err = np.abs(comm + (hbar / 1j) * vals).max() / max(abs(hbar) * np.abs(vals).max(), 1e-300)

    return LadderReport(
        polarization=pol.name,
        derivative_error=float(np.abs(got_d - exp_d).max() / np.abs(exp_d).max()),
        multiplication_error=float(np.abs(got_m - exp_m).max() / np.abs(exp_m).max()),
        derivative_multiplier=_fit_multiplier(got_d, exp_d),
        multiplication_multiplier=_fit_multiplier(got_m, exp_m),
        profile_commutator_error=float(comm_err),
    )


def fourier_intertwiner(psi, hbar: float, threshold: float = 1e-6, fraction: float = 0.5) -> Section:
    """Map a position-polarized section to a momentum-polarized one.

    ``exp(-i pq/2hbar) psi(q)  ->  exp(i qp/2hbar) int exp(-i p q'/hbar) psi(q') dq'``.
    """
    hbar = check_hbar(hbar)
    psi = as_section(psi)
    pos = Polarization.position()
    profile, res = polarization_residual(psi, pos, hbar, fraction=fraction)
    if res > threshold:
        raise ValueError(f"section is not position-polarized (residual {res:.3g} > {threshold:g})")
    xq = profile.x
    w = np.full(xq.size, xq[1] - xq[0])
    w[[0, -1]] *= 0.5
    vals = profile(xq) * w

    def transformed(p, xq=xq, vals=vals):
        p = np.asarray(p)
        flat = np.exp(-1j * np.outer(p.ravel(), xq) / hbar) @ vals
        return flat.reshape(p.shape)

    grid = psi.grid
    out = Profile1D.from_function(transformed, profile_extent(grid))
    return make_polarized(Polarization.momentum(), out, hbar, grid)
