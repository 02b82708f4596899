"""Lattice path integral on a triangulated disk with values in the pair groupoid.

A simplicial map into the nerve of the pair groupoid of the plane is fixed by
its vertex images, so a lattice field is a :class:`VertexAssignment`.  The
action is the sum over oriented triangles of the signed image area; by the
discrete Stokes identity it depends on the boundary images only.

Three boundary vertices carry the labels ``0, 1, inf`` (in that cyclic order
along ``boundary``) and are pinned to ``m0, m1, m``.  Triangles are oriented
against the boundary listing, so at refinement 0 the action is
``area(m, m1, m0)``.

The remaining vertices are integrated out.  The action is a quadratic form
``S = 1/2 w^T H w`` in ``w = (marked coordinates, free coordinates)``:

* interior vertices never enter ``H`` (telescoping); their integrals are a
  constant volume absorbed by the normalization;
* ``boundary="geodesic"`` pins every unmarked boundary vertex to the straight
  segment between its arc's marked endpoints;
* ``boundary="free"`` integrates them: a non-singular block is removed by an
  exact Fresnel integral, a null direction with a non-zero linear coupling
  makes the integral a distribution and raises :class:`DegenerateFresnelError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import czt

from .core import PhaseField, check_hbar, require_same_grid, signed_area_triangle
from .starprod import EvaluationSet

MARK_LABELS = ("0", "1", "inf")
REGULATORS = (1e-1, 1e-2, 1e-3)
QUADRATURE_MAX_FREE = 3
NULL_TOL = 1e-10


class DegenerateFresnelError(ValueError):
    """The Fresnel integral over the free vertices does not exist as a function."""


@dataclass(frozen=True)
class DiskTriangulation:
    """Oriented triangulation of a disk.

    ``arc_position[v]`` is, for an unmarked boundary vertex, the fraction of
    the way along its arc (from the arc's starting marked vertex).
    """

    n_vertices: int
    triangles: tuple
    boundary: tuple
    marked: tuple
    arc_position: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        tris = tuple(tuple(int(i) for i in t) for t in self.triangles)
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "boundary", tuple(int(i) for i in self.boundary))
        object.__setattr__(self, "marked", tuple(int(i) for i in self.marked))
        self.validate()

    @property
    def edges(self) -> set:
        return {frozenset(e) for t in self.triangles for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))}

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + len(self.triangles)

    @property
    def interior(self) -> tuple:
        b = set(self.boundary)
        return tuple(v for v in range(self.n_vertices) if v not in b)

    @property
    def free_boundary(self) -> tuple:
        return tuple(v for v in self.boundary if v not in self.marked)

    def arcs(self):
        """The three boundary arcs ``(start, end, [interior vertices])`` in cyclic order."""
        b = self.boundary
        pos = [b.index(m) for m in self.marked]
        out = []
        for k in range(3):
            i, j = pos[k], pos[(k + 1) % 3]
            span = [b[(i + t) % len(b)] for t in range(1, (j - i) % len(b))]
            out.append((self.marked[k], self.marked[(k + 1) % 3], span))
        return out

    def validate(self):
        directed = {}
        for t in self.triangles:
            if len(set(t)) != 3 or any(not 0 <= v < self.n_vertices for v in t):
                raise ValueError(f"bad triangle {t}")
            for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                if e in directed:
                    raise ValueError(f"edge {e} appears twice with the same direction")
                directed[e] = True
        # boundary edges are those without their reverse; triangles run against the listing
        bd = {e for e in directed if (e[1], e[0]) not in directed}
        b = self.boundary
        listed = {(b[(i + 1) % len(b)], b[i]) for i in range(len(b))}
        if bd != listed:
            raise ValueError("boundary listing does not match the triangles' free edges")
        if len(self.marked) != 3 or len(set(self.marked)) != 3:
            raise ValueError("need three distinct marked vertices")
        pos = [b.index(m) for m in self.marked]
        if sorted(pos, key=lambda x: (x - pos[0]) % len(b)) != pos:
            raise ValueError("marked vertices must appear on the boundary in the order 0, 1, inf")
        if self.euler_characteristic != 1:
            raise ValueError("triangulation is not a disk")


def triangulate_disk(refinement: int) -> DiskTriangulation:
    """Single triangle on the marked vertices, 4-to-1 midpoint subdivided ``refinement`` times."""
    if int(refinement) != refinement or refinement < 0:
        raise ValueError(f"refinement must be a non-negative integer, got {refinement!r}")
    tris = [(2, 1, 0)]
    boundary = [0, 1, 2]
    nv = 3
    for _ in range(int(refinement)):
        mid = {}

        def midpoint(a, b):
            nonlocal nv
            key = frozenset((a, b))
            if key not in mid:
                mid[key] = nv
                nv += 1
            return mid[key]

        new = []
        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        tris = new
        nb = []
        for i, v in enumerate(boundary):
            nb += [v, mid[frozenset((v, boundary[(i + 1) % len(boundary)]))]]
        boundary = nb
    return _with_arc_positions(nv, tris, boundary, (0, 1, 2))


def polygon_fan(arc_counts=(0, 0, 0)) -> DiskTriangulation:
    """Fan from one interior vertex over a boundary polygon.

    ``arc_counts[k]`` unmarked vertices sit on the arc after marked vertex
    ``k``.  Unlike midpoint subdivision this allows even counts, for which
    the free-boundary Fresnel integral is non-degenerate.
    """
    counts = [int(c) for c in arc_counts]
    if len(counts) != 3 or min(counts) < 0:
        raise ValueError("arc_counts must be three non-negative integers")
    boundary, marked, nv = [], [], 0
    for c in counts:
        marked.append(nv)
        boundary += list(range(nv, nv + c + 1))
        nv += c + 1
    center = nv
    nb = len(boundary)
    tris = [(center, boundary[(i + 1) % nb], boundary[i]) for i in range(nb)]
    return _with_arc_positions(nv + 1, tris, boundary, tuple(marked))


def _with_arc_positions(nv, tris, boundary, marked):
    T = DiskTriangulation(nv, tuple(tris), tuple(boundary), tuple(marked))
    pos = {}
    for _, _, span in T.arcs():
        for j, v in enumerate(span):
            pos[v] = (j + 1) / (len(span) + 1)
    object.__setattr__(T, "arc_position", pos)
    return T


class VertexAssignment:
    """Images of the vertices in the plane, as a ``(V, 2)`` array."""

    def __init__(self, points, n_vertices: int | None = None):
        if isinstance(points, dict):
            if n_vertices is None:
                n_vertices = max(points) + 1
            missing = [v for v in range(n_vertices) if v not in points]
            if missing:
                raise ValueError(f"missing vertex images for {missing}")
            points = [points[v] for v in range(n_vertices)]
        arr = np.asarray(points, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"vertex images must have shape (V, 2), got {arr.shape}")
        if n_vertices is not None and arr.shape[0] != n_vertices:
            raise ValueError(f"expected {n_vertices} vertex images, got {arr.shape[0]}")
        self.points = arr

    @classmethod
    def random(cls, T: DiskTriangulation, rng, scale: float = 1.0):
        return cls(rng.normal(scale=scale, size=(T.n_vertices, 2)))


def _points(T: DiskTriangulation, X) -> np.ndarray:
    X = X if isinstance(X, VertexAssignment) else VertexAssignment(X)
    if X.points.shape[0] != T.n_vertices:
        raise ValueError(f"assignment covers {X.points.shape[0]} vertices, triangulation has {T.n_vertices}")
    return X.points


def discrete_action(T: DiskTriangulation, X) -> float:
    """Sum of signed image areas of the oriented triangles."""
    x = _points(T, X)
    t = np.array(T.triangles)
    a, b, c = x[t[:, 0]].T, x[t[:, 1]].T, x[t[:, 2]].T
    return float(np.sum(signed_area_triangle(a, b, c)))


def boundary_area(T: DiskTriangulation, X) -> float:
    """Signed area of the image boundary polygon, oriented like the triangles."""
    x = _points(T, X)
    ring = x[list(reversed(T.boundary))]
    k = np.arange(1, len(ring) - 1)
    return float(np.sum(signed_area_triangle(ring[0], ring[k].T, ring[k + 1].T)))


@dataclass(frozen=True)
class LatticeConfig:
    hbar: float
    refinement: int = 0
    integration: str = "fresnel"
    boundary: str = "geodesic"
    quad_points: int | None = None

    def __post_init__(self):
        check_hbar(self.hbar)
        if int(self.refinement) != self.refinement or self.refinement < 0:
            raise ValueError("refinement must be a non-negative integer")
        if self.integration not in ("fresnel", "quadrature"):
            raise ValueError(f"unknown integration {self.integration!r}")
        if self.boundary not in ("geodesic", "free"):
            raise ValueError(f"unknown boundary condition {self.boundary!r}")


def _vertex_form(T: DiskTriangulation) -> np.ndarray:
    """Symmetric ``B`` with ``action = 1/2 x^T B x``, ``x = (q_0, p_0, q_1, p_1, ...)``."""
    C = np.zeros((2 * T.n_vertices, 2 * T.n_vertices))
    for t in T.triangles:
        # area(a, b, c) = 1/2 (sigma(a, b) + sigma(b, c) + sigma(c, a))
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            C[2 * a, 2 * b + 1] += 0.5
            C[2 * a + 1, 2 * b] -= 0.5
    return C + C.T


@dataclass(frozen=True)
class EffectiveForm:
    """Action after the free vertices are integrated out.

    ``kernel(m0, m1, m) = exp(i/2hbar z^T H z)``, ``z = (q0, p0, q1, p1, q, p)``.
    ``normalization`` is the dropped Fresnel prefactor (one per ``(T, hbar)``),
    ``volume_modes`` the number of decoupled real coordinates.
    """

    H: np.ndarray
    normalization: complex
    volume_modes: int
    free_vertices: tuple
    P: np.ndarray = field(repr=False)
    H_full: np.ndarray = field(repr=False)

    def action(self, m0, m1, m) -> np.ndarray:
        z = np.stack(np.broadcast_arrays(m0[0], m0[1], m1[0], m1[1], m[0], m[1]), axis=-1)
        return 0.5 * np.einsum("...i,ij,...j->...", z, self.H, z)


def _embedding(T: DiskTriangulation, boundary: str):
    """Linear map ``x = P w`` from ``(marked, free)`` coordinates to vertex images."""
    arcs = T.arcs()
    pinned = {}
    if boundary == "geodesic":
        for a, b, span in arcs:
            for v in span:
                pinned[v] = (a, b, T.arc_position[v])
    free = tuple(v for v in range(T.n_vertices) if v not in T.marked and v not in pinned)
    col = {m: 2 * k for k, m in enumerate(T.marked)}
    for k, v in enumerate(free):
        col[v] = 6 + 2 * k
    P = np.zeros((2 * T.n_vertices, 6 + 2 * len(free)))
    for v in range(T.n_vertices):
        for c in range(2):
            if v in pinned:
                a, b, s = pinned[v]
                P[2 * v + c, col[a] + c] = 1 - s
                P[2 * v + c, col[b] + c] = s
            else:
                P[2 * v + c, col[v] + c] = 1.0
    return P, free


def effective_form(T: DiskTriangulation, hbar: float, boundary: str = "geodesic") -> EffectiveForm:
    """Integrate out the free vertices by exact Fresnel integrals."""
    hbar = check_hbar(hbar)
    P, free = _embedding(T, boundary)
    H = P.T @ _vertex_form(T) @ P
    Hmm, Hmf, Hff = H[:6, :6], H[:6, 6:], H[6:, 6:]
    if Hff.size == 0:
        return EffectiveForm(Hmm, 1.0 + 0j, 0, free, P, H)
    lam, V = np.linalg.eigh(Hff)
    scale = max(np.abs(H).max(), 1.0)
    null = np.abs(lam) <= NULL_TOL * scale
    coupling = Hmf @ V[:, null]
    if np.abs(coupling).max(initial=0.0) > NULL_TOL * scale:
        raise DegenerateFresnelError(
            f"{int(null.sum())} null direction(s) of the free-vertex form couple to the marked "
            "points; the integral is a distribution, not a function")
    Vn, ln = V[:, ~null], lam[~null]
    B = Hmf @ Vn
    Heff = Hmm - (B / ln) @ B.T
    k = ln.size
    sig = int(np.sum(ln > 0) - np.sum(ln < 0))
    norm = (2 * np.pi * hbar) ** (k / 2) / np.sqrt(np.prod(np.abs(ln))) * np.exp(0.25j * np.pi * sig)
    return EffectiveForm(Heff, complex(norm), int(null.sum()), free, P, H)


def kernel_fresnel(T: DiskTriangulation, m0, m1, m, hbar: float, boundary: str = "geodesic"):
    """Normalized lattice kernel ``exp(i/hbar S_eff(m0, m1, m))``."""
    form = effective_form(T, hbar, boundary)
    return np.exp(1j / hbar * form.action(np.asarray(m0, float), np.asarray(m1, float),
                                           np.asarray(m, float)))


def _pair_blocks(Hff: np.ndarray):
    """Split the free coordinates into pairs ``(x, y)`` coupled only through ``x y``."""
    n = Hff.shape[0]
    if np.abs(np.diag(Hff)).max(initial=0.0) > NULL_TOL:
        raise ValueError("quadrature mode needs a form without diagonal terms")
    pairs, seen = [], set()
    for i in range(n):
        if i in seen:
            continue
        nz = np.flatnonzero(np.abs(Hff[i]) > NULL_TOL)
        if nz.size == 0:
            pairs.append((i, None))
            seen.add(i)
            continue
        if nz.size != 1 or np.flatnonzero(np.abs(Hff[nz[0]]) > NULL_TOL).tolist() != [i]:
            raise ValueError("quadrature mode supports free coordinates coupled in pairs only")
        pairs.append((i, int(nz[0])))
        seen.update((i, int(nz[0])))
    return pairs


def _regulated_ratio(beta, a, b, hbar, eps, points):
    """``int exp(i/hbar (beta x y + a x + b y) - eps (x^2 + y^2))``, divided by its value at ``a = b = 0``.

    Trapezoid rule on ``|x|, |y| <= 6 / sqrt(eps)``.
    """
    R = 6.0 / np.sqrt(eps)
    if points is None:
        kmax = (abs(beta) * R + abs(a) + abs(b)) / hbar
        points = int(np.ceil(2 * R * (kmax + 2.0) / np.pi)) + 1
    x, dx = np.linspace(-R, R, points, retstep=True)
    w = np.exp(-eps * x * x)

    def inner(shift):
        # sum_y w(y) exp(i/hbar (beta x_j + shift) y) for every x_j, as one chirp-z transform
        k0 = beta * x[0] + shift
        vals = czt(w, points, np.exp(1j / hbar * beta * dx * dx), np.exp(-1j / hbar * k0 * dx))
        return vals * np.exp(1j / hbar * (beta * x + shift) * x[0])

    num = np.sum(w * np.exp(1j / hbar * a * x) * inner(b))
    den = np.sum(w * inner(0.0))
    return num / den


def kernel_quadrature(T: DiskTriangulation, m0, m1, m, hbar: float, boundary: str = "free",
                      points: int | None = None, regulators=REGULATORS):
    """Normalized kernel by numerical quadrature with a Gaussian regulator.

    Each regulated integral is divided by its value at zero boundary data and
    the ratios are extrapolated to zero regulator by the interpolating
    polynomial through ``regulators``.  Only forms whose free coordinates
    couple in ``x y`` pairs are supported, and at most three free vertices.
    """
    hbar = check_hbar(hbar)
    P, free = _embedding(T, boundary)
    H = P.T @ _vertex_form(T) @ P
    Hmm, Hmf, Hff = H[:6, :6], H[:6, 6:], H[6:, 6:]
    coupled = np.flatnonzero((np.abs(Hff).max(axis=0, initial=0.0) > NULL_TOL)
                             | (np.abs(Hmf).max(axis=0, initial=0.0) > NULL_TOL))
    if len({i // 2 for i in coupled}) > QUADRATURE_MAX_FREE:
        raise ValueError(f"quadrature mode is limited to {QUADRATURE_MAX_FREE} free vertices")
    z = np.array([m0[0], m0[1], m1[0], m1[1], m[0], m[1]], dtype=float)
    lin = z @ Hmf
    value = np.exp(0.5j / hbar * z @ Hmm @ z)
    for i, j in _pair_blocks(Hff[np.ix_(coupled, coupled)]):
        i = coupled[i]
        if j is None:
            if abs(lin[i]) > NULL_TOL:
                raise DegenerateFresnelError("a free coordinate enters the action linearly only")
            continue
        j = coupled[j]
        ratios = [_regulated_ratio(Hff[i, j], lin[i], lin[j], hbar, e, points) for e in regulators]
        coef = np.polyfit(regulators, ratios, len(regulators) - 1)
        value = value * coef[-1]
    return complex(value)


def lattice_star(f: PhaseField, g: PhaseField, hbar: float, cfg: LatticeConfig, targets) -> np.ndarray:
    """``(4 pi hbar)^-2 sum f(m1) g(m0) kernel(m0, m1, m) h^4`` at each target ``m``."""
    grid = require_same_grid(f, g)
    hbar = check_hbar(hbar)
    targets = targets if isinstance(targets, EvaluationSet) else EvaluationSet(targets)
    targets.check_inside(grid)
    T = triangulate_disk(cfg.refinement)
    H = effective_form(T, hbar, cfg.boundary).H
    # q0-q1 and p0-p1 couplings would spoil the separable evaluation
    if abs(H[0, 2]) > NULL_TOL or abs(H[1, 3]) > NULL_TOL:
        raise ValueError("effective form couples like coordinates of m0 and m1")
    x = grid.axis
    h = grid.spacing
    Q, Pm = grid.mesh()
    c = 0.5j / hbar
    # same-vertex parts of the form
    G0 = g.samples * np.exp(c * (H[0, 0] * Q * Q + 2 * H[0, 1] * Q * Pm + H[1, 1] * Pm * Pm))
    F1 = f.samples * np.exp(c * (H[2, 2] * Q * Q + 2 * H[2, 3] * Q * Pm + H[3, 3] * Pm * Pm))
    A1 = np.exp(2 * c * H[3, 0] * np.outer(x, x))   # [q0, p1]
    A2 = np.exp(2 * c * H[2, 1] * np.outer(x, x))   # [q1, p0]
    out = np.empty(len(targets), dtype=complex)
    for k, (q, p) in enumerate(targets):
        t = np.array([q, p])
        l0 = 2 * H[0:2, 4:6] @ t
        l1 = 2 * H[2:4, 4:6] @ t
        Gt = G0 * np.exp(c * (l0[0] * Q + l0[1] * Pm))
        Ft = F1 * np.exp(c * (l1[0] * Q + l1[1] * Pm))
        M = A2 @ Gt.T @ A1                            # [q1, p1], summed over p0, q0
        out[k] = np.sum(Ft * M) * np.exp(c * t @ H[4:6, 4:6] @ t)
    return out * h**4 / (4 * np.pi * hbar) ** 2
