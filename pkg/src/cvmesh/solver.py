"""Radius solving: closed-form candidate vertices (radical centers), per-point
radius bounds, the power-mismatch objective, overlap classification, and the
mode logic assembling the final radius vector.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .delaunay import NeighborMap, Triangulation2, Triangulation3
from .errors import DegenerateTetrahedron, DegenerateTriangle, EmptyInterval
from .geometry import (
    EPS_AREA,
    EPS_VOL,
    neighbor_height2,
    neighbor_height3,
    tetra_height,
)
from .optimize import SoftSelectionParams, soft_selection_minimize

__all__ = [
    "VolumeMode",
    "RadiusVector",
    "RadiusBounds",
    "CandidateVertex",
    "CramerDeterminants",
    "OverlapKind",
    "OverlapMode",
    "SolveResult",
    "vertex2",
    "vertex3",
    "cramer3",
    "max_radii",
    "radius_bounds2",
    "radius_bounds3",
    "bounds_arrays",
    "objective",
    "classify_overlap",
    "solve_radii",
    "simplex_systems",
]


class VolumeMode(Enum):
    EXACT_INTERSECTION = "exact-intersection"
    RADICAL_CENTER = "radical-center"


class OverlapKind(Enum):
    OVERLAPPING = "overlapping"
    NON_OVERLAPPING = "non-overlapping"


@dataclass(frozen=True)
class RadiusVector:
    r: np.ndarray
    mode: VolumeMode


@dataclass(frozen=True)
class RadiusBounds:
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class CandidateVertex:
    """Radical center of one simplex's circles/spheres; residual is the
    absolute power mismatch (zero exactly when the circles meet at a point)."""

    x: float
    y: float
    z: float | None
    simplex: int
    residual: float

    @property
    def coords(self) -> tuple[float, ...]:
        return (self.x, self.y) if self.z is None else (self.x, self.y, self.z)


@dataclass(frozen=True)
class CramerDeterminants:
    w: float
    wx: float
    wy: float
    wz: float
    d1: float
    d2: float
    d3: float


@dataclass(frozen=True)
class OverlapMode:
    """Per-neighbor-pair overlap labels keyed by (i, j) with i < j."""

    pairs: dict[tuple[int, int], OverlapKind]

    def kind(self, i: int, j: int) -> OverlapKind:
        return self.pairs[(i, j) if i < j else (j, i)]


@dataclass
class SolveResult:
    radii: RadiusVector
    lo: np.ndarray
    hi: np.ndarray
    objective: float
    n_eval: int
    converged: bool
    status: str
    clamped_points: list[int] = field(default_factory=list)


def _coords(p, dim):
    arr = np.asarray(getattr(p, "coords", p), dtype=float).reshape(-1)
    if arr.size != dim:
        raise ValueError(f"expected {dim}D center, got {arr}")
    return arr


def vertex2(c1, c2, c3, r1: float, r2: float, r3: float, simplex: int = -1) -> CandidateVertex:
    """Radical center of three circles: the unique point with equal power to all
    three. When the circles share a common point, that point is returned and the
    residual vanishes. Closed form, rational in the squared radii."""
    a1, b1 = _coords(c1, 2)
    a2, b2 = _coords(c2, 2)
    a3, b3 = _coords(c3, 2)
    den = 2.0 * ((a1 - a2) * (b1 - b3) - (a1 - a3) * (b1 - b2))
    longest = max(
        math.hypot(a1 - a2, b1 - b2),
        math.hypot(a2 - a3, b2 - b3),
        math.hypot(a1 - a3, b1 - b3),
    )
    if abs(den) <= 4.0 * EPS_AREA * longest * longest:
        raise DegenerateTriangle("collinear circle centers")
    q1 = a1 * a1 + b1 * b1
    q2 = a2 * a2 + b2 * b2
    q3 = a3 * a3 + b3 * b3
    num_x = (
        -(b2 - b3) * r1 * r1 + (b1 - b3) * r2 * r2 - (b1 - b2) * r3 * r3
        + q1 * (b2 - b3) - q2 * (b1 - b3) + q3 * (b1 - b2)
    )
    num_y = (
        (a2 - a3) * r1 * r1 - (a1 - a3) * r2 * r2 + (a1 - a2) * r3 * r3
        - q1 * (a2 - a3) + q2 * (a1 - a3) - q3 * (a1 - a2)
    )
    x = num_x / den
    y = num_y / den
    residual = abs((x - a1) ** 2 + (y - b1) ** 2 - r1 * r1)
    return CandidateVertex(x=x, y=y, z=None, simplex=simplex, residual=residual)


def _det3(m) -> float:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def cramer3(c1, c2, c3, c4, r1: float, r2: float, r3: float, r4: float) -> CramerDeterminants:
    """Cramer determinants of the pairwise-difference sphere system."""
    p1 = _coords(c1, 3)
    p2 = _coords(c2, 3)
    p3 = _coords(c3, 3)
    p4 = _coords(c4, 3)
    rows = [2.0 * (p1 - p) for p in (p2, p3, p4)]
    d = [
        r2 * r2 - r1 * r1 + float(p1 @ p1 - p2 @ p2),
        r3 * r3 - r1 * r1 + float(p1 @ p1 - p3 @ p3),
        r4 * r4 - r1 * r1 + float(p1 @ p1 - p4 @ p4),
    ]
    w = _det3(rows)
    wx = _det3([[d[k], rows[k][1], rows[k][2]] for k in range(3)])
    wy = _det3([[rows[k][0], d[k], rows[k][2]] for k in range(3)])
    wz = _det3([[rows[k][0], rows[k][1], d[k]] for k in range(3)])
    return CramerDeterminants(w=w, wx=wx, wy=wy, wz=wz, d1=d[0], d2=d[1], d3=d[2])


def vertex3(c1, c2, c3, c4, r1: float, r2: float, r3: float, r4: float,
            simplex: int = -1) -> CandidateVertex:
    """Radical center of four spheres, solved by Cramer's rule."""
    cd = cramer3(c1, c2, c3, c4, r1, r2, r3, r4)
    p1 = _coords(c1, 3)
    p2 = _coords(c2, 3)
    p3 = _coords(c3, 3)
    p4 = _coords(c4, 3)
    longest = max(
        float(np.linalg.norm(u - v))
        for u, v in ((p1, p2), (p1, p3), (p1, p4), (p2, p3), (p2, p4), (p3, p4))
    )
    if abs(cd.w) <= 48.0 * EPS_VOL * longest**3:
        raise DegenerateTetrahedron("coplanar sphere centers")
    x = cd.wx / cd.w
    y = cd.wy / cd.w
    z = cd.wz / cd.w
    residual = abs((x - p1[0]) ** 2 + (y - p1[1]) ** 2 + (z - p1[2]) ** 2 - r1 * r1)
    return CandidateVertex(x=x, y=y, z=z, simplex=simplex, residual=residual)


def max_radii(nm: NeighborMap, pts: np.ndarray) -> np.ndarray:
    """Largest admissible radius per point: the minimum incident height."""
    n = len(pts)
    out = np.full(n, np.inf)
    if nm.dim == 2:
        for i in range(n):
            ring = nm.rings[i]
            pairs = len(nm.ring_simplices[i])
            for k in range(pairs):
                u = ring[k]
                v = ring[(k + 1) % len(ring)]
                h = neighbor_height2(pts[i], pts[u], pts[v]).value
                out[i] = min(out[i], h)
    else:
        for i in range(n):
            for triple in nm.stars[i]:
                h = tetra_height(pts[i], pts[triple[0]], pts[triple[1]], pts[triple[2]]).value
                out[i] = min(out[i], h)
    return out


def radius_bounds2(i: int, nm: NeighborMap, pts: np.ndarray,
                   r_max: np.ndarray | None = None) -> RadiusBounds:
    """Open admissible interval for the radius at point i (2D).

    hi is the minimum incident-triangle height; lo is the largest neighbor
    distance minus that neighbor's own max radius, floored at zero.
    """
    if r_max is None:
        r_max = max_radii(nm, pts)
    hi = float(r_max[i])
    lo = 0.0
    blocking = None
    for u in nm.rings[i]:
        v = float(np.linalg.norm(pts[i] - pts[u])) - float(r_max[u])
        if v > lo:
            lo = v
            blocking = int(u)
    if lo >= hi:
        raise EmptyInterval(i, lo, hi, blocking)
    return RadiusBounds(lo=lo, hi=hi)


def radius_bounds3(i: int, nm: NeighborMap, pts: np.ndarray,
                   r_max: np.ndarray | None = None) -> RadiusBounds:
    """Open admissible interval for the radius at point i (3D).

    hi is the minimum incident-tetra height; lo pairs each wall-triangle height
    with the max radius of the neighbor it is measured to, floored at zero.
    """
    if r_max is None:
        r_max = max_radii(nm, pts)
    hi = float(r_max[i])
    lo = 0.0
    blocking = None
    for triple in nm.stars[i]:
        for l in range(3):
            j = int(triple[l])
            j1 = int(triple[(l + 1) % 3])
            h = neighbor_height3(pts[i], pts[j], pts[j1]).value
            v = h - float(r_max[j])
            if v > lo:
                lo = v
                blocking = j
    if lo >= hi:
        raise EmptyInterval(i, lo, hi, blocking)
    return RadiusBounds(lo=lo, hi=hi)


def bounds_arrays(nm: NeighborMap, pts: np.ndarray,
                  policy: str = "strict") -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Stack per-point radius bounds into (lo, hi) arrays; one r_max pass.

    policy "strict" propagates EmptyInterval; "clamp" floors an empty interval
    to (0, hi) and records the point index. Returns (lo, hi, clamped_points).
    """
    r_max = max_radii(nm, pts)
    n = len(pts)
    lo = np.empty(n)
    hi = np.empty(n)
    clamped: list[int] = []
    bound = radius_bounds2 if nm.dim == 2 else radius_bounds3
    for i in range(n):
        try:
            b = bound(i, nm, pts, r_max)
            lo[i] = b.lo
            hi[i] = b.hi
        except EmptyInterval:
            if policy != "clamp":
                raise
            lo[i] = 0.0
            hi[i] = float(r_max[i])
            clamped.append(i)
    return lo, hi, clamped


def worker_count() -> int:
    """Worker cap from CVMESH_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("CVMESH_THREADS", "1")))
    except ValueError:
        return 1


class TriangleSystems2:
    """Vectorized radical-center evaluation for every triangle of a triangulation."""

    def __init__(self, pts: np.ndarray, triangles: np.ndarray, threads: int | None = None):
        self.indices = np.asarray(triangles, dtype=np.int64)
        self.threads = worker_count() if threads is None else max(1, threads)
        i1, i2, i3 = self.indices.T
        a1, b1 = pts[i1].T
        a2, b2 = pts[i2].T
        a3, b3 = pts[i3].T
        self._a1, self._b1 = a1, b1
        self.den = 2.0 * ((a1 - a2) * (b1 - b3) - (a1 - a3) * (b1 - b2))
        q1 = a1 * a1 + b1 * b1
        q2 = a2 * a2 + b2 * b2
        q3 = a3 * a3 + b3 * b3
        self.cx = q1 * (b2 - b3) - q2 * (b1 - b3) + q3 * (b1 - b2)
        self.cy = -q1 * (a2 - a3) + q2 * (a1 - a3) - q3 * (a1 - a2)
        self.kx = np.stack([-(b2 - b3), (b1 - b3), -(b1 - b2)], axis=1)
        self.ky = np.stack([(a2 - a3), -(a1 - a3), (a1 - a2)], axis=1)
        mean_edge = (
            np.hypot(a1 - a2, b1 - b2)
            + np.hypot(a2 - a3, b2 - b3)
            + np.hypot(a1 - a3, b1 - b3)
        ) / 3.0
        self.weights = mean_edge**-4.0

    def __len__(self) -> int:
        return len(self.indices)

    def vertices(self, r: np.ndarray, sl: slice = slice(None)) -> np.ndarray:
        r2 = np.asarray(r) ** 2
        rt = r2[self.indices[sl]]  # (T, 3)
        x = (np.einsum("tk,tk->t", self.kx[sl], rt) + self.cx[sl]) / self.den[sl]
        y = (np.einsum("tk,tk->t", self.ky[sl], rt) + self.cy[sl]) / self.den[sl]
        return np.stack([x, y], axis=1)

    def powers(self, r: np.ndarray, sl: slice = slice(None)) -> np.ndarray:
        """Power of each radical center with respect to its first circle."""
        q = self.vertices(r, sl)
        r2 = np.asarray(r) ** 2
        return (
            (q[:, 0] - self._a1[sl]) ** 2
            + (q[:, 1] - self._b1[sl]) ** 2
            - r2[self.indices[sl, 0]]
        )

    def objective(self, r: np.ndarray) -> float:
        p = _chunked(self.powers, r, len(self), self.threads)
        return float(np.sum(self.weights * p * p))


class TetraSystems3:
    """Vectorized radical-center evaluation for every tetrahedron (Cramer form)."""

    def __init__(self, pts: np.ndarray, tets: np.ndarray, threads: int | None = None):
        self.indices = np.asarray(tets, dtype=np.int64)
        self.threads = worker_count() if threads is None else max(1, threads)
        p = pts[self.indices]  # (T, 4, 3)
        self._p1 = p[:, 0, :]
        rows = 2.0 * (p[:, [0, 0, 0], :] - p[:, [1, 2, 3], :])  # (T, 3row, 3col)
        A = rows[:, :, 0]
        B = rows[:, :, 1]
        C = rows[:, :, 2]
        # Row-pair cofactors used by each Cramer column expansion.
        self.cof_bc = np.stack([
            B[:, 1] * C[:, 2] - B[:, 2] * C[:, 1],
            B[:, 0] * C[:, 2] - B[:, 2] * C[:, 0],
            B[:, 0] * C[:, 1] - B[:, 1] * C[:, 0],
        ], axis=1)
        self.cof_ac = np.stack([
            A[:, 1] * C[:, 2] - A[:, 2] * C[:, 1],
            A[:, 0] * C[:, 2] - A[:, 2] * C[:, 0],
            A[:, 0] * C[:, 1] - A[:, 1] * C[:, 0],
        ], axis=1)
        self.cof_ab = np.stack([
            A[:, 1] * B[:, 2] - A[:, 2] * B[:, 1],
            A[:, 0] * B[:, 2] - A[:, 2] * B[:, 0],
            A[:, 0] * B[:, 1] - A[:, 1] * B[:, 0],
        ], axis=1)
        self.w = A[:, 0] * self.cof_bc[:, 0] - B[:, 0] * self.cof_ac[:, 0] + C[:, 0] * self.cof_ab[:, 0]
        sq = np.sum(p * p, axis=2)  # (T, 4)
        self.kd = sq[:, [0, 0, 0]] - sq[:, [1, 2, 3]]  # r-independent part of the deltas
        edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        mean_edge = sum(
            np.linalg.norm(p[:, u, :] - p[:, v, :], axis=1) for u, v in edges
        ) / 6.0
        self.weights = mean_edge**-4.0

    def __len__(self) -> int:
        return len(self.indices)

    def _deltas(self, r2: np.ndarray, sl: slice) -> np.ndarray:
        rt = r2[self.indices[sl]]  # (T, 4)
        return rt[:, 1:] - rt[:, [0, 0, 0]] + self.kd[sl]

    def vertices(self, r: np.ndarray, sl: slice = slice(None)) -> np.ndarray:
        r2 = np.asarray(r) ** 2
        d = self._deltas(r2, sl)  # (T, 3)
        sign = np.array([1.0, -1.0, 1.0])
        wx = np.einsum("tk,tk,k->t", d, self.cof_bc[sl], sign)
        wy = -np.einsum("tk,tk,k->t", d, self.cof_ac[sl], sign)
        wz = np.einsum("tk,tk,k->t", d, self.cof_ab[sl], sign)
        return np.stack([wx, wy, wz], axis=1) / self.w[sl, None]

    def powers(self, r: np.ndarray, sl: slice = slice(None)) -> np.ndarray:
        q = self.vertices(r, sl)
        r2 = np.asarray(r) ** 2
        return np.sum((q - self._p1[sl]) ** 2, axis=1) - r2[self.indices[sl, 0]]

    def objective(self, r: np.ndarray) -> float:
        p = _chunked(self.powers, r, len(self), self.threads)
        return float(np.sum(self.weights * p * p))


def _chunked(powers_fn, r, total: int, threads: int) -> np.ndarray:
    """Fan per-simplex power evaluation out over worker threads.

    Each worker fills a disjoint index slice of one preallocated array, and the
    caller reduces that array in index order, so the value is identical for any
    worker count or scheduling."""
    if threads <= 1 or total < 4 * threads:
        return powers_fn(r)
    out = np.empty(total)
    cuts = np.linspace(0, total, threads + 1).astype(int)

    def fill(k: int):
        sl = slice(cuts[k], cuts[k + 1])
        out[sl] = powers_fn(r, sl)

    with ThreadPoolExecutor(max_workers=threads) as ex:
        list(ex.map(fill, range(threads)))
    return out


def simplex_systems(tri: Triangulation2 | Triangulation3, threads: int | None = None):
    if isinstance(tri, Triangulation2):
        return TriangleSystems2(tri.points, tri.triangles, threads)
    return TetraSystems3(tri.points, tri.tetrahedra, threads)


def objective(r, tri, nm: NeighborMap | None = None, pts: np.ndarray | None = None) -> float:
    """Scale-invariant power-mismatch objective over all simplices.

    Sum of w_s * power(Q_s, first circle)^2 with w_s = 1 / mean-edge^4; zero
    exactly when every simplex's circles/spheres meet at a single point.
    """
    rr = r.r if isinstance(r, RadiusVector) else np.asarray(r, dtype=float)
    return simplex_systems(tri).objective(rr)


def classify_overlap(r, nm: NeighborMap, pts: np.ndarray) -> OverlapMode:
    """Label every Delaunay-neighbor pair as overlapping (L - (r_i + r_j) <= 0,
    tangency included) or non-overlapping (strictly positive gap)."""
    rr = r.r if isinstance(r, RadiusVector) else np.asarray(r, dtype=float)
    pairs: dict[tuple[int, int], OverlapKind] = {}
    n = nm.n_points
    for i in range(n):
        for j in nm.neighbors(i):
            j = int(j)
            key = (i, j) if i < j else (j, i)
            if key in pairs:
                continue
            L = float(np.linalg.norm(pts[i] - pts[j]))
            gap = L - (rr[i] + rr[j])
            pairs[key] = OverlapKind.NON_OVERLAPPING if gap > 0.0 else OverlapKind.OVERLAPPING
    return OverlapMode(pairs=pairs)


def solve_radii(
    tri,
    nm: NeighborMap,
    pts: np.ndarray | None = None,
    mode: VolumeMode = VolumeMode.RADICAL_CENTER,
    seed: int = 0,
    r0: np.ndarray | None = None,
    params: SoftSelectionParams | None = None,
    equal_radii: bool = False,
    equal_radius: float | None = None,
    bounds_policy: str = "strict",
) -> SolveResult:
    """Produce the radius vector for a triangulation.

    RADICAL_CENTER mode sets each radius to its interval midpoint and takes
    vertices directly as radical centers (no optimization). EXACT_INTERSECTION
    mode minimizes the power-mismatch objective inside the strict bounds box
    (soft selection plus a rotating-direction polish). equal_radius bypasses
    both and assigns one shared radius (the Voronoi-equivalence override).
    bounds_policy "clamp" floors empty radius intervals to (0, r_max) instead
    of raising EmptyInterval; affected points are reported on the result.
    """
    if pts is None:
        pts = tri.points
    systems = simplex_systems(tri)

    if equal_radii and equal_radius is None:
        equal_radius = 0.5 * float(np.min(max_radii(nm, pts)))
    if equal_radius is not None:
        r = np.full(len(pts), float(equal_radius))
        lo = np.zeros(len(pts))
        hi = np.full(len(pts), np.inf)
        return SolveResult(
            radii=RadiusVector(r=r, mode=mode),
            lo=lo,
            hi=hi,
            objective=systems.objective(r),
            n_eval=1,
            converged=True,
            status="equal-radii",
        )

    lo, hi, clamped = bounds_arrays(nm, pts, policy=bounds_policy)

    if mode is VolumeMode.RADICAL_CENTER:
        r = 0.5 * (lo + hi)
        return SolveResult(
            radii=RadiusVector(r=r, mode=mode),
            lo=lo,
            hi=hi,
            objective=systems.objective(r),
            n_eval=1,
            converged=True,
            status="radical-center",
            clamped_points=clamped,
        )

    x0 = r0 if r0 is not None else lo + 0.62 * (hi - lo)
    x0 = np.clip(x0, lo + 1e-9 * (hi - lo), hi - 1e-9 * (hi - lo))
    result = soft_selection_minimize(systems.objective, (lo, hi), seed=seed, params=params, x0=x0)
    return SolveResult(
        radii=RadiusVector(r=result.x, mode=mode),
        lo=lo,
        hi=hi,
        objective=result.fun,
        n_eval=result.n_eval,
        converged=result.converged,
        status=result.status,
        clamped_points=clamped,
    )
