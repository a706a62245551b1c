"""Control-volume assembly from per-simplex candidate vertices, boundary-cell
closure by domain clipping, and the global/local mesh validations.

Interior cells take their vertices directly from the incident simplices in
ring/star order; hull-point cells are cut out of the domain by the power
bisectors toward their neighbors. Every wall knows which neighbor it separates
its owner from, which makes the perpendicularity and shared-wall checks exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clipping import (
    TaggedFace,
    TaggedPolygon,
    TaggedPolyhedron,
    box_polygon,
    box_polyhedron,
    clip_polygon,
    clip_polyhedron,
    polygon_halfplanes,
    polyhedron_halfspaces,
    _newell_normal,
)
from .delaunay import NeighborMap, Triangulation2, Triangulation3
from .errors import NonConvexCell, NonPlanarFace, OrphanVertex
from .solver import RadiusVector, simplex_systems

EPS_FACE = 1e-6       # face planarity, relative to the face edge scale
DEFAULT_INFLATE = 0.05


@dataclass
class CellFace:
    """One wall of a 3D cell: outward-oriented loop, separating neighbor (None
    for domain boundary), and the owning simplex id per vertex where known."""

    verts: np.ndarray
    neighbor: int | None
    vertex_simplices: list = field(default_factory=list)


@dataclass
class ControlVolume:
    owner: int
    closed: bool = True
    verts: np.ndarray | None = None          # 2D: (K, 2) CCW polygon
    edge_neighbors: list | None = None       # 2D: neighbor id per edge (None = domain)
    vertex_simplices: list | None = None     # 2D: simplex id per vertex (None = clip point)
    faces: list[CellFace] | None = None      # 3D

    @property
    def dim(self) -> int:
        return 2 if self.verts is not None else 3

    @property
    def empty(self) -> bool:
        if self.verts is not None:
            return len(self.verts) < 3
        return not self.faces

    def all_vertices(self) -> np.ndarray:
        if self.verts is not None:
            return self.verts
        if not self.faces:
            return np.empty((0, 3))
        return np.vstack([f.verts for f in self.faces])

    def measure(self) -> float:
        """Polygon area (2D) or polyhedron volume (3D)."""
        if self.verts is not None:
            v = self.verts
            if len(v) < 3:
                return 0.0
            return 0.5 * float(
                np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
            )
        total = 0.0
        for f in self.faces or []:
            v = f.verts
            for k in range(1, len(v) - 1):
                total += float(np.dot(v[0], np.cross(v[k], v[k + 1])))
        return total / 6.0

    def contains(self, p, margin: float = 0.0) -> bool:
        """Point-in-cell test; negative margin demands strict interiority."""
        p = np.asarray(p, dtype=float)
        if self.verts is not None:
            v = self.verts
            if len(v) < 3:
                return False
            w = np.roll(v, -1, axis=0)
            e = w - v
            ln = np.maximum(np.hypot(e[:, 0], e[:, 1]), 1e-300)
            cross = (e[:, 0] * (p[1] - v[:, 1]) - e[:, 1] * (p[0] - v[:, 0])) / ln
            return bool(np.all(cross >= -margin))
        for f in self.faces or []:
            n = _newell_normal(f.verts)
            nn = float(np.linalg.norm(n))
            if nn == 0.0:
                continue
            if float(np.dot(n, p - f.verts[0])) / nn > margin:
                return False
        return bool(self.faces)

    def contains_many(self, pts: np.ndarray, margin: float = 0.0) -> np.ndarray:
        """Vectorized contains() over an (M, dim) probe array."""
        if self.verts is not None:
            v = self.verts
            if len(v) < 3:
                return np.zeros(len(pts), dtype=bool)
            w = np.roll(v, -1, axis=0)
            e = w - v
            ln = np.maximum(np.hypot(e[:, 0], e[:, 1]), 1e-300)
            cross = (
                e[None, :, 0] * (pts[:, None, 1] - v[None, :, 1])
                - e[None, :, 1] * (pts[:, None, 0] - v[None, :, 0])
            ) / ln[None, :]
            return np.all(cross >= -margin, axis=1)
        if not self.faces:
            return np.zeros(len(pts), dtype=bool)
        ok = np.ones(len(pts), dtype=bool)
        for f in self.faces:
            n = _newell_normal(f.verts)
            nn = float(np.linalg.norm(n))
            if nn == 0.0:
                continue
            d = (pts - f.verts[0]) @ (n / nn)
            ok &= d <= margin
        return ok


@dataclass
class ControlVolumeMesh:
    dim: int
    points: np.ndarray
    radii: np.ndarray | None
    volumes: list[ControlVolume]
    domain: TaggedPolygon | TaggedPolyhedron
    simplices: np.ndarray | None = None
    simplex_vertices: np.ndarray | None = None   # (T, dim) candidate-vertex coords
    mode: str | None = None
    diagnostics: dict | None = None

    def cell(self, i: int) -> ControlVolume:
        return self.volumes[i]

    def total_measure(self) -> float:
        return float(sum(v.measure() for v in self.volumes))

    def domain_measure(self) -> float:
        return self.domain.area() if self.dim == 2 else self.domain.volume()

    def scale(self) -> float:
        verts = self.domain.verts if self.dim == 2 else self.domain.vertices()
        return float(np.linalg.norm(verts.max(axis=0) - verts.min(axis=0)))

    def shared_walls(self) -> dict[tuple[int, int], dict[int, np.ndarray]]:
        """Map (i, j), i < j, to each side's wall geometry (edge endpoints or
        face loop), taken from the wall tags."""
        walls: dict[tuple[int, int], dict[int, np.ndarray]] = {}
        for cell in self.volumes:
            i = cell.owner
            if self.dim == 2:
                if cell.verts is None or cell.empty:
                    continue
                v = cell.verts
                for k, j in enumerate(cell.edge_neighbors):
                    if j is None:
                        continue
                    key = (i, j) if i < j else (j, i)
                    seg = np.vstack([v[k], v[(k + 1) % len(v)]])
                    walls.setdefault(key, {})[i] = seg
            else:
                for f in cell.faces or []:
                    if f.neighbor is None:
                        continue
                    j = f.neighbor
                    key = (i, j) if i < j else (j, i)
                    walls.setdefault(key, {})[i] = f.verts
        return walls


def bounding_domain2(pts: np.ndarray, inflate: float = DEFAULT_INFLATE) -> TaggedPolygon:
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    pad = inflate * max(float((hi - lo).max()), 1e-12)
    return box_polygon(lo - pad, hi + pad)


def bounding_domain3(pts: np.ndarray, inflate: float = DEFAULT_INFLATE) -> TaggedPolyhedron:
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    pad = inflate * max(float((hi - lo).max()), 1e-12)
    return box_polyhedron(lo - pad, hi + pad)


def _power_bisector(pi, pj, ri, rj):
    """Half-space toward i: n . x <= c keeps power_i(x) <= power_j(x)."""
    n = 2.0 * (pj - pi)
    c = float(pj @ pj - pi @ pi) + ri * ri - rj * rj
    return n, c


def _reverse_polygon(poly: TaggedPolygon) -> TaggedPolygon:
    k = len(poly.verts)
    verts = poly.verts[::-1].copy()
    tags = [poly.tags[(k - 2 - m) % k] for m in range(k)]
    return TaggedPolygon(verts=verts, tags=tags)


def _check_convex2(owner: int, verts: np.ndarray, scale: float):
    k = len(verts)
    if k < 3:
        return
    w = np.roll(verts, -1, axis=0)
    e = w - verts
    ln = np.maximum(np.hypot(e[:, 0], e[:, 1]), 1e-300)
    cross = (e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)) / (ln * np.roll(ln, -1))
    if np.any(cross < -1e-9):
        raise NonConvexCell(owner, f"reflex corner, sin={cross.min():.3g}")


def _match_simplex_ids(verts: np.ndarray, q: np.ndarray, candidates, eps: float) -> list:
    ids = []
    for v in verts:
        found = None
        for t in candidates:
            if np.linalg.norm(q[t] - v) <= eps:
                found = int(t)
                break
        ids.append(found)
    return ids


def build_volumes2(tri: Triangulation2, nm: NeighborMap, pts=None, radii=None,
                   domain: TaggedPolygon | None = None) -> ControlVolumeMesh:
    """Assemble one convex cell per point from the triangle radical centers.

    Interior cells list the candidate vertex of each incident triangle in ring
    order; hull cells are the domain polygon cut by the power bisectors toward
    the ring neighbors. Every cell is clipped to the domain.
    """
    pts = tri.points if pts is None else pts
    r = radii.r if isinstance(radii, RadiusVector) else np.asarray(radii, dtype=float)
    systems = simplex_systems(tri)
    q = systems.vertices(r)
    domain = domain if domain is not None else bounding_domain2(pts)
    dverts = domain.verts
    scale = float(np.linalg.norm(dverts.max(axis=0) - dverts.min(axis=0)))
    eps = 1e-10 * scale
    match_eps = 1e-9 * scale
    domain_planes = polygon_halfplanes(dverts)

    volumes: list[ControlVolume] = []
    matched: set[int] = set()
    for i in range(len(pts)):
        ring = nm.rings[i]
        tids = nm.ring_simplices[i]
        if nm.closed[i]:
            verts = q[tids]
            m = len(ring)
            tags = [int(ring[(k + 1) % m]) for k in range(len(tids))]
            poly = TaggedPolygon(verts=verts.copy(), tags=tags)
            if poly.area() < 0.0:
                poly = _reverse_polygon(poly)
            # only clip cells that actually poke out of the domain
            for n, c in domain_planes:
                if poly is not None and np.any(poly.verts @ n - c > eps):
                    poly = clip_polygon(poly, n, c, None, eps)
        else:
            poly = TaggedPolygon(verts=dverts.copy(), tags=list(domain.tags))
            for u in ring:
                if poly is None:
                    break
                n, c = _power_bisector(pts[i], pts[int(u)], r[i], r[int(u)])
                poly = clip_polygon(poly, n, c, int(u), eps)

        if poly is None:
            volumes.append(ControlVolume(owner=i, closed=False,
                                         verts=np.empty((0, 2)), edge_neighbors=[],
                                         vertex_simplices=[]))
            continue
        _check_convex2(i, poly.verts, scale)
        ids = _match_simplex_ids(poly.verts, q, tids, match_eps)
        matched.update(t for t in ids if t is not None)
        volumes.append(ControlVolume(owner=i, closed=True, verts=poly.verts,
                                     edge_neighbors=list(poly.tags),
                                     vertex_simplices=ids))

    _check_orphans(q, matched, domain_planes, eps_inside=match_eps)
    return ControlVolumeMesh(
        dim=2, points=pts, radii=r, volumes=volumes, domain=domain,
        simplices=tri.triangles, simplex_vertices=q,
    )


def _check_orphans(q: np.ndarray, matched: set[int], planes, eps_inside: float):
    for t in range(len(q)):
        if t in matched:
            continue
        inside = all(float(q[t] @ n - c) < -eps_inside * np.linalg.norm(n) for n, c in planes)
        if inside:
            raise OrphanVertex(t)


def _face_loop_around_edge(i: int, j: int, q: np.ndarray, tet_ids, pts, eps: float):
    """Order the candidate vertices of all tetrahedra on edge (i, j) cyclically
    in the plane perpendicular to the edge; returns (loop, simplex ids)."""
    axis = pts[j] - pts[i]
    axis = axis / np.linalg.norm(axis)
    seed = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, seed)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    # sort around the vertex centroid: it is interior to the convex face loop,
    # unlike the edge midpoint, so angular order equals boundary order
    rel = q[tet_ids] - np.mean(q[tet_ids], axis=0)
    ang = np.arctan2(rel @ e2, rel @ e1)
    order = np.argsort(ang, kind="stable")
    loop = q[np.asarray(tet_ids)[order]]
    ids = [int(np.asarray(tet_ids)[k]) for k in order]
    keep_v: list[np.ndarray] = []
    keep_i: list[int] = []
    for v, t in zip(loop, ids):
        if keep_v and np.linalg.norm(v - keep_v[-1]) <= eps:
            continue
        keep_v.append(v)
        keep_i.append(t)
    if len(keep_v) > 1 and np.linalg.norm(keep_v[0] - keep_v[-1]) <= eps:
        keep_v.pop()
        keep_i.pop()
    if len(keep_v) < 3:
        return None, None
    return np.asarray(keep_v), keep_i


def _check_face_planarity(owner: int, face: CellFace, scale: float):
    v = face.verts
    n = _newell_normal(v)
    nn = float(np.linalg.norm(n))
    edge_scale = max(float(np.linalg.norm(v[k] - v[k - 1])) for k in range(len(v)))
    if nn == 0.0 or edge_scale == 0.0:
        return
    dev = float(np.max(np.abs((v - v[0]) @ (n / nn))))
    if dev > EPS_FACE * edge_scale:
        raise NonPlanarFace(owner, face.neighbor, dev)


def _check_convex3(owner: int, faces: list[CellFace], scale: float):
    allv = np.vstack([f.verts for f in faces])
    for f in faces:
        n = _newell_normal(f.verts)
        nn = float(np.linalg.norm(n))
        if nn == 0.0:
            continue
        d = (allv - f.verts[0]) @ (n / nn)
        if float(d.max()) > 1e-9 * scale:
            raise NonConvexCell(owner, f"vertex {d.max():.3g} outside face plane")


def build_volumes3(tet: Triangulation3, nm: NeighborMap, pts=None, radii=None,
                   domain: TaggedPolyhedron | None = None) -> ControlVolumeMesh:
    """3D analog of build_volumes2: the face toward neighbor j collects the
    candidate vertices of every tetrahedron on edge (i, j), ordered around the
    edge; hull cells are cut from the domain by power bisectors."""
    pts = tet.points if pts is None else pts
    r = radii.r if isinstance(radii, RadiusVector) else np.asarray(radii, dtype=float)
    systems = simplex_systems(tet)
    q = systems.vertices(r)
    domain = domain if domain is not None else bounding_domain3(pts)
    dv = domain.vertices()
    scale = float(np.linalg.norm(dv.max(axis=0) - dv.min(axis=0)))
    eps = 1e-10 * scale
    match_eps = 1e-9 * scale
    domain_planes = polyhedron_halfspaces(domain)

    volumes: list[ControlVolume] = []
    matched: set[int] = set()
    for i in range(len(pts)):
        star = nm.stars[i]
        star_ids = nm.star_simplices[i]
        neighbor_ids = np.unique(star) if len(star) else np.empty(0, dtype=np.int64)
        if not nm.on_hull[i]:
            faces = []
            for j in neighbor_ids:
                rows = np.nonzero(np.any(star == j, axis=1))[0]
                loop, ids = _face_loop_around_edge(i, int(j), q, star_ids[rows], pts, eps)
                if loop is None:
                    continue
                n = _newell_normal(loop)
                if float(np.dot(n, pts[int(j)] - pts[i])) < 0.0:
                    loop = loop[::-1]
                    ids = ids[::-1]
                faces.append(CellFace(verts=loop, neighbor=int(j), vertex_simplices=ids))
            poly = TaggedPolyhedron(faces=[TaggedFace(f.verts, f.neighbor) for f in faces])
            allv = poly.vertices()
            for n, c in domain_planes:
                if poly is not None and np.any(allv @ n - c > eps * np.linalg.norm(n)):
                    poly = clip_polyhedron(poly, n, c, None, eps)
                    if poly is None:
                        break
                    allv = poly.vertices()
        else:
            poly = domain
            for j in neighbor_ids:
                if poly is None:
                    break
                n, c = _power_bisector(pts[i], pts[int(j)], r[i], r[int(j)])
                poly = clip_polyhedron(poly, n, c, int(j), eps)

        if poly is None:
            volumes.append(ControlVolume(owner=i, closed=False, faces=[]))
            continue
        cell_faces = []
        incident = list(star_ids)
        for f in poly.faces:
            face = CellFace(verts=f.verts, neighbor=f.tag,
                            vertex_simplices=_match_simplex_ids(f.verts, q, incident, match_eps))
            _check_face_planarity(i, face, scale)
            cell_faces.append(face)
            matched.update(t for t in face.vertex_simplices if t is not None)
        _check_convex3(i, cell_faces, scale)
        volumes.append(ControlVolume(owner=i, closed=True, faces=cell_faces))

    _check_orphans(q, matched, domain_planes, eps_inside=match_eps)
    return ControlVolumeMesh(
        dim=3, points=pts, radii=r, volumes=volumes, domain=domain,
        simplices=tet.tetrahedra, simplex_vertices=q,
    )


@dataclass
class PerpendicularityReport:
    tol: float
    checked: int
    violations: list  # (owner, neighbor, deviation_radians)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_perpendicularity(mesh: ControlVolumeMesh, pts: np.ndarray | None = None,
                              tol: float = 1e-6) -> PerpendicularityReport:
    """Check every tagged wall against the local orthogonality condition: the
    wall must be perpendicular to the segment joining its two cell centers."""
    pts = mesh.points if pts is None else pts
    scale = mesh.scale()
    checked = 0
    violations = []
    for cell in mesh.volumes:
        i = cell.owner
        if mesh.dim == 2:
            if cell.verts is None or cell.empty:
                continue
            v = cell.verts
            for k, j in enumerate(cell.edge_neighbors):
                if j is None:
                    continue
                e = v[(k + 1) % len(v)] - v[k]
                ln = float(np.linalg.norm(e))
                if ln <= 1e-12 * scale:
                    continue
                axis = pts[j] - pts[i]
                cosang = abs(float(e @ axis)) / (ln * float(np.linalg.norm(axis)))
                dev = math.asin(min(1.0, cosang))
                checked += 1
                if dev > tol:
                    violations.append((i, int(j), dev))
        else:
            for f in cell.faces or []:
                if f.neighbor is None:
                    continue
                axis = pts[f.neighbor] - pts[i]
                axis = axis / np.linalg.norm(axis)
                v = f.verts
                worst = 0.0
                for k in range(len(v)):
                    e = v[(k + 1) % len(v)] - v[k]
                    ln = float(np.linalg.norm(e))
                    if ln <= 1e-12 * scale:
                        continue
                    worst = max(worst, abs(float(e @ axis)) / ln)
                dev = math.asin(min(1.0, worst))
                checked += 1
                if dev > tol:
                    violations.append((i, int(f.neighbor), dev))
    return PerpendicularityReport(tol=tol, checked=checked, violations=violations)


@dataclass
class GlobalReport:
    shared_wall_mismatches: list
    overlaps: list
    owners_outside: list
    foreign_points: list
    total_measure: float
    domain_measure: float
    probes: int

    @property
    def ok(self) -> bool:
        return not (
            self.shared_wall_mismatches or self.overlaps
            or self.owners_outside or self.foreign_points
        )


def validate_global(mesh: ControlVolumeMesh, probes: int = 10_000, seed: int = 0,
                    tol: float | None = None) -> GlobalReport:
    """Global mesh conditions: identical shared walls seen from both owners,
    sampled pairwise interior disjointness, each owner inside its own cell,
    and no foreign generator inside any cell."""
    scale = mesh.scale()
    tol = 1e-9 * scale if tol is None else tol
    pts = mesh.points

    mismatches = []
    for (i, j), sides in mesh.shared_walls().items():
        if len(sides) != 2:
            mismatches.append((i, j, "missing side"))
            continue
        a, b = sides[i], sides[j]
        if len(a) != len(b) or not _vertex_sets_match(a, b, tol):
            mismatches.append((i, j, "wall geometry differs"))

    rng = np.random.default_rng(seed)
    dverts = mesh.domain.verts if mesh.dim == 2 else mesh.domain.vertices()
    lo = dverts.min(axis=0)
    hi = dverts.max(axis=0)
    samples = lo + (hi - lo) * rng.random((probes, mesh.dim))
    hit = np.zeros(probes, dtype=np.int64)
    first_owner = np.full(probes, -1, dtype=np.int64)
    overlaps = []
    for cell in mesh.volumes:
        if cell.empty:
            continue
        inside = cell.contains_many(samples, margin=-tol)
        fresh = inside & (hit == 0)
        first_owner[fresh] = cell.owner
        clash = np.nonzero(inside & (hit > 0))[0]
        for m in clash:
            overlaps.append((int(m), int(first_owner[m]), cell.owner))
        hit[inside] += 1

    owners_outside = []
    foreign = []
    for cell in mesh.volumes:
        if cell.empty:
            owners_outside.append(cell.owner)
            continue
        if not cell.contains(pts[cell.owner], margin=-tol):
            owners_outside.append(cell.owner)
        inside = cell.contains_many(pts, margin=-tol)
        for j in np.nonzero(inside)[0]:
            if int(j) != cell.owner:
                foreign.append((cell.owner, int(j)))

    return GlobalReport(
        shared_wall_mismatches=mismatches,
        overlaps=overlaps,
        owners_outside=owners_outside,
        foreign_points=foreign,
        total_measure=mesh.total_measure(),
        domain_measure=mesh.domain_measure(),
        probes=probes,
    )


def _vertex_sets_match(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    used = np.zeros(len(b), dtype=bool)
    for v in a:
        d = np.linalg.norm(b - v, axis=1)
        d[used] = np.inf
        k = int(np.argmin(d))
        if d[k] > tol:
            return False
        used[k] = True
    return True
