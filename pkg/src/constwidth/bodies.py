"""Disk-polygon bodies: intersections of equal-radius geodesic disks, their
arc boundaries, diameter, radii, Hausdorff distance, completeness tests and
the constructive completion.

A body is stored as its counterclockwise boundary arc chain plus the defining
disk centers.  Uniform bodies (``uniform=True``) are exactly the intersection
of radius-``width`` disks around their centers; the arc-chain constructor
also admits mixed radii for the tilde constructions, where the boundary is
primary and membership works by ray shooting from an interior point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import geometry as geo
from .circles import (
    Arc,
    Circle,
    TWO_PI,
    arc_length,
    radius_scale,
    wrap_angle,
)
from .errors import (
    CertificationFailure,
    DegenerateIntersection,
    DiameterExceeded,
    DomainError,
    EmptyIntersection,
    MismatchedGeometry,
    NonConvergence,
    ValidationError,
)
from .geometry import Geometry, Point

MEMBER_TOL = 1e-9
ANGLE_TOL = 1e-12


def _key(coords) -> tuple:
    return tuple(round(float(c), 12) for c in np.asarray(coords).ravel())


def dedupe_points(coords: np.ndarray, decimals: int = 12) -> np.ndarray:
    seen: set = set()
    keep: list[int] = []
    for i in range(coords.shape[0]):
        k = tuple(np.round(coords[i], decimals))
        if k not in seen:
            seen.add(k)
            keep.append(i)
    return coords[keep]


def pairwise_diameter(g: Geometry, coords: np.ndarray,
                      chunk: int = 1024) -> tuple[float, tuple]:
    """Max pairwise distance of a finite point set, with the witness pair.

    Works on a monotone surrogate score evaluated by matrix products (the
    Lorentz pairing, the negated dot product, or the squared chord), then
    recomputes the exact distance for the winning pair only.
    """
    n = coords.shape[0]
    if n < 2:
        return 0.0, (coords[0], coords[0]) if n else (None, None)
    if g.kappa == -1:
        paired = coords @ np.diag([-1.0, -1.0, 1.0])
    elif g.kappa == 1:
        paired = -coords
    else:
        paired = -2.0 * coords
        sq = np.sum(coords * coords, axis=1)
    best = -math.inf
    bi = bj = 0
    for lo in range(0, n, chunk):
        rows = coords[lo: lo + chunk]
        score = rows @ paired.T
        if g.kappa == 0:
            score = score + sq[lo: lo + chunk, None] + sq[None, :]
        i, j = np.unravel_index(np.argmax(score), score.shape)
        if float(score[i, j]) > best:
            best = float(score[i, j])
            bi, bj = lo + int(i), int(j)
    return (
        float(geo.distance(g, coords[bi], coords[bj])),
        (coords[bi], coords[bj]),
    )


@dataclass(frozen=True)
class DiskPolygon:
    geometry: Geometry
    width: float
    centers: tuple[Point, ...]
    arcs: tuple[Arc, ...]
    vertices: tuple[Point, ...]
    active: tuple[bool, ...]
    interior: Point
    uniform: bool

    def __post_init__(self):
        object.__setattr__(
            self, "_centers_arr", np.array([c.coords for c in self.centers])
        )
        if self.vertices:
            varr = np.array([v.coords for v in self.vertices])
        else:
            varr = np.zeros((0, self.geometry.dim))
        object.__setattr__(self, "_vertices_arr", varr)
        # star-shaped lookup: angle of each arc start as seen from interior
        if not (len(self.arcs) == 1 and self.arcs[0].is_full_circle):
            psis = []
            for a in self.arcs:
                u, _ = geo.log_dir(self.geometry, self.interior.coords, a.start.coords)
                e1, e2 = geo.frame(self.geometry, self.interior.coords)
                psis.append(
                    math.atan2(
                        float(geo.tangent_dot(self.geometry, u, e2)),
                        float(geo.tangent_dot(self.geometry, u, e1)),
                    )
                )
            object.__setattr__(self, "_arc_psi", np.array([wrap_angle(p) for p in psis]))
        else:
            object.__setattr__(self, "_arc_psi", np.zeros(1))

    # -- basic queries ------------------------------------------------------

    @property
    def is_ball(self) -> bool:
        return len(self.arcs) == 1 and self.arcs[0].is_full_circle

    def active_centers(self) -> np.ndarray:
        return self._centers_arr[np.array(self.active, dtype=bool)]

    def perimeter(self) -> float:
        return sum(arc_length(a) for a in self.arcs)

    def boundary_samples(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """About n points spread by arc length: (coords, arc_index, angles)."""
        lengths = np.array([arc_length(a) for a in self.arcs])
        total = float(np.sum(lengths))
        coords, idx, angs = [], [], []
        for i, a in enumerate(self.arcs):
            ni = max(4, int(round(n * lengths[i] / total)))
            th = a.angles(ni)
            coords.append(a.circle.point_at(th))
            idx.append(np.full(ni, i))
            angs.append(th)
        return np.concatenate(coords), np.concatenate(idx), np.concatenate(angs)

    def _ray_exit(self, psi: np.ndarray) -> np.ndarray:
        """Distance from the interior point to the boundary along direction psi."""
        g = self.geometry
        q = self.interior.coords
        if self.is_ball:
            c = self.arcs[0].circle
            if float(geo.distance(g, q, c.center.coords)) < 1e-12:
                return np.full(psi.shape, c.radius)
        order = np.argsort(self._arc_psi)
        breaks = self._arc_psi[order]
        rel = np.asarray(psi) % TWO_PI
        pos = np.searchsorted(breaks, rel, side="right") - 1
        pos[pos < 0] = len(breaks) - 1
        arc_of = order[pos]
        e1, e2 = geo.frame(g, q)
        dirs = np.cos(rel)[:, None] * e1 + np.sin(rel)[:, None] * e2
        out = np.empty(rel.shape)
        for i, a in enumerate(self.arcs):
            mask = arc_of == i
            if not np.any(mask):
                continue
            out[mask] = _ray_circle_exit(
                g, q, dirs[mask], a.circle.center.coords, a.circle.radius
            )
        return out

    def contains(self, coords, tol: float = MEMBER_TOL):
        """Membership test; broadcasts over a leading axis."""
        coords = np.asarray(coords, dtype=float)
        single = coords.ndim == 1
        pts = coords[None, :] if single else coords
        g = self.geometry
        if self.uniform:
            d = geo.distance(g, pts[:, None, :], self._centers_arr[None, :, :])
            res = np.all(d <= self.width + tol, axis=1)
            return bool(res[0]) if single else res
        q = self.interior.coords
        t = geo.distance(g, q, pts)
        res = np.zeros(t.shape, dtype=bool)
        near = t < 1e-12
        res[near] = True
        # points near the antipode of the interior point cannot be members
        workable = ~near if g.kappa != 1 else (~near) & (t < math.pi - 1e-6)
        if np.any(workable):
            raw, _ = geo.log_map(g, np.broadcast_to(q, pts[workable].shape), pts[workable])
            u = geo.normalize_tangent(g, raw)
            e1, e2 = geo.frame(g, q)
            psi = np.arctan2(geo.tangent_dot(g, u, e2), geo.tangent_dot(g, u, e1))
            res[workable] = t[workable] <= self._ray_exit(psi) + tol
        return bool(res[0]) if single else res

    def distance_to_boundary_from_outside(self, coords) -> np.ndarray:
        """Geodesic distance from points to the body (0 for members)."""
        pts = np.asarray(coords, dtype=float)
        g = self.geometry
        best = np.full(pts.shape[0], np.inf)
        for a in self.arcs:
            best = np.minimum(best, _point_to_arc(g, pts, a))
        best[self.contains(pts)] = 0.0
        return best


def _ray_circle_exit(g: Geometry, q, dirs: np.ndarray, c, r: float) -> np.ndarray:
    """First positive ray parameter where exp(q, dir, t) hits the circle
    (c, r); q must be inside the circle."""
    a = float(geo.distance(g, q, c))
    if a < 1e-14:
        return np.full(dirs.shape[0], r)
    u_c, _ = geo.log_dir(g, q, c)
    cosg = np.clip(geo.tangent_dot(g, dirs, u_c), -1.0, 1.0)
    if g.kappa == 0:
        disc = np.sqrt(np.maximum(r * r - a * a * (1 - cosg**2), 0.0))
        return a * cosg + disc
    if g.kappa == 1:
        A = math.cos(a)
        B = np.sin(a) * cosg
        M = np.sqrt(A * A + B * B)
        phi0 = np.arctan2(B, A)
        return phi0 + np.arccos(np.clip(math.cos(r) / M, -1.0, 1.0))
    A = math.cosh(a)
    B = np.sinh(a) * cosg
    M = np.sqrt(np.maximum(A * A - B * B, 1e-300))
    psi = np.arctanh(np.clip(B / A, -1 + 1e-15, 1 - 1e-15))
    return psi + np.arccosh(np.maximum(math.cosh(r) / M, 1.0))


def _point_to_arc(g: Geometry, pts: np.ndarray, arc: Arc) -> np.ndarray:
    """Exact distance from each point to the arc: clamp the circle foot point
    to the angular window, else take the endpoints."""
    c = arc.circle
    d = geo.distance(g, pts, c.center.coords)
    radial = np.abs(d - c.radius)
    coincident = d < 1e-12
    foot_ok = np.zeros(pts.shape[0], dtype=bool)
    phi = np.zeros(pts.shape[0])
    mask = ~coincident
    if g.kappa == 1:
        mask = mask & (d < math.pi - 1e-6)
    if np.any(mask):
        raw, _ = geo.log_map(
            g, np.broadcast_to(c.center.coords, pts[mask].shape), pts[mask]
        )
        u = geo.normalize_tangent(g, raw)
        phi_m = np.arctan2(
            geo.tangent_dot(g, u, c._e2), geo.tangent_dot(g, u, c._e1)
        )
        phi[mask] = phi_m
        foot_ok[mask] = arc.contains_angle(phi_m)
    if arc.is_full_circle:
        foot_ok[:] = ~coincident
    out = np.where(foot_ok, radial, np.inf)
    for endpoint in (arc.start, arc.end):
        out = np.minimum(out, geo.distance(g, pts, endpoint.coords))
    out[coincident] = c.radius
    return out


# ---------------------------------------------------------------------------
# Builder


def _half_width(g: Geometry, r: float, R: float, d):
    """Half the angular window of a radius-r circle inside a radius-R disk
    whose center sits at distance d (broadcasts over d); nan when the window
    is empty, pi when the circle is swallowed whole."""
    d = np.asarray(d, dtype=float)
    if g.kappa == 0:
        val = (r * r + d * d - R * R) / (2.0 * r * d)
    elif g.kappa == 1:
        val = (math.cos(R) - np.cos(r) * np.cos(d)) / (math.sin(r) * np.sin(d))
    else:
        val = (math.cosh(r) * np.cosh(d) - math.cosh(R)) / (
            math.sinh(r) * np.sinh(d)
        )
    out = np.arccos(np.clip(val, -1.0, 1.0))
    out = np.where(val > 1.0 + 1e-12, np.nan, out)
    return np.where(val < -1.0 - 1e-12, math.pi, out)


def _projected_mean(g: Geometry, coords: np.ndarray) -> np.ndarray:
    m = np.mean(coords, axis=0)
    if g.kappa == 0:
        return m
    return geo.normalize_point(g, m)


def _bulk_frames(g: Geometry, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized per-center orthonormal tangent frames (same convention as
    geometry.frame)."""
    m = centers.shape[0]
    if g.kappa == 0:
        e1 = np.tile(np.array([1.0, 0.0]), (m, 1))
        e2 = np.tile(np.array([0.0, 1.0]), (m, 1))
        return e1, e2
    seed = np.array([1.0, 0.0, 0.0])
    e1 = geo.project_tangent(g, centers, np.broadcast_to(seed, centers.shape))
    norms = geo.tangent_norm(g, e1)
    weak = norms < 1e-6
    if np.any(weak):
        alt = geo.project_tangent(
            g, centers[weak], np.broadcast_to(np.array([0.0, 1.0, 0.0]), centers[weak].shape)
        )
        e1[weak] = alt
        norms = geo.tangent_norm(g, e1)
    e1 = e1 / norms[:, None]
    return e1, geo.rot90(g, centers, e1)


def _t_boundary_vertices(g: Geometry, coords: np.ndarray, D: float,
                         block: int = 2048) -> np.ndarray:
    """Arc endpoints of T(coords) = intersection of radius-D balls, without
    building the body (used by the fixpoint completeness margin, where the
    center count runs into the thousands).

    Everything reduces to matrix products: the pairing matrix drives the
    half-width formula, and because the frame vectors are tangent at their
    base point, the frame angle of the log direction toward another point
    only needs the pairing of that point with the frame vectors.
    """
    m = coords.shape[0]
    e1s, e2s = _bulk_frames(g, coords)
    if g.kappa == -1:
        J3 = np.array([1.0, 1.0, -1.0])  # -B(x, v) = x . (J3-flipped v)
        fe1 = e1s * J3
        fe2 = e2s * J3
        paired = coords * np.array([-1.0, -1.0, 1.0])
    elif g.kappa == 1:
        fe1, fe2 = e1s, e2s
        paired = coords
    else:
        fe1, fe2 = e1s, e2s
        paired = coords
        sq = np.sum(coords * coords, axis=1)
    mid_x_full = coords @ fe1.T  # (m, m): [k, j] = form component of k at frame j
    mid_y_full = coords @ fe2.T

    coshD, sinhD = None, None
    if g.kappa == -1:
        coshD, sinhD = math.cosh(D), math.sinh(D)
    elif g.kappa == 1:
        coshD, sinhD = math.cos(D), math.sin(D)

    los, his, active_j = [], [], []
    for lo_i in range(0, m, block):
        rows = coords[lo_i: lo_i + block]
        Jn = rows.shape[0]
        pairing = rows @ paired.T  # (Jn, m)
        with np.errstate(invalid="ignore", divide="ignore"):
            if g.kappa == -1:
                val = coshD * (pairing - 1.0) / (
                    sinhD * np.sqrt(np.maximum(pairing**2 - 1.0, 0.0))
                )
            elif g.kappa == 1:
                val = coshD * (1.0 - pairing) / (
                    sinhD * np.sqrt(np.maximum(1.0 - pairing**2, 0.0))
                )
            else:
                dsq = np.maximum(
                    sq[lo_i: lo_i + Jn, None] + sq[None, :] - 2.0 * pairing, 0.0
                )
                val = np.sqrt(dsq) / (2.0 * D)
        idx = np.arange(Jn)
        diag = lo_i + idx
        empty = val > 1.0 + 1e-12
        empty[idx, diag] = False
        if np.any(empty):
            raise EmptyIntersection("two defining disks are disjoint")
        hws = np.arccos(np.clip(val, -1.0, 1.0))
        hws[idx, diag] = math.pi  # self-constraint is vacuous
        if g.kappa == 0:
            # flat frames are the standard basis but not base-point-free
            mids = np.arctan2(
                coords[None, :, 1] - rows[:, 1][:, None],
                coords[None, :, 0] - rows[:, 0][:, None],
            )
        else:
            mids = np.arctan2(
                mid_y_full[:, lo_i: lo_i + Jn].T, mid_x_full[:, lo_i: lo_i + Jn].T
            )
        ref = np.argmin(hws, axis=1)
        ref_mid = mids[idx, ref]
        rel = mids
        rel -= ref_mid[:, None]
        rel += math.pi
        np.mod(rel, TWO_PI, out=rel)
        rel -= math.pi
        lo_b = rel - hws
        hi_b = rel
        hi_b += hws
        lo_b[idx, diag] = -math.pi
        hi_b[idx, diag] = math.pi
        low = np.max(lo_b, axis=1)
        high = np.min(hi_b, axis=1)
        keep = high - low > 1e-9
        for k in np.nonzero(keep)[0]:
            los.append(float(ref_mid[k] + low[k]))
            his.append(float(ref_mid[k] + high[k]))
            active_j.append(lo_i + int(k))
    if not active_j:
        return np.zeros((0, coords.shape[1]))
    jj = np.array(active_j)
    angs = np.concatenate([np.array(los), np.array(his)])
    jj2 = np.concatenate([jj, jj])
    dirs = np.cos(angs)[:, None] * e1s[jj2] + np.sin(angs)[:, None] * e2s[jj2]
    return geo.exp_map(g, coords[jj2], dirs, np.full(jj2.shape[0], D))


def build(centers, D: float, geometry: Geometry | None = None) -> DiskPolygon:
    """Intersection body of the radius-D disks around ``centers``.

    Boundary extraction: on each circle the feasible set (inside all other
    disks) is a single angular interval because the body is convex; the
    surviving arcs are stitched counterclockwise around the interior point.
    """
    pts, g = _coerce_points(centers, geometry)
    if D <= 0:
        raise DomainError("width must be positive")
    if g.kappa == 1 and D >= math.pi / 2:
        raise DomainError("spherical width must stay below pi/2")
    coords = dedupe_points(pts)
    m = coords.shape[0]
    if m == 0:
        raise EmptyIntersection("no centers given")
    if m == 1:
        return ball_body(g, coords[0], D, width=D)

    circles = [Circle(Point(g, coords[j]), D) for j in range(m)]

    intervals: list[tuple[float, float] | None] = []
    for j in range(m):
        others = np.arange(m) != j
        rest = coords[others]
        d_row = geo.distance(g, coords[j], rest)
        hws = _half_width(g, D, D, d_row)
        if np.any(np.isnan(hws)):
            raise EmptyIntersection("two defining disks are disjoint")
        cj = circles[j]
        raw, _ = geo.log_map(g, np.broadcast_to(coords[j], rest.shape), rest)
        u = geo.normalize_tangent(g, raw)
        mids = np.arctan2(
            geo.tangent_dot(g, u, cj._e2), geo.tangent_dot(g, u, cj._e1)
        )
        ref = int(np.argmin(hws))
        rel = (mids - mids[ref] + math.pi) % TWO_PI - math.pi
        lo = float(np.max(rel - hws))
        hi = float(np.min(rel + hws))
        if hi - lo <= 1e-9:
            intervals.append(None)  # redundant or tangent circle
        else:
            intervals.append((mids[ref] + lo, hi - lo))

    active = [iv is not None for iv in intervals]
    if not any(active):
        probe = _projected_mean(g, coords)
        worst = float(np.max(geo.distance(g, probe, coords)))
        if worst <= D + 1e-9:
            raise DegenerateIntersection("intersection has empty interior")
        raise EmptyIntersection("disks have empty common intersection")

    interior_coords = _projected_mean(g, coords)
    if float(np.max(geo.distance(g, interior_coords, coords))) > D - 1e-12:
        vert_guess = []
        for j, iv in enumerate(intervals):
            if iv is not None:
                vert_guess.append(circles[j].point_at(iv[0]))
                vert_guess.append(circles[j].point_at(iv[0] + iv[1]))
        interior_coords = _projected_mean(g, np.array(vert_guess))
        if float(np.max(geo.distance(g, interior_coords, coords))) > D - 1e-15:
            raise DegenerateIntersection("could not locate an interior point")
    interior = Point(g, interior_coords)

    raw_arcs = [
        (j, iv[0], iv[1]) for j, iv in enumerate(intervals) if iv is not None
    ]
    e1, e2 = geo.frame(g, interior_coords)

    def psi_of(coordsxy):
        u, _ = geo.log_dir(g, interior_coords, coordsxy)
        return wrap_angle(
            math.atan2(
                float(geo.tangent_dot(g, u, e2)), float(geo.tangent_dot(g, u, e1))
            )
        )

    raw_arcs.sort(key=lambda t: psi_of(circles[t[0]].point_at(t[1] + t[2] / 2.0)))
    start_i = min(
        range(len(raw_arcs)), key=lambda i: _key(coords[raw_arcs[i][0]])
    )
    raw_arcs = raw_arcs[start_i:] + raw_arcs[:start_i]

    # canonical vertices: snap shared endpoints to the version computed on the
    # lexicographically smaller circle, then refit both adjacent angles
    n = len(raw_arcs)
    verts: list[Point] = []
    for i in range(n):
        j_prev, a_prev, e_prev = raw_arcs[i - 1]
        j_next, a_next, _ = raw_arcs[i]
        p_prev = circles[j_prev].point_at(a_prev + e_prev)
        p_next = circles[j_next].point_at(a_next)
        gap = float(geo.distance(g, p_prev, p_next))
        if gap > 1e-6:
            raise DegenerateIntersection(
                f"boundary chain does not close (gap {gap:.2e})"
            )
        pick = p_prev if _key(coords[j_prev]) <= _key(coords[j_next]) else p_next
        verts.append(Point(g, pick))

    arcs: list[Arc] = []
    for i in range(n):
        j, a0, ext = raw_arcs[i]
        v_start = verts[i]
        v_end = verts[(i + 1) % n]
        sa = circles[j].angle_of(v_start.coords)
        ea = circles[j].angle_of(v_end.coords)
        extent = wrap_angle(ea - sa)
        if extent == 0.0:
            extent = TWO_PI
        arcs.append(Arc(circles[j], v_start, v_end, sa, extent))
        del a0, ext

    centers_pts = tuple(Point(g, coords[j]) for j in range(m))
    return DiskPolygon(
        geometry=g,
        width=D,
        centers=centers_pts,
        arcs=tuple(arcs),
        vertices=tuple(verts),
        active=tuple(active),
        interior=interior,
        uniform=True,
    )


def _coerce_points(points, geometry: Geometry | None) -> tuple[np.ndarray, Geometry]:
    if isinstance(points, np.ndarray) and geometry is not None:
        return np.asarray(points, dtype=float), geometry
    pts = list(points)
    if pts and isinstance(pts[0], Point):
        g = pts[0].geometry
        for p in pts:
            if p.geometry != g:
                raise MismatchedGeometry("mixed geometries in center list")
        return np.array([p.coords for p in pts]), g
    if geometry is None:
        raise DomainError("raw coordinate input needs an explicit geometry")
    return np.asarray(pts, dtype=float), geometry


def ball_body(g: Geometry, center, radius: float, width: float | None = None) -> DiskPolygon:
    """Single-disk body; ``width`` defaults to the disk radius."""
    c = Point(g, center)
    circle = Circle(c, radius)
    return DiskPolygon(
        geometry=g,
        width=radius if width is None else width,
        centers=(c,),
        arcs=(Arc.full_circle(circle),),
        vertices=(),
        active=(True,),
        interior=c,
        uniform=(width is None or width == radius),
    )


def chain_body(g: Geometry, width: float, arcs: list[Arc], interior: Point,
               centers: tuple[Point, ...] | None = None) -> DiskPolygon:
    """Body given directly by its ccw boundary chain (mixed radii allowed)."""
    for i, a in enumerate(arcs):
        nxt = arcs[(i + 1) % len(arcs)]
        if float(geo.distance(g, a.end.coords, nxt.start.coords)) > 1e-7:
            raise ValidationError("arc chain is not closed")
        if float(geo.distance(g, interior.coords, a.circle.center.coords)) >= a.circle.radius:
            raise ValidationError("interior point must lie inside every arc circle")
    return DiskPolygon(
        geometry=g,
        width=width,
        centers=centers if centers is not None else tuple(a.circle.center for a in arcs),
        arcs=tuple(arcs),
        vertices=tuple(a.start for a in arcs),
        active=tuple(True for _ in arcs),
        interior=interior,
        uniform=False,
    )


# ---------------------------------------------------------------------------
# Diameter


def _far_point_on_circle(g: Geometry, x, circle: Circle):
    d = float(geo.distance(g, x, circle.center.coords))
    if d < 1e-12:
        return None, circle.radius
    u, _ = geo.log_dir(g, circle.center.coords, x)
    phi = wrap_angle(
        math.atan2(
            float(geo.tangent_dot(g, u, circle._e2)),
            float(geo.tangent_dot(g, u, circle._e1)),
        )
        + math.pi
    )
    return phi, d + circle.radius


def diameter_witness(body: DiskPolygon) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Exact diameter over the arc structure plus an attaining pair.

    Critical configurations: vertex-vertex, vertex against the far point of
    an arc (when that point is interior to the arc), the two outward points
    of an arc pair along the geodesic through both centers, and the 2r chord
    of any arc spanning more than a half circle.
    """
    g = body.geometry
    if body.is_ball:
        c = body.arcs[0].circle
        return 2 * c.radius, (c.point_at(0.0), c.point_at(math.pi))

    best = -1.0
    pair = None
    varr = body._vertices_arr
    if varr.shape[0] >= 2:
        dm = geo.distance(g, varr[:, None, :], varr[None, :, :])
        i, j = np.unravel_index(np.argmax(dm), dm.shape)
        best, pair = float(dm[i, j]), (varr[i], varr[j])

    for a in body.arcs:
        c = a.circle
        if varr.shape[0]:
            # vertex vs interior far point of this arc, vectorized per arc
            dv = geo.distance(g, varr, c.center.coords)
            ok = dv > 1e-12
            if np.any(ok):
                raw, _ = geo.log_map(
                    g, np.broadcast_to(c.center.coords, varr[ok].shape), varr[ok]
                )
                u = geo.normalize_tangent(g, raw)
                phis = np.arctan2(
                    geo.tangent_dot(g, u, c._e2), geo.tangent_dot(g, u, c._e1)
                ) + math.pi
                vals = np.where(a.contains_angle(phis), dv[ok] + c.radius, -np.inf)
                k = int(np.argmax(vals))
                if vals[k] > best:
                    y = c.point_at(float(phis[k]))
                    v = varr[ok][k]
                    val = float(geo.distance(g, v, y))
                    if val > best:
                        best, pair = val, (v, y)
        if a.extent >= math.pi and 2 * c.radius > best:
            t0 = a.a0 + (a.extent - math.pi) / 2.0
            best = 2 * c.radius
            pair = (c.point_at(t0), c.point_at(t0 + math.pi))

    arcs = body.arcs
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            ci, cj = arcs[i].circle, arcs[j].circle
            d = float(geo.distance(g, ci.center.coords, cj.center.coords))
            if d < 1e-12:
                continue
            val = d + ci.radius + cj.radius
            if val <= best:
                continue
            phi_i, _ = _far_point_on_circle(g, cj.center.coords, ci)
            phi_j, _ = _far_point_on_circle(g, ci.center.coords, cj)
            if arcs[i].contains_angle(phi_i) and arcs[j].contains_angle(phi_j):
                x = ci.point_at(phi_i)
                y = cj.point_at(phi_j)
                val = float(geo.distance(g, x, y))
                if val > best:
                    best, pair = val, (x, y)
    return best, pair


def diameter(body: DiskPolygon) -> float:
    return diameter_witness(body)[0]


def t_operator(points, D: float, geometry: Geometry | None = None) -> DiskPolygon:
    """Intersection of the radius-D balls centered at the given points.

    Requires the input set itself to have diameter at most D; the output
    always contains the input points.
    """
    coords, g = _coerce_points(points, geometry)
    dm, _ = pairwise_diameter(g, coords)
    if dm > D + 1e-9:
        raise DiameterExceeded(f"input diameter {dm} exceeds {D}")
    body = build(coords, D, g)
    if not bool(np.all(body.contains(coords, tol=1e-7))):
        raise DegenerateIntersection("t_operator output does not contain its input")
    return body


# ---------------------------------------------------------------------------
# Hausdorff distance


def _directed_hausdorff(a: DiskPolygon, b: DiskPolygon, n: int, refine: bool) -> float:
    coords, idx, angs = a.boundary_samples(n)
    dists = b.distance_to_boundary_from_outside(coords)
    best = float(np.max(dists))
    if not refine:
        return best
    order = np.argsort(dists)[::-1]
    seen_arcs = set()
    g = a.geometry
    for k in order[:6]:
        ai = int(idx[k])
        if ai in seen_arcs:
            continue
        seen_arcs.add(ai)
        arc = a.arcs[ai]
        step = arc.extent / max(4, int(round(n * arc_length(arc) / max(a.perimeter(), 1e-300))))

        def negdist(theta):
            p = arc.circle.point_at(np.array([theta]))
            return -float(b.distance_to_boundary_from_outside(p)[0])

        lo = max(arc.a0, angs[k] - step)
        hi = min(arc.a0 + arc.extent, angs[k] + step)
        if hi - lo < 1e-15:
            continue
        res = optimize.minimize_scalar(
            negdist, bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-13},
        )
        best = max(best, -float(res.fun))
    return best


def hausdorff(b1: DiskPolygon, b2: DiskPolygon, n: int = 2048, refine: bool = True) -> float:
    """Hausdorff distance via dense boundary sampling with local refinement
    of the leading maxima (point-to-arc distances are exact)."""
    if b1.geometry != b2.geometry:
        raise MismatchedGeometry("hausdorff needs a common geometry")
    return max(
        _directed_hausdorff(b1, b2, n, refine),
        _directed_hausdorff(b2, b1, n, refine),
    )


# ---------------------------------------------------------------------------
# Minimax location solver (circumdisk, indisk, enclosing disk of points)


def _chart(g: Geometry, base):
    e1, e2 = geo.frame(g, base)

    def to_point(xi):
        r = math.hypot(xi[0], xi[1])
        if r < 1e-300:
            return np.asarray(base, dtype=float)
        u = (xi[0] * e1 + xi[1] * e2) / r
        return geo.exp_map(g, base, u, r)

    return to_point


def _minimize_scalar_field(g: Geometry, f, starts, xatol=1e-8) -> tuple[np.ndarray, float]:
    # the Newton polish supplies the final digits; Nelder-Mead only needs to
    # land inside its basin
    best_p, best_v = None, math.inf
    for s in starts:
        to_point = _chart(g, s)
        res = optimize.minimize(
            lambda xi: f(to_point(xi)),
            x0=np.zeros(2),
            method="Nelder-Mead",
            options={
                "xatol": xatol,
                "fatol": 1e-14,
                "maxiter": 250,
                "initial_simplex": np.array([[0.0, 0.0], [0.02, 0.0], [0.0, 0.02]]),
            },
        )
        if res.fun < best_v:
            best_v = float(res.fun)
            best_p = to_point(res.x)
    return best_p, best_v


def _polish_equalize(g: Geometry, p0, anchors, offsets, sense: int):
    """Newton-polish the minimax location: equalize the active feature values
    (distance + offset), with the two-feature case pinned by opposite
    gradients (angle pi at p)."""
    anchors = [np.asarray(a, dtype=float) for a in anchors]
    to_point = _chart(g, p0)

    if len(anchors) >= 3:
        a0, a1, a2 = anchors[:3]
        o0, o1, o2 = offsets[:3]

        def residual(xi):
            p = to_point(xi)
            v0 = float(geo.distance(g, p, a0)) * sense + o0
            v1 = float(geo.distance(g, p, a1)) * sense + o1
            v2 = float(geo.distance(g, p, a2)) * sense + o2
            return [v1 - v0, v2 - v0]
    elif len(anchors) == 2:
        a0, a1 = anchors[:2]
        o0, o1 = offsets[:2]

        def residual(xi):
            p = to_point(xi)
            v0 = float(geo.distance(g, p, a0)) * sense + o0
            v1 = float(geo.distance(g, p, a1)) * sense + o1
            ang = float(geo.angle(g, a0, p, a1))
            return [v1 - v0, ang - math.pi]
    else:
        return None
    try:
        sol = optimize.root(residual, np.zeros(2), method="hybr", tol=1e-14)
    except (ValueError, FloatingPointError):
        return None
    if not sol.success and float(np.max(np.abs(sol.fun))) > 1e-9:
        return None
    return to_point(sol.x)


def _circumdisk_objective(body: DiskPolygon):
    g = body.geometry
    varr = body._vertices_arr
    arcs = body.arcs

    def f(p):
        best = 0.0
        if varr.shape[0]:
            best = float(np.max(geo.distance(g, varr, p)))
        for a in arcs:
            phi, val = _far_point_on_circle(g, p, a.circle)
            if val > best and (phi is None or a.contains_angle(phi) or a.is_full_circle):
                best = val
        return best

    def features(p):
        out = []
        if varr.shape[0]:
            dv = geo.distance(g, varr, p)
            for i in range(varr.shape[0]):
                out.append((float(dv[i]), varr[i], 0.0, varr[i]))
        for a in arcs:
            phi, val = _far_point_on_circle(g, p, a.circle)
            if phi is None or a.contains_angle(phi) or a.is_full_circle:
                touch = a.circle.point_at(phi) if phi is not None else a.circle.point_at(0.0)
                out.append((float(val), a.circle.center.coords, a.circle.radius, touch))
        return out

    return f, features


def circumdisk(body: DiskPolygon, starts: int = 32) -> tuple[Point, float]:
    """Minimum enclosing geodesic disk of the body.

    Multistart local descent on the exact boundary-max function, Newton
    polishing on the active features, then a touching-point certificate:
    at least two touch points with the center in their convex hull.
    """
    g = body.geometry
    if body.is_ball:
        c = body.arcs[0].circle
        return c.center, c.radius
    f, features = _circumdisk_objective(body)
    start_pts = _star_starts(g, body.interior.coords, body.width, starts)
    p, val = _minimize_scalar_field(g, f, start_pts)
    p, val = _apply_polish(g, f, features, p, val, sense=1)
    _certify_circumdisk(g, features, p, val)
    return Point(g, p), val


def _star_starts(g: Geometry, center, scale: float, n: int):
    pts = [np.asarray(center, dtype=float)]
    e1, e2 = geo.frame(g, center)
    k = 0
    radii = [0.05 * scale, 0.18 * scale]
    while len(pts) < n:
        ring = radii[k % 2]
        ang = (k * 2.399963229728653) % TWO_PI  # golden-angle spiral
        u = math.cos(ang) * e1 + math.sin(ang) * e2
        pts.append(geo.exp_map(g, center, u, ring))
        k += 1
    return pts


def _apply_polish(g, f, features, p, val, sense):
    feats = sorted(features(p), key=lambda t: -sense * t[0])
    if not feats:
        return p, val
    top = feats[0][0]
    active = [ft for ft in feats if abs(ft[0] - top) <= 3e-6]
    if len(active) >= 2:
        polished = _polish_equalize(
            g, p, [ft[1] for ft in active], [sense * ft[2] for ft in active], sense
        )
        if polished is not None:
            v2 = f(polished)
            if (sense == 1 and v2 <= val + 1e-12) or (sense == -1 and v2 >= val - 1e-12):
                return polished, v2
    return p, val


def _certify_circumdisk(g, features, p, radius, tol: float = 1e-7):
    feats = features(p)
    touches = [ft[3] for ft in feats if abs(ft[0] - radius) <= tol]
    if len(feats) == 1:  # single full circle
        return
    if len(touches) < 2:
        raise CertificationFailure("fewer than two touching points at the optimum")
    e1, e2 = geo.frame(g, p)
    angs = []
    for t in touches:
        u, _ = geo.log_dir(g, p, t)
        angs.append(math.atan2(
            float(geo.tangent_dot(g, u, e2)), float(geo.tangent_dot(g, u, e1))
        ))
    angs = np.sort(np.mod(angs, TWO_PI))
    gaps = np.diff(np.concatenate([angs, [angs[0] + TWO_PI]]))
    max_gap = float(np.max(gaps))
    if max_gap <= math.pi - 1e-9:
        return
    if max_gap <= math.pi + 1e-3:
        # diametral two-point certificate: p lies on the touch segment
        best = math.inf
        pts = touches
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                gap = abs(
                    float(geo.distance(g, pts[i], p))
                    + float(geo.distance(g, p, pts[j]))
                    - float(geo.distance(g, pts[i], pts[j]))
                )
                best = min(best, gap)
        if best <= tol:
            return
    raise CertificationFailure("touching points do not surround the center")


def indisk(body: DiskPolygon) -> tuple[Point, float]:
    """A maximal inscribed disk: maximize the smallest slack r_j - d(p, c_j)
    over the boundary-arc circles (for a uniform body this is exactly
    width minus the circumradius of the defining center set)."""
    g = body.geometry
    if body.is_ball:
        c = body.arcs[0].circle
        return c.center, c.radius
    if body.uniform:
        anchors = body._centers_arr
        radii = np.full(anchors.shape[0], body.width)
    else:
        anchors = np.array([a.circle.center.coords for a in body.arcs])
        radii = np.array([a.circle.radius for a in body.arcs])

    def f(p):  # minimized: -(min slack)
        return -float(np.min(radii - geo.distance(g, anchors, p)))

    def features(p):
        vals = radii - geo.distance(g, anchors, p)
        return [
            (float(vals[i]), anchors[i], float(radii[i]), anchors[i])
            for i in range(anchors.shape[0])
        ]

    start_pts = _star_starts(g, body.interior.coords, 0.3 * body.width, 16)
    p, val = _minimize_scalar_field(g, f, start_pts)
    r = -val

    feats = sorted(features(p), key=lambda t: t[0])
    active = [ft for ft in feats if abs(ft[0] - r) <= 3e-6]
    if len(active) >= 2:
        # slack r_j - d equals distance * (-1) + r_j
        polished = _polish_equalize(
            g, p, [ft[1] for ft in active], [ft[2] for ft in active], -1
        )
        if polished is not None and -f(polished) >= r - 1e-12:
            p, r = polished, -f(polished)
    return Point(g, p), r


def enclosing_disk_of_points(g: Geometry, coords: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimum enclosing geodesic disk of a finite point set."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape[0] == 1:
        return coords[0], 0.0

    def f(p):
        return float(np.max(geo.distance(g, coords, p)))

    def features(p):
        dv = geo.distance(g, coords, p)
        return [(float(dv[i]), coords[i], 0.0, coords[i]) for i in range(coords.shape[0])]

    c0 = _projected_mean(g, coords)
    starts = _star_starts(g, c0, max(f(c0), 1e-6), 8)
    p, val = _minimize_scalar_field(g, f, starts)
    p, val = _apply_polish(g, f, features, p, val, sense=1)
    return p, val


# ---------------------------------------------------------------------------
# Completeness


def body_max_distance(body: DiskPolygon, z) -> float:
    """max over the body of the distance to z (the farthest-point value)."""
    f, _ = _circumdisk_objective(body)
    return f(np.asarray(z, dtype=float))


def is_complete(body: DiskPolygon, mode: str = "farthest", tol: float = 1e-7,
                samples: int = 256) -> tuple[bool, float]:
    """Constant-width test; returns (verdict, worst margin).

    farthest: every boundary point must realize max distance exactly width.
    dekster: the inward geodesic of length width from every boundary point
    (against the outer normal) must land inside the body.
    fixpoint: the body must reproduce itself as the intersection of
    width-balls centered at its own (sampled) points.
    """
    g = body.geometry
    D = body.width
    if mode == "farthest":
        coords, _, _ = body.boundary_samples(samples)
        f, _ = _circumdisk_objective(body)
        margin = max(abs(f(c) - D) for c in coords)
        return margin <= tol, margin
    if mode == "dekster":
        coords, idx, _ = body.boundary_samples(samples)
        targets = [np.zeros((0, g.dim))]
        for i, a in enumerate(body.arcs):
            mask = idx == i
            if not np.any(mask):
                continue
            raw, _ = geo.log_map(
                g,
                coords[mask],
                np.broadcast_to(a.circle.center.coords, coords[mask].shape),
            )
            u = geo.normalize_tangent(g, raw)
            # outer normal is -u; walk along +u (inward) for length D
            targets.append(geo.exp_map(g, coords[mask], u, np.full(u.shape[0], D)))
        # at a vertex the outer normals form a cone between the two adjacent
        # arc normals; every direction in the cone needs its inward chord
        arcs = body.arcs
        for i, v in enumerate(body.vertices):
            a_in = arcs[i - 1]
            a_out = arcs[i]
            n1, _ = geo.log_dir(g, v.coords, a_in.circle.center.coords)
            n2, _ = geo.log_dir(g, v.coords, a_out.circle.center.coords)
            # inward chord directions sweep from n1 to n2 (both point inward)
            c = float(np.clip(geo.tangent_dot(g, n1, n2), -1.0, 1.0))
            span = math.acos(c)
            if span < 1e-12:
                continue
            perp = geo.normalize_tangent(g, n2 - c * n1)
            ts = np.linspace(0.0, span, 24)
            dirs = np.cos(ts)[:, None] * n1 + np.sin(ts)[:, None] * perp
            targets.append(
                geo.exp_map(g, np.broadcast_to(v.coords, dirs.shape), dirs,
                            np.full(dirs.shape[0], D))
            )
        all_targets = np.concatenate(targets)
        margin = float(np.max(body.distance_to_boundary_from_outside(all_targets)))
        # Dekster's definition also fixes the diameter at D
        margin = max(margin, abs(diameter(body) - D))
        return margin <= tol, margin
    if mode == "fixpoint":
        # delta_H(body, T(vertices + arc samples)).  The sample spacing keeps
        # the envelope bulge of T below tol for exactly complete bodies (the
        # bulge is about 0.11 * spacing^2 / D); the bulge peaks at T's
        # vertices, so the outward direction only needs those, while any
        # inward defect already shows up as a diameter excess of the samples.
        spacing = math.sqrt(4.0 * D * tol)
        n = int(min(max(512, math.ceil(body.perimeter() / spacing)), 20000))
        coords, _, _ = body.boundary_samples(n)
        pts = np.concatenate([body._vertices_arr, coords]) if body._vertices_arr.size else coords
        dm, _ = pairwise_diameter(g, pts)
        if dm > D + 1e-9:
            return False, dm - D
        tverts = _t_boundary_vertices(g, dedupe_points(pts), D)
        if tverts.shape[0] == 0:
            return True, 0.0
        margin = float(np.max(body.distance_to_boundary_from_outside(tverts)))
        return margin <= tol, margin
    raise DomainError(f"unknown completeness mode {mode!r}")


def complete(points, D: float, geometry: Geometry | None = None,
             max_rounds: int = 200, tol: float = 5e-9) -> DiskPolygon:
    """Grow a finite point set into a complete body of width D containing it.

    Each round carves the outer bound T(S) by adopting one endpoint of its
    diametral pair as a new center.  When no boundary pair exceeds D the
    intersection equals T of itself, which is exactly completeness; for
    degenerate inputs whose enclosing disk already fits in a half-width ball
    the completion is that ball.
    """
    coords, g = _coerce_points(points, geometry)
    coords = dedupe_points(coords)
    dm, _ = pairwise_diameter(g, coords)
    if dm > D + 1e-9:
        raise DiameterExceeded(f"input diameter {dm} exceeds {D}")
    c0, r0 = enclosing_disk_of_points(g, coords)
    if r0 <= D / 2.0 + 1e-12:
        return ball_body(g, c0, D / 2.0, width=D)

    pts = [coords[i] for i in range(coords.shape[0])]
    body = build(np.array(pts), D, g)
    excess = math.inf
    for _ in range(max_rounds):
        dmv, pair = diameter_witness(body)
        excess = dmv - D
        if excess <= tol:
            return body
        z = min(pair, key=_key)
        pts.append(np.asarray(z, dtype=float))
        body = build(np.array(pts), D, g)
    raise NonConvergence(
        f"completion did not converge after {max_rounds} rounds", margin=excess
    )


def apply_isometry(body: DiskPolygon, iso: geo.Isometry) -> DiskPolygon:
    """Image of the body under an isometry (chain order flips for
    orientation-reversing maps)."""
    g = body.geometry
    if iso.geometry != g:
        raise MismatchedGeometry("isometry geometry mismatch")
    if body.uniform:
        return build(iso.apply(body._centers_arr), body.width, g)
    flip = not iso.orientation_preserving
    arcs = []
    src = body.arcs[::-1] if flip else body.arcs
    for a in src:
        c = Circle(Point(g, iso.apply(a.circle.center.coords)), a.circle.radius)
        s = Point(g, iso.apply((a.end if flip else a.start).coords))
        e = Point(g, iso.apply((a.start if flip else a.end).coords))
        sa = c.angle_of(s.coords)
        ea = c.angle_of(e.coords)
        ext = wrap_angle(ea - sa)
        if ext == 0.0:
            ext = TWO_PI
        arcs.append(Arc(c, s, e, sa, ext))
    return chain_body(
        g, body.width, arcs, Point(g, iso.apply(body.interior.coords))
    )


# ---------------------------------------------------------------------------
# Serialization (JSON body format)


def body_to_dict(body: DiskPolygon) -> dict:
    out = {
        "geometry": body.geometry.name,
        "width": body.width,
        "centers": [[float(x) for x in c.coords] for c in body.centers],
    }
    if not body.uniform:
        out["arcs"] = [
            {
                "center": [float(x) for x in a.circle.center.coords],
                "radius": float(a.circle.radius),
                "start": [float(x) for x in a.start.coords],
                "end": [float(x) for x in a.end.coords],
                "orientation": "ccw",
            }
            for a in body.arcs
        ]
        out["interior"] = [float(x) for x in body.interior.coords]
    return out


def body_from_dict(data: dict) -> DiskPolygon:
    from .geometry import GEOMETRIES

    try:
        g = GEOMETRIES[data["geometry"]]
        width = float(data["width"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed body file: {exc}") from exc
    if width <= 0 or (g.kappa == 1 and width >= math.pi / 2):
        raise ValidationError("width out of range for the geometry")
    if "arcs" in data:
        arcs = []
        for spec in data["arcs"]:
            c = Circle(Point(g, np.asarray(spec["center"], dtype=float)),
                       float(spec["radius"]))
            s = Point(g, geo.normalize_point(g, np.asarray(spec["start"], dtype=float))
                      if g.kappa != 0 else np.asarray(spec["start"], dtype=float))
            e = Point(g, geo.normalize_point(g, np.asarray(spec["end"], dtype=float))
                      if g.kappa != 0 else np.asarray(spec["end"], dtype=float))
            arcs.append(Arc.from_endpoints(c, s, e, spec.get("orientation", "ccw")))
        if "interior" in data:
            interior = Point(g, np.asarray(data["interior"], dtype=float))
        else:
            interior = Point(g, _projected_mean(g, np.array([a.start.coords for a in arcs])))
        centers = tuple(Point(g, np.asarray(c, dtype=float)) for c in data.get("centers", []))
        return chain_body(g, width, arcs, interior, centers or None)
    centers = np.asarray(data.get("centers", []), dtype=float)
    if centers.ndim != 2 or centers.shape[0] == 0:
        raise ValidationError("body file needs a non-empty centers list")
    if g.kappa != 0:
        centers = geo.normalize_point(g, centers)
    return build(centers, width, g)
