"""Geodesic circles, circular arcs, circle-circle intersection, tangent
disks, and hyperbolic horoballs with horospherical width.

Circle-circle intersection on the curved surfaces is solved in the ambient
3-space: the two distance constraints are linear in the embedding, so the
intersection is a 2x2 linear solve plus one quadratic along the common
normal.  The Euclidean case uses the classical radical-line formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import (
    ConcentricCircles,
    DifferentIdealPoints,
    DomainError,
    EmptyBody,
    MismatchedGeometry,
    NestedViolation,
)
from .geometry import Geometry, HYPERBOLIC, Point

TANGENCY_TOL = 1e-9
TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap into [0, 2*pi)."""
    a = float(a) % TWO_PI
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True)
class Circle:
    center: Point
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("circle radius must be positive")
        # strict bound keeps spherical disks convex; the closed boundary case
        # (a great circle) is still measurable, e.g. for arc lengths
        if self.geometry.kappa == 1 and self.radius > math.pi / 2 + 1e-12:
            raise DomainError("spherical circle radius must stay below pi/2")
        e1, e2 = geo.frame(self.geometry, self.center.coords)
        object.__setattr__(self, "_e1", e1)
        object.__setattr__(self, "_e2", e2)

    @property
    def geometry(self) -> Geometry:
        return self.center.geometry

    def direction(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return (
            np.cos(theta)[..., None] * self._e1
            + np.sin(theta)[..., None] * self._e2
        )

    def point_at(self, theta) -> np.ndarray:
        """Coords of the circle point at frame angle theta (broadcasts)."""
        theta = np.asarray(theta, dtype=float)
        return geo.exp_map(
            self.geometry,
            self.center.coords,
            self.direction(theta),
            np.broadcast_to(self.radius, theta.shape),
        )

    def angle_of(self, coords) -> float:
        u, _ = geo.log_dir(self.geometry, self.center.coords, coords)
        g = self.geometry
        return wrap_angle(
            math.atan2(
                float(geo.tangent_dot(g, u, self._e2)),
                float(geo.tangent_dot(g, u, self._e1)),
            )
        )

    def circumference(self) -> float:
        return TWO_PI * radius_scale(self.geometry, self.radius)


def radius_scale(g: Geometry, r: float) -> float:
    """Arc length per unit subtended center angle: r, sin(r) or sinh(r)."""
    if g.kappa == 0:
        return r
    if g.kappa == 1:
        return math.sin(r)
    return math.sinh(r)


@dataclass(frozen=True)
class Arc:
    """Circular arc traversed counterclockwise in the center frame.

    ``a0`` is the frame angle of ``start``; the arc covers angles
    ``a0 .. a0 + extent`` with extent in (0, 2*pi].  A full circle is stored
    as start == end with extent exactly 2*pi.
    """

    circle: Circle
    start: Point
    end: Point
    a0: float
    extent: float

    def __post_init__(self):
        if not 0.0 < self.extent <= TWO_PI + 1e-12:
            raise DomainError(f"arc extent {self.extent} outside (0, 2*pi]")
        g = self.circle.geometry
        for p in (self.start, self.end):
            gap = abs(
                float(geo.distance(g, p.coords, self.circle.center.coords))
                - self.circle.radius
            )
            if gap > 1e-8:
                raise DomainError("arc endpoint does not lie on its circle")

    @classmethod
    def from_angles(cls, circle: Circle, a0: float, extent: float) -> "Arc":
        a0 = wrap_angle(a0)
        g = circle.geometry
        start = Point(g, circle.point_at(a0))
        if abs(extent - TWO_PI) < 1e-12:
            return cls(circle, start, start, a0, TWO_PI)
        end = Point(g, circle.point_at(a0 + extent))
        return cls(circle, start, end, a0, extent)

    @classmethod
    def from_endpoints(cls, circle: Circle, start: Point, end: Point,
                       orientation: str = "ccw") -> "Arc":
        sa = circle.angle_of(start.coords)
        ea = circle.angle_of(end.coords)
        if orientation == "ccw":
            extent = wrap_angle(ea - sa)
            a0 = sa
        elif orientation == "cw":
            extent = wrap_angle(sa - ea)
            a0 = ea
            start, end = end, start
        else:
            raise DomainError("orientation must be 'ccw' or 'cw'")
        if extent == 0.0:
            extent = TWO_PI
        return cls(circle, start, end, a0, extent)

    @classmethod
    def full_circle(cls, circle: Circle) -> "Arc":
        return cls.from_angles(circle, 0.0, TWO_PI)

    @property
    def geometry(self) -> Geometry:
        return self.circle.geometry

    @property
    def is_full_circle(self) -> bool:
        return self.extent >= TWO_PI - 1e-12

    def angles(self, n: int, endpoint: bool = False) -> np.ndarray:
        if endpoint:
            return self.a0 + np.linspace(0.0, self.extent, n)
        return self.a0 + (np.arange(n) + 0.5) * (self.extent / n)

    def sample(self, n: int, endpoint: bool = False) -> np.ndarray:
        return self.circle.point_at(self.angles(n, endpoint))

    def contains_angle(self, theta, tol: float = 1e-12):
        rel = np.asarray(theta - self.a0) % TWO_PI
        return (rel <= self.extent + tol) | (rel >= TWO_PI - tol)

    def midpoint(self) -> np.ndarray:
        return self.circle.point_at(self.a0 + self.extent / 2.0)

    def tangent_at(self, theta: float) -> np.ndarray:
        """Unit tangent in the ccw traversal direction at frame angle theta."""
        g = self.geometry
        x = self.circle.point_at(theta)
        u, _ = geo.log_dir(g, x, self.circle.center.coords)
        # interior of the disk on the left of the traversal
        return -geo.rot90(g, x, u)


def arc_length(a: Arc) -> float:
    return a.extent * radius_scale(a.geometry, a.circle.radius)


# ---------------------------------------------------------------------------
# Intersection


def _side_of_geodesic(g: Geometry, a, b, x) -> float:
    """Positive when x is on the left of the oriented geodesic a -> b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    if g.kappa == 0:
        u = b - a
        v = x - a
        return float(u[0] * v[1] - u[1] * v[0])
    return float(np.linalg.det(np.stack([a, b, x])))


def circle_intersect(c1: Circle, c2: Circle) -> list[Point]:
    """Intersection points of two circle boundaries, left-of-axis first.

    Returns zero, one (tangency within 1e-9) or two points.  The ordering is
    by side of the oriented geodesic from c1's center to c2's center.
    """
    if c1.geometry != c2.geometry:
        raise MismatchedGeometry("circle_intersect needs a common geometry")
    g = c1.geometry
    p1 = c1.center.coords
    p2 = c2.center.coords
    d = float(geo.distance(g, p1, p2))
    if d < 1e-12:
        raise ConcentricCircles("circles share their center")
    if g.kappa == 1 and d > math.pi - 1e-12:
        raise DomainError("spherical circle centers must not be antipodal")

    r1, r2 = c1.radius, c2.radius
    # tangency window measured in center distance, per the analytic predicate
    # |r1 - r2| < d < r1 + r2
    tangency = min(abs(d - (r1 + r2)), abs(d - abs(r1 - r2))) <= TANGENCY_TOL
    if not tangency and not abs(r1 - r2) < d < r1 + r2:
        return []

    if g.kappa == 0:
        a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d)
        h_sq = r1 * r1 - a * a
        axis = (p2 - p1) / d
        base = p1 + a * axis
        perp = np.array([-axis[1], axis[0]])
    else:
        b12 = float(geo.ambient_dot(g, p1, p2))
        if g.kappa == 1:
            t1, t2 = math.cos(r1), math.cos(r2)
            n = np.cross(p1, p2)
            nn = float(np.dot(n, n))
        else:
            t1, t2 = math.cosh(r1), math.cosh(r2)
            n = np.diag([-1.0, -1.0, 1.0]) @ np.cross(p1, p2)
            nn = float(geo.bilinear_form(n, n))
        det = 1.0 - b12 * b12
        alpha = (t1 - b12 * t2) / det
        beta = (t2 - b12 * t1) / det
        base = alpha * p1 + beta * p2
        s = alpha * t1 + beta * t2  # = form(base, base)
        h_sq = (1.0 - s) / nn
        perp = n

    if tangency:
        return [Point(g, normalize_or_pass(g, base))]
    h = math.sqrt(max(h_sq, 0.0))
    cands = [normalize_or_pass(g, base + h * perp), normalize_or_pass(g, base - h * perp)]
    cands.sort(key=lambda x: -_side_of_geodesic(g, p1, p2, x))
    return [Point(g, x) for x in cands]


def normalize_or_pass(g: Geometry, x) -> np.ndarray:
    return x if g.kappa == 0 else geo.normalize_point(g, x)


def tangent_disks(p: Point, rho: float, q: Point, D: float) -> list[Circle]:
    """The two radius-D disks containing B(p, rho), internally tangent to its
    boundary, and passing through q; ordered left/right of the geodesic pq."""
    geo.check_same_geometry(p, q)
    g = p.geometry
    d = float(geo.distance(g, p.coords, q.coords))
    if not 0 < rho < D:
        raise DomainError("tangent_disks requires 0 < rho < D")
    if not rho < d < 2 * D - rho:
        raise DomainError(
            f"tangent_disks requires rho < d(p,q) < 2D - rho, got d = {d}"
        )
    centers = circle_intersect(Circle(p, D - rho), Circle(q, D))
    if len(centers) != 2:
        raise DomainError("tangent disk centers degenerate at the window edge")
    return [Circle(z, D) for z in centers]


def internal_tangency_point(g: Geometry, p, rho: float, disk_center) -> np.ndarray:
    """Touch point of B(p, rho) inside a larger disk: beyond p, away from the
    big disk's center, at distance rho."""
    u, _ = geo.log_dir(g, p, disk_center)
    return geo.exp_map(g, p, -u, rho)


# ---------------------------------------------------------------------------
# Horoballs (hyperbolic only)


def ideal_point(phi: float) -> np.ndarray:
    """Null direction (cos phi, sin phi, 1) indexing the ideal boundary."""
    return np.array([math.cos(phi), math.sin(phi), 1.0])


def ideal_from_direction(z, v) -> np.ndarray:
    """Ideal point of the geodesic from z along unit tangent v."""
    w = np.asarray(z, dtype=float) + np.asarray(v, dtype=float)
    if w[2] <= 0:
        raise DomainError("direction does not reach the ideal boundary")
    return w / w[2]


@dataclass(frozen=True)
class Horoball:
    """Region B(z, w) >= level for a null direction w (e-component 1)."""

    ideal: np.ndarray
    level: float

    def __post_init__(self):
        w = np.asarray(self.ideal, dtype=float)
        if abs(w[2] - 1.0) > 1e-9:
            w = w / w[2]
        object.__setattr__(self, "ideal", geo._freeze(w))
        if abs(float(geo.bilinear_form(w, w))) > 1e-9:
            raise DomainError("ideal direction must be null for the Lorentz form")
        if self.level <= 0:
            raise DomainError("horoball level must be positive")

    def contains(self, x) -> bool:
        return bool(geo.bilinear_form(x, self.ideal) >= self.level - 1e-12)


def horoball_width(outer: Horoball, inner: Horoball) -> float:
    """Distance between the two horospheres: level ratio r/s = e^d."""
    if np.max(np.abs(outer.ideal - inner.ideal)) > 1e-9:
        raise DifferentIdealPoints("horoballs sit at different ideal points")
    if inner.level < outer.level:
        raise NestedViolation("inner horoball must be the deeper one")
    return math.log(inner.level / outer.level)


def _busemann_range_on_arc(arc: Arc, w) -> tuple[float, float]:
    """Closed-form min/max of B(., w) over the arc.

    Restricted to a circle the Lorentz pairing is a pure sinusoid in the
    frame angle, so the extrema are the endpoint values plus any interior
    phase-critical points.
    """
    c = arc.circle
    g = arc.geometry
    A = math.cosh(c.radius) * float(geo.bilinear_form(c.center.coords, w))
    C = math.sinh(c.radius) * float(geo.bilinear_form(c._e1, w))
    S = math.sinh(c.radius) * float(geo.bilinear_form(c._e2, w))
    del g

    def value(theta):
        return A + C * math.cos(theta) + S * math.sin(theta)

    cands = [value(arc.a0), value(arc.a0 + arc.extent)]
    phase = math.atan2(S, C)
    for crit in (phase, phase + math.pi):
        if bool(arc.contains_angle(crit)):
            cands.append(value(crit))
    return min(cands), max(cands)


def horospherical_width(body, ideal) -> float:
    """Width of the thinnest horoball shell at ``ideal`` containing the body:
    log of the ratio of the extreme Busemann levels over the boundary."""
    if body.geometry != HYPERBOLIC:
        raise MismatchedGeometry("horospherical width is a hyperbolic notion")
    if not body.arcs:
        raise EmptyBody("body has no boundary arcs")
    w = np.asarray(ideal, dtype=float)
    if abs(float(geo.bilinear_form(w, w))) > 1e-9:
        raise DomainError("ideal direction must be null")
    lo = math.inf
    hi = -math.inf
    for arc in body.arcs:
        a, b = _busemann_range_on_arc(arc, w)
        lo = min(lo, a)
        hi = max(hi, b)
    return math.log(hi / lo)


def horospherical_width_of_points(points, ideal) -> float:
    w = np.asarray(ideal, dtype=float)
    vals = [float(geo.bilinear_form(np.asarray(p, dtype=float), w)) for p in points]
    return math.log(max(vals) / min(vals))
