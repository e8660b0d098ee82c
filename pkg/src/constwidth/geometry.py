"""Metric kernel for the three surfaces of constant curvature.

The sphere is the unit sphere in R^3, the hyperbolic plane is the upper
sheet of the unit hyperboloid with the Lorentz form
``B(x, y) = x3*y3 - x1*y1 - x2*y2`` (last coordinate is the time-like one),
and the Euclidean plane uses plain R^2 coordinates.  Everything downstream
branches on the curvature sign stored in :class:`Geometry`.

All functions accept and return plain ``numpy`` arrays at the ambient
dimension (2 for the plane, 3 otherwise); the :class:`Point` /
:class:`TangentVec` wrappers carry the geometry tag for the public API.
Array-shaped inputs broadcast over the leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AntipodalPoints,
    CoincidentPoints,
    DomainError,
    MismatchedGeometry,
    NonUnitTangent,
    ProjectionPole,
)

# Arguments of arccos/arccosh/arcsin are clamped when within CLAMP_TOL of the
# valid domain; anything further out raises DomainError.
CLAMP_TOL = 1e-9
POINT_TOL = 1e-12


@dataclass(frozen=True)
class Geometry:
    """Curvature tag: kappa = -1 (hyperbolic), 0 (Euclidean), +1 (spherical)."""

    kappa: int

    def __post_init__(self):
        if self.kappa not in (-1, 0, 1):
            raise DomainError(f"kappa must be -1, 0 or +1, got {self.kappa}")

    @property
    def name(self) -> str:
        return {-1: "hyperbolic", 0: "euclidean", 1: "spherical"}[self.kappa]

    @property
    def dim(self) -> int:
        return 2 if self.kappa == 0 else 3

    def __repr__(self):
        return f"Geometry({self.name})"


EUCLIDEAN = Geometry(0)
SPHERICAL = Geometry(1)
HYPERBOLIC = Geometry(-1)

GEOMETRIES = {"euclidean": EUCLIDEAN, "spherical": SPHERICAL, "hyperbolic": HYPERBOLIC}


def _as_array(coords) -> np.ndarray:
    return np.asarray(coords, dtype=float)


def bilinear_form(x, y):
    """Lorentz pairing ``ts - <x0, y0>`` on ambient R^3 (e = last coordinate)."""
    x = _as_array(x)
    y = _as_array(y)
    return x[..., 2] * y[..., 2] - x[..., 0] * y[..., 0] - x[..., 1] * y[..., 1]


def ambient_dot(g: Geometry, x, y):
    """The pairing whose level set defines the surface: <.,.> or B(.,.)."""
    x = _as_array(x)
    y = _as_array(y)
    if g.kappa == -1:
        return bilinear_form(x, y)
    return np.sum(x * y, axis=-1)


def tangent_dot(g: Geometry, u, v):
    """Scalar product on tangent spaces: <.,.> for E2/S2 and -B(.,.) for H2."""
    if g.kappa == -1:
        return -bilinear_form(u, v)
    return np.sum(_as_array(u) * _as_array(v), axis=-1)


def tangent_norm(g: Geometry, u):
    sq = tangent_dot(g, u, u)
    return np.sqrt(np.maximum(sq, 0.0))


def normalize_point(g: Geometry, x) -> np.ndarray:
    """Re-project onto the model surface.

    Sphere: divide by the Euclidean norm.  Hyperboloid: re-lift the e-component
    from the spatial part, x_t = sqrt(1 + x1^2 + x2^2); unlike dividing by
    sqrt(B(x,x)) this has no cancellation for points with large coordinates.
    """
    x = _as_array(x)
    if g.kappa == 0:
        return x
    if g.kappa == 1:
        q = np.sum(x * x, axis=-1)
        if np.any(q <= 0):
            raise DomainError("cannot normalize the zero vector onto the sphere")
        return x / np.sqrt(q)[..., None]
    if np.any(x[..., 2] <= 0):
        raise DomainError("cannot normalize onto the upper hyperboloid sheet")
    out = np.array(x, dtype=float, copy=True)
    out[..., 2] = np.sqrt(1.0 + out[..., 0] ** 2 + out[..., 1] ** 2)
    return out


def normalize_tangent(g: Geometry, u) -> np.ndarray:
    u = _as_array(u)
    n = tangent_norm(g, u)
    if np.any(n < 1e-15):
        raise DomainError("cannot normalize zero tangent vector")
    return u / n[..., None]


def project_tangent(g: Geometry, z, v) -> np.ndarray:
    """Project an ambient vector onto the tangent space at z."""
    v = _as_array(v)
    if g.kappa == 0:
        return v
    return v - ambient_dot(g, v, z)[..., None] * _as_array(z)


def reference_point(g: Geometry) -> np.ndarray:
    """Origin / north pole / hyperboloid apex, the shared base frame point."""
    if g.kappa == 0:
        return np.zeros(2)
    return np.array([0.0, 0.0, 1.0])


def _clamp(value, lo, hi, what):
    value = np.asarray(value, dtype=float)
    if np.any(value < lo - CLAMP_TOL) or np.any(value > hi + CLAMP_TOL):
        bad = float(np.max(np.abs(value)))
        raise DomainError(f"{what} argument {bad} outside [{lo}, {hi}]")
    return np.clip(value, lo, hi)


def on_surface(g: Geometry, x, tol=POINT_TOL) -> bool:
    x = _as_array(x)
    if g.kappa == 0:
        return x.shape[-1] == 2
    if x.shape[-1] != 3:
        return False
    err = np.abs(ambient_dot(g, x, x) - 1.0)
    if g.kappa == -1 and np.any(x[..., 2] < 1.0 - tol):
        return False
    return bool(np.all(err <= tol * 10))


def distance(g: Geometry, x, y):
    """Geodesic distance, broadcasting over leading axes.

    The spherical branch is the paper's chordal ``2 asin(|x-y|/2)`` in the
    equivalent atan2 form, accurate at both ends of [0, pi].  The hyperbolic
    branch uses the chordal ``2 asinh`` form near zero (where arccosh(B)
    loses half the digits) and arccosh(B(x, y)) for separated points (where
    the chordal form suffers cancellation between e^t-sized coordinates).
    """
    x = _as_array(x)
    y = _as_array(y)
    d = x - y
    if g.kappa == 0:
        return np.sqrt(np.sum(d * d, axis=-1))
    if g.kappa == 1:
        s = x + y
        chord = np.sqrt(np.sum(d * d, axis=-1))
        cochord = np.sqrt(np.sum(s * s, axis=-1))
        return 2.0 * np.arctan2(chord, cochord)
    b = bilinear_form(x, y)
    q = -bilinear_form(d, d)  # = 2(B(x,y) - 1) = 4 sinh^2(d/2)
    near = 2.0 * np.arcsinh(np.sqrt(np.maximum(q, 0.0)) / 2.0)
    far = np.arccosh(np.maximum(b, 1.0))
    return np.where(b < 1.5, near, far)


def exp_map(g: Geometry, z, u, t):
    """Point at arc length t along the unit tangent u from z."""
    z = _as_array(z)
    u = _as_array(u)
    t = np.asarray(t, dtype=float)
    if g.kappa == 0:
        return z + t[..., None] * u
    if g.kappa == 1:
        p = z * np.cos(t)[..., None] + u * np.sin(t)[..., None]
    else:
        p = z * np.cosh(t)[..., None] + u * np.sinh(t)[..., None]
    return normalize_point(g, p)


def log_map(g: Geometry, z, x):
    """Inverse of exp_map: unit direction(s) at z toward x and the distance.

    Raises CoincidentPoints / AntipodalPoints where the direction is undefined.
    """
    z = _as_array(z)
    x = _as_array(x)
    t = distance(g, z, x)
    if np.any(np.asarray(t) < 1e-13):
        if np.ndim(t) == 0:
            raise CoincidentPoints("log_map at coincident points")
        raise CoincidentPoints("log_map batch contains coincident points")
    if g.kappa == 1 and np.any(np.asarray(t) > math.pi - 1e-9):
        raise AntipodalPoints("log_map at antipodal points")
    if g.kappa == 0:
        return x - z, t  # raw, unnormalized; log_dir normalizes
    if g.kappa == 1:
        raw = x - z * np.cos(t)[..., None]
    else:
        raw = x - z * np.cosh(t)[..., None]
    return raw, t


def log_dir(g: Geometry, z, x):
    """Unit tangent at z pointing toward x (with the distance)."""
    raw, t = log_map(g, z, x)
    return normalize_tangent(g, raw), t


def angle(g: Geometry, x, y, z):
    """Angle at y between the geodesic segments [y,x] and [y,z], in [0, pi]."""
    u, _ = log_dir(g, y, x)
    v, _ = log_dir(g, y, z)
    c = tangent_dot(g, u, v)
    return np.arccos(_clamp(c, -1.0, 1.0, "arccos"))


def rot90(g: Geometry, z, u) -> np.ndarray:
    """Rotate tangent u at z by +90 degrees (counterclockwise orientation)."""
    u = _as_array(u)
    if g.kappa == 0:
        return np.stack([-u[..., 1], u[..., 0]], axis=-1)
    w = np.cross(_as_array(z), u)
    if g.kappa == 1:
        return w
    # Lorentz analogue: flip the spatial sign so -B(., .) stays positive.
    return -w * np.array([-1.0, -1.0, 1.0])


def frame(g: Geometry, z):
    """Deterministic orthonormal tangent basis (e1, e2) at z, e2 = rot90(e1)."""
    z = _as_array(z)
    if g.kappa == 0:
        return np.array([1.0, 0.0]), np.array([0.0, 1.0])
    e1 = project_tangent(g, z, np.array([1.0, 0.0, 0.0]))
    n = float(tangent_norm(g, e1))
    if n < 1e-6:  # only possible on S2 near the poles of the x-axis
        e1 = project_tangent(g, z, np.array([0.0, 1.0, 0.0]))
        n = float(tangent_norm(g, e1))
    e1 = e1 / n
    return e1, rot90(g, z, e1)


def side_from_cosines(a: float, b: float, gamma: float, g: Geometry) -> float:
    """Side opposite the angle gamma in a triangle with adjacent sides a, b."""
    if a <= 0 or b <= 0:
        raise DomainError("triangle sides must be positive")
    if not -CLAMP_TOL <= gamma <= math.pi + CLAMP_TOL:
        raise DomainError("included angle must lie in [0, pi]")
    gamma = min(max(gamma, 0.0), math.pi)
    if g.kappa == 1 and a + b >= math.pi:
        raise DomainError("spherical triangle needs a + b < pi")
    cg = math.cos(gamma)
    if g.kappa == 0:
        return math.sqrt(max(a * a + b * b - 2 * a * b * cg, 0.0))
    if g.kappa == 1:
        cc = math.cos(a) * math.cos(b) + math.sin(a) * math.sin(b) * cg
        return math.acos(float(_clamp(cc, -1.0, 1.0, "arccos")))
    ch = math.cosh(a) * math.cosh(b) - math.sinh(a) * math.sinh(b) * cg
    return math.acosh(max(ch, 1.0))


def regular_triangle_circumradius(D: float, g: Geometry) -> float:
    """Circumradius of the regular triangle of side D (Law of Sines)."""
    if D <= 0:
        raise DomainError("side length must be positive")
    s = math.sin(math.pi / 3.0)
    if g.kappa == 0:
        return D / math.sqrt(3.0)
    if g.kappa == 1:
        if D >= math.pi / 2:
            raise DomainError("spherical side length must be below pi/2")
        return math.asin(float(_clamp(math.sin(D / 2.0) / s, -1.0, 1.0, "arcsin")))
    return math.asinh(math.sinh(D / 2.0) / s)


# ---------------------------------------------------------------------------
# Isometries


@dataclass(frozen=True)
class Isometry:
    """Rigid motion: 3x3 matrix for S2/H2, rotation+translation pair for E2."""

    geometry: Geometry
    matrix: np.ndarray
    shift: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def apply(self, x) -> np.ndarray:
        x = _as_array(x)
        if self.geometry.kappa == 0:
            return x @ self.matrix.T + self.shift
        out = x @ self.matrix.T
        return normalize_point(self.geometry, out)

    def apply_tangent(self, u) -> np.ndarray:
        return _as_array(u) @ self.matrix.T

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other: (self.compose(other)).apply(x) = self(other(x))."""
        if self.geometry != other.geometry:
            raise MismatchedGeometry("cannot compose isometries across geometries")
        m = self.matrix @ other.matrix
        if self.geometry.kappa == 0:
            return Isometry(self.geometry, m, self.matrix @ other.shift + self.shift)
        return Isometry(self.geometry, m)

    def inverse(self) -> "Isometry":
        g = self.geometry
        if g.kappa == 0:
            minv = self.matrix.T
            return Isometry(g, minv, -minv @ self.shift)
        if g.kappa == 1:
            return Isometry(g, self.matrix.T)
        J = np.diag([-1.0, -1.0, 1.0])
        return Isometry(g, J @ self.matrix.T @ J)

    @property
    def orientation_preserving(self) -> bool:
        return float(np.linalg.det(self.matrix)) > 0


def identity_isometry(g: Geometry) -> Isometry:
    n = g.dim
    return Isometry(g, np.eye(n), np.zeros(2))


def _translation_to(g: Geometry, target) -> Isometry:
    """Isometry moving the reference point z0 to target along their geodesic."""
    z0 = reference_point(g)
    target = _as_array(target)
    if g.kappa == 0:
        return Isometry(g, np.eye(2), target.copy())
    if float(distance(g, z0, target)) < 1e-15:
        return Isometry(g, np.eye(3))
    u, t = log_dir(g, z0, target)
    w = rot90(g, z0, u)
    t = float(t)
    if g.kappa == 1:
        u_arr = -z0 * math.sin(t) + u * math.cos(t)
    else:
        u_arr = z0 * math.sinh(t) + u * math.cosh(t)
    # Columns (u, w, z0) are orthonormal for the relevant form, so the inverse
    # of the departure frame is its form-adjoint: transpose for S2,
    # J M^T J for H2 with J = diag(-1, -1, 1).
    depart = np.column_stack([u, w, z0])
    arrive = np.column_stack([u_arr, w, _as_array(target)])
    if g.kappa == 1:
        return Isometry(g, arrive @ depart.T)
    J = np.diag([-1.0, -1.0, 1.0])
    return Isometry(g, arrive @ J @ depart.T @ J)


def pose_isometry(g: Geometry, center, theta: float) -> Isometry:
    """Isometry sending z0 to center with frame rotation theta about z0 first."""
    c, s = math.cos(theta), math.sin(theta)
    if g.kappa == 0:
        rot = Isometry(g, np.array([[c, -s], [s, c]]), np.zeros(2))
    else:
        rot = Isometry(g, np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))
    return _translation_to(g, center).compose(rot)


def reflect(g: Geometry, line_point, line_dir, x) -> np.ndarray:
    """Reflection through the geodesic through line_point with tangent line_dir."""
    z = _as_array(line_point)
    u = normalize_tangent(g, _as_array(line_dir))
    x = _as_array(x)
    if g.kappa == 0:
        d = x - z
        comp = np.sum(d * u, axis=-1)[..., None] * u
        return z + 2.0 * comp - d
    n = rot90(g, z, u)  # unit normal to the line
    if g.kappa == 1:
        return x - 2.0 * np.sum(x * n, axis=-1)[..., None] * n
    # Householder for the Lorentz form with B(n, n) = -1.
    return x + 2.0 * bilinear_form(x, n)[..., None] * n


# ---------------------------------------------------------------------------
# Model projections (used by the renderer and tests)


def to_poincare(x) -> np.ndarray:
    """Hyperboloid -> Poincare disk: (x1, x2) / (1 + t)."""
    x = _as_array(x)
    return x[..., :2] / (1.0 + x[..., 2:3])


def from_poincare(p) -> np.ndarray:
    p = _as_array(p)
    s = np.sum(p * p, axis=-1)
    if np.any(s >= 1.0):
        raise DomainError("Poincare coordinates must lie in the open unit disk")
    denom = (1.0 - s)[..., None]
    out = np.concatenate([2.0 * p, (1.0 + s)[..., None]], axis=-1) / denom
    return out


def to_stereographic(x) -> np.ndarray:
    """Sphere -> plane, projecting from the south pole (0, 0, -1)."""
    x = _as_array(x)
    denom = 1.0 + x[..., 2]
    if np.any(denom < 1e-12):
        raise ProjectionPole("stereographic projection undefined at the south pole")
    return x[..., :2] / denom[..., None]


def from_stereographic(p) -> np.ndarray:
    p = _as_array(p)
    s = np.sum(p * p, axis=-1)
    denom = (1.0 + s)[..., None]
    return np.concatenate([2.0 * p, (1.0 - s)[..., None]], axis=-1) / denom


# ---------------------------------------------------------------------------
# Typed wrappers


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Point:
    """A point on the model surface; coords live in the ambient space."""

    geometry: Geometry
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _freeze(self.coords))
        if self.coords.shape != (self.geometry.dim,):
            raise DomainError(
                f"expected {self.geometry.dim} coordinates, got {self.coords.shape}"
            )
        if not on_surface(self.geometry, self.coords, tol=1e-8):
            raise DomainError(f"point {self.coords} not on the {self.geometry.name} surface")

    def key(self) -> tuple:
        """Lexicographic tie-break key."""
        return tuple(round(float(c), 12) for c in self.coords)


@dataclass(frozen=True)
class TangentVec:
    base: Point
    dir: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dir", _freeze(self.dir))
        g = self.base.geometry
        if g.kappa != 0:
            t = abs(float(ambient_dot(g, self.dir, self.base.coords)))
            if t > 1e-9:
                raise DomainError("vector is not tangent to the surface at base")

    @property
    def geometry(self) -> Geometry:
        return self.base.geometry

    def is_unit(self, tol=1e-9) -> bool:
        return abs(float(tangent_norm(self.geometry, self.dir)) - 1.0) <= tol


def point(g: Geometry, *coords) -> Point:
    return Point(g, np.array(coords, dtype=float))


def check_same_geometry(*objs):
    gs = {o.geometry for o in objs}
    if len(gs) > 1:
        raise MismatchedGeometry(f"mixed geometries: {sorted(g.name for g in gs)}")


def point_distance(x: Point, y: Point) -> float:
    check_same_geometry(x, y)
    return float(distance(x.geometry, x.coords, y.coords))


def point_exp(z: Point, u: TangentVec, t: float) -> Point:
    check_same_geometry(z, u.base)
    if not u.is_unit():
        raise NonUnitTangent("exp_map needs a unit tangent vector")
    if z.geometry.kappa == 1 and abs(t) >= math.pi:
        raise DomainError("spherical exp_map restricted to |t| < pi")
    return Point(z.geometry, exp_map(z.geometry, z.coords, u.dir, float(t)))


def point_log(z: Point, x: Point) -> tuple[TangentVec, float]:
    check_same_geometry(z, x)
    u, t = log_dir(z.geometry, z.coords, x.coords)
    return TangentVec(z, u), float(t)


def point_angle(x: Point, y: Point, z: Point) -> float:
    check_same_geometry(x, y, z)
    return float(angle(x.geometry, x.coords, y.coords, z.coords))
