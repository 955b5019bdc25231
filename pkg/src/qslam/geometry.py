"""Deterministic 2D bearing geometry in the normalized AB frame.

Landmark A sits at (0, 0) and landmark B at (0, 1).  All positions are in
units of |AB|.  Bearings are body-frame angles: the global azimuth of a
sighted point equals ``pose.alpha + bearing``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateGeometry, NoIntersection

TWO_PI = 2.0 * np.pi

A_POINT = np.array([0.0, 0.0])
B_POINT = np.array([0.0, 1.0])

_EPS_DEGENERATE = 1e-12


def wrap_angle(a):
    """Wrap angles into (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    w = np.remainder(a + np.pi, TWO_PI) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if w.ndim == 0 else w


@dataclass(frozen=True)
class Pose2:
    """Camera pose in the AB frame: position plus heading."""

    x: float
    y: float
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", wrap_angle(self.alpha))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class LocusCircle:
    """Circle through A and B constrained to the camera's side of line AB.

    ``side`` is the sign of x for valid camera positions.  ``arc_start`` and
    ``arc_span`` parametrize the valid arc counter-clockwise from
    ``arc_start`` (radians, span in (0, 2*pi)); the endpoints are A and B
    themselves and are excluded.
    """

    center: tuple[float, float]
    radius: float
    side: int
    arc_start: float
    arc_span: float

    def point_at(self, u):
        """Arc point for parameter u in (0, 1)."""
        t = self.arc_start + np.asarray(u) * self.arc_span
        cx, cy = self.center
        return np.stack([cx + self.radius * np.cos(t), cy + self.radius * np.sin(t)], axis=-1)

    def on_valid_arc(self, point, tol=1e-9) -> bool:
        p = np.asarray(point, dtype=float)
        cx, cy = self.center
        if abs(np.hypot(p[0] - cx, p[1] - cy) - self.radius) > tol:
            return False
        return np.sign(p[0]) == self.side


def bearing_to(pose: Pose2, point) -> float:
    """Body-frame bearing from a pose to a point."""
    p = np.asarray(point, dtype=float)
    dx, dy = p[0] - pose.x, p[1] - pose.y
    if dx * dx + dy * dy < _EPS_DEGENERATE:
        raise DegenerateGeometry("bearing to a coincident point is undefined")
    return wrap_angle(np.arctan2(dy, dx) - pose.alpha)


def locus_params(phi_a, phi_b):
    """Vectorized locus-circle parameters for bearing pairs.

    Returns (cx, cy, radius, side, arc_start, arc_span, valid) arrays, where
    ``valid`` marks non-degenerate pairs (camera not collinear with A, B).
    """
    phi_a = np.asarray(phi_a, dtype=float)
    phi_b = np.asarray(phi_b, dtype=float)
    delta = wrap_angle(phi_b - phi_a)
    gamma = np.abs(delta)
    valid = (gamma > 1e-9) & (gamma < np.pi - 1e-9)
    gamma_safe = np.where(valid, gamma, np.pi / 2.0)

    radius = 0.5 / np.sin(gamma_safe)
    half_gap = np.sqrt(np.maximum(radius * radius - 0.25, 0.0))
    side = -np.sign(delta)
    # Acute subtended angle puts the camera on the major arc (center on the
    # camera's side); obtuse on the minor arc (center opposite).
    cx = np.where(gamma_safe < np.pi / 2.0, side * half_gap, -side * half_gap)
    cy = np.full_like(cx, 0.5)

    theta_a = np.arctan2(-cy, -cx)
    theta_b = np.arctan2(1.0 - cy, -cx)
    span_ab = np.remainder(theta_b - theta_a, TWO_PI)
    mid_ab = theta_a + 0.5 * span_ab
    mid_x = cx + radius * np.cos(mid_ab)
    take_ab = np.sign(mid_x) == side
    arc_start = np.where(take_ab, theta_a, theta_b)
    arc_span = np.where(take_ab, span_ab, TWO_PI - span_ab)
    return cx, cy, radius, side, arc_start, arc_span, valid


def locus_from_bearings(phi_a: float, phi_b: float) -> LocusCircle:
    """Locus circle of camera positions consistent with bearings to A and B."""
    cx, cy, radius, side, arc_start, arc_span, valid = locus_params(phi_a, phi_b)
    if not valid:
        raise DegenerateGeometry("camera collinear with landmarks A and B")
    return LocusCircle(
        center=(float(cx), float(cy)),
        radius=float(radius),
        side=int(side),
        arc_start=float(arc_start),
        arc_span=float(arc_span),
    )


def orientation_on_circle(point, phi_a: float) -> float:
    """Camera heading at a position, given the measured bearing to A."""
    p = np.asarray(point, dtype=float)
    if p @ p < _EPS_DEGENERATE or (p[0] ** 2 + (p[1] - 1.0) ** 2) < _EPS_DEGENERATE:
        raise DegenerateGeometry("camera coincides with a landmark")
    return wrap_angle(np.arctan2(-p[1], -p[0]) - phi_a)


def orientations_at(x, y, phi_a):
    """Vectorized form of :func:`orientation_on_circle`."""
    return wrap_angle(np.arctan2(-np.asarray(y), -np.asarray(x)) - phi_a)


def ray_pair_intersections(origins, angles):
    """Pairwise forward intersections of rays, vectorized over hypotheses.

    origins: (..., n, 2) ray origins; angles: (..., n) global ray azimuths.
    Returns (points, valid): (..., m, 2) and (..., m) for the m = n*(n-1)/2
    ordered pairs; intersections behind either origin are marked invalid.
    """
    origins = np.asarray(origins, dtype=float)
    angles = np.asarray(angles, dtype=float)
    n = origins.shape[-2]
    pairs = list(combinations(range(n), 2))
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)

    pts = []
    ok = []
    for i, j in pairs:
        o1, o2 = origins[..., i, :], origins[..., j, :]
        d1, d2 = dirs[..., i, :], dirs[..., j, :]
        denom = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        nonpar = np.abs(denom) > 1e-12
        denom_safe = np.where(nonpar, denom, 1.0)
        rel = o2 - o1
        t1 = (rel[..., 0] * d2[..., 1] - rel[..., 1] * d2[..., 0]) / denom_safe
        t2 = (rel[..., 0] * d1[..., 1] - rel[..., 1] * d1[..., 0]) / denom_safe
        good = nonpar & (t1 > 0.0) & (t2 > 0.0)
        pts.append(o1 + t1[..., None] * d1)
        ok.append(good)
    return np.stack(pts, axis=-2), np.stack(ok, axis=-1)


def triangulate(poses, bearings_c):
    """Centroid of all pairwise forward line-of-sight intersections.

    ``poses`` is a sequence of Pose2 (or an (n, 3) array of x, y, alpha) and
    ``bearings_c`` the matching body-frame bearings to the target landmark.
    """
    arr = np.array([[p.x, p.y, p.alpha] for p in poses]) if poses and isinstance(poses[0], Pose2) else np.asarray(poses, dtype=float)
    bearings_c = np.asarray(bearings_c, dtype=float)
    if arr.shape[0] < 2:
        raise ValueError("triangulation needs at least two views")
    angles = arr[:, 2] + bearings_c
    pts, ok = ray_pair_intersections(arr[None, :, :2], angles[None, :])
    pts, ok = pts[0], ok[0]
    if not ok.any():
        raise NoIntersection("no pair of sight lines intersects forward")
    return pts[ok].mean(axis=0)


def ray_circle_ts(origin, psi, center, radius):
    """Parameters t of ray/circle intersections, before any arc filtering.

    Returns a (possibly empty) ascending array of t >= 0 values; a tangent
    contact yields a single t.
    """
    o = np.asarray(origin, dtype=float)[:2]
    c = np.asarray(center, dtype=float)
    d = np.array([np.cos(psi), np.sin(psi)])
    rel = o - c
    b = rel @ d
    q = rel @ rel - radius * radius
    disc = b * b - q
    if disc < -1e-12:
        return np.empty(0)
    if disc < 1e-12:
        ts = np.array([-b])
    else:
        root = np.sqrt(disc)
        ts = np.array([-b - root, -b + root])
    return ts[ts > 1e-12]


def intersect_motion_ray(origin, psi: float, circle: LocusCircle):
    """Forward ray/circle intersections restricted to the valid arc.

    ``origin`` may be a Pose2 or a 2D point; ``psi`` is the global motion
    heading in the AB frame.  Returns an (m, 2) array with m in {0, 1, 2}.
    """
    o = origin.position if isinstance(origin, Pose2) else np.asarray(origin, dtype=float)
    ts = ray_circle_ts(o, psi, circle.center, circle.radius)
    if ts.size == 0:
        return np.empty((0, 2))
    d = np.array([np.cos(psi), np.sin(psi)])
    pts = o[None, :] + ts[:, None] * d[None, :]
    keep = np.sign(pts[:, 0]) == circle.side
    return pts[keep]
