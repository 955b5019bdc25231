"""Qualitative space partitions of the normalized AB frame.

A partition is an ordered list of convex regions (possibly unbounded along
declared ray directions) that together cover the plane up to a measure-zero
boundary set.  Region geometry is loaded from JSON definition files; the
package bundles ``edc`` (extended double cross, 20 regions) and
``double_cross`` (6 regions).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigurationError

# Length used to close unbounded regions.  Large enough for any point a
# GDR-bounded scenario can produce in AB units.
RAY_LENGTH = 1e6

_BOUNDARY_EPS = 1e-9


def normalize_state(values) -> np.ndarray:
    """Normalize a nonnegative vector into a qualitative state distribution."""
    v = np.asarray(values, dtype=float)
    total = v.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ValueError("state vector must have positive finite mass")
    return v / total


def uniform_state(d: int) -> np.ndarray:
    return np.full(d, 1.0 / d)


def polygon_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_centroid(vertices: np.ndarray) -> np.ndarray:
    x, y = vertices[:, 0], vertices[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    area = 0.5 * cross.sum()
    if abs(area) < 1e-15:
        raise ConfigurationError("degenerate polygon has no centroid")
    cx = np.sum((x + np.roll(x, -1)) * cross) / (6.0 * area)
    cy = np.sum((y + np.roll(y, -1)) * cross) / (6.0 * area)
    return np.array([cx, cy])


def clip_convex(subject: np.ndarray, xmin, xmax, ymin, ymax) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex CCW polygon by an axis box."""
    poly = [tuple(p) for p in subject]
    for axis, bound, keep_less in ((0, xmax, True), (0, xmin, False), (1, ymax, True), (1, ymin, False)):
        if not poly:
            break
        out = []
        prev = poly[-1]
        for cur in poly:
            prev_in = (prev[axis] <= bound) if keep_less else (prev[axis] >= bound)
            cur_in = (cur[axis] <= bound) if keep_less else (cur[axis] >= bound)
            if cur_in:
                if not prev_in:
                    out.append(_axis_intersect(prev, cur, axis, bound))
                out.append(cur)
            elif prev_in:
                out.append(_axis_intersect(prev, cur, axis, bound))
            prev = cur
        poly = out
    return np.asarray(poly, dtype=float).reshape(-1, 2)


def _axis_intersect(p, q, axis, bound):
    t = (bound - p[axis]) / (q[axis] - p[axis])
    if axis == 0:
        return (bound, p[1] + t * (q[1] - p[1]))
    return (p[0] + t * (q[0] - p[0]), bound)


@dataclass(frozen=True)
class Region:
    """One convex qualitative region.

    ``vertices`` are the finite CCW boundary vertices; ``rays`` (if present)
    are the two outgoing boundary directions attached to the first and last
    vertex of an unbounded region.  ``clipped`` is the border-clipped closed
    polygon used for areas, centroids, and sampling.
    """

    index: int
    vertices: np.ndarray
    rays: np.ndarray | None
    clipped: np.ndarray
    centroid: np.ndarray
    area: float

    def closed_polygon(self, length: float = RAY_LENGTH) -> np.ndarray:
        if self.rays is None:
            return self.vertices
        first = self.vertices[0] + length * self.rays[0]
        last = self.vertices[-1] + length * self.rays[1]
        return np.vstack([first, self.vertices, last])


class SpacePartition:
    """Immutable set of regions covering the AB frame."""

    def __init__(self, name: str, regions: list[Region], borders: tuple[float, float, float, float]):
        self.name = name
        self.regions = tuple(regions)
        self.borders = tuple(float(b) for b in borders)
        self.d = len(regions)
        # Precompute inward edge normals for convex membership tests: a point
        # p is in the region's closure iff n.(p - anchor) >= 0 for every
        # boundary edge.  Unbounded regions contribute their two rays as
        # edges directly, so no artificial closing edge is involved and the
        # test is exact for arbitrarily distant points.
        self._normals = []
        self._anchors = []
        for region in self.regions:
            edges = []
            verts = region.vertices
            if region.rays is not None:
                edges.append((verts[0], -region.rays[0]))
            for a, b in zip(verts[:-1], verts[1:]):
                edges.append((a, b - a))
            if region.rays is not None:
                edges.append((verts[-1], region.rays[1]))
            else:
                edges.append((verts[-1], verts[0] - verts[-1]))
            anchors = np.array([e[0] for e in edges], dtype=float)
            dirs = np.array([e[1] for e in edges], dtype=float)
            lengths = np.hypot(dirs[:, 0], dirs[:, 1])
            if np.any(lengths < 1e-12):
                raise ConfigurationError(f"region {region.index} has a degenerate edge")
            normals = np.stack([-dirs[:, 1], dirs[:, 0]], axis=1) / lengths[:, None]
            poly = region.closed_polygon()
            e2 = np.roll(poly, -1, axis=0) - poly
            cross = e2[:, 0] * np.roll(e2, -1, axis=0)[:, 1] - e2[:, 1] * np.roll(e2, -1, axis=0)[:, 0]
            if np.any(cross < -1e-6 * np.maximum(np.hypot(e2[:, 0], e2[:, 1]), 1.0) ** 2):
                raise ConfigurationError(f"region {region.index} is not convex CCW")
            self._normals.append(normals)
            self._anchors.append(anchors)

    def __repr__(self):
        return f"SpacePartition({self.name!r}, d={self.d})"

    def region(self, index: int) -> Region:
        if not 1 <= index <= self.d:
            raise ValueError(f"region index {index} outside 1..{self.d}")
        return self.regions[index - 1]

    def contains(self, index: int, points, eps: float = _BOUNDARY_EPS):
        """Boundary-inclusive membership of points in a region's closure."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        normals = self._normals[index - 1]
        anchors = self._anchors[index - 1]
        signed = np.einsum("ek,nek->ne", normals, pts[:, None, :] - anchors[None, :, :])
        return np.all(signed >= -eps, axis=1)

    def classify(self, points) -> np.ndarray:
        """Region index (1..d) containing each point; boundary ties resolve
        to the lowest containing index."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(len(pts), dtype=np.int64)
        todo = np.ones(len(pts), dtype=bool)
        for idx in range(1, self.d + 1):
            if not todo.any():
                break
            hit = self.contains(idx, pts[todo])
            sel = np.flatnonzero(todo)[hit]
            out[sel] = idx
            todo[sel] = False
        if todo.any():
            bad = pts[todo][0]
            raise ConfigurationError(f"point {bad} not covered by partition {self.name!r}")
        return out

    def classify_one(self, point) -> int:
        return int(self.classify(np.asarray(point, dtype=float)[None, :])[0])

    def region_centroid(self, index: int) -> np.ndarray:
        return self.region(index).centroid.copy()

    def centroids(self) -> np.ndarray:
        return np.stack([r.centroid for r in self.regions])

    def sample_region(self, index: int, count: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform samples over a region's border-clipped polygon."""
        if count < 1:
            raise ValueError("count must be >= 1")
        region = self.region(index)
        poly = region.clipped
        if len(poly) < 3 or region.area <= 0.0:
            raise ConfigurationError(f"region {index} is empty inside borders")
        # Fan triangulation of the convex clipped polygon.
        v0 = poly[0]
        tri_b = poly[1:-1]
        tri_c = poly[2:]
        tri_areas = 0.5 * np.abs(
            (tri_b[:, 0] - v0[0]) * (tri_c[:, 1] - v0[1]) - (tri_c[:, 0] - v0[0]) * (tri_b[:, 1] - v0[1])
        )
        choice = rng.choice(len(tri_areas), size=count, p=tri_areas / tri_areas.sum())
        u1 = rng.random(count)
        u2 = rng.random(count)
        flip = u1 + u2 > 1.0
        u1[flip] = 1.0 - u1[flip]
        u2[flip] = 1.0 - u2[flip]
        return v0 + u1[:, None] * (tri_b[choice] - v0) + u2[:, None] * (tri_c[choice] - v0)


def _region_from_spec(spec: dict, borders) -> Region:
    vertices = np.asarray(spec["vertices"], dtype=float).reshape(-1, 2)
    rays = spec.get("rays") or None
    if rays is not None:
        rays = np.asarray(rays, dtype=float).reshape(2, 2)
        rays = rays / np.hypot(rays[:, 0], rays[:, 1])[:, None]
    closed = Region(spec["index"], vertices, rays, vertices, np.zeros(2), 0.0).closed_polygon()
    xmin, xmax, ymin, ymax = borders
    clipped = clip_convex(closed, xmin, xmax, ymin, ymax)
    if len(clipped) >= 3 and polygon_area(clipped) > 1e-12:
        area = polygon_area(clipped)
        centroid = polygon_centroid(clipped)
    else:
        clipped = np.empty((0, 2))
        area = 0.0
        centroid = np.full(2, np.nan)
    return Region(int(spec["index"]), vertices, rays, clipped, centroid, float(area))


def load_partition_dict(doc: dict) -> SpacePartition:
    try:
        name = doc["name"]
        b = doc["borders"]
        borders = (b["xmin"], b["xmax"], b["ymin"], b["ymax"])
        region_specs = sorted(doc["regions"], key=lambda r: r["index"])
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed partition document: {exc}") from exc
    if [r["index"] for r in region_specs] != list(range(1, len(region_specs) + 1)):
        raise ConfigurationError("region indices must be exactly 1..d")
    regions = [_region_from_spec(spec, borders) for spec in region_specs]
    for region in regions:
        if region.area <= 0.0:
            raise ConfigurationError(f"region {region.index} lies entirely outside the borders")
    return SpacePartition(name, regions, borders)


def load_partition(path) -> SpacePartition:
    with open(path, "r", encoding="utf-8") as fh:
        return load_partition_dict(json.load(fh))


def bundled_partition(name: str) -> SpacePartition:
    """Load a partition shipped with the package ('edc' or 'double_cross')."""
    ref = resources.files("qslam.data").joinpath(f"{name}.json")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigurationError(f"no bundled partition named {name!r}") from exc
    return load_partition_dict(json.loads(text))
