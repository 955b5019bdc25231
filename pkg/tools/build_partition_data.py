"""Regenerate the bundled partition definition files.

Both bundled partitions are cell complexes of small line arrangements in the
AB frame (A at the origin, B at (0, 1)):

* ``double_cross``: the AB line plus the perpendiculars through A and B
  (6 regions).
* ``edc``: the double-cross lines plus the four 45-degree diagonals through
  A and B (20 regions).

Cells are extracted generically from the line arrangement, so vertex lists
and ray directions never need hand maintenance.  Run from the repository
root:

    python tools/build_partition_data.py
"""

from __future__ import annotations

import itertools
import json
import pathlib

import numpy as np

BOX = 64.0  # half-extent of the probe box used to close unbounded cells
SNAP = 1e-9

DOUBLE_CROSS_LINES = [
    (1.0, 0.0, 0.0),  # x = 0, the AB line
    (0.0, 1.0, 0.0),  # y = 0, perpendicular at A
    (0.0, 1.0, -1.0),  # y = 1, perpendicular at B
]

EDC_LINES = DOUBLE_CROSS_LINES + [
    (1.0, -1.0, 0.0),  # y = x, diagonal at A
    (1.0, 1.0, 0.0),  # y = -x, diagonal at A
    (1.0, -1.0, 1.0),  # y = x + 1, diagonal at B
    (1.0, 1.0, -1.0),  # y = 1 - x, diagonal at B
]

# Integration borders per partition (xmin, xmax, ymin, ymax).  The
# double-cross box makes all six regions exactly area 1; the EDC box keeps
# every region's clip nonempty while matching the uniform-belief geometric
# distance constant (~2.2).
BORDERS = {
    "double_cross": (-1.0, 1.0, -1.0, 2.0),
    "edc": (-2.5, 2.5, -2.0, 3.0),
}


def clip_halfplane(poly, a, b, c, sign):
    """Keep the part of CCW polygon where sign*(a*x + b*y + c) >= 0."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = sign * (a * p[0] + b * p[1] + c)
        fq = sign * (a * q[0] + b * q[1] + c)
        if fp >= -SNAP:
            out.append(p)
        if (fp > SNAP and fq < -SNAP) or (fp < -SNAP and fq > SNAP):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def dedupe(poly):
    out = []
    for p in poly:
        if not out or max(abs(p[0] - out[-1][0]), abs(p[1] - out[-1][1])) > 1e-7:
            out.append(p)
    if len(out) > 1 and max(abs(out[0][0] - out[-1][0]), abs(out[0][1] - out[-1][1])) <= 1e-7:
        out.pop()
    return out


def probe_points(lines):
    """Probe locations guaranteed to hit every arrangement cell."""
    pts = []
    crossings = [(0.0, 0.5)]
    for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(lines, 2):
        det = a1 * b2 - a2 * b1
        if abs(det) < 1e-12:
            continue
        crossings.append(((b1 * c2 - b2 * c1) / det, (c1 * a2 - c2 * a1) / det))
    radii = (0.01, 0.2, 1.3, 7.0, BOX * 0.7)
    angles = np.linspace(0.0, 2 * np.pi, 24, endpoint=False) + 0.0123
    for cx, cy in crossings:
        for r in radii:
            for t in angles:
                pts.append((cx + r * np.cos(t), cy + r * np.sin(t)))
    return pts


def sign_vector(lines, p):
    sv = []
    for a, b, c in lines:
        val = a * p[0] + b * p[1] + c
        if abs(val) < 1e-7:
            return None  # probe sits on a line; skip it
        sv.append(1 if val > 0 else -1)
    return tuple(sv)


def cell_polygon(lines, sv):
    poly = [(-BOX, -BOX), (BOX, -BOX), (BOX, BOX + 1.0), (-BOX, BOX + 1.0)]
    for (a, b, c), s in zip(lines, sv):
        poly = clip_halfplane(poly, a, b, c, s)
        if len(poly) < 3:
            return None
    poly = dedupe(poly)
    return poly if len(poly) >= 3 else None


def on_box(p):
    return abs(abs(p[0]) - BOX) < 1e-6 or abs(p[1] + BOX) < 1e-6 or abs(p[1] - (BOX + 1.0)) < 1e-6


def to_region(poly):
    """Split a box-closed cell polygon into finite vertices plus rays."""
    flags = [on_box(p) for p in poly]
    if not any(flags):
        return [snap(p) for p in poly], None
    n = len(poly)
    interior = [i for i in range(n) if not flags[i]]
    if not interior:
        raise RuntimeError("cell has no finite vertex; unsupported shape")
    # Rotate so the interior run is contiguous from position 0.
    start = None
    for i in interior:
        if flags[(i - 1) % n]:
            start = i
            break
    order = [(start + k) % n for k in range(n)]
    run = [i for i in order if not flags[i]]
    if len(run) != len(interior):
        raise RuntimeError("cell interior vertices are not contiguous")
    first, last = run[0], run[-1]
    prev_pt = poly[(first - 1) % n]
    next_pt = poly[(last + 1) % n]
    r0 = direction(poly[first], prev_pt)
    r1 = direction(poly[last], next_pt)
    return [snap(poly[i]) for i in run], [r0, r1]


def direction(src, dst):
    d = np.array([dst[0] - src[0], dst[1] - src[1]])
    d = d / np.hypot(*d)
    return [snap_scalar(d[0]), snap_scalar(d[1])]


def snap_scalar(v):
    r = round(v)
    if abs(v - r) < 1e-9:
        return float(r)
    for denom in (2, 4):
        r = round(v * denom) / denom
        if abs(v - r) < 1e-9:
            return r
    # Normalize diagonal components like 1/sqrt(2).
    return float(round(v, 12))


def snap(p):
    return [snap_scalar(p[0]), snap_scalar(p[1])]


def build(name, lines):
    cells = {}
    for p in probe_points(lines):
        sv = sign_vector(lines, p)
        if sv is None or sv in cells:
            continue
        poly = cell_polygon(lines, sv)
        if poly is not None:
            cells[sv] = poly
    regions = []
    for sv, poly in cells.items():
        verts, rays = to_region(poly)
        anchor = np.mean(np.asarray(verts), axis=0)
        regions.append({"vertices": verts, "rays": rays, "anchor": anchor})
    # Deterministic ordering: bottom-to-top, then left-to-right by the mean
    # of the finite vertices.
    regions.sort(key=lambda r: (round(r["anchor"][1], 6), round(r["anchor"][0], 6)))
    xmin, xmax, ymin, ymax = BORDERS[name]
    doc = {
        "name": name,
        "borders": {"xmin": xmin, "xmax": xmax, "ymin": ymin, "ymax": ymax},
        "regions": [
            {"index": i + 1, "vertices": r["vertices"], "rays": r["rays"]}
            for i, r in enumerate(regions)
        ],
    }
    return doc


def main():
    out_dir = pathlib.Path(__file__).resolve().parents[1] / "src" / "qslam" / "data"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, lines in (("double_cross", DOUBLE_CROSS_LINES), ("edc", EDC_LINES)):
        doc = build(name, lines)
        path = out_dir / f"{name}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        print(f"{name}: {len(doc['regions'])} regions -> {path}")


if __name__ == "__main__":
    main()
