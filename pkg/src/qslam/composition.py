"""Probabilistic composition of qualitative states across triplet frames.

Three triplets that pairwise share two landmarks (AB:C, BC:D, AB:D) are
geometrically coupled: not every combination of their qualitative states is
realizable.  The coupling is captured offline in a d x d x d nonnegative
tensor built by Monte-Carlo integration: sample the shared landmark C
uniformly inside each first-slot region, map the BC-frame regions into the
AB frame through the similarity transform fixed by the sampled C, and
accumulate polygon intersection areas against the AB-frame regions.

Online use is two cheap contractions (joint probabilities and marginals).
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from numba import njit, prange

from .errors import ConfigurationError, ParseError
from .partition import SpacePartition, normalize_state, uniform_state

_B_AB = np.array([0.0, 1.0])
_MIN_BC = 1e-6
_AREA_FLOOR = 1e-12

MAGIC = b"QCT1"


@dataclass(frozen=True)
class CompositionTensor:
    """Sparse nonnegative tensor of joint qualitative-state compatibility."""

    partition_name: str
    d: int
    mode: str  # "probabilistic" | "deterministic"
    sample_count: int
    seed: int
    indices: np.ndarray  # (nnz, 3) int32, zero-based slots
    values: np.ndarray  # (nnz,) float64

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.d, self.d, self.d)

    @property
    def nnz(self) -> int:
        return len(self.values)

    def dense(self) -> np.ndarray:
        t = np.zeros(self.dims)
        t[self.indices[:, 0], self.indices[:, 1], self.indices[:, 2]] = self.values
        return t


def _polys_as_arrays(partition: SpacePartition):
    polys = [r.clipped for r in partition.regions]
    maxv = max(len(p) for p in polys)
    arr = np.zeros((len(polys), maxv, 2))
    counts = np.zeros(len(polys), dtype=np.int64)
    for i, p in enumerate(polys):
        arr[i, : len(p)] = p
        counts[i] = len(p)
    bboxes = np.zeros((len(polys), 4))
    for i, p in enumerate(polys):
        bboxes[i] = (p[:, 0].min(), p[:, 0].max(), p[:, 1].min(), p[:, 1].max())
    return arr, counts, bboxes


@njit(cache=True)
def _clip_area(subject, ns, clipper, nc):
    """Area of the intersection of two convex CCW polygons."""
    # Work buffers sized for convex/convex output.
    cur = np.empty((ns + nc + 4, 2))
    nxt = np.empty((ns + nc + 4, 2))
    for i in range(ns):
        cur[i, 0] = subject[i, 0]
        cur[i, 1] = subject[i, 1]
    n_cur = ns
    for e in range(nc):
        if n_cur < 3:
            return 0.0
        ax, ay = clipper[e, 0], clipper[e, 1]
        bx, by = clipper[(e + 1) % nc, 0], clipper[(e + 1) % nc, 1]
        ex, ey = bx - ax, by - ay
        n_out = 0
        px, py = cur[n_cur - 1, 0], cur[n_cur - 1, 1]
        # Interior of a CCW clipper lies left of each edge: f >= 0.
        fp = ex * (py - ay) - ey * (px - ax)
        for i in range(n_cur):
            qx, qy = cur[i, 0], cur[i, 1]
            fq = ex * (qy - ay) - ey * (qx - ax)
            if fq >= 0.0:
                if fp < 0.0:
                    t = fp / (fp - fq)
                    nxt[n_out, 0] = px + t * (qx - px)
                    nxt[n_out, 1] = py + t * (qy - py)
                    n_out += 1
                nxt[n_out, 0] = qx
                nxt[n_out, 1] = qy
                n_out += 1
            elif fp >= 0.0:
                t = fp / (fp - fq)
                nxt[n_out, 0] = px + t * (qx - px)
                nxt[n_out, 1] = py + t * (qy - py)
                n_out += 1
            px, py, fp = qx, qy, fq
        for i in range(n_out):
            cur[i, 0] = nxt[i, 0]
            cur[i, 1] = nxt[i, 1]
        n_cur = n_out
    if n_cur < 3:
        return 0.0
    area = 0.0
    for i in range(n_cur):
        j = (i + 1) % n_cur
        area += cur[i, 0] * cur[j, 1] - cur[j, 0] * cur[i, 1]
    return 0.5 * area


@njit(cache=True, parallel=True)
def _accumulate_all(samples_flat, offsets, polys, counts, bboxes, out):
    """Accumulate intersection areas per first-slot region (parallel over i)."""
    d = polys.shape[0]
    maxv = polys.shape[1]
    for i in prange(d):
        tpoly = np.empty((maxv, 2))
        for s in range(offsets[i], offsets[i + 1]):
            cx = samples_flat[s, 0]
            cy = samples_flat[s, 1]
            ux = cx - 0.0
            uy = cy - 1.0
            for j in range(d):
                nvj = counts[j]
                txmin = 1e300
                txmax = -1e300
                tymin = 1e300
                tymax = -1e300
                for v in range(nvj):
                    px = polys[j, v, 0]
                    py = polys[j, v, 1]
                    # similarity: frame -> AB with B_ab + M p, M = [[uy,ux],[-ux,uy]]
                    qx = uy * px + ux * py
                    qy = -ux * px + uy * py + 1.0
                    tpoly[v, 0] = qx
                    tpoly[v, 1] = qy
                    if qx < txmin:
                        txmin = qx
                    if qx > txmax:
                        txmax = qx
                    if qy < tymin:
                        tymin = qy
                    if qy > tymax:
                        tymax = qy
                for k in range(d):
                    if (
                        txmax < bboxes[k, 0]
                        or txmin > bboxes[k, 1]
                        or tymax < bboxes[k, 2]
                        or tymin > bboxes[k, 3]
                    ):
                        continue
                    area = _clip_area(tpoly, nvj, polys[k], counts[k])
                    if area > _AREA_FLOOR:
                        out[i, j, k] += area


def build_tensor(
    partition: SpacePartition,
    samples_per_region: int,
    mode: str = "probabilistic",
    seed: int = 0,
) -> CompositionTensor:
    """Monte-Carlo build of the composition tensor for a partition."""
    if samples_per_region < 1:
        raise ValueError("samples_per_region must be >= 1")
    if mode not in ("probabilistic", "deterministic"):
        raise ValueError(f"unknown tensor mode {mode!r}")
    d = partition.d
    polys, counts, bboxes = _polys_as_arrays(partition)

    chunks = []
    offsets = np.zeros(d + 1, dtype=np.int64)
    for i in range(1, d + 1):
        rng = np.random.default_rng(np.random.SeedSequence((seed, i)))
        samples = partition.sample_region(i, samples_per_region, rng)
        bad = np.linalg.norm(samples - _B_AB, axis=1) < _MIN_BC
        while bad.any():
            samples[bad] = partition.sample_region(i, int(bad.sum()), rng)
            bad = np.linalg.norm(samples - _B_AB, axis=1) < _MIN_BC
        chunks.append(samples)
        offsets[i] = offsets[i - 1] + len(samples)
    samples_flat = np.vstack(chunks)

    out = np.zeros((d, d, d))
    _accumulate_all(samples_flat, offsets, polys, counts, bboxes, out)

    if mode == "deterministic":
        out = (out > 0.0).astype(float)
    total = out.sum()
    if total <= 0.0:
        raise ConfigurationError("tensor accumulation produced no support")
    out /= total
    idx = np.argwhere(out > 0.0).astype(np.int32)
    vals = out[idx[:, 0], idx[:, 1], idx[:, 2]]
    return CompositionTensor(
        partition_name=partition.name,
        d=d,
        mode=mode,
        sample_count=samples_per_region,
        seed=seed,
        indices=idx,
        values=vals,
    )


def joint_probability(tensor: CompositionTensor, v1, v2, v3, i: int, j: int, k: int) -> float:
    """Unnormalized joint probability of states (i, j, k), 1-based indices."""
    d = tensor.d
    for idx in (i, j, k):
        if not 1 <= idx <= d:
            raise ValueError(f"state index {idx} outside 1..{d}")
    v1, v2, v3 = (np.asarray(v, dtype=float) for v in (v1, v2, v3))
    t = tensor.dense()[i - 1, j - 1, k - 1]
    return float(v1[i - 1] * v2[j - 1] * v3[k - 1] * t)


class MarginalResult(NamedTuple):
    values: np.ndarray
    informative: bool


def marginal(tensor: CompositionTensor, v_a, v_b, slot: int = 1) -> MarginalResult:
    """Contract the tensor with the two other slot beliefs and normalize.

    ``slot`` picks which tensor slot the marginal is computed for; ``v_a``
    and ``v_b`` are the beliefs of the remaining slots in ascending slot
    order.  An all-zero contraction yields the uniform state with
    ``informative=False``.
    """
    v_a = np.asarray(v_a, dtype=float)
    v_b = np.asarray(v_b, dtype=float)
    t = tensor.dense()
    if slot == 1:
        raw = np.einsum("ijk,j,k->i", t, v_a, v_b)
    elif slot == 2:
        raw = np.einsum("ijk,i,k->j", t, v_a, v_b)
    elif slot == 3:
        raw = np.einsum("ijk,i,j->k", t, v_a, v_b)
    else:
        raise ValueError("slot must be 1, 2, or 3")
    total = raw.sum()
    if total <= 0.0:
        return MarginalResult(uniform_state(tensor.d), False)
    return MarginalResult(normalize_state(raw), True)


def save_tensor(tensor: CompositionTensor, path) -> None:
    """Write the binary tensor format: QCT1 header + sparse triplet list."""
    name = tensor.partition_name.encode("utf-8")
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<H", len(name)))
    buf.write(name)
    buf.write(struct.pack("<HBIQI", tensor.d, 0 if tensor.mode == "probabilistic" else 1,
                          tensor.sample_count, tensor.seed, tensor.nnz))
    order = np.lexsort((tensor.indices[:, 2], tensor.indices[:, 1], tensor.indices[:, 0]))
    for n in order:
        i, j, k = tensor.indices[n]
        buf.write(struct.pack("<HHHd", i + 1, j + 1, k + 1, tensor.values[n]))
    Path(path).write_bytes(buf.getvalue())


def load_tensor(path) -> CompositionTensor:
    raw = Path(path).read_bytes()
    try:
        if raw[:4] != MAGIC:
            raise ParseError(f"{path}: bad magic at byte 0 (expected QCT1)")
        off = 4
        (name_len,) = struct.unpack_from("<H", raw, off)
        off += 2
        name = raw[off : off + name_len].decode("utf-8")
        off += name_len
        d, mode_code, sample_count, seed, nnz = struct.unpack_from("<HBIQI", raw, off)
        off += struct.calcsize("<HBIQI")
        indices = np.zeros((nnz, 3), dtype=np.int32)
        values = np.zeros(nnz)
        for n in range(nnz):
            i, j, k, v = struct.unpack_from("<HHHd", raw, off)
            off += struct.calcsize("<HHHd")
            indices[n] = (i - 1, j - 1, k - 1)
            values[n] = v
    except (struct.error, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: truncated or corrupt tensor file at byte {off}: {exc}") from exc
    return CompositionTensor(
        partition_name=name,
        d=d,
        mode="probabilistic" if mode_code == 0 else "deterministic",
        sample_count=sample_count,
        seed=seed,
        indices=indices,
        values=values,
    )


def export_tensor_json(tensor: CompositionTensor, path) -> None:
    """Debug-friendly JSON export of the sparse entries (1-based indices)."""
    order = np.lexsort((tensor.indices[:, 2], tensor.indices[:, 1], tensor.indices[:, 0]))
    doc = {
        "partition": tensor.partition_name,
        "d": tensor.d,
        "mode": tensor.mode,
        "sample_count": tensor.sample_count,
        "seed": tensor.seed,
        "entries": [
            [int(tensor.indices[n, 0] + 1), int(tensor.indices[n, 1] + 1),
             int(tensor.indices[n, 2] + 1), float(tensor.values[n])]
            for n in order
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def tensor_cache_path(cache_dir, partition_name: str, mode: str, samples_per_region: int, seed: int) -> Path:
    return Path(cache_dir) / f"{partition_name}_{mode}_{samples_per_region}_{seed}.qct"


def load_or_build(
    partition: SpacePartition,
    samples_per_region: int,
    mode: str = "probabilistic",
    seed: int = 0,
    cache_dir=None,
) -> CompositionTensor:
    """Build a tensor, reusing an on-disk cache when one is given."""
    if cache_dir is None:
        return build_tensor(partition, samples_per_region, mode, seed)
    path = tensor_cache_path(cache_dir, partition.name, mode, samples_per_region, seed)
    if path.exists():
        return load_tensor(path)
    tensor = build_tensor(partition, samples_per_region, mode, seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_tensor(tensor, path)
    return tensor
