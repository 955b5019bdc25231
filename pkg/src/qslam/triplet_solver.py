"""Posterior qualitative states for one landmark triplet from bearings.

Three estimators over the same AB-frame inputs:

* ``solve_full``: global sampling over trajectory hypotheses.  First-view
  poses are drawn around the measurement-perturbed locus circle; later views
  are matched to earlier hypotheses through the heading model; each
  hypothesis
  keeps one triangulated target-landmark point and is weighted by heading
  and target-bearing consistency.
* ``solve_fast``: samples only the first pose on the exact locus circle and
  chains later poses through exact ray/circle intersections; weights still
  come from the noise models.
* ``solve_baseline``: ignores the motion model; views are independent pose
  clouds and target candidates are scored by per-view marginal likelihood.

With both noise magnitudes exactly zero the full solver switches to a
deterministic arc scan with local root refinement, recovering the unique
noise-free solution to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigurationError
from .geometry import locus_params, orientations_at, ray_pair_intersections, wrap_angle
from .models import NoiseConfig, gaussian_logpdf
from .partition import SpacePartition, normalize_state, uniform_state

_FORWARD_TOL = 1e-12
_ZERO_ROOT_TOL = 1e-9


@dataclass(frozen=True)
class SolverParams:
    pose_samples: int = 200
    motion_gate_sigmas: float = 3.0
    prune_ratio: float = 1e-3
    max_hypotheses: int = 5000
    single_view_landmark_samples: int = 20
    baseline_landmark_samples: int = 100
    zero_noise_scan: int = 1024
    sigma_floor: float = 1e-3  # radians; regularizes degenerate weighting


@dataclass(frozen=True)
class TripletPosterior:
    landmark_state: np.ndarray
    camera_states: tuple
    hypothesis_count: int
    solver_variant: str
    degraded: bool = False


@dataclass
class _Views:
    phi_a: np.ndarray
    phi_b: np.ndarray
    phi_c: np.ndarray
    psis: np.ndarray  # between consecutive views, length n-1


def _prepare(observations, actions) -> _Views:
    if not observations:
        raise ValueError("at least one observation is required")
    obs = sorted(observations, key=lambda o: o.time_index)
    trip = obs[0].triplet_id
    if any(o.triplet_id != trip for o in obs):
        raise ValueError("observations mix different triplets")
    psi_by_time = {a.time_index: a.psi for a in actions}
    psis = []
    for prev, nxt in zip(obs[:-1], obs[1:]):
        if prev.time_index not in psi_by_time:
            raise ValueError(f"missing action for step {prev.time_index}")
        if nxt.time_index != prev.time_index + 1:
            raise ValueError("observations must cover consecutive time steps")
        psis.append(psi_by_time[prev.time_index])
    return _Views(
        phi_a=np.array([o.bearings[0] for o in obs]),
        phi_b=np.array([o.bearings[1] for o in obs]),
        phi_c=np.array([o.bearings[2] for o in obs]),
        psis=np.array(psis),
    )


def _sample_circle_poses(phi_a, phi_b, sigma_v, count, rng):
    """Pose samples consistent with the two frame-landmark bearings."""
    d_a = rng.normal(0.0, sigma_v, size=count) if sigma_v > 0.0 else np.zeros(count)
    d_b = rng.normal(0.0, sigma_v, size=count) if sigma_v > 0.0 else np.zeros(count)
    cx, cy, radius, side, arc_start, arc_span, valid = locus_params(phi_a + d_a, phi_b + d_b)
    u = rng.random(count)
    theta = arc_start + u * arc_span
    x = cx + radius * np.cos(theta)
    y = cy + radius * np.sin(theta)
    alpha = orientations_at(x, y, phi_a + d_a)
    pos = np.stack([x, y], axis=1)
    return pos[valid], alpha[valid]


def _arc_poses_exact(phi_a, phi_b, u):
    cx, cy, radius, side, arc_start, arc_span, valid = locus_params(phi_a, phi_b)
    if not valid:
        raise ConfigurationError("degenerate frame-landmark bearings")
    theta = arc_start + u * arc_span
    x = cx + radius * np.cos(theta)
    y = cy + radius * np.sin(theta)
    return np.stack([x, y], axis=1), orientations_at(x, y, phi_a)


def _ray_circle_children(origins, psi, cx, cy, radius, side):
    """Forward ray/circle intersections for a batch of chain endpoints.

    Returns (parent_indices, points).  Each parent maps to 0..2 children.
    """
    d = np.array([math.cos(psi), math.sin(psi)])
    rel = origins - np.array([cx, cy])
    b = rel @ d
    q = np.einsum("ij,ij->i", rel, rel) - radius * radius
    disc = b * b - q
    parents = []
    points = []
    ok = disc >= 0.0
    root = np.sqrt(np.maximum(disc, 0.0))
    for ts in (-b - root, -b + root):
        keep = ok & (ts > _FORWARD_TOL)
        pts = origins[keep] + ts[keep, None] * d[None, :]
        on_side = np.sign(pts[:, 0]) == side
        parents.append(np.flatnonzero(keep)[on_side])
        points.append(pts[on_side])
    # A tangent contact would duplicate the root; drop exact duplicates.
    par = np.concatenate(parents)
    pts = np.concatenate(points)
    if len(par) > 1:
        order = np.argsort(par, kind="stable")
        par, pts = par[order], pts[order]
        dup = np.zeros(len(par), dtype=bool)
        same_parent = par[1:] == par[:-1]
        close = np.linalg.norm(pts[1:] - pts[:-1], axis=1) < 1e-12
        dup[1:] = same_parent & close
        par, pts = par[~dup], pts[~dup]
    return par, pts


def _triangulate_batch(positions, alphas, phi_c):
    """Vectorized pairwise-ray triangulation.

    positions: (H, n, 2); alphas: (H, n); phi_c: (n,).
    Returns (targets (H, 2), valid (H,)).
    """
    angles = alphas + phi_c[None, :]
    pts, ok = ray_pair_intersections(positions, angles)
    counts = ok.sum(axis=1)
    valid = counts > 0
    weights = ok.astype(float)
    sums = np.einsum("hpc,hp->hc", pts, weights)
    targets = np.full((positions.shape[0], 2), np.nan)
    targets[valid] = sums[valid] / counts[valid, None]
    return targets, valid


def _resection_logw(positions, alphas, phi_c, targets, sigma):
    rel = targets[:, None, :] - positions
    predicted = np.arctan2(rel[..., 1], rel[..., 0]) - alphas
    res = wrap_angle(phi_c[None, :] - predicted)
    return gaussian_logpdf(res, sigma).sum(axis=1), res


def _aggregate(partition, targets, positions, logw, variant, degraded=False):
    d = partition.d
    if len(logw) == 0:
        uniform = uniform_state(d)
        n = positions.shape[1] if positions.ndim == 3 else 1
        return TripletPosterior(uniform, tuple(uniform.copy() for _ in range(n)), 0, variant, True)
    w = np.exp(logw - logw.max())
    w /= w.sum()
    landmark = np.bincount(partition.classify(targets) - 1, weights=w, minlength=d)
    cameras = []
    for t in range(positions.shape[1]):
        cameras.append(normalize_state(
            np.bincount(partition.classify(positions[:, t]) - 1, weights=w, minlength=d)
        ))
    return TripletPosterior(normalize_state(landmark), tuple(cameras), len(logw), variant, degraded)


def _ray_box_span(origins, angles, borders):
    """Slab intersection of forward rays with the border box: (t0, t1, hit)."""
    xmin, xmax, ymin, ymax = borders
    dx = np.cos(angles)
    dy = np.sin(angles)
    t_lo = np.zeros(len(angles))
    t_hi = np.full(len(angles), np.inf)
    for o, dcomp, lo, hi in ((origins[:, 0], dx, xmin, xmax), (origins[:, 1], dy, ymin, ymax)):
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo - o) / dcomp
            t2 = (hi - o) / dcomp
        near = np.minimum(t1, t2)
        far = np.maximum(t1, t2)
        axis_parallel = np.abs(dcomp) < 1e-15
        inside = (o >= lo) & (o <= hi)
        near = np.where(axis_parallel, np.where(inside, -np.inf, np.inf), near)
        far = np.where(axis_parallel, np.where(inside, np.inf, -np.inf), far)
        t_lo = np.maximum(t_lo, near)
        t_hi = np.minimum(t_hi, far)
    hit = t_hi > t_lo
    return t_lo, t_hi, hit


def _solve_single_view(views, noise, partition, params, rng, variant):
    if variant == "fast":
        u = rng.random(params.pose_samples)
        pos, alpha = _arc_poses_exact(views.phi_a[0], views.phi_b[0], u)
    else:
        pos, alpha = _sample_circle_poses(
            views.phi_a[0], views.phi_b[0], noise.sigma_v, params.pose_samples, rng
        )
    if len(pos) == 0:
        return _aggregate(partition, np.zeros((0, 2)), np.zeros((0, 1, 2)), np.zeros(0), variant)
    k = params.single_view_landmark_samples
    angles = alpha + views.phi_c[0]
    t0, t1, hit = _ray_box_span(pos, angles, partition.borders)
    pos, alpha, angles, t0, t1 = pos[hit], alpha[hit], angles[hit], t0[hit], t1[hit]
    if len(pos) == 0:
        return _aggregate(partition, np.zeros((0, 2)), np.zeros((0, 1, 2)), np.zeros(0), variant)
    ts = t0[:, None] + (t1 - t0)[:, None] * rng.random((len(pos), k))
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    targets = (pos[:, None, :] + ts[..., None] * dirs[:, None, :]).reshape(-1, 2)
    positions = np.repeat(pos, k, axis=0)[:, None, :]
    logw = np.zeros(len(targets))
    return _aggregate(partition, targets, positions, logw, variant)


def _extend_chain_exact(positions, alphas, logw, view_idx, views, sigma_v, rng):
    """Grow every chain through an exact motion-ray/circle intersection."""
    count = len(logw)
    psi = views.psis[view_idx - 1]
    if sigma_v > 0.0:
        d_a = rng.normal(0.0, sigma_v, size=count)
        d_b = rng.normal(0.0, sigma_v, size=count)
    else:
        d_a = np.zeros(count)
        d_b = np.zeros(count)
    phi_a = views.phi_a[view_idx] + d_a
    phi_b = views.phi_b[view_idx] + d_b
    cx, cy, radius, side, _, _, valid = locus_params(phi_a, phi_b)
    parents_all = []
    points_all = []
    # Per-chain circles differ, so intersect in a vectorized sweep per root.
    d = np.array([math.cos(psi), math.sin(psi)])
    rel = positions[:, view_idx - 1, :] - np.stack([cx, cy], axis=1)
    b = np.einsum("ij,j->i", rel, d)
    q = np.einsum("ij,ij->i", rel, rel) - radius * radius
    disc = b * b - q
    ok = valid & (disc >= 0.0)
    root = np.sqrt(np.maximum(disc, 0.0))
    for ts in (-b - root, -b + root):
        keep = ok & (ts > _FORWARD_TOL)
        pts = positions[keep, view_idx - 1, :] + ts[keep, None] * d[None, :]
        on_side = np.sign(pts[:, 0]) == side[keep]
        parents_all.append(np.flatnonzero(keep)[on_side])
        points_all.append(pts[on_side])
    parents = np.concatenate(parents_all)
    points = np.concatenate(points_all)
    new_alpha = orientations_at(points[:, 0], points[:, 1], phi_a[parents])
    n_new = len(parents)
    grown_pos = np.concatenate(
        [positions[parents], points.reshape(n_new, 1, 2)], axis=1
    )
    grown_alpha = np.concatenate([alphas[parents], new_alpha[:, None]], axis=1)
    return grown_pos, grown_alpha, logw[parents]


def solve_full(
    observations,
    actions,
    noise: NoiseConfig,
    partition: SpacePartition,
    params: SolverParams = SolverParams(),
    rng: np.random.Generator | None = None,
) -> TripletPosterior:
    rng = rng if rng is not None else np.random.default_rng(0)
    views = _prepare(observations, actions)
    n = len(views.phi_a)
    if n == 1:
        return _solve_single_view(views, noise, partition, params, rng, "full")
    if noise.sigma_v == 0.0 and noise.sigma_w == 0.0:
        return _solve_zero_noise(views, partition, params, "full")

    sigma_wr = max(noise.sigma_v, params.sigma_floor)
    pos0, alpha0 = _sample_circle_poses(
        views.phi_a[0], views.phi_b[0], noise.sigma_v, params.pose_samples, rng
    )
    positions = pos0[:, None, :]
    alphas = alpha0[:, None]
    logw_motion = np.zeros(len(pos0))

    for i in range(1, n):
        if len(logw_motion) == 0:
            break
        if noise.sigma_w > 0.0:
            cand_pos, cand_alpha = _sample_circle_poses(
                views.phi_a[i], views.phi_b[i], noise.sigma_v, params.pose_samples, rng
            )
            rel = cand_pos[None, :, :] - positions[:, None, i - 1, :]
            az = np.arctan2(rel[..., 1], rel[..., 0])
            res = wrap_angle(az - views.psis[i - 1])
            gate = np.abs(res) <= params.motion_gate_sigmas * noise.sigma_w
            h_idx, s_idx = np.nonzero(gate)
            if len(h_idx) > 20 * params.max_hypotheses:
                lw = logw_motion[h_idx] + gaussian_logpdf(res[h_idx, s_idx], noise.sigma_w)
                order = np.argsort(-lw, kind="stable")[: 20 * params.max_hypotheses]
                h_idx, s_idx = h_idx[order], s_idx[order]
            positions = np.concatenate(
                [positions[h_idx], cand_pos[s_idx][:, None, :]], axis=1
            )
            alphas = np.concatenate([alphas[h_idx], cand_alpha[s_idx][:, None]], axis=1)
            logw_motion = logw_motion[h_idx] + gaussian_logpdf(res[h_idx, s_idx], noise.sigma_w)
        else:
            positions, alphas, logw_motion = _extend_chain_exact(
                positions, alphas, logw_motion, i, views, noise.sigma_v, rng
            )
        if len(logw_motion) == 0:
            break
        targets, valid = _triangulate_batch(positions, alphas, views.phi_c[: i + 1])
        logw_res, _ = _resection_logw(
            positions, alphas, views.phi_c[: i + 1], targets, sigma_wr
        )
        total = np.where(valid, logw_motion + logw_res, -np.inf)
        keep = np.isfinite(total)
        if keep.any():
            cutoff = total[keep].max() + math.log(params.prune_ratio)
            keep &= total >= cutoff
        idx = np.flatnonzero(keep)
        if len(idx) > params.max_hypotheses:
            order = np.argsort(-total[idx], kind="stable")[: params.max_hypotheses]
            idx = idx[order]
        positions, alphas, logw_motion = positions[idx], alphas[idx], logw_motion[idx]

    if len(logw_motion) == 0:
        return _aggregate(partition, np.zeros((0, 2)), np.zeros((0, n, 2)), np.zeros(0), "full")
    targets, valid = _triangulate_batch(positions, alphas, views.phi_c)
    logw_res, _ = _resection_logw(positions, alphas, views.phi_c, targets, sigma_wr)
    total = np.where(valid, logw_motion + logw_res, -np.inf)
    keep = np.isfinite(total)
    return _aggregate(partition, targets[keep], positions[keep], total[keep], "full")


def solve_fast(
    observations,
    actions,
    noise: NoiseConfig,
    partition: SpacePartition,
    params: SolverParams = SolverParams(),
    rng: np.random.Generator | None = None,
) -> TripletPosterior:
    rng = rng if rng is not None else np.random.default_rng(0)
    views = _prepare(observations, actions)
    n = len(views.phi_a)
    if n == 1:
        return _solve_single_view(views, noise, partition, params, rng, "fast")
    if noise.sigma_v == 0.0 and noise.sigma_w == 0.0:
        return _solve_zero_noise(views, partition, params, "fast")

    u = rng.random(params.pose_samples)
    pos0, alpha0 = _arc_poses_exact(views.phi_a[0], views.phi_b[0], u)
    positions = pos0[:, None, :]
    alphas = alpha0[:, None]
    circles = [locus_params(views.phi_a[i], views.phi_b[i]) for i in range(n)]
    for i in range(1, n):
        cx, cy, radius, side, _, _, valid = circles[i]
        if not valid:
            raise ConfigurationError("degenerate frame-landmark bearings")
        parents, points = _ray_circle_children(
            positions[:, i - 1, :], views.psis[i - 1], float(cx), float(cy), float(radius), int(side)
        )
        if len(parents) == 0:
            return _aggregate(partition, np.zeros((0, 2)), np.zeros((0, n, 2)), np.zeros(0), "fast")
        new_alpha = orientations_at(points[:, 0], points[:, 1], views.phi_a[i])
        positions = np.concatenate([positions[parents], points[:, None, :]], axis=1)
        alphas = np.concatenate([alphas[parents], new_alpha[:, None]], axis=1)

    targets, valid = _triangulate_batch(positions, alphas, views.phi_c)
    sigma_wr = max(noise.sigma_v, params.sigma_floor)
    logw, _ = _resection_logw(positions, alphas, views.phi_c, targets, sigma_wr)
    logw = np.where(valid, logw, -np.inf)
    keep = np.isfinite(logw)
    return _aggregate(partition, targets[keep], positions[keep], logw[keep], "fast")


def solve_baseline(
    observations,
    actions,
    noise: NoiseConfig,
    partition: SpacePartition,
    params: SolverParams = SolverParams(),
    rng: np.random.Generator | None = None,
) -> TripletPosterior:
    """Motion-model-free estimation: independent per-view pose clouds."""
    rng = rng if rng is not None else np.random.default_rng(0)
    views = _prepare_baseline(observations)
    n = len(views.phi_a)
    sigma_wr = max(noise.sigma_v, params.sigma_floor)

    view_pos = []
    view_alpha = []
    for i in range(n):
        pos, alpha = _sample_circle_poses(
            views.phi_a[i], views.phi_b[i], noise.sigma_v, params.pose_samples, rng
        )
        if len(pos) == 0:
            return TripletPosterior(
                uniform_state(partition.d),
                tuple(uniform_state(partition.d) for _ in range(n)),
                0,
                "baseline",
                True,
            )
        view_pos.append(pos)
        view_alpha.append(alpha)

    # Pool target candidates: per view, samples along per-pose sight rays.
    cand = []
    for i in range(n):
        k = params.baseline_landmark_samples
        pick = rng.integers(0, len(view_pos[i]), size=k)
        origins = view_pos[i][pick]
        angles = view_alpha[i][pick] + views.phi_c[i]
        t0, t1, hit = _ray_box_span(origins, angles, partition.borders)
        ts = t0 + (t1 - t0) * rng.random(k)
        pts = origins + ts[:, None] * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        cand.append(pts[hit])
    targets = np.concatenate(cand, axis=0)
    if len(targets) == 0:
        return TripletPosterior(
            uniform_state(partition.d),
            tuple(uniform_state(partition.d) for _ in range(n)),
            0,
            "baseline",
            True,
        )

    # log p(phi_c_i | pose_k, target_c) for every view, pose sample, candidate
    per_view_logmean = []
    per_view_logm = []
    for i in range(n):
        rel = targets[None, :, :] - view_pos[i][:, None, :]
        predicted = np.arctan2(rel[..., 1], rel[..., 0]) - view_alpha[i][:, None]
        res = wrap_angle(views.phi_c[i] - predicted)
        logm = gaussian_logpdf(res, sigma_wr)
        mx = logm.max(axis=0)
        logmean = mx + np.log(np.exp(logm - mx).mean(axis=0))
        per_view_logm.append(logm)
        per_view_logmean.append(logmean)
    score = np.sum(per_view_logmean, axis=0)

    w = np.exp(score - score.max())
    total = w.sum()
    if not np.isfinite(total) or total <= 0.0:
        return TripletPosterior(
            uniform_state(partition.d),
            tuple(uniform_state(partition.d) for _ in range(n)),
            len(targets),
            "baseline",
            True,
        )
    w /= total
    landmark = normalize_state(
        np.bincount(partition.classify(targets) - 1, weights=w, minlength=partition.d)
    )
    cameras = []
    for i in range(n):
        # P(pose_k) ~ sum_c score_c * p(view i | pose_k, c) / mean_k p(view i | ., c)
        contrib = score - per_view_logmean[i] + per_view_logm[i]
        mx = contrib.max()
        wk = np.exp(contrib - mx).sum(axis=1)
        wk /= wk.sum()
        cameras.append(normalize_state(
            np.bincount(partition.classify(view_pos[i]) - 1, weights=wk, minlength=partition.d)
        ))
    return TripletPosterior(landmark, tuple(cameras), len(targets), "baseline", False)


def _prepare_baseline(observations) -> _Views:
    if not observations:
        raise ValueError("at least one observation is required")
    obs = sorted(observations, key=lambda o: o.time_index)
    trip = obs[0].triplet_id
    if any(o.triplet_id != trip for o in obs):
        raise ValueError("observations mix different triplets")
    return _Views(
        phi_a=np.array([o.bearings[0] for o in obs]),
        phi_b=np.array([o.bearings[1] for o in obs]),
        phi_c=np.array([o.bearings[2] for o in obs]),
        psis=np.zeros(max(len(obs) - 1, 0)),
    )


# ---------------------------------------------------------------------------
# Exact zero-noise path: deterministic arc scan plus local refinement.
# ---------------------------------------------------------------------------


def _chain_for_theta(theta, sig, views, circ0):
    """Rebuild the chain for a first-pose arc angle and branch signature.

    Returns (positions (n,2), alphas (n,)) or None when the branch breaks.
    """
    cx, cy, radius = float(circ0[0]), float(circ0[1]), float(circ0[2])
    n = len(views.phi_a)
    x = cx + radius * math.cos(theta)
    y = cy + radius * math.sin(theta)
    pos = [(x, y)]
    alphas = [float(orientations_at(x, y, views.phi_a[0]))]
    for i in range(1, n):
        ci = locus_params(views.phi_a[i], views.phi_b[i])
        icx, icy, irad, iside = float(ci[0]), float(ci[1]), float(ci[2]), int(ci[3])
        psi = views.psis[i - 1]
        d = (math.cos(psi), math.sin(psi))
        relx, rely = pos[-1][0] - icx, pos[-1][1] - icy
        b = relx * d[0] + rely * d[1]
        q = relx * relx + rely * rely - irad * irad
        disc = b * b - q
        if disc < 0.0:
            return None
        root = math.sqrt(disc)
        ts = (-b - root, -b + root)
        t = ts[sig[i - 1]]
        if t <= _FORWARD_TOL:
            return None
        px, py = pos[-1][0] + t * d[0], pos[-1][1] + t * d[1]
        if np.sign(px) != iside:
            return None
        pos.append((px, py))
        alphas.append(float(orientations_at(px, py, views.phi_a[i])))
    return np.array(pos), np.array(alphas)


def _zero_noise_residual(theta, sig, views, circ0):
    chain = _chain_for_theta(theta, sig, views, circ0)
    if chain is None:
        return np.inf, None, None
    pos, alphas = chain
    targets, valid = _triangulate_batch(pos[None], alphas[None], views.phi_c)
    if not valid[0]:
        return np.inf, None, None
    rel = targets[0][None, :] - pos
    predicted = np.arctan2(rel[:, 1], rel[:, 0]) - alphas
    res = wrap_angle(views.phi_c - predicted)
    return float(np.sum(res * res)), chain, targets[0]


def _scan_chains(views, circ0, thetas):
    """Vectorized chain construction over a theta grid, tracking branch bits.

    Returns (theta_idx, sig, positions, alphas) for all surviving chains.
    """
    n = len(views.phi_a)
    cx, cy, radius = float(circ0[0]), float(circ0[1]), float(circ0[2])
    x = cx + radius * np.cos(thetas)
    y = cy + radius * np.sin(thetas)
    positions = np.stack([x, y], axis=1)[:, None, :]
    alphas = orientations_at(x, y, views.phi_a[0])[:, None]
    theta_idx = np.arange(len(thetas))
    sig = np.zeros(len(thetas), dtype=np.int64)
    for i in range(1, n):
        ci = locus_params(views.phi_a[i], views.phi_b[i])
        if not ci[6]:
            raise ConfigurationError("degenerate frame-landmark bearings")
        icx, icy, irad, iside = float(ci[0]), float(ci[1]), float(ci[2]), int(ci[3])
        psi = views.psis[i - 1]
        d = np.array([math.cos(psi), math.sin(psi)])
        rel = positions[:, i - 1, :] - np.array([icx, icy])
        b = rel @ d
        q = np.einsum("ij,ij->i", rel, rel) - irad * irad
        disc = b * b - q
        ok = disc >= 0.0
        root = np.sqrt(np.maximum(disc, 0.0))
        parts = []
        for bit, ts in enumerate((-b - root, -b + root)):
            keep = ok & (ts > _FORWARD_TOL)
            pts = positions[keep, i - 1, :] + ts[keep, None] * d[None, :]
            on_side = np.sign(pts[:, 0]) == iside
            parents = np.flatnonzero(keep)[on_side]
            pts = pts[on_side]
            new_alpha = orientations_at(pts[:, 0], pts[:, 1], views.phi_a[i])
            parts.append((
                theta_idx[parents],
                sig[parents] * 2 + bit,
                np.concatenate([positions[parents], pts[:, None, :]], axis=1),
                np.concatenate([alphas[parents], new_alpha[:, None]], axis=1),
            ))
        theta_idx = np.concatenate([p[0] for p in parts])
        sig = np.concatenate([p[1] for p in parts])
        positions = np.concatenate([p[2] for p in parts], axis=0)
        alphas = np.concatenate([p[3] for p in parts], axis=0)
        if len(theta_idx) == 0:
            break
    return theta_idx, sig, positions, alphas


def _sig_tuple(sig, steps):
    return tuple((int(sig) >> (steps - 1 - s)) & 1 for s in range(steps))


def _solve_zero_noise(views, partition, params, variant):
    n = len(views.phi_a)
    circ0 = locus_params(views.phi_a[0], views.phi_b[0])
    if not circ0[6]:
        raise ConfigurationError("degenerate frame-landmark bearings")
    arc_start, arc_span = float(circ0[4]), float(circ0[5])
    g = params.zero_noise_scan
    thetas = arc_start + (np.arange(g) + 0.5) / g * arc_span

    theta_idx, sig, positions, alphas = _scan_chains(views, circ0, thetas)
    if len(theta_idx) == 0:
        return _aggregate(partition, np.zeros((0, 2)), np.zeros((0, n, 2)), np.zeros(0), variant)
    targets, valid = _triangulate_batch(positions, alphas, views.phi_c)
    rel = targets[:, None, :] - positions
    predicted = np.arctan2(rel[..., 1], rel[..., 0]) - alphas
    res = wrap_angle(views.phi_c[None, :] - predicted)
    r2 = np.where(valid, np.sum(res * res, axis=1), np.inf)

    if n == 2:
        # Under-determined: every consistent chain is an exact solution.
        keep = np.isfinite(r2) & (r2 <= _ZERO_ROOT_TOL)
        return _aggregate(
            partition, targets[keep], positions[keep], np.zeros(int(keep.sum())), variant
        )

    roots = []
    for s in np.unique(sig):
        mask = sig == s
        grid_r2 = np.full(g, np.inf)
        grid_r2[theta_idx[mask]] = r2[mask]
        finite = np.isfinite(grid_r2)
        sig_t = _sig_tuple(s, n - 1)
        for k in np.flatnonzero(finite):
            left = grid_r2[k - 1] if k > 0 and finite[k - 1] else np.inf
            right = grid_r2[k + 1] if k < g - 1 and finite[k + 1] else np.inf
            if grid_r2[k] <= left and grid_r2[k] <= right:
                lo = thetas[max(k - 1, 0)]
                hi = thetas[min(k + 1, g - 1)]
                opt = minimize_scalar(
                    lambda t: _zero_noise_residual(t, sig_t, views, circ0)[0],
                    bounds=(lo, hi),
                    method="bounded",
                    options={"xatol": 1e-14},
                )
                r2_star, chain, target = _zero_noise_residual(float(opt.x), sig_t, views, circ0)
                if np.isfinite(r2_star) and r2_star <= _ZERO_ROOT_TOL**2:
                    roots.append((chain, target))
    unique = []
    for chain, target in roots:
        if all(np.linalg.norm(target - t2) > 1e-6 for _, t2 in unique):
            unique.append((chain, target))
    if not unique:
        # No exact root found: soft weighting of the scanned chains.
        keep = np.isfinite(r2)
        logw = -0.5 * r2[keep] / params.sigma_floor**2
        return _aggregate(partition, targets[keep], positions[keep], logw, variant)
    root_targets = np.array([t for _, t in unique])
    root_pos = np.array([c[0] for c, _ in unique])
    return _aggregate(partition, root_targets, root_pos, np.zeros(len(unique)), variant)


def solve(
    variant: str,
    observations,
    actions,
    noise: NoiseConfig,
    partition: SpacePartition,
    params: SolverParams = SolverParams(),
    rng: np.random.Generator | None = None,
) -> TripletPosterior:
    """Dispatch by solver variant name ('full', 'fast', 'baseline')."""
    if variant == "full":
        return solve_full(observations, actions, noise, partition, params, rng)
    if variant == "fast":
        return solve_fast(observations, actions, noise, partition, params, rng)
    if variant == "baseline":
        return solve_baseline(observations, actions, noise, partition, params, rng)
    raise ValueError(f"unknown solver variant {variant!r}")
