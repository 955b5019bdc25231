"""Random scenario generation and world-to-AB-frame conversion.

Scenarios live in a global metric frame.  Solvers operate per triplet in
that triplet's AB frame; bearings are body-frame angles and therefore carry
over unchanged, while heading commands and poses rotate with the frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError, ParseError
from .geometry import Pose2, wrap_angle
from .models import Action, NoiseConfig, Observation, sample_action, sample_observation
from .partition import SpacePartition
from .qfactor_graph import (
    QualitativeFactorGraph,
    connectivity_score,
    topology_score,
)

BOUNDS = ((-3.0, 3.0), (-3.0, 4.0))
MIN_DISTANCE = 0.01
_MAX_DRAWS = 10_000


@dataclass
class Scenario:
    landmarks: dict  # id -> np.ndarray(2)
    trajectory: list  # of Pose2, global frame
    observations: list  # of Observation
    actions: list  # of Action
    noise: NoiseConfig
    seed: int

    def triplet_ids(self):
        seen = []
        for obs in self.observations:
            if obs.triplet_id not in seen:
                seen.append(obs.triplet_id)
        return seen


@dataclass
class GraphScenario:
    scenario: Scenario
    graph: QualitativeFactorGraph
    coverage_rate: float
    connectivity: float


@dataclass(frozen=True)
class TripletFrame:
    """Solver-ready inputs for one triplet, in its AB frame."""

    triplet_id: tuple
    observations: tuple
    actions: tuple
    gt_landmark: np.ndarray  # target landmark C in AB units
    gt_poses: tuple  # Pose2 in AB frame
    scale: float  # |AB| in world units
    rotation: float  # world-to-frame rotation angle


def ab_transform(a_world, b_world):
    """Similarity sending a_world to (0,0) and b_world to (0,1).

    Returns (matrix, rotation) with points mapping as M @ (p - a_world).
    """
    a = np.asarray(a_world, dtype=float)
    b = np.asarray(b_world, dtype=float)
    d = b - a
    norm2 = float(d @ d)
    if norm2 < 1e-24:
        raise GenerationError("frame landmarks coincide")
    m = np.array([[d[1], -d[0]], [d[0], d[1]]]) / norm2
    return m, math.atan2(d[0], d[1])


def triplet_frame_inputs(scenario: Scenario, triplet_id=None) -> TripletFrame:
    """Convert one triplet's observations and actions into its AB frame."""
    if triplet_id is None:
        triplet_id = scenario.triplet_ids()[0]
    obs = [o for o in scenario.observations if o.triplet_id == tuple(triplet_id)]
    if not obs:
        raise ValueError(f"scenario has no observations of triplet {triplet_id}")
    obs.sort(key=lambda o: o.time_index)
    a_id, b_id, c_id = triplet_id
    matrix, rot = ab_transform(scenario.landmarks[a_id], scenario.landmarks[b_id])
    a_w = np.asarray(scenario.landmarks[a_id], dtype=float)
    gt_c = matrix @ (np.asarray(scenario.landmarks[c_id], dtype=float) - a_w)
    times = [o.time_index for o in obs]
    actions = []
    for t in times[:-1]:
        match = [a for a in scenario.actions if a.time_index == t]
        if match:
            actions.append(Action(time_index=t, psi=wrap_angle(match[0].psi + rot)))
    gt_poses = []
    for t in times:
        pose = scenario.trajectory[t]
        p = matrix @ (pose.position - a_w)
        gt_poses.append(Pose2(float(p[0]), float(p[1]), wrap_angle(pose.alpha + rot)))
    scale = float(np.linalg.norm(
        np.asarray(scenario.landmarks[b_id]) - np.asarray(scenario.landmarks[a_id])
    ))
    return TripletFrame(
        triplet_id=tuple(triplet_id),
        observations=tuple(obs),
        actions=tuple(actions),
        gt_landmark=gt_c,
        gt_poses=tuple(gt_poses),
        scale=scale,
        rotation=rot,
    )


def gt_state(frame: TripletFrame, partition: SpacePartition) -> int:
    return partition.classify_one(frame.gt_landmark)


def _draw_points(count, rng, existing=(), bounds=BOUNDS, min_distance=MIN_DISTANCE):
    """Uniform points respecting a pairwise minimum distance."""
    points = [np.asarray(p, dtype=float) for p in existing]
    fresh = []
    (xmin, xmax), (ymin, ymax) = bounds
    for _ in range(count):
        for attempt in range(_MAX_DRAWS):
            p = np.array([rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)])
            if all(np.linalg.norm(p - q) >= min_distance for q in points):
                points.append(p)
                fresh.append(p)
                break
        else:
            raise GenerationError("could not satisfy the minimum-distance constraint")
    return fresh


def gen_triplet_scenario(
    noise: NoiseConfig,
    views: int,
    rng: np.random.Generator,
    seed: int = 0,
    triplet_id=(0, 1, 2),
) -> Scenario:
    """One random triplet observed from ``views`` random poses."""
    if views < 1:
        raise ValueError("views must be >= 1")
    pts = _draw_points(3 + views, rng)
    landmarks = {tid: pts[i] for i, tid in enumerate(triplet_id)}
    trajectory = [
        Pose2(float(p[0]), float(p[1]), float(rng.uniform(-math.pi, math.pi)))
        for p in pts[3:]
    ]
    lms = [landmarks[tid] for tid in triplet_id]
    observations = [
        sample_observation(pose, lms, triplet_id, t, noise, rng)
        for t, pose in enumerate(trajectory)
    ]
    actions = [
        sample_action(trajectory[t], trajectory[t + 1], t, noise, rng)
        for t in range(views - 1)
    ]
    return Scenario(landmarks, trajectory, observations, actions, noise, seed)


DEFAULT_SIGMA_V_DEG = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
DEFAULT_SIGMA_W_DEG = (0.0, 4.0, 8.0, 12.0, 16.0, 20.0)


def gen_experiment_grid(
    noise_grid=None,
    scenarios_per_cell: int = 300,
    views: int = 3,
    seed: int = 0,
):
    """Scenario batch over a noise grid; default 36 cells x 300 = 10800."""
    if noise_grid is None:
        noise_grid = [
            (sv, sw) for sv in DEFAULT_SIGMA_V_DEG for sw in DEFAULT_SIGMA_W_DEG
        ]
    scenarios = []
    for cell, (sv_deg, sw_deg) in enumerate(noise_grid):
        noise = NoiseConfig.from_degrees(sv_deg, sw_deg)
        for rep in range(scenarios_per_cell):
            child_seed = np.random.SeedSequence((seed, cell, rep))
            rng = np.random.default_rng(child_seed)
            scenarios.append(
                gen_triplet_scenario(noise, views, rng, seed=cell * scenarios_per_cell + rep)
            )
    return scenarios


def _all_composition_quads(landmark_ids):
    ids = list(landmark_ids)
    quads = []
    for a in ids:
        for b in ids:
            for c in ids:
                for d in ids:
                    if len({a, b, c, d}) == 4:
                        quads.append((a, b, c, d))
    return quads


def _graph_from_quads(quads, coverage_rate, rng, d):
    graph = QualitativeFactorGraph(d=d)
    triplet_ids = {}
    for a, b, c, dd in quads:
        for trip in ((a, b, c), (b, c, dd), (a, b, dd)):
            if trip not in triplet_ids:
                triplet_ids[trip] = len(triplet_ids)
    n_v = len(triplet_ids)
    n_seen = int(round(n_v * coverage_rate))
    seen_rows = set(rng.choice(n_v, size=n_seen, replace=False).tolist()) if n_seen else set()
    for trip, vid in triplet_ids.items():
        graph.add_variable(vid, trip, seen=vid in seen_rows)
    for a, b, c, dd in quads:
        graph.add_factor((
            triplet_ids[(a, b, c)],
            triplet_ids[(b, c, dd)],
            triplet_ids[(a, b, dd)],
        ))
    return graph


def gen_graph_scenario(
    landmark_count: int,
    factor_count: int,
    coverage_rate: float,
    candidates: int,
    noise: NoiseConfig,
    rng: np.random.Generator,
    views: int = 3,
    partition_d: int = 20,
    seed: int = 0,
) -> GraphScenario:
    """Random factor-graph scenario, selected for topological variety.

    ``candidates`` random factor subsets are scored by connectivity (entropy
    of the selection-mode topology-score histogram) and the best one keeps
    observations for its seen triplets.
    """
    if candidates < 1:
        raise ValueError("candidates must be >= 1")
    if landmark_count < 4:
        raise GenerationError("composition factors need at least 4 landmarks")
    quad_pool = _all_composition_quads(range(landmark_count))
    if factor_count > len(quad_pool):
        raise GenerationError("factor_count exceeds available landmark quadruples")

    best = None
    for _ in range(candidates):
        pick = rng.choice(len(quad_pool), size=factor_count, replace=False)
        quads = [quad_pool[i] for i in pick]
        graph = _graph_from_quads(quads, coverage_rate, rng, partition_d)
        topology_score(graph, selection_mode=True)
        score = connectivity_score(graph)
        if best is None or score > best[0]:
            best = (score, quads, graph)
    score, quads, graph = best

    lm_points = _draw_points(landmark_count, rng)
    landmarks = {i: lm_points[i] for i in range(landmark_count)}
    trajectory = []
    observations = []
    actions = []
    placed = list(lm_points)
    for node in sorted(graph.variables.values(), key=lambda n: n.id):
        if not node.seen:
            continue
        poses_pts = _draw_points(views, rng, existing=placed)
        placed.extend(poses_pts)
        base = len(trajectory)
        poses = [
            Pose2(float(p[0]), float(p[1]), float(rng.uniform(-math.pi, math.pi)))
            for p in poses_pts
        ]
        trajectory.extend(poses)
        lms = [landmarks[i] for i in node.triplet]
        for k, pose in enumerate(poses):
            observations.append(
                sample_observation(pose, lms, node.triplet, base + k, noise, rng)
            )
        for k in range(views - 1):
            actions.append(sample_action(poses[k], poses[k + 1], base + k, noise, rng))
    scenario = Scenario(landmarks, trajectory, observations, actions, noise, seed)
    return GraphScenario(scenario, graph, coverage_rate, float(score))


# ---------------------------------------------------------------------------
# Scenario file format (angles in degrees).
# ---------------------------------------------------------------------------


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "landmarks": {str(k): [float(v[0]), float(v[1])] for k, v in scenario.landmarks.items()},
        "trajectory": [
            {"x": p.x, "y": p.y, "alpha_deg": math.degrees(p.alpha)} for p in scenario.trajectory
        ],
        "observations": [
            {
                "time_index": o.time_index,
                "triplet": list(o.triplet_id),
                "bearings_deg": [math.degrees(b) for b in o.bearings],
            }
            for o in scenario.observations
        ],
        "actions": [
            {"time_index": a.time_index, "psi_deg": math.degrees(a.psi)} for a in scenario.actions
        ],
        "noise": {"sigma_v_deg": scenario.noise.sigma_v_deg, "sigma_w_deg": scenario.noise.sigma_w_deg},
        "seed": scenario.seed,
    }


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        landmarks = {int(k): np.array(v, dtype=float) for k, v in doc["landmarks"].items()}
        trajectory = [
            Pose2(p["x"], p["y"], math.radians(p["alpha_deg"])) for p in doc["trajectory"]
        ]
        observations = [
            Observation(
                time_index=int(o["time_index"]),
                triplet_id=tuple(o["triplet"]),
                bearings=tuple(math.radians(b) for b in o["bearings_deg"]),
            )
            for o in doc["observations"]
        ]
        actions = [
            Action(time_index=int(a["time_index"]), psi=math.radians(a["psi_deg"]))
            for a in doc["actions"]
        ]
        noise = NoiseConfig.from_degrees(doc["noise"]["sigma_v_deg"], doc["noise"]["sigma_w_deg"])
        return Scenario(landmarks, trajectory, observations, actions, noise, int(doc.get("seed", 0)))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed scenario document: {exc}") from exc


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return scenario_from_dict(doc)
