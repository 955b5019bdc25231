"""Discrete qualitative factor graph over landmark-triplet states.

Variable nodes are triplet qualitative states; unary factors carry direct
measurement beliefs for seen triplets; trinary composition factors couple
triplets that pairwise share two landmarks.  Information propagates from
seen to unseen nodes through the composition tensor with a label-correcting
loop: per iteration every open factor proposes marginals for its non-updated
members and only the best-scoring candidate is committed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .composition import CompositionTensor, marginal
from .errors import ConfigurationError, ParseError
from .partition import normalize_state, uniform_state


def information_score(belief) -> float:
    """Normalized entropy distance from uniform: 0 = no info, 1 = certain."""
    belief = np.asarray(belief, dtype=float)
    d = len(belief)
    pos = belief[belief > 0.0]
    h = float(-(pos * np.log(pos)).sum())
    h_max = math.log(d)
    return (h_max - h) / h_max


@dataclass
class VariableNode:
    id: int
    triplet: tuple
    belief: np.ndarray
    seen: bool
    updated: bool = False
    isc: float | None = None
    tsc: float | None = None
    cl: int | None = None


@dataclass
class CompositionFactor:
    id: int
    members: tuple  # three variable ids in tensor slot order


@dataclass
class QualitativeFactorGraph:
    d: int
    variables: dict = field(default_factory=dict)  # id -> VariableNode
    unary: dict = field(default_factory=dict)  # id -> measurement belief
    factors: list = field(default_factory=list)

    def add_variable(self, var_id: int, triplet, seen: bool, belief=None) -> VariableNode:
        if var_id in self.variables:
            raise ValueError(f"duplicate variable id {var_id}")
        if belief is None:
            belief = uniform_state(self.d)
        node = VariableNode(var_id, tuple(triplet), normalize_state(belief), seen)
        self.variables[var_id] = node
        if seen:
            self.unary[var_id] = node.belief.copy()
        return node

    def add_factor(self, members) -> CompositionFactor:
        members = tuple(members)
        if len(members) != 3:
            raise ValueError("composition factors couple exactly three variables")
        for m in members:
            if m not in self.variables:
                raise ValueError(f"factor references unknown variable {m}")
        factor = CompositionFactor(len(self.factors), members)
        self.factors.append(factor)
        return factor

    def seen_ids(self):
        return [v.id for v in self.variables.values() if v.seen]

    def reset_propagation(self):
        for node in self.variables.values():
            node.updated = False
            node.isc = None
            node.tsc = None
            node.cl = None


def _candidates(graph, used, value_of):
    """Open-factor candidates: (factor, receivers, sources)."""
    out = []
    for factor in graph.factors:
        if factor.id in used:
            continue
        nodes = [graph.variables[m] for m in factor.members]
        updated = [node for node in nodes if node.updated]
        pending = [node for node in nodes if not node.updated]
        if not updated or not pending:
            continue
        out.append((factor, pending, updated))
    return out


def propagate(graph: QualitativeFactorGraph, tensor: CompositionTensor) -> QualitativeFactorGraph:
    """Composition-based information propagation to unseen nodes."""
    if tensor.d != graph.d:
        raise ConfigurationError("tensor dimension does not match graph")
    graph.reset_propagation()
    for node in graph.variables.values():
        if node.seen:
            node.updated = True
            node.belief = graph.unary[node.id].copy()
            node.isc = information_score(node.belief)
    used = set()
    while True:
        candidates = _candidates(graph, used, None)
        if not candidates:
            break
        proposals = []
        for factor, pending, updated in candidates:
            slot_of = {m: pos + 1 for pos, m in enumerate(factor.members)}
            commits = []
            for node in pending:
                others = [n for n in factor.members if n != node.id]
                va = _slot_belief(graph, others[0], pending)
                vb = _slot_belief(graph, others[1], pending)
                result = marginal(tensor, va, vb, slot=slot_of[node.id])
                commits.append((node, result.values, information_score(result.values)))
            score = float(np.mean([c[2] for c in commits]))
            tie_key = min(c[0].id for c in commits)
            proposals.append((score, tie_key, factor, commits))
        proposals.sort(key=lambda p: (-p[0], p[1], p[2].id))
        score, _, factor, commits = proposals[0]
        for node, values, isc in commits:
            node.belief = values
            node.isc = isc
            node.updated = True
        used.add(factor.id)
    for node in graph.variables.values():
        if not node.updated:
            node.belief = uniform_state(graph.d)
            node.isc = 0.0
    return graph


def _slot_belief(graph, var_id, pending):
    node = graph.variables[var_id]
    if node.updated:
        return node.belief
    # Non-updated co-member of a one-source factor carries no information.
    return uniform_state(graph.d)


def topology_score(
    graph: QualitativeFactorGraph,
    alpha: float = 0.5,
    selection_mode: bool = False,
) -> QualitativeFactorGraph:
    """Numeric decay-model analogue of :func:`propagate` (sets node.tsc)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    for node in graph.variables.values():
        node.updated = False
        node.tsc = None
    for node in graph.variables.values():
        if node.seen:
            node.updated = True
            if selection_mode:
                node.tsc = 1.0
            else:
                node.tsc = node.isc if node.isc is not None else information_score(
                    graph.unary[node.id]
                )
    used = set()
    while True:
        candidates = _candidates(graph, used, None)
        if not candidates:
            break
        proposals = []
        for factor, pending, updated in candidates:
            if len(updated) == 2:
                value = (1.0 - alpha * alpha) * 0.5 * (updated[0].tsc + updated[1].tsc)
            else:
                value = (1.0 - alpha) * updated[0].tsc
            commits = [(node, value) for node in pending]
            tie_key = min(node.id for node in pending)
            proposals.append((value, tie_key, factor, commits))
        proposals.sort(key=lambda p: (-p[0], p[1], p[2].id))
        value, _, factor, commits = proposals[0]
        for node, v in commits:
            node.tsc = v
            node.updated = True
        used.add(factor.id)
    for node in graph.variables.values():
        if not node.updated:
            node.tsc = 0.0
    return graph


def composition_level(graph: QualitativeFactorGraph) -> QualitativeFactorGraph:
    """Hop-count alternative to the decay model (sets node.cl)."""
    if not any(node.seen for node in graph.variables.values()):
        raise ValueError("composition level needs at least one seen node")
    for node in graph.variables.values():
        node.updated = False
        node.cl = None
    for node in graph.variables.values():
        if node.seen:
            node.updated = True
            node.cl = 0
    used = set()
    while True:
        candidates = _candidates(graph, used, None)
        if not candidates:
            break
        proposals = []
        for factor, pending, updated in candidates:
            if len(updated) == 2:
                value = min(updated[0].cl, updated[1].cl) + 1
            else:
                value = updated[0].cl + 1
            commits = [(node, value) for node in pending]
            tie_key = min(node.id for node in pending)
            proposals.append((value, tie_key, factor, commits))
        proposals.sort(key=lambda p: (p[0], p[1], p[2].id))
        value, _, factor, commits = proposals[0]
        for node, v in commits:
            node.cl = v
            node.updated = True
        used.add(factor.id)
    return graph


def normalized_composition_level(graph: QualitativeFactorGraph) -> dict:
    """1 - cl/cl_max per node; unreachable nodes score 0."""
    levels = [node.cl for node in graph.variables.values() if node.cl is not None]
    cl_max = max(levels) if levels else 0
    out = {}
    for node in graph.variables.values():
        if node.cl is None:
            out[node.id] = 0.0
        elif cl_max == 0:
            out[node.id] = 1.0
        else:
            out[node.id] = 1.0 - node.cl / cl_max
    return out


def connectivity_score(graph: QualitativeFactorGraph, bins: int = 10) -> float:
    """Entropy of the topology-score histogram over all nodes."""
    tscs = np.array([node.tsc for node in graph.variables.values()], dtype=float)
    if np.any(np.isnan(tscs)):
        raise ValueError("topology scores must be computed first")
    counts, _ = np.histogram(tscs, bins=bins, range=(0.0, 1.0))
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def eliminate_exact(graph: QualitativeFactorGraph, tensor: CompositionTensor) -> dict:
    """Exact per-node marginals by full contraction; small graphs only."""
    var_ids = sorted(graph.variables)
    if len(var_ids) > 8:
        raise ValueError("exact elimination is limited to 8 variables")
    letters = "abcdefgh"
    letter_of = {vid: letters[i] for i, vid in enumerate(var_ids)}
    operands = []
    subscripts = []
    for vid in var_ids:
        node = graph.variables[vid]
        vec = graph.unary[vid] if node.seen else uniform_state(graph.d)
        operands.append(np.asarray(vec, dtype=float))
        subscripts.append(letter_of[vid])
    dense = tensor.dense()
    for factor in graph.factors:
        operands.append(dense)
        subscripts.append("".join(letter_of[m] for m in factor.members))
    marginals = {}
    for vid in var_ids:
        expr = ",".join(subscripts) + "->" + letter_of[vid]
        raw = np.einsum(expr, *operands, optimize=True)
        total = raw.sum()
        marginals[vid] = normalize_state(raw) if total > 0.0 else uniform_state(graph.d)
    return marginals


def graph_to_dict(graph: QualitativeFactorGraph) -> dict:
    doc = {"d": graph.d, "variables": [], "composition_factors": []}
    for vid in sorted(graph.variables):
        node = graph.variables[vid]
        entry = {"id": node.id, "triplet": list(node.triplet), "seen": node.seen}
        if node.seen:
            entry["belief"] = [float(x) for x in graph.unary[vid]]
        doc["variables"].append(entry)
    for factor in graph.factors:
        doc["composition_factors"].append(list(factor.members))
    return doc


def graph_from_dict(doc: dict) -> QualitativeFactorGraph:
    try:
        graph = QualitativeFactorGraph(d=int(doc["d"]))
        for entry in doc["variables"]:
            belief = entry.get("belief")
            graph.add_variable(int(entry["id"]), tuple(entry["triplet"]), bool(entry["seen"]), belief)
        for members in doc["composition_factors"]:
            graph.add_factor(tuple(int(m) for m in members))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed graph document: {exc}") from exc
    return graph


def save_graph(graph: QualitativeFactorGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(graph), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_graph(path) -> QualitativeFactorGraph:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return graph_from_dict(doc)
