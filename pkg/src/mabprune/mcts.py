"""UCT over exact factored beliefs, the Monte-Carlo baseline.

Tree nodes carry exact beliefs and the per-step reward is the exact MI of
the node belief, so the only sampled quantities are observations and rollout
actions.  All random numbers are drawn up front from a Philox stream keyed by
the seed, which makes a search reproducible on either kernel backend.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .belief import FactoredBelief
from .model import MonitoringModel, instance_rng, sorted_actions


@dataclass(frozen=True)
class MctsParams:
    simulations: int
    exploration_constant: float = 1.0
    seed: int = 0
    greedy_rollout: bool = False

    def __post_init__(self):
        if int(self.simulations) < 1:
            raise ValueError("simulations must be at least 1")
        if self.exploration_constant < 0:
            raise ValueError("exploration_constant must be nonnegative")


@dataclass
class MctsNode:
    belief: FactoredBelief
    depth: int
    visit_count: int
    action_visits: dict[int, int] = field(default_factory=dict)
    action_means: dict[int, float] = field(default_factory=dict)
    children: dict[tuple[int, int], int] = field(default_factory=dict)


@dataclass
class MctsTree:
    nodes: list[MctsNode]

    @property
    def root(self) -> MctsNode:
        return self.nodes[0]

    def best_action(self) -> int:
        """Root action with the highest mean return; ties go to the smaller index."""
        best_a, best_v = None, -np.inf
        for a in sorted(self.root.action_means):
            if self.root.action_visits[a] and self.root.action_means[a] > best_v:
                best_a, best_v = a, self.root.action_means[a]
        return best_a


def _uniforms(params: MctsParams, h: int) -> np.ndarray:
    # each simulation consumes at most one draw per tree step and two per rollout step
    return instance_rng(params.seed, 0).random(2 * h * int(params.simulations) + 1)


def _run(b, h, params, model):
    if h < 1:
        raise ValueError("horizon must be at least 1")
    b.check(model)
    return _kernels.uct_search(
        b.array, b.location, h, int(params.simulations), float(params.exploration_constant),
        bool(params.greedy_rollout), _uniforms(params, h), model.kernel_tables)


def _best_root_action(acts, a_visits, a_value) -> int:
    best_a, best_v = None, -np.inf
    for j, a in enumerate(acts):
        if a_visits[j] == 0:
            continue
        v = a_value[j] / a_visits[j]
        if v > best_v:
            best_a, best_v = a, v
    return best_a


def search(b: FactoredBelief, h: int, params: MctsParams, model: MonitoringModel) -> MctsTree:
    """Run UCT and return the whole tree (for inspection; slower than :func:`recommend`)."""
    beliefs, locs, depths, visits, a_visits, a_value, children = _run(b, h, params, model)
    nodes = []
    for i in range(len(locs)):
        acts = sorted_actions(int(locs[i]), model)
        node = MctsNode(FactoredBelief(int(locs[i]), tuple(beliefs[i])), int(depths[i]),
                        int(visits[i]))
        for j, a in enumerate(acts):
            n = int(a_visits[i, j])
            node.action_visits[a] = n
            node.action_means[a] = float(a_value[i, j] / n) if n else 0.0
            for z in (0, 1):
                if children[i, j, z] >= 0:
                    node.children[(a, z)] = int(children[i, j, z])
        nodes.append(node)
    return MctsTree(nodes)


def recommend(b: FactoredBelief, h: int, params: MctsParams, model: MonitoringModel) -> int:
    """Root action with the highest mean return after ``params.simulations`` simulations."""
    _, _, _, _, a_visits, a_value, _ = _run(b, h, params, model)
    return _best_root_action(sorted_actions(b.location, model), a_visits[0], a_value[0])
