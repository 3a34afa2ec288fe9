"""Greedy lower bound and bandit-relaxation upper bounds on the optimal value.

All values are exact expectations over the ``2**h`` observation sequences;
no sampling is involved.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .belief import FactoredBelief
from .infotheory import mutual_information
from .model import MonitoringModel, sorted_actions
from .reachability import relaxed_actions_k, relaxed_actions_universal

UNIVERSAL = "universal"
K_STEP = "k_step"
BOUND_KINDS = {UNIVERSAL: 0, K_STEP: 1}


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float


def greedy_action(b: FactoredBelief, action_set: Iterable[int], model: MonitoringModel) -> int:
    """Action with the largest one-step MI; ties go to the smallest index."""
    acts = sorted(set(int(a) for a in action_set))
    if not acts:
        raise ValueError("greedy_action needs a nonempty action set")
    best, best_a = -np.inf, acts[0]
    for a in acts:
        v = mutual_information(b, a, model)
        if v > best:
            best, best_a = v, a
    return best_a


def greedy_value_constrained(b: FactoredBelief, h: int, model: MonitoringModel) -> float:
    """Value of following the greedy policy in the original (constrained) problem."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    b.check(model)
    sbuf = np.empty((h + 2, model.num_cells))
    mbuf = np.empty((h + 2, model.num_cells))
    return float(_kernels.lower_bound_at(sbuf, mbuf, b.array, b.location, h,
                                         model.kernel_tables))


def relaxed_greedy_value(probs, action_set: Iterable[int], h: int,
                         model: MonitoringModel) -> float:
    """Value of the greedy index policy over a fixed action set."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    acts = np.array(sorted(set(int(a) for a in action_set)), dtype=np.int64)
    if acts.size == 0:
        raise ValueError("relaxed_greedy_value needs a nonempty action set")
    if acts[0] < 0 or acts[-1] >= model.num_cells:
        raise ValueError("action outside the grid")
    p = np.asarray(probs, dtype=np.float64)
    sbuf = np.empty((h + 2, model.num_cells))
    mbuf = np.empty((h + 2, model.num_cells))
    return float(_kernels.relaxed_value(sbuf, mbuf, p, acts, acts.size, h, model.kernel_tables))


def relaxed_action_set(b: FactoredBelief, h: int, kind: str, model: MonitoringModel):
    if kind == UNIVERSAL:
        return relaxed_actions_universal(model)
    if kind == K_STEP:
        return relaxed_actions_k(b.location, h, model)
    raise ValueError(f"unknown bound kind {kind!r}; expected one of {sorted(BOUND_KINDS)}")


def upper_bound(b: FactoredBelief, h: int, kind: str, model: MonitoringModel) -> float:
    if kind not in BOUND_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}; expected one of {sorted(BOUND_KINDS)}")
    if h < 0:
        raise ValueError("h must be nonnegative")
    b.check(model)
    sbuf = np.empty((h + 2, model.num_cells))
    mbuf = np.empty((h + 2, model.num_cells))
    return float(_kernels.upper_bound_at(sbuf, mbuf, b.array, b.location, h, BOUND_KINDS[kind],
                                         model.kernel_tables))


def bounds(b: FactoredBelief, h: int, kind: str, model: MonitoringModel) -> BoundPair:
    return BoundPair(greedy_value_constrained(b, h, model), upper_bound(b, h, kind, model))


def constrained_greedy_action(b: FactoredBelief, model: MonitoringModel) -> int:
    return greedy_action(b, sorted_actions(b.location, model), model)
