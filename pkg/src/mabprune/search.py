"""Online belief-tree search: exhaustive value iteration and branch-and-bound.

Node counting: a node is one child belief created by the belief update
(root excluded).  Children whose observation has zero prior probability are
neither created nor counted.  Both searches use this convention; greedy
rollouts done inside bound evaluations are counted separately as
``bound_evaluations``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .belief import FactoredBelief
from .bounds import BOUND_KINDS, constrained_greedy_action, greedy_value_constrained
from .model import InvalidAction, MonitoringModel, sorted_actions


@dataclass(frozen=True)
class SearchStats:
    nodes_expanded: int = 0
    bound_evaluations: int = 0
    elapsed: float = 0.0  # seconds, wall clock around the kernel call


@dataclass(frozen=True)
class SearchResult:
    best_action: int
    value: float
    q_values: dict[int, float]
    pruned: frozenset[int] = frozenset()
    stats: SearchStats = field(default_factory=SearchStats)


def _pick(acts, q, pruned):
    best_a, best_q = None, -np.inf
    for a, v, p in zip(acts, q, pruned):
        if p:
            continue
        if v > best_q:
            best_a, best_q = a, v
    return best_a, best_q


def exhaustive(b: FactoredBelief, h: int, model: MonitoringModel) -> SearchResult:
    if h < 1:
        raise ValueError("horizon must be at least 1")
    b.check(model)
    acts = sorted_actions(b.location, model)
    tables, p0 = model.kernel_tables, b.array
    t0 = time.perf_counter()
    q, counts = _kernels.exhaustive_root(p0, b.location, h, tables)
    elapsed = time.perf_counter() - t0
    best_a, best_q = _pick(acts, q, [False] * len(acts))
    return SearchResult(
        best_action=best_a,
        value=float(best_q),
        q_values={a: float(v) for a, v in zip(acts, q)},
        stats=SearchStats(int(counts[0]), int(counts[1]), elapsed),
    )


def rtbss(b: FactoredBelief, h: int, bound_kind: str, model: MonitoringModel) -> SearchResult:
    """Depth-first branch-and-bound with greedy lower and bandit upper bounds.

    At every node actions are tried in descending upper-bound order, the
    incumbent starts at the greedy policy value, and an action is skipped
    once its upper bound cannot beat the incumbent by more than 1e-12.

    When the bound is not valid (restless targets) every root action can be
    pruned; the greedy action and its policy value are returned in that case.
    """
    if h < 1:
        raise ValueError("horizon must be at least 1")
    if bound_kind not in BOUND_KINDS:
        raise ValueError(f"unknown bound kind {bound_kind!r}")
    b.check(model)
    acts = sorted_actions(b.location, model)
    tables, p0 = model.kernel_tables, b.array
    t0 = time.perf_counter()
    q, pruned, counts = _kernels.bnb_root(p0, b.location, h, BOUND_KINDS[bound_kind], tables)
    best_a, best_q = _pick(acts, q, pruned)
    if best_a is None:
        best_a = constrained_greedy_action(b, model)
        best_q = greedy_value_constrained(b, h, model)
    elapsed = time.perf_counter() - t0
    return SearchResult(
        best_action=best_a,
        value=float(best_q),
        q_values={a: float(v) for a, v in zip(acts, q)},
        pruned=frozenset(a for a, p in zip(acts, pruned) if p),
        stats=SearchStats(int(counts[0]), int(counts[1]), elapsed),
    )


def q_value(b: FactoredBelief, a: int, h: int, model: MonitoringModel) -> float:
    """Exact Q_h(b, a) by exhaustive recursion."""
    if h < 1:
        raise ValueError("horizon must be at least 1")
    b.check(model)
    if int(a) not in sorted_actions(b.location, model):
        raise InvalidAction(f"action {a} not applicable at cell {b.location}")
    counts = np.zeros(2, dtype=np.int64)
    return float(_kernels.exhaustive_q(b.array, b.location, h, int(a), model.kernel_tables,
                                       counts))


def warmup() -> None:
    """Compile every kernel once so timings exclude JIT compilation."""
    from .model import uniform_model

    model = uniform_model(2, 2)
    b = FactoredBelief(0, (0.3, 0.5, 0.6, 0.9))
    exhaustive(b, 2, model)
    rtbss(b, 2, "universal", model)
    rtbss(b, 2, "k_step", model)
