"""Reachable cell sets and the relaxed action sets built from them.

Sets are Python ints used as bitmasks over cells (bit ``i`` = cell ``i``),
so unions are single ``|`` operations; public functions return frozensets.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .model import MonitoringModel, sorted_actions

ReachableSet = frozenset


def cells_to_mask(cells: Iterable[int]) -> int:
    mask = 0
    for c in cells:
        mask |= 1 << int(c)
    return mask


def mask_to_cells(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _step_masks(model: MonitoringModel) -> list[int]:
    # with the destination-as-action convention, F({x}) and A(x) coincide
    return [cells_to_mask(sorted_actions(x, model)) for x in range(model.num_cells)]


def _step(mask: int, step_masks: list[int]) -> int:
    out = 0
    for x in mask_to_cells(mask):
        out |= step_masks[x]
    return out


def reachable_one_step(xs: Iterable[int], model: MonitoringModel) -> ReachableSet:
    xs = [model.check_cell(x) for x in xs]
    return frozenset(mask_to_cells(_step(cells_to_mask(xs), _step_masks(model))))


def reachable_k(xs: Iterable[int], k: int, model: MonitoringModel) -> ReachableSet:
    if k < 0:
        raise ValueError("k must be nonnegative")
    steps = _step_masks(model)
    mask = cells_to_mask(model.check_cell(x) for x in xs)
    for _ in range(k):
        nxt = _step(mask, steps)
        if nxt == mask:
            break
        mask = nxt
    return frozenset(mask_to_cells(mask))


def relaxed_actions_universal(model: MonitoringModel) -> frozenset[int]:
    steps = _step_masks(model)
    mask = 0
    for m in steps:
        mask |= m
    return frozenset(mask_to_cells(mask))


def relaxed_actions_k(x: int, k: int, model: MonitoringModel) -> frozenset[int]:
    """Union of A(i) over the cells i reachable from ``x`` in exactly ``k`` steps."""
    steps = _step_masks(model)
    reach = cells_to_mask(reachable_k([x], k, model))
    return frozenset(mask_to_cells(_step(reach, steps)))


def relaxed_mask_table(model: MonitoringModel) -> np.ndarray:
    """``table[x, k]`` = bitmask of the k-step relaxed actions, k = 0..diameter.

    Object dtype keeps grids with more than 64 cells exact.
    """
    steps = _step_masks(model)
    kmax = model.diameter
    table = np.empty((model.num_cells, kmax + 1), dtype=object)
    for x in range(model.num_cells):
        reach = 1 << x
        for k in range(kmax + 1):
            table[x, k] = _step(reach, steps)
            reach = _step(reach, steps)
    return table
