"""Monitoring reactive targets on a four-connected grid.

Cells are indexed row-major: cell ``r * width + c``.  The action is the
destination cell, so ``A(x)`` is ``x`` plus its grid neighbours.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .belief import FactoredBelief, IDENTITY_CHAIN, MarkovChainParams
from ._kernels import entropy2

CASES = ("case1", "case2-slow", "case2-medium", "case2-fast")

# (p01 range, p11 range) per dynamics rate
RATE_RANGES = {
    "slow": ((0.0, 0.2), (0.8, 1.0)),
    "medium": ((0.2, 0.4), (0.6, 0.8)),
    "fast": ((0.4, 0.6), (0.4, 0.6)),
}

MAX_ACTIONS = 5


class InvalidAction(ValueError):
    pass


@dataclass(frozen=True)
class MonitoringModel:
    width: int
    height: int
    chains_sensed: tuple[MarkovChainParams, ...]
    chains_unsensed: tuple[MarkovChainParams, ...]
    q_minus: float = 0.05
    q_plus: float = 0.05
    gamma: float = 0.95
    horizon: int = 6

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")
        m = self.width * self.height
        object.__setattr__(self, "chains_sensed", tuple(self.chains_sensed))
        object.__setattr__(self, "chains_unsensed", tuple(self.chains_unsensed))
        if len(self.chains_sensed) != m or len(self.chains_unsensed) != m:
            raise ValueError(f"expected {m} chains per kind")
        if not (0.0 <= self.q_minus < 0.5 and 0.0 <= self.q_plus < 0.5):
            raise ValueError("sensor error rates must lie in [0, 0.5)")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")

    @property
    def num_cells(self) -> int:
        return self.width * self.height

    @property
    def diameter(self) -> int:
        return self.width + self.height - 2

    def satisfies_property2(self) -> bool:
        """True when unsensed targets are stationary (bandit relaxation is exact)."""
        return all(c.is_identity for c in self.chains_unsensed)

    def check_cell(self, x: int) -> int:
        if not 0 <= int(x) < self.num_cells:
            raise InvalidAction(f"cell {x} outside grid of {self.num_cells} cells")
        return int(x)

    @cached_property
    def _action_lists(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for x in range(self.num_cells):
            r, c = divmod(x, self.width)
            acts = [x]
            if r > 0:
                acts.append(x - self.width)
            if r < self.height - 1:
                acts.append(x + self.width)
            if c > 0:
                acts.append(x - 1)
            if c < self.width - 1:
                acts.append(x + 1)
            out.append(tuple(sorted(acts)))
        return tuple(out)

    @cached_property
    def kernel_tables(self) -> tuple:
        """Packed arrays consumed by :mod:`mabprune._kernels`."""
        from .reachability import relaxed_mask_table, mask_to_cells

        m = self.num_cells
        act_table = np.full((m, MAX_ACTIONS), -1, dtype=np.int64)
        act_count = np.zeros(m, dtype=np.int64)
        for x, acts in enumerate(self._action_lists):
            act_table[x, : len(acts)] = acts
            act_count[x] = len(acts)
        masks = relaxed_mask_table(self)
        kmax = masks.shape[1] - 1
        rel_table = np.full((m, kmax + 1, m), -1, dtype=np.int64)
        rel_count = np.zeros((m, kmax + 1), dtype=np.int64)
        for x in range(m):
            for k in range(kmax + 1):
                cells = mask_to_cells(int(masks[x, k]))
                rel_table[x, k, : len(cells)] = cells
                rel_count[x, k] = len(cells)
        w01 = np.array([c.p01 for c in self.chains_sensed])
        w11 = np.array([c.p11 for c in self.chains_sensed])
        r01 = np.array([c.p01 for c in self.chains_unsensed])
        r11 = np.array([c.p11 for c in self.chains_unsensed])
        params = np.array([self.q_minus, self.q_plus, entropy2(self.q_minus),
                           entropy2(self.q_plus), self.gamma,
                           0.0 if self.satisfies_property2() else 1.0])
        return (act_table, act_count, rel_table, rel_count, w01, w11, r01, r11, params)

    def replace(self, **changes) -> "MonitoringModel":
        from dataclasses import replace

        return replace(self, **changes)


def actions(x: int, model: MonitoringModel) -> frozenset[int]:
    """Stay at ``x`` or move to a 4-neighbour."""
    return frozenset(model._action_lists[model.check_cell(x)])


def sorted_actions(x: int, model: MonitoringModel) -> tuple[int, ...]:
    return model._action_lists[model.check_cell(x)]


def internal_transition(x: int, a: int, model: MonitoringModel) -> int:
    if int(a) not in actions(x, model):
        raise InvalidAction(f"action {a} not applicable at cell {x}")
    return int(a)


def observation_likelihood(z: int, y_a: int, model: MonitoringModel) -> float:
    """p(z | y_a): reports 0 with prob 1-q_minus on an empty cell, q_plus on an occupied one."""
    p_zero = 1.0 - model.q_minus if y_a == 0 else model.q_plus
    return p_zero if z == 0 else 1.0 - p_zero


def uniform_model(width: int, height: int, chain: MarkovChainParams = IDENTITY_CHAIN,
                  unsensed: MarkovChainParams = IDENTITY_CHAIN, **kwargs) -> MonitoringModel:
    m = width * height
    return MonitoringModel(width, height, (chain,) * m, (unsensed,) * m, **kwargs)


# -- instance sampling -------------------------------------------------------

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def instance_key(seed: int, index: int) -> int:
    """Per-instance 64-bit key; depends only on (seed, index)."""
    return splitmix64(splitmix64(seed & _MASK64) ^ (index & _MASK64))


def instance_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=instance_key(seed, index)))


@dataclass(frozen=True)
class InstanceSampler:
    """Reproducible instance stream: one Philox stream per (seed, index)."""

    seed: int
    case: str = "case1"
    width: int = 6
    height: int = 6
    q_minus: float = 0.05
    q_plus: float = 0.05
    gamma: float = 0.95
    horizon: int = 6

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; expected one of {CASES}")

    def sample(self, index: int) -> tuple[MonitoringModel, FactoredBelief]:
        if self.case == "case1":
            return sample_case1(self, index)
        return sample_case2(self, index, self.case.split("-", 1)[1])


def _draw(sampler: InstanceSampler, index: int, rate: str, restless: bool):
    (lo01, hi01), (lo11, hi11) = RATE_RANGES[rate]
    m = sampler.width * sampler.height
    rng = instance_rng(sampler.seed, index)
    p01 = rng.uniform(lo01, hi01, size=m)
    p11 = rng.uniform(lo11, hi11, size=m)
    marginals = rng.uniform(0.0, 1.0, size=m)
    location = int(rng.integers(0, m))
    sensed = tuple(MarkovChainParams(float(a), float(b)) for a, b in zip(p01, p11))
    unsensed = sensed if restless else (IDENTITY_CHAIN,) * m
    model = MonitoringModel(sampler.width, sampler.height, sensed, unsensed,
                            q_minus=sampler.q_minus, q_plus=sampler.q_plus,
                            gamma=sampler.gamma, horizon=sampler.horizon)
    return model, FactoredBelief(location, tuple(float(v) for v in marginals))


def sample_case1(sampler: InstanceSampler, index: int):
    """Stationary unsensed targets; sensed chains slow (p01 in [0,.2], p11 in [.8,1])."""
    return _draw(sampler, index, "slow", restless=False)


def sample_case2(sampler: InstanceSampler, index: int, rate: str):
    """Restless targets: unsensed targets follow the same chain as sensed ones."""
    if rate not in RATE_RANGES:
        raise ValueError(f"unknown rate {rate!r}")
    return _draw(sampler, index, rate, restless=True)


# -- key = value text format -------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_list(xs) -> str:
    return ", ".join(_fmt(x) for x in xs)


def dumps(model: MonitoringModel, belief: FactoredBelief | None = None) -> str:
    lines = [
        f"width = {model.width}",
        f"height = {model.height}",
        f"q_minus = {_fmt(model.q_minus)}",
        f"q_plus = {_fmt(model.q_plus)}",
        f"gamma = {_fmt(model.gamma)}",
        f"horizon = {model.horizon}",
        f"w_p01 = {_fmt_list(c.p01 for c in model.chains_sensed)}",
        f"w_p11 = {_fmt_list(c.p11 for c in model.chains_sensed)}",
        f"r_p01 = {_fmt_list(c.p01 for c in model.chains_unsensed)}",
        f"r_p11 = {_fmt_list(c.p11 for c in model.chains_unsensed)}",
    ]
    if belief is not None:
        lines.append(f"location = {belief.location}")
        lines.append(f"marginals = {_fmt_list(belief.marginals)}")
    return "\n".join(lines) + "\n"


_MODEL_KEYS = {"width", "height", "q_minus", "q_plus", "gamma", "horizon",
               "w_p01", "w_p11", "r_p01", "r_p11"}
_BELIEF_KEYS = {"location", "marginals"}


def parse_key_values(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def loads(text: str) -> tuple[MonitoringModel, FactoredBelief | None]:
    kv = parse_key_values(text)
    unknown = set(kv) - _MODEL_KEYS - _BELIEF_KEYS
    if unknown:
        raise ValueError(f"unknown keys: {sorted(unknown)}")
    missing = _MODEL_KEYS - set(kv)
    if missing:
        raise ValueError(f"missing keys: {sorted(missing)}")

    def floats(key):
        return [float(v) for v in kv[key].split(",")]

    sensed = tuple(MarkovChainParams(a, b) for a, b in zip(floats("w_p01"), floats("w_p11")))
    unsensed = tuple(MarkovChainParams(a, b) for a, b in zip(floats("r_p01"), floats("r_p11")))
    model = MonitoringModel(int(kv["width"]), int(kv["height"]), sensed, unsensed,
                            q_minus=float(kv["q_minus"]), q_plus=float(kv["q_plus"]),
                            gamma=float(kv["gamma"]), horizon=int(kv["horizon"]))
    belief = None
    if _BELIEF_KEYS & set(kv):
        if not _BELIEF_KEYS <= set(kv):
            raise ValueError("location and marginals must be given together")
        belief = FactoredBelief(int(kv["location"]), tuple(floats("marginals")))
        belief.check(model)
    return model, belief


def mean_action_count(model: MonitoringModel) -> float:
    return math.fsum(len(a) for a in model._action_lists) / model.num_cells
