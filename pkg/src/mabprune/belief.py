"""Mixed-observability beliefs: a known cell plus independent Bernoulli targets."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from .model import MonitoringModel


class ZeroProbabilityObservation(ValueError):
    """Raised when conditioning on an observation whose prior probability is 0."""


@dataclass(frozen=True)
class MarkovChainParams:
    """Two-state chain: ``p01`` = P(0 -> 1), ``p11`` = P(1 -> 1)."""

    p01: float
    p11: float

    def __post_init__(self):
        if not (0.0 <= self.p01 <= 1.0 and 0.0 <= self.p11 <= 1.0):
            raise ValueError(f"chain probabilities out of [0, 1]: {self}")

    @property
    def is_identity(self) -> bool:
        return self.p01 == 0.0 and self.p11 == 1.0


IDENTITY_CHAIN = MarkovChainParams(0.0, 1.0)


@dataclass(frozen=True)
class FactoredBelief:
    location: int
    marginals: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "location", int(self.location))
        object.__setattr__(self, "marginals", tuple(float(p) for p in self.marginals))
        if any(not 0.0 <= p <= 1.0 for p in self.marginals):
            raise ValueError("marginals must lie in [0, 1]")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.marginals, dtype=np.float64)

    def check(self, model: MonitoringModel) -> "FactoredBelief":
        if len(self.marginals) != model.num_cells:
            raise ValueError(
                f"belief has {len(self.marginals)} marginals, model has {model.num_cells} cells")
        model.check_cell(self.location)
        return self


def predict_marginal(p: float, chain: MarkovChainParams) -> float:
    return chain.p01 * (1.0 - p) + chain.p11 * p


def _check_action(a: int, model: MonitoringModel) -> int:
    from .model import InvalidAction

    if not 0 <= int(a) < model.num_cells:
        raise InvalidAction(f"action {a} outside grid of {model.num_cells} cells")
    return int(a)


def predict(b: FactoredBelief, a: int, model: MonitoringModel) -> np.ndarray:
    """Predicted marginals after sensing cell ``a``: ``w_a`` there, ``r_i`` elsewhere.

    Any cell index is accepted so the relaxed problems can reuse this; the
    movement constraint is enforced by :func:`tau`.
    """
    return _predict_array(b.array, _check_action(a, model), model)


def _predict_array(p: np.ndarray, a: int, model: MonitoringModel) -> np.ndarray:
    _, _, _, _, w01, w11, r01, r11, _ = model.kernel_tables
    out = r01 * (1.0 - p) + r11 * p
    out[a] = w01[a] * (1.0 - p[a]) + w11[a] * p[a]
    return out


def observation_prior(predicted: Sequence[float], a: int, model: MonitoringModel) -> float:
    """P(z = 1) for the sensed cell; P(z = 0) is its complement."""
    pa = predicted[a]
    return (1.0 - model.q_plus) * pa + model.q_minus * (1.0 - pa)


def bayes_update(predicted: Sequence[float], a: int, z: int,
                 model: MonitoringModel) -> np.ndarray:
    pz1 = observation_prior(predicted, a, model)
    pa = predicted[a]
    if z == 1:
        eta, num = pz1, (1.0 - model.q_plus) * pa
    elif z == 0:
        eta, num = 1.0 - pz1, model.q_plus * pa
    else:
        raise ValueError(f"observation must be 0 or 1, got {z!r}")
    if eta <= 0.0:
        raise ZeroProbabilityObservation(f"P(z={z}) = 0 when sensing cell {a}")
    out = np.array(predicted, dtype=np.float64)
    out[a] = num / eta
    return out


def tau(b: FactoredBelief, a: int, z: int, model: MonitoringModel) -> FactoredBelief:
    """Belief after moving to ``a``, sensing it and observing ``z``."""
    from .model import internal_transition

    x_next = internal_transition(b.location, a, model)
    post = bayes_update(predict(b, a, model), a, z, model)
    return FactoredBelief(x_next, tuple(post.tolist()))
