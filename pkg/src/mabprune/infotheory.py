"""Entropy and mutual information in bits."""
from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .belief import FactoredBelief, predict


def binary_entropy(p: float) -> float:
    return float(_kernels.entropy2(float(p)))


def entropy(dist: np.ndarray) -> float:
    nz = dist[dist > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def mutual_information(b: FactoredBelief, a: int, model) -> float:
    """I(Y; Z | a) for a factored belief.

    Only the sensed target depends on the observation, so the joint
    quantity collapses to the single-target one
    ``h(P(z=1)) - E_y[h(P(z=1 | y))]``.
    """
    pred = predict(b, a, model)[a]
    return float(_kernels.mi_pred(pred, model.q_minus, model.q_plus,
                                  _kernels.entropy2(model.q_minus),
                                  _kernels.entropy2(model.q_plus)))


def joint_from_marginals(marginals) -> np.ndarray:
    """Product distribution over ``2**M`` states; bit ``i`` of the index is ``y_i``."""
    joint = np.ones(1)
    for p in marginals:
        # new axis is the most significant bit
        joint = np.concatenate([joint * (1.0 - p), joint * p])
    return joint


def state_bits(m: int) -> np.ndarray:
    idx = np.arange(2**m)
    return (idx[:, None] >> np.arange(m)[None, :]) & 1


def mutual_information_bruteforce(joint, a: int, model) -> float:
    """I(Y; Z | a) by enumerating every joint state and both observations."""
    joint = np.asarray(joint, dtype=np.float64)
    m = int(round(math.log2(joint.size)))
    if 2**m != joint.size:
        raise ValueError("joint size must be a power of two")
    if m > 12:
        raise ValueError("brute force limited to 12 variables")
    if abs(joint.sum() - 1.0) > 1e-9 or np.any(joint < 0.0):
        raise ValueError("joint distribution must be nonnegative and sum to 1")
    predictive = joint_predict(joint, a, model)
    bits = state_bits(m)
    like1 = np.where(bits[:, a] == 1, 1.0 - model.q_plus, model.q_minus)
    result = entropy(predictive)
    for like in (like1, 1.0 - like1):
        unnorm = like * predictive
        pz = unnorm.sum()
        if pz > 0.0:
            result -= pz * entropy(unnorm / pz)
    return result


def joint_predict(joint: np.ndarray, a: int, model) -> np.ndarray:
    m = int(round(math.log2(joint.size)))
    bits = state_bits(m)
    out = np.zeros_like(joint)
    # sum over y of p(y' | y) p(y), one state at a time
    for s in np.nonzero(joint)[0]:
        prob = np.ones(joint.size)
        for i in range(m):
            c = model.chains_sensed[i] if i == a else model.chains_unsensed[i]
            p1 = c.p11 if bits[s, i] else c.p01
            prob *= np.where(bits[:, i] == 1, p1, 1.0 - p1)
        out += joint[s] * prob
    return out


def joint_bayes_update(joint: np.ndarray, a: int, z: int, model) -> np.ndarray:
    m = int(round(math.log2(joint.size)))
    predictive = joint_predict(joint, a, model)
    like1 = np.where(state_bits(m)[:, a] == 1, 1.0 - model.q_plus, model.q_minus)
    like = like1 if z == 1 else 1.0 - like1
    unnorm = like * predictive
    return unnorm / unnorm.sum()


def marginals_of(joint: np.ndarray) -> np.ndarray:
    m = int(round(math.log2(joint.size)))
    return joint @ state_bits(m)


def is_product(joint: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(joint - joint_from_marginals(marginals_of(joint)))) <= tol)


