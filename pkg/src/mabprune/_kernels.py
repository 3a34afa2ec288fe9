"""Hot loops: greedy bounds, exhaustive search, branch-and-bound, UCT.

Every function here takes a packed model tuple ``mdl`` built by
:meth:`mabprune.model.MonitoringModel.kernel_tables`::

    (act_table, act_count, rel_table, rel_count, w01, w11, r01, r11, params)

with ``params = [q_minus, q_plus, h(q_minus), h(q_plus), gamma, restless]``
(``restless`` is 1.0 when some unsensed target has non-identity dynamics).
``counts[0]`` counts belief nodes materialized by a search, ``counts[1]``
counts bound evaluations.

Recursive kernels take the unpacked arrays rather than ``mdl``: passing the
tuple costs a reference-count update per array on every call.

When targets that are not sensed stay put, a child belief differs from its
parent in the sensed arm only.  The ``_st`` kernels then patch that one
entry in place (and restore it on the way back) together with a vector of
one-step arm MIs.  The ``_rl`` kernels handle restless targets with one
buffer row per depth.  On stationary models both paths give bit-identical
values since the identity chain maps ``p`` to ``0*(1-p) + 1*p == p``.
"""
import math

import numpy as np

from ._jit import njit

PRUNE_SLACK = 1e-12


@njit(inline=True)
def entropy2(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


@njit(inline=True)
def predict_p(p, p01, p11):
    return p01 * (1.0 - p) + p11 * p


@njit(inline=True)
def prob_z1(pred, qm, qp):
    return (1.0 - qp) * pred + qm * (1.0 - pred)


@njit(inline=True)
def mi_pred(pred, qm, qp, hqm, hqp):
    # I(Y_a; Z) = H(Z) - H(Z | Y_a)
    return entropy2(prob_z1(pred, qm, qp)) - pred * hqp - (1.0 - pred) * hqm


@njit(inline=True)
def posterior(pred, z, pz, qm, qp):
    if z == 1:
        return (1.0 - qp) * pred / pz
    return qp * pred / pz


@njit
def predict_row(src, dst, a, w01, w11, r01, r11):
    for i in range(src.shape[0]):
        dst[i] = predict_p(src[i], r01[i], r11[i])
    dst[a] = predict_p(src[a], w01[a], w11[a])


@njit(inline=True)
def arm_mi(p, a, w01, w11, params):
    pred = predict_p(p[a], w01[a], w11[a])
    return mi_pred(pred, params[0], params[1], params[2], params[3])


@njit(inline=True)
def arm_mi_of(pa, a, w01, w11, params):
    # same as arm_mi when p[a] == pa
    pred = predict_p(pa, w01[a], w11[a])
    return mi_pred(pred, params[0], params[1], params[2], params[3])


@njit
def fill_arm_mis(p, out, mdl):
    act_table, act_count, rel_table, rel_count, w01, w11, r01, r11, params = mdl
    for c in range(p.shape[0]):
        out[c] = arm_mi(p, c, w01, w11, params)


# -- greedy values -----------------------------------------------------------
#
# ``_st`` kernels assume stationary unsensed targets and patch ``p`` / ``mis``
# in place (restoring them before returning); ``_rl`` kernels handle restless
# targets with one buffer row per depth.


@njit
def _greedy_c_st(p, mis, loc, h, act_table, act_count, w01, w11, params):
    best = -np.inf
    a = -1
    for j in range(act_count[loc]):
        c = act_table[loc, j]
        if mis[c] > best:
            best = mis[c]
            a = c
    if h == 1:
        return best
    qm = params[0]
    qp = params[1]
    old_p = p[a]
    old_mi = mis[a]
    pred = predict_p(old_p, w01[a], w11[a])
    pz1 = prob_z1(pred, qm, qp)
    pz0 = 1.0 - pz1
    acc = 0.0
    if pz1 > 0.0:
        p[a] = posterior(pred, 1, pz1, qm, qp)
        mis[a] = arm_mi(p, a, w01, w11, params)
        acc += pz1 * _greedy_c_st(p, mis, a, h - 1, act_table, act_count, w01, w11, params)
    if pz0 > 0.0:
        p[a] = posterior(pred, 0, pz0, qm, qp)
        mis[a] = arm_mi(p, a, w01, w11, params)
        acc += pz0 * _greedy_c_st(p, mis, a, h - 1, act_table, act_count, w01, w11, params)
    p[a] = old_p
    mis[a] = old_mi
    return best + params[4] * acc


@njit
def _greedy_c_rl(buf, depth, loc, h, act_table, act_count, w01, w11, r01, r11, params):
    p = buf[depth]
    best = -np.inf
    a = -1
    for j in range(act_count[loc]):
        c = act_table[loc, j]
        v = arm_mi(p, c, w01, w11, params)
        if v > best:
            best = v
            a = c
    if h == 1:
        return best
    qm = params[0]
    qp = params[1]
    child = buf[depth + 1]
    for i in range(p.shape[0]):
        child[i] = predict_p(p[i], r01[i], r11[i])
    pred = predict_p(p[a], w01[a], w11[a])
    pz1 = prob_z1(pred, qm, qp)
    pz0 = 1.0 - pz1
    acc = 0.0
    if pz1 > 0.0:
        child[a] = posterior(pred, 1, pz1, qm, qp)
        acc += pz1 * _greedy_c_rl(buf, depth + 1, a, h - 1, act_table, act_count,
                                  w01, w11, r01, r11, params)
    if pz0 > 0.0:
        child[a] = posterior(pred, 0, pz0, qm, qp)
        acc += pz0 * _greedy_c_rl(buf, depth + 1, a, h - 1, act_table, act_count,
                                  w01, w11, r01, r11, params)
    return best + params[4] * acc


@njit
def _greedy_r_st(p, mis, acts, n_acts, h, w01, w11, params):
    best = -np.inf
    second = -np.inf
    a = -1
    for j in range(n_acts):
        c = acts[j]
        v = mis[c]
        if v > best:
            second = best
            best = v
            a = c
        elif v > second:
            second = v
    if h == 1:
        return best
    qm = params[0]
    qp = params[1]
    pred = predict_p(p[a], w01[a], w11[a])
    pz1 = prob_z1(pred, qm, qp)
    pz0 = 1.0 - pz1
    acc = 0.0
    if h == 2:
        # the last step takes the largest MI once arm a is patched
        if pz1 > 0.0:
            v = arm_mi_of(posterior(pred, 1, pz1, qm, qp), a, w01, w11, params)
            acc += pz1 * (v if v > second else second)
        if pz0 > 0.0:
            v = arm_mi_of(posterior(pred, 0, pz0, qm, qp), a, w01, w11, params)
            acc += pz0 * (v if v > second else second)
        return best + params[4] * acc
    old_p = p[a]
    old_mi = mis[a]
    if pz1 > 0.0:
        p[a] = posterior(pred, 1, pz1, qm, qp)
        mis[a] = arm_mi(p, a, w01, w11, params)
        acc += pz1 * _greedy_r_st(p, mis, acts, n_acts, h - 1, w01, w11, params)
    if pz0 > 0.0:
        p[a] = posterior(pred, 0, pz0, qm, qp)
        mis[a] = arm_mi(p, a, w01, w11, params)
        acc += pz0 * _greedy_r_st(p, mis, acts, n_acts, h - 1, w01, w11, params)
    p[a] = old_p
    mis[a] = old_mi
    return best + params[4] * acc


@njit
def _greedy_r_rl(buf, mbuf, depth, acts, n_acts, h, w01, w11, r01, r11, params):
    # mbuf[depth, c] holds the arm MI of buf[depth] for every c in acts
    mis = mbuf[depth]
    best = -np.inf
    a = -1
    for j in range(n_acts):
        c = acts[j]
        if mis[c] > best:
            best = mis[c]
            a = c
    if h == 1:
        return best
    qm = params[0]
    qp = params[1]
    p = buf[depth]
    child = buf[depth + 1]
    kid_mis = mbuf[depth + 1]
    for i in range(p.shape[0]):
        child[i] = predict_p(p[i], r01[i], r11[i])
    for j in range(n_acts):
        c = acts[j]
        kid_mis[c] = arm_mi(child, c, w01, w11, params)
    pred = predict_p(p[a], w01[a], w11[a])
    pz1 = prob_z1(pred, qm, qp)
    pz0 = 1.0 - pz1
    acc = 0.0
    if pz1 > 0.0:
        child[a] = posterior(pred, 1, pz1, qm, qp)
        kid_mis[a] = arm_mi(child, a, w01, w11, params)
        acc += pz1 * _greedy_r_rl(buf, mbuf, depth + 1, acts, n_acts, h - 1,
                                  w01, w11, r01, r11, params)
    if pz0 > 0.0:
        child[a] = posterior(pred, 0, pz0, qm, qp)
        kid_mis[a] = arm_mi(child, a, w01, w11, params)
        acc += pz0 * _greedy_r_rl(buf, mbuf, depth + 1, acts, n_acts, h - 1,
                                  w01, w11, r01, r11, params)
    return best + params[4] * acc


@njit
def relaxed_acts(loc, h, kind, rel_table, rel_count):
    """Relaxed action set of ``loc`` (kind 0 universal, 1 k-step) and its length."""
    if kind == 0:
        k = rel_table.shape[1] - 1
    else:
        k = min(h, rel_table.shape[1] - 1)
    return rel_table[loc, k], rel_count[loc, k]


@njit
def _relaxed_rl(sbuf, mbuf, p, acts, n_acts, h, w01, w11, r01, r11, params):
    for i in range(p.shape[0]):
        sbuf[0, i] = p[i]
    for j in range(n_acts):
        c = acts[j]
        mbuf[0, c] = arm_mi(p, c, w01, w11, params)
    return _greedy_r_rl(sbuf, mbuf, 0, acts, n_acts, h, w01, w11, r01, r11, params)


@njit
def relaxed_value(sbuf, mbuf, p, acts, n_acts, h, mdl):
    """Greedy index policy value over the fixed action set ``acts[:n_acts]``."""
    act_table, act_count, rel_table, rel_count, w01, w11, r01, r11, params = mdl
    if h <= 0:
        return 0.0
    if params[5] > 0.0:
        return _relaxed_rl(sbuf, mbuf, p, acts, n_acts, h, w01, w11, r01, r11, params)
    for i in range(p.shape[0]):
        sbuf[0, i] = p[i]
    fill_arm_mis(p, mbuf[0], mdl)
    return _greedy_r_st(sbuf[0], mbuf[0], acts, n_acts, h, w01, w11, params)


@njit
def upper_bound_at(sbuf, mbuf, p, loc, h, kind, mdl):
    """Relaxed greedy value for belief ``(loc, p)``; kind 0 universal, 1 k-step."""
    acts, n_acts = relaxed_acts(loc, h, kind, mdl[2], mdl[3])
    return relaxed_value(sbuf, mbuf, p, acts, n_acts, h, mdl)


@njit
def lower_bound_at(sbuf, mbuf, p, loc, h, mdl):
    """Value of the greedy policy under movement constraints."""
    act_table, act_count, rel_table, rel_count, w01, w11, r01, r11, params = mdl
    if h <= 0:
        return 0.0
    for i in range(p.shape[0]):
        sbuf[0, i] = p[i]
    if params[5] > 0.0:
        return _greedy_c_rl(sbuf, 0, loc, h, act_table, act_count, w01, w11, r01, r11, params)
    fill_arm_mis(p, mbuf[0], mdl)
    return _greedy_c_st(sbuf[0], mbuf[0], loc, h, act_table, act_count, w01, w11, params)


# -- exhaustive search -------------------------------------------------------


@njit
def _exh_st(p, loc, h, only, act_table, act_count, w01, w11, params, counts):
    """V*_h at ``(loc, p)``, or Q_h of action ``only`` when ``only >= 0``."""
    qm = params[0]
    qp = params[1]
    gamma = params[4]
    best = -np.inf
    for j in range(act_count[loc]):
        a = act_table[loc, j]
        if only >= 0 and a != only:
            continue
        old_p = p[a]
        pred = predict_p(old_p, w01[a], w11[a])
        mi = mi_pred(pred, qm, qp, params[2], params[3])
        pz1 = prob_z1(pred, qm, qp)
        pz0 = 1.0 - pz1
        acc = 0.0
        if pz1 > 0.0:
            counts[0] += 1
            if h > 1:
                p[a] = posterior(pred, 1, pz1, qm, qp)
                acc += pz1 * _exh_st(p, a, h - 1, -1, act_table, act_count, w01, w11,
                                     params, counts)
        if pz0 > 0.0:
            counts[0] += 1
            if h > 1:
                p[a] = posterior(pred, 0, pz0, qm, qp)
                acc += pz0 * _exh_st(p, a, h - 1, -1, act_table, act_count, w01, w11,
                                     params, counts)
        p[a] = old_p
        q = mi + gamma * acc
        if q > best:
            best = q
    return best


@njit
def _exh_rl(buf, depth, loc, h, only, act_table, act_count, w01, w11, r01, r11, params,
            counts):
    qm = params[0]
    qp = params[1]
    gamma = params[4]
    p = buf[depth]
    child = buf[depth + 1]
    best = -np.inf
    for j in range(act_count[loc]):
        a = act_table[loc, j]
        if only >= 0 and a != only:
            continue
        pred = predict_p(p[a], w01[a], w11[a])
        if h > 1:
            for i in range(p.shape[0]):
                child[i] = predict_p(p[i], r01[i], r11[i])
        mi = mi_pred(pred, qm, qp, params[2], params[3])
        pz1 = prob_z1(pred, qm, qp)
        pz0 = 1.0 - pz1
        acc = 0.0
        if pz1 > 0.0:
            counts[0] += 1
            if h > 1:
                child[a] = posterior(pred, 1, pz1, qm, qp)
                acc += pz1 * _exh_rl(buf, depth + 1, a, h - 1, -1, act_table, act_count,
                                     w01, w11, r01, r11, params, counts)
        if pz0 > 0.0:
            counts[0] += 1
            if h > 1:
                child[a] = posterior(pred, 0, pz0, qm, qp)
                acc += pz0 * _exh_rl(buf, depth + 1, a, h - 1, -1, act_table, act_count,
                                     w01, w11, r01, r11, params, counts)
        q = mi + gamma * acc
        if q > best:
            best = q
    return best


@njit
def exhaustive_q(p0, loc, h, only, mdl, counts):
    """Exact V*_h (``only < 0``) or Q_h(., only) by full enumeration."""
    act_table, act_count, rel_table, rel_count, w01, w11, r01, r11, params = mdl
    if params[5] > 0.0:
        buf = np.empty((h + 1, p0.shape[0]))
        buf[0, :] = p0
        return _exh_rl(buf, 0, loc, h, only, act_table, act_count, w01, w11, r01, r11,
                       params, counts)
    p = p0.copy()
    return _exh_st(p, loc, h, only, act_table, act_count, w01, w11, params, counts)


@njit
def exhaustive_root(p0, loc, h, mdl):
    act_table, act_count = mdl[0], mdl[1]
    n = act_count[loc]
    counts = np.zeros(2, dtype=np.int64)
    q = np.empty(n)
    for j in range(n):
        q[j] = exhaustive_q(p0, loc, h, act_table[loc, j], mdl, counts)
    return q, counts


# -- branch and bound --------------------------------------------------------


@njit
def _sort_desc(up, od, n):
    # descending upper bound; ties keep action-index order (act_table rows are sorted)
    for j in range(n):
        pos = j
        while pos > 0 and up[od[pos - 1]] < up[j]:
            od[pos] = od[pos - 1]
            pos -= 1
        od[pos] = j


@njit
def _bnb_st(p, mis, depth, loc, h, kind, act_table, act_count, rel_table, rel_count,
            w01, w11, params, upper, order, q_out, pruned_out, counts):
    """Branch-and-bound value at ``(loc, p)``; ``mis`` holds the arm MIs of ``p``.

    On return ``q_out[depth, j]`` is the exact Q of the j-th action, or its
    upper bound when ``pruned_out[depth, j]`` is set.
    """
    qm = params[0]
    qp = params[1]
    gamma = params[4]
    n = act_count[loc]
    up = upper[depth]
    od = order[depth]
    qo = q_out[depth]
    po = pruned_out[depth]

    for j in range(n):
        a = act_table[loc, j]
        mi = mis[a]
        if h == 1:
            up[j] = mi
            continue
        acts, n_acts = relaxed_acts(a, h - 1, kind, rel_table, rel_count)
        old_p = p[a]
        pred = predict_p(old_p, w01[a], w11[a])
        pz1 = prob_z1(pred, qm, qp)
        pz0 = 1.0 - pz1
        acc = 0.0
        if pz1 > 0.0:
            p[a] = posterior(pred, 1, pz1, qm, qp)
            mis[a] = arm_mi(p, a, w01, w11, params)
            counts[0] += 1
            counts[1] += 1
            acc += pz1 * _greedy_r_st(p, mis, acts, n_acts, h - 1, w01, w11, params)
        if pz0 > 0.0:
            p[a] = posterior(pred, 0, pz0, qm, qp)
            mis[a] = arm_mi(p, a, w01, w11, params)
            counts[0] += 1
            counts[1] += 1
            acc += pz0 * _greedy_r_st(p, mis, acts, n_acts, h - 1, w01, w11, params)
        p[a] = old_p
        mis[a] = mi
        up[j] = mi + gamma * acc

    incumbent = _greedy_c_st(p, mis, loc, h, act_table, act_count, w01, w11, params)
    counts[1] += 1
    _sort_desc(up, od, n)

    best = -np.inf
    best_a = -1
    for idx in range(n):
        j = od[idx]
        a = act_table[loc, j]
        if up[j] <= incumbent - PRUNE_SLACK:
            qo[j] = up[j]
            po[j] = True
            continue
        po[j] = False
        mi = mis[a]
        old_p = p[a]
        pred = predict_p(old_p, w01[a], w11[a])
        pz1 = prob_z1(pred, qm, qp)
        pz0 = 1.0 - pz1
        acc = 0.0
        if pz1 > 0.0:
            if h > 1:
                p[a] = posterior(pred, 1, pz1, qm, qp)
                mis[a] = arm_mi(p, a, w01, w11, params)
                acc += pz1 * _bnb_st(p, mis, depth + 1, a, h - 1, kind, act_table, act_count,
                                     rel_table, rel_count, w01, w11, params, upper, order,
                                     q_out, pruned_out, counts)
            else:
                counts[0] += 1
        if pz0 > 0.0:
            if h > 1:
                p[a] = posterior(pred, 0, pz0, qm, qp)
                mis[a] = arm_mi(p, a, w01, w11, params)
                acc += pz0 * _bnb_st(p, mis, depth + 1, a, h - 1, kind, act_table, act_count,
                                     rel_table, rel_count, w01, w11, params, upper, order,
                                     q_out, pruned_out, counts)
            else:
                counts[0] += 1
        p[a] = old_p
        mis[a] = mi
        q = mi + gamma * acc
        qo[j] = q
        if q > best or (q == best and a < best_a):
            best = q
            best_a = a
        if q > incumbent:
            incumbent = q
    if best_a < 0:
        # every action pruned: only possible when the bound is invalid (restless
        # targets); fall back to the greedy policy that set the incumbent
        return incumbent
    return best


@njit
def _bnb_rl(buf, sbuf, mbuf, depth, loc, h, kind, act_table, act_count, rel_table,
            rel_count, w01, w11, r01, r11, params, upper, order, q_out, pruned_out, counts):
    """Restless counterpart of :func:`_bnb_st`; the node belief is ``buf[depth]``."""
    qm = params[0]
    qp = params[1]
    gamma = params[4]
    n = act_count[loc]
    p = buf[depth]
    child = buf[depth + 1]
    up = upper[depth]
    od = order[depth]
    qo = q_out[depth]
    po = pruned_out[depth]

    for j in range(n):
        a = act_table[loc, j]
        pred = predict_p(p[a], w01[a], w11[a])
        mi = mi_pred(pred, qm, qp, params[2], params[3])
        if h == 1:
            up[j] = mi
            continue
        acts, n_acts = relaxed_acts(a, h - 1, kind, rel_table, rel_count)
        for i in range(p.shape[0]):
            child[i] = predict_p(p[i], r01[i], r11[i])
        pz1 = prob_z1(pred, qm, qp)
        pz0 = 1.0 - pz1
        acc = 0.0
        if pz1 > 0.0:
            child[a] = posterior(pred, 1, pz1, qm, qp)
            counts[0] += 1
            counts[1] += 1
            acc += pz1 * _relaxed_rl(sbuf, mbuf, child, acts, n_acts, h - 1,
                                     w01, w11, r01, r11, params)
        if pz0 > 0.0:
            child[a] = posterior(pred, 0, pz0, qm, qp)
            counts[0] += 1
            counts[1] += 1
            acc += pz0 * _relaxed_rl(sbuf, mbuf, child, acts, n_acts, h - 1,
                                     w01, w11, r01, r11, params)
        up[j] = mi + gamma * acc

    for i in range(p.shape[0]):
        sbuf[0, i] = p[i]
    incumbent = _greedy_c_rl(sbuf, 0, loc, h, act_table, act_count, w01, w11, r01, r11, params)
    counts[1] += 1
    _sort_desc(up, od, n)

    best = -np.inf
    best_a = -1
    for idx in range(n):
        j = od[idx]
        a = act_table[loc, j]
        if up[j] <= incumbent - PRUNE_SLACK:
            qo[j] = up[j]
            po[j] = True
            continue
        po[j] = False
        pred = predict_p(p[a], w01[a], w11[a])
        mi = mi_pred(pred, qm, qp, params[2], params[3])
        if h > 1:
            for i in range(p.shape[0]):
                child[i] = predict_p(p[i], r01[i], r11[i])
        pz1 = prob_z1(pred, qm, qp)
        pz0 = 1.0 - pz1
        acc = 0.0
        if pz1 > 0.0:
            if h > 1:
                child[a] = posterior(pred, 1, pz1, qm, qp)
                acc += pz1 * _bnb_rl(buf, sbuf, mbuf, depth + 1, a, h - 1, kind, act_table,
                                     act_count, rel_table, rel_count, w01, w11, r01, r11,
                                     params, upper, order, q_out, pruned_out, counts)
            else:
                counts[0] += 1
        if pz0 > 0.0:
            if h > 1:
                child[a] = posterior(pred, 0, pz0, qm, qp)
                acc += pz0 * _bnb_rl(buf, sbuf, mbuf, depth + 1, a, h - 1, kind, act_table,
                                     act_count, rel_table, rel_count, w01, w11, r01, r11,
                                     params, upper, order, q_out, pruned_out, counts)
            else:
                counts[0] += 1
        q = mi + gamma * acc
        qo[j] = q
        if q > best or (q == best and a < best_a):
            best = q
            best_a = a
        if q > incumbent:
            incumbent = q
    if best_a < 0:
        # every action pruned: only possible when the bound is invalid (restless
        # targets); fall back to the greedy policy that set the incumbent
        return incumbent
    return best


@njit
def bnb_root(p0, loc, h, kind, mdl):
    """Branch-and-bound at the root: per-action Q (or bound), pruned flags, counts."""
    act_table, act_count, rel_table, rel_count, w01, w11, r01, r11, params = mdl
    n = act_count[loc]
    m = p0.shape[0]
    width = act_table.shape[1]
    upper = np.empty((h + 1, width))
    order = np.empty((h + 1, width), dtype=np.int64)
    q_out = np.empty((h + 1, width))
    pruned_out = np.zeros((h + 1, width), dtype=np.bool_)
    counts = np.zeros(2, dtype=np.int64)
    if params[5] > 0.0:
        buf = np.empty((h + 1, m))
        buf[0, :] = p0
        sbuf = np.empty((h + 1, m))
        mbuf = np.empty((h + 1, m))
        _bnb_rl(buf, sbuf, mbuf, 0, loc, h, kind, act_table, act_count, rel_table, rel_count,
                w01, w11, r01, r11, params, upper, order, q_out, pruned_out, counts)
    else:
        p = p0.copy()
        mis = np.empty(m)
        fill_arm_mis(p, mis, mdl)
        _bnb_st(p, mis, 0, loc, h, kind, act_table, act_count, rel_table, rel_count,
                w01, w11, params, upper, order, q_out, pruned_out, counts)
    return q_out[0, :n].copy(), pruned_out[0, :n].copy(), counts


# -- UCT with exact beliefs --------------------------------------------------


@njit
def uct_search(p0, loc, h, n_sims, c_explore, greedy_rollout, uniforms, mdl):
    """Grow a UCT tree from ``(loc, p0)`` and return its arrays.

    Randomness comes only from ``uniforms`` (two draws per simulated step),
    so results do not depend on the backend.
    """
    act_table, act_count, rel_table, rel_count, w01, w11, r01, r11, params = mdl
    qm = params[0]
    qp = params[1]
    gamma = params[4]
    m = p0.shape[0]
    cap = n_sims + 1
    beliefs = np.empty((cap, m))
    locs = np.empty(cap, dtype=np.int64)
    depths = np.empty(cap, dtype=np.int64)
    visits = np.zeros(cap, dtype=np.int64)
    a_visits = np.zeros((cap, 5), dtype=np.int64)
    a_value = np.zeros((cap, 5))
    children = np.full((cap, 5, 2), -1, dtype=np.int64)

    beliefs[0, :] = p0
    locs[0] = loc
    depths[0] = 0
    n_nodes = 1

    path_node = np.empty(h, dtype=np.int64)
    path_slot = np.empty(h, dtype=np.int64)
    path_reward = np.empty(h)
    pred_row = np.empty(m)
    roll = np.empty(m)
    u_idx = 0

    for _ in range(n_sims):
        node = 0
        steps = 0
        tail = 0.0
        for d in range(h):
            x = locs[node]
            n = act_count[x]
            slot = -1
            for j in range(n):
                if a_visits[node, j] == 0:
                    slot = j
                    break
            if slot < 0:
                best = -np.inf
                log_n = math.log(visits[node])
                for j in range(n):
                    score = a_value[node, j] / a_visits[node, j] + c_explore * math.sqrt(
                        log_n / a_visits[node, j])
                    if score > best:
                        best = score
                        slot = j
            a = act_table[x, slot]
            predict_row(beliefs[node], pred_row, a, w01, w11, r01, r11)
            pred = pred_row[a]
            pz1 = prob_z1(pred, qm, qp)
            z = 1 if uniforms[u_idx] < pz1 else 0
            u_idx += 1
            pz = pz1 if z == 1 else 1.0 - pz1
            path_node[steps] = node
            path_slot[steps] = slot
            path_reward[steps] = mi_pred(pred, qm, qp, params[2], params[3])
            steps += 1
            nxt = children[node, slot, z]
            if nxt < 0:
                nxt = n_nodes
                n_nodes += 1
                beliefs[nxt, :] = pred_row
                beliefs[nxt, a] = posterior(pred, z, pz, qm, qp)
                locs[nxt] = a
                depths[nxt] = depths[node] + 1
                children[node, slot, z] = nxt
                tail = _rollout(beliefs[nxt], a, h - d - 1, greedy_rollout, uniforms,
                                u_idx, roll, pred_row, mdl)
                u_idx += 2 * (h - d - 1)
                break
            node = nxt
        ret = tail
        for s in range(steps - 1, -1, -1):
            ret = path_reward[s] + gamma * ret
            nd = path_node[s]
            visits[nd] += 1
            a_visits[nd, path_slot[s]] += 1
            a_value[nd, path_slot[s]] += ret
    return (beliefs[:n_nodes], locs[:n_nodes], depths[:n_nodes], visits[:n_nodes],
            a_visits[:n_nodes], a_value[:n_nodes], children[:n_nodes])


@njit
def _rollout(start, loc, h, greedy_rollout, uniforms, u_idx, roll, pred_row, mdl):
    act_table, act_count, rel_table, rel_count, w01, w11, r01, r11, params = mdl
    qm = params[0]
    qp = params[1]
    gamma = params[4]
    roll[:] = start
    total = 0.0
    disc = 1.0
    for _ in range(h):
        n = act_count[loc]
        if greedy_rollout:
            slot = 0
            best = -np.inf
            for j in range(n):
                v = arm_mi(roll, act_table[loc, j], w01, w11, params)
                if v > best:
                    best = v
                    slot = j
        else:
            slot = min(int(uniforms[u_idx] * n), n - 1)
        u_idx += 1
        a = act_table[loc, slot]
        predict_row(roll, pred_row, a, w01, w11, r01, r11)
        pred = pred_row[a]
        total += disc * mi_pred(pred, qm, qp, params[2], params[3])
        pz1 = prob_z1(pred, qm, qp)
        z = 1 if uniforms[u_idx] < pz1 else 0
        u_idx += 1
        pz = pz1 if z == 1 else 1.0 - pz1
        roll[:] = pred_row
        roll[a] = posterior(pred, z, pz, qm, qp)
        loc = a
        disc *= gamma
    return total
