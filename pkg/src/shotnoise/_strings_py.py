"""Pure-numpy string covariance kernel (fallback for the compiled ``_strings``).

A *string term* is ``P_i Z_{i+1} ... Z_{j-1} Q_j`` with ``i < j``, or a single
site operator ``P_i`` when ``i == j``.  Labels: 0=I, 1=X, 2=Y, 3=Z.

``table[a, b] = <phi| s_a s_b |phi>`` for the single-site spinor ``phi``.
"""
from __future__ import annotations

import numpy as np


def _local_op(i, j, op_i, op_j, s):
    """Label carried by terms ``(i, j, op_i, op_j)`` at site(s) ``s``."""
    inside = (s > i) & (s < j)
    return np.where(s == i, op_i, np.where((s == j) & (j > i), op_j, np.where(inside, 3, 0)))


def _interior(i, j, s):
    return (s > i) & (s < j)


def string_variance(i_idx, j_idx, op_i, op_j, coef, table) -> float:
    """``Var[sum_a coef_a T_a]`` over the uniform product state."""
    i_idx = np.asarray(i_idx, dtype=np.int64)
    j_idx = np.asarray(j_idx, dtype=np.int64)
    op_i = np.asarray(op_i, dtype=np.int64)
    op_j = np.asarray(op_j, dtype=np.int64)
    coef = np.asarray(coef, dtype=float)
    table = np.asarray(table, dtype=complex)
    z = table[3, 0].real
    single = table[:, 0].real

    n_open = np.maximum(j_idx - i_idx - 1, 0)
    means = single[op_i] * np.where(j_idx > i_idx, single[op_j], 1.0) * z**n_open

    total = 0.0
    m = len(coef)
    for a in range(m):
        ia, ja, pa, qa = i_idx[a], j_idx[a], op_i[a], op_j[a]
        ib, jb, pb, qb = i_idx[a:], j_idx[a:], op_i[a:], op_j[a:]
        live = (np.maximum(ia, ib) <= np.minimum(ja, jb))
        if not live.any():
            continue
        ib, jb, pb, qb = ib[live], jb[live], pb[live], qb[live]
        cb = coef[a:][live]
        val = np.ones(len(ib), dtype=complex)
        endpoint_in_sym = np.zeros(len(ib), dtype=np.int64)

        # endpoints, each distinct site counted once
        sites = (
            (np.full(len(ib), ia), np.ones(len(ib), dtype=bool)),
            (np.full(len(ib), ja), np.full(len(ib), ja != ia)),
            (ib, (ib != ia) & (ib != ja)),
            (jb, (jb != ia) & (jb != ja) & (jb != ib)),
        )
        for s, use in sites:
            la = _local_op(ia, ja, pa, qa, s)
            lb = _local_op(ib, jb, pb, qb, s)
            val = np.where(use, val * table[la, lb], val)
            xor = _interior(ia, ja, s) ^ _interior(ib, jb, s)
            endpoint_in_sym += (use & xor).astype(np.int64)

        na = max(ja - ia - 1, 0)
        nb = np.maximum(jb - ib - 1, 0)
        overlap = np.maximum(np.minimum(ja, jb) - np.maximum(ia, ib) - 1, 0)
        count = na + nb - 2 * overlap - endpoint_in_sym
        val = val * z**count
        cov = val.real - means[a] * means[a:][live]
        # b == a always survives the overlap test and comes first
        weight = np.full(len(cb), 2.0)
        weight[0] = 1.0
        total += coef[a] * float(np.sum(weight * cb * cov))
    return total
