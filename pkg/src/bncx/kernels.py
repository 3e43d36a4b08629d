"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public names (``classify_columns``, ``decide_verdict``,
``eval_circuit``) are bound to the numba version unless JIT is disabled via
``BNCX_DISABLE_JIT``; both flavours stay importable under ``*_jit`` /
``*_numpy`` so tests and ``benchmarks/bench_kernels.py`` can compare them.

Mode codes: ``ARGMAX`` (lowest index wins ties) and ``THRESHOLD`` (binary
target; class ``ti`` iff ``(1 - t) * P(y_ti, x) - t * P(y_other, x) > 0``).
"""

import numpy as np

from ._accel import USE_JIT, njit

ARGMAX = 0
THRESHOLD = 1

NEGATIVE = -1
UNDECIDED = 0
POSITIVE = 1

# circuit node kinds used by the array form of an NNF store
K_TRUE = 0
K_FALSE = 1
K_LIT = 2
K_AND = 3
K_OR = 4


# --------------------------------------------------------------------------
# classification of joint columns P(Y, x)


def _classify_columns_py(table, mode, t, ti):
    k, n = table.shape
    out = np.zeros(n, dtype=np.int64)
    ties = 0
    for c in range(n):
        if mode == ARGMAX:
            best = 0
            bv = table[0, c]
            tied = False
            for y in range(1, k):
                v = table[y, c]
                if v > bv:
                    bv = v
                    best = y
                    tied = False
                elif v == bv:
                    tied = True
            out[c] = best
            if tied:
                ties += 1
        else:
            d = (1.0 - t) * table[ti, c] - t * table[1 - ti, c]
            if d > 0.0:
                out[c] = ti
            else:
                out[c] = 1 - ti
                if d == 0.0:
                    ties += 1
    return out, ties


classify_columns_jit = njit(_classify_columns_py)


def classify_columns_numpy(table, mode, t, ti):
    """Class index of every column of a ``(|Y|, n)`` joint table.

    Returns ``(classes, ties)`` where ``ties`` counts columns decided by the
    tie rule (equal maxima, or a threshold score of exactly zero).
    """
    table = np.asarray(table, dtype=np.float64)
    if mode == ARGMAX:
        classes = np.argmax(table, axis=0).astype(np.int64)
        top = table.max(axis=0)
        ties = int(np.count_nonzero((table == top).sum(axis=0) > 1))
        return classes, ties
    d = (1.0 - t) * table[ti] - t * table[1 - ti]
    classes = np.where(d > 0.0, ti, 1 - ti).astype(np.int64)
    return classes, int(np.count_nonzero(d == 0.0))


# --------------------------------------------------------------------------
# partial-instantiation test on a separator factor


def _decide_verdict_py(m, i, mode, t, ti):
    k, ns = m.shape
    tie = False
    if mode == ARGMAX:
        pos = True
        for j in range(k):
            if j == i:
                continue
            all_le = True
            all_lt = True
            all_gt = True
            all_ge = True
            for s in range(ns):
                d = m[i, s] - m[j, s]
                if d > 0.0:
                    all_le = False
                    all_lt = False
                elif d < 0.0:
                    all_gt = False
                    all_ge = False
                else:
                    all_lt = False
                    all_gt = False
                    tie = True
            # a lower-index rival wins ties, a higher-index rival loses them
            if j < i:
                neg_j = all_le
                pos_j = all_gt
            else:
                neg_j = all_lt
                pos_j = all_ge
            if neg_j:
                return NEGATIVE, tie
            pos = pos and pos_j
        if pos:
            return POSITIVE, tie
        return UNDECIDED, tie
    all_pos = True
    all_nonpos = True
    for s in range(ns):
        d = (1.0 - t) * m[ti, s] - t * m[1 - ti, s]
        if d > 0.0:
            all_nonpos = False
        else:
            all_pos = False
            if d == 0.0:
                tie = True
    if all_pos:
        return (POSITIVE if i == ti else NEGATIVE), tie
    if all_nonpos:
        return (NEGATIVE if i == ti else POSITIVE), tie
    return UNDECIDED, tie


decide_verdict_jit = njit(_decide_verdict_py)


def decide_verdict_numpy(m, i, mode, t, ti):
    """Verdict for class ``i`` from ``m`` of shape ``(|Y|, |dom(S)|)``.

    Returns ``(verdict, tie)``; ``verdict`` is ``NEGATIVE`` when some rival
    beats class ``i`` on every separator state, ``POSITIVE`` when class ``i``
    beats every rival everywhere, else ``UNDECIDED``.
    """
    m = np.asarray(m, dtype=np.float64)
    if mode == ARGMAX:
        d = m[i][None, :] - m
        tie = bool(np.any(np.delete(d, i, axis=0) == 0.0))
        pos = True
        for j in range(m.shape[0]):
            if j == i:
                continue
            if j < i:
                neg_j, pos_j = bool(np.all(d[j] <= 0.0)), bool(np.all(d[j] > 0.0))
            else:
                neg_j, pos_j = bool(np.all(d[j] < 0.0)), bool(np.all(d[j] >= 0.0))
            if neg_j:
                return NEGATIVE, tie
            pos = pos and pos_j
        return (POSITIVE if pos else UNDECIDED), tie
    d = (1.0 - t) * m[ti] - t * m[1 - ti]
    tie = bool(np.any(d == 0.0))
    if np.all(d > 0.0):
        return (POSITIVE if i == ti else NEGATIVE), tie
    if np.all(d <= 0.0):
        return (NEGATIVE if i == ti else POSITIVE), tie
    return UNDECIDED, tie


# --------------------------------------------------------------------------
# batch circuit evaluation


def _eval_circuit_py(kind, lit_var, lit_mask, cstart, cidx, x):
    n_nodes = kind.shape[0]
    n = x.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    # node-major over blocks of rows keeps the value table small
    block = 512
    val = np.zeros((n_nodes, block), dtype=np.bool_)
    for r0 in range(0, n, block):
        m = min(block, n - r0)
        for k in range(n_nodes):
            kd = kind[k]
            if kd == K_TRUE:
                val[k, :m] = True
            elif kd == K_FALSE:
                val[k, :m] = False
            elif kd == K_LIT:
                col = lit_var[k]
                mask = lit_mask[k]
                for r in range(m):
                    val[k, r] = ((mask >> x[r0 + r, col]) & 1) == 1
            else:
                c0 = cstart[k]
                c1 = cstart[k + 1]
                for r in range(m):
                    val[k, r] = val[cidx[c0], r]
                for c in range(c0 + 1, c1):
                    ch = cidx[c]
                    if kd == K_AND:
                        for r in range(m):
                            val[k, r] = val[k, r] and val[ch, r]
                    else:
                        for r in range(m):
                            val[k, r] = val[k, r] or val[ch, r]
        for r in range(m):
            out[r0 + r] = val[n_nodes - 1, r]
    return out


eval_circuit_jit = njit(_eval_circuit_py)


def eval_circuit_numpy(kind, lit_var, lit_mask, cstart, cidx, x):
    """Evaluate the last node of an array-form circuit on every row of ``x``.

    ``x`` is an ``(n, num_vars)`` integer matrix of state indices.  Nodes are
    in topological order; ``cidx[cstart[k]:cstart[k+1]]`` lists children.
    """
    n = x.shape[0]
    vals = []
    for k in range(kind.shape[0]):
        kd = kind[k]
        if kd == K_TRUE:
            vals.append(np.ones(n, dtype=bool))
        elif kd == K_FALSE:
            vals.append(np.zeros(n, dtype=bool))
        elif kd == K_LIT:
            vals.append(((lit_mask[k] >> x[:, lit_var[k]]) & 1).astype(bool))
        else:
            kids = cidx[cstart[k]:cstart[k + 1]]
            acc = vals[kids[0]].copy()
            for c in kids[1:]:
                if kd == K_AND:
                    acc &= vals[c]
                else:
                    acc |= vals[c]
            vals.append(acc)
    return vals[-1]


if USE_JIT:
    classify_columns = classify_columns_jit
    decide_verdict = decide_verdict_jit
    eval_circuit = eval_circuit_jit
else:
    classify_columns = classify_columns_numpy
    decide_verdict = decide_verdict_numpy
    eval_circuit = eval_circuit_numpy
