"""E-step and likelihood kernels over a flattened bitext.

The bitext is a stream of *rows*, one per target token occurrence. Row ``r``
holds ``row_len[r]`` consecutive entries of ``link``, each the index of the
(source, target) table entry for one source position of that sentence
(the NULL position included). A row's denominator is the sum of the
referenced probabilities.

Every kernel returns ``bad``: the first row whose denominator is not
positive, or -1. Rows are reduced in stream order, so results are
deterministic for a given backend.
"""
import numpy as np

from .._accel import BACKEND, NUMBA_AVAILABLE, njit


@njit(cache=True)
def _e_step_numba(prob, link, row_len, counts):
    pos = 0
    ll = 0.0
    bad = -1
    for r in range(row_len.shape[0]):
        n = row_len[r]
        d = 0.0
        for i in range(pos, pos + n):
            d += prob[link[i]]
        if d > 0.0:
            ll += np.log(d)
            for i in range(pos, pos + n):
                k = link[i]
                counts[k] += prob[k] / d
        elif bad < 0:
            bad = r
        pos += n
    return ll, bad


@njit(cache=True)
def _loglik_numba(prob, link, row_len):
    pos = 0
    ll = 0.0
    bad = -1
    for r in range(row_len.shape[0]):
        n = row_len[r]
        d = 0.0
        for i in range(pos, pos + n):
            d += prob[link[i]]
        if d > 0.0:
            ll += np.log(d)
        elif bad < 0:
            bad = r
        pos += n
    return ll, bad


@njit(cache=True)
def _viterbi_numba(prob, link, row_len):
    # Argmax position per row; strict comparison keeps the earliest maximum.
    out = np.empty(row_len.shape[0], dtype=np.int64)
    pos = 0
    for r in range(row_len.shape[0]):
        best = -1
        best_p = 0.0
        for i in range(row_len[r]):
            p = prob[link[pos + i]]
            if p > best_p:
                best_p = p
                best = i
        out[r] = best
        pos += row_len[r]
    return out


def _row_starts(row_len):
    starts = np.zeros(row_len.shape[0], dtype=np.int64)
    np.cumsum(row_len[:-1], out=starts[1:])
    return starts


def _denominators(prob, link, row_len):
    if row_len.shape[0] == 0:
        return np.zeros(0)
    return np.add.reduceat(prob[link], _row_starts(row_len))


def _first_bad(d):
    bad = np.flatnonzero(~(d > 0.0))
    return int(bad[0]) if bad.size else -1


def _e_step_numpy(prob, link, row_len, counts):
    d = _denominators(prob, link, row_len)
    bad = _first_bad(d)
    ok = d > 0.0
    safe = np.where(ok, d, 1.0)
    post = prob[link] / np.repeat(safe, row_len)
    post[np.repeat(~ok, row_len)] = 0.0
    counts += np.bincount(link, weights=post, minlength=counts.shape[0])
    return float(np.log(d[ok]).sum()), bad


def _loglik_numpy(prob, link, row_len):
    d = _denominators(prob, link, row_len)
    ok = d > 0.0
    return float(np.log(d[ok]).sum()), _first_bad(d)


def _viterbi_numpy(prob, link, row_len):
    out = np.full(row_len.shape[0], -1, dtype=np.int64)
    if row_len.shape[0] == 0:
        return out
    vals = prob[link]
    starts = _row_starts(row_len)
    best = np.maximum.reduceat(vals, starts)
    # earliest index attaining the row maximum
    row_of = np.repeat(np.arange(row_len.shape[0]), row_len)
    offset = np.arange(vals.shape[0]) - np.repeat(starts, row_len)
    hit = (vals == best[row_of]) & (vals > 0.0)
    first = np.full(row_len.shape[0], np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(first, row_of[hit], offset[hit])
    has = first != np.iinfo(np.int64).max
    out[has] = first[has]
    return out


_KERNELS = {
    "numpy": (_e_step_numpy, _loglik_numpy, _viterbi_numpy),
}
if NUMBA_AVAILABLE:
    _KERNELS["numba"] = (_e_step_numba, _loglik_numba, _viterbi_numba)


def _pick(backend, slot):
    return _KERNELS[backend or BACKEND][slot]


def e_step(prob, link, row_len, n_entries=None, backend=None):
    """Expected counts per table entry plus the summed log row denominators.

    Returns ``(counts, ll, bad)``.
    """
    counts = np.zeros(prob.shape[0] if n_entries is None else n_entries)
    ll, bad = _pick(backend, 0)(prob, link, row_len, counts)
    return counts, float(ll), int(bad)


def loglik(prob, link, row_len, backend=None):
    ll, bad = _pick(backend, 1)(prob, link, row_len)
    return float(ll), int(bad)


def viterbi(prob, link, row_len, backend=None):
    """Per-row position of the highest probability; -1 where all are zero."""
    return _pick(backend, 2)(prob, link, row_len)


def available_backends():
    return tuple(_KERNELS)
