# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled matching kernels; same contract as ``schemaforge._pykernels``."""

from libc.stdlib cimport free, malloc


cdef Py_ssize_t _lev(str a, str b, Py_ssize_t *prev, Py_ssize_t *cur) noexcept:
    # requires len(a) >= len(b) > 0 and buffers of len(b) + 1
    cdef Py_ssize_t la = len(a), lb = len(b), i, j, v, sub
    cdef Py_ssize_t *tmp
    cdef Py_UCS4 ca
    for j in range(lb + 1):
        prev[j] = j
    for i in range(1, la + 1):
        ca = a[i - 1]
        cur[0] = i
        for j in range(1, lb + 1):
            sub = prev[j - 1] + (0 if ca == b[j - 1] else 1)
            v = prev[j] + 1
            if cur[j - 1] + 1 < v:
                v = cur[j - 1] + 1
            if sub < v:
                v = sub
            cur[j] = v
        tmp = prev
        prev = cur
        cur = tmp
    return prev[lb]


cdef Py_ssize_t _distance(str a, str b) except -1:
    cdef Py_ssize_t la = len(a), lb = len(b), d
    if la < lb:
        a, b = b, a
        la, lb = lb, la
    if lb == 0:
        return la
    cdef Py_ssize_t *buf = <Py_ssize_t *> malloc(2 * (lb + 1) * sizeof(Py_ssize_t))
    if buf == NULL:
        raise MemoryError()
    try:
        d = _lev(a, b, buf, buf + lb + 1)
    finally:
        free(buf)
    return d


def levenshtein(str a, str b):
    """Character-level edit distance (unit-cost insert/delete/substitute)."""
    return _distance(a, b)


def best_window(tokens, str phrase, Py_ssize_t max_len):
    """Token window closest to ``phrase``; see ``_pykernels.best_window``."""
    cdef list toks = list(tokens)
    cdef Py_ssize_t n = len(toks), lp = len(phrase)
    cdef Py_ssize_t length, start, lw, den, d, gap
    cdef Py_ssize_t bnum = 1, bden = 0, bstart = -1, bend = -1
    cdef bint found = False
    cdef str window
    if max_len > n:
        max_len = n
    for length in range(max_len, 0, -1):
        for start in range(n - length + 1):
            window = " ".join(toks[start:start + length])
            lw = len(window)
            den = lw if lw > lp else lp
            if den == 0:
                continue
            gap = lw - lp if lw > lp else lp - lw
            if found and gap * bden > bnum * den:
                continue
            d = _distance(window, phrase)
            if not found or d * bden < bnum * den:
                found = True
                bstart = start
                bend = start + length
                bnum = d
                bden = den
    if not found:
        return None
    return (bstart, bend, bnum, bden)
