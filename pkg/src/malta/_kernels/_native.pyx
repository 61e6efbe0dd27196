# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event-window and rank-statistic kernels.

Function-for-function mirror of malta._kernels._fallback; the test suite
asserts bit-identical outputs between the two backends.
"""

import numpy as np

cimport numpy as cnp

BACKEND = "native"


def window_count(times, flags, double start, double end):
    """Count flagged events with start <= t < end (epoch seconds)."""
    cdef double[::1] t = np.ascontiguousarray(times, dtype=np.float64)
    cdef unsigned char[::1] f = np.ascontiguousarray(flags, dtype=np.uint8)
    if t.shape[0] != f.shape[0]:
        raise ValueError("times and flags must have equal length")
    cdef Py_ssize_t i, n = t.shape[0]
    cdef long count = 0
    cdef int hit
    # Branchless accumulation: one fused pass, no boolean temporaries.
    for i in range(n):
        hit = f[i] != 0
        hit &= t[i] >= start
        hit &= t[i] < end
        count += hit
    return count


def latest_flagged_at_or_before(times, flags, double cutoff):
    """Most recent flagged event time <= cutoff, or NaN when there is none."""
    cdef double[::1] t = np.ascontiguousarray(times, dtype=np.float64)
    cdef unsigned char[::1] f = np.ascontiguousarray(flags, dtype=np.uint8)
    if t.shape[0] != f.shape[0]:
        raise ValueError("times and flags must have equal length")
    cdef Py_ssize_t i, n = t.shape[0]
    cdef double NEG_INF = -np.inf
    cdef double best = NEG_INF
    cdef double candidate
    for i in range(n):
        # Branchless: events that miss the filter become -inf.
        candidate = t[i] if (f[i] != 0 and t[i] <= cutoff) else NEG_INF
        if candidate > best:
            best = candidate
    if best == NEG_INF:
        return float("nan")
    return best


def median_clamped_ratio(values, double scale):
    """Median of min(1, v / scale); NaN for an empty input."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(
        values, dtype=np.float64
    ).copy()
    cdef Py_ssize_t i, n = v.shape[0]
    if n == 0:
        return float("nan")
    cdef double[::1] mv = v
    cdef double r
    for i in range(n):
        r = mv[i] / scale
        if r > 1.0:
            r = 1.0
        mv[i] = r
    v.sort()
    cdef Py_ssize_t mid = n // 2
    if n % 2 == 1:
        return mv[mid]
    return (mv[mid - 1] + mv[mid]) / 2.0


cdef double _pos_rank_sum(double[::1] sorted_vals, unsigned char[::1] sorted_pos,
                          double* tie_sum) nogil:
    """Sum of 1-based average ranks over flagged positions of a sorted array."""
    cdef Py_ssize_t n = sorted_vals.shape[0]
    cdef Py_ssize_t start = 0, end, i
    cdef double avg, size, acc = 0.0
    tie_sum[0] = 0.0
    while start < n:
        end = start + 1
        while end < n and sorted_vals[end] == sorted_vals[start]:
            end += 1
        avg = (start + end + 1) / 2.0
        size = end - start
        tie_sum[0] += size * size * size - size
        for i in range(start, end):
            if sorted_pos[i] != 0:
                acc += avg
        start = end
    return acc


def rank_auc(scores, labels):
    """Tie-aware rank AUC: P(random positive outscores random negative)."""
    s = np.ascontiguousarray(scores, dtype=np.float64)
    y = np.ascontiguousarray(labels, dtype=np.uint8)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-d arrays of equal length")
    cdef long n_pos = int(np.count_nonzero(y))
    cdef long n_neg = s.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need at least one positive and one negative label")
    order = np.argsort(s, kind="stable")
    cdef double[::1] ss = np.ascontiguousarray(s[order])
    cdef unsigned char[::1] yy = np.ascontiguousarray(y[order])
    cdef double tie_sum = 0.0
    cdef double pos_rank_sum = _pos_rank_sum(ss, yy, &tie_sum)
    cdef double u = pos_rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def mann_whitney_u(a, b):
    """U statistic for sample a (average-rank ties) and the tie term.

    Returns (u_a, sum(t^3 - t)) where the tie term feeds the normal
    approximation's variance correction.
    """
    x = np.ascontiguousarray(a, dtype=np.float64)
    y = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0]
    if nx == 0 or ny == 0:
        raise ValueError("both samples must be non-empty")
    combined = np.concatenate((x, y))
    order = np.argsort(combined, kind="stable")
    cdef double[::1] cs = np.ascontiguousarray(combined[order])
    cdef unsigned char[::1] from_a = np.ascontiguousarray(
        (order < nx).astype(np.uint8)
    )
    cdef double tie_sum = 0.0
    cdef double rank_sum_a = _pos_rank_sum(cs, from_a, &tie_sum)
    cdef double u_a = rank_sum_a - nx * (nx + 1) / 2.0
    return u_a, tie_sum


cdef Py_ssize_t _bisect(double[::1] arr, double value, bint right) nogil:
    """Leftmost (right=0) or rightmost (right=1) insertion point in arr."""
    cdef Py_ssize_t lo = 0, hi = arr.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] < value or (right and arr[mid] == value):
            lo = mid + 1
        else:
            hi = mid
    return lo


def cliffs_delta(a, b):
    """Cliff's delta: (wins - losses) / (len(a) * len(b))."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(
        a, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ys = np.ascontiguousarray(
        b, dtype=np.float64
    ).copy()
    cdef Py_ssize_t nx = x.shape[0], ny = ys.shape[0]
    if nx == 0 or ny == 0:
        raise ValueError("both samples must be non-empty")
    ys.sort()
    cdef double[::1] xv = x
    cdef double[::1] yv = ys
    cdef Py_ssize_t i, lo, hi
    cdef long long wins = 0, ties = 0
    for i in range(nx):
        lo = _bisect(yv, xv[i], 0)
        hi = _bisect(yv, xv[i], 1)
        wins += lo
        ties += hi - lo
    cdef long long losses = <long long> nx * ny - wins - ties
    return (wins - losses) / (<double> nx * ny)
