"""Numba kernels for the dissection dynamic programs and the greedy scan.

All kernels work on raw signature arrays S1 (n+1, d), S2 (n+1, d, d),
S3 (n+1, d, d, d) padded with zeros above the active level count L, plus
per-segment log-increments G1/G2/G3 when interior interpolation is needed.
Levels above L are never read, so the padding costs memory only.

The per-level weight of a cell (a, b) is |level-k increment|^(p/k); each
level's dissection supremum is an additive-objective DP, exact over grid
dissections:  best(b) = max_{a<b} best(a) + w(a, b).

The increment-weight helpers are force-inlined and index the signature
arrays directly: the inner loops run over every grid pair, so per-call view
creation would dominate the runtime.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


_NEG = -1e300


@njit(inline="always")
def _w_rows(S1, S2, S3, a, b, L, p, tmp2):
    """Weights of the increment between grid rows a and b."""
    d = S1.shape[1]
    s1 = 0.0
    for i in range(d):
        x = S1[b, i] - S1[a, i]
        s1 += x * x
    w1 = s1 ** (0.5 * p)
    w2 = 0.0
    w3 = 0.0
    if L >= 2:
        s2 = 0.0
        for i in range(d):
            for j in range(d):
                x2 = S2[b, i, j] - S2[a, i, j] - S1[a, i] * (S1[b, j] - S1[a, j])
                tmp2[i, j] = x2
                s2 += x2 * x2
        w2 = s2 ** (0.25 * p)
        if L >= 3:
            s3 = 0.0
            for i in range(d):
                for j in range(d):
                    for k in range(d):
                        x3 = (S3[b, i, j, k] - S3[a, i, j, k]
                              - S1[a, i] * tmp2[j, k]
                              - S2[a, i, j] * (S1[b, k] - S1[a, k]))
                        s3 += x3 * x3
            w3 = s3 ** (p / 6.0)
    return w1, w2, w3


@njit(inline="always")
def _w_buf_row(s1, s2, s3, S1, S2, S3, b, L, p, tmp2):
    """Weights of the increment from buffered levels (s*) to grid row b."""
    d = S1.shape[1]
    t1 = 0.0
    for i in range(d):
        x = S1[b, i] - s1[i]
        t1 += x * x
    w1 = t1 ** (0.5 * p)
    w2 = 0.0
    w3 = 0.0
    if L >= 2:
        t2 = 0.0
        for i in range(d):
            for j in range(d):
                x2 = S2[b, i, j] - s2[i, j] - s1[i] * (S1[b, j] - s1[j])
                tmp2[i, j] = x2
                t2 += x2 * x2
        w2 = t2 ** (0.25 * p)
        if L >= 3:
            t3 = 0.0
            for i in range(d):
                for j in range(d):
                    for k in range(d):
                        x3 = (S3[b, i, j, k] - s3[i, j, k]
                              - s1[i] * tmp2[j, k]
                              - s2[i, j] * (S1[b, k] - s1[k]))
                        t3 += x3 * x3
            w3 = t3 ** (p / 6.0)
    return w1, w2, w3


@njit(inline="always")
def _w_row_buf(S1, S2, S3, a, c1, c2, c3, L, p, tmp2):
    """Weights of the increment from grid row a to buffered levels (c*)."""
    d = S1.shape[1]
    t1 = 0.0
    for i in range(d):
        x = c1[i] - S1[a, i]
        t1 += x * x
    w1 = t1 ** (0.5 * p)
    w2 = 0.0
    w3 = 0.0
    if L >= 2:
        t2 = 0.0
        for i in range(d):
            for j in range(d):
                x2 = c2[i, j] - S2[a, i, j] - S1[a, i] * (c1[j] - S1[a, j])
                tmp2[i, j] = x2
                t2 += x2 * x2
        w2 = t2 ** (0.25 * p)
        if L >= 3:
            t3 = 0.0
            for i in range(d):
                for j in range(d):
                    for k in range(d):
                        x3 = (c3[i, j, k] - S3[a, i, j, k]
                              - S1[a, i] * tmp2[j, k]
                              - S2[a, i, j] * (c1[k] - S1[a, k]))
                        t3 += x3 * x3
            w3 = t3 ** (p / 6.0)
    return w1, w2, w3


@njit(inline="always")
def _w_buf_buf(s1, s2, s3, c1, c2, c3, L, p, tmp2):
    """Weights of the increment between two buffered signature values."""
    d = s1.shape[0]
    t1 = 0.0
    for i in range(d):
        x = c1[i] - s1[i]
        t1 += x * x
    w1 = t1 ** (0.5 * p)
    w2 = 0.0
    w3 = 0.0
    if L >= 2:
        t2 = 0.0
        for i in range(d):
            for j in range(d):
                x2 = c2[i, j] - s2[i, j] - s1[i] * (c1[j] - s1[j])
                tmp2[i, j] = x2
                t2 += x2 * x2
        w2 = t2 ** (0.25 * p)
        if L >= 3:
            t3 = 0.0
            for i in range(d):
                for j in range(d):
                    for k in range(d):
                        x3 = (c3[i, j, k] - s3[i, j, k]
                              - s1[i] * tmp2[j, k]
                              - s2[i, j] * (c1[k] - s1[k]))
                        t3 += x3 * x3
            w3 = t3 ** (p / 6.0)
    return w1, w2, w3


@njit(cache=True)
def weight_tables(S1, S2, S3, L, p):
    """w_k[a, b] = |level-k increment over (a, b)|^(p/k) for every grid pair."""
    n1 = S1.shape[0]
    d = S1.shape[1]
    w1 = np.zeros((n1, n1))
    w2 = np.zeros((n1, n1))
    w3 = np.zeros((n1, n1))
    tmp2 = np.empty((d, d))
    for a in range(n1 - 1):
        for b in range(a + 1, n1):
            r1, r2, r3 = _w_rows(S1, S2, S3, a, b, L, p, tmp2)
            w1[a, b] = r1
            w2[a, b] = r2
            w3[a, b] = r3
    return w1, w2, w3


@njit(cache=True)
def dp_table(w):
    """out[i, b] = sup over dissections of [i, b] of the cell-weight sum."""
    n1 = w.shape[0]
    out = np.zeros((n1, n1))
    best = np.empty(n1)
    for i in range(n1 - 1):
        best[i] = 0.0
        for b in range(i + 1, n1):
            m = best[i] + w[i, b]
            for a in range(i + 1, b):
                c = best[a] + w[a, b]
                if c > m:
                    m = c
            best[b] = m
            out[i, b] = m
    return out


@njit(cache=True)
def omega_row(S1, S2, S3, L, p, i):
    """omega(i, b) for all b > i: per-level DP summed over levels 1..L."""
    n1 = S1.shape[0]
    d = S1.shape[1]
    tmp2 = np.empty((d, d))
    best1 = np.zeros(n1)
    best2 = np.zeros(n1)
    best3 = np.zeros(n1)
    out = np.zeros(n1)
    for b in range(i + 1, n1):
        m1 = _NEG
        m2 = _NEG
        m3 = _NEG
        for a in range(i, b):
            r1, r2, r3 = _w_rows(S1, S2, S3, a, b, L, p, tmp2)
            c1 = best1[a] + r1
            if c1 > m1:
                m1 = c1
            c2 = best2[a] + r2
            if c2 > m2:
                m2 = c2
            c3 = best3[a] + r3
            if c3 > m3:
                m3 = c3
        best1[b] = m1
        best2[b] = m2
        best3[b] = m3
        out[b] = m1 + m2 + m3
    return out


@njit(cache=True)
def _find_segment(times, t):
    """Rightmost j with times[j] <= t, clamped to a valid segment index."""
    n = times.shape[0] - 1
    lo = 0
    hi = n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if times[mid] <= t:
            lo = mid
        else:
            hi = mid - 1
    if lo >= n:
        lo = n - 1
    return lo


@njit(cache=True)
def _exp_scaled(g1, g2, g3, theta, L, o1, o2, o3):
    """Group exponential of theta * (g1, g2, g3) (log levels)."""
    d = g1.shape[0]
    for i in range(d):
        o1[i] = theta * g1[i]
    if L >= 2:
        for i in range(d):
            for j in range(d):
                o2[i, j] = theta * g2[i, j] + 0.5 * o1[i] * o1[j]
    if L >= 3:
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    o3[i, j, k] = (theta * g3[i, j, k]
                                   + 0.5 * theta * (o1[i] * g2[j, k] + g2[i, j] * o1[k])
                                   + o1[i] * o1[j] * o1[k] / 6.0)


@njit(cache=True)
def _mul_into(a1, a2, a3, b1, b2, b3, L, o1, o2, o3):
    d = a1.shape[0]
    if L >= 3:
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    o3[i, j, k] = (a3[i, j, k] + b3[i, j, k]
                                   + a1[i] * b2[j, k] + a2[i, j] * b1[k])
    if L >= 2:
        for i in range(d):
            for j in range(d):
                o2[i, j] = a2[i, j] + b2[i, j] + a1[i] * b1[j]
    for i in range(d):
        o1[i] = a1[i] + b1[i]


@njit(cache=True)
def _sig_at(times, S1, S2, S3, G1, G2, G3, L, t, o1, o2, o3, e1, e2, e3):
    """Signature levels at time t (log-linear interior interpolation)."""
    j = _find_segment(times, t)
    if t == times[j] or t == times[j + 1]:
        row = j if t == times[j] else j + 1
        d = o1.shape[0]
        for i in range(d):
            o1[i] = S1[row, i]
        if L >= 2:
            for i in range(d):
                for k in range(d):
                    o2[i, k] = S2[row, i, k]
        if L >= 3:
            for i in range(d):
                for k in range(d):
                    for l in range(d):
                        o3[i, k, l] = S3[row, i, k, l]
        return
    theta = (t - times[j]) / (times[j + 1] - times[j])
    _exp_scaled(G1[j], G2[j], G3[j], theta, L, e1, e2, e3)
    _mul_into(S1[j], S2[j], S3[j], e1, e2, e3, L, o1, o2, o3)


@njit(cache=True)
def _omega_to_point(S1, S2, S3, L, p, j0, b_stop,
                    s1, s2, s3, c1, c2, c3,
                    best1, best2, best3, tmp2):
    """One DP evaluation: control from the moving start (signature s*) to the
    off-grid point with signature c*, using grid points j0..b_stop-1 as
    interior dissection candidates (their best values must be filled)."""
    m1 = _NEG
    m2 = _NEG
    m3 = _NEG
    r1, r2, r3 = _w_buf_buf(s1, s2, s3, c1, c2, c3, L, p, tmp2)
    if r1 > m1:
        m1 = r1
    if r2 > m2:
        m2 = r2
    if r3 > m3:
        m3 = r3
    for a in range(j0, b_stop):
        r1, r2, r3 = _w_row_buf(S1, S2, S3, a, c1, c2, c3, L, p, tmp2)
        c1v = best1[a] + r1
        if c1v > m1:
            m1 = c1v
        c2v = best2[a] + r2
        if c2v > m2:
            m2 = c2v
        c3v = best3[a] + r3
        if c3v > m3:
            m3 = c3v
    return m1 + m2 + m3


@njit(cache=True)
def greedy_scan(times, S1, S2, S3, G1, G2, G3, L, p, alpha, rel_tol,
                out_taus, out_omegas):
    """Greedy threshold partition of the whole grid span.

    Walks the grid accumulating the control from the current start; when the
    control reaches alpha the crossing time is located by bisection inside
    the crossing segment (ties broken toward the later time).  Fills
    out_taus[0..N+1] and out_omegas[0..N] and returns the interior count N,
    or -1 if the output capacity is exhausted.
    """
    n1 = times.shape[0]
    n = n1 - 1
    d = S1.shape[1]
    cap = out_taus.shape[0]
    tmp2 = np.empty((d, d))
    s1 = np.zeros(d)
    s2 = np.zeros((d, d))
    s3 = np.zeros((d, d, d))
    c1 = np.empty(d)
    c2 = np.empty((d, d))
    c3 = np.empty((d, d, d))
    e1 = np.empty(d)
    e2 = np.empty((d, d))
    e3 = np.empty((d, d, d))
    best1 = np.zeros(n1)
    best2 = np.zeros(n1)
    best3 = np.zeros(n1)
    s_t = times[0]
    out_taus[0] = s_t
    n_taus = 1
    # run the bisection slightly inside the documented band so the recorded
    # interval controls satisfy |omega - alpha| <= rel_tol * alpha with real
    # margin even after the caller's own floating-point comparison
    hi_thresh = alpha * (1.0 + 0.98 * rel_tol)
    lo_thresh = alpha * (1.0 - 0.98 * rel_tol)
    while s_t < times[n]:
        j0 = _find_segment(times, s_t) + 1
        while j0 <= n and times[j0] <= s_t:
            j0 += 1
        crossed = False
        omega_last = 0.0
        b_cross = -1
        for b in range(j0, n1):
            m1 = _NEG
            m2 = _NEG
            m3 = _NEG
            r1, r2, r3 = _w_buf_row(s1, s2, s3, S1, S2, S3, b, L, p, tmp2)
            if r1 > m1:
                m1 = r1
            if r2 > m2:
                m2 = r2
            if r3 > m3:
                m3 = r3
            for a in range(j0, b):
                r1, r2, r3 = _w_rows(S1, S2, S3, a, b, L, p, tmp2)
                cv = best1[a] + r1
                if cv > m1:
                    m1 = cv
                cv = best2[a] + r2
                if cv > m2:
                    m2 = cv
                cv = best3[a] + r3
                if cv > m3:
                    m3 = cv
            best1[b] = m1
            best2[b] = m2
            best3[b] = m3
            omega_last = m1 + m2 + m3
            if omega_last >= lo_thresh:
                crossed = True
                b_cross = b
                break
        if not crossed:
            if n_taus >= cap:
                return -1
            out_taus[n_taus] = times[n]
            out_omegas[n_taus - 1] = omega_last
            n_taus += 1
            break
        om_hi = omega_last
        t_hi = times[b_cross]
        t_lo = s_t if b_cross == j0 else times[b_cross - 1]
        if om_hi > hi_thresh:
            for _ in range(200):
                t_mid = 0.5 * (t_lo + t_hi)
                if not (t_lo < t_mid < t_hi):
                    break
                _sig_at(times, S1, S2, S3, G1, G2, G3, L, t_mid,
                        c1, c2, c3, e1, e2, e3)
                om_mid = _omega_to_point(S1, S2, S3, L, p, j0, b_cross,
                                         s1, s2, s3, c1, c2, c3,
                                         best1, best2, best3, tmp2)
                if om_mid >= alpha:
                    t_hi = t_mid
                    om_hi = om_mid
                    if om_hi <= hi_thresh:
                        break
                else:
                    t_lo = t_mid
        if n_taus >= cap:
            return -1
        out_taus[n_taus] = t_hi
        out_omegas[n_taus - 1] = om_hi
        n_taus += 1
        s_t = t_hi
        _sig_at(times, S1, S2, S3, G1, G2, G3, L, s_t, s1, s2, s3, e1, e2, e3)
    return n_taus - 2


@njit(cache=True)
def omega_interval(times, S1, S2, S3, G1, G2, G3, L, p, t0, t1):
    """Control over an arbitrary sub-interval [t0, t1] of the grid span.

    Dissection candidates are the grid points strictly inside plus the two
    (possibly off-grid) endpoints, matching the greedy scan's convention.
    """
    n1 = times.shape[0]
    d = S1.shape[1]
    tmp2 = np.empty((d, d))
    s1 = np.empty(d)
    s2 = np.empty((d, d))
    s3 = np.empty((d, d, d))
    c1 = np.empty(d)
    c2 = np.empty((d, d))
    c3 = np.empty((d, d, d))
    e1 = np.empty(d)
    e2 = np.empty((d, d))
    e3 = np.empty((d, d, d))
    if t1 <= t0:
        return 0.0
    _sig_at(times, S1, S2, S3, G1, G2, G3, L, t0, s1, s2, s3, e1, e2, e3)
    j0 = _find_segment(times, t0) + 1
    while j0 - 1 >= 0 and times[j0 - 1] > t0:
        j0 -= 1
    while j0 < n1 and times[j0] <= t0:
        j0 += 1
    best1 = np.zeros(n1)
    best2 = np.zeros(n1)
    best3 = np.zeros(n1)
    b_stop = j0
    for b in range(j0, n1):
        if times[b] >= t1:
            break
        m1 = _NEG
        m2 = _NEG
        m3 = _NEG
        r1, r2, r3 = _w_buf_row(s1, s2, s3, S1, S2, S3, b, L, p, tmp2)
        if r1 > m1:
            m1 = r1
        if r2 > m2:
            m2 = r2
        if r3 > m3:
            m3 = r3
        for a in range(j0, b):
            r1, r2, r3 = _w_rows(S1, S2, S3, a, b, L, p, tmp2)
            cv = best1[a] + r1
            if cv > m1:
                m1 = cv
            cv = best2[a] + r2
            if cv > m2:
                m2 = cv
            cv = best3[a] + r3
            if cv > m3:
                m3 = cv
        best1[b] = m1
        best2[b] = m2
        best3[b] = m3
        b_stop = b + 1
    _sig_at(times, S1, S2, S3, G1, G2, G3, L, t1, c1, c2, c3, e1, e2, e3)
    return _omega_to_point(S1, S2, S3, L, p, j0, b_stop,
                           s1, s2, s3, c1, c2, c3, best1, best2, best3, tmp2)


@njit(cache=True)
def local_variation_dp(omega, alpha):
    """Constrained DP: largest total control over dissections whose every
    cell has control <= alpha.  Returns (value, predecessor array); value is
    -1.0 when no feasible dissection reaches the right endpoint."""
    n1 = omega.shape[0]
    best = np.full(n1, -1.0)
    choice = np.full(n1, -1, dtype=np.int64)
    best[0] = 0.0
    for b in range(1, n1):
        m = -1.0
        am = -1
        for a in range(b):
            if best[a] < 0.0:
                continue
            w = omega[a, b]
            if w <= alpha:
                c = best[a] + w
                if c > m:
                    m = c
                    am = a
        best[b] = m
        choice[b] = am
    return best[n1 - 1], choice
