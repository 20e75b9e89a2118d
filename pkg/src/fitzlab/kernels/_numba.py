"""numba implementations of the hot loops.

Every function mirrors one in ``_numpy`` with the same signature and the
same floating-point evaluation order, so both backends return identical
bits on the operations the test-suite compares exactly.
"""

import numpy as np
from numba import njit

NORM_L1, NORM_L2, NORM_LINF = 0, 1, 2


@njit(cache=True)
def _vnorm(v, code):
    s = 0.0
    if code == NORM_L1:
        for k in range(v.shape[0]):
            s += abs(v[k])
        return s
    if code == NORM_L2:
        for k in range(v.shape[0]):
            s += v[k] * v[k]
        return np.sqrt(s)
    for k in range(v.shape[0]):
        a = abs(v[k])
        if a > s:
            s = a
    return s


@njit(cache=True)
def conjugate_brute(P, f, Y):
    N, D = P.shape
    M = Y.shape[0]
    out = np.empty(M)
    for j in range(M):
        best = -np.inf
        for i in range(N):
            a = -f[i]
            for k in range(D - 1, -1, -1):
                a = a + P[i, k] * Y[j, k]
            if a > best:
                best = a
        out[j] = best
    return out


@njit(cache=True)
def _near_tie(v, best, scale):
    return v >= best - 1e-12 * scale


@njit(cache=True)
def legendre_axis(A, x, y):
    # out[f, j] = max_i A[f, i] + x[i] * y[j]; linear-time over sorted slopes
    F, m = A.shape
    md = y.shape[0]
    out = np.empty((F, md))
    hull = np.empty(m, dtype=np.int64)
    for f in range(F):
        h = 0
        for i in range(m):
            if not np.isfinite(A[f, i]):
                continue
            # lower hull of (x_i, -A_i), strictly convex vertices only
            while h >= 2:
                i0 = hull[h - 2]
                i1 = hull[h - 1]
                lhs = (-A[f, i1] + A[f, i0]) * (x[i] - x[i0])
                rhs = (-A[f, i] + A[f, i0]) * (x[i1] - x[i0])
                if lhs >= rhs:
                    h -= 1
                else:
                    break
            hull[h] = i
            h += 1
        if h == 0:
            for j in range(md):
                out[f, j] = -np.inf
            continue
        k = 0
        for j in range(md):
            yj = y[j]
            while k < h - 1:
                i0 = hull[k]
                i1 = hull[k + 1]
                slope = (A[f, i0] - A[f, i1]) / (x[i1] - x[i0])
                if slope < yj:
                    k += 1
                else:
                    break
            i = hull[k]
            best = A[f, i] + x[i] * yj
            scale = abs(A[f, i]) + abs(x[i] * yj) + 1.0
            l = i - 1
            while l >= 0 and np.isfinite(A[f, l]):
                v = A[f, l] + x[l] * yj
                if not _near_tie(v, best, scale):
                    break
                if v > best:
                    best = v
                l -= 1
            r = i + 1
            while r < m and np.isfinite(A[f, r]):
                v = A[f, r] + x[r] * yj
                if not _near_tie(v, best, scale):
                    break
                if v > best:
                    best = v
                r += 1
            out[f, j] = best
    return out


@njit(cache=True)
def _pair_product(X, Xs, i, j):
    s = 0.0
    for k in range(X.shape[1]):
        s = s + (X[i, k] - X[j, k]) * (Xs[i, k] - Xs[j, k])
    return s


@njit(cache=True)
def monotone_scan(X, Xs, tol):
    n = X.shape[0]
    mn = np.inf
    fi = -1
    fj = -1
    for i in range(n):
        for j in range(i + 1, n):
            p = _pair_product(X, Xs, i, j)
            if p < mn:
                mn = p
            if fi < 0 and p < -tol:
                fi = i
                fj = j
    return mn, fi, fj


@njit(cache=True)
def related_scan(A, As, X, Xs):
    # per probe: min over graph of <y - a, y* - a*> and sup-distance to graph
    p, d = A.shape
    n = X.shape[0]
    prod = np.empty(p)
    dist = np.empty(p)
    for q in range(p):
        mn = np.inf
        dm = np.inf
        for k in range(n):
            s = 0.0
            dd = 0.0
            for c in range(d):
                u = X[k, c] - A[q, c]
                w = Xs[k, c] - As[q, c]
                s = s + u * w
                if abs(u) > dd:
                    dd = abs(u)
                if abs(w) > dd:
                    dd = abs(w)
            if s < mn:
                mn = s
            if dd < dm:
                dm = dd
        prod[q] = mn
        dist[q] = dm
    return prod, dist


@njit(cache=True)
def fitzpatrick_eval(Q, Qs, X, Xs):
    p, d = Q.shape
    n = X.shape[0]
    out = np.empty(p)
    for q in range(p):
        pi = 0.0
        for c in range(d):
            pi = pi + Q[q, c] * Qs[q, c]
        best = -np.inf
        for k in range(n):
            s = 0.0
            for c in range(d):
                s = s + (Q[q, c] - X[k, c]) * (Xs[k, c] - Qs[q, c])
            if s > best:
                best = s
        out[q] = best + pi
    return out


@njit(cache=True)
def ni_eval(Ps, Pss, X, Xs):
    p, d = Ps.shape
    n = X.shape[0]
    out = np.empty(p)
    arg = np.empty(p, dtype=np.int64)
    for q in range(p):
        best = np.inf
        bk = -1
        for k in range(n):
            s = 0.0
            for c in range(d):
                s = s + (Xs[k, c] - Ps[q, c]) * (Pss[q, c] - X[k, c])
            if s < best:
                best = s
                bk = k
        out[q] = best
        arg[q] = bk
    return out, arg


@njit(cache=True)
def midpoint_scan(vals, idx, sub, strides, tol):
    # pairs a < b drawn from ``sub`` with an on-grid midpoint; first violation wins
    n = sub.shape[0]
    D = idx.shape[1]
    for p in range(n):
        a = sub[p]
        fa = vals[a]
        if not np.isfinite(fa):
            continue
        for q in range(p + 1, n):
            b = sub[q]
            fb = vals[b]
            if not np.isfinite(fb):
                continue
            ok = True
            mid = 0
            for c in range(D):
                s = idx[a, c] + idx[b, c]
                if s % 2 != 0:
                    ok = False
                    break
                mid += (s // 2) * strides[c]
            if not ok:
                continue
            if vals[mid] > 0.5 * (fa + fb) + tol:
                return a, b, mid
    return -1, -1, -1


@njit(cache=True)
def inf_conv(H1, H2, didx, m, center, strides):
    Nx, Md = H1.shape
    d = didx.shape[1]
    out = np.full((Nx, Md), np.inf)
    for i in range(Md):
        for j in range(Md):
            t = 0
            ok = True
            for c in range(d):
                v = center + didx[i, c] - didx[j, c]
                if v < 0 or v >= m:
                    ok = False
                    break
                t += v * strides[c]
            if not ok:
                continue
            for x in range(Nx):
                s = H1[x, j] + H2[x, t]
                if s < out[x, i]:
                    out[x, i] = s
    return out


@njit(cache=True)
def range_hits(W, X, Xs, mu, eps, hit_tol, radius, ms, norm_code):
    p, d = W.shape
    n = X.shape[0]
    dual_code = NORM_LINF if norm_code == NORM_L1 else (NORM_L1 if norm_code == NORM_LINF else NORM_L2)
    c0 = (ms - 1) // 2
    sigma = 2.0 * radius / (ms - 1)
    hit = np.zeros(p, dtype=np.bool_)
    wk = np.full(p, -1, dtype=np.int64)
    wy = np.zeros((p, d))
    lo = np.empty(d, dtype=np.int64)
    hi = np.empty(d, dtype=np.int64)
    cur = np.empty(d, dtype=np.int64)
    t = np.empty(d)
    ys = np.empty(d)
    diff = np.empty(d)
    v = np.empty(d)
    for q in range(p):
        found = False
        for k in range(n):
            empty = False
            for c in range(d):
                t[c] = W[q, c] - Xs[k, c]
                a = np.ceil((t[c] - hit_tol + radius) / sigma - 1e-9)
                b = np.floor((t[c] + hit_tol + radius) / sigma + 1e-9)
                if a < 0:
                    a = 0
                if b > ms - 1:
                    b = ms - 1
                if a > b:
                    empty = True
                lo[c] = np.int64(a)
                hi[c] = np.int64(b)
                cur[c] = lo[c]
            if empty:
                continue
            nx = _vnorm(X[k], norm_code)
            while True:
                for c in range(d):
                    ys[c] = radius * ((cur[c] - c0) / c0)
                    diff[c] = t[c] - ys[c]
                    v[c] = ys[c] / mu
                if _vnorm(diff, dual_code) <= hit_tol + 1e-12:
                    nv = _vnorm(v, dual_code)
                    pr = 0.0
                    for c in range(d):
                        pr = pr + X[k, c] * v[c]
                    if 0.5 * nx * nx + 0.5 * nv * nv <= pr + eps + 1e-12:
                        found = True
                        hit[q] = True
                        wk[q] = k
                        for c in range(d):
                            wy[q, c] = ys[c]
                        break
                c = d - 1
                while c >= 0:
                    cur[c] += 1
                    if cur[c] <= hi[c]:
                        break
                    cur[c] = lo[c]
                    c -= 1
                if c < 0:
                    break
            if found:
                break
    return hit, wk, wy


@njit(cache=True)
def subgradient_scan(P, f, Y):
    # slack[a, j] = min_i f(P_i) - f(P_a) - <P_i - P_a, Y_j>; -inf marks f(P_a) = +inf
    N, D = P.shape
    M = Y.shape[0]
    out = np.empty((N, M))
    for a in range(N):
        if not np.isfinite(f[a]):
            for j in range(M):
                out[a, j] = -np.inf
            continue
        for j in range(M):
            best = np.inf
            for i in range(N):
                if not np.isfinite(f[i]):
                    continue
                s = 0.0
                for c in range(D):
                    s = s + (P[i, c] - P[a, c]) * Y[j, c]
                r = (f[i] - f[a]) - s
                if r < best:
                    best = r
            out[a, j] = best
    return out
