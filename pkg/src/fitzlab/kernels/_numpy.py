"""Vectorised numpy implementations of the hot loops (no JIT required)."""

import numpy as np

NORM_L1, NORM_L2, NORM_LINF = 0, 1, 2

# element budget per temporary block
_BLOCK = 1 << 22


def _rows_per_block(width: int) -> int:
    return max(1, _BLOCK // max(1, width))


def _vnorm(V, code):
    # sequential accumulation over the last axis, matching the JIT loops
    if code == NORM_L1:
        s = np.zeros(V.shape[:-1])
        for k in range(V.shape[-1]):
            s = s + np.abs(V[..., k])
        return s
    if code == NORM_L2:
        s = np.zeros(V.shape[:-1])
        for k in range(V.shape[-1]):
            s = s + V[..., k] * V[..., k]
        return np.sqrt(s)
    return np.max(np.abs(V), axis=-1)


def conjugate_brute(P, f, Y):
    N, D = P.shape
    M = Y.shape[0]
    out = np.empty(M)
    step = _rows_per_block(N)
    negf = -f
    for s in range(0, M, step):
        Yc = Y[s : s + step]
        acc = np.broadcast_to(negf, (Yc.shape[0], N)).copy()
        for k in range(D - 1, -1, -1):
            acc = acc + P[:, k][None, :] * Yc[:, k][:, None]
        out[s : s + step] = acc.max(axis=1)
    return out


def legendre_axis(A, x, y):
    F, m = A.shape
    out = np.full((F, y.shape[0]), -np.inf)
    for i in range(m):
        np.maximum(out, A[:, i : i + 1] + x[i] * y[None, :], out=out)
    return out


def monotone_scan(X, Xs, tol):
    n, d = X.shape
    mn = np.inf
    fi = fj = -1
    step = _rows_per_block(n)
    for s in range(0, n, step):
        rows = np.arange(s, min(n, s + step))
        P = np.zeros((rows.size, n))
        for k in range(d):
            P = P + (X[rows, k][:, None] - X[:, k][None, :]) * (Xs[rows, k][:, None] - Xs[:, k][None, :])
        upper = np.arange(n)[None, :] > rows[:, None]
        P = np.where(upper, P, np.inf)
        mn = min(mn, float(P.min())) if P.size else mn
        if fi < 0:
            bad = P < -tol
            r = np.flatnonzero(bad.any(axis=1))
            if r.size:
                fi = int(rows[r[0]])
                fj = int(np.flatnonzero(bad[r[0]])[0])
    return mn, fi, fj


def related_scan(A, As, X, Xs):
    p, d = A.shape
    n = X.shape[0]
    prod = np.empty(p)
    dist = np.empty(p)
    step = _rows_per_block(n)
    for s in range(0, p, step):
        a, a_s = A[s : s + step], As[s : s + step]
        acc = np.zeros((a.shape[0], n))
        dd = np.zeros((a.shape[0], n))
        for c in range(d):
            u = X[:, c][None, :] - a[:, c][:, None]
            w = Xs[:, c][None, :] - a_s[:, c][:, None]
            acc = acc + u * w
            dd = np.maximum(dd, np.maximum(np.abs(u), np.abs(w)))
        prod[s : s + step] = acc.min(axis=1)
        dist[s : s + step] = dd.min(axis=1)
    return prod, dist


def fitzpatrick_eval(Q, Qs, X, Xs):
    p, d = Q.shape
    n = X.shape[0]
    out = np.empty(p)
    step = _rows_per_block(n)
    for s in range(0, p, step):
        q, qs = Q[s : s + step], Qs[s : s + step]
        pi = np.zeros(q.shape[0])
        for c in range(d):
            pi = pi + q[:, c] * qs[:, c]
        acc = np.zeros((q.shape[0], n))
        for c in range(d):
            acc = acc + (q[:, c][:, None] - X[:, c][None, :]) * (Xs[:, c][None, :] - qs[:, c][:, None])
        out[s : s + step] = acc.max(axis=1) + pi
    return out


def ni_eval(Ps, Pss, X, Xs):
    p, d = Ps.shape
    n = X.shape[0]
    out = np.empty(p)
    arg = np.empty(p, dtype=np.int64)
    step = _rows_per_block(n)
    for s in range(0, p, step):
        a, b = Ps[s : s + step], Pss[s : s + step]
        acc = np.zeros((a.shape[0], n))
        for c in range(d):
            acc = acc + (Xs[:, c][None, :] - a[:, c][:, None]) * (b[:, c][:, None] - X[:, c][None, :])
        k = acc.argmin(axis=1)
        arg[s : s + step] = k
        out[s : s + step] = acc[np.arange(a.shape[0]), k]
    return out, arg


def midpoint_scan(vals, idx, sub, strides, tol):
    n = sub.shape[0]
    D = idx.shape[1]
    sv = vals[sub]
    fin = np.isfinite(sv)
    sidx = idx[sub]
    parity = (sidx % 2) @ (1 << np.arange(D))
    step = _rows_per_block(n)
    cols = np.arange(n)
    for s in range(0, n, step):
        rows = np.arange(s, min(n, s + step))
        ok = (cols[None, :] > rows[:, None]) & fin[rows][:, None] & fin[None, :]
        ok &= parity[rows][:, None] == parity[None, :]
        if not ok.any():
            continue
        mid = np.zeros((rows.size, n), dtype=np.int64)
        for c in range(D):
            mid += ((sidx[rows, c][:, None] + sidx[None, :, c]) // 2) * strides[c]
        with np.errstate(invalid="ignore"):
            bad = ok & (vals[mid] > 0.5 * (sv[rows][:, None] + sv[None, :]) + tol)
        r = np.flatnonzero(bad.any(axis=1))
        if r.size:
            b = int(np.flatnonzero(bad[r[0]])[0])
            return int(sub[rows[r[0]]]), int(sub[b]), int(mid[r[0], b])
    return -1, -1, -1


def inf_conv(H1, H2, didx, m, center, strides):
    Nx, Md = H1.shape
    out = np.full((Nx, Md), np.inf)
    for j in range(Md):
        t = center + didx - didx[j][None, :]
        ok = np.all((t >= 0) & (t < m), axis=1)
        if not ok.any():
            continue
        tf = (t[ok] * strides[None, :]).sum(axis=1)
        cand = H1[:, j][:, None] + H2[:, tf]
        cur = out[:, ok]
        out[:, ok] = np.minimum(cur, cand)
    return out


def range_hits(W, X, Xs, mu, eps, hit_tol, radius, ms, norm_code):
    p, d = W.shape
    n = X.shape[0]
    dual_code = NORM_LINF if norm_code == NORM_L1 else (NORM_L1 if norm_code == NORM_LINF else NORM_L2)
    c0 = (ms - 1) // 2
    sigma = 2.0 * radius / (ms - 1)
    span = int(np.floor(2.0 * hit_tol / sigma + 2e-9)) + 1
    offsets = np.array(np.meshgrid(*([np.arange(span)] * d), indexing="ij")).reshape(d, -1).T
    K = offsets.shape[0]
    nx = _vnorm(X, norm_code)
    hit = np.zeros(p, dtype=bool)
    wk = np.full(p, -1, dtype=np.int64)
    wy = np.zeros((p, d))
    step = _rows_per_block(n * K)
    for s in range(0, p, step):
        w = W[s : s + step]
        T = w[:, None, :] - Xs[None, :, :]  # (q, n, d)
        lo = np.maximum(np.ceil((T - hit_tol + radius) / sigma - 1e-9), 0)
        hi = np.minimum(np.floor((T + hit_tol + radius) / sigma + 1e-9), ms - 1)
        cur = lo[:, :, None, :] + offsets[None, None, :, :]  # (q, n, K, d)
        valid = np.all(cur <= hi[:, :, None, :], axis=-1)
        ys = radius * ((cur - c0) / c0)
        diff = T[:, :, None, :] - ys
        v = ys / mu
        pr = np.zeros(valid.shape)
        for c in range(d):
            pr = pr + X[None, :, None, c] * v[..., c]
        nv = _vnorm(v, dual_code)
        good = valid & (_vnorm(diff, dual_code) <= hit_tol + 1e-12)
        good &= 0.5 * nx[None, :, None] * nx[None, :, None] + 0.5 * nv * nv <= pr + eps + 1e-12
        flat = good.reshape(good.shape[0], -1)
        any_hit = flat.any(axis=1)
        first = flat.argmax(axis=1)
        kk, oo = np.divmod(first, K)
        rows = np.flatnonzero(any_hit)
        hit[s + rows] = True
        wk[s + rows] = kk[rows]
        wy[s + rows] = ys[rows, kk[rows], oo[rows]]
    return hit, wk, wy


def subgradient_scan(P, f, Y):
    N, D = P.shape
    M = Y.shape[0]
    out = np.empty((N, M))
    fin = np.isfinite(f)
    Pf, ff = P[fin], f[fin]
    for a in range(N):
        if not fin[a]:
            out[a] = -np.inf
            continue
        s = np.zeros((Pf.shape[0], M))
        for c in range(D):
            s = s + (Pf[:, c] - P[a, c])[:, None] * Y[:, c][None, :]
        out[a] = ((ff - f[a])[:, None] - s).min(axis=0)
    return out
