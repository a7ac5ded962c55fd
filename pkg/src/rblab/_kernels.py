"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``RBLAB_DISABLE_JIT=1`` to force the numpy implementations (useful for
debugging and for the benchmark in ``benchmarks/bench_kernels.py``).
The two paths share the algorithm and the poll order; they may differ in the
last few bits because vectorized ``exp``/``einsum`` round differently.
"""
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("RBLAB_DISABLE_JIT", "0") != "1"


# ---------------------------------------------------------------------------
# batched relative Rota-Baxter residual
# ---------------------------------------------------------------------------

def _rb_residual_batch_numpy(cg, ch, phi, Bs):
    # [Bu, Bv]_g - B(phi(Bu)v - phi(Bv)u + [u, v]_h) on basis pairs i < j
    n_h = ch.shape[0]
    out = np.zeros(Bs.shape[0])
    for i in range(n_h):
        for j in range(i + 1, n_h):
            bu = Bs[:, :, i]
            bv = Bs[:, :, j]
            lhs = np.einsum("na,nb,abk->nk", bu, bv, cg)
            # phi(Bu) v = sum_a (Bu)_a phi[a][:, j]
            inner = np.einsum("na,ak->nk", bu, phi[:, :, j])
            inner = inner - np.einsum("na,ak->nk", bv, phi[:, :, i])
            inner = inner + ch[i, j][None, :]
            rhs = np.einsum("nka,na->nk", Bs, inner)
            res = np.abs(lhs - rhs).max(axis=1)
            out = np.maximum(out, res)
    return out


def _rb_residual_batch_loops(cg, ch, phi, Bs):
    N, n_g, n_h = Bs.shape
    out = np.zeros(N)
    lhs = np.empty(n_g)
    inner = np.empty(n_h)
    for n in range(N):
        worst = 0.0
        for i in range(n_h):
            for j in range(i + 1, n_h):
                for k in range(n_g):
                    s = 0.0
                    for a in range(n_g):
                        for b in range(n_g):
                            s += Bs[n, a, i] * Bs[n, b, j] * cg[a, b, k]
                    lhs[k] = s
                for k in range(n_h):
                    s = 0.0
                    for a in range(n_g):
                        s += Bs[n, a, i] * phi[a, k, j]
                    for a in range(n_g):
                        s -= Bs[n, a, j] * phi[a, k, i]
                    inner[k] = s + ch[i, j, k]
                for k in range(n_g):
                    s = 0.0
                    for a in range(n_h):
                        s += Bs[n, k, a] * inner[a]
                    d = abs(lhs[k] - s)
                    if d > worst:
                        worst = d
        out[n] = worst
    return out


# ---------------------------------------------------------------------------
# Case-3 chart probe: compass search over (log a, log b, log p, q)
# ---------------------------------------------------------------------------
#
# The factorization candidate is chart(a, b) . ((p, q), e) in UT2 x| UT2, i.e.
#   first  = [[a p, a q + beta / p], [0, 1/(a p)]],  beta = m/(2k) (a - 1/a)
#   second = [[b, w(a, b)], [0, 1/b]]
# and the target is ((x, y), (z, w_t)).

def _case3_terms(m, k, la, lb, lp, q, target):
    a = np.exp(la)
    b = np.exp(lb)
    p = np.exp(lp)
    beta = m / (2.0 * k) * (a - 1.0 / a)
    w = (a * b ** (-m) / (2.0 * k) * (a * b ** (m + 1.0) - 1.0 / a * b ** (-m - 1.0))
         + m / (2.0 * k) * (b - 1.0 / b)
         + 1.0 / (2.0 * k) * (b ** (-2.0 * m - 1.0) - 1.0 / b))
    r0 = a * p - target[0]
    r1 = a * q + beta / p - target[1]
    r2 = 1.0 / (a * p) - 1.0 / target[0]
    r3 = b - target[2]
    r4 = w - target[3]
    r5 = 1.0 / b - 1.0 / target[2]
    return r0, r1, r2, r3, r4, r5


def _case3_eval_numpy(m, k, pts, target):
    r = _case3_terms(m, k, pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3], target)
    sq = r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + r[3] * r[3] + r[4] * r[4] + r[5] * r[5]
    mx = np.maximum(np.maximum(np.maximum(np.abs(r[0]), np.abs(r[1])),
                               np.maximum(np.abs(r[2]), np.abs(r[3]))),
                    np.maximum(np.abs(r[4]), np.abs(r[5])))
    return sq, mx


def _case3_search_numpy(m, k, target, starts, lo, hi, budget, step0, min_step, use_max=False):
    """Complete-poll compass search from each start; returns (best_max, best_x, evals).

    The poll objective is the sum of squares, or the max-abs entry when
    ``use_max`` is set (used for a final polish from the best point).
    """
    dim = 4
    dirs = np.vstack([np.eye(dim), -np.eye(dim)])
    n_starts = starts.shape[0]
    best_max = np.inf
    best_x = starts[0].copy()
    evals = 0
    per_start = budget // n_starts
    for s in range(n_starts):
        x = np.minimum(np.maximum(starts[s].copy(), lo), hi)
        fx_arr, mx_arr = _case3_eval_numpy(m, k, x[None, :], target)
        fx = mx_arr[0] if use_max else fx_arr[0]
        evals += 1
        used = 1
        if mx_arr[0] < best_max:
            best_max = mx_arr[0]
            best_x = x.copy()
        step = step0.copy()
        while used + 2 * dim <= per_start and step.max() > min_step:
            cand = x[None, :] + dirs * step[None, :]
            cand = np.minimum(np.maximum(cand, lo), hi)
            f, mx = _case3_eval_numpy(m, k, cand, target)
            if use_max:
                f = mx
            evals += 2 * dim
            used += 2 * dim
            j = int(np.argmin(mx))
            if mx[j] < best_max:
                best_max = mx[j]
                best_x = cand[j].copy()
            j = int(np.argmin(f))
            if f[j] < fx:
                x = cand[j].copy()
                fx = f[j]
                step = step * 2.0
            else:
                step = step * 0.5
            if best_max == 0.0:
                break
        if best_max == 0.0:
            break
    return best_max, best_x, evals


_case3_terms_jit = njit(cache=True)(_case3_terms) if USE_NUMBA else _case3_terms


def _case3_search_loops(m, k, target, starts, lo, hi, budget, step0, min_step, use_max=False):
    dim = 4
    n_starts = starts.shape[0]
    best_max = np.inf
    best_x = starts[0].copy()
    evals = 0
    per_start = budget // n_starts
    x = np.empty(dim)
    c = np.empty(dim)
    step = np.empty(dim)
    jbest = np.empty(dim)
    for s in range(n_starts):
        for d in range(dim):
            x[d] = min(max(starts[s, d], lo[d]), hi[d])
        r0, r1, r2, r3, r4, r5 = _case3_terms_jit(m, k, x[0], x[1], x[2], x[3], target)
        fx = r0 * r0 + r1 * r1 + r2 * r2 + r3 * r3 + r4 * r4 + r5 * r5
        mx = max(max(max(abs(r0), abs(r1)), max(abs(r2), abs(r3))), max(abs(r4), abs(r5)))
        if use_max:
            fx = mx
        evals += 1
        used = 1
        if mx < best_max:
            best_max = mx
            best_x[:] = x
        for d in range(dim):
            step[d] = step0[d]
        while used + 2 * dim <= per_start and step.max() > min_step:
            fbest = np.inf
            mbest = np.inf
            for sgn in range(2):
                for d in range(dim):
                    for e in range(dim):
                        c[e] = x[e]
                    if sgn == 0:
                        c[d] = x[d] + step[d]
                    else:
                        c[d] = x[d] - step[d]
                    c[d] = min(max(c[d], lo[d]), hi[d])
                    r0, r1, r2, r3, r4, r5 = _case3_terms_jit(m, k, c[0], c[1], c[2], c[3], target)
                    f = r0 * r0 + r1 * r1 + r2 * r2 + r3 * r3 + r4 * r4 + r5 * r5
                    mxc = max(max(max(abs(r0), abs(r1)), max(abs(r2), abs(r3))),
                              max(abs(r4), abs(r5)))
                    if use_max:
                        f = mxc
                    if mxc < mbest:
                        mbest = mxc
                        if mxc < best_max:
                            best_max = mxc
                            best_x[:] = c
                    if f < fbest:
                        fbest = f
                        jbest[:] = c
            evals += 2 * dim
            used += 2 * dim
            if fbest < fx:
                x[:] = jbest
                fx = fbest
                for d in range(dim):
                    step[d] *= 2.0
            else:
                for d in range(dim):
                    step[d] *= 0.5
            if best_max == 0.0:
                break
        if best_max == 0.0:
            break
    return best_max, best_x, evals


def _case3_f(m, k, x, lo, hi, target, use_max):
    # objective at the clipped point; x is clipped in place
    for d in range(4):
        x[d] = min(max(x[d], lo[d]), hi[d])
    r0, r1, r2, r3, r4, r5 = _case3_terms_jit(m, k, x[0], x[1], x[2], x[3], target)
    mx = max(max(max(abs(r0), abs(r1)), max(abs(r2), abs(r3))), max(abs(r4), abs(r5)))
    if use_max:
        return mx, mx
    return r0 * r0 + r1 * r1 + r2 * r2 + r3 * r3 + r4 * r4 + r5 * r5, mx


def _case3_nm_loops(m, k, target, x0, lo, hi, budget, scale0, use_max):
    """Bounded Nelder-Mead with shrinking restarts; returns (best_max, x, evals).

    Points are clipped to the box before evaluation.  After each collapse the
    simplex is rebuilt around the best point with a tenth of the last scale.
    ``best_max`` is the smallest max-abs residual over every evaluated point
    and ``x`` is where it was attained (with the sum of squares as objective
    this need not be the simplex's best vertex).
    """
    n = 4
    S = np.empty((n + 1, n))
    F = np.empty(n + 1)
    best_x = x0.copy()
    for d in range(n):
        best_x[d] = min(max(best_x[d], lo[d]), hi[d])
    fb, best_max = _case3_f(m, k, best_x, lo, hi, target, use_max)
    bx = best_x.copy()
    evals = 1
    xr = np.empty(n)
    xe = np.empty(n)
    xc = np.empty(n)
    cen = np.empty(n)
    scale = scale0
    while evals + n + 1 <= budget and scale > 1e-13:
        for i in range(n + 1):
            for d in range(n):
                S[i, d] = best_x[d]
        for i in range(n):
            t = best_x[i] + scale
            if t > hi[i]:
                t = best_x[i] - scale
            S[i + 1, i] = t
        F[0] = fb
        for i in range(1, n + 1):
            xr[:] = S[i]
            F[i], mx = _case3_f(m, k, xr, lo, hi, target, use_max)
            S[i] = xr
            evals += 1
            if mx < best_max:
                best_max = mx
                bx[:] = xr
        f_start = fb
        size = 0.0
        while evals + 2 <= budget:
            # order: best first
            for i in range(1, n + 1):
                j = i
                while j > 0 and F[j] < F[j - 1]:
                    tmp = F[j]
                    F[j] = F[j - 1]
                    F[j - 1] = tmp
                    for d in range(n):
                        tmp = S[j, d]
                        S[j, d] = S[j - 1, d]
                        S[j - 1, d] = tmp
                    j -= 1
            size = 0.0
            for i in range(1, n + 1):
                for d in range(n):
                    size = max(size, abs(S[i, d] - S[0, d]))
            if size < 1e-15 or F[n] - F[0] <= 1e-32:
                break
            for d in range(n):
                c = 0.0
                for i in range(n):
                    c += S[i, d]
                cen[d] = c / n
            for d in range(n):
                xr[d] = cen[d] + (cen[d] - S[n, d])
            fr, mx = _case3_f(m, k, xr, lo, hi, target, use_max)
            evals += 1
            if mx < best_max:
                best_max = mx
                bx[:] = xr
            if fr < F[0]:
                for d in range(n):
                    xe[d] = cen[d] + 2.0 * (xr[d] - cen[d])
                fe, mx = _case3_f(m, k, xe, lo, hi, target, use_max)
                evals += 1
                if mx < best_max:
                    best_max = mx
                    bx[:] = xe
                if fe < fr:
                    S[n] = xe
                    F[n] = fe
                else:
                    S[n] = xr
                    F[n] = fr
            elif fr < F[n - 1]:
                S[n] = xr
                F[n] = fr
            else:
                if fr < F[n]:
                    for d in range(n):
                        xc[d] = cen[d] + 0.5 * (xr[d] - cen[d])
                else:
                    for d in range(n):
                        xc[d] = cen[d] + 0.5 * (S[n, d] - cen[d])
                fc, mx = _case3_f(m, k, xc, lo, hi, target, use_max)
                evals += 1
                if mx < best_max:
                    best_max = mx
                    bx[:] = xc
                if fc < min(fr, F[n]):
                    S[n] = xc
                    F[n] = fc
                else:
                    for i in range(1, n + 1):
                        for d in range(n):
                            S[i, d] = S[0, d] + 0.5 * (S[i, d] - S[0, d])
                        xr[:] = S[i]
                        F[i], mx = _case3_f(m, k, xr, lo, hi, target, use_max)
                        S[i] = xr
                        evals += 1
                        if mx < best_max:
                            best_max = mx
                            bx[:] = xr
        j = 0
        for i in range(1, n + 1):
            if F[i] < F[j]:
                j = i
        if F[j] < fb:
            fb = F[j]
            best_x[:] = S[j]
        if fb >= f_start:
            scale *= 0.1
        else:
            scale = max(size * 10.0, 1e-12) if size > 0 else scale * 0.1
        if best_max == 0.0:
            break
    return best_max, bx, evals


if USE_NUMBA:
    _case3_f = njit(cache=True)(_case3_f)
    rb_residual_batch = njit(cache=True)(_rb_residual_batch_loops)
    case3_search = njit(cache=True)(_case3_search_loops)
    case3_simplex = njit(cache=True)(_case3_nm_loops)
else:
    rb_residual_batch = _rb_residual_batch_numpy
    case3_search = _case3_search_numpy
    case3_simplex = _case3_nm_loops

# always-available references for tests and benchmarks
rb_residual_batch_numpy = _rb_residual_batch_numpy
case3_search_numpy = _case3_search_numpy
