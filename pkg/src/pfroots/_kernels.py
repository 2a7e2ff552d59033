"""Compiled per-path predictor-corrector kernels.

Each path is tracked independently, so results never depend on how paths are
split across calls or threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# status codes returned by track_paths
OK = 0
STEP_UNDERFLOW = 1
STEP_BUDGET = 2
NOT_FINITE = 3


@njit(cache=True, nogil=True)
def _ipow(z, e):
    out = 1.0 + 0.0j
    for _ in range(e):
        out *= z
    return out


@njit(cache=True, nogil=True)
def eval_sparse(Z, coef, var, exp, vals, jac):
    """Values and Jacobian of a padded sparse system at one point."""
    R, T, F = var.shape
    jac[:, :] = 0.0
    for r in range(R):
        acc = 0.0 + 0.0j
        for t in range(T):
            c = coef[r, t]
            if c == 0:
                continue
            m = c
            for f in range(F):
                e = exp[r, t, f]
                if e:
                    m *= _ipow(Z[var[r, t, f]], e)
            acc += m
            for f in range(F):
                e = exp[r, t, f]
                if e == 0:
                    continue
                d = c * e * _ipow(Z[var[r, t, f]], e - 1)
                for g in range(F):
                    eg = exp[r, t, g]
                    if g != f and eg:
                        d *= _ipow(Z[var[r, t, g]], eg)
                jac[r, var[r, t, f]] += d
        vals[r] = acc


@njit(cache=True, nogil=True)
def eval_start(Z, L, Lconst, vals, jac):
    """Product-of-linear-forms start system: values and Jacobian."""
    n, D, N = L.shape
    lin = np.empty(D, dtype=np.complex128)
    for i in range(n):
        for f in range(D):
            s = Lconst[i, f]
            for c in range(N):
                s += L[i, f, c] * Z[c]
            lin[f] = s
        g = 1.0 + 0.0j
        for f in range(D):
            g *= lin[f]
        vals[i] = g
        for c in range(N):
            jac[i, c] = 0.0
        for f in range(D):
            others = 1.0 + 0.0j
            for h in range(D):
                if h != f:
                    others *= lin[h]
            for c in range(N):
                jac[i, c] += others * L[i, f, c]


@njit(cache=True, nogil=True)
def eval_homotopy(Z, t, gamma, coef, var, exp, L, Lconst, patch, H, J, Ht, fv, fj, gv, gj):
    n = coef.shape[0]
    k, N = patch.shape
    eval_sparse(Z, coef, var, exp, fv, fj)
    eval_start(Z, L, Lconst, gv, gj)
    tg = gamma * t
    s = 1.0 - t
    for i in range(n):
        H[i] = tg * gv[i] + s * fv[i]
        Ht[i] = gamma * gv[i] - fv[i]
        for c in range(N):
            J[i, c] = tg * gj[i, c] + s * fj[i, c]
    for j in range(k):
        acc = -1.0 + 0.0j
        for c in range(N):
            acc += patch[j, c] * Z[c]
            J[n + j, c] = patch[j, c]
        H[n + j] = acc
        Ht[n + j] = 0.0


@njit(cache=True, nogil=True)
def _inf_norm(x):
    m = 0.0
    for v in x:
        a = abs(v)
        if a > m:
            m = a
    return m


@njit(cache=True, nogil=True)
def _all_finite(x):
    for v in x:
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            return False
    return True


@njit(cache=True, nogil=True)
def lu_solve(A, b, x):
    """Solve ``A x = b`` by Gaussian elimination with partial pivoting.

    ``A`` and ``b`` are overwritten. Returns False on a zero or non-finite pivot.
    """
    n = A.shape[0]
    for col in range(n):
        piv = col
        best = abs(A[col, col].real) + abs(A[col, col].imag)
        for r in range(col + 1, n):
            a = abs(A[r, col].real) + abs(A[r, col].imag)
            if a > best:
                best = a
                piv = r
        if best == 0.0 or not np.isfinite(best):
            return False
        if piv != col:
            for c in range(col, n):
                tmp = A[col, c]
                A[col, c] = A[piv, c]
                A[piv, c] = tmp
            tmp = b[col]
            b[col] = b[piv]
            b[piv] = tmp
        inv = 1.0 / A[col, col]
        for r in range(col + 1, n):
            m = A[r, col] * inv
            if m != 0:
                for c in range(col + 1, n):
                    A[r, c] -= m * A[col, c]
                b[r] -= m * b[col]
    for r in range(n - 1, -1, -1):
        s = b[r]
        for c in range(r + 1, n):
            s -= A[r, c] * x[c]
        x[r] = s / A[r, r]
    return True


@njit(cache=True, nogil=True)
def _velocity(Z, t, gamma, coef, var, exp, L, Lconst, patch, H, J, Ht, fv, fj, gv, gj, out):
    eval_homotopy(Z, t, gamma, coef, var, exp, L, Lconst, patch, H, J, Ht, fv, fj, gv, gj)
    for i in range(Ht.shape[0]):
        Ht[i] = -Ht[i]
    return lu_solve(J, Ht, out)


@njit(cache=True, nogil=True)
def track_paths(starts, gamma, coef, var, exp, L, Lconst, patch,
                corrector_tol, max_newton_iters, initial_step, min_step, max_step,
                endgame_start, final_t, max_steps, polish_iters):
    """Track every start point from t=1 to t=final_t, then Newton-polish at t=0.

    Returns the tracked points at ``final_t``, their polished versions, status
    codes, accepted steps, attempted steps and the last reached ``t``. Polishing is kept separate
    because Newton is unstable on singular endpoints at infinity.
    """
    P, N = starts.shape
    n = coef.shape[0]
    M = n + patch.shape[0]
    out = np.empty((P, N), dtype=np.complex128)
    polished = np.empty((P, N), dtype=np.complex128)
    status = np.zeros(P, dtype=np.int64)
    steps = np.zeros(P, dtype=np.int64)
    tries = np.zeros(P, dtype=np.int64)
    t_end = np.zeros(P)
    H = np.empty(M, dtype=np.complex128)
    Ht = np.empty(M, dtype=np.complex128)
    J = np.empty((M, N), dtype=np.complex128)
    fv = np.empty(n, dtype=np.complex128)
    fj = np.empty((n, N), dtype=np.complex128)
    gv = np.empty(n, dtype=np.complex128)
    gj = np.empty((n, N), dtype=np.complex128)
    k1 = np.empty(N, dtype=np.complex128)
    k2 = np.empty(N, dtype=np.complex128)
    k3 = np.empty(N, dtype=np.complex128)
    k4 = np.empty(N, dtype=np.complex128)
    dz = np.empty(N, dtype=np.complex128)
    Zp = np.empty(N, dtype=np.complex128)
    Zs = np.empty(N, dtype=np.complex128)

    for p in range(P):
        Z = starts[p].copy()
        t = 1.0
        h = initial_step
        streak = 0
        attempts = 0
        accepted = 0
        code = OK
        while t > final_t:
            if attempts >= max_steps:
                code = STEP_BUDGET
                break
            attempts += 1
            step = min(h, max_step, t)
            if t < endgame_start:
                step = min(step, 0.5 * t)
            dt = -step
            ok = _velocity(Z, t, gamma, coef, var, exp, L, Lconst, patch,
                           H, J, Ht, fv, fj, gv, gj, k1)
            if ok:
                for c in range(N):
                    Zs[c] = Z[c] + 0.5 * dt * k1[c]
                ok = _velocity(Zs, t + 0.5 * dt, gamma, coef, var, exp, L, Lconst,
                               patch, H, J, Ht, fv, fj, gv, gj, k2)
            if ok:
                for c in range(N):
                    Zs[c] = Z[c] + 0.5 * dt * k2[c]
                ok = _velocity(Zs, t + 0.5 * dt, gamma, coef, var, exp, L, Lconst,
                               patch, H, J, Ht, fv, fj, gv, gj, k3)
            t1 = t + dt
            if ok:
                for c in range(N):
                    Zs[c] = Z[c] + dt * k3[c]
                ok = _velocity(Zs, t1, gamma, coef, var, exp, L, Lconst,
                               patch, H, J, Ht, fv, fj, gv, gj, k4)

            converged = False
            if ok:
                for c in range(N):
                    Zp[c] = Z[c] + (dt / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])
                for _ in range(max_newton_iters):
                    eval_homotopy(Zp, t1, gamma, coef, var, exp, L, Lconst, patch,
                                  H, J, Ht, fv, fj, gv, gj)
                    for i in range(M):
                        H[i] = -H[i]
                    if not lu_solve(J, H, dz):
                        break
                    for c in range(N):
                        Zp[c] += dz[c]
                    if not _all_finite(Zp):
                        break
                    if _inf_norm(dz) <= corrector_tol * (1.0 + _inf_norm(Zp)):
                        converged = True
                        break

            if converged:
                Z[:] = Zp
                t = t1
                accepted += 1
                streak += 1
                if streak >= 5:
                    h = min(2.0 * h, max_step)
                    streak = 0
            else:
                h = 0.5 * h
                streak = 0
                if h < min_step:
                    code = STEP_UNDERFLOW
                    break

        out[p] = Z
        if code == OK:
            for _ in range(polish_iters):
                eval_homotopy(Z, 0.0, gamma, coef, var, exp, L, Lconst, patch,
                              H, J, Ht, fv, fj, gv, gj)
                for i in range(M):
                    H[i] = -H[i]
                if not lu_solve(J, H, dz):
                    break
                Zn = Z + dz
                if not _all_finite(Zn):
                    break
                Z = Zn
                if _inf_norm(dz) <= 1e-15 * (1.0 + _inf_norm(Z)):
                    break
            if not _all_finite(out[p]):
                code = NOT_FINITE
        polished[p] = Z
        status[p] = code
        steps[p] = accepted
        tries[p] = attempts
        t_end[p] = t
    return out, polished, status, steps, tries, t_end
