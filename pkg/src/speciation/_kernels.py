"""Residual, Jacobian and damped-Newton kernels.

Every kernel is written once in numba-compatible numpy.  When numba is
importable and ``SPECIATION_DISABLE_NUMBA`` is unset (or ``0``) the
kernels are compiled with ``numba.njit``; otherwise the same functions run
as plain numpy.  ``USE_NUMBA`` reports which path is active.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and os.environ.get(
    "SPECIATION_DISABLE_NUMBA", "0"
).lower() in ("", "0", "false", "no")

U_CLIP = 690.0

CONVERGED = 0
MAX_ITER = 1
LINE_SEARCH_FAILED = 2
SINGULAR = 3


def _speed_up(func):
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


# -- generic system in u = ln(xi) --------------------------------------------


@_speed_up
def residuals(u, nu, lnK, lam, totals, z, charged):
    """Equilibrium rows, scaled moiety rows and the scaled charge row."""
    r = nu.shape[0]
    m = lam.shape[0]
    n = u.shape[0]
    xi = np.exp(np.minimum(np.maximum(u, -U_CLIP), U_CLIP))
    F = np.empty(n)
    F[:r] = nu @ u - lnK
    F[r:r + m] = (lam @ xi) / totals - 1.0
    if charged:
        q = np.dot(z, xi)
        s = np.dot(np.abs(z), xi)
        F[n - 1] = q / s
    return F


@_speed_up
def jacobian(u, nu, lnK, lam, totals, z, charged):
    r = nu.shape[0]
    m = lam.shape[0]
    n = u.shape[0]
    xi = np.exp(np.minimum(np.maximum(u, -U_CLIP), U_CLIP))
    J = np.zeros((n, n))
    J[:r, :] = nu
    for j in range(m):
        J[r + j, :] = lam[j] * xi / totals[j]
    if charged:
        az = np.abs(z)
        q = np.dot(z, xi)
        s = np.dot(az, xi)
        J[n - 1, :] = z * xi / s - q * az * xi / (s * s)
    return J


@_speed_up
def log_residuals(u, nu, lnK, lam, totals, z, charged):
    """Same roots as :func:`residuals`, with budget and charge rows in log form.

    ``ln(lam . xi / a)`` and ``ln(positive charge / negative charge)`` do
    not saturate far from the solution, which keeps Newton steps sane.
    """
    r = nu.shape[0]
    m = lam.shape[0]
    n = u.shape[0]
    xi = np.exp(np.minimum(np.maximum(u, -U_CLIP), U_CLIP))
    F = np.empty(n)
    F[:r] = nu @ u - lnK
    F[r:r + m] = np.log((lam @ xi) / totals)
    if charged:
        pos = np.dot(np.maximum(z, 0.0), xi)
        neg = np.dot(np.maximum(-z, 0.0), xi)
        F[n - 1] = np.log(pos) - np.log(neg)
    return F


@_speed_up
def log_jacobian(u, nu, lam, z, charged):
    r = nu.shape[0]
    m = lam.shape[0]
    n = u.shape[0]
    xi = np.exp(np.minimum(np.maximum(u, -U_CLIP), U_CLIP))
    J = np.zeros((n, n))
    J[:r, :] = nu
    for j in range(m):
        w = lam[j] * xi
        J[r + j, :] = w / np.sum(w)
    if charged:
        zp = np.maximum(z, 0.0) * xi
        zn = np.maximum(-z, 0.0) * xi
        J[n - 1, :] = zp / np.sum(zp) - zn / np.sum(zn)
    return J


@_speed_up
def newton(u0, nu, lnK, lam, totals, z, charged, tol, max_iter, max_halvings):
    """Damped Newton on the log-form rows.

    Convergence is judged on the scaled residuals of :func:`residuals`.
    Returns ``(u, iterations, max|F|, status)``.
    """
    u = u0.copy()
    G = log_residuals(u, nu, lnK, lam, totals, z, charged)
    gnorm = np.sqrt(np.dot(G, G))
    fmax = np.max(np.abs(residuals(u, nu, lnK, lam, totals, z, charged)))
    for it in range(max_iter):
        if fmax < tol:
            return u, it, fmax, CONVERGED
        J = log_jacobian(u, nu, lam, z, charged)
        step = np.linalg.solve(J, -G)
        if not np.all(np.isfinite(step)):
            return u, it, fmax, SINGULAR
        t = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            trial = u + t * step
            Gt = log_residuals(trial, nu, lnK, lam, totals, z, charged)
            tnorm = np.sqrt(np.dot(Gt, Gt))
            if np.isfinite(tnorm) and tnorm < gnorm:
                u = trial
                G = Gt
                gnorm = tnorm
                accepted = True
                break
            t *= 0.5
        fmax = np.max(np.abs(residuals(u, nu, lnK, lam, totals, z, charged)))
        if not accepted:
            status = CONVERGED if fmax < tol else LINE_SEARCH_FAILED
            return u, it + 1, fmax, status
    status = CONVERGED if fmax < tol else MAX_ITER
    return u, max_iter, fmax, status


# -- monomial systems in base-10 log variables ----------------------------------
#
# Each term is 10**(lgc[j] + E[j] @ w).  Budget rows are
# (W[i] @ terms) / scale[i] - 1; the charge row has signed weights and is
# divided by sum(|W[i]| * terms).


@_speed_up
def monomial_residuals(w, lgc, E, W, scale, charge_row):
    terms = 10.0 ** (lgc + E @ w)
    n = W.shape[0]
    F = np.empty(n)
    for i in range(n):
        if i == charge_row:
            F[i] = np.dot(W[i], terms) / np.dot(np.abs(W[i]), terms)
        else:
            F[i] = np.dot(W[i], terms) / scale[i] - 1.0
    return F


@_speed_up
def monomial_jacobian(w, lgc, E, W, scale, charge_row):
    ln10 = np.log(10.0)
    terms = 10.0 ** (lgc + E @ w)
    Et = np.ascontiguousarray(E.T)
    n = W.shape[0]
    d = w.shape[0]
    J = np.zeros((n, d))
    for i in range(n):
        if i == charge_row:
            aw = np.abs(W[i])
            q = np.dot(W[i], terms)
            s = np.dot(aw, terms)
            for k in range(d):
                dq = ln10 * np.dot(W[i] * terms, Et[k])
                ds = ln10 * np.dot(aw * terms, Et[k])
                J[i, k] = dq / s - q * ds / (s * s)
        else:
            for k in range(d):
                J[i, k] = ln10 * np.dot(W[i] * terms, Et[k]) / scale[i]
    return J


@_speed_up
def monomial_newton(w0, lgc, E, W, scale, charge_row, tol, max_iter, max_halvings):
    w = w0.copy()
    F = monomial_residuals(w, lgc, E, W, scale, charge_row)
    fnorm = np.sqrt(np.dot(F, F))
    for it in range(max_iter):
        if np.max(np.abs(F)) < tol:
            return w, it, np.max(np.abs(F)), CONVERGED
        J = monomial_jacobian(w, lgc, E, W, scale, charge_row)
        step = np.linalg.solve(J, -F)
        if not np.all(np.isfinite(step)):
            return w, it, np.max(np.abs(F)), SINGULAR
        t = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            trial = w + t * step
            Ft = monomial_residuals(trial, lgc, E, W, scale, charge_row)
            tnorm = np.sqrt(np.dot(Ft, Ft))
            if np.isfinite(tnorm) and tnorm < fnorm:
                w = trial
                F = Ft
                fnorm = tnorm
                accepted = True
                break
            t *= 0.5
        if not accepted:
            return w, it + 1, np.max(np.abs(F)), LINE_SEARCH_FAILED
    status = CONVERGED if np.max(np.abs(F)) < tol else MAX_ITER
    return w, max_iter, np.max(np.abs(F)), status
