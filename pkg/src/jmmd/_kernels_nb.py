"""numba implementations of the hot kernels.

Loop-oriented twins of ``_kernels_np``; see ``_kernels`` for the ABI.
"""

import math

import numpy as np
from numba import njit

from ._kernels import (
    FAM_BINOMIAL,
    FAM_GAMMA,
    FAM_NORMAL,
    FAM_POISSON,
    LINK_IDENTITY,
    LINK_LOG,
    LINK_LOGIT,
    PIVOT_RTOL,
    STATUS_MAXITER,
    STATUS_OK,
    STATUS_SINGULAR,
)

# Floors keeping working weights/responses finite near the mean-domain edge.
_TINY = 1e-120
_MAX_EXP = 700.0


@njit(cache=True)
def _chol_factor(A):
    """Cholesky factor with a relative pivot test.

    Returns ``(L, ok)``; ``ok`` is False when a pivot falls below
    ``PIVOT_RTOL`` times the largest diagonal of ``A``.
    """
    p = A.shape[0]
    L = np.zeros((p, p))
    max_diag = 0.0
    for j in range(p):
        if A[j, j] > max_diag:
            max_diag = A[j, j]
    thresh = PIVOT_RTOL * max_diag
    for j in range(p):
        s = A[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if s <= thresh or not math.isfinite(s):
            return L, False
        L[j, j] = math.sqrt(s)
        for i in range(j + 1, p):
            t = A[i, j]
            for k in range(j):
                t -= L[i, k] * L[j, k]
            L[i, j] = t / L[j, j]
    return L, True


@njit(cache=True)
def _chol_solve(L, b):
    p = L.shape[0]
    x = np.empty(p)
    for i in range(p):
        s = b[i]
        for k in range(i):
            s -= L[i, k] * x[k]
        x[i] = s / L[i, i]
    for i in range(p - 1, -1, -1):
        s = x[i]
        for k in range(i + 1, p):
            s -= L[k, i] * x[k]
        x[i] = s / L[i, i]
    return x


@njit(cache=True)
def _inverse_link(eta, fam, link, m):
    if link == LINK_IDENTITY:
        return eta
    if link == LINK_LOG:
        if eta > _MAX_EXP:
            return math.exp(_MAX_EXP)
        return math.exp(eta)
    # logit with binomial index m
    if eta >= 0.0:
        return m / (1.0 + math.exp(-eta))
    e = math.exp(eta)
    return m * e / (1.0 + e)


@njit(cache=True)
def _mu_eta(mu, fam, link, m):
    """Derivative of the inverse link, d(mu)/d(eta)."""
    if link == LINK_IDENTITY:
        return 1.0
    if link == LINK_LOG:
        return mu
    return mu * (1.0 - mu / m)


@njit(cache=True)
def _variance(mu, fam, m):
    if fam == FAM_NORMAL:
        return 1.0
    if fam == FAM_POISSON:
        return mu
    if fam == FAM_BINOMIAL:
        return mu * (1.0 - mu / m)
    return mu * mu


@njit(cache=True)
def _dev_comp(y, mu, fam, m):
    # components are mathematically >= 0; the max guards float cancellation
    if fam == FAM_NORMAL:
        r = y - mu
        return r * r
    if fam == FAM_POISSON:
        if y > 0.0:
            return max(2.0 * (y * math.log(y / mu) - (y - mu)), 0.0)
        return 2.0 * mu
    if fam == FAM_BINOMIAL:
        d = 0.0
        if y > 0.0:
            d += y * math.log(y / mu)
        if y < m:
            d += (m - y) * math.log((m - y) / (m - mu))
        return max(2.0 * d, 0.0)
    return max(2.0 * (-math.log(y / mu) + (y - mu) / mu), 0.0)


@njit(cache=True)
def deviance_vec(y, mu, fam, m):
    n = y.shape[0]
    d = np.empty(n)
    for i in range(n):
        d[i] = _dev_comp(y[i], mu[i], fam, m)
    return d


@njit(cache=True)
def _init_mu(y, fam, link, m):
    n = y.shape[0]
    mu = np.empty(n)
    for i in range(n):
        v = y[i]
        if fam == FAM_POISSON:
            v = max(v, 0.1)
        elif fam == FAM_BINOMIAL:
            v = min(max(v, 0.5), m - 0.5)
        elif fam == FAM_GAMMA:
            v = max(v, 1e-8)
        elif link == LINK_LOG:
            v = max(v, 0.1)
        mu[i] = v
    return mu


@njit(cache=True)
def _link_eval(mu, fam, link, m):
    n = mu.shape[0]
    eta = np.empty(n)
    for i in range(n):
        if link == LINK_IDENTITY:
            eta[i] = mu[i]
        elif link == LINK_LOG:
            eta[i] = math.log(mu[i])
        else:
            eta[i] = math.log(mu[i] / (m - mu[i]))
    return eta


@njit(cache=True)
def hat_diag(X, work_w):
    """Diagonal of W^1/2 X (X'WX)^-1 X' W^1/2."""
    n, p = X.shape
    A = np.zeros((p, p))
    for i in range(n):
        w = work_w[i]
        for j in range(p):
            wx = w * X[i, j]
            for k in range(j + 1):
                A[j, k] += wx * X[i, k]
    for j in range(p):
        for k in range(j):
            A[k, j] = A[j, k]
    L, ok = _chol_factor(A)
    h = np.zeros(n)
    if not ok:
        return h, False
    v = np.empty(p)
    for i in range(n):
        for j in range(p):
            s = X[i, j]
            for k in range(j):
                s -= L[j, k] * v[k]
            v[j] = s / L[j, j]
        acc = 0.0
        for j in range(p):
            acc += v[j] * v[j]
        h[i] = work_w[i] * acc
    return h, True


@njit(cache=True)
def irls(X, y, prior_w, fam, link, m, tol, max_iter):
    """Iteratively reweighted least squares for one quasi-GLM.

    Convergence is declared when the relative change in the prior-weighted
    total deviance drops below ``tol``.  Steps that would increase that
    deviance are halved toward the previous coefficients, which keeps the
    deviance non-increasing after the first iteration.
    """
    n, p = X.shape
    mu = _init_mu(y, fam, link, m)
    eta = _link_eval(mu, fam, link, m)
    beta = np.zeros(p)
    work_w = np.empty(n)
    z = np.empty(n)
    dev_old = np.inf
    status = STATUS_MAXITER
    n_iter = 0

    for it in range(1, max_iter + 1):
        n_iter = it
        for i in range(n):
            dmu = _mu_eta(mu[i], fam, link, m)
            if dmu < _TINY:
                dmu = _TINY
            var = _variance(mu[i], fam, m)
            if var < _TINY:
                var = _TINY
            work_w[i] = prior_w[i] * dmu * dmu / var
            z[i] = eta[i] + (y[i] - mu[i]) / dmu

        A = np.zeros((p, p))
        b = np.zeros(p)
        for i in range(n):
            w = work_w[i]
            wz = w * z[i]
            for j in range(p):
                xij = X[i, j]
                b[j] += wz * xij
                wx = w * xij
                for k in range(j + 1):
                    A[j, k] += wx * X[i, k]
        for j in range(p):
            for k in range(j):
                A[k, j] = A[j, k]

        L, ok = _chol_factor(A)
        if not ok:
            status = STATUS_SINGULAR
            break
        beta_new = _chol_solve(L, b)

        # Step halving keeps the weighted deviance monotone.
        step = 1.0
        dev_new = np.inf
        eta_t = np.empty(n)
        mu_t = np.empty(n)
        for _ in range(31):
            dev_t = 0.0
            for i in range(n):
                e = 0.0
                for j in range(p):
                    e += X[i, j] * (beta[j] + step * (beta_new[j] - beta[j]))
                eta_t[i] = e
                mu_t[i] = _inverse_link(e, fam, link, m)
                dev_t += prior_w[i] * _dev_comp(y[i], mu_t[i], fam, m)
            if math.isfinite(dev_t) and (dev_t <= dev_old * (1.0 + 1e-12) + 1e-12):
                dev_new = dev_t
                break
            step *= 0.5
        else:
            dev_new = dev_t

        for j in range(p):
            beta[j] = beta[j] + step * (beta_new[j] - beta[j])
        for i in range(n):
            eta[i] = eta_t[i]
            mu[i] = mu_t[i]

        if math.isfinite(dev_old):
            # guarded denominator keeps the threshold reachable when the
            # deviance sits at float noise around zero
            if abs(dev_old - dev_new) < tol * (abs(dev_new) + 0.1):
                status = STATUS_OK
                dev_old = dev_new
                break
        dev_old = dev_new

    # Working weights and deviance components at the final state.
    for i in range(n):
        dmu = _mu_eta(mu[i], fam, link, m)
        if dmu < _TINY:
            dmu = _TINY
        var = _variance(mu[i], fam, m)
        if var < _TINY:
            var = _TINY
        work_w[i] = prior_w[i] * dmu * dmu / var
    dev = deviance_vec(y, mu, fam, m)
    return beta, eta, mu, work_w, dev, n_iter, status
