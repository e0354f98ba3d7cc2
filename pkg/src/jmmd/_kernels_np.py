"""Vectorised numpy implementations of the hot kernels.

Fallback twins of ``_kernels_nb``; see ``_kernels`` for the ABI.
"""

import numpy as np

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

_TINY = 1e-120
_MAX_EXP = 700.0


def _chol_factor(A):
    thresh = PIVOT_RTOL * np.max(np.diag(A), initial=0.0)
    if not np.all(np.isfinite(A)):
        return None, False
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return None, False
    if np.any(np.diag(L) ** 2 <= thresh):
        return None, False
    return L, True


def _inverse_link(eta, fam, link, m):
    if link == LINK_IDENTITY:
        return eta.copy()
    if link == LINK_LOG:
        return np.exp(np.minimum(eta, _MAX_EXP))
    out = np.empty_like(eta)
    pos = eta >= 0.0
    out[pos] = m / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = m * e / (1.0 + e)
    return out


def _mu_eta(mu, fam, link, m):
    if link == LINK_IDENTITY:
        return np.ones_like(mu)
    if link == LINK_LOG:
        return mu.copy()
    return mu * (1.0 - mu / m)


def _variance(mu, fam, m):
    if fam == FAM_NORMAL:
        return np.ones_like(mu)
    if fam == FAM_POISSON:
        return mu.copy()
    if fam == FAM_BINOMIAL:
        return mu * (1.0 - mu / m)
    return mu * mu


def deviance_vec(y, mu, fam, m):
    # components are mathematically >= 0; the clip guards float cancellation
    if fam == FAM_NORMAL:
        return (y - mu) ** 2
    if fam == FAM_POISSON:
        term = np.zeros_like(y)
        pos = y > 0.0
        term[pos] = y[pos] * np.log(y[pos] / mu[pos])
        return np.maximum(2.0 * (term - (y - mu)), 0.0)
    if fam == FAM_BINOMIAL:
        d = np.zeros_like(y)
        pos = y > 0.0
        d[pos] += y[pos] * np.log(y[pos] / mu[pos])
        below = y < m
        d[below] += (m - y[below]) * np.log((m - y[below]) / (m - mu[below]))
        return np.maximum(2.0 * d, 0.0)
    return np.maximum(2.0 * (-np.log(y / mu) + (y - mu) / mu), 0.0)


def _init_mu(y, fam, link, m):
    if fam == FAM_POISSON:
        return np.maximum(y, 0.1)
    if fam == FAM_BINOMIAL:
        return np.clip(y, 0.5, m - 0.5)
    if fam == FAM_GAMMA:
        return np.maximum(y, 1e-8)
    if link == LINK_LOG:
        return np.maximum(y, 0.1)
    return y.astype(np.float64, copy=True)


def _link_eval(mu, fam, link, m):
    if link == LINK_IDENTITY:
        return mu.copy()
    if link == LINK_LOG:
        return np.log(mu)
    return np.log(mu / (m - mu))


def hat_diag(X, work_w):
    A = (X * work_w[:, None]).T @ X
    L, ok = _chol_factor(A)
    if not ok:
        return np.zeros(X.shape[0]), False
    A_inv = np.linalg.inv(A)
    h = work_w * np.einsum("ij,jk,ik->i", X, A_inv, X)
    return h, True


def irls(X, y, prior_w, fam, link, m, tol, max_iter):
    n, p = X.shape
    mu = _init_mu(y, fam, link, m)
    eta = _link_eval(mu, fam, link, m)
    beta = np.zeros(p)
    work_w = np.empty(n)
    dev_old = np.inf
    status = STATUS_MAXITER
    n_iter = 0

    for it in range(1, max_iter + 1):
        n_iter = it
        dmu = np.maximum(_mu_eta(mu, fam, link, m), _TINY)
        var = np.maximum(_variance(mu, fam, m), _TINY)
        work_w = prior_w * dmu * dmu / var
        z = eta + (y - mu) / dmu

        Xw = X * work_w[:, None]
        A = Xw.T @ X
        b = Xw.T @ z
        L, ok = _chol_factor(A)
        if not ok:
            status = STATUS_SINGULAR
            break
        beta_new = np.linalg.solve(A, b)

        step = 1.0
        dev_new = np.inf
        for _ in range(31):
            beta_t = beta + step * (beta_new - beta)
            eta_t = X @ beta_t
            mu_t = _inverse_link(eta_t, fam, link, m)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                dev_t = float(np.sum(prior_w * deviance_vec(y, mu_t, fam, m)))
            if np.isfinite(dev_t) and dev_t <= dev_old * (1.0 + 1e-12) + 1e-12:
                dev_new = dev_t
                break
            step *= 0.5
        else:
            dev_new = dev_t

        beta = beta + step * (beta_new - beta)
        eta = eta_t
        mu = mu_t

        if np.isfinite(dev_old) and abs(dev_old - dev_new) < tol * (abs(dev_new) + 0.1):
            status = STATUS_OK
            dev_old = dev_new
            break
        dev_old = dev_new

    dmu = np.maximum(_mu_eta(mu, fam, link, m), _TINY)
    var = np.maximum(_variance(mu, fam, m), _TINY)
    work_w = prior_w * dmu * dmu / var
    dev = deviance_vec(y, mu, fam, m)
    return beta, eta, mu, work_w, dev, n_iter, status
