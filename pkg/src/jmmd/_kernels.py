"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The numba path is the default.  Set ``JMMD_NO_NUMBA=1`` in the environment
(or run without numba installed) to select the vectorised numpy twin.  Both
implementations share the integer codes and return conventions defined here;
``benchmarks/bench_kernels.py`` times them against each other and the test
suite asserts they agree.

Kernel ABI
----------
``irls(X, y, prior_w, fam, link, m, tol, max_iter)``
    -> ``(beta, eta, mu, work_w, dev_components, n_iter, status)``
``hat_diag(X, work_w)``
    -> ``(h, ok)``
``deviance_vec(y, mu, fam, m)``
    -> per-observation unweighted deviance components

``status`` is one of the ``STATUS_*`` codes below.  All array arguments are
contiguous float64; family/link are the ``FAM_*`` / ``LINK_*`` codes.
"""

import os

# Family and link codes shared by both kernel implementations.  The impl
# modules import these from here, so they must be defined before the
# implementation import at the bottom of this module.
FAM_NORMAL = 0
FAM_POISSON = 1
FAM_BINOMIAL = 2
FAM_GAMMA = 3

LINK_IDENTITY = 0
LINK_LOG = 1
LINK_LOGIT = 2

STATUS_OK = 0
STATUS_SINGULAR = 1
STATUS_MAXITER = 2

# Relative pivot threshold for rank detection, applied against the largest
# diagonal entry of the weighted cross-product matrix.
PIVOT_RTOL = 1e-10


def _numba_requested() -> bool:
    flag = os.environ.get("JMMD_NO_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes", "on")


JIT_ENABLED = False
if _numba_requested():
    try:
        import numba  # noqa: F401

        JIT_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        JIT_ENABLED = False

if JIT_ENABLED:
    from ._kernels_nb import deviance_vec, hat_diag, irls
else:
    from ._kernels_np import deviance_vec, hat_diag, irls

__all__ = [
    "FAM_NORMAL",
    "FAM_POISSON",
    "FAM_BINOMIAL",
    "FAM_GAMMA",
    "LINK_IDENTITY",
    "LINK_LOG",
    "LINK_LOGIT",
    "STATUS_OK",
    "STATUS_SINGULAR",
    "STATUS_MAXITER",
    "PIVOT_RTOL",
    "JIT_ENABLED",
    "irls",
    "hat_diag",
    "deviance_vec",
]
