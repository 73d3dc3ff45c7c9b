"""Closed-form Euclidean projections used by the splitting solver."""

import numpy as np

from ._validation import check_square, check_symmetric


def simplex_project(v, total=1.0):
    """Project a vector onto {x >= 0, sum x = total} by sort-and-threshold."""
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    ks = np.arange(1, v.size + 1)
    taus = css / ks
    k_star = np.nonzero(u > taus)[0][-1]
    return np.maximum(v - taus[k_star], 0.0)


def project_rowsum_nonneg(M):
    """Row-wise projection of a square matrix onto the probability simplex.

    Every output row is nonnegative and sums to 1 up to roundoff.  The
    sort is on plain float values, so the result is deterministic; ties
    produce identical thresholds either way.
    """
    M = check_square(M, "M")
    n = M.shape[1]
    u = np.sort(M, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    taus = css / np.arange(1, n + 1)
    k_star = np.sum(u > taus, axis=1) - 1
    tau = taus[np.arange(n), k_star]
    return np.maximum(M - tau[:, None], 0.0)


def project_psd(M):
    """Projection onto the positive semidefinite cone (negative eigenvalues
    clipped).  M must be symmetric."""
    M = check_symmetric(M, name="M")
    w, V = np.linalg.eigh(M)
    w = np.maximum(w, 0.0)
    P = (V * w) @ V.T
    return 0.5 * (P + P.T)


def project_psd_trace(M, K):
    """Projection onto {Z = Z^T, Z >= 0 (psd), tr Z = K}.

    Eigendecomposes M and projects the spectrum onto the scaled simplex
    {w >= 0, sum w = K}; the output satisfies both constraints to
    roundoff.
    """
    if K <= 0:
        raise ValueError("K must be > 0")
    M = check_symmetric(M, name="M")
    w, V = np.linalg.eigh(M)
    w = simplex_project(w, total=float(K))
    P = (V * w) @ V.T
    return 0.5 * (P + P.T)
