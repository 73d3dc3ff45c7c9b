"""Dual certificates proving a partition is the unique relaxation optimum.

For a candidate partition with membership matrix Z*, the certificate is
a triple (lambda, alpha, B).  alpha is chosen blockwise so that the
slack matrix W = lambda I + (1 a^T + a 1^T)/2 - A - B annihilates every
cluster indicator; B is assembled from blockwise rank-one factors whose
row sums are fixed by the same identities, with zero diagonal blocks.
Verification then checks five numeric conditions: B nonnegative off the
diagonal blocks, W positive semidefinite on the complement of the
indicator span, the two complementary-slackness traces, and strict
positivity of the cross-cluster blocks (uniqueness).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import DegenerateBlockError, as_matrix, check_square, check_vector
from .baselines import lloyd, spectral_init
from .membership import partition_to_membership
from .solver import build_affinity


def construct_lambda(sigma2, p, m, Delta2, beta):
    """Penalty level p*sigma2 + (beta/4)*m*Delta2 used by the certificate."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    if sigma2 < 0 or Delta2 < 0 or m <= 0 or p < 1:
        raise ValueError("need sigma2 >= 0, Delta2 >= 0, m > 0, p >= 1")
    return p * sigma2 + 0.25 * beta * m * Delta2


def construct_alpha(A, part, lam):
    """Blockwise multiplier making the slack matrix kill each cluster
    indicator on its own block:

        alpha_{G_k} = (2/n_k) A_kk 1 - (lam/n_k) 1 - (1^T A_kk 1 / n_k^2) 1
    """
    A = check_square(A, "A")
    if A.shape[0] != part.n:
        raise ValueError("A and partition disagree on n")
    alpha = np.empty(part.n)
    for idx in part.cluster_indices():
        nk = idx.size
        block = A[np.ix_(idx, idx)]
        rowsums = block.sum(axis=1)
        alpha[idx] = 2.0 / nk * rowsums - lam / nk - rowsums.sum() / nk**2
    return alpha


def _block_sums(X, part, lam):
    """Row/column sum vectors and totals of every cross-cluster block.

    For the (k, l) pair, entry j in G_l carries
        -((n_l + n_k) / (2 n_l)) lam
        + (n_k / 2) (|Xbar_k - X_j|^2 - |Xbar_l - X_j|^2).
    Returns sums[(k, l)] = vector over G_l and totals[(k, l)].
    """
    idx = part.cluster_indices()
    sizes = part.cluster_sizes()
    means = [X[:, ix].mean(axis=1) for ix in idx]
    sums = {}
    totals = {}
    for k in range(part.K):
        for l in range(part.K):
            if k == l:
                continue
            nk, nl = sizes[k], sizes[l]
            pts = X[:, idx[l]]
            d_other = ((pts - means[k][:, None]) ** 2).sum(axis=0)
            d_own = ((pts - means[l][:, None]) ** 2).sum(axis=0)
            vec = -(nl + nk) / (2.0 * nl) * lam + 0.5 * nk * (d_other - d_own)
            sums[(k, l)] = vec
            totals[(k, l)] = float(vec.sum())
    return idx, sizes, means, sums, totals


def construct_B(X, part, lam):
    """Blockwise rank-one multiplier with the mandated block row sums.

    Each cross-cluster block is the outer product of its row-sum and
    column-sum vectors divided by the block total; diagonal blocks are
    identically zero and the result is symmetric.  A block total at zero
    makes the construction impossible on this draw and raises
    DegenerateBlockError.
    """
    X = as_matrix(X, "X")
    if X.shape[1] != part.n:
        raise ValueError("X and partition disagree on n")
    idx, sizes, means, sums, totals = _block_sums(X, part, lam)
    B = np.zeros((part.n, part.n))
    for k in range(part.K):
        for l in range(k + 1, part.K):
            # row sums of the (l, k) block live on G_l, of (k, l) on G_k
            c = sums[(k, l)]
            r = sums[(l, k)]
            t = 0.5 * (totals[(k, l)] + totals[(l, k)])
            d = means[k] - means[l]
            scale = 1.0 + abs(lam) * (sizes[k] + sizes[l]) / 2.0
            scale += 0.5 * sizes[k] * sizes[l] * float(d @ d)
            if abs(t) <= 1e-12 * scale:
                raise DegenerateBlockError(
                    f"block total for cluster pair ({k + 1}, {l + 1}) vanishes"
                )
            B[np.ix_(idx[l], idx[k])] = np.outer(c, r) / t
            B[np.ix_(idx[k], idx[l])] = np.outer(r, c) / t
    return B


def build_Wn(A, lam, alpha, B):
    """Slack matrix lam I + (1 a^T + a 1^T)/2 - A - B, symmetrized."""
    A = check_square(A, "A")
    n = A.shape[0]
    alpha = check_vector(alpha, n, "alpha")
    B = check_square(B, "B")
    if B.shape != A.shape:
        raise ValueError("B must match A's shape")
    ones = np.ones(n)
    W = lam * np.eye(n) + 0.5 * (np.outer(ones, alpha) + np.outer(alpha, ones))
    W -= A + B
    return 0.5 * (W + W.T)


@dataclass(frozen=True)
class Certificate:
    lam: float
    alpha: np.ndarray
    B: np.ndarray
    W: np.ndarray


@dataclass(frozen=True)
class CertificateReport:
    c1_minB_offdiag: float
    c2_min_eig_on_gamma: float
    c3_trWZ: float
    c4_trBZ: float
    c5_strict_min: float
    passed: bool
    tol: float
    tol_eig: float
    failure_reason: Optional[str] = None

    def as_dict(self):
        return {
            "c1_minB_offdiag": self.c1_minB_offdiag,
            "c2_min_eig_on_gamma": self.c2_min_eig_on_gamma,
            "c3_trWZ": self.c3_trWZ,
            "c4_trBZ": self.c4_trBZ,
            "c5_strict_min": self.c5_strict_min,
            "passed": self.passed,
            "tol": self.tol,
            "tol_eig": self.tol_eig,
            "failure_reason": self.failure_reason or "",
        }


def construct_certificate(X, part, lam):
    """Assemble (lam, alpha, B, W) for the candidate partition."""
    X = as_matrix(X, "X")
    A = build_affinity(X)
    B = construct_B(X, part, lam)
    alpha = construct_alpha(A, part, lam)
    W = build_Wn(A, lam, alpha, B)
    return Certificate(lam=float(lam), alpha=alpha, B=B, W=W)


def verify_certificate(X, part, lam, tol=None, tol_eig=None):
    """Construct the certificate and evaluate all five conditions.

    The restricted eigenvalue check projects W onto the orthogonal
    complement of the cluster indicators (projector P = I - Z*) and
    takes the smallest eigenvalue among eigenvectors with |P v| >= 0.5,
    which excludes the K structural kernel directions of P.  When the
    report passes, the candidate membership matrix is the unique
    optimum of the relaxation.
    """
    X = as_matrix(X, "X")
    A = build_affinity(X)
    Zstar = partition_to_membership(part)
    if tol is None:
        tol = 1e-8 * (1.0 + float(np.linalg.norm(A)))
    try:
        B = construct_B(X, part, lam)
    except DegenerateBlockError as exc:
        return CertificateReport(
            c1_minB_offdiag=math.nan,
            c2_min_eig_on_gamma=math.nan,
            c3_trWZ=math.nan,
            c4_trBZ=math.nan,
            c5_strict_min=math.nan,
            passed=False,
            tol=float(tol),
            tol_eig=math.nan if tol_eig is None else float(tol_eig),
            failure_reason=str(exc),
        )
    alpha = construct_alpha(A, part, lam)
    W = build_Wn(A, lam, alpha, B)
    if tol_eig is None:
        tol_eig = 1e-8 * (1.0 + float(np.linalg.norm(W)))

    off_mask = ~(Zstar > 0)
    c1 = float(B[off_mask].min())

    P = np.eye(part.n) - Zstar
    M = P @ W @ P
    M = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(M)
    pnorm = np.linalg.norm(P @ V, axis=0)
    keep = pnorm >= 0.5
    # all-singleton partitions leave nothing outside the indicator span;
    # the restricted condition is then vacuous
    c2 = float(w[keep].min()) if keep.any() else math.inf

    c3 = float(np.tensordot(W, Zstar))
    c4 = float(np.tensordot(B, Zstar))
    c5 = c1
    passed = (
        c1 >= -tol
        and c2 >= -tol_eig
        and abs(c3) <= tol
        and abs(c4) <= tol
        and c5 > 0.0
    )
    return CertificateReport(
        c1_minB_offdiag=c1,
        c2_min_eig_on_gamma=c2,
        c3_trWZ=c3,
        c4_trBZ=c4,
        c5_strict_min=c5,
        passed=bool(passed),
        tol=float(tol),
        tol_eig=float(tol_eig),
    )


def estimate_noise_variance(X, K, seed=0):
    """Plug-in noise variance: median of per-coordinate residual
    variances after a spectral-init Lloyd run.  Diagnostic only; the
    verification path takes the variance as known."""
    X = as_matrix(X, "X")
    part = lloyd(X, K, spectral_init(X, K, seed=seed))
    resid = X.copy()
    for idx in part.cluster_indices():
        resid[:, idx] -= X[:, idx].mean(axis=1, keepdims=True)
    n = X.shape[1]
    dof = max(n - K, 1)
    per_coord = (resid**2).sum(axis=1) / dof
    return float(np.median(per_coord))
