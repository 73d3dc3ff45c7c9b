"""Reference clustering algorithms and the two-cluster failure probe.

brute_force_kmeans enumerates every canonical surjective labeling of a
small instance and maximizes the within-cluster affinity objective;
lloyd iterates center recomputation and nearest-center reassignment
with deterministic tie-breaking; spectral_init seeds from the top
singular subspace of the centered data.  The failure probe checks the
single-flip inequality under which the integrated-likelihood labeling
of a symmetric two-component sample cannot equal the truth.
"""

import numpy as np

from ._validation import as_matrix
from .datagen import rng_from_seed
from .membership import Partition, kmeans_objective


def _kmeans_pp_centers(Y, K, rng):
    """Seed K centers from the rows of Y by squared-distance sampling."""
    n = Y.shape[0]
    centers = np.empty((K, Y.shape[1]))
    centers[0] = Y[rng.integers(n)]
    d2 = ((Y - centers[0]) ** 2).sum(axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0:
            centers[k] = Y[rng.integers(n)]
            continue
        centers[k] = Y[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((Y - centers[k]) ** 2).sum(axis=1))
    return centers


def _assign(Y, centers):
    d2 = ((Y[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1), d2


def _lloyd_points(Y, K, labels0, max_iters):
    """Lloyd iterations on row vectors; ties go to the lowest cluster id
    and an emptied cluster steals the point farthest from its center."""
    labels = labels0.copy()
    it = 0
    for it in range(1, max_iters + 1):
        centers = np.empty((K, Y.shape[1]))
        for k in range(K):
            centers[k] = Y[labels == k].mean(axis=0)
        new_labels, d2 = _assign(Y, centers)
        own = d2[np.arange(Y.shape[0]), new_labels].copy()
        for k in range(K):
            if not np.any(new_labels == k):
                far = int(np.argmax(own))
                new_labels[far] = k
                own[far] = -np.inf
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, it


def _kmeans_points(Y, K, restarts, max_iters, rng):
    """Best-of-restarts k-means on row vectors; returns 0-based labels."""
    if K == 1:
        return np.zeros(Y.shape[0], dtype=np.int64)
    best_labels = None
    best_sse = np.inf
    for _ in range(restarts):
        centers = _kmeans_pp_centers(Y, K, rng)
        labels0, _ = _assign(Y, centers)
        for k in range(K):
            if not np.any(labels0 == k):
                labels0[rng.integers(Y.shape[0])] = k
        labels, _ = _lloyd_points(Y, K, labels0, max_iters)
        sse = 0.0
        for k in range(K):
            pts = Y[labels == k]
            sse += float(((pts - pts.mean(axis=0)) ** 2).sum())
        if sse < best_sse:
            best_sse = sse
            best_labels = labels
    return best_labels


def _canonical_labelings(n, K):
    """Yield canonical (first-occurrence ordered) surjective labelings of
    n items into K clusters, in lexicographic order, as 0-based arrays."""
    a = np.zeros(n, dtype=np.int64)

    def rec(i, used):
        if i == n:
            if used == K:
                yield a.copy()
            return
        # cannot reach K labels if too few slots remain
        if used + (n - i) < K:
            return
        for v in range(min(used + 1, K)):
            a[i] = v
            yield from rec(i + 1, max(used, v + 1))

    yield from rec(1, 1)


def brute_force_kmeans(X, K):
    """Exhaustive maximizer of the within-cluster affinity objective.

    Guarded to n <= 12 and K <= 3; ties break to the lexicographically
    smallest canonical labeling.
    """
    X = as_matrix(X, "X")
    n = X.shape[1]
    if n > 12 or K > 3:
        raise ValueError(f"enumeration guard: need n <= 12 and K <= 3, got n={n}, K={K}")
    if K < 1 or K > n:
        raise ValueError("need 1 <= K <= n")
    A = X.T @ X
    best_obj = -np.inf
    best = None
    for labels in _canonical_labelings(n, K):
        obj = 0.0
        for k in range(K):
            idx = np.flatnonzero(labels == k)
            obj += float(A[np.ix_(idx, idx)].sum()) / idx.size
        if obj > best_obj:
            best_obj = obj
            best = labels
    return Partition(labels=best + 1, K=K)


def spectral_init(X, K, seed=0):
    """Cluster the projections onto the top-K left singular subspace of
    the centered data (k-means++ seeding, 10 restarts)."""
    X = as_matrix(X, "X")
    n = X.shape[1]
    if K > n:
        raise ValueError("need K <= n")
    Xc = X - X.mean(axis=1, keepdims=True)
    U, _, _ = np.linalg.svd(Xc, full_matrices=False)
    r = min(K, U.shape[1])
    Y = (U[:, :r].T @ Xc).T
    rng = rng_from_seed(seed)
    labels = _kmeans_points(Y, K, restarts=10, max_iters=100, rng=rng)
    return Partition(labels=labels + 1, K=K)


def lloyd(X, K, init, max_iters=100, return_iters=False):
    """Lloyd's iteration started from an initial partition.

    Reassignment ties go to the lowest cluster id; when a cluster
    empties, the point farthest from its own center is moved into it.
    Stops when labels are fixed or after max_iters sweeps.
    """
    X = as_matrix(X, "X")
    if init.n != X.shape[1] or init.K != K:
        raise ValueError("init partition does not match (n, K)")
    labels, it = _lloyd_points(X.T, K, init.labels - 1, max_iters)
    part = Partition(labels=labels + 1, K=K)
    return (part, it) if return_iters else part


def mle_k2_failure_witness(X, eta):
    """Smallest 0-based index i with <eta_i X_i, sum_{j != i} eta_j X_j> < 0,
    or None.

    When no index qualifies, no single-flip relabeling can beat the
    given labels under the symmetric two-component integrated
    likelihood.
    """
    X = as_matrix(X, "X")
    eta = np.asarray(eta, dtype=np.float64)
    if eta.shape != (X.shape[1],):
        raise ValueError("eta must have one entry per observation")
    if not np.all(np.abs(eta) == 1.0):
        raise ValueError("eta entries must be +1 or -1")
    s = (X * eta).sum(axis=1)
    inner = eta * (X.T @ s) - (X**2).sum(axis=0)
    hits = np.flatnonzero(inner < 0)
    return int(hits[0]) if hits.size else None


def random_partition(n, K, seed=0):
    """Uniform surjective labeling, mostly for test baselines."""
    rng = rng_from_seed(seed)
    while True:
        labels = rng.integers(1, K + 1, size=n)
        if np.unique(labels).size == K:
            return Partition(labels=labels, K=K)


__all__ = [
    "brute_force_kmeans",
    "spectral_init",
    "lloyd",
    "mle_k2_failure_witness",
    "random_partition",
    "kmeans_objective",
]
