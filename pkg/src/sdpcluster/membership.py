"""Partitions, assignment matrices and cluster membership matrices.

A partition of n points into K clusters is stored as 1-based integer
labels.  Its membership matrix Z has Z_ij = 1/|G_k| when i and j share
cluster k and 0 otherwise; Z is symmetric, doubly stochastic, positive
semidefinite and has trace K.  Fractional matrices with the same
constraint set appear as solver iterates and are measured against the
exact constraints by :func:`feasibility_residuals`.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix, check_square


@dataclass(frozen=True)
class Partition:
    """Hard clustering of n points into K non-empty clusters.

    labels are 1-based cluster ids; every id in 1..K must occur.
    """

    labels: np.ndarray
    K: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-d sequence")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if labels.size < self.K:
            raise ValueError(f"need at least K={self.K} points, got {labels.size}")
        present = np.unique(labels)
        if present.min() < 1 or present.max() > self.K or present.size != self.K:
            raise ValueError(
                f"labels must cover every cluster id in 1..{self.K}, found {present}"
            )

    @property
    def n(self):
        return self.labels.size

    def cluster_sizes(self):
        """Array of |G_k| for k = 1..K."""
        return np.bincount(self.labels, minlength=self.K + 1)[1:]

    def cluster_indices(self):
        """List of index arrays, one per cluster in id order."""
        return [np.flatnonzero(self.labels == k + 1) for k in range(self.K)]


def partition_to_assignment(part):
    """n x K binary matrix with one 1 per row marking the point's cluster."""
    H = np.zeros((part.n, part.K))
    H[np.arange(part.n), part.labels - 1] = 1.0
    return H


def partition_to_membership(part):
    """Block matrix with 1/|G_k| on each within-cluster block, 0 elsewhere."""
    sizes = part.cluster_sizes()
    Z = np.zeros((part.n, part.n))
    for k, idx in enumerate(part.cluster_indices()):
        Z[np.ix_(idx, idx)] = 1.0 / sizes[k]
    return Z


def canonical_labels(part):
    """Relabel clusters by first occurrence; the canonical form of a partition."""
    mapping = {}
    out = np.empty(part.n, dtype=np.int64)
    for i, lab in enumerate(part.labels):
        if lab not in mapping:
            mapping[lab] = len(mapping) + 1
        out[i] = mapping[lab]
    return out


def recovery_equal(a, b):
    """True iff the two partitions agree up to a relabeling of clusters."""
    if a.n != b.n or a.K != b.K:
        raise ValueError("partitions must have matching n and K")
    return bool(np.array_equal(canonical_labels(a), canonical_labels(b)))


@dataclass(frozen=True)
class FeasibilityResiduals:
    """Distance of a candidate matrix from each membership constraint."""

    sym: float
    psd_min_eig: float
    trace_err: float
    rowsum_max_err: float
    min_entry: float

    def max_violation(self):
        return max(
            self.sym,
            max(-self.psd_min_eig, 0.0),
            self.trace_err,
            self.rowsum_max_err,
            max(-self.min_entry, 0.0),
        )


def feasibility_residuals(Z, K):
    """Measure how far Z sits from the feasible set of trace-K memberships.

    Returns the max asymmetry, the smallest eigenvalue of the symmetrized
    matrix, the trace error vs K, the worst row-sum error vs 1, and the
    minimum entry.
    """
    Z = check_square(Z, "Z")
    sym = float(np.max(np.abs(Z - Z.T)))
    S = 0.5 * (Z + Z.T)
    psd_min_eig = float(np.linalg.eigvalsh(S)[0])
    trace_err = float(abs(np.trace(Z) - K))
    rowsum_max_err = float(np.max(np.abs(Z.sum(axis=1) - 1.0)))
    min_entry = float(Z.min())
    return FeasibilityResiduals(sym, psd_min_eig, trace_err, rowsum_max_err, min_entry)


def kmeans_objective(part, X):
    """Within-cluster affinity sum_k (1/|G_k|) sum_{i,j in G_k} <X_i, X_j>.

    X holds one observation per column.  Evaluated directly from cluster
    sums, not via the membership matrix.
    """
    X = as_matrix(X, "X")
    if X.shape[1] != part.n:
        raise ValueError(
            f"X has {X.shape[1]} columns but partition covers {part.n} points"
        )
    total = 0.0
    for idx in part.cluster_indices():
        s = X[:, idx].sum(axis=1)
        total += float(s @ s) / idx.size
    return total


def save_partition(path, part):
    """One 1-based integer label per line."""
    with open(path, "w", newline="\n") as fh:
        for lab in part.labels:
            fh.write(f"{int(lab)}\n")


def load_partition(path, K=None):
    """Read a label file written by :func:`save_partition`.

    K defaults to the largest label present.
    """
    with open(path) as fh:
        labels = [int(line) for line in fh if line.strip()]
    labels = np.asarray(labels, dtype=np.int64)
    if K is None:
        K = int(labels.max())
    return Partition(labels=labels, K=K)


def save_membership(path, Z):
    """n lines of n whitespace-separated floats, 17 significant digits."""
    Z = check_square(Z, "Z")
    with open(path, "w", newline="\n") as fh:
        for row in Z:
            fh.write(" ".join(format(v, ".17g") for v in row))
            fh.write("\n")


def load_membership(path):
    Z = np.loadtxt(path, ndmin=2)
    return check_square(Z, "membership matrix")
