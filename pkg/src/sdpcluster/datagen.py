"""Synthetic spherical Gaussian mixture benchmarks.

Centers are placed with a prescribed minimum pairwise separation, points
are sampled around them with isotropic noise, and the module evaluates
the closed-form separation level at which exact label recovery becomes
possible, together with two earlier sufficient bounds kept as
shape-only reference curves.

All randomness flows through numpy's Philox counter-based generator so
that streams are reproducible across platforms; derived seeds come from
``numpy.random.SeedSequence`` over integer tuples.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import DegenerateDrawError, as_matrix
from .membership import Partition


def rng_from_seed(*entropy):
    """Philox generator keyed by an integer tuple."""
    ss = np.random.SeedSequence(tuple(int(e) for e in entropy))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(*entropy):
    """64-bit seed hashed from an integer tuple, order-sensitive and
    platform-stable (SeedSequence entropy mixing)."""
    ss = np.random.SeedSequence(tuple(int(e) for e in entropy))
    hi, lo = ss.generate_state(2)
    return (int(hi) << 32) | int(lo)


@dataclass(frozen=True)
class CenterSet:
    """K cluster centers as the columns of a p x K matrix."""

    centers: np.ndarray

    def __post_init__(self):
        centers = as_matrix(self.centers, "centers")
        object.__setattr__(self, "centers", centers)
        p, K = centers.shape
        if K < 2 or p < 1:
            raise ValueError(f"need K >= 2 and p >= 1, got p={p}, K={K}")
        if min_separation(self) <= 0.0:
            raise ValueError("centers must be pairwise distinct")

    @property
    def p(self):
        return self.centers.shape[0]

    @property
    def K(self):
        return self.centers.shape[1]


@dataclass(frozen=True)
class MixtureSpec:
    """Sampling plan: cluster sizes, noise variance and seed."""

    n: int
    sizes: tuple
    sigma2: float
    seed: int

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) < 1 or any(s < 1 for s in sizes):
            raise ValueError("every cluster size must be >= 1")
        if sum(sizes) != self.n:
            raise ValueError(f"sizes sum to {sum(sizes)}, expected n={self.n}")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be > 0")

    @property
    def K(self):
        return len(self.sizes)


@dataclass(frozen=True)
class Dataset:
    """Observations (one per column of X) with their generating truth."""

    X: np.ndarray
    truth: Partition
    spec: MixtureSpec
    centers: CenterSet

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        object.__setattr__(self, "X", X)
        if X.shape[1] != self.spec.n:
            raise ValueError("X column count does not match spec.n")
        if not np.array_equal(self.truth.cluster_sizes(), self.spec.sizes):
            raise ValueError("truth cluster sizes do not match spec.sizes")


def _pairwise_sq_dists(C):
    """Condensed list of squared distances between columns of C."""
    p, K = C.shape
    out = []
    for k in range(K):
        for l in range(k + 1, K):
            d = C[:, k] - C[:, l]
            out.append(float(d @ d))
    return np.asarray(out)


def min_separation(centers):
    """Minimum squared distance over unordered pairs of centers."""
    return float(_pairwise_sq_dists(centers.centers).min())


def place_centers(mode, K, p, delta2, seed=0):
    """Place K centers in R^p with min pairwise squared distance delta2.

    Modes: ``orthogonal`` scales the first K basis vectors (needs p >= K,
    all pairwise distances equal), ``simplex`` builds a regular simplex
    (needs p >= K-1, all pairwise distances equal), ``random_sphere``
    draws directions uniformly on the unit sphere and rescales so the
    minimum pairwise squared distance hits delta2 exactly.
    """
    if delta2 <= 0:
        raise ValueError("delta2 must be > 0")
    if K < 2:
        raise ValueError("K must be >= 2")
    if mode == "orthogonal":
        if p < K:
            raise ValueError(f"orthogonal mode needs p >= K, got p={p}, K={K}")
        C = np.zeros((p, K))
        scale = math.sqrt(delta2 / 2.0)
        for k in range(K):
            C[k, k] = scale
        return CenterSet(C)
    if mode == "simplex":
        if p < K - 1:
            raise ValueError(f"simplex mode needs p >= K-1, got p={p}, K={K}")
        # Scaled basis vectors centered at their mean span a (K-1)-dim
        # regular simplex; Helmert rows give an orthonormal basis of that
        # hyperplane, so distances survive the change of coordinates.
        scale = math.sqrt(delta2 / 2.0)
        V = scale * np.eye(K)
        V -= V.mean(axis=1, keepdims=True)
        H = np.zeros((K - 1, K))
        for i in range(1, K):
            H[i - 1, :i] = 1.0
            H[i - 1, i] = -i
            H[i - 1] /= math.sqrt(i * (i + 1))
        C = np.zeros((p, K))
        C[: K - 1] = H @ V
        return CenterSet(C)
    if mode == "random_sphere":
        rng = rng_from_seed(seed)
        for _ in range(16):
            D = rng.standard_normal((p, K))
            norms = np.linalg.norm(D, axis=0)
            if np.any(norms < 1e-12):
                continue
            D /= norms
            dmin2 = _pairwise_sq_dists(D).min()
            if dmin2 < 1e-16:
                continue
            return CenterSet(D * math.sqrt(delta2 / dmin2))
        raise DegenerateDrawError(
            "random_sphere produced coincident directions in 16 attempts"
        )
    raise ValueError(f"unknown placement mode {mode!r}")


def sample_dataset(centers, spec):
    """Draw X column i = mu_{k(i)} + eps_i with eps_i ~ N(0, sigma2 I).

    The first sizes[0] points belong to cluster 1, the next sizes[1] to
    cluster 2, and so on.  Identical (centers, spec) reproduce X
    bit-for-bit.
    """
    if spec.K != centers.K:
        raise ValueError(f"spec has K={spec.K} but centers have K={centers.K}")
    labels = np.repeat(np.arange(1, spec.K + 1), spec.sizes)
    truth = Partition(labels=labels, K=spec.K)
    rng = rng_from_seed(spec.seed)
    noise = rng.standard_normal((centers.p, spec.n)) * math.sqrt(spec.sigma2)
    X = centers.centers[:, labels - 1] + noise
    return Dataset(X=X, truth=truth, spec=spec, centers=centers)


def pairwise_harmonic_min(sizes):
    """min over cluster pairs of the harmonic-mean size 2 n_k n_l / (n_k + n_l)."""
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2:
        raise ValueError("need at least two clusters")
    if any(s < 1 for s in sizes):
        raise ValueError("every size must be >= 1")
    best = None
    for k in range(len(sizes)):
        for l in range(k + 1, len(sizes)):
            # keep the exact rational value; sizes are ints
            val = 2 * sizes[k] * sizes[l] / (sizes[k] + sizes[l])
            best = val if best is None else min(best, val)
    return best


def cutoff_threshold(n, K, p, sigma2):
    """Separation level (squared) where exact recovery flips from
    impossible to achievable:

        4 sigma2 (1 + sqrt(1 + K p / (n log n))) log n

    with the natural logarithm.  Values of n below 3 sit outside the
    intended regime; n <= 1 is rejected outright.
    """
    if n <= 1:
        raise ValueError("n must be > 1 (log n would vanish)")
    if K < 2 or p < 1 or sigma2 <= 0:
        raise ValueError("need K >= 2, p >= 1, sigma2 > 0")
    logn = math.log(n)
    return 4.0 * sigma2 * (1.0 + math.sqrt(1.0 + K * p / (n * logn))) * logn


def comparison_bounds(n, K, p, sigma2, n_min):
    """Two earlier sufficient separation bounds, unit constants.

    Both have unspecified leading constants in their sources; they are
    evaluated with C = 1 and meant as shape-only reference curves, never
    as pass/fail thresholds.
    """
    if n_min < 1 or n_min > n / K:
        raise ValueError("need 1 <= n_min <= n/K")
    lu_zhou = sigma2 * (K * n / n_min) * max(1.0, K * p / n)
    logn = math.log(n)
    giraud_verzelen = sigma2 * max(1.0, math.sqrt(K * p / (n * logn))) * logn
    return {"lu_zhou": lu_zhou, "giraud_verzelen": giraud_verzelen}


def save_dataset(data_path, labels_path, dataset):
    """Text dump: header "n p K sigma2", then one point per line with p
    floats at 17 significant digits; labels go to a sibling file."""
    from .membership import save_partition

    X, spec = dataset.X, dataset.spec
    with open(data_path, "w", newline="\n") as fh:
        fh.write(f"{spec.n} {X.shape[0]} {spec.K} {format(spec.sigma2, '.17g')}\n")
        for i in range(spec.n):
            fh.write(" ".join(format(v, ".17g") for v in X[:, i]))
            fh.write("\n")
    save_partition(labels_path, dataset.truth)


def load_dataset(data_path):
    """Read a dump written by :func:`save_dataset`.

    Returns (X, n, p, K, sigma2); labels live in their own file.
    """
    with open(data_path) as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError(f"malformed dataset header in {data_path}")
        n, p, K = int(header[0]), int(header[1]), int(header[2])
        sigma2 = float(header[3])
        rows = np.loadtxt(fh, ndmin=2)
    if rows.shape != (n, p):
        raise ValueError(
            f"dataset body has shape {rows.shape}, header says {(n, p)}"
        )
    return rows.T.copy(), n, p, K, sigma2
