"""Monte Carlo phase-diagram harness and margin diagnostics.

Each grid cell samples synthetic mixtures at a separation that is a
fixed multiple of the closed-form recovery threshold, runs the selected
methods, judges strict exact recovery, and attempts the dual
certificate.  Per-trial seeds are derived by hashing (master_seed,
ratio_index, trial_index), so results are independent of execution
order and the CSV is byte-reproducible under any worker count; BLAS
threading is pinned to one thread inside each trial for the same
reason.  Wall-clock timing is off by default because it would break
byte-reproducibility; opt in with record_runtime=True.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from ._validation import as_matrix
from .certificate import construct_certificate, construct_lambda, verify_certificate
from .datagen import (
    MixtureSpec,
    cutoff_threshold,
    derive_seed,
    min_separation,
    pairwise_harmonic_min,
    place_centers,
    sample_dataset,
)
from .baselines import lloyd, spectral_init
from .membership import partition_to_membership, recovery_equal
from .rounding import RoundingConfig, is_exact_recovery
from .solver import (
    SolverConfig,
    build_affinity,
    dual_gap,
    lambda_uniqueness_bound,
    lambda_window,
    solve_regularized,
    solve_sdp,
)

METHODS = ("sdp", "sdp_regularized", "lloyd_spectral")


@dataclass(frozen=True)
class PhaseGrid:
    n: int
    K: int
    p: int
    sigma2: float
    ratios: tuple
    trials: int
    methods: tuple = ("sdp",)
    master_seed: int = 0
    beta: float = 0.5
    delta: float = 1.0
    frob_tol: float = 1e-3
    record_runtime: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.ratios or any(r <= 0 for r in self.ratios):
            raise ValueError("ratios must be positive")
        if any(b >= a for a, b in zip(self.ratios[1:], self.ratios)):
            raise ValueError("ratios must be strictly increasing")
        if self.n % self.K != 0:
            raise ValueError("equal cluster sizes required: K must divide n")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.delta <= 0:
            raise ValueError("delta must be > 0")


@dataclass(frozen=True)
class PhaseRow:
    ratio: float
    method: str
    recovery_rate: float
    certificate_rate: float
    mean_iters: float
    mean_runtime_s: float
    trials: int

    def __post_init__(self):
        for rate in (self.recovery_rate, self.certificate_rate):
            if not 0.0 <= rate <= 1.0:
                raise ValueError("rates must lie in [0, 1]")


def _regularization_level(grid, m, delta2):
    win = lambda_window(
        grid.n, grid.K, grid.p, grid.sigma2, m, delta2, grid.beta, grid.delta
    )
    if win["lo"] <= win["hi"]:
        return 0.5 * (win["lo"] + win["hi"])
    return 0.5 * win["hi"]


def run_trial(grid, ratio_index, trial_index):
    """One seeded trial: sample, run every method, attempt the certificate.

    Returns a plain dict so results can cross process boundaries.
    """
    with threadpool_limits(limits=1):
        return _run_trial_pinned(grid, ratio_index, trial_index)


def _run_trial_pinned(grid, ratio_index, trial_index):
    ratio = grid.ratios[ratio_index]
    dbar2 = cutoff_threshold(grid.n, grid.K, grid.p, grid.sigma2)
    delta2 = ratio * dbar2
    sizes = (grid.n // grid.K,) * grid.K

    centers = place_centers(
        "orthogonal",
        grid.K,
        grid.p,
        delta2,
        seed=derive_seed(grid.master_seed, ratio_index, trial_index, 0),
    )
    spec = MixtureSpec(
        n=grid.n,
        sizes=sizes,
        sigma2=grid.sigma2,
        seed=derive_seed(grid.master_seed, ratio_index, trial_index, 1),
    )
    data = sample_dataset(centers, spec)
    X, truth = data.X, data.truth
    A = build_affinity(X)
    rcfg = RoundingConfig(
        seed=derive_seed(grid.master_seed, ratio_index, trial_index, 2)
    )

    sep2 = min_separation(centers)
    m = pairwise_harmonic_min(sizes)
    lam_sharp = construct_lambda(grid.sigma2, grid.p, m, sep2, grid.beta)
    report = verify_certificate(X, truth, lam_sharp)
    if report.failure_reason is None:
        cert = construct_certificate(X, truth, lam_sharp)
        gap = dual_gap(A, partition_to_membership(truth), lam_sharp, cert.alpha)
    else:
        gap = math.nan

    methods = {}
    for method in grid.methods:
        t0 = time.perf_counter()
        if method == "lloyd_spectral":
            init = spectral_init(X, grid.K, seed=rcfg.seed)
            est, iters = lloyd(X, grid.K, init, return_iters=True)
            runtime = time.perf_counter() - t0
            methods[method] = {
                "recovered": recovery_equal(est, truth),
                "iters": iters,
                "runtime": runtime,
                "status": "converged",
                "frob_rel": math.nan,
            }
            continue
        if method == "sdp":
            res = solve_sdp(A, grid.K, grid.solver)
        else:
            lam = _regularization_level(grid, m, sep2)
            res = solve_regularized(A, lam, grid.solver)
        runtime = time.perf_counter() - t0
        if res.status == "numerical_failure":
            methods[method] = {
                "recovered": False,
                "iters": res.iters,
                "runtime": runtime,
                "status": res.status,
                "frob_rel": math.nan,
            }
            continue
        Zstar = partition_to_membership(truth)
        frob_rel = float(np.linalg.norm(res.Z_hat - Zstar) / np.linalg.norm(Zstar))
        rec = is_exact_recovery(res.Z_hat, truth, grid.frob_tol, rcfg)
        methods[method] = {
            "recovered": rec["by_rounding"] and rec["by_frobenius"],
            "iters": res.iters,
            "runtime": runtime,
            "status": res.status,
            "frob_rel": frob_rel,
        }

    return {
        "ratio_index": ratio_index,
        "trial_index": trial_index,
        "ratio": ratio,
        "methods": methods,
        "certificate_passed": report.passed,
        "certificate": report.as_dict(),
        "duality_gap": gap,
        "affinity_trace_obj": float(
            np.tensordot(A, partition_to_membership(truth))
        ),
    }


def _worker(args):
    grid, ridx, tidx = args
    return run_trial(grid, ridx, tidx)


def run_phase_diagram(grid, jobs=1, return_trials=False):
    """Run the full grid and aggregate one PhaseRow per (ratio, method).

    Trials are independent; with jobs > 1 they run in a process pool.
    Aggregation sums counters in (ratio, trial) order, so the rows do
    not depend on scheduling.
    """
    tasks = [
        (grid, ridx, tidx)
        for ridx in range(len(grid.ratios))
        for tidx in range(grid.trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(_worker, tasks, chunksize=1))
    else:
        trials = [_worker(t) for t in tasks]
    trials.sort(key=lambda t: (t["ratio_index"], t["trial_index"]))

    rows = []
    for ridx, ratio in enumerate(grid.ratios):
        batch = [t for t in trials if t["ratio_index"] == ridx]
        cert_rate = sum(t["certificate_passed"] for t in batch) / len(batch)
        for method in grid.methods:
            recs = [t["methods"][method] for t in batch]
            rows.append(
                PhaseRow(
                    ratio=ratio,
                    method=method,
                    recovery_rate=sum(r["recovered"] for r in recs) / len(recs),
                    certificate_rate=cert_rate,
                    mean_iters=sum(r["iters"] for r in recs) / len(recs),
                    mean_runtime_s=(
                        sum(r["runtime"] for r in recs) / len(recs)
                        if grid.record_runtime
                        else 0.0
                    ),
                    trials=len(recs),
                )
            )
    return (rows, trials) if return_trials else rows


CSV_HEADER = "ratio,method,recovery_rate,certificate_rate,mean_iters,mean_runtime_s,trials"


def emit_csv(rows, path):
    """Fixed column order, LF endings, 17-significant-digit floats."""
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in rows:
                fh.write(
                    ",".join(
                        (
                            format(row.ratio, ".17g"),
                            row.method,
                            format(row.recovery_rate, ".17g"),
                            format(row.certificate_rate, ".17g"),
                            format(row.mean_iters, ".17g"),
                            format(row.mean_runtime_s, ".17g"),
                            str(row.trials),
                        )
                    )
                    + "\n"
                )
    except OSError as exc:
        raise OSError(f"cannot write phase CSV to {path}: {exc}") from exc


def read_csv(path):
    """Parse a file written by :func:`emit_csv` back into PhaseRows."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header in {path}: {header!r}")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != 7:
                raise ValueError(f"malformed CSV row: {line!r}")
            rows.append(
                PhaseRow(
                    ratio=float(parts[0]),
                    method=parts[1],
                    recovery_rate=float(parts[2]),
                    certificate_rate=float(parts[3]),
                    mean_iters=float(parts[4]),
                    mean_runtime_s=float(parts[5]),
                    trials=int(parts[6]),
                )
            )
    return rows


def write_manifest(path, grid, jobs=None):
    """Flat key=value record of the grid next to its CSV."""
    from . import __version__

    lines = {
        "version": __version__,
        "master_seed": grid.master_seed,
        "n": grid.n,
        "K": grid.K,
        "p": grid.p,
        "sigma2": format(grid.sigma2, ".17g"),
        "ratios": ",".join(format(r, ".17g") for r in grid.ratios),
        "trials": grid.trials,
        "methods": ",".join(grid.methods),
        "beta": format(grid.beta, ".17g"),
        "delta": format(grid.delta, ".17g"),
        "frob_tol": format(grid.frob_tol, ".17g"),
        "record_runtime": str(grid.record_runtime).lower(),
    }
    if jobs is not None:
        lines["jobs"] = jobs
    with open(path, "w", newline="\n") as fh:
        for key, val in lines.items():
            fh.write(f"{key}={val}\n")


def isotonic_fit(y):
    """Nondecreasing least-squares fit (pool adjacent violators)."""
    y = np.asarray(y, dtype=np.float64)
    blocks = []  # (total, count)
    for v in y:
        blocks.append([v, 1])
        while len(blocks) > 1 and blocks[-2][0] / blocks[-2][1] > blocks[-1][0] / blocks[-1][1]:
            s, c = blocks.pop()
            blocks[-1][0] += s
            blocks[-1][1] += c
    out = []
    for s, c in blocks:
        out.extend([s / c] * c)
    return np.asarray(out)


def margin_statistics(X, part, centers, sigma2, betas=(0.5,)):
    """Empirical separation margins against their theoretical floor.

    min_margin is the smallest value, over ordered cluster pairs (k, l)
    and points i in cluster k, of |X_i - Xbar_l|^2 - |X_i - Xbar_k|^2.
    lemma_rhs maps each requested beta to the largest per-pair floor

        ((n_k + n_l)/(n_k n_l)) sigma2 p + beta |mu_k - mu_l|^2 - r_kl,

    where r_kl collects the finite-sample correction terms; taking the
    max over pairs makes "min_margin >= lemma_rhs" the conjunction of
    the per-pair events (exact when all pairs share one floor, as with
    equal sizes and equal separations).  Ground-truth centers are
    required, so this is a diagnostic for synthetic runs only.
    """
    X = as_matrix(X, "X")
    if X.shape[1] != part.n:
        raise ValueError("X and partition disagree on n")
    if centers.K != part.K:
        raise ValueError("centers and partition disagree on K")
    idx = part.cluster_indices()
    sizes = part.cluster_sizes()
    means = [X[:, ix].mean(axis=1) for ix in idx]
    mu = centers.centers
    p = X.shape[0]
    n, K = part.n, part.K
    sigma = math.sqrt(sigma2)
    log_nk = math.log(n * K)

    min_margin = math.inf
    rhs = {float(b): -math.inf for b in betas}
    for k in range(K):
        for l in range(K):
            if k == l:
                continue
            pts = X[:, idx[k]]
            d_other = ((pts - means[l][:, None]) ** 2).sum(axis=0)
            d_own = ((pts - means[k][:, None]) ** 2).sum(axis=0)
            min_margin = min(min_margin, float((d_other - d_own).min()))

            nk, nl = sizes[k], sizes[l]
            mudiff = mu[:, k] - mu[:, l]
            sep = float(np.linalg.norm(mudiff))
            inv = (nk + nl) / (nk * nl)
            r_kl = (
                2.0 * sigma * math.sqrt(2.0 * log_nk / nl) * sep
                + 2.0 * sigma2 * inv * math.sqrt(2.0 * p * log_nk)
                + 4.0 * sigma2 / nk * log_nk
            )
            for b in rhs:
                rhs[b] = max(rhs[b], inv * sigma2 * p + b * sep**2 - r_kl)

    return {
        "min_margin": min_margin,
        "lemma_rhs": rhs,
        "uniqueness_bound": lambda_uniqueness_bound(X, part),
    }
