"""First-order splitting solver for the membership-matrix relaxation.

The relaxation maximizes <A, Z> over symmetric, positive semidefinite,
entrywise-nonnegative matrices with unit row sums and trace K.  The
feasible set is split into three pieces with cheap exact projections:

  S1: symmetric psd with trace K   (spectral simplex projection)
  S2: rows on the probability simplex
  S3: symmetric matrices

and solved by consensus ADMM: each block holds a copy of the variable,
the linear objective enters block S1 as a constant gradient shift, the
copies are averaged, and scaled dual variables accumulate the
disagreement.  Because the objective is linear, rescaling A does not
move the argmax, so the solver normalizes A by its spectral radius
internally; rho is therefore a dimensionless step parameter.

The trace-penalized variant drops the trace constraint from S1 and
maximizes <A - lambda I, Z> instead, reporting the achieved trace.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix, check_square, check_symmetric, check_vector
from .membership import FeasibilityResiduals, feasibility_residuals
from .projections import project_psd, project_psd_trace, project_rowsum_nonneg


def build_affinity(X):
    """Gram matrix of the observations (columns of X), symmetrized to
    remove roundoff asymmetry."""
    X = as_matrix(X, "X")
    if X.shape[1] < 2:
        raise ValueError("need at least two observations")
    A = X.T @ X
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 20000
    tol_primal: float = 1e-6
    tol_obj: float = 1e-9
    rho: float = 1.0
    over_relaxation: float = 1.6

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol_primal <= 0 or self.tol_obj <= 0:
            raise ValueError("tolerances must be > 0")
        if self.rho <= 0:
            raise ValueError("rho must be > 0")
        if not 1.0 <= self.over_relaxation <= 1.9:
            raise ValueError("over_relaxation must be in [1, 1.9]")


@dataclass(frozen=True)
class SolverResult:
    Z_hat: np.ndarray
    objective: float
    iters: int
    residuals: FeasibilityResiduals
    status: str
    trace: float


_NAN_RESIDUALS = FeasibilityResiduals(
    sym=math.nan,
    psd_min_eig=math.nan,
    trace_err=math.nan,
    rowsum_max_err=math.nan,
    min_entry=math.nan,
)


def _uniform_feasible(n, K):
    """The rotation-invariant feasible point a*I + b*J with trace K."""
    a = (K - 1.0) / (n - 1.0)
    b = (1.0 - a) / n
    return a * np.eye(n) + b * np.ones((n, n))


def _consensus_solve(A, spectral_proj, cfg, z0, trace_path, K_report):
    """Shared ADMM loop; spectral_proj realizes block S1 with or without
    the trace constraint, and A is the (possibly penalty-shifted)
    objective matrix in its original scale."""
    n = A.shape[0]
    scale = float(np.max(np.abs(np.linalg.eigvalsh(A)))) if n else 0.0
    shift = A / (cfg.rho * (1.0 + scale))

    zbar = z0.copy()
    U1 = np.zeros((n, n))
    U2 = np.zeros((n, n))
    U3 = np.zeros((n, n))
    gamma = cfg.over_relaxation

    trace_fh = open(trace_path, "w", newline="\n") if trace_path else None
    if trace_fh:
        trace_fh.write("iter,objective,primal_residual,min_eig\n")

    status = "max_iters"
    obj_window = []
    obj = math.nan
    it = 0
    try:
        for it in range(1, cfg.max_iters + 1):
            V1 = zbar - U1
            V1 = 0.5 * (V1 + V1.T)
            V1 += shift
            try:
                Z1 = spectral_proj(V1)
            except np.linalg.LinAlgError:
                status = "numerical_failure"
                break
            Z2 = project_rowsum_nonneg(zbar - U2)
            Z3 = zbar - U3
            Z3 = 0.5 * (Z3 + Z3.T)

            Z1h = gamma * Z1 + (1.0 - gamma) * zbar
            Z2h = gamma * Z2 + (1.0 - gamma) * zbar
            Z3h = gamma * Z3 + (1.0 - gamma) * zbar
            zbar = (Z1h + Z2h + Z3h) / 3.0
            U1 += Z1h - zbar
            U2 += Z2h - zbar
            U3 += Z3h - zbar

            if not np.isfinite(zbar).all():
                status = "numerical_failure"
                break

            r = max(
                float(np.linalg.norm(Z1 - zbar)),
                float(np.linalg.norm(Z2 - zbar)),
                float(np.linalg.norm(Z3 - zbar)),
            )
            obj = float(np.tensordot(A, Z2))
            obj_window.append(obj)
            if len(obj_window) > 11:
                obj_window.pop(0)

            if trace_fh and it % 50 == 0:
                min_eig = float(np.linalg.eigvalsh(0.5 * (zbar + zbar.T))[0])
                trace_fh.write(
                    f"{it},{format(obj, '.17g')},{format(r, '.17g')},"
                    f"{format(min_eig, '.17g')}\n"
                )

            if (
                r <= cfg.tol_primal * (1.0 + float(np.linalg.norm(zbar)))
                and len(obj_window) == 11
                and abs(obj_window[-1] - obj_window[0])
                <= cfg.tol_obj * (1.0 + abs(obj_window[-1]))
            ):
                status = "converged"
                break
    finally:
        if trace_fh:
            trace_fh.close()

    if status == "numerical_failure":
        return SolverResult(
            Z_hat=zbar,
            objective=math.nan,
            iters=it,
            residuals=_NAN_RESIDUALS,
            status=status,
            trace=math.nan,
        )

    # Cleanup: spectral projection then row projection, so the reported
    # matrix has exact row sums and nonnegativity.
    try:
        Z_hat = project_rowsum_nonneg(spectral_proj(0.5 * (zbar + zbar.T)))
    except np.linalg.LinAlgError:
        return SolverResult(
            Z_hat=zbar,
            objective=math.nan,
            iters=it,
            residuals=_NAN_RESIDUALS,
            status="numerical_failure",
            trace=math.nan,
        )
    trace = float(np.trace(Z_hat))
    residuals = feasibility_residuals(Z_hat, K_report if K_report else round(trace))
    return SolverResult(
        Z_hat=Z_hat,
        objective=float(np.tensordot(A, Z_hat)),
        iters=it,
        residuals=residuals,
        status=status,
        trace=trace,
    )


def solve_sdp(A, K, cfg=None, z0=None, trace_path=None):
    """Maximize <A, Z> over the trace-K membership relaxation.

    z0 optionally warm-starts the averaged iterate; the default start is
    the uniform feasible matrix.  trace_path, when given, receives a CSV
    of (iter, objective, primal_residual, min_eig) every 50 iterations.
    """
    A = check_symmetric(A, name="A")
    n = A.shape[0]
    if not 2 <= K <= n:
        raise ValueError(f"need 2 <= K <= n, got K={K}, n={n}")
    cfg = cfg or SolverConfig()
    if z0 is None:
        z0 = _uniform_feasible(n, K)
    else:
        z0 = check_square(z0, "z0")
    return _consensus_solve(
        A, lambda M: project_psd_trace(M, K), cfg, z0, trace_path, K_report=K
    )


def solve_regularized(A, lam, cfg=None, z0=None, trace_path=None):
    """Maximize <A, Z> - lam * tr(Z) with the trace constraint lifted.

    Block S1 projects onto the psd cone only; the achieved trace is
    reported as a diagnostic (the trace residual in the feasibility
    record is measured against the nearest integer).
    """
    A = check_symmetric(A, name="A")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    n = A.shape[0]
    cfg = cfg or SolverConfig()
    if z0 is None:
        z0 = np.ones((n, n)) / n
    else:
        z0 = check_square(z0, "z0")
    shifted = A - lam * np.eye(n)
    result = _consensus_solve(
        shifted, project_psd, cfg, z0, trace_path, K_report=None
    )
    if result.status == "numerical_failure":
        return result
    # report the objective in terms of the original affinity
    return SolverResult(
        Z_hat=result.Z_hat,
        objective=float(np.tensordot(A, result.Z_hat)),
        iters=result.iters,
        residuals=result.residuals,
        status=result.status,
        trace=result.trace,
    )


def lambda_window(n, K, p, sigma2, m, Delta2, beta, delta):
    """Penalty range for the trace-penalized variant (unit constants).

    lo collects the noise terms that the penalty must dominate; hi is
    the level above which cross-cluster certificate blocks lose
    positivity.  An empty window (lo > hi) is legal and simply means the
    high-separation regime is not met.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    if delta <= 0:
        raise ValueError("delta must be > 0")
    logn = math.log(n)
    lo = sigma2 * (math.sqrt(n) + math.sqrt(p) + math.sqrt(2.0 * logn)) ** 2
    lo += (
        sigma2
        / beta
        * (n + K * logn + (1.0 - beta) * K * delta * math.sqrt(p * m * logn))
    )
    hi = p * sigma2 + 0.25 * beta * m * Delta2
    return {"lo": lo, "hi": hi}


def lambda_uniqueness_bound(X, part):
    """Largest penalty below which every cross-cluster certificate block
    stays positive on this draw:

        min_{k != l} (n_l n_k / (n_l + n_k)) *
            min_{j in G_l} (|Xbar_k - X_j|^2 - |Xbar_l - X_j|^2)

    May be negative, in which case no positive penalty certifies
    uniqueness for this dataset.
    """
    X = as_matrix(X, "X")
    if X.shape[1] != part.n:
        raise ValueError("X and partition disagree on n")
    idx = part.cluster_indices()
    sizes = part.cluster_sizes()
    means = [X[:, ix].mean(axis=1) for ix in idx]
    best = math.inf
    for k in range(part.K):
        for l in range(part.K):
            if k == l:
                continue
            pts = X[:, idx[l]]
            d_own = ((pts - means[l][:, None]) ** 2).sum(axis=0)
            d_other = ((pts - means[k][:, None]) ** 2).sum(axis=0)
            inner = float((d_other - d_own).min())
            w = sizes[k] * sizes[l] / (sizes[k] + sizes[l])
            best = min(best, w * inner)
    return best


def dual_gap(A, Z, lam, alpha, B=None):
    """Dual objective minus primal objective, lam * tr(Z) + sum(alpha)
    - <A, Z>.

    For a feasible primal Z (trace K, unit row sums) this is the duality
    gap lam*K + alpha^T 1 - tr(AZ); it is nonnegative whenever
    (lam, alpha, B) is dual feasible.  B does not enter the dual
    objective and is accepted only so call sites can pass a full
    certificate.
    """
    A = check_square(A, "A")
    Z = check_square(Z, "Z")
    if A.shape != Z.shape:
        raise ValueError("A and Z must have the same shape")
    alpha = check_vector(alpha, A.shape[0], "alpha")
    if B is not None:
        B = check_square(B, "B")
        if B.shape != A.shape:
            raise ValueError("B must match A's shape")
    return float(lam * np.trace(Z) + alpha.sum() - np.tensordot(A, Z))
