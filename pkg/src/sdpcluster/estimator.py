"""Scikit-learn style front end for the relaxation-based clusterer."""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.exceptions import NotFittedError

from ._validation import as_matrix
from .rounding import RoundingConfig, round_membership
from .solver import SolverConfig, build_affinity, solve_regularized, solve_sdp


class SDPKMeans(BaseEstimator, ClusterMixin):
    """K-means via its semidefinite relaxation, rounded spectrally.

    Solves the membership-matrix relaxation of K-means on the sample
    Gram matrix and rounds the fractional solution back to hard labels.
    In well-separated regimes the relaxation is tight and the rounded
    labels coincide with the exact K-means optimum.

    Parameters
    ----------
    n_clusters : number of clusters K.
    trace_penalty : None solves the trace-constrained problem; a float
        switches to the trace-penalized variant with that penalty
        (useful when K is unreliable; inspect ``trace_`` afterwards).
    rho, over_relaxation, max_iter, tol_primal, tol_obj : splitting
        solver controls.
    restarts : k-means restarts inside the spectral rounding.
    random_state : seed for the rounding stage (the solver itself is
        deterministic).

    Attributes
    ----------
    labels_ : 0-based cluster labels, sklearn convention.
    membership_ : the fractional membership matrix returned by the solver.
    objective_ : affinity objective <X X^T, Z> at the solution.
    n_iter_ : solver iterations.
    status_ : solver termination status.
    trace_ : achieved trace of the membership matrix.
    """

    def __init__(
        self,
        n_clusters=2,
        trace_penalty=None,
        rho=1.0,
        over_relaxation=1.6,
        max_iter=20000,
        tol_primal=1e-6,
        tol_obj=1e-9,
        restarts=10,
        random_state=0,
    ):
        self.n_clusters = n_clusters
        self.trace_penalty = trace_penalty
        self.rho = rho
        self.over_relaxation = over_relaxation
        self.max_iter = max_iter
        self.tol_primal = tol_primal
        self.tol_obj = tol_obj
        self.restarts = restarts
        self.random_state = random_state

    def fit(self, X, y=None):
        """X has one sample per row, sklearn convention."""
        X = as_matrix(X, "X")
        if X.shape[0] < self.n_clusters:
            raise ValueError("need at least n_clusters samples")
        cfg = SolverConfig(
            max_iters=self.max_iter,
            tol_primal=self.tol_primal,
            tol_obj=self.tol_obj,
            rho=self.rho,
            over_relaxation=self.over_relaxation,
        )
        A = build_affinity(X.T)
        if self.trace_penalty is None:
            res = solve_sdp(A, self.n_clusters, cfg)
        else:
            res = solve_regularized(A, self.trace_penalty, cfg)
        if res.status == "numerical_failure":
            raise ArithmeticError("splitting solver hit a numerical failure")
        rcfg = RoundingConfig(
            restarts=self.restarts, seed=int(self.random_state or 0)
        )
        part = round_membership(res.Z_hat, self.n_clusters, rcfg)
        self.labels_ = part.labels - 1
        self.membership_ = res.Z_hat
        self.objective_ = res.objective
        self.n_iter_ = res.iters
        self.status_ = res.status
        self.trace_ = res.trace
        centers = np.empty((self.n_clusters, X.shape[1]))
        for k in range(self.n_clusters):
            centers[k] = X[self.labels_ == k].mean(axis=0)
        self.cluster_centers_ = centers
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def predict(self, X):
        """Assign new samples to the nearest fitted cluster mean.

        Requires the estimator to be fitted; means come from the
        training samples grouped by ``labels_``.
        """
        if not hasattr(self, "labels_"):
            raise NotFittedError("call fit before predict")
        X = as_matrix(X, "X")
        d2 = ((X[:, None, :] - self.cluster_centers_[None, :, :]) ** 2).sum(axis=2)
        return d2.argmin(axis=1)
