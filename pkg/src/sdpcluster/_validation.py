"""Small input-validation helpers shared across the package."""

import numpy as np


class DegenerateDrawError(RuntimeError):
    """Random center placement failed to produce distinct directions."""


class DegenerateBlockError(RuntimeError):
    """A certificate block has zero total mass; the rank-one construction
    divides by it and has no fallback."""


def as_matrix(X, name="X"):
    """Coerce to a finite 2-d float64 array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


def check_square(M, name="M"):
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


def check_symmetric(M, tol=1e-8, name="M"):
    M = check_square(M, name)
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    scale = 1.0 + (np.max(np.abs(M)) if M.size else 0.0)
    if asym > tol * scale:
        raise ValueError(f"{name} is not symmetric (max asymmetry {asym:.3e})")
    return M


def check_vector(v, n=None, name="v"):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {v.shape[0]}")
    return v
