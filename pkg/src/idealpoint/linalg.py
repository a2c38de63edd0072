"""Helpers for small dense symmetric matrices.

Everything in the package works with modest dimensions (d up to a few
hundred), so plain LAPACK via numpy is the right tool; these wrappers add
the determinism conventions the rest of the code relies on (descending
eigenvalues, stable tie order, canonical eigenvector signs).
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError, ValidationError


def symmetrize(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2.0


def check_square_symmetric(a: np.ndarray, rtol: float = 1e-12, name: str = "matrix") -> np.ndarray:
    """Validate shape and symmetry; returns the array as float64."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > rtol * scale:
        raise ValidationError(f"{name} is not symmetric within rtol={rtol}")
    return a


def cholesky_or_none(a: np.ndarray):
    """Cholesky factor of a symmetric matrix, or None if not positive definite."""
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def require_spd(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = check_square_symmetric(a, name=name)
    if cholesky_or_none(a) is None:
        raise ValidationError(f"{name} must be positive definite")
    return a


def spd_inverse(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Inverse of an SPD matrix, symmetrized; raises ValidationError if singular."""
    a = check_square_symmetric(a, name=name)
    if cholesky_or_none(a) is None:
        raise ValidationError(f"{name} must be positive definite to invert")
    return symmetrize(np.linalg.inv(a))


def canonicalize_columns(v: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's first non-negligible entry is positive."""
    v = np.array(v, dtype=float)
    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12 * max(np.abs(col).max(), 1e-300))[0]
        lead = nz[0] if nz.size else 0
        if col[lead] < 0:
            v[:, j] = -col
    return v


def eigh_descending(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition with eigenvalues sorted descending.

    Ties keep LAPACK's ascending-output order (stable sort), which for exactly
    diagonal inputs means lower axis indices come first; eigenvector signs are
    canonicalized so repeated calls agree bit-for-bit.
    """
    w, v = np.linalg.eigh(symmetrize(np.asarray(a, dtype=float)))
    order = np.argsort(-w, kind="stable")
    return w[order], canonicalize_columns(v[:, order])


def ensure_positive_definite(a: np.ndarray, name: str = "matrix") -> None:
    """On-demand PD check via Cholesky; raises NumericalError on failure."""
    if cholesky_or_none(symmetrize(np.asarray(a, dtype=float))) is None:
        raise NumericalError(f"{name} lost positive definiteness")
