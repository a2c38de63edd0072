"""Gaussian belief over a customer's ideal point and its sequential update.

The belief is refined by directional queries: asking along a unit vector y
returns a noisy projection z = theta'y + eps, and the posterior stays
Gaussian with a rank-one covariance correction.  All types here are
immutable values; operations are pure given an explicit rng stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .linalg import (
    check_square_symmetric,
    ensure_positive_definite,
    spd_inverse,
    symmetrize,
)


def _frozen_array(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GaussianBelief:
    """Posterior mean and covariance over the d-dimensional preference space.

    Attributes:
        mean: length-d posterior mean.
        cov: d x d symmetric positive-definite posterior covariance.
        noise_var: observation noise variance sigma^2 > 0 of the query channel.

    Symmetry and noise_var are validated at construction; positive
    definiteness is checked on demand via :meth:`require_positive_definite`
    (rank-one updates keep it in exact arithmetic, so per-update Cholesky
    would be wasted work).
    """

    mean: np.ndarray
    cov: np.ndarray
    noise_var: float

    def __post_init__(self):
        mean = _frozen_array(self.mean)
        if mean.ndim != 1 or mean.size < 1:
            raise ValidationError("mean must be a vector of length >= 1")
        if not np.all(np.isfinite(mean)):
            raise ValidationError("mean contains non-finite entries")
        cov = check_square_symmetric(self.cov, name="cov")
        if cov.shape[0] != mean.size:
            raise ValidationError("cov shape does not match mean length")
        if np.any(np.diag(cov) <= 0):
            raise ValidationError("cov must have positive diagonal")
        nv = float(self.noise_var)
        if not (nv > 0) or not np.isfinite(nv):
            raise ValidationError("noise_var must be a positive finite real")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _frozen_array(cov))
        object.__setattr__(self, "noise_var", nv)

    @property
    def d(self) -> int:
        return self.mean.size

    def require_positive_definite(self) -> None:
        ensure_positive_definite(self.cov, name="belief covariance")


@dataclass(frozen=True)
class Query:
    """A unit-norm query direction in preference space."""

    direction: np.ndarray

    def __post_init__(self):
        y = _frozen_array(self.direction)
        if y.ndim != 1 or y.size < 1 or not np.all(np.isfinite(y)):
            raise ValidationError("query direction must be a finite vector")
        norm = float(np.linalg.norm(y))
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"query direction must have unit norm, got {norm!r}")
        object.__setattr__(self, "direction", y)


@dataclass(frozen=True)
class Response:
    """A scalar noisy projection of the ideal point along a query."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not np.isfinite(v):
            raise ValidationError("response value must be finite")
        object.__setattr__(self, "value", v)


def _rank_one_step(cov: np.ndarray, y: np.ndarray, noise_var: float):
    """One covariance step of the conjugate update.

    Returns (kalman gain kappa, updated covariance).  Shared by
    :func:`kalman_update` and the simulation harness so both use identical
    arithmetic.
    """
    cov_y = cov @ y
    denom = noise_var + float(y @ cov_y)
    kappa = cov_y / denom
    new_cov = symmetrize(cov - np.outer(kappa, cov_y))
    return kappa, new_cov


def kalman_update(belief: GaussianBelief, q: Query, z: Response) -> GaussianBelief:
    """Condition a Gaussian belief on one noisy directional response.

    Standard conjugate (Kalman) update: the gain kappa = Sigma y / (sigma^2 +
    y'Sigma y) weights the innovation z - y'mu into the mean, and the
    covariance shrinks by the rank-one term kappa y'Sigma.  The output
    covariance is re-symmetrized, its trace strictly decreases, and it stays
    below the input in the Loewner order.
    """
    if q.direction.size != belief.d:
        raise ValidationError("query dimension does not match belief dimension")
    kappa, new_cov = _rank_one_step(belief.cov, q.direction, belief.noise_var)
    if np.any(np.diag(new_cov) <= 0):
        raise NumericalError("updated covariance lost positive definiteness")
    innovation = z.value - float(q.direction @ belief.mean)
    new_mean = belief.mean + kappa * innovation
    return GaussianBelief(new_mean, new_cov, belief.noise_var)


def cov_from_information(prior_cov: np.ndarray, queries, noise_var: float) -> np.ndarray:
    """Posterior covariance in information form.

    Computes (Sigma0^{-1} + sigma^{-2} sum_t y_t y_t')^{-1}; equals the
    covariance from iterating :func:`kalman_update` over the same queries.
    The covariance path does not depend on the responses, which is why this
    closed form exists.
    """
    nv = float(noise_var)
    if not (nv > 0):
        raise ValidationError("noise_var must be positive")
    info = spd_inverse(prior_cov, name="prior covariance")
    for q in queries:
        y = q.direction if isinstance(q, Query) else np.asarray(q, dtype=float)
        info = info + np.outer(y, y) / nv
    return spd_inverse(info, name="information matrix")


def simulate_response(theta: np.ndarray, q: Query, noise_var: float, rng: np.random.Generator) -> Response:
    """Draw z = theta'y + eps with eps ~ N(0, noise_var) from rng.

    noise_var = 0 is tolerated here (and only here) so tests can exercise the
    noiseless channel.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != q.direction.shape:
        raise ValidationError("theta dimension does not match query dimension")
    nv = float(noise_var)
    if nv < 0 or not np.isfinite(nv):
        raise ValidationError("noise_var must be a nonnegative finite real")
    return Response(float(theta @ q.direction) + rng.normal(0.0, np.sqrt(nv)))
