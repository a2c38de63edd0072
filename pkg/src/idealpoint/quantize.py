"""Scalar and vector quantization of Gaussian distributions.

This is the computational substrate for multi-product assortments: the
optimal k-point summary of a Gaussian is a quantization problem, solved in
one dimension by the Lloyd-Max fixed point and in d dimensions by a product
construction plus Lloyd refinement on samples.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import NumericalError, ValidationError
from .linalg import eigh_descending, require_spd

_SQRT_2PI = np.sqrt(2.0 * np.pi)

LLOYD_MAX_ITER_CAP = 10_000
LLOYD_KD_ITER_CAP = 500


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


def _x_phi(x):
    # x * phi(x) with the correct 0 limit at +-inf
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    finite = np.isfinite(x)
    out[finite] = x[finite] * _phi(x[finite])
    return out


@dataclass(frozen=True)
class ScalarQuantizer:
    """Optimal k-point quantizer of the standard normal.

    centroids are sorted; boundaries are the nearest-neighbor midpoints
    between adjacent centroids; distortion is the mean squared error
    E[min_i (X - c_i)^2] for X ~ N(0,1).
    """

    centroids: np.ndarray
    boundaries: np.ndarray
    distortion: float

    def __post_init__(self):
        c = np.array(self.centroids, dtype=float)
        b = np.array(self.boundaries, dtype=float)
        if c.ndim != 1 or c.size < 1 or b.shape != (c.size - 1,):
            raise ValidationError("centroids/boundaries have inconsistent shapes")
        if np.any(np.diff(c) <= 0) or (b.size > 1 and np.any(np.diff(b) <= 0)):
            raise ValidationError("centroids and boundaries must be strictly sorted")
        if not (float(self.distortion) >= 0):
            raise ValidationError("distortion must be nonnegative")
        c.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "distortion", float(self.distortion))

    @property
    def k(self) -> int:
        return self.centroids.size


def _cell_moments(edges: np.ndarray):
    """Per-cell Gaussian partial moments between consecutive edges.

    Returns (P, M1, M2): the probability, first and second moments of N(0,1)
    restricted to each cell, all in closed form from the cdf/pdf.
    """
    lo, hi = edges[:-1], edges[1:]
    p_lo, p_hi = ndtr(lo), ndtr(hi)
    f_lo, f_hi = _phi(lo), _phi(hi)
    prob = p_hi - p_lo
    m1 = f_lo - f_hi
    m2 = prob + _x_phi(lo) - _x_phi(hi)
    return prob, m1, m2


def _distortion_from_cells(edges: np.ndarray, centroids: np.ndarray) -> float:
    prob, m1, m2 = _cell_moments(edges)
    return float(np.sum(m2 - 2.0 * centroids * m1 + np.square(centroids) * prob))


@functools.lru_cache(maxsize=256)
def _lloyd_max_cached(k: int, tol: float) -> ScalarQuantizer:
    if k == 1:
        return ScalarQuantizer(np.array([0.0]), np.array([]), 1.0)
    # Symmetric start at the midpoint quantiles; the alternating updates
    # preserve symmetry, so the fixed point is symmetric about 0.
    centroids = ndtri((2.0 * np.arange(k) + 1.0) / (2.0 * k))
    for _ in range(LLOYD_MAX_ITER_CAP):
        boundaries = 0.5 * (centroids[:-1] + centroids[1:])
        edges = np.concatenate(([-np.inf], boundaries, [np.inf]))
        prob, m1, _ = _cell_moments(edges)
        if np.any(prob <= 0):
            raise NumericalError(
                "empty quantizer cell encountered",
                last_iterate=(centroids.copy(), boundaries.copy()),
            )
        new_centroids = m1 / prob
        movement = float(np.max(np.abs(new_centroids - centroids)))
        centroids = new_centroids
        if movement < tol:
            boundaries = 0.5 * (centroids[:-1] + centroids[1:])
            edges = np.concatenate(([-np.inf], boundaries, [np.inf]))
            return ScalarQuantizer(centroids, boundaries, _distortion_from_cells(edges, centroids))
    raise NumericalError(
        f"Lloyd-Max did not converge within {LLOYD_MAX_ITER_CAP} iterations",
        last_iterate=(centroids.copy(), 0.5 * (centroids[:-1] + centroids[1:])),
    )


def lloyd_max_normal(k: int, tol: float = 1e-10) -> ScalarQuantizer:
    """Optimal k-point quantizer of N(0,1) via the Lloyd-Max fixed point.

    Alternates the nearest-neighbor condition (boundaries at centroid
    midpoints) with the centroid condition (each centroid at the conditional
    mean of its cell, computed in closed form from the Gaussian cdf/pdf)
    until the largest centroid movement drops below ``tol``.

    Raises NumericalError with the last iterate attached if the iteration cap
    is hit.
    """
    k = int(k)
    if k < 1:
        raise ValidationError("k must be a positive integer")
    tol = float(tol)
    if not (tol > 0):
        raise ValidationError("tol must be positive")
    return _lloyd_max_cached(k, tol)


def quantization_efficiency(k: int) -> float:
    """Fraction of unit variance removed by the optimal k-point quantizer.

    Equals 1 - lloyd_max_normal(k).distortion; 0 at k=1, 2/pi at k=2, and
    nondecreasing in k.
    """
    return 1.0 - lloyd_max_normal(int(k)).distortion


@dataclass(frozen=True)
class Assortment:
    """An ordered set of k points in preference space (one row per product)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValidationError("assortment needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("assortment points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def translate(self, offset: np.ndarray) -> "Assortment":
        return Assortment(self.points + np.asarray(offset, dtype=float))


def _prime_factors_descending(k: int) -> list[int]:
    factors = []
    n = k
    p = 2
    while p * p <= n:
        while n % p == 0:
            factors.append(p)
            n //= p
        p += 1
    if n > 1:
        factors.append(n)
    return sorted(factors, reverse=True)


def axis_levels(k: int, d: int) -> list[int]:
    """Per-axis quantizer sizes whose product is k.

    Prime factors of k in decreasing order are dealt cyclically across the d
    axes (axes ordered by decreasing eigenvalue by the caller), multiplying
    on wrap-around.  Total for every k: a prime k simply lands on the leading
    axis.
    """
    levels = [1] * d
    for i, f in enumerate(_prime_factors_descending(k)):
        levels[i % d] *= f
    return levels


def product_quantizer(cov: np.ndarray, k: int) -> Assortment:
    """Axis-aligned product codebook for N(0, cov), centered at the origin.

    Eigendecomposes cov, assigns quantizer levels per principal axis (more
    levels to higher-variance axes, see :func:`axis_levels`), places scaled
    Lloyd-Max centroids along each axis, and maps the Cartesian product back
    through the eigenbasis.  The caller translates by the posterior mean.
    """
    k = int(k)
    if k < 1:
        raise ValidationError("k must be a positive integer")
    cov = require_spd(cov, name="cov")
    eigvals, eigvecs = eigh_descending(cov)
    if np.any(eigvals <= 0):
        raise ValidationError("cov must be positive definite")
    d = eigvals.size
    levels = axis_levels(k, d)
    # expand the Cartesian product only over axes with >1 level; the rest
    # contribute a constant 0 (and would blow past numpy's ndim limit)
    active = [i for i in range(d) if levels[i] > 1]
    coords = np.zeros((k, d))
    if active:
        per_axis = [
            np.sqrt(eigvals[i]) * lloyd_max_normal(levels[i]).centroids for i in active
        ]
        mesh = np.meshgrid(*per_axis, indexing="ij")
        coords[:, active] = np.stack([m.ravel() for m in mesh], axis=1)
    return Assortment(coords @ eigvecs.T)


class LloydResult(NamedTuple):
    """Outcome of :func:`lloyd_kd`: refined assortment plus diagnostics."""

    assortment: Assortment
    distortion: float
    iterations: int
    empty_cell_reseeds: int


def _min_sq_dist(x: np.ndarray, points: np.ndarray):
    """Squared distance from each row of x to its nearest point; (d2min, argmin)."""
    # ||x||^2 - 2 x.c + ||c||^2 keeps memory at (n, k) even for large d
    d2 = (
        np.sum(np.square(x), axis=1)[:, None]
        - 2.0 * (x @ points.T)
        + np.sum(np.square(points), axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    idx = np.argmin(d2, axis=1)
    return d2[np.arange(x.shape[0]), idx], idx


def lloyd_kd(
    cov: np.ndarray,
    k: int,
    init: Assortment,
    n_samples: int,
    rng: np.random.Generator,
    rel_tol: float = 1e-6,
) -> LloydResult:
    """Sample-based Lloyd refinement of a k-point codebook for N(0, cov).

    A fixed sample set is drawn once (guaranteeing monotone distortion and
    termination); each iteration assigns samples to their nearest point and
    recenters points at their cell's sample centroid.  Empty cells are
    re-seeded at the sample farthest from its nearest centroid, counted in
    ``empty_cell_reseeds``.
    """
    k = int(k)
    if init.k != k:
        raise ValidationError(f"init must have {k} points, got {init.k}")
    n_samples = int(n_samples)
    if n_samples < 1:
        raise ValidationError("n_samples must be positive")
    cov = require_spd(cov, name="cov")
    chol = np.linalg.cholesky(cov)
    samples = rng.standard_normal((n_samples, cov.shape[0])) @ chol.T

    points = np.array(init.points, dtype=float)
    reseeds = 0
    prev = np.inf
    distortion = np.inf
    iterations = 0
    for iterations in range(1, LLOYD_KD_ITER_CAP + 1):
        d2, assign = _min_sq_dist(samples, points)
        missing = np.setdiff1d(np.arange(k), assign)
        if missing.size:
            for j in missing:
                far = int(np.argmax(d2))
                points[j] = samples[far]
                reseeds += 1
                d2, assign = _min_sq_dist(samples, points)
            continue
        distortion = float(d2.mean())
        counts = np.bincount(assign, minlength=k).astype(float)
        sums = np.zeros_like(points)
        np.add.at(sums, assign, samples)
        points = sums / counts[:, None]
        if prev - distortion < rel_tol * max(distortion, 1e-300):
            break
        prev = distortion
    return LloydResult(Assortment(points), distortion, iterations, reseeds)


class DistortionEstimate(NamedTuple):
    estimate: float
    std_error: float


def distortion_mc(
    cov: np.ndarray, s: Assortment, n: int, rng: np.random.Generator
) -> DistortionEstimate:
    """Monte Carlo estimate of E[min_j ||xi - x_j||^2] for xi ~ N(0, cov).

    Uses antithetic pairs (+xi, -xi), reduced pair-first, so the estimate is
    unbiased, carries a valid pair-level standard error, and is exactly
    invariant under reflecting the assortment about the origin.  Draws
    2*ceil(n/2) samples.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("n must be positive")
    cov = require_spd(cov, name="cov")
    pairs = (n + 1) // 2
    base = rng.standard_normal((pairs, cov.shape[0])) @ np.linalg.cholesky(cov).T
    d2_plus, _ = _min_sq_dist(base, s.points)
    d2_minus, _ = _min_sq_dist(-base, s.points)
    per_pair = 0.5 * (d2_plus + d2_minus)
    estimate = float(per_pair.mean())
    if pairs > 1:
        std_error = float(per_pair.std(ddof=1) / np.sqrt(pairs))
    else:
        std_error = float("inf")
    return DistortionEstimate(estimate, std_error)


def product_quantizer_distortion(cov: np.ndarray, k: int) -> float:
    """Closed-form distortion of :func:`product_quantizer`'s codebook.

    The codebook is a full Cartesian product, so the nearest-neighbor search
    separates per axis and the distortion is the eigenvalue-weighted sum of
    scalar Lloyd-Max distortions.
    """
    cov = require_spd(cov, name="cov")
    eigvals, _ = eigh_descending(cov)
    levels = axis_levels(int(k), eigvals.size)
    return float(
        sum(ev * lloyd_max_normal(lv).distortion for ev, lv in zip(eigvals, levels))
    )
