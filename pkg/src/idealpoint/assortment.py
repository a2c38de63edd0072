"""Optimal assortments for a Gaussian belief, and the customer choice rule.

Closed forms exist for one product (the posterior mean) and two products (a
symmetric pair along the leading uncertainty direction); larger assortments
fall back to quantization of the posterior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .belief import GaussianBelief
from .errors import ValidationError
from .linalg import check_square_symmetric, eigh_descending
from .quantize import Assortment, lloyd_kd, product_quantizer

TWO_OVER_PI = 2.0 / np.pi


@dataclass(frozen=True)
class HedgingPair:
    """The optimal two-product assortment.

    The pair straddles the posterior mean along its leading eigenvector:
    center +- spread * direction, where spread = sqrt(2 lambda_1 / pi) is the
    expected magnitude of the customer's deviation along that axis, and gain
    = lambda_1 / pi is the improvement in expected utility over the single
    best product.
    """

    center: np.ndarray
    direction: np.ndarray
    spread: float
    gain: float

    def __post_init__(self):
        center = np.array(np.asarray(self.center, dtype=float))
        direction = np.array(np.asarray(self.direction, dtype=float))
        if center.shape != direction.shape or center.ndim != 1:
            raise ValidationError("center and direction must be vectors of equal length")
        if abs(float(np.linalg.norm(direction)) - 1.0) > 1e-10:
            raise ValidationError("direction must have unit norm")
        if not (self.spread > 0 and self.gain >= 0):
            raise ValidationError("spread must be positive and gain nonnegative")
        center.setflags(write=False)
        direction.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "spread", float(self.spread))
        object.__setattr__(self, "gain", float(self.gain))

    @property
    def points(self) -> np.ndarray:
        """The two products as rows: center - c*v first, center + c*v second."""
        offset = self.spread * self.direction
        return np.stack([self.center - offset, self.center + offset])

    def assortment(self) -> Assortment:
        return Assortment(self.points)


def best_single(belief: GaussianBelief) -> np.ndarray:
    """The optimal single recommendation: the posterior mean.

    Expected loss decomposes into bias + variance, and the mean zeros the
    bias, leaving half the covariance trace.
    """
    return np.array(belief.mean)


def best_pair(belief: GaussianBelief) -> HedgingPair:
    """The optimal symmetric two-product hedge for a Gaussian belief.

    Hedging direction = leading eigenvector of the covariance (sign
    canonicalized, eigenvalue ties broken by index); spread = sqrt(2
    lambda_1 / pi); gain = lambda_1 / pi.
    """
    eigvals, eigvecs = eigh_descending(belief.cov)
    lam1 = float(eigvals[0])
    if lam1 <= 0:
        raise ValidationError("covariance must be positive definite")
    return HedgingPair(
        center=belief.mean,
        direction=eigvecs[:, 0],
        spread=float(np.sqrt(2.0 * lam1 / np.pi)),
        gain=lam1 / np.pi,
    )


def best_k(
    belief: GaussianBelief,
    k: int,
    n_samples: int,
    rng: np.random.Generator,
) -> Assortment:
    """A k-product assortment for the belief.

    k=1 and k=2 use the exact closed forms.  For k >= 3 the product
    quantizer of the covariance is refined by sample-based Lloyd iteration
    (n_samples draws from rng), then translated to the posterior mean; these
    assortments are approximate, as no closed form exists beyond k=2.
    """
    k = int(k)
    if k < 1:
        raise ValidationError("k must be a positive integer")
    if k == 1:
        return Assortment(best_single(belief)[None, :])
    if k == 2:
        return best_pair(belief).assortment()
    init = product_quantizer(belief.cov, k)
    refined = lloyd_kd(belief.cov, k, init, n_samples, rng)
    return refined.assortment.translate(belief.mean)


def customer_choice(theta: np.ndarray, s: Assortment) -> tuple[int, float]:
    """Index of the product nearest the ideal point, and the squared distance.

    Ties go to the lowest index (a measure-zero event under continuous
    posteriors).
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size != s.d:
        raise ValidationError("theta dimension does not match assortment")
    d2 = np.sum(np.square(s.points - theta), axis=1)
    idx = int(np.argmin(d2))
    return idx, float(d2[idx])


def hedging_gap(cov: np.ndarray) -> float:
    """Half the covariance trace: the gap between the full-information value
    and the single-product value, i.e. the most that assortment breadth can
    still absorb."""
    cov = check_square_symmetric(cov, name="cov")
    return 0.5 * float(np.trace(cov))
