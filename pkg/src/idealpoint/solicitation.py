"""Query-allocation policies and the identities that govern them.

For a single recommended product the optimal m-query plan is a rank-capped
water-filling over the prior eigendirections; this module computes that
plan, realizes it as an explicit unit-norm query sequence, and evaluates
the bounds and ratios that compare solicitation depth against assortment
breadth (including the k=2 selective-focus profile for isotropic priors).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .belief import Query
from .errors import NumericalError, ValidationError
from .linalg import check_square_symmetric, eigh_descending, require_spd

TWO_OVER_PI = 2.0 / np.pi
# Residual fraction of variance after an optimal two-point hedge; the
# k=2-optimal eigenvalue ratio locks at 1/GAMMA.
GAMMA = float(np.sqrt(1.0 - TWO_OVER_PI))


@dataclass(frozen=True)
class SolicitationPlan:
    """Water-filling allocation of m queries across prior eigendirections.

    allocations are in precision units of 1/sigma^2 and sum to the budget m;
    the first ``active_rank`` directions are equalized at ``common_level``
    and the rest keep their prior eigenvalues.
    """

    eigenbasis: np.ndarray
    prior_eigs: np.ndarray
    allocations: np.ndarray
    active_rank: int
    common_level: float
    posterior_eigs: np.ndarray
    noise_var: float
    budget: int

    def __post_init__(self):
        basis = np.array(self.eigenbasis, dtype=float)
        prior = np.array(self.prior_eigs, dtype=float)
        alloc = np.array(self.allocations, dtype=float)
        post = np.array(self.posterior_eigs, dtype=float)
        d = prior.size
        if basis.shape != (d, d) or alloc.shape != (d,) or post.shape != (d,):
            raise ValidationError("plan fields have inconsistent shapes")
        if np.any(alloc < -1e-12):
            raise ValidationError("allocations must be nonnegative")
        if abs(alloc.sum() - self.budget) > 1e-10 * max(1.0, self.budget):
            raise ValidationError("allocations must sum to the query budget")
        for a in (basis, prior, alloc, post):
            a.setflags(write=False)
        object.__setattr__(self, "eigenbasis", basis)
        object.__setattr__(self, "prior_eigs", prior)
        object.__setattr__(self, "allocations", alloc)
        object.__setattr__(self, "posterior_eigs", post)
        object.__setattr__(self, "active_rank", int(self.active_rank))
        object.__setattr__(self, "common_level", float(self.common_level))
        object.__setattr__(self, "noise_var", float(self.noise_var))
        object.__setattr__(self, "budget", int(self.budget))

    @property
    def d(self) -> int:
        return self.prior_eigs.size

    def posterior_cov(self) -> np.ndarray:
        return (self.eigenbasis * self.posterior_eigs) @ self.eigenbasis.T


def greedy_direction(cov: np.ndarray, noise_var: float) -> tuple[Query, float]:
    """Single most valuable query for the current covariance.

    The one-step trace reduction of querying unit vector y is
    0.5 * y'Sigma^2 y / (sigma^2 + y'Sigma y), maximized by any leading
    eigenvector; returns the canonicalized leading eigenvector and the gain
    0.5 * lambda_1^2 / (sigma^2 + lambda_1).
    """
    cov = require_spd(cov, name="cov")
    nv = float(noise_var)
    if not (nv > 0):
        raise ValidationError("noise_var must be positive")
    eigvals, eigvecs = eigh_descending(cov)
    lam1 = float(eigvals[0])
    v1 = eigvecs[:, 0]
    v1 = v1 / np.linalg.norm(v1)
    return Query(v1), 0.5 * lam1 * lam1 / (nv + lam1)


def waterfill(prior_cov: np.ndarray, m: int, noise_var: float) -> SolicitationPlan:
    """Optimal m-query allocation for a single-product assortment.

    Scans candidate ranks r = 1..min(m, d) for the unique r with
    lambda_r(0) > lambda(r) and (if r is not the cap) lambda(r) >=
    lambda_{r+1}(0), where lambda(r) = r / (sum_{i<=r} 1/lambda_i(0) +
    m/sigma^2) is the common posterior level.  Directions tied exactly at
    the level stay unqueried (strict inequality), matching the index
    tie-break.  m = 0 returns the prior unchanged with rank 0.
    """
    m = int(m)
    if m < 0:
        raise ValidationError("m must be a nonnegative integer")
    nv = float(noise_var)
    if not (nv > 0):
        raise ValidationError("noise_var must be positive")
    prior_cov = require_spd(prior_cov, name="prior covariance")
    lam0, basis = eigh_descending(prior_cov)
    if np.any(lam0 <= 0):
        raise ValidationError("prior covariance must be positive definite")
    d = lam0.size

    r_star = 0
    level = float(lam0[0])
    cap = min(m, d)
    inv_cumsum = np.cumsum(1.0 / lam0)
    for r in range(1, cap + 1):
        lam_r = r / (inv_cumsum[r - 1] + m / nv)
        if lam0[r - 1] > lam_r and (r == cap or lam_r >= lam0[r]):
            r_star, level = r, float(lam_r)
            break
    if m >= 1 and r_star == 0:
        raise NumericalError("water-filling rank scan found no valid rank")

    alloc = np.zeros(d)
    if r_star:
        alloc[:r_star] = nv * (1.0 / level - 1.0 / lam0[:r_star])
    post = lam0.copy()
    post[:r_star] = level
    return SolicitationPlan(
        eigenbasis=basis,
        prior_eigs=lam0,
        allocations=alloc,
        active_rank=r_star,
        common_level=level,
        posterior_eigs=post,
        noise_var=nv,
        budget=m,
    )


def _unit_diagonal_factor(spectrum: np.ndarray) -> np.ndarray:
    """m x m factor F with FF' = diag(spectrum) and unit-norm columns.

    The Gram matrix F'F then has unit diagonal and the prescribed spectrum;
    the constant diagonal is majorized by every spectrum of equal trace, so
    the construction is total.  Built by Givens rotations on column pairs
    straddling norm 1 (each rotation pins one column's norm to exactly 1).
    """
    spectrum = np.asarray(spectrum, dtype=float)
    m = spectrum.size
    f = np.zeros((m, m))
    np.fill_diagonal(f, np.sqrt(np.maximum(spectrum, 0.0)))
    tol = 1e-13
    for _ in range(2 * m):
        norms = np.sum(np.square(f), axis=0)
        low = np.nonzero(norms < 1.0 - tol)[0]
        high = np.nonzero(norms > 1.0 + tol)[0]
        if low.size == 0 or high.size == 0:
            break
        i, j = int(low[0]), int(high[0])
        aii, ajj = float(norms[i]), float(norms[j])
        aij = float(f[:, i] @ f[:, j])
        # Rotate columns (i, j) by angle with tan t solving
        # (ajj-1) t^2 - 2 aij t + (aii-1) = 0; stable root of smaller
        # magnitude keeps the rotation near the identity.
        root = np.sqrt(max(aij * aij - (ajj - 1.0) * (aii - 1.0), 0.0))
        denom = aij + root if aij >= 0 else aij - root
        t = (aii - 1.0) / denom
        c = 1.0 / np.sqrt(1.0 + t * t)
        s = t * c
        col_i = f[:, i].copy()
        col_j = f[:, j]
        f[:, i] = c * col_i - s * col_j
        f[:, j] = s * col_i + c * col_j
    norms = np.sum(np.square(f), axis=0)
    if np.max(np.abs(norms - 1.0)) > 1e-9:
        raise NumericalError("unit-diagonal synthesis failed to converge", last_iterate=f)
    return f


def realize_queries(plan: SolicitationPlan, m: int) -> list[Query]:
    """Explicit unit-norm query sequence implementing the plan's allocation.

    Returns m queries whose aggregate outer-product sum equals, in the prior
    eigenbasis, diag(plan.allocations).  Synthesized from the unit-diagonal
    factor of the allocation spectrum padded with zeros; columns are mapped
    through the eigenbasis and rescaled to exact unit norm.
    """
    m = int(m)
    alloc = plan.allocations
    if abs(float(alloc.sum()) - m) > 1e-8:
        raise ValidationError("allocation trace does not match the query count")
    if m == 0:
        return []
    d = alloc.size
    if d > m:
        if np.any(alloc[m:] > 1e-12):
            raise ValidationError("more active directions than queries; infeasible")
        spectrum = alloc[:m]
    else:
        spectrum = np.concatenate([alloc, np.zeros(m - d)])
    f = _unit_diagonal_factor(spectrum)
    if m >= d:
        w = f[:d, :]
    else:
        w = np.vstack([f, np.zeros((d - m, m))])
    dirs = plan.eigenbasis @ w
    dirs = dirs / np.linalg.norm(dirs, axis=0, keepdims=True)
    return [Query(dirs[:, t]) for t in range(m)]


def k2_plan(prior_var: float, d: int, m: int, noise_var: float) -> np.ndarray:
    """Optimal posterior eigenvalue profile for a two-product assortment.

    Isotropic priors only (the closed form does not extend).  Regimes:

    * m < d: the single-product water-filling profile is optimal.
    * d <= m <= m_hat: the leading direction is deliberately left at the
      prior variance (the pair will hedge it) and all precision goes to the
      other d-1 directions; the eigenvalue ratio grows as
      1 + m*prior_var/((d-1)*noise_var).
    * m >= d and m > m_hat: the ratio locks at the universal constant
      1/GAMMA ~ 1.659, with the total precision budget respected.

    m_hat = (1-GAMMA)/GAMMA * (d-1) * noise_var/prior_var.  Returns the d
    eigenvalues in descending order.
    """
    d = int(d)
    m = int(m)
    pv = float(prior_var)
    nv = float(noise_var)
    if d < 2:
        raise ValidationError("d must be at least 2")
    if m < 0:
        raise ValidationError("m must be nonnegative")
    if not (pv > 0 and nv > 0):
        raise ValidationError("prior_var and noise_var must be positive")

    if m < d:
        profile = waterfill(pv * np.eye(d), m, nv).posterior_eigs
        return np.sort(profile)[::-1]

    m_hat = (1.0 - GAMMA) / GAMMA * (d - 1) * nv / pv
    if m <= m_hat:
        lam_rest = 1.0 / (1.0 / pv + m / ((d - 1) * nv))
        lam_lead = pv
    else:
        total_precision = d / pv + m / nv
        lam_rest = (GAMMA + d - 1) / total_precision
        lam_lead = lam_rest / GAMMA
    return np.concatenate([[lam_lead], np.full(d - 1, lam_rest)])


def vos(prior_cov: np.ndarray, posterior_cov: np.ndarray) -> float:
    """Value of solicitation: half the trace drop from prior to posterior.

    Equals the telescoped sum of per-round greedy gains along any realized
    query path.
    """
    prior_cov = check_square_symmetric(prior_cov, name="prior covariance")
    posterior_cov = check_square_symmetric(posterior_cov, name="posterior covariance")
    return 0.5 * float(np.trace(prior_cov) - np.trace(posterior_cov))


def solicitation_lower_bound(prior_cov: np.ndarray, m: int, noise_var: float) -> float:
    """Lower bound d^2 / (2 (tr(Sigma0^{-1}) + m/sigma^2)) on the hedging gap.

    No m-query policy can leave less residual uncertainty than this;
    water-filling attains it once m >= max(d, m_bar).
    """
    prior_cov = require_spd(prior_cov, name="prior covariance")
    nv = float(noise_var)
    if not (nv > 0):
        raise ValidationError("noise_var must be positive")
    eigvals = np.linalg.eigvalsh(prior_cov)
    d = eigvals.size
    return d * d / (2.0 * (float(np.sum(1.0 / eigvals)) + m / nv))


class ThresholdReport(NamedTuple):
    """Anisotropy and activation diagnostics for the water-filling posterior.

    alpha:    isoperimetric ratio tr(S)/(d det(S)^{1/d}) >= 1 at the
              water-filling posterior; 1 exactly once m >= max(d, m_bar).
    m_bar:    activation threshold sigma^2 (d/lambda_min - tr(Sigma0^{-1}))^+.
    breadth_needed: k required to reach gap eps by assortment alone,
              (d det(Sigma0)^{1/d} / (2 eps))^{d/2}.
    """

    alpha: float
    m_bar: float
    breadth_needed: Callable[[float], float]


def thresholds_and_ratios(prior_cov: np.ndarray, m: int, noise_var: float) -> ThresholdReport:
    plan = waterfill(prior_cov, m, noise_var)
    post = plan.posterior_eigs
    d = post.size
    alpha = float(post.sum() / (d * np.exp(np.mean(np.log(post)))))
    lam0 = plan.prior_eigs
    m_bar = float(noise_var) * max(0.0, d / float(lam0.min()) - float(np.sum(1.0 / lam0)))
    det_root = float(np.exp(np.mean(np.log(lam0))))

    def breadth_needed(eps: float) -> float:
        if not (eps > 0):
            raise ValidationError("eps must be positive")
        return float((d * det_root / (2.0 * eps)) ** (d / 2.0))

    return ThresholdReport(alpha, m_bar, breadth_needed)


class R2Report(NamedTuple):
    ratio: float
    bound: float


def _d2(eigs: np.ndarray) -> float:
    """Two-point Gaussian distortion from the spectrum: tr - (2/pi) lambda_max."""
    return float(eigs.sum() - TWO_OVER_PI * eigs.max())


def r2_ratio(d: int, m: int, prior_var: float, noise_var: float) -> R2Report:
    """Penalty for using the single-product water-filling plan with k = 2.

    ratio = D2 at the water-filling posterior over D2 at the k=2-optimal
    posterior (isotropic prior; both via the closed spectral form).  bound =
    d (d - 2/pi) / (GAMMA + d - 1)^2; ratio <= bound always, ratio = 1 for
    m < d, and ratio = bound once m >= d and m exceeds the crossover m_hat.
    """
    d = int(d)
    wf = waterfill(float(prior_var) * np.eye(d), m, noise_var).posterior_eigs
    k2 = k2_plan(prior_var, d, m, noise_var)
    ratio = _d2(np.sort(wf)[::-1]) / _d2(k2)
    bound = d * (d - TWO_OVER_PI) / (GAMMA + d - 1) ** 2
    return R2Report(float(ratio), float(bound))
