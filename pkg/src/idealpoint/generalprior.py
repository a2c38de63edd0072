"""Grid-based posterior engine for non-Gaussian priors (d <= 3).

Discretizes the prior on a lattice of cell centers and multiplies in the
Gaussian response likelihood per round.  Deterministic by construction,
which makes the conservative-benchmark and total-variation checks exact-ish
rather than sampled twice over.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .belief import Query, Response, cov_from_information
from .errors import NumericalError, ValidationError
from .linalg import require_spd, spd_inverse, symmetrize

MIN_RESOLUTION = 32
MAX_GRID_DIM = 3
_DEFAULT_RESOLUTION = {1: 201, 2: 64, 3: 32}

PRIOR_KINDS = ("gaussian", "gaussian-mixture", "uniform-box")


@dataclass(frozen=True)
class PriorSpec:
    """A prior over the ideal point with finite second moments.

    One of three kinds: a Gaussian (weights/means/covs hold one component),
    a Gaussian mixture, or a uniform box (lo/hi per axis).  Construct via
    the classmethods.
    """

    kind: str
    weights: Optional[np.ndarray] = None
    means: Optional[np.ndarray] = None
    covs: Optional[np.ndarray] = None
    lo: Optional[np.ndarray] = None
    hi: Optional[np.ndarray] = None

    @classmethod
    def gaussian(cls, mean, cov) -> "PriorSpec":
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = require_spd(cov if np.ndim(cov) == 2 else np.atleast_2d(cov), name="prior cov")
        if cov.shape[0] != mean.size:
            raise ValidationError("mean and cov shapes disagree")
        return cls(
            kind="gaussian",
            weights=np.array([1.0]),
            means=mean[None, :].copy(),
            covs=cov[None, :, :].copy(),
        )

    @classmethod
    def gaussian_mixture(cls, weights, means, covs) -> "PriorSpec":
        weights = np.asarray(weights, dtype=float)
        means = np.atleast_2d(np.asarray(means, dtype=float))
        if weights.ndim != 1 or weights.size != means.shape[0]:
            raise ValidationError("mixture component counts disagree")
        n_comp, d = means.shape
        covs = np.asarray(covs, dtype=float)
        if d == 1 and covs.shape in ((n_comp,), (n_comp, 1)):
            covs = covs.reshape(n_comp, 1, 1)  # per-component scalar variances
        if covs.shape != (n_comp, d, d):
            raise ValidationError("mixture covs must have shape (components, d, d)")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValidationError("mixture weights must be positive and sum to 1")
        for c in covs:
            require_spd(c, name="mixture component cov")
        return cls(kind="gaussian-mixture", weights=weights.copy(), means=means.copy(), covs=covs.copy())

    @classmethod
    def uniform_box(cls, lo, hi) -> "PriorSpec":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo) or not np.all(np.isfinite(lo) & np.isfinite(hi)):
            raise ValidationError("box bounds must be finite with hi > lo")
        return cls(kind="uniform-box", lo=lo.copy(), hi=hi.copy())

    @property
    def d(self) -> int:
        if self.kind == "uniform-box":
            return self.lo.size
        return self.means.shape[1]

    def mean(self) -> np.ndarray:
        if self.kind == "uniform-box":
            return 0.5 * (self.lo + self.hi)
        return self.weights @ self.means

    def cov(self) -> np.ndarray:
        if self.kind == "uniform-box":
            return np.diag(np.square(self.hi - self.lo) / 12.0)
        mu = self.mean()
        total = np.zeros((self.d, self.d))
        for w, m, c in zip(self.weights, self.means, self.covs):
            dm = m - mu
            total += w * (c + np.outer(dm, dm))
        return symmetrize(total)

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        n = 1 if size is None else int(size)
        if self.kind == "uniform-box":
            out = rng.uniform(self.lo, self.hi, size=(n, self.d))
        else:
            comps = rng.choice(self.weights.size, size=n, p=self.weights)
            z = rng.standard_normal((n, self.d))
            out = np.empty((n, self.d))
            for c in range(self.weights.size):
                mask = comps == c
                if mask.any():
                    chol = np.linalg.cholesky(self.covs[c])
                    out[mask] = self.means[c] + z[mask] @ chol.T
        return out[0] if size is None else out

    def density(self, x: np.ndarray) -> np.ndarray:
        """Pointwise prior density at the rows of x."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "uniform-box":
            inside = np.all((x >= self.lo) & (x <= self.hi), axis=1)
            return inside / float(np.prod(self.hi - self.lo))
        dens = np.zeros(x.shape[0])
        for w, m, c in zip(self.weights, self.means, self.covs):
            chol = np.linalg.cholesky(c)
            y = np.linalg.solve(chol, (x - m).T).T
            quad = np.sum(np.square(y), axis=1)
            logdet = 2.0 * np.sum(np.log(np.diag(chol)))
            norm = np.exp(-0.5 * (quad + logdet + self.d * np.log(2.0 * np.pi)))
            dens += w * norm
        return dens

    def mass_outside_box(self, lo: np.ndarray, hi: np.ndarray) -> float:
        """Upper bound on prior mass outside the axis-aligned box.

        Gaussian kinds use the union bound over per-axis marginal tails;
        the uniform kind is exact.
        """
        if self.kind == "uniform-box":
            overlap = np.clip(np.minimum(hi, self.hi) - np.maximum(lo, self.lo), 0.0, None)
            return 1.0 - float(np.prod(overlap / (self.hi - self.lo)))
        total = 0.0
        for w, m, c in zip(self.weights, self.means, self.covs):
            sd = np.sqrt(np.diag(c))
            lo_tail = ndtr((lo - m) / sd)
            hi_tail = 1.0 - ndtr((hi - m) / sd)
            total += w * float(np.sum(lo_tail + hi_tail))
        return total


@dataclass(frozen=True)
class GridPosterior:
    """Posterior represented by normalized weights on a lattice of cell centers.

    Also accumulates the query Gram matrix S and the (constant) noise
    variance across updates, which the Gaussian-comparison diagnostics need.
    """

    axes: tuple
    weights: np.ndarray
    query_gram: np.ndarray
    noise_var: Optional[float]

    def __post_init__(self):
        axes = []
        for a in self.axes:
            a = np.array(a, dtype=float)
            if a.size < MIN_RESOLUTION:
                raise ValidationError(f"resolution must be >= {MIN_RESOLUTION} per axis")
            if np.any(np.diff(a) <= 0):
                raise ValidationError("axis nodes must be strictly increasing")
            a.setflags(write=False)
            axes.append(a)
        d = len(axes)
        if not (1 <= d <= MAX_GRID_DIM):
            raise ValidationError(f"grid supports 1..{MAX_GRID_DIM} dimensions")
        n_total = int(np.prod([a.size for a in axes]))
        w = np.array(self.weights, dtype=float)
        if w.shape != (n_total,):
            raise ValidationError("weights length must equal the node count")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must be nonnegative and sum to 1")
        gram = np.array(self.query_gram, dtype=float)
        if gram.shape != (d, d):
            raise ValidationError("query_gram must be d x d")
        w.setflags(write=False)
        gram.setflags(write=False)
        object.__setattr__(self, "axes", tuple(axes))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "query_gram", gram)

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def resolution(self) -> tuple:
        return tuple(a.size for a in self.axes)

    @functools.cached_property
    def nodes(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @functools.cached_property
    def cell_volume(self) -> float:
        return float(np.prod([a[1] - a[0] for a in self.axes]))


def _cell_centers(lo: float, hi: float, n: int) -> np.ndarray:
    step = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * step


def grid_init(
    prior: PriorSpec,
    bounds: Optional[Sequence] = None,
    resolution=None,
) -> GridPosterior:
    """Discretize a prior onto a lattice of cell centers.

    Default bounds are mean +- 6 standard deviations per axis (the box for a
    uniform prior).  Raises if more than 1e-4 of the prior mass falls
    outside the requested bounds: widen them.
    """
    d = prior.d
    if d > MAX_GRID_DIM:
        raise ValidationError(f"grid supports at most d={MAX_GRID_DIM}")
    if resolution is None:
        resolution = _DEFAULT_RESOLUTION[d]
    res = [int(resolution)] * d if np.isscalar(resolution) else [int(r) for r in resolution]
    if len(res) != d or any(r < MIN_RESOLUTION for r in res):
        raise ValidationError(f"resolution must be >= {MIN_RESOLUTION} per axis")

    if bounds is None:
        if prior.kind == "uniform-box":
            lo, hi = prior.lo.copy(), prior.hi.copy()
        else:
            mu = prior.mean()
            sd = np.sqrt(np.diag(prior.cov()))
            lo, hi = mu - 6.0 * sd, mu + 6.0 * sd
    else:
        b = np.asarray(bounds, dtype=float)
        if b.shape != (d, 2):
            raise ValidationError("bounds must be a (d, 2) array of (lo, hi) pairs")
        lo, hi = b[:, 0], b[:, 1]
        if np.any(hi <= lo):
            raise ValidationError("bounds must satisfy hi > lo")

    outside = prior.mass_outside_box(lo, hi)
    if outside > 1e-4:
        raise ValidationError(
            f"prior mass {outside:.3g} lies outside the grid bounds; widen the bounds"
        )

    axes = tuple(_cell_centers(lo[i], hi[i], res[i]) for i in range(d))
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=1)
    w = prior.density(nodes)
    total = w.sum()
    if not (total > 0):
        raise ValidationError("prior density vanishes on the grid; widen the bounds")
    return GridPosterior(axes, w / total, np.zeros((d, d)), None)


def grid_update(post: GridPosterior, q: Query, z, noise_var: float) -> GridPosterior:
    """Multiply in the Gaussian response likelihood at each node and renormalize.

    Likelihood kernels are evaluated without a max-shift on purpose: a total
    weight of zero means the response sits so far outside the grid's support
    (~38 sigma) that the posterior is not representable, which is an error.
    """
    nv = float(noise_var)
    if not (nv > 0):
        raise ValidationError("noise_var must be positive")
    if post.noise_var is not None and abs(post.noise_var - nv) > 1e-12 * max(nv, 1.0):
        raise ValidationError("noise_var must be constant across grid updates")
    zv = z.value if isinstance(z, Response) else float(z)
    y = q.direction
    if y.size != post.d:
        raise ValidationError("query dimension does not match grid dimension")
    proj = post.nodes @ y
    lik = np.exp(-0.5 * np.square(zv - proj) / nv)
    w = post.weights * lik
    total = w.sum()
    if not (total > 0):
        raise NumericalError("likelihood underflow: response far outside grid support")
    return GridPosterior(post.axes, w / total, post.query_gram + np.outer(y, y), nv)


def moments(post: GridPosterior) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mean and covariance of the grid posterior (cov symmetric PSD)."""
    mean = post.weights @ post.nodes
    centered = post.nodes - mean
    cov = symmetrize((centered * post.weights[:, None]).T @ centered)
    return mean, cov


class ConservativeCheck(NamedTuple):
    """Comparison of general-prior residual uncertainty vs the Gaussian benchmark.

    lhs is the Monte Carlo mean (over simulated customers) of the grid
    posterior's covariance trace; rhs is the trace under the Gaussian prior
    with matching moments.  The model predicts lhs <= rhs for non-adaptive
    queries.
    """

    lhs: float
    rhs: float
    lhs_std_error: float


def _simulate_grid_posteriors(prior, queries, noise_var, trials, rng, resolution, bounds):
    base = grid_init(prior, bounds=bounds, resolution=resolution)
    sigma = float(np.sqrt(noise_var))
    means = np.empty((trials, prior.d))
    traces = np.empty(trials)
    sq_errors = np.empty(trials)
    for t in range(trials):
        theta = prior.sample(rng)
        post = base
        for q in queries:
            z = float(theta @ q.direction) + rng.normal(0.0, sigma)
            post = grid_update(post, q, z, noise_var)
        mean, cov = moments(post)
        means[t] = mean
        traces[t] = np.trace(cov)
        sq_errors[t] = float(np.sum(np.square(theta - mean)))
    return means, traces, sq_errors


def conservative_check(
    prior: PriorSpec,
    queries: Sequence[Query],
    noise_var: float,
    trials: int,
    rng: np.random.Generator,
    resolution=None,
    bounds=None,
) -> ConservativeCheck:
    trials = int(trials)
    if trials < 1:
        raise ValidationError("trials must be positive")
    _, traces, _ = _simulate_grid_posteriors(
        prior, list(queries), float(noise_var), trials, rng, resolution, bounds
    )
    rhs = float(np.trace(cov_from_information(prior.cov(), list(queries), noise_var)))
    lhs = float(traces.mean())
    se = float(traces.std(ddof=1) / np.sqrt(trials)) if trials > 1 else float("inf")
    return ConservativeCheck(lhs, rhs, se)


class SolicitationValueEstimate(NamedTuple):
    """Monte Carlo estimate of the value of solicitation under a general prior.

    estimate:    half the trace of the sample covariance of posterior means.
    complement:  half of (prior trace - mean posterior trace); equals
                 ``estimate`` in expectation by the law of total variance.
    complement_se: standard error of ``complement``.
    identity_gap: mean of per-trial ||theta - mean||^2 - tr(cov); zero in
                 expectation, a paired check of the same identity.
    identity_gap_se: standard error of ``identity_gap``.
    """

    estimate: float
    complement: float
    complement_se: float
    identity_gap: float
    identity_gap_se: float


def vos_general(
    prior: PriorSpec,
    queries: Sequence[Query],
    noise_var: float,
    trials: int,
    rng: np.random.Generator,
    resolution=None,
    bounds=None,
) -> SolicitationValueEstimate:
    trials = int(trials)
    if trials < 1:
        raise ValidationError("trials must be positive")
    means, traces, sq_errors = _simulate_grid_posteriors(
        prior, list(queries), float(noise_var), trials, rng, resolution, bounds
    )
    if trials > 1:
        centered = means - means.mean(axis=0)
        mean_var = float(np.sum(np.square(centered)) / (trials - 1))
    else:
        mean_var = 0.0
    prior_trace = float(np.trace(prior.cov()))
    complement = 0.5 * (prior_trace - float(traces.mean()))
    complement_se = 0.5 * float(traces.std(ddof=1) / np.sqrt(trials)) if trials > 1 else float("inf")
    gaps = sq_errors - traces
    gap_se = float(gaps.std(ddof=1) / np.sqrt(trials)) if trials > 1 else float("inf")
    return SolicitationValueEstimate(
        estimate=0.5 * mean_var,
        complement=complement,
        complement_se=complement_se,
        identity_gap=float(gaps.mean()),
        identity_gap_se=gap_se,
    )


def tv_to_gaussian(post: GridPosterior) -> float:
    """Discretized total variation between the grid posterior and its
    Bernstein-von-Mises Gaussian surrogate N(mean, sigma^2 S^{-1}).

    Cell masses for the Gaussian use the midpoint rule (density at the node
    times cell volume); mass falling outside the grid box counts fully
    toward the distance, so disjoint supports score 1.  Requires d <= 2 and
    a nonsingular accumulated query Gram matrix.
    """
    if post.d > 2:
        raise ValidationError("tv_to_gaussian supports d <= 2")
    if post.noise_var is None:
        raise ValidationError("posterior has no recorded updates")
    gram = post.query_gram
    if np.linalg.eigvalsh(symmetrize(gram)).min() <= 0:
        raise NumericalError("query Gram matrix is singular; need full-rank queries")
    sigma_tilde = post.noise_var * spd_inverse(gram, name="query Gram matrix")
    mean, _ = moments(post)
    chol = np.linalg.cholesky(sigma_tilde)
    diff = np.linalg.solve(chol, (post.nodes - mean).T)
    quad = np.sum(np.square(diff), axis=0)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    dens = np.exp(-0.5 * (quad + logdet + post.d * np.log(2.0 * np.pi)))
    gauss_mass = dens * post.cell_volume
    tv = 0.5 * (float(np.abs(post.weights - gauss_mass).sum()) + max(0.0, 1.0 - float(gauss_mass.sum())))
    return min(1.0, tv)
