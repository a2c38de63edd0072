"""Seeded Monte Carlo harness comparing solicitation depth to assortment breadth.

A scenario sweeps either the number of queries m (one recommendation), the
number of recommended products k (no queries), or a joint grid, measuring
the distance between the chosen product and the simulated customer's ideal
point.  Per-trial substreams are derived counter-style from (master seed,
point index, trial index), so results are byte-reproducible and trivially
parallelizable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .assortment import best_pair, customer_choice
from .belief import GaussianBelief, _rank_one_step
from .errors import ValidationError
from .generalprior import PriorSpec
from .quantize import Assortment, lloyd_kd, product_quantizer
from .solicitation import realize_queries, waterfill

MODES = ("depth", "breadth", "joint")
ASSORTMENT_METHODS = ("closed-form", "product-quantizer", "lloyd-refined")
CSV_COLUMNS = ("mode", "d", "m", "k", "trials", "seed", "mean_distance", "p25", "p75", "std_error")

LLOYD_REFINE_SAMPLES = 20_000

# Substream roles under the master seed: trials vs per-point refinement draws.
_TRIAL_STREAM = 0
_REFINE_STREAM = 1


@dataclass(frozen=True)
class Scenario:
    """One experiment definition: prior, channel, sweep, and seeding."""

    mode: str
    d: int
    prior: PriorSpec
    noise_var: float
    values: tuple
    trials: int
    master_seed: int
    assortment_method: str = "product-quantizer"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}")
        if self.assortment_method not in ASSORTMENT_METHODS:
            raise ValidationError(f"assortment_method must be one of {ASSORTMENT_METHODS}")
        d = int(self.d)
        if d < 1:
            raise ValidationError("d must be >= 1")
        if self.prior.kind != "gaussian":
            raise ValidationError("the simulation harness requires a gaussian prior")
        if self.prior.d != d:
            raise ValidationError("prior dimension does not match d")
        if not (float(self.noise_var) > 0):
            raise ValidationError("noise_var must be positive")
        values = tuple(int(v) for v in self.values)
        if not values:
            raise ValidationError("values must be nonempty")
        if list(values) != sorted(values):
            raise ValidationError("sweep values must be sorted ascending")
        min_allowed = 1 if self.mode in ("breadth", "joint") else 0
        if values[0] < min_allowed:
            what = "k values must be >= 1" if min_allowed else "m values must be >= 0"
            raise ValidationError(what)
        trials = int(self.trials)
        if trials < 1:
            raise ValidationError("trials must be >= 1")
        seed = int(self.master_seed)
        if seed < 0:
            raise ValidationError("master_seed must be nonnegative")
        object.__setattr__(self, "mode", str(self.mode))
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "noise_var", float(self.noise_var))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "trials", trials)
        object.__setattr__(self, "master_seed", seed)

    def sweep_points(self) -> list[tuple[int, int]]:
        """(m, k) pairs visited by the sweep, in emission order."""
        if self.mode == "depth":
            return [(m, 1) for m in self.values]
        if self.mode == "breadth":
            return [(0, k) for k in self.values]
        return [(m, k) for m in self.values for k in self.values]


@dataclass(frozen=True)
class TrialRecord:
    """One simulated customer episode."""

    theta: np.ndarray
    m: int
    k: int
    chosen_index: int
    distance: float
    squared_loss: float

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        theta.setflags(write=False)
        if abs(self.distance * self.distance - self.squared_loss) > 1e-10 * max(1.0, self.squared_loss):
            raise ValidationError("distance^2 must equal squared_loss")
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class SweepSummary:
    """Distance statistics at one (m, k) sweep point."""

    mode: str
    d: int
    m: int
    k: int
    trials: int
    seed: int
    mean_distance: float
    p25: float
    p75: float
    std_error: float


@dataclass(frozen=True)
class PointContext:
    """Per-point precomputation: everything that does not depend on responses.

    The covariance path, Kalman gains, and the origin-centered assortment are
    response-independent, so trials only propagate the posterior mean and
    translate the assortment.
    """

    m: int
    k: int
    prior_mean: np.ndarray
    sigma: float
    queries: tuple
    kappas: tuple
    posterior_cov: np.ndarray
    base_points: np.ndarray


def trial_rng(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    """Independent substream for one trial of one sweep point."""
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(_TRIAL_STREAM, point_index, trial_index))
    )


def _base_assortment(
    cov: np.ndarray, k: int, method: str, master_seed: int, m: int, noise_var: float
) -> np.ndarray:
    """Origin-centered k-point assortment for a posterior covariance."""
    if k == 1:
        return np.zeros((1, cov.shape[0]))
    if k == 2:
        pair = best_pair(GaussianBelief(np.zeros(cov.shape[0]), cov, noise_var))
        return pair.points
    if method == "closed-form":
        raise ValidationError("closed-form assortments exist only for k <= 2")
    base = product_quantizer(cov, k)
    if method == "lloyd-refined":
        rng = np.random.default_rng(
            np.random.SeedSequence(master_seed, spawn_key=(_REFINE_STREAM, m, k))
        )
        base = lloyd_kd(cov, k, base, LLOYD_REFINE_SAMPLES, rng).assortment
    return np.array(base.points)


def prepare_point(scenario: Scenario, m: int, k: int) -> PointContext:
    """Build the response-independent trial context for a sweep point."""
    m, k = int(m), int(k)
    if m < 0 or k < 1:
        raise ValidationError("need m >= 0 and k >= 1")
    prior_mean = scenario.prior.mean()
    prior_cov = scenario.prior.cov()
    nv = scenario.noise_var
    queries = []
    kappas = []
    cov = prior_cov
    if m > 0:
        plan = waterfill(prior_cov, m, nv)
        for q in realize_queries(plan, m):
            kappa, cov = _rank_one_step(cov, q.direction, nv)
            queries.append(q.direction)
            kappas.append(kappa)
    base = _base_assortment(cov, k, scenario.assortment_method, scenario.master_seed, m, nv)
    return PointContext(
        m=m,
        k=k,
        prior_mean=prior_mean,
        sigma=float(np.sqrt(nv)),
        queries=tuple(queries),
        kappas=tuple(kappas),
        posterior_cov=cov,
        base_points=base,
    )


def run_trial(
    scenario: Scenario,
    m: int,
    k: int,
    theta: np.ndarray,
    rng: np.random.Generator,
    context: Optional[PointContext] = None,
) -> TrialRecord:
    """Simulate one customer episode at sweep point (m, k).

    Solicits with the water-filling query sequence, updates the posterior
    mean from the noisy responses (same arithmetic as kalman_update), builds
    the k-assortment at the posterior mean, and records the chosen product's
    distance from theta.  Deterministic given (theta, rng state).
    """
    ctx = context if context is not None else prepare_point(scenario, m, k)
    theta = np.asarray(theta, dtype=float)
    mu = ctx.prior_mean
    for y, kappa in zip(ctx.queries, ctx.kappas):
        z = float(theta @ y) + rng.normal(0.0, ctx.sigma)
        mu = mu + kappa * (z - float(y @ mu))
    idx, loss = customer_choice(theta, Assortment(ctx.base_points + mu))
    return TrialRecord(
        theta=theta,
        m=ctx.m,
        k=ctx.k,
        chosen_index=idx,
        distance=float(np.sqrt(loss)),
        squared_loss=loss,
    )


def run_sweep(scenario: Scenario) -> list[SweepSummary]:
    """Run every sweep point of the scenario and summarize distances."""
    summaries = []
    for point_index, (m, k) in enumerate(scenario.sweep_points()):
        ctx = prepare_point(scenario, m, k)
        distances = np.empty(scenario.trials)
        for t in range(scenario.trials):
            rng = trial_rng(scenario.master_seed, point_index, t)
            theta = scenario.prior.sample(rng)
            record = run_trial(scenario, m, k, theta, rng, context=ctx)
            distances[t] = record.distance
        if scenario.trials > 1:
            std_error = float(distances.std(ddof=1) / np.sqrt(scenario.trials))
        else:
            std_error = 0.0
        summaries.append(
            SweepSummary(
                mode=scenario.mode,
                d=scenario.d,
                m=m,
                k=k,
                trials=scenario.trials,
                seed=scenario.master_seed,
                mean_distance=float(distances.mean()),
                p25=float(np.percentile(distances, 25)),
                p75=float(np.percentile(distances, 75)),
                std_error=std_error,
            )
        )
    return summaries


def emit_csv(summaries: Sequence[SweepSummary], path) -> None:
    """Write summaries as CSV with the fixed column order, one row per point."""
    lines = [",".join(CSV_COLUMNS)]
    for s in summaries:
        lines.append(
            ",".join(
                [
                    s.mode,
                    str(s.d),
                    str(s.m),
                    str(s.k),
                    str(s.trials),
                    str(s.seed),
                    repr(float(s.mean_distance)),
                    repr(float(s.p25)),
                    repr(float(s.p75)),
                    repr(float(s.std_error)),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_csv(path) -> list[SweepSummary]:
    """Read back a summaries CSV produced by :func:`emit_csv`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or tuple(lines[0].split(",")) != CSV_COLUMNS:
        raise ValidationError(f"unrecognized CSV header; expected {','.join(CSV_COLUMNS)}")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValidationError(f"malformed CSV row: {ln!r}")
        out.append(
            SweepSummary(
                mode=parts[0],
                d=int(parts[1]),
                m=int(parts[2]),
                k=int(parts[3]),
                trials=int(parts[4]),
                seed=int(parts[5]),
                mean_distance=float(parts[6]),
                p25=float(parts[7]),
                p75=float(parts[8]),
                std_error=float(parts[9]),
            )
        )
    return out
