"""Monte Carlo verification of the limit behaviour of the cross-validated
error: univariate and multivariate normality of the scaled deviations, and
their self-normalized versions with plug-in scales.

Each replication samples a fresh dataset with a seed derived from the
master seed and the replication index, so results do not depend on
execution order and any single replication can be reproduced in isolation.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NearSingularMatrixError, ValidationError
from .estimator import (
    DEFAULT_SCHEDULE,
    EpsilonSchedule,
    asymptotic_covariance_estimate,
    asymptotic_sd_estimate,
    cv_prediction_error,
)
from .linalg import inv_sqrt_symmetric
from .model import FactorSubset, JointDistribution, sample
from .oracle import (
    asymptotic_covariance,
    asymptotic_variance,
    balanced_penalty,
    optimal_predictor,
    prediction_error,
)

# Asymptotic Kolmogorov-Smirnov critical value at the 1% level is
# 1.63 / sqrt(M); the self-normalized variants get a looser cap because
# the plug-in scale adds noise of its own.
KS_LEVEL_CONSTANT_1PCT = 1.63
SELF_NORM_KS_LIMIT = 0.065
VAR_RATIO_RTOL = 0.10
DEGENERATE_LIMIT = 1e-9
COV_ENTRY_LIMIT_FACTOR = 0.15


def derive_seed(master_seed: int, replication: int) -> int:
    """Counter-mode mix of (master seed, replication index) into a sampler
    seed; no state is shared between replications."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(replication),))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ReplicationResult:
    """One replication: scaled deviations and plug-in scales per subset."""

    replication: int
    seed: int
    z: tuple[float, ...]
    sd_estimates: tuple[float, ...]
    covariance_estimate: np.ndarray | None = None


def _replicate(
    dist: JointDistribution,
    subsets: Sequence[FactorSubset],
    n_records: int,
    n_folds: int,
    schedule: EpsilonSchedule,
    oracle_errors: Sequence[float],
    master_seed: int,
    replication: int,
) -> ReplicationResult:
    seed = derive_seed(master_seed, replication)
    dataset = sample(dist, n_records, seed)
    root_n = math.sqrt(n_records)
    z = tuple(
        root_n
        * (cv_prediction_error(dataset, n_folds, s, schedule).value - err)
        for s, err in zip(subsets, oracle_errors)
    )
    sds = tuple(
        asymptotic_sd_estimate(dataset, n_folds, s, schedule) for s in subsets
    )
    cov = None
    if len(subsets) > 1:
        cov = asymptotic_covariance_estimate(dataset, n_folds, subsets, schedule)
    return ReplicationResult(replication, seed, z, sds, cov)


def _replicate_args(args) -> ReplicationResult:
    return _replicate(*args)


def run_replications(
    dist: JointDistribution,
    subsets: Sequence[FactorSubset],
    n_records: int,
    n_folds: int,
    schedule: EpsilonSchedule,
    n_replications: int,
    master_seed: int,
    workers: int = 1,
) -> list[ReplicationResult]:
    """Replications 1..M, each on a fresh dataset; deterministic per-index
    seeds, results ordered by replication index."""
    if n_replications < 1:
        raise ValidationError("need at least one replication")
    subsets = list(subsets)
    psi = balanced_penalty(dist)
    oracle_errors = [
        prediction_error(dist, psi, optimal_predictor(dist, psi, s)) for s in subsets
    ]
    arglist = [
        (dist, subsets, n_records, n_folds, schedule, oracle_errors, master_seed, m)
        for m in range(1, n_replications + 1)
    ]
    if workers <= 1:
        return [_replicate_args(a) for a in arglist]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_replicate_args, arglist, chunksize=32))


def normal_cdf(z: float) -> float:
    """Standard normal CDF."""
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def ks_statistic(samples: Sequence[float], mean: float = 0.0, sd: float = 1.0) -> float:
    """Sup distance between the empirical CDF of (samples - mean)/sd and
    the standard normal CDF."""
    if sd <= 0:
        raise ValidationError(f"sd must be positive, got {sd}")
    arr = np.sort((np.asarray(samples, dtype=np.float64) - mean) / sd)
    if arr.size == 0:
        raise ValidationError("ks_statistic needs a nonempty sample")
    cdf = np.array([normal_cdf(v) for v in arr])
    n = arr.size
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


@dataclass(frozen=True)
class UnivariateCheck:
    """Normality checks for one subset's scaled deviations."""

    subset: tuple[int, ...]
    n_replications: int
    z_mean: float
    z_var: float
    oracle_var: float
    degenerate: bool
    ks_oracle: float | None
    ks_self_norm: float | None
    var_ratio: float | None
    ks_limit: float
    self_norm_limit: float
    var_rtol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "subset": list(self.subset),
            "n_replications": self.n_replications,
            "z_mean": self.z_mean,
            "z_var": self.z_var,
            "oracle_var": self.oracle_var,
            "degenerate": self.degenerate,
            "ks_oracle": self.ks_oracle,
            "ks_self_norm": self.ks_self_norm,
            "var_ratio": self.var_ratio,
            "ks_limit": self.ks_limit,
            "self_norm_limit": self.self_norm_limit,
            "var_rtol": self.var_rtol,
            "passed": self.passed,
        }


def clt_check(
    results: Sequence[ReplicationResult],
    oracle_sigma2: float,
    subset: FactorSubset,
    subset_index: int = 0,
    ks_level_constant: float = KS_LEVEL_CONSTANT_1PCT,
    self_norm_limit: float = SELF_NORM_KS_LIMIT,
    var_rtol: float = VAR_RATIO_RTOL,
    degenerate_limit: float = DEGENERATE_LIMIT,
) -> UnivariateCheck:
    """Compare one subset's scaled deviations against their limit law.

    With a positive oracle variance: KS of z/sigma against the standard
    normal, KS of the per-replication self-normalized values, and the
    empirical-to-oracle variance ratio.  A zero oracle variance routes to
    the degenerate branch, which requires every deviation to vanish.
    """
    m = len(results)
    z = np.array([res.z[subset_index] for res in results])
    if oracle_sigma2 < 0:
        raise ValidationError("oracle variance cannot be negative")
    if oracle_sigma2 == 0.0:
        ok = bool(np.max(np.abs(z)) < degenerate_limit) if m else True
        return UnivariateCheck(
            subset=subset.indices,
            n_replications=m,
            z_mean=float(z.mean()),
            z_var=float(z.var(ddof=1)) if m > 1 else 0.0,
            oracle_var=0.0,
            degenerate=True,
            ks_oracle=None,
            ks_self_norm=None,
            var_ratio=None,
            ks_limit=float("nan"),
            self_norm_limit=self_norm_limit,
            var_rtol=var_rtol,
            passed=ok,
        )
    ks_limit = ks_level_constant / math.sqrt(m)
    ks_oracle = ks_statistic(z, 0.0, math.sqrt(oracle_sigma2))
    self_norm = [
        res.z[subset_index] / res.sd_estimates[subset_index] for res in results
    ]
    ks_self = ks_statistic(self_norm, 0.0, 1.0)
    z_var = float(z.var(ddof=1)) if m > 1 else float("nan")
    ratio = z_var / oracle_sigma2
    passed = (
        ks_oracle < ks_limit
        and ks_self < self_norm_limit
        and abs(ratio - 1.0) <= var_rtol
    )
    return UnivariateCheck(
        subset=subset.indices,
        n_replications=m,
        z_mean=float(z.mean()),
        z_var=z_var,
        oracle_var=oracle_sigma2,
        degenerate=False,
        ks_oracle=ks_oracle,
        ks_self_norm=ks_self,
        var_ratio=ratio,
        ks_limit=ks_limit,
        self_norm_limit=self_norm_limit,
        var_rtol=var_rtol,
        passed=passed,
    )


@dataclass(frozen=True)
class MultivariateCheck:
    """Joint checks across subsets: covariance match and whitened margins."""

    subsets: tuple[tuple[int, ...], ...]
    n_replications: int
    sample_cov: np.ndarray
    oracle_cov: np.ndarray
    max_abs_discrepancy: float
    frobenius_discrepancy: float
    entry_limit: float
    whitened_ks: tuple[float, ...] | None
    whitening_skipped: bool
    ks_limit: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "subsets": [list(s) for s in self.subsets],
            "n_replications": self.n_replications,
            "sample_cov": self.sample_cov.tolist(),
            "oracle_cov": self.oracle_cov.tolist(),
            "max_abs_discrepancy": self.max_abs_discrepancy,
            "frobenius_discrepancy": self.frobenius_discrepancy,
            "entry_limit": self.entry_limit,
            "whitened_ks": list(self.whitened_ks) if self.whitened_ks else None,
            "whitening_skipped": self.whitening_skipped,
            "ks_limit": self.ks_limit,
            "passed": self.passed,
        }


def multivariate_check(
    results: Sequence[ReplicationResult],
    oracle_cov: np.ndarray,
    subsets: Sequence[FactorSubset],
    entry_limit_factor: float = COV_ENTRY_LIMIT_FACTOR,
    ks_limit: float = SELF_NORM_KS_LIMIT,
) -> MultivariateCheck:
    """Compare the joint law of the deviation vector against its limit.

    (a) every entry of the sample covariance must match the oracle matrix
    within ``entry_limit_factor`` times the largest oracle variance;
    (b) each replication vector is whitened by its own plug-in covariance
    and every coordinate is KS-tested against the standard normal.  A
    near-singular plug-in matrix skips the whitening with a flag.
    """
    oracle_cov = np.asarray(oracle_cov, dtype=np.float64)
    s = oracle_cov.shape[0]
    if s < 2:
        raise ValidationError("multivariate check needs at least two subsets")
    zmat = np.array([res.z for res in results])  # (M, s)
    m = zmat.shape[0]
    sample_cov = np.cov(zmat.T, ddof=1)
    disc = np.abs(sample_cov - oracle_cov)
    entry_limit = entry_limit_factor * float(oracle_cov.diagonal().max())

    whitened_ks: tuple[float, ...] | None = None
    skipped = False
    try:
        whitened = np.array(
            [
                inv_sqrt_symmetric(res.covariance_estimate) @ np.asarray(res.z)
                for res in results
            ]
        )
        whitened_ks = tuple(
            ks_statistic(whitened[:, i], 0.0, 1.0) for i in range(s)
        )
    except NearSingularMatrixError:
        skipped = True

    entries_ok = bool(disc.max() <= entry_limit)
    whitening_ok = (not skipped) and all(k < ks_limit for k in whitened_ks)
    return MultivariateCheck(
        subsets=tuple(sub.indices for sub in subsets),
        n_replications=m,
        sample_cov=sample_cov,
        oracle_cov=oracle_cov,
        max_abs_discrepancy=float(disc.max()),
        frobenius_discrepancy=float(np.sqrt((disc**2).sum())),
        entry_limit=entry_limit,
        whitened_ks=whitened_ks,
        whitening_skipped=skipped,
        ks_limit=ks_limit,
        passed=entries_ok and whitening_ok,
    )


@dataclass(frozen=True)
class CltReport:
    """Full Monte Carlo summary for one scenario."""

    scenario: str
    n_records: int
    n_folds: int
    n_replications: int
    master_seed: int
    eps_c0: float
    eps_beta: float
    subsets: tuple[tuple[int, ...], ...]
    oracle_errors: tuple[float, ...]
    univariate: tuple[UnivariateCheck, ...]
    multivariate: MultivariateCheck | None = None

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "n_records": self.n_records,
            "n_folds": self.n_folds,
            "n_replications": self.n_replications,
            "master_seed": self.master_seed,
            "eps_c0": self.eps_c0,
            "eps_beta": self.eps_beta,
            "subsets": [list(s) for s in self.subsets],
            "oracle_errors": list(self.oracle_errors),
            "univariate": [u.to_dict() for u in self.univariate],
            "multivariate": self.multivariate.to_dict() if self.multivariate else None,
        }

    @property
    def passed(self) -> bool:
        ok = all(u.passed for u in self.univariate)
        if self.multivariate is not None:
            ok = ok and self.multivariate.passed
        return ok


def verify_clt(
    dist: JointDistribution,
    subsets: Sequence[FactorSubset],
    n_records: int,
    n_folds: int,
    n_replications: int,
    master_seed: int,
    schedule: EpsilonSchedule = DEFAULT_SCHEDULE,
    scenario: str = "",
    workers: int = 1,
) -> tuple[CltReport, list[ReplicationResult]]:
    """Run the full pipeline: replications, per-subset univariate checks,
    and the joint check when more than one subset is given."""
    subsets = list(subsets)
    results = run_replications(
        dist, subsets, n_records, n_folds, schedule, n_replications, master_seed,
        workers=workers,
    )
    psi = balanced_penalty(dist)
    oracle_errors = tuple(
        prediction_error(dist, psi, optimal_predictor(dist, psi, s)) for s in subsets
    )
    univariate = tuple(
        clt_check(results, asymptotic_variance(dist, s), s, subset_index=i)
        for i, s in enumerate(subsets)
    )
    multivariate = None
    if len(subsets) > 1:
        multivariate = multivariate_check(
            results, asymptotic_covariance(dist, subsets), subsets
        )
    report = CltReport(
        scenario=scenario,
        n_records=n_records,
        n_folds=n_folds,
        n_replications=n_replications,
        master_seed=master_seed,
        eps_c0=schedule.c0,
        eps_beta=schedule.beta,
        subsets=tuple(s.indices for s in subsets),
        oracle_errors=oracle_errors,
        univariate=univariate,
        multivariate=multivariate,
    )
    return report, results


def text_histogram(values: Sequence[float], bins: int = 15, width: int = 50) -> str:
    """Plain-text histogram for eyeballing a distribution of statistics."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return "(no values)"
    counts, edges = np.histogram(arr, bins=bins)
    peak = max(int(counts.max()), 1)
    lines = []
    for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
        bar = "#" * int(round(width * c / peak))
        lines.append(f"[{lo:+8.3f}, {hi:+8.3f}) {c:5d} {bar}")
    return "\n".join(lines)
