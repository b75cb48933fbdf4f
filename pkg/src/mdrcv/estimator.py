"""Data-driven estimation: fold partitioning, empirical conditionals,
the regularized prediction rule, the K-fold cross-validated prediction
error, and plug-in estimates of the asymptotic scale.

The estimated error for a dataset of N records split into K folds is

    est = 2 * sum_y (1/K) * sum_k psihat_k(y) * miss_k(y) / #S_k

where fold S_k holds records (k-1)*[N/K]+1 .. k*[N/K] (the last fold runs
to N), psihat_k(y) is the reciprocal label frequency inside S_k (0 when
the label is absent), and miss_k(y) counts records of S_k with label y
predicted wrongly by the rule trained on the complement of S_k.

The trained rule is the regularized cylinder-frequency classifier:
predict +1 iff    freq(Y=1 | cylinder cell of x, complement)  >
                  freq(Y=1, complement) + eps_N,
with the empty-cell convention 0/0 := 0, which makes unseen cells predict
-1 whenever the inflated threshold is positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateLabelsError, ValidationError
from .model import Dataset, FactorSubset, cylinder_codes, cylinder_count

DEFAULT_EPS_C0 = 1.0
DEFAULT_EPS_BETA = 0.25


@dataclass(frozen=True)
class FoldPartition:
    """Deterministic contiguous split of record indices 1..N into K folds.

    Folds 1..K-1 have size [N/K]; the last fold absorbs the remainder.
    """

    n_records: int
    n_folds: int
    folds: tuple[range, ...]

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.folds)


def fold_partition(n_records: int, n_folds: int) -> FoldPartition:
    if n_folds < 2:
        raise ValidationError(f"need at least 2 folds, got {n_folds}")
    if n_folds > n_records:
        raise ValidationError(
            f"cannot split {n_records} records into {n_folds} folds"
        )
    base = n_records // n_folds
    folds = []
    for k in range(1, n_folds + 1):
        start = (k - 1) * base + 1
        stop = k * base + 1 if k < n_folds else n_records + 1
        folds.append(range(start, stop))
    return FoldPartition(n_records, n_folds, tuple(folds))


@dataclass(frozen=True)
class EpsilonSchedule:
    """Threshold inflation eps_N = c0 * N^(-beta).

    Constraints c0 > 0 and 0 < beta < 1/2 guarantee eps_N -> 0 while
    sqrt(N) * eps_N -> infinity, the regime the limit theorems need.
    """

    c0: float = DEFAULT_EPS_C0
    beta: float = DEFAULT_EPS_BETA

    def __post_init__(self) -> None:
        if not np.isfinite(self.c0) or self.c0 <= 0:
            raise ValidationError(f"eps schedule needs c0 > 0, got {self.c0}")
        if not 0.0 < self.beta < 0.5:
            raise ValidationError(
                f"eps schedule needs beta in (0, 1/2), got {self.beta}"
            )

    def value(self, n_records: int) -> float:
        if n_records < 1:
            raise ValidationError("sample size must be positive")
        return self.c0 * float(n_records) ** (-self.beta)


DEFAULT_SCHEDULE = EpsilonSchedule()


def _indices_to_zero_based(dataset: Dataset, where: Iterable[int]) -> np.ndarray:
    idx = np.asarray(list(where), dtype=np.int64)
    if idx.size and (idx.min() < 1 or idx.max() > len(dataset)):
        raise ValidationError(f"record indices must lie in 1..{len(dataset)}")
    return idx - 1


def estimate_conditional(
    dataset: Dataset,
    where: Iterable[int],
    subset: FactorSubset,
    u: Sequence[int],
) -> float:
    """Empirical P(Y=1 | X in cylinder) over the given records (1-based).

    Ratio of indicator counts; an empty cylinder yields 0 by convention.
    """
    subset.validate_for(dataset.space)
    rows = _indices_to_zero_based(dataset, where)
    cols = np.asarray(subset.indices, dtype=np.int64) - 1
    in_cell = np.all(
        dataset.x[rows][:, cols] == np.asarray(u, dtype=np.int64), axis=1
    )
    denom = int(in_cell.sum())
    if denom == 0:
        return 0.0
    num = int((in_cell & (dataset.y[rows] == 1)).sum())
    return num / denom


def threshold_estimate(dataset: Dataset, where: Iterable[int]) -> float:
    """Empirical label frequency P(Y=1) over the given records (1-based)."""
    rows = _indices_to_zero_based(dataset, where)
    if rows.size == 0:
        raise ValidationError("threshold estimate needs a nonempty index set")
    return float((dataset.y[rows] == 1).mean())


def fold_penalty_estimate(dataset: Dataset, fold: Iterable[int], y: int) -> float:
    """Reciprocal of the fold's empirical frequency of label y; 0 when the
    fold contains no such label (the 0/0 := 0 convention)."""
    if y not in (-1, 1):
        raise ValidationError(f"label must be -1 or +1, got {y}")
    rows = _indices_to_zero_based(dataset, fold)
    if rows.size == 0:
        raise ValidationError("penalty estimate needs a nonempty fold")
    count = int((dataset.y[rows] == y).sum())
    if count == 0:
        return 0.0
    return rows.size / count


def predict_regularized(
    x: Sequence[int],
    dataset: Dataset,
    where: Iterable[int],
    subset: FactorSubset,
    eps: float,
) -> int:
    """Label for x from the inflated-threshold cylinder-frequency rule.

    +1 iff the empirical cylinder conditional strictly exceeds the
    empirical label frequency plus eps; eps = 0 recovers the plain rule.
    """
    if eps < 0:
        raise ValidationError(f"eps must be >= 0, got {eps}")
    where = list(where)
    p_hat = estimate_conditional(dataset, where, subset, subset.project(x))
    g_hat = threshold_estimate(dataset, where)
    return 1 if p_hat > g_hat + eps else -1


@dataclass(frozen=True)
class ErrEstimate:
    """Cross-validated prediction error with its per-fold ingredients."""

    value: float
    eps: float
    fold_penalties: tuple[tuple[float, float], ...]  # (psihat(-1), psihat(+1))
    fold_miss_counts: tuple[tuple[int, int], ...]    # misses for y=-1, y=+1


def _fold_cell_stats(codes: np.ndarray, pos_mask: np.ndarray, cells: int):
    tot = np.bincount(codes, minlength=cells)
    pos = np.bincount(codes[pos_mask], minlength=cells)
    return tot, pos


def cv_prediction_error(
    dataset: Dataset,
    n_folds: int,
    subset: FactorSubset,
    schedule: EpsilonSchedule = DEFAULT_SCHEDULE,
    unit_penalty: bool = False,
) -> ErrEstimate:
    """K-fold cross-validated prediction error of the regularized rule.

    Per fold, predictions are trained on the complement and penalties are
    estimated on the fold itself.  ``unit_penalty=True`` is a diagnostic
    mode forcing both penalty estimates to 1, which reduces the value to
    twice the fold-averaged misclassification frequency.
    """
    subset.validate_for(dataset.space)
    n = len(dataset)
    partition = fold_partition(n, n_folds)
    eps = schedule.value(n)

    codes = cylinder_codes(dataset.x, subset, dataset.space.q)
    cells = cylinder_count(subset, dataset.space.q)
    pos_mask = dataset.y == 1
    tot_all, pos_all = _fold_cell_stats(codes, pos_mask, cells)
    n_pos_all = int(pos_mask.sum())

    fold_penalties = []
    fold_misses = []
    fold_sizes = []
    for fold in partition.folds:
        a, b = fold.start - 1, fold.stop - 1
        size = b - a
        codes_k = codes[a:b]
        pos_k_mask = pos_mask[a:b]
        tot_k, pos_k = _fold_cell_stats(codes_k, pos_k_mask, cells)

        tot_w = tot_all - tot_k
        pos_w = pos_all - pos_k
        n_w = n - size
        n_pos_w = n_pos_all - int(pos_k_mask.sum())
        gamma_w = n_pos_w / n_w
        cell_est = np.divide(
            pos_w, tot_w, out=np.zeros(cells, dtype=np.float64), where=tot_w > 0
        )
        pred_plus = cell_est[codes_k] > gamma_w + eps

        miss_pos = int((pos_k_mask & ~pred_plus).sum())
        miss_neg = int((~pos_k_mask & pred_plus).sum())
        n_pos_k = int(pos_k_mask.sum())
        n_neg_k = size - n_pos_k
        if unit_penalty:
            psi_neg = psi_pos = 1.0
        else:
            psi_neg = size / n_neg_k if n_neg_k else 0.0
            psi_pos = size / n_pos_k if n_pos_k else 0.0
        fold_penalties.append((psi_neg, psi_pos))
        fold_misses.append((miss_neg, miss_pos))
        fold_sizes.append(size)

    # Combine in the formula's order: outer sum over labels, inner over folds.
    value = 0.0
    for col in (0, 1):
        acc = 0.0
        for k in range(n_folds):
            acc += fold_penalties[k][col] * fold_misses[k][col] / fold_sizes[k]
        value += acc / n_folds
    value *= 2.0

    return ErrEstimate(
        value=value,
        eps=eps,
        fold_penalties=tuple(fold_penalties),
        fold_miss_counts=tuple(fold_misses),
    )


def influence_values(
    dataset: Dataset,
    subset: FactorSubset,
    schedule: EpsilonSchedule = DEFAULT_SCHEDULE,
) -> np.ndarray:
    """Per-record plug-in influence values.

    Trains the regularized rule on the full sample, then substitutes the
    empirical label frequencies and miss rates for their population
    counterparts.  The returned values sum to exactly zero whenever both
    label classes are present; a missing class raises.
    """
    subset.validate_for(dataset.space)
    n = len(dataset)
    eps = schedule.value(n)
    codes = cylinder_codes(dataset.x, subset, dataset.space.q)
    cells = cylinder_count(subset, dataset.space.q)
    pos_mask = dataset.y == 1
    tot, pos = _fold_cell_stats(codes, pos_mask, cells)
    n_pos = int(pos_mask.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError("influence values need both label classes")
    gamma = n_pos / n
    cell_est = np.divide(pos, tot, out=np.zeros(cells, dtype=np.float64), where=tot > 0)
    pred_plus = cell_est[codes] > gamma + eps

    miss = pred_plus != pos_mask
    rate_pos = int((miss & pos_mask).sum()) / n_pos
    rate_neg = int((miss & ~pos_mask).sum()) / n_neg
    freq = np.where(pos_mask, n_pos / n, n_neg / n)
    rate = np.where(pos_mask, rate_pos, rate_neg)
    return (2.0 / freq) * (miss.astype(np.float64) - rate)


def asymptotic_sd_estimate(
    dataset: Dataset,
    n_folds: int,
    subset: FactorSubset,
    schedule: EpsilonSchedule = DEFAULT_SCHEDULE,
) -> float:
    """Plug-in estimate of the CLT scale: the empirical standard deviation
    of the influence values (trained on the full sample)."""
    del n_folds  # the plug-in trains on the full sample
    v = influence_values(dataset, subset, schedule)
    return float(np.std(v))


def asymptotic_covariance_estimate(
    dataset: Dataset,
    n_folds: int,
    subsets: Sequence[FactorSubset],
    schedule: EpsilonSchedule = DEFAULT_SCHEDULE,
) -> np.ndarray:
    """Plug-in estimate of the joint influence covariance across subsets."""
    del n_folds
    if len(subsets) < 1:
        raise ValidationError("need at least one subset")
    rows = np.stack([influence_values(dataset, s, schedule) for s in subsets])
    centered = rows - rows.mean(axis=1, keepdims=True)
    c = centered @ centered.T / rows.shape[1]
    return (c + c.T) / 2.0
