"""Exact closed-form quantities on a known distribution.

Every function here enumerates the finite atom table directly, so results
are exact up to float summation.  Nothing in this module looks at data;
the data-driven counterparts live in ``estimator``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .model import (
    FactorSpace,
    FactorSubset,
    JointDistribution,
    PenaltyFunction,
    cylinder_codes,
    cylinder_masses,
    label_marginal,
)

# Separates authored exact ties from double-precision rounding noise in
# comparisons against the threshold.
EQUALITY_TOL = 1e-10


@dataclass(frozen=True)
class Predictor:
    """A total function {0..q}^n -> {-1,+1}, stored as a table.

    ``values`` follows the lexicographic point enumeration.
    """

    space: FactorSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.int8)
        if v.shape != (self.space.num_points,):
            raise ValidationError(
                f"predictor table must cover all {self.space.num_points} points"
            )
        if not np.all(np.isin(v, (-1, 1))):
            raise ValidationError("predictor values must be -1 or +1")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def value_at(self, x: Sequence[int]) -> int:
        return int(self.values[self.space.rank(x)])

    def plus_set(self) -> set[tuple[int, ...]]:
        pts = self.space.points()
        return {
            tuple(int(v) for v in pts[i]) for i in np.nonzero(self.values == 1)[0]
        }

    @classmethod
    def from_plus_set(cls, space: FactorSpace, plus: set) -> "Predictor":
        values = np.full(space.num_points, -1, dtype=np.int8)
        for x in plus:
            values[space.rank(x)] = 1
        return cls(space, values)


def balanced_penalty(dist: JointDistribution) -> PenaltyFunction:
    """Inverse class-frequency weights psi(y) = 1 / P(Y=y).

    With these weights the classification threshold equals P(Y=1), so the
    predictor flags exactly the points whose conditional risk exceeds the
    prevalence.
    """
    p_pos = label_marginal(dist, 1)
    return PenaltyFunction(1.0 / (1.0 - p_pos), 1.0 / p_pos)


def _full_subset(dist: JointDistribution) -> FactorSubset:
    return FactorSubset(tuple(range(1, dist.space.n + 1)))


def high_risk_set(dist: JointDistribution, psi: PenaltyFunction) -> set[tuple[int, ...]]:
    """Points of the support whose conditional P(Y=1 | X=x) strictly exceeds
    the threshold; the minimal-cardinality error-optimal plus-set.

    Strict inequality is resolved with the EQUALITY_TOL tolerance so that
    authored exact ties stay out of the set regardless of rounding.
    """
    if psi.psi_pos == 0.0:
        return set()
    tot = dist.point_probs()
    pos = dist.probs[:, 1]
    gamma = psi.threshold
    mask = tot > 0.0
    cond = np.divide(pos, tot, out=np.zeros_like(pos), where=mask)
    plus = mask & (cond > gamma + EQUALITY_TOL)
    pts = dist.space.points()
    return {tuple(int(v) for v in pts[i]) for i in np.nonzero(plus)[0]}


def optimal_predictor(
    dist: JointDistribution,
    psi: PenaltyFunction,
    subset: FactorSubset | None = None,
) -> Predictor:
    """The error-minimizing predictor that looks only at the given factors.

    +1 exactly on support points whose cylinder conditional strictly
    exceeds the threshold; -1 elsewhere, including off the support.
    ``subset=None`` means all factors, i.e. pointwise conditionals.
    """
    if subset is None:
        subset = _full_subset(dist)
    tot, pos = cylinder_masses(dist, subset)
    cond = np.divide(pos, tot, out=np.zeros_like(pos), where=tot > 0.0)
    codes = cylinder_codes(dist.space.points(), subset, dist.space.q)
    in_support = dist.support_mask()
    # ties at the threshold resolve to -1: strict inequality, with the
    # tolerance shielding authored exact ties from rounding noise
    plus = in_support & (cond[codes] > psi.threshold + EQUALITY_TOL)
    if psi.psi_pos == 0.0:
        plus[:] = False
    values = np.where(plus, 1, -1).astype(np.int8)
    return Predictor(dist.space, values)


def prediction_error(
    dist: JointDistribution, psi: PenaltyFunction, predictor: Predictor
) -> float:
    """Expected penalized loss 2 * sum_y psi(y) P(Y=y, f(X) != y)."""
    f = predictor.values
    miss_neg = float(dist.probs[f == 1, 0].sum())   # true -1, predicted +1
    miss_pos = float(dist.probs[f == -1, 1].sum())  # true +1, predicted -1
    return 2.0 * (psi.psi_neg * miss_neg + psi.psi_pos * miss_pos)


def label_advantage(
    dist: JointDistribution, psi: PenaltyFunction, x: Sequence[int]
) -> float:
    """Signed gain psi(+1) P(X=x, Y=1) - psi(-1) P(X=x, Y=-1).

    Positive means predicting +1 at x lowers the error; zero off the
    support and at exact threshold ties.
    """
    rank = dist.space.rank(x)
    return float(
        psi.psi_pos * dist.probs[rank, 1] - psi.psi_neg * dist.probs[rank, 0]
    )


def is_significant(
    dist: JointDistribution, subset: FactorSubset, tol: float = EQUALITY_TOL
) -> bool:
    """Whether the conditional law of Y given X depends only on these factors.

    True iff P(Y=1 | X=x) equals the subset's cylinder conditional at every
    support point, within ``tol``.
    """
    subset.validate_for(dist.space)
    tot_cell, pos_cell = cylinder_masses(dist, subset)
    codes = cylinder_codes(dist.space.points(), subset, dist.space.q)
    point_tot = dist.point_probs()
    mask = point_tot > 0.0
    point_cond = np.divide(
        dist.probs[:, 1], point_tot, out=np.zeros(dist.space.num_points), where=mask
    )
    cell_cond = np.divide(
        pos_cell, tot_cell, out=np.zeros_like(pos_cell), where=tot_cell > 0.0
    )
    return bool(np.all(np.abs(point_cond[mask] - cell_cond[codes][mask]) <= tol))


def decided_set(
    dist: JointDistribution,
    psi: PenaltyFunction,
    subset: FactorSubset,
    tol: float = EQUALITY_TOL,
) -> set[tuple[int, ...]]:
    """Support points whose cylinder conditional is separated from the
    threshold (no exact tie); on these the empirical rule converges."""
    subset.validate_for(dist.space)
    tot_cell, pos_cell = cylinder_masses(dist, subset)
    cell_cond = np.divide(
        pos_cell, tot_cell, out=np.zeros_like(pos_cell), where=tot_cell > 0.0
    )
    codes = cylinder_codes(dist.space.points(), subset, dist.space.q)
    mask = dist.support_mask() & (
        np.abs(cell_cond[codes] - psi.threshold) > tol
    )
    pts = dist.space.points()
    return {tuple(int(v) for v in pts[i]) for i in np.nonzero(mask)[0]}


def consistency_defect(
    dist: JointDistribution,
    psi: PenaltyFunction,
    subset: FactorSubset,
    fold_decisions: Sequence[Predictor],
    target: Predictor | None = None,
) -> float:
    """Diagnostic sum whose vanishing characterizes consistency of the
    cross-validated error estimate.

    ``fold_decisions`` holds, per fold, the predictor the algorithm trained
    on that fold's complement.  Disagreements with ``target`` outside the
    decided set are weighted by the signed label advantage.  Requires oracle
    access; never used on the estimation path.
    """
    if target is None:
        target = optimal_predictor(dist, psi, subset)
    decided = decided_set(dist, psi, subset)
    sup_pts = [x for x in _support_points(dist) if x not in decided]
    x_plus = [x for x in sup_pts if target.value_at(x) == 1]
    x_minus = [x for x in sup_pts if target.value_at(x) == -1]
    total = 0.0
    for decision in fold_decisions:
        for x in x_plus:
            if decision.value_at(x) == -1:
                total += label_advantage(dist, psi, x)
        for x in x_minus:
            if decision.value_at(x) == 1:
                total -= label_advantage(dist, psi, x)
    return total


def _support_points(dist: JointDistribution) -> list[tuple[int, ...]]:
    pts = dist.space.points()
    return [tuple(int(v) for v in pts[i]) for i in np.nonzero(dist.support_mask())[0]]


def influence_table(dist: JointDistribution, subset: FactorSubset) -> np.ndarray:
    """Per-atom values of the influence variable behind the CLT.

    Shape (num_points, 2), columns y = -1 and y = +1:

        v(x, y) = (2 / P(Y=y)) * (1{f(x) != y} - P(f(X) != y | Y=y))

    with f the optimal predictor for the subset under balanced penalties.
    Its mean under the distribution is exactly zero.
    """
    psi = balanced_penalty(dist)
    f = optimal_predictor(dist, psi, subset)
    p_pos = label_marginal(dist, 1)
    p_neg = 1.0 - p_pos
    miss_neg = float(dist.probs[f.values == 1, 0].sum()) / p_neg
    miss_pos = float(dist.probs[f.values == -1, 1].sum()) / p_pos
    v = np.empty((dist.space.num_points, 2))
    v[:, 0] = (2.0 / p_neg) * ((f.values == 1).astype(float) - miss_neg)
    v[:, 1] = (2.0 / p_pos) * ((f.values == -1).astype(float) - miss_pos)
    return v


def asymptotic_variance(dist: JointDistribution, subset: FactorSubset) -> float:
    """Exact variance of the influence variable; the CLT scale for the
    cross-validated error of this subset's predictor."""
    v = influence_table(dist, subset)
    mean = float((dist.probs * v).sum())
    if abs(mean) > 1e-12:
        raise ValidationError(f"influence variable mean {mean} not zero; table corrupt?")
    var = float((dist.probs * (v - mean) ** 2).sum())
    return var


def asymptotic_covariance(
    dist: JointDistribution, subsets: Sequence[FactorSubset]
) -> np.ndarray:
    """Exact covariance matrix of the influence variables of several subsets."""
    if len(subsets) < 1:
        raise ValidationError("need at least one subset")
    tables = [influence_table(dist, s) for s in subsets]
    means = [float((dist.probs * v).sum()) for v in tables]
    s = len(subsets)
    c = np.zeros((s, s))
    for i in range(s):
        for j in range(i, s):
            cij = float(
                (dist.probs * (tables[i] - means[i]) * (tables[j] - means[j])).sum()
            )
            c[i, j] = cij
            c[j, i] = cij
    return c
