"""Named scenario generators: small distributions whose significant factor
subsets are known by construction, for simulation studies and tests.

All presets put the uniform product marginal on the factor space and shape
only the conditional P(Y=1 | X=x):

- ``null``           Y independent of X; every subset is significant.
- ``single-factor``  the conditional depends on factor 1 only.
- ``pair-epistasis`` joint-risk interaction of factors 1 and 2: the
                     conditional is high exactly when x1 + x2 >= q + 1
                     (at q = 1 this is the AND pattern), so {1, 2} is
                     significant while neither factor alone is.
- ``independent``    every factor carries an additive main effect, so no
                     proper subset is significant.

Presets are deterministic functions of their parameters; the ``seed``
argument is accepted for interface stability and currently unused.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .model import FactorSpace, JointDistribution

PRESETS = ("null", "independent", "single-factor", "pair-epistasis")


def _uniform_marginal(space: FactorSpace) -> np.ndarray:
    return np.full(space.num_points, 1.0 / space.num_points)


def _null(space: FactorSpace, p_pos: float) -> JointDistribution:
    if not 0.0 < p_pos < 1.0:
        raise ValidationError(f"p_pos must be in (0, 1), got {p_pos}")
    cond = np.full(space.num_points, p_pos)
    return JointDistribution.from_conditional(
        space.n, space.q, _uniform_marginal(space), cond
    )


def _single_factor(space: FactorSpace, p_low: float, p_high: float) -> JointDistribution:
    _check_band(p_low, p_high)
    x1 = space.points()[:, 0].astype(np.float64)
    cond = p_low + (p_high - p_low) * x1 / space.q
    return JointDistribution.from_conditional(
        space.n, space.q, _uniform_marginal(space), cond
    )


def _pair_epistasis(space: FactorSpace, p_low: float, p_high: float) -> JointDistribution:
    if space.n < 2:
        raise ValidationError("pair-epistasis needs at least two factors")
    _check_band(p_low, p_high)
    pts = space.points()
    joint_risk = pts[:, 0] + pts[:, 1] >= space.q + 1
    cond = np.where(joint_risk, p_high, p_low)
    return JointDistribution.from_conditional(
        space.n, space.q, _uniform_marginal(space), cond
    )


def _independent(space: FactorSpace, effect: float, intercept: float) -> JointDistribution:
    if effect == 0.0:
        raise ValidationError("independent preset needs a nonzero per-factor effect")
    centered = space.points().astype(np.float64) - space.q / 2.0
    logit = intercept + effect * centered.sum(axis=1)
    cond = 1.0 / (1.0 + np.exp(-logit))
    return JointDistribution.from_conditional(
        space.n, space.q, _uniform_marginal(space), cond
    )


def _check_band(p_low: float, p_high: float) -> None:
    if not (0.0 <= p_low < p_high <= 1.0):
        raise ValidationError(
            f"need 0 <= p_low < p_high <= 1, got p_low={p_low}, p_high={p_high}"
        )


def generate_scenario(
    preset: str,
    n: int,
    q: int,
    seed: int | None = None,
    p_pos: float = 0.45,
    p_low: float = 0.2,
    p_high: float = 0.8,
    effect: float = 0.5,
    intercept: float = 0.0,
) -> JointDistribution:
    """Build the distribution of a named preset on {0..q}^n."""
    del seed
    space = FactorSpace(n, q)
    if preset == "null":
        return _null(space, p_pos)
    if preset == "single-factor":
        return _single_factor(space, p_low, p_high)
    if preset == "pair-epistasis":
        return _pair_epistasis(space, p_low, p_high)
    if preset == "independent":
        return _independent(space, effect, intercept)
    raise ValidationError(f"unknown preset {preset!r}; choose from {PRESETS}")


def scenario_a() -> JointDistribution:
    """The workhorse verification scenario: pair epistasis on three
    ternary factors with a wide 0.05 / 0.95 penetrance band, chosen so
    that every cylinder conditional of the subsets {1,2} and {1,3} sits
    either far from the threshold or exactly on it, keeping the trained
    rule stable at moderate sample sizes."""
    return generate_scenario("pair-epistasis", n=3, q=2, p_low=0.05, p_high=0.95)
