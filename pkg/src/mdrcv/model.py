"""Discrete factor-space model.

Domain types for joint laws of (factor vector, binary label) pairs on
{0,...,q}^n x {-1,+1}, exact probability queries on known tables, and
reproducible i.i.d. sampling.  Everything downstream (exact oracles,
estimators, Monte Carlo harness) is built on these types.

Conventions fixed here and relied on everywhere else:

- factor vectors are enumerated lexicographically, first coordinate most
  significant;
- labels are {-1, +1}, never {0, 1}, and -1 sorts before +1 in the atom
  enumeration (x, then y);
- factor indices in subsets and record indices in datasets are 1-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import NullEventError, ValidationError

LABELS = (-1, 1)

# Dense tables only: caps the point count so atom enumeration stays exact
# and cheap on a desk machine.
MAX_POINTS = 2**24

NORMALIZATION_TOL = 1e-12


@lru_cache(maxsize=None)
def _points_array(n: int, q: int) -> np.ndarray:
    """All points of {0,...,q}^n as an array, lexicographic row order."""
    grids = np.meshgrid(*[np.arange(q + 1)] * n, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1).astype(np.int16)
    pts.flags.writeable = False
    return pts


@dataclass(frozen=True)
class FactorSpace:
    """The domain {0,...,q}^n: n factors, each with levels 0..q."""

    n: int
    q: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or not isinstance(self.q, int):
            raise ValidationError("n and q must be integers")
        if self.n < 1 or self.q < 1:
            raise ValidationError(f"need n >= 1 and q >= 1, got n={self.n}, q={self.q}")
        if (self.q + 1) ** self.n > MAX_POINTS:
            raise ValidationError(
                f"(q+1)^n = {(self.q + 1) ** self.n} exceeds the dense-table cap {MAX_POINTS}"
            )

    @property
    def num_points(self) -> int:
        return (self.q + 1) ** self.n

    def points(self) -> np.ndarray:
        """(num_points, n) read-only array of all points in enumeration order."""
        return _points_array(self.n, self.q)

    def contains(self, x: Sequence[int]) -> bool:
        return len(x) == self.n and all(0 <= v <= self.q for v in x)

    def rank(self, x: Sequence[int]) -> int:
        """Position of x in the fixed lexicographic enumeration."""
        if not self.contains(x):
            raise ValidationError(f"point {tuple(x)} outside {{0..{self.q}}}^{self.n}")
        r = 0
        for v in x:
            r = r * (self.q + 1) + int(v)
        return r

    def point(self, rank: int) -> tuple[int, ...]:
        if not 0 <= rank < self.num_points:
            raise ValidationError(f"rank {rank} out of range")
        return tuple(int(v) for v in self.points()[rank])


@dataclass(frozen=True)
class FactorSubset:
    """A collection of factor indices {m_1 < ... < m_r}, 1-based."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(idx) < 1:
            raise ValidationError("a factor subset must contain at least one index")
        if any(i < 1 for i in idx):
            raise ValidationError(f"factor indices are 1-based, got {idx}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValidationError(f"factor indices must be strictly increasing, got {idx}")

    @classmethod
    def of(cls, *indices: int) -> "FactorSubset":
        return cls(tuple(indices))

    @property
    def r(self) -> int:
        return len(self.indices)

    def validate_for(self, space: FactorSpace) -> None:
        if self.indices[-1] > space.n:
            raise ValidationError(
                f"subset {self.indices} references factor beyond n={space.n}"
            )

    def project(self, x: Sequence[int]) -> tuple[int, ...]:
        """Sub-vector u with u_i = x_{m_i}."""
        return tuple(int(x[i - 1]) for i in self.indices)


def cylinder_count(subset: FactorSubset, q: int) -> int:
    return (q + 1) ** subset.r


def cylinder_codes(x_rows: np.ndarray, subset: FactorSubset, q: int) -> np.ndarray:
    """Map each row of an (m, n) level array to its cylinder cell code.

    Codes enumerate the sub-vectors u lexicographically, so code 0 is
    u = (0,...,0) and code (q+1)^r - 1 is u = (q,...,q).
    """
    cols = np.asarray(subset.indices, dtype=np.int64) - 1
    sub = np.asarray(x_rows)[:, cols].astype(np.int64)
    weights = (q + 1) ** np.arange(subset.r - 1, -1, -1, dtype=np.int64)
    return sub @ weights


def cylinder_code_of(u: Sequence[int], q: int) -> int:
    code = 0
    for v in u:
        if not 0 <= int(v) <= q:
            raise ValidationError(f"sub-vector value {v} outside 0..{q}")
        code = code * (q + 1) + int(v)
    return code


@dataclass(frozen=True)
class PenaltyFunction:
    """Nonnegative error weights (psi(-1), psi(+1)), not both zero.

    The classification threshold psi(-1)/(psi(-1)+psi(+1)) is exposed as
    ``threshold``; scaling both weights by c > 0 leaves it unchanged.
    """

    psi_neg: float
    psi_pos: float

    def __post_init__(self) -> None:
        a, b = float(self.psi_neg), float(self.psi_pos)
        if not (np.isfinite(a) and np.isfinite(b)) or a < 0 or b < 0:
            raise ValidationError(f"penalty weights must be finite and >= 0, got ({a}, {b})")
        if a + b == 0:
            raise ValidationError("penalty weights must not both be zero")
        object.__setattr__(self, "psi_neg", a)
        object.__setattr__(self, "psi_pos", b)

    def weight(self, y: int) -> float:
        if y == -1:
            return self.psi_neg
        if y == 1:
            return self.psi_pos
        raise ValidationError(f"label must be -1 or +1, got {y}")

    @property
    def threshold(self) -> float:
        """psi(-1) / (psi(-1) + psi(+1)), in [0, 1]."""
        return self.psi_neg / (self.psi_neg + self.psi_pos)

    def scaled(self, c: float) -> "PenaltyFunction":
        if c <= 0:
            raise ValidationError("scale factor must be positive")
        return PenaltyFunction(c * self.psi_neg, c * self.psi_pos)


UNIT_PENALTY = PenaltyFunction(1.0, 1.0)


@dataclass(frozen=True)
class JointDistribution:
    """Exact probability table p(x, y) on {0..q}^n x {-1,+1}.

    ``probs`` has shape (num_points, 2); column 0 is y = -1, column 1 is
    y = +1, rows follow the lexicographic point enumeration.  Entries must
    be nonnegative and sum to 1 within 1e-12, and both label marginals
    must be strictly positive (degenerate labels are rejected).
    """

    space: FactorSpace
    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=np.float64)
        if p.shape != (self.space.num_points, 2):
            raise ValidationError(
                f"probs must have shape ({self.space.num_points}, 2), got {p.shape}"
            )
        if not np.all(np.isfinite(p)):
            raise ValidationError("probability table contains non-finite entries")
        if np.any(p < 0):
            raise ValidationError("probability table contains negative entries")
        total = float(p.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1 within 1e-12")
        marg_pos = float(p[:, 1].sum())
        if not 0.0 < marg_pos < 1.0:
            raise ValidationError(
                f"degenerate label marginal P(Y=1) = {marg_pos}; both labels need mass"
            )
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_atoms(
        cls, n: int, q: int, atoms: Iterable[tuple[Sequence[int], int, float]]
    ) -> "JointDistribution":
        """Build a table from (x, y, prob) atoms; unlisted atoms are 0."""
        space = FactorSpace(n, q)
        p = np.zeros((space.num_points, 2))
        seen = set()
        for x, y, prob in atoms:
            if y not in LABELS:
                raise ValidationError(f"label must be -1 or +1, got {y}")
            key = (space.rank(x), LABELS.index(y))
            if key in seen:
                raise ValidationError(f"duplicate atom for x={tuple(x)}, y={y}")
            seen.add(key)
            p[key] = prob
        return cls(space, p)

    @classmethod
    def from_conditional(
        cls,
        n: int,
        q: int,
        point_probs: np.ndarray,
        cond_pos: np.ndarray,
    ) -> "JointDistribution":
        """Build from a marginal P(X=x) and a conditional P(Y=1 | X=x).

        Both arrays are indexed by the lexicographic point enumeration.
        """
        space = FactorSpace(n, q)
        m = np.asarray(point_probs, dtype=np.float64)
        c = np.asarray(cond_pos, dtype=np.float64)
        if m.shape != (space.num_points,) or c.shape != (space.num_points,):
            raise ValidationError("point_probs and cond_pos must cover every point")
        if np.any((c < 0) | (c > 1)):
            raise ValidationError("conditional probabilities must lie in [0, 1]")
        p = np.stack([m * (1.0 - c), m * c], axis=1)
        return cls(space, p)

    def point_probs(self) -> np.ndarray:
        """P(X=x) for every point, enumeration order."""
        return self.probs.sum(axis=1)

    def point_prob(self, x: Sequence[int]) -> float:
        return float(self.point_probs()[self.space.rank(x)])

    def atom_prob(self, x: Sequence[int], y: int) -> float:
        return float(self.probs[self.space.rank(x), LABELS.index(y)])

    def support_mask(self) -> np.ndarray:
        return self.point_probs() > 0.0

    def atoms(self) -> list[tuple[tuple[int, ...], int, float]]:
        """Nonzero atoms (x, y, p) in enumeration order."""
        out = []
        pts = self.space.points()
        for rank in range(self.space.num_points):
            for col, y in enumerate(LABELS):
                p = float(self.probs[rank, col])
                if p > 0.0:
                    out.append((tuple(int(v) for v in pts[rank]), y, p))
        return out


def support(dist: JointDistribution) -> set[tuple[int, ...]]:
    """The set of points with P(X=x) > 0."""
    pts = dist.space.points()
    mask = dist.support_mask()
    return {tuple(int(v) for v in pts[i]) for i in np.nonzero(mask)[0]}


def label_marginal(dist: JointDistribution, y: int) -> float:
    """P(Y=y)."""
    return float(dist.probs[:, LABELS.index(y)].sum())


def cylinder_masses(
    dist: JointDistribution, subset: FactorSubset
) -> tuple[np.ndarray, np.ndarray]:
    """Per cylinder cell: (P(X in C), P(Y=1, X in C)), indexed by cell code."""
    subset.validate_for(dist.space)
    codes = cylinder_codes(dist.space.points(), subset, dist.space.q)
    cells = cylinder_count(subset, dist.space.q)
    tot = np.bincount(codes, weights=dist.point_probs(), minlength=cells)
    pos = np.bincount(codes, weights=dist.probs[:, 1], minlength=cells)
    return tot, pos


def cylinder_conditional(
    dist: JointDistribution, subset: FactorSubset, u: Sequence[int]
) -> float:
    """P(Y=1 | X_{m_1}=u_1, ..., X_{m_r}=u_r).

    Raises NullEventError when the cylinder carries no probability mass.
    """
    subset.validate_for(dist.space)
    if len(u) != subset.r:
        raise ValidationError(f"sub-vector length {len(u)} != subset size {subset.r}")
    tot, pos = cylinder_masses(dist, subset)
    code = cylinder_code_of(u, dist.space.q)
    if tot[code] <= 0.0:
        raise NullEventError(
            f"conditioning on null event: cylinder {subset.indices}={tuple(u)} has mass 0"
        )
    return float(pos[code] / tot[code])


@dataclass(frozen=True)
class Dataset:
    """An ordered i.i.d. sample of (factor vector, label) records.

    Records keep sampling order; record j (1-based) is ``x[j-1], y[j-1]``.
    Fold partitions depend on this order, so it is part of the contract.
    """

    space: FactorSpace
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        xs = np.array(self.x, dtype=np.int16)
        ys = np.array(self.y, dtype=np.int8)
        if xs.ndim != 2 or xs.shape[1] != self.space.n:
            raise ValidationError(f"x must be (N, {self.space.n}), got {xs.shape}")
        if ys.shape != (xs.shape[0],):
            raise ValidationError("y must be one label per record")
        if xs.shape[0] < 1:
            raise ValidationError("a dataset must contain at least one record")
        if xs.min() < 0 or xs.max() > self.space.q:
            raise ValidationError(f"factor values must lie in 0..{self.space.q}")
        if not np.all(np.isin(ys, LABELS)):
            raise ValidationError("labels must be -1 or +1")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "y", ys)

    def __len__(self) -> int:
        return self.x.shape[0]

    def record(self, j: int) -> tuple[tuple[int, ...], int]:
        """Record j, 1-based."""
        if not 1 <= j <= len(self):
            raise ValidationError(f"record index {j} outside 1..{len(self)}")
        return tuple(int(v) for v in self.x[j - 1]), int(self.y[j - 1])

    def records(self) -> list[tuple[tuple[int, ...], int]]:
        return [self.record(j) for j in range(1, len(self) + 1)]


def sample(dist: JointDistribution, n_records: int, seed: int) -> Dataset:
    """Draw an i.i.d. sample of size n_records, reproducibly.

    Inverse-CDF sampling over the fixed atom enumeration (x lexicographic,
    y = -1 before +1), so identical (dist, n_records, seed) give the same
    dataset bit for bit.
    """
    if n_records < 1:
        raise ValidationError(f"sample size must be >= 1, got {n_records}")
    flat = dist.probs.ravel()  # atom order: (x0,-1), (x0,+1), (x1,-1), ...
    cum = np.cumsum(flat)
    cum[-1] = 1.0
    rng = np.random.default_rng(seed)
    u = rng.random(n_records)
    atom_idx = np.searchsorted(cum, u, side="right")
    point_rank = atom_idx >> 1
    ys = np.where(atom_idx & 1, 1, -1).astype(np.int8)
    xs = dist.space.points()[point_rank]
    return Dataset(dist.space, xs, ys)


def save_distribution(dist: JointDistribution, path) -> None:
    """Write a distribution as JSON: fields n, q and the nonzero atoms."""
    doc = {
        "n": dist.space.n,
        "q": dist.space.q,
        "atoms": [
            {"x": list(x), "y": y, "p": p} for x, y, p in dist.atoms()
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_distribution(path) -> JointDistribution:
    """Read a distribution JSON file written by ``save_distribution``."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    for key in ("n", "q", "atoms"):
        if key not in doc:
            raise ValidationError(f"{path}: missing field {key!r}")
    atoms = []
    for i, atom in enumerate(doc["atoms"]):
        try:
            atoms.append((list(atom["x"]), int(atom["y"]), float(atom["p"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: malformed atom #{i}: {atom!r}") from exc
    return JointDistribution.from_atoms(int(doc["n"]), int(doc["q"]), atoms)
