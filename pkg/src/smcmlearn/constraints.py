"""Weighted conditional (in)dependence statements from oracles or data.

Statements come either from the separation oracle of a known graph or from
correlational t-tests on a dataset. Three weighting schemes are supported:
constant weights (every statement counts 1), hard dependencies (observed
dependences become inviolable), and log weights (a pseudo-Bayesian scheme
whose weight is the absolute posterior log-odds of the verdict).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .graphs import MixedGraph, Smcm, VertexId
from .separation import (
    cond_from_field,
    cond_to_field,
    condition_sets,
    independence_model,
)

INF = math.inf


class Verdict(str, Enum):
    INDEPENDENT = "independent"
    DEPENDENT = "dependent"


@dataclass(frozen=True)
class CiStatement:
    """One tested or oracle-derived verdict with a nonnegative weight."""

    x: VertexId
    y: VertexId
    cond: frozenset[VertexId]
    verdict: Verdict
    weight: float = 1.0
    degenerate: bool = False

    def __post_init__(self):
        if self.x == self.y:
            raise ValueError("statement endpoints must differ")
        if self.x > self.y:
            x, y = self.y, self.x
            object.__setattr__(self, "x", x)
            object.__setattr__(self, "y", y)
        object.__setattr__(self, "cond", frozenset(self.cond))
        if self.cond & {self.x, self.y}:
            raise ValueError("conditioning set overlaps the pair")
        if not (self.weight >= 0):
            raise ValueError(f"weight must be nonnegative, got {self.weight}")

    @property
    def independent(self) -> bool:
        return self.verdict is Verdict.INDEPENDENT

    def key(self) -> tuple:
        return (self.x, self.y, self.cond)


@dataclass(frozen=True)
class WeightScheme:
    """One of the constant (cw), hard-dependency (hw), or log (lw) schemes."""

    kind: str
    prior_param: float | None = None

    def __post_init__(self):
        if self.kind not in ("cw", "hw", "lw"):
            raise ValueError(f"unknown weighting scheme {self.kind!r}")
        if self.kind == "lw":
            if self.prior_param is None or not (0 < self.prior_param < 1):
                raise ValueError("lw requires a prior parameter in (0, 1)")
        elif self.prior_param is not None:
            raise ValueError(f"{self.kind} takes no parameter")

    @classmethod
    def cw(cls) -> "WeightScheme":
        return cls("cw")

    @classmethod
    def hw(cls) -> "WeightScheme":
        return cls("hw")

    @classmethod
    def lw(cls, prior_param: float) -> "WeightScheme":
        return cls("lw", prior_param)

    @classmethod
    def parse(cls, spec: str) -> "WeightScheme":
        spec = spec.strip().lower()
        if spec.startswith("lw:"):
            return cls.lw(float(spec[3:]))
        return cls(spec)

    def __str__(self) -> str:
        if self.kind == "lw":
            return f"lw:{self.prior_param:g}"
        return self.kind


@dataclass(frozen=True)
class ConstraintSet:
    """The weighted statements feeding one solver run."""

    n: int
    statements: tuple[CiStatement, ...]
    scheme: WeightScheme = field(default_factory=WeightScheme.cw)

    def __post_init__(self):
        object.__setattr__(self, "statements", tuple(self.statements))
        seen = set()
        for s in self.statements:
            if s.y >= self.n:
                raise ValueError(f"statement vertex {s.y} out of range")
            if any(v >= self.n for v in s.cond):
                raise ValueError("conditioning vertex out of range")
            if s.key() in seen:
                raise ValueError(f"duplicate statement for {s.key()}")
            seen.add(s.key())

    def __len__(self) -> int:
        return len(self.statements)


@dataclass(frozen=True)
class Dataset:
    """An m x n sample matrix, rows are observations."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2:
            raise ValueError("dataset must be a 2-d array")
        object.__setattr__(self, "values", arr)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


def oracle_constraints(g: Smcm, max_cond: int | None = None) -> ConstraintSet:
    """Every pairwise statement up to max_cond, with verdicts from the
    separation oracle of g and constant weight 1."""
    if max_cond is None:
        max_cond = max(g.n - 2, 0)
    model = independence_model(g, max_cond)
    statements = []
    for x, y in combinations(range(g.n), 2):
        for cond in condition_sets(g.n, x, y, max_cond):
            verdict = (
                Verdict.INDEPENDENT if model.separates(x, y, cond) else Verdict.DEPENDENT
            )
            statements.append(CiStatement(x, y, frozenset(cond), verdict, 1.0))
    return ConstraintSet(g.n, tuple(statements), WeightScheme.cw())


def partial_correlation(cov: np.ndarray, x: int, y: int, z: Iterable[int]) -> float:
    """Partial correlation of x and y given z from a covariance matrix.

    Computed by inverting the covariance submatrix over {x, y} union z.
    """
    z = sorted(set(z))
    if x == y or x in z or y in z:
        raise ValueError("x, y, and z must be disjoint")
    idx = [x, y, *z]
    sub = np.asarray(cov, dtype=float)[np.ix_(idx, idx)]
    try:
        prec = np.linalg.inv(sub)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(
            f"singular covariance submatrix for conditioning set {z}"
        ) from exc
    denom = prec[0, 0] * prec[1, 1]
    if denom <= 0:
        raise ArithmeticError(
            f"covariance submatrix not positive definite for conditioning set {z}"
        )
    return float(-prec[0, 1] / math.sqrt(denom))


def ci_test(
    data: Dataset, x: int, y: int, z: Iterable[int], alpha: float
) -> CiStatement:
    """Correlational t-test of the partial correlation of x and y given z.

    The verdict is independent when the two-sided p-value exceeds alpha.
    A numerically degenerate correlation (|r| = 1) yields a dependent
    verdict flagged as degenerate.
    """
    if not (0 < alpha < 1):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    z = sorted(set(z))
    dof = data.m - len(z) - 2
    if dof <= 0:
        raise ValueError(
            f"need more than |z| + 2 = {len(z) + 2} samples, have {data.m}"
        )
    cov = np.cov(data.values, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    r = partial_correlation(cov, x, y, z)
    if abs(r) >= 1.0 - 1e-12:
        return CiStatement(x, y, frozenset(z), Verdict.DEPENDENT, 1.0, degenerate=True)
    t_stat = r * math.sqrt(dof / (1.0 - r * r))
    p_value = 2.0 * stats.t.sf(abs(t_stat), dof)
    verdict = Verdict.INDEPENDENT if p_value > alpha else Verdict.DEPENDENT
    return CiStatement(x, y, frozenset(z), verdict, 1.0)


def dataset_constraints(
    data: Dataset, alpha: float, max_cond: int | None = None
) -> ConstraintSet:
    """Run the t-test over all pairs and conditioning sets up to max_cond.

    max_cond defaults to n - 2 for n <= 7 and 3 above that.
    """
    if max_cond is None:
        max_cond = data.n - 2 if data.n <= 7 else 3
    statements = []
    for x, y in combinations(range(data.n), 2):
        for cond in condition_sets(data.n, x, y, max_cond):
            statements.append(ci_test(data, x, y, cond, alpha))
    return ConstraintSet(data.n, tuple(statements), WeightScheme.cw())


def _log_posterior_odds_independent(r: float, m: int, prior_param: float) -> float:
    """Posterior log-odds of independence for a sample partial correlation.

    Uses the BIC approximation of the Bayes factor for the one-parameter
    dependence model against the zero-correlation model, combined with the
    prior odds implied by prior_param.
    """
    r2 = min(r * r, 1.0 - 1e-15)
    log_bf_indep = (m / 2.0) * math.log(1.0 - r2) + 0.5 * math.log(m)
    return log_bf_indep + math.log(prior_param / (1.0 - prior_param))


def assign_weights(
    cs: ConstraintSet, scheme: WeightScheme, data: Dataset | None = None
) -> ConstraintSet:
    """Reweight a constraint set under the given scheme.

    cw sets every weight to 1; hw keeps independents at 1 and makes every
    dependent statement infinite; lw recomputes both verdict and weight
    from the posterior log-odds, which requires the dataset.
    """
    if scheme.kind == "lw":
        if data is None:
            raise ValueError("log weighting requires the dataset")
        cov = np.atleast_2d(np.cov(data.values, rowvar=False, ddof=1))
    out = []
    for s in cs.statements:
        if scheme.kind == "cw":
            out.append(CiStatement(s.x, s.y, s.cond, s.verdict, 1.0, s.degenerate))
        elif scheme.kind == "hw":
            w = INF if s.verdict is Verdict.DEPENDENT else 1.0
            out.append(CiStatement(s.x, s.y, s.cond, s.verdict, w, s.degenerate))
        else:
            r = partial_correlation(cov, s.x, s.y, s.cond)
            odds = _log_posterior_odds_independent(r, data.m, scheme.prior_param)
            verdict = Verdict.INDEPENDENT if odds > 0 else Verdict.DEPENDENT
            out.append(CiStatement(s.x, s.y, s.cond, verdict, abs(odds), s.degenerate))
    return ConstraintSet(cs.n, tuple(out), scheme)


def constraints_to_csv(cs: ConstraintSet) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "y", "cond", "verdict", "weight"])
    for s in cs.statements:
        w = "inf" if s.weight == INF else repr(s.weight)
        writer.writerow([s.x, s.y, cond_to_field(s.cond), s.verdict.value, w])
    return buf.getvalue()


def constraints_from_csv(
    text: str, n: int | None = None, scheme: WeightScheme | None = None
) -> ConstraintSet:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header[:5]] != ["x", "y", "cond", "verdict", "weight"]:
        raise ValueError("constraint CSV must start with header x,y,cond,verdict,weight")
    statements = []
    top = -1
    for row in reader:
        if not row:
            continue
        x, y = int(row[0]), int(row[1])
        cond = cond_from_field(row[2])
        verdict = Verdict(row[3].strip())
        weight = INF if row[4].strip() == "inf" else float(row[4])
        statements.append(CiStatement(x, y, cond, verdict, weight))
        top = max(top, x, y, *cond) if cond else max(top, x, y)
    if n is None:
        n = top + 1
    return ConstraintSet(n, tuple(statements), scheme or WeightScheme.cw())


def dataset_to_csv(data: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in data.values:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def dataset_from_csv(text: str) -> Dataset:
    rows = [
        [float(tok) for tok in row]
        for row in csv.reader(io.StringIO(text))
        if row
    ]
    if not rows:
        raise ValueError("dataset CSV is empty")
    return Dataset(np.array(rows, dtype=float))
