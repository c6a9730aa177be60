"""Exact Jacobian rank tests for model and parameter identifiability."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from ..errors import InapplicableError
from ..ioeq import CoefficientMap, coefficient_map, trial_point
from ..model import Model, validate
from ..polyalg import exact_rank

RESAMPLE_ATTEMPTS = 3


def jacobian(cm: CoefficientMap, x: Mapping[str, int | Fraction]) -> list[list]:
    """Exact Jacobian of the coefficient map at ``x`` (rows: coefficients,
    columns: ``cm.symbols``)."""
    missing = [s for s in cm.symbols if s not in x]
    if missing:
        raise KeyError(f"missing assignment for {missing}")
    return [[d.evaluate(x) for d in row] for row in cm.derivatives()]


@lru_cache(maxsize=256)
def cached_coefficient_map(m: Model, method: str = "auto") -> CoefficientMap:
    return coefficient_map(m, method)


def _check_preconditions(m: Model) -> None:
    rep = validate(m)
    if not rep.strongly_connected:
        raise InapplicableError("identifiability analysis needs a strongly connected model")
    if not m.inputs:
        raise InapplicableError("identifiability analysis needs at least one input")


@dataclass
class RankAnalysis:
    """Exact ranks at random integer points and the per-parameter row-space
    test evaluated at every point attaining the generic (maximal) rank."""

    n_params: int
    seed: int
    points: list[dict]
    ranks: list[int]
    generic_rank: int
    attempts: int
    local: dict[str, bool]
    discrepancies: dict[str, list[int]] = field(default_factory=dict)

    @property
    def model_identifiable(self) -> bool:
        return self.generic_rank == self.n_params

    @property
    def stable(self) -> bool:
        return len(set(self.ranks)) == 1


def _rank_at(cm: CoefficientMap, point) -> tuple[list[list], int]:
    j = jacobian(cm, point)
    return j, exact_rank(j)


def rank_analysis(m: Model, points: int = 5, seed: int = 42, method: str = "auto",
                  cm: CoefficientMap | None = None) -> RankAnalysis:
    """Ranks at ``points`` seeded points; if they disagree the whole batch is
    redrawn (up to three times) and the maximal rank is taken as generic."""
    _check_preconditions(m)
    cm = cm or cached_coefficient_map(m, method)
    syms = cm.symbols
    attempt = 0
    while True:
        pts = [trial_point(syms, seed + 7919 * attempt, t) for t in range(points)]
        evaluated = [_rank_at(cm, p) for p in pts]
        ranks = [r for _, r in evaluated]
        attempt += 1
        if len(set(ranks)) == 1 or attempt >= RESAMPLE_ATTEMPTS:
            break
    generic = max(ranks)
    local: dict[str, bool] = {}
    discrepancies: dict[str, list[int]] = {}
    for idx, s in enumerate(syms):
        votes = []
        for t, (jac, r) in enumerate(evaluated):
            if r != generic:
                continue
            unit = [1 if c == idx else 0 for c in range(len(syms))]
            votes.append((t, exact_rank(jac + [unit]) == r))
        yes = sum(v for _, v in votes)
        local[s] = 2 * yes > len(votes)
        minority = [t for t, v in votes if v != local[s]]
        if minority:
            discrepancies[s] = minority
    return RankAnalysis(len(syms), seed, pts, ranks, generic, attempt, local, discrepancies)


def model_identifiability(m: Model, points: int = 5, seed: int = 42,
                          method: str = "auto") -> str:
    """``"identifiable"`` iff the generic Jacobian rank equals |E| + |Leak|."""
    ra = rank_analysis(m, points, seed, method)
    return "identifiable" if ra.model_identifiable else "unidentifiable"


def parameter_local_identifiability(m: Model, p: str, points: int = 5, seed: int = 42,
                                    method: str = "auto") -> bool:
    """True iff dp lies in the row space of the Jacobian at generic points."""
    if p not in m.parameters:
        raise KeyError(f"{p!r} is not a parameter of this model")
    return rank_analysis(m, points, seed, method).local[p]
