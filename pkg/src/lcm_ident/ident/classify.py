"""Aggregate closed forms, rank tests, symmetry witnesses and fiber samples
into one verdict per parameter."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping

from ..ioeq import CoefficientMap
from ..model import Model, Permutation, automorphisms
from .fiber import FiberReport, fiber_sample
from .rank import RankAnalysis, cached_coefficient_map, rank_analysis
from .symmetry import SymmetryWitness, symmetry_sling_witness


class IdentClass(str, Enum):
    GLOBAL = "GloballyIdentifiable"
    GENERIC_GLOBAL = "GenericallyGloballyIdentifiable"
    SLING = "SLING"
    UNIDENTIFIABLE = "Unidentifiable"
    UNRESOLVED = "LocallyIdentifiableUnresolved"
    UNKNOWN = "Unknown"


EVIDENCE_KINDS = ("closed-form", "symmetry-witness", "rank-test", "fiber-sample", "paper-theorem")


@dataclass(frozen=True)
class Evidence:
    kind: str
    detail: Any

    def __post_init__(self):
        if self.kind not in EVIDENCE_KINDS:
            raise ValueError(f"unknown evidence kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "detail": self.detail}


@dataclass(frozen=True)
class RegistryEntry:
    """What is known in closed form about one parameter of one family.

    ``witness(seed)`` (optional) returns a JSON-ready dict demonstrating a
    second fiber point with a different value of the parameter, or None.
    """

    cls: IdentClass
    formula: str
    source: str
    witness: Callable[[int], dict | None] | None = None
    conjecture: bool = False


Registry = Mapping[str, RegistryEntry]


@dataclass
class IdentConfig:
    points: int = 5
    starts: int = 200
    seed: int = 42
    fiber_base_points: int = 3
    use_fiber: bool = True
    method: str = "auto"
    # maps a model to its closed-form registry; None means the mammillary one
    registry: Callable[[Model], Registry] | None = None

    def to_dict(self) -> dict:
        return {"points": self.points, "starts": self.starts, "seed": self.seed,
                "fiber_base_points": self.fiber_base_points, "use_fiber": self.use_fiber,
                "method": self.method}


@dataclass
class Verdict:
    parameter: str
    cls: IdentClass
    evidence: list[Evidence]
    seeds: list[int]
    config: dict
    empirical: bool = False
    conjecture_support: bool = False

    @property
    def label(self) -> str:
        if self.conjecture_support:
            return f"{self.cls.value} (conjecture-supported)"
        return self.cls.value

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "class": self.cls.value,
            "label": self.label,
            "empirical": self.empirical,
            "evidence": [e.to_dict() for e in self.evidence],
            "seeds": list(self.seeds),
            "config": dict(self.config),
        }


def _default_registry(m: Model) -> Registry:
    from ..mammillary import registry_for_model
    return registry_for_model(m)


class ModelAnalyzer:
    """Caches the expensive per-model pieces shared by all parameters."""

    def __init__(self, m: Model, config: IdentConfig | None = None):
        self.model = m
        self.config = config or IdentConfig()
        lookup = self.config.registry or _default_registry
        self.registry: Registry = lookup(m) or {}
        self._cm: CoefficientMap | None = None
        self._rank: RankAnalysis | None = None
        self._autos: list[Permutation] | None = None
        self._fibers: list[FiberReport] | None = None

    @property
    def coefficient_map(self) -> CoefficientMap:
        if self._cm is None:
            self._cm = cached_coefficient_map(self.model, self.config.method)
        return self._cm

    @property
    def rank(self) -> RankAnalysis:
        if self._rank is None:
            self._rank = rank_analysis(self.model, self.config.points, self.config.seed,
                                       self.config.method, self.coefficient_map)
        return self._rank

    @property
    def automorphisms(self) -> list[Permutation]:
        if self._autos is None:
            self._autos = automorphisms(self.model)
        return self._autos

    def fiber_seeds(self) -> list[int]:
        return [self.config.seed + b for b in range(self.config.fiber_base_points)]

    @property
    def fibers(self) -> list[FiberReport]:
        if self._fibers is None:
            self._fibers = [fiber_sample(self.model, None, self.config.starts, s,
                                         self.coefficient_map) for s in self.fiber_seeds()]
        return self._fibers

    def _rank_evidence(self, p: str) -> Evidence:
        ra = self.rank
        detail = {"locally_identifiable": ra.local[p], "generic_rank": ra.generic_rank,
                  "n_parameters": ra.n_params, "ranks": ra.ranks, "points": len(ra.ranks)}
        if p in ra.discrepancies:
            detail["discrepant_points"] = ra.discrepancies[p]
        return Evidence("rank-test", detail)

    def classify(self, p: str) -> Verdict:
        if p not in self.model.parameters:
            raise KeyError(f"{p!r} is not a parameter of this model")
        cfg = self.config
        seeds = [cfg.seed]
        entry = self.registry.get(p)

        def verdict(cls, evidence, **kw):
            return Verdict(p, cls, evidence, seeds, cfg.to_dict(), **kw)

        # (1) closed form
        if entry is not None and entry.cls in (IdentClass.GLOBAL, IdentClass.GENERIC_GLOBAL):
            return verdict(entry.cls, [
                Evidence("closed-form", {"formula": entry.formula}),
                Evidence("paper-theorem", {"source": entry.source}),
            ])

        # (2) rank test
        rank_ev = self._rank_evidence(p)
        if not self.rank.local[p]:
            evidence = [rank_ev]
            conj = entry is not None and entry.conjecture
            if conj:
                evidence.append(Evidence("paper-theorem",
                                         {"source": entry.source, "status": "conjecture-support"}))
            return verdict(IdentClass.UNIDENTIFIABLE, evidence, conjecture_support=conj)

        # (3) witnesses: graph symmetry, then a registered constructive one
        w: SymmetryWitness | None = symmetry_sling_witness(
            self.model, p, cfg.seed, self.automorphisms, self.coefficient_map)
        if w is not None:
            return verdict(IdentClass.SLING, [rank_ev, Evidence("symmetry-witness", {
                "permutation": repr(w.sigma), "image": w.image, "statement": w.statement,
                "coefficients_equal": w.coefficients_equal})])
        if entry is not None and entry.witness is not None:
            built = entry.witness(cfg.seed)
            if built is not None:
                return verdict(IdentClass.SLING, [
                    rank_ev, Evidence("closed-form", built),
                    Evidence("paper-theorem", {"source": entry.source})])

        if not cfg.use_fiber:
            return verdict(IdentClass.UNRESOLVED, [rank_ev])

        # (4)/(5) fiber sampling at several base points
        reports = self.fibers
        seeds = [cfg.seed] + self.fiber_seeds()
        counts = [r.distinct_counts[p] for r in reports]
        fiber_ev = Evidence("fiber-sample", {
            "distinct_counts": counts, "converged_starts": [r.converged for r in reports],
            "seeds": [r.seed for r in reports], "starts": cfg.starts, "empirical": True})
        if any(c >= 2 for c in counts):
            return verdict(IdentClass.SLING, [rank_ev, fiber_ev], empirical=True)
        if counts and all(c == 1 for c in counts):
            return verdict(IdentClass.GENERIC_GLOBAL, [rank_ev, fiber_ev], empirical=True)
        return verdict(IdentClass.UNRESOLVED, [rank_ev, fiber_ev], empirical=True)


def classify_parameter(m: Model, p: str, config: IdentConfig | None = None) -> Verdict:
    return ModelAnalyzer(m, config).classify(p)


def classify_model(m: Model, config: IdentConfig | None = None) -> list[Verdict]:
    an = ModelAnalyzer(m, config)
    return [an.classify(p) for p in m.parameters]
