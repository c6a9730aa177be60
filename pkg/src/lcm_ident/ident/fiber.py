"""Multi-start damped Newton sampling of coefficient-map fibers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._parallel import pmap
from ..ioeq import CoefficientMap
from ..model import Model
from .rank import cached_coefficient_map

RESIDUAL_TOL = 1e-10
CLUSTER_TOL = 1e-6
MAX_ITER = 200
MAX_HALVINGS = 30
POLISH_STEPS = 3
BASE_RANGE = (0.5, 5.0)
START_RANGE = (0.1, 10.0)
DIVERGED = 1e8
# a start whose accepted step stays this heavily damped is treated as divergent
STALL_STEP = 2.0 ** -20
STALL_ITERS = 5


@dataclass
class FiberReport:
    parameters: tuple[str, ...]
    base_point: dict[str, float]
    target: list[float]
    starts: int
    seed: int
    solutions: list[list[float]]
    distinct_counts: dict[str, int]
    distinct_values: dict[str, list[float]]
    converged: int
    max_residual: float | None
    sign_crossing: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "parameters": list(self.parameters),
            "base_point": self.base_point,
            "target": self.target,
            "starts": self.starts,
            "seed": self.seed,
            "converged_starts": self.converged,
            "clusters": len(self.solutions),
            "solutions": self.solutions,
            "distinct_counts": self.distinct_counts,
            "distinct_values": self.distinct_values,
            "max_residual": self.max_residual,
            "sign_crossing_solutions": self.sign_crossing,
        }


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= CLUSTER_TOL * max(1.0, abs(a), abs(b))


def _newton(cm: CoefficientMap, target: np.ndarray, weights: np.ndarray,
            x: np.ndarray) -> tuple[np.ndarray, float] | None:
    def resid(y):
        return (cm.eval_float(y) - target) / weights

    r = resid(x)
    norm = float(np.linalg.norm(r))
    polished = 0
    crawling = 0
    for _ in range(MAX_ITER):
        if norm <= RESIDUAL_TOL:
            if polished >= POLISH_STEPS:
                break
            polished += 1
        jac = cm.jacobian_float(x) / weights[:, None]
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        t = 1.0
        for _ in range(MAX_HALVINGS):
            cand = x + t * step
            rc = resid(cand)
            nc = float(np.linalg.norm(rc))
            if np.isfinite(nc) and nc < norm:
                break
            t *= 0.5
        else:
            break
        crawling = crawling + 1 if t < STALL_STEP else 0
        if crawling >= STALL_ITERS:
            break
        x, r, norm = cand, rc, nc
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGED:
            return None
    if norm <= RESIDUAL_TOL:
        return x, norm
    return None


def sample_base_point(params, seed: int) -> dict[str, float]:
    rng = np.random.default_rng([seed, 0xBA5E])
    lo, hi = BASE_RANGE
    return {p: float(v) for p, v in zip(params, rng.uniform(lo, hi, size=len(params)))}


def fiber_sample(m: Model, base_point: dict[str, float] | None = None, starts: int = 200,
                 seed: int = 42, cm: CoefficientMap | None = None) -> FiberReport:
    """Solve C(k) = C(k*) from ``starts`` starting points and summarize the
    solutions found. Start 0 is k* itself; start i > 0 is drawn from a
    generator seeded with ``(seed, i)``."""
    cm = cm or cached_coefficient_map(m)
    params = cm.symbols
    if base_point is None:
        base_point = sample_base_point(params, seed)
    x_star = np.array([float(base_point[p]) for p in params])
    target = cm.eval_float(x_star)
    weights = np.maximum(1.0, np.abs(target))

    def run(i: int):
        if i == 0:
            x0 = x_star.copy()
        else:
            lo, hi = START_RANGE
            x0 = np.random.default_rng([seed, i]).uniform(lo, hi, size=len(params))
        return _newton(cm, target, weights, x0)

    results = pmap(run, range(max(1, starts)))
    sols = [(x, res) for x, res in (r for r in results if r is not None)]

    clusters: list[np.ndarray] = []
    for x, _ in sols:
        if not any(all(_close(a, b) for a, b in zip(x, c)) for c in clusters):
            clusters.append(x)
    distinct: dict[str, list[float]] = {}
    for idx, p in enumerate(params):
        vals: list[float] = []
        for c in clusters:
            if not any(_close(c[idx], v) for v in vals):
                vals.append(float(c[idx]))
        distinct[p] = sorted(vals)
    return FiberReport(
        parameters=params,
        base_point={p: float(base_point[p]) for p in params},
        target=[float(v) for v in target],
        starts=starts,
        seed=seed,
        solutions=[[float(v) for v in c] for c in clusters],
        distinct_counts={p: len(v) for p, v in distinct.items()},
        distinct_values=distinct,
        converged=len(sols),
        max_residual=max((r for _, r in sols), default=None),
        sign_crossing=[i for i, c in enumerate(clusters) if np.any(c <= 0)],
    )
