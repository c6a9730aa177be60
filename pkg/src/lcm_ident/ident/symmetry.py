"""Automorphism witnesses that a parameter is not generically globally
identifiable."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvariantViolation
from ..ioeq import CoefficientMap, trial_point
from ..model import Model, Permutation, automorphisms
from ..polyalg import param_symbol
from .rank import cached_coefficient_map


@dataclass(frozen=True)
class SymmetryWitness:
    sigma: Permutation
    parameter: str
    image: str
    point: dict
    permuted_point: dict
    coefficients_equal: bool

    @property
    def statement(self) -> str:
        return (f"automorphism {self.sigma!r} maps {self.parameter} to {self.image}; "
                f"C(k*) = C(sigma(k*)) exactly while the {self.parameter}-coordinates differ "
                f"({self.point[self.parameter]} vs {self.permuted_point[self.parameter]})")


def image_parameter(m: Model, sigma: Permutation, p: str) -> str:
    to, frm = m.parameter_edge(p)
    if to == 0:
        return param_symbol(0, sigma(frm))
    return param_symbol(sigma(to), sigma(frm))


def permute_point(m: Model, sigma: Permutation, point: dict) -> dict:
    """The point sigma~(k*): coordinate k_ij takes the value k*_{σ(i)σ(j)}."""
    out = {}
    for p in m.parameters:
        out[p] = point[image_parameter(m, sigma, p)]
    return out


def symmetry_sling_witness(m: Model, p: str, seed: int = 42, autos: list[Permutation] | None = None,
                           cm: CoefficientMap | None = None) -> SymmetryWitness | None:
    """First automorphism (in search order) moving ``p``'s edge, re-verified by
    exact evaluation of the coefficient map at a random point and its image."""
    if p not in m.parameters:
        raise KeyError(f"{p!r} is not a parameter of this model")
    autos = automorphisms(m) if autos is None else autos
    cm = cm or cached_coefficient_map(m)
    for sigma in autos:
        q = image_parameter(m, sigma, p)
        if q == p:
            continue
        for attempt in range(10):
            point = trial_point(m.parameters, seed, 1000 + attempt)
            if point[p] != point[q]:
                break
        permuted = permute_point(m, sigma, point)
        equal = cm.evaluate(point) == cm.evaluate(permuted)
        if not equal:
            raise InvariantViolation(
                f"automorphism {sigma!r} does not preserve the coefficient map")
        return SymmetryWitness(sigma, p, q, point, permuted, equal)
    return None
