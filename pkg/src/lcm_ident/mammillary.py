"""Mammillary (bidirected star) models with one input, one output and no leaks.

Compartment 1 is the centre. Up to relabelling the peripheral compartments
there are five families, named by ``(input, output)``: (1,1), (1,2), (2,1),
(2,2) and (2,3). This module builds them, checks the structural identities
of their input-output coefficients, recovers parameters from coefficient
values, constructs explicit second fiber points for k12 in family (1,2), and
assembles the per-family classification table.

Throughout, ``sigma`` is the multiset of incoming peripheral rates
{k13, ..., k1n} and ``g_t`` is the t-edge forest sum on the star with both
1<->2 edges removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from ._parallel import pmap
from .errors import DegenerateError, InvariantViolation, ModelError
from .ident.classify import IdentClass, IdentConfig, ModelAnalyzer, RegistryEntry, Verdict
from .ident.rank import cached_coefficient_map, rank_analysis
from .ioeq import IOEquation, all_spanning_incoming_forests, coeffs_forest, forest_sum, trial_point
from .model import Model, Permutation
from .polyalg import (
    MultiPoly,
    UniPoly,
    complex_roots,
    elementary_symmetric,
    elementary_symmetric_values,
    param_symbol,
    parse_param_symbol,
    real_roots,
    recover_multiset,
    symbolic_det,
)

FAMILIES: tuple[tuple[int, int], ...] = ((1, 1), (1, 2), (2, 1), (2, 2), (2, 3))
COEFF_MATCH_TOL = 1e-9
K12_GAP_MIN = 1e-6
ROOT_SEPARATION = 1e-9


# -- families ----------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyId:
    n: int
    input: int
    output: int

    def __post_init__(self):
        if (self.input, self.output) not in FAMILIES:
            raise ModelError(f"({self.input},{self.output}) is not a family representative; "
                             f"use one of {list(FAMILIES)}")
        low = 3 if (self.input, self.output) == (1, 1) else 4
        if self.n < low:
            raise ModelError(f"family ({self.input},{self.output}) needs n >= {low}, got {self.n}")

    @property
    def pair(self) -> tuple[int, int]:
        return (self.input, self.output)

    def __str__(self) -> str:
        return f"M{self.n}({self.input},{self.output})"


def min_n(pair: tuple[int, int]) -> int:
    return 3 if pair == (1, 1) else 4


def star_edges(n: int) -> list[tuple[int, int]]:
    return [e for v in range(2, n + 1) for e in ((1, v), (v, 1))]


def make(n: int, i: int, j: int) -> Model:
    """Bidirected n-star centred at 1 with input ``i`` and output ``j``."""
    if n < 3:
        raise ModelError(f"a mammillary model needs n >= 3, got {n}")
    for v in (i, j):
        if not 1 <= v <= n:
            raise ModelError(f"index out of range 1..{n}: {v}")
    return Model.build(n, star_edges(n), [i], [j])


def family_model(f: FamilyId) -> Model:
    return make(f.n, f.input, f.output)


def incoming(n: int) -> list[str]:
    """k13, ..., k1n."""
    return [param_symbol(1, v) for v in range(3, n + 1)]


def outgoing(n: int) -> list[str]:
    """k31, ..., kn1."""
    return [param_symbol(v, 1) for v in range(3, n + 1)]


@dataclass(frozen=True)
class Reduction:
    """Relabelling ``sigma`` (original label -> representative label) taking a
    star model onto its family representative."""

    family: FamilyId
    sigma: Permutation

    def to_dict(self) -> dict:
        return {"family": [self.family.input, self.family.output], "n": self.family.n,
                "permutation": repr(self.sigma),
                "images": {str(v): self.sigma(v) for v in range(1, self.family.n + 1)}}


def _reduce(n: int, centre: int, i: int, j: int) -> Reduction:
    if i == centre and j == centre:
        pair, special = (1, 1), []
    elif i == centre:
        pair, special = (1, 2), [j]
    elif j == centre:
        pair, special = (2, 1), [i]
    elif i == j:
        pair, special = (2, 2), [i]
    else:
        pair, special = (2, 3), [i, j]
    order = special + [v for v in range(1, n + 1) if v != centre and v not in special]
    images = [0] * n
    images[centre - 1] = 1
    for pos, v in enumerate(order, start=2):
        images[v - 1] = pos
    return Reduction(FamilyId(n, *pair), Permutation(images))


def reduce_to_family(n: int, i: int, j: int) -> Reduction:
    """Map ``make(n, i, j)`` onto one of the five representatives."""
    make(n, i, j)
    return _reduce(n, 1, i, j)


def detect_mammillary(m: Model) -> Reduction | None:
    """Recognise a (possibly relabelled) one-input one-output leak-free star."""
    if m.n < 3 or m.leaks or len(m.inputs) != 1 or len(m.outputs) != 1:
        return None
    if len(m.edges) != 2 * (m.n - 1):
        return None
    for centre in range(1, m.n + 1):
        want = {e for v in range(1, m.n + 1) if v != centre for e in ((centre, v), (v, centre))}
        if set(m.edges) == want:
            (i,) = m.inputs
            (j,) = m.outputs
            try:
                return _reduce(m.n, centre, i, j)
            except ModelError:
                return None
    return None


# -- left-hand side structure ------------------------------------------------------------

@dataclass
class LhsStructure:
    n: int
    sigma: list[str]
    g: list[MultiPoly]
    m: list[list[MultiPoly]]
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def reduced_star(n: int) -> Model:
    """The star without its two 1<->2 edges."""
    return Model.build(n, [e for e in star_edges(n) if e not in ((1, 2), (2, 1))])


def esp_matrix(n: int, symbols: Sequence[str] | None = None) -> list[list[MultiPoly]]:
    """(n-2)x(n-2) matrix whose (r, c) entry is e_r of sigma without its c-th member."""
    sig = incoming(n)
    syms = symbols or make(n, 1, 2).parameters
    rows = []
    for r in range(n - 2):
        rows.append([elementary_symmetric(r, [s for s in sig if s != drop]).with_symbols(syms)
                     for drop in sig])
    return rows


def esp_matrix_values(values: Sequence[float]) -> np.ndarray:
    """Numeric version of :func:`esp_matrix` for sigma = ``values``."""
    k = len(values)
    out = np.empty((k, k))
    for c in range(k):
        rest = [v for idx, v in enumerate(values) if idx != c]
        e = elementary_symmetric_values(rest)
        for r in range(k):
            out[r, c] = e[r]
    return out


@lru_cache(maxsize=16)
def _forest_equation(n: int, i: int, j: int) -> IOEquation:
    return coeffs_forest(make(n, i, j))


def lhs_structure(n: int) -> LhsStructure:
    """Forest sums g_t, the ESP matrix, and exact checks of how they assemble
    into the left-hand coefficients."""
    if n < 3:
        raise ModelError(f"n >= 3 required, got {n}")
    base = make(n, 1, 2)
    syms = base.parameters
    sig = incoming(n)
    tilde = reduced_star(n)
    by_size: dict[int, list] = {}
    for f in all_spanning_incoming_forests(tilde):
        by_size.setdefault(len(f), []).append(f)
    g = [forest_sum(tilde, by_size.get(t, []), syms) for t in range(n)]
    mat = esp_matrix(n, syms)
    e = [elementary_symmetric(t, sig).with_symbols(syms) for t in range(n - 1)]
    e.append(MultiPoly.zero(syms))  # e_{n-1} of an (n-2)-set
    out_vars = [MultiPoly.var(s, syms) for s in outgoing(n)]
    k12, k21 = MultiPoly.var("k12", syms), MultiPoly.var("k21", syms)

    checks = {"g0 = 1": g[0] == MultiPoly.const(1, syms),
              "g_{n-1} = 0": g[n - 1].is_zero()}
    g_ok = True
    for t in range(1, n - 1):
        rhs = e[t]
        for c, x in enumerate(out_vars):
            rhs = rhs + mat[t - 1][c] * x
        g_ok &= g[t] == rhs
    checks["g = e(sigma) + M * outgoing"] = g_ok
    c = _forest_equation(n, 1, 2).c
    checks["c0 = 0"] = c[0].is_zero()
    checks["c_{n-1-t} = k21 e_t + k12 g_t + g_{t+1}"] = all(
        c[n - 1 - t] == k21 * e[t] + k12 * g[t] + g[t + 1] for t in range(n - 1))
    return LhsStructure(n, sig, g, mat, checks)


@dataclass(frozen=True)
class VandermondeResult:
    n: int
    holds: bool
    sign: int  # +1, -1, or 0 when neither sign matched

    def __bool__(self) -> bool:
        return self.holds


def vandermonde_product(n: int) -> MultiPoly:
    syms = make(n, 1, 2).parameters
    prod = MultiPoly.const(1, syms)
    sig = incoming(n)
    for a in range(len(sig)):
        for b in range(a + 1, len(sig)):
            prod = prod * (MultiPoly.var(sig[a], syms) - MultiPoly.var(sig[b], syms))
    return prod


def vandermonde_check(n: int) -> VandermondeResult:
    """det(ESP matrix) against +/- the Vandermonde product of sigma."""
    if n < 4:
        raise ModelError(f"n >= 4 required, got {n}")
    det = symbolic_det(esp_matrix(n))
    v = vandermonde_product(n)
    if det == v:
        return VandermondeResult(n, True, 1)
    if det == -v:
        return VandermondeResult(n, True, -1)
    return VandermondeResult(n, False, 0)


def _alternating_sums(n: int, k12, c: Sequence, e: Sequence):
    lhs = sum((-1) ** t * k12 ** (n - 2 - t) * c[n - 1 - t] for t in range(n - 1))
    weight = sum((-1) ** t * k12 ** (n - 2 - t) * e[t] for t in range(n - 1))
    return lhs, weight


def big_sum_check(n: int, x: Mapping[str, int | Fraction]):
    """Exact residual of  sum_t (-1)^t k12^{n-2-t} c_{n-1-t}
    - (sum_t (-1)^t k12^{n-2-t} e_t(sigma)) k21 - k12^{n-1}."""
    c = [p.evaluate(x) for p in _forest_equation(n, 1, 2).c]
    e = elementary_symmetric_values([x[s] for s in incoming(n)])
    lhs, weight = _alternating_sums(n, x["k12"], c, e)
    return lhs - weight * x["k21"] - x["k12"] ** (n - 1)


def rhs_identities(f: FamilyId) -> dict[str, bool]:
    """Exact d-coefficient identities for one family against the forest engine."""
    n = f.n
    m = family_model(f)
    syms = m.parameters
    eq = _forest_equation(n, f.input, f.output)
    d = eq.d[f.input]
    c = eq.c
    var = {s: MultiPoly.var(s, syms) for s in syms}
    sig = incoming(n)
    e = [elementary_symmetric(t, sig).with_symbols(syms) for t in range(n - 1)]
    out: dict[str, bool] = {}
    if f.pair == (1, 2):
        out["d_{n-2-t} = k21 e_t(sigma)"] = all(d[n - 2 - t] == var["k21"] * e[t] for t in range(n - 1))
    elif f.pair == (2, 1):
        out["d_{n-2-t} = k12 e_t(sigma)"] = all(d[n - 2 - t] == var["k12"] * e[t] for t in range(n - 1))
    elif f.pair == (2, 3):
        rest = sig[1:]
        ep = [elementary_symmetric(t, rest).with_symbols(syms) for t in range(n - 2)]
        out["d_{n-2} = 0"] = d[n - 2].is_zero()
        out["d_{n-3-t} = k12 k31 e_t(sigma')"] = all(
            d[n - 3 - t] == var["k12"] * var["k31"] * ep[t] for t in range(n - 2))
    elif f.pair == (2, 2):
        out["c_{n-2} - d_{n-3} = k12 (d_{n-2} - k21)"] = (
            c[n - 2] - d[n - 3] == var["k12"] * (d[n - 2] - var["k21"]))
        out["c_{n-1} - d_{n-2} = k12"] = c[n - 1] - d[n - 2] == var["k12"]
    else:
        every = [param_symbol(1, v) for v in range(2, n + 1)]
        out["d_k = e_{n-1-k}(k12..k1n)"] = all(
            d[k] == elementary_symmetric(n - 1 - k, every).with_symbols(syms) for k in range(n))
    return out


def top_d_coefficient(f: FamilyId) -> MultiPoly:
    """d_{n-1}; a constant (1 when input and output coincide, else 0)."""
    return _forest_equation(f.n, f.input, f.output).d[f.input][f.n - 1]


# -- recovery -------------------------------------------------------------------------------

@dataclass
class Recovery:
    family: FamilyId
    values: dict[str, object] = field(default_factory=dict)
    candidates: dict[str, list[float]] = field(default_factory=dict)
    products: dict[str, object] = field(default_factory=dict)
    multisets: dict[str, list[float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        def num(v):
            return str(v) if isinstance(v, Fraction) else v
        return {"family": [self.family.input, self.family.output], "n": self.family.n,
                "values": {k: num(v) for k, v in self.values.items()},
                "candidates": self.candidates,
                "products": {k: num(v) for k, v in self.products.items()},
                "multisets": self.multisets}


def _exact(v):
    return Fraction(v) if isinstance(v, int) else v


def _div(a, b, what: str):
    if b == 0:
        raise DegenerateError(f"zero denominator: {what}")
    return a / b


def h_polynomial(n: int, k21, e: Sequence, c: Sequence) -> UniPoly:
    """z^{n-1} + sum_{i=2..n} (-1)^i (k21 e_{i-2} - c_{n-i+1}) z^{n-i}; k12 is a root."""
    coeffs = [0] * n
    coeffs[n - 1] = 1
    for i in range(2, n + 1):
        coeffs[n - i] = (-1) ** i * (k21 * e[i - 2] - c[n - i + 1])
    return UniPoly(coeffs)


def recover(f: FamilyId, c: Sequence, d: Sequence) -> Recovery:
    """Parameters (or finite candidate sets) from coefficient values.

    ``c`` and ``d`` are indexed by power: c[k], d[k] for k = 0..n-1. Integer
    and Fraction inputs give exact closed-form values; floats give floats.
    """
    n = f.n
    if len(c) != n or len(d) != n:
        raise ValueError(f"expected {n} c- and {n} d-coefficients, got {len(c)} and {len(d)}")
    c = [_exact(v) for v in c]
    d = [_exact(v) for v in d]
    rec = Recovery(f)
    if f.pair == (1, 1):
        e = [_div(d[n - 1 - t], d[n - 1], "d_{n-1}") for t in range(1, n)]
        rec.multisets["k12..k1n"] = recover_multiset(e)
    elif f.pair == (1, 2):
        k21 = d[n - 2]
        rec.values["k21"] = k21
        e = [_div(d[n - 2 - t], k21, "d_{n-2} = k21") for t in range(n - 1)]
        rec.multisets["k13..k1n"] = recover_multiset(e[1:])
        rec.candidates["k12"] = real_roots(h_polynomial(n, k21, e, c))
    elif f.pair == (2, 1):
        k12 = d[n - 2]
        rec.values["k12"] = k12
        e = [_div(d[n - 2 - t], k12, "d_{n-2} = k12") for t in range(n - 1)]
        lhs, weight = _alternating_sums(n, k12, c, e)
        rec.values["k21"] = _div(lhs - k12 ** (n - 1), weight, "alternating e-sum")
        rec.multisets["k13..k1n"] = recover_multiset(e[1:])
    elif f.pair == (2, 2):
        k12 = c[n - 1] - d[n - 2]
        rec.values["k12"] = k12
        rec.values["k21"] = d[n - 2] - _div(c[n - 2] - d[n - 3], k12, "c_{n-1} - d_{n-2} = k12")
    else:
        prod = d[n - 3]
        rec.products["k12*k31"] = prod
        e = [_div(d[n - 3 - t], prod, "d_{n-3} = k12 k31") for t in range(n - 2)]
        if n == 4:
            rec.values["k14"] = e[1]
        rec.multisets["k14..k1n"] = recover_multiset(e[1:])
    return rec


def family_coefficients(f: FamilyId, point: Mapping) -> tuple[list, list]:
    """(c, d) coefficient values of a family at ``point``."""
    eq = _forest_equation(f.n, f.input, f.output)
    return ([p.evaluate(point) for p in eq.c], [p.evaluate(point) for p in eq.d[f.input]])


# -- explicit second fiber point for k12 in family (1,2) ---------------------------------

@dataclass
class AlternatePoint:
    n: int
    base: dict[str, float]
    point: dict[str, float]
    roots: list[float]
    chosen: int
    k12_gap: float
    coefficient_error: float

    def to_dict(self) -> dict:
        return {"n": self.n, "base_point": self.base, "alternate_point": self.point,
                "h_roots": self.roots, "root_choice": self.chosen, "k12_gap": self.k12_gap,
                "relative_coefficient_error": self.coefficient_error}


def shifted_esp_matrix(mstar: np.ndarray, scale: float) -> np.ndarray:
    """M + scale * (M with rows moved down one, first row zero)."""
    shift = np.zeros_like(mstar)
    shift[1:] = mstar[:-1]
    return mstar + scale * shift


def alternate_point_M12(n: int, base: Mapping[str, float], root_choice: int = 0,
                        shift_with_base_k12: bool = False) -> AlternatePoint:
    """A second point of M_n(1,2) with the same coefficients and a different k12.

    k21 and k13..k1n are kept, k12 becomes another real root of h (sorted in
    descending order, ``root_choice`` indexes that list), and k31..kn1 solve
    a linear system in the shifted ESP matrix. The shift must be scaled by
    the new k12; ``shift_with_base_k12`` uses the old one instead and exists
    only so tests can show that choice breaks the coefficient match.
    """
    if n < 4:
        raise ModelError(f"n >= 4 required, got {n}")
    m = make(n, 1, 2)
    kstar = {p: float(base[p]) for p in m.parameters}
    sig = [kstar[s] for s in incoming(n)]
    if len(set(sig)) != len(sig):
        raise DegenerateError("singular M~: incoming parameters k13..k1n are not distinct")
    c = [float(v) for v in family_coefficients(FamilyId(n, 1, 2), kstar)[0]]
    e = elementary_symmetric_values(sig)
    e.append(0.0)
    h = h_polynomial(n, kstar["k21"], e, c)
    roots = complex_roots(h)
    if np.any(np.abs(roots.imag) > 1e-8 * max(1.0, float(np.max(np.abs(roots))))):
        raise DegenerateError("h has non-real roots at this point")
    roots = sorted(real_roots(h), reverse=True)
    if len(roots) != n - 1:
        raise DegenerateError("h does not have n-1 real roots at this point")
    for a, b in zip(roots, roots[1:]):
        if abs(a - b) <= ROOT_SEPARATION * max(1.0, abs(a)):
            raise DegenerateError("repeated roots of h: degenerate point")
    own = min(range(len(roots)), key=lambda t: abs(roots[t] - kstar["k12"]))
    others = [r for t, r in enumerate(roots) if t != own]
    if not 0 <= root_choice < len(others):
        raise ValueError(f"root_choice must be in 0..{len(others) - 1}")
    k12_new = others[root_choice]

    mstar = esp_matrix_values(sig)
    scale = kstar["k12"] if shift_with_base_k12 else k12_new
    mt = shifted_esp_matrix(mstar, scale)
    rhs = np.array([c[n - 1 - t] - kstar["k21"] * e[t] - k12_new * e[t] - e[t + 1]
                    for t in range(n - 2)])
    try:
        out_vals = np.linalg.solve(mt, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateError("singular M~") from exc
    point = dict(kstar)
    point["k12"] = float(k12_new)
    for s, v in zip(outgoing(n), out_vals):
        point[s] = float(v)
    cm = cached_coefficient_map(m)
    x0 = np.array([kstar[p] for p in cm.symbols])
    x1 = np.array([point[p] for p in cm.symbols])
    c0, c1 = cm.eval_float(x0), cm.eval_float(x1)
    err = float(np.max(np.abs(c1 - c0)) / np.max(np.abs(c0)))
    return AlternatePoint(n, kstar, point, [float(r) for r in roots], root_choice,
                          float(abs(k12_new - kstar["k12"])), err)


def proof_regime_point(n: int, seed: int, outgoing_scale: float = 0.05) -> dict[str, float]:
    """Random point near the regime where the construction provably works:
    distinct incoming rates k12, k13..k1n and small outgoing rates k31..kn1."""
    rng = np.random.default_rng([seed, n, 0x12])
    while True:
        inc = rng.uniform(0.5, 5.0, size=n - 1)
        gaps = np.diff(np.sort(inc))
        if gaps.min() > 0.2:
            break
    point = {"k12": float(inc[0]), "k21": float(rng.uniform(0.5, 5.0))}
    for s, v in zip(incoming(n), inc[1:]):
        point[s] = float(v)
    for s in outgoing(n):
        point[s] = float(rng.uniform(0.0, outgoing_scale))
    return point


def k12_witness(n: int, seed: int) -> dict | None:
    """Evidence that k12 of M_n(1,2) has at least two fiber values."""
    for attempt in range(20):
        base = proof_regime_point(n, seed + attempt)
        try:
            alt = alternate_point_M12(n, base)
        except DegenerateError:
            continue
        if alt.coefficient_error <= COEFF_MATCH_TOL and alt.k12_gap >= K12_GAP_MIN:
            return {"construction": "alternate point via roots of h",
                    "k12_gap": alt.k12_gap, "relative_coefficient_error": alt.coefficient_error,
                    "base_k12": alt.base["k12"], "alternate_k12": alt.point["k12"]}
    return None


# -- closed-form registry -----------------------------------------------------------------

def family_registry(f: FamilyId) -> dict[str, RegistryEntry]:
    """Closed-form knowledge for the representative labelling of a family."""
    n = f.n
    GI, GGI = IdentClass.GLOBAL, IdentClass.GENERIC_GLOBAL
    if f.pair == (1, 2):
        return {
            "k21": RegistryEntry(GI, "k21 = d_{n-2}", "input-to-output edge rate is a coefficient"),
            "k12": RegistryEntry(IdentClass.SLING, "k12 is a root of h", "(1,2) family analysis",
                                 witness=lambda seed: k12_witness(n, seed)),
        }
    if f.pair == (2, 1):
        return {
            "k12": RegistryEntry(GI, "k12 = d_{n-2}", "input-to-output edge rate is a coefficient"),
            "k21": RegistryEntry(GGI, "k21 = (sum_t (-1)^t k12^{n-2-t} c_{n-1-t} - k12^{n-1}) / "
                                      "sum_t (-1)^t k12^{n-2-t} e_t(sigma), e_t = d_{n-2-t}/k12",
                                 "(2,1) family analysis"),
        }
    if f.pair == (2, 2):
        return {
            "k12": RegistryEntry(GI, "k12 = c_{n-1} - d_{n-2}", "(2,2) family analysis"),
            "k21": RegistryEntry(GGI, "k21 = d_{n-2} - (c_{n-2} - d_{n-3}) / k12",
                                 "(2,2) family analysis"),
        }
    if f.pair == (2, 3):
        if n == 4:
            return {"k14": RegistryEntry(GGI, "k14 = d0 / d1", "(2,3) family, four compartments")}
        conj = ["k12", "k21", "k13"] + outgoing(n)
        return {p: RegistryEntry(IdentClass.UNIDENTIFIABLE, "", "(2,3) unidentifiability conjecture",
                                 conjecture=True) for p in conj}
    return {}


def registry_for_model(m: Model) -> dict[str, RegistryEntry]:
    """Registry of ``m`` if it is a relabelled family representative."""
    red = detect_mammillary(m)
    if red is None:
        return {}
    inv = red.sigma.inverse()
    out = {}
    for p, entry in family_registry(red.family).items():
        to, frm = parse_param_symbol(p)
        out[param_symbol(inv(to), inv(frm))] = entry
    return out


# -- classification table -------------------------------------------------------------------

def expected_class(f: FamilyId, p: str) -> tuple[IdentClass, bool]:
    """(class, conjecture_support) predicted for parameter ``p`` of a family."""
    n = f.n
    GI, GGI, SL, UN = (IdentClass.GLOBAL, IdentClass.GENERIC_GLOBAL, IdentClass.SLING,
                       IdentClass.UNIDENTIFIABLE)
    if f.pair == (1, 1):
        return SL, False
    if f.pair == (1, 2):
        return (GI if p == "k21" else SL), False
    if f.pair in ((2, 1), (2, 2)):
        return {"k12": GI, "k21": GGI}.get(p, SL), False
    if n == 4:
        return (GGI if p == "k14" else UN), False
    if p in incoming(n)[1:]:
        return SL, False
    return UN, True


@dataclass
class TableRow:
    family: FamilyId
    verdict: Verdict
    expected: IdentClass
    expected_conjecture: bool

    @property
    def match(self) -> bool:
        return (self.verdict.cls == self.expected
                and self.verdict.conjecture_support == self.expected_conjecture)

    def to_dict(self) -> dict:
        return {"family": [self.family.input, self.family.output], "n": self.family.n,
                "parameter": self.verdict.parameter, "class": self.verdict.cls.value,
                "label": self.verdict.label, "expected": self.expected.value,
                "match": self.match,
                "evidence": sorted({e.kind for e in self.verdict.evidence})}


def table_cells(n_max: int) -> list[FamilyId]:
    return [FamilyId(n, *pair) for pair in FAMILIES for n in range(min_n(pair), n_max + 1)]


def classify_family(f: FamilyId, config: IdentConfig | None = None) -> list[TableRow]:
    an = ModelAnalyzer(family_model(f), config)
    rows = []
    for p in an.model.parameters:
        exp, conj = expected_class(f, p)
        rows.append(TableRow(f, an.classify(p), exp, conj))
    return rows


def classification_table(n_max: int, config: IdentConfig | None = None) -> list[TableRow]:
    if n_max < 5:
        raise ModelError(f"n_max >= 5 required, got {n_max}")
    cells = pmap(lambda f: classify_family(f, config), table_cells(n_max))
    return [row for cell in cells for row in cell]


# -- (2,3) probe --------------------------------------------------------------------------------

@dataclass
class ConjectureProbe:
    n: int
    seed: int
    points: int
    unidentifiable: list[str]
    predicted: list[str]
    ranks: list[int]
    d_top_zero: bool
    d_product: bool

    @property
    def agrees(self) -> bool:
        return sorted(self.unidentifiable) == sorted(self.predicted)

    def to_dict(self) -> dict:
        return {"n": self.n, "seed": self.seed, "points": self.points,
                "locally_unidentifiable": self.unidentifiable, "predicted": self.predicted,
                "agrees": self.agrees, "ranks": self.ranks,
                "d_{n-2} = 0": self.d_top_zero, "d_{n-3} = k12 k31": self.d_product}


def conjecture_probe_M23(n: int, points: int = 5, seed: int = 42) -> ConjectureProbe:
    if n < 5:
        raise ModelError(f"n >= 5 required, got {n}")
    m = make(n, 2, 3)
    ra = rank_analysis(m, points, seed)
    bad = [p for p in m.parameters if not ra.local[p]]
    predicted = ["k12", "k21", "k13"] + outgoing(n)
    d = _forest_equation(n, 2, 3).d[2]
    syms = m.parameters
    prod = MultiPoly.var("k12", syms) * MultiPoly.var("k31", syms)
    return ConjectureProbe(n, seed, points, [p for p in m.parameters if p in bad],
                           [p for p in m.parameters if p in predicted], ra.ranks,
                           d[n - 2].is_zero(), d[n - 3] == prod)


# -- family report (CLI) ----------------------------------------------------------------------

def family_report(n: int, i: int, j: int, seed: int = 42) -> dict:
    """Identities, closed-form recoveries at a seeded point, and the relabelling used."""
    red = reduce_to_family(n, i, j)
    f = red.family
    m = family_model(f)
    identities = dict(rhs_identities(f))
    lhs = lhs_structure(n)
    identities.update(lhs.checks)
    failed = [k for k, v in identities.items() if not v]
    if failed:
        raise InvariantViolation(f"{f}: identities failed: {failed}")
    eq = _forest_equation(n, f.input, f.output)
    d = eq.d[f.input]
    point = trial_point(m.parameters, seed, 0)
    c_vals, d_vals = family_coefficients(f, point)
    try:
        rec = recover(f, c_vals, d_vals).to_dict()
    except DegenerateError as exc:
        rec = {"error": str(exc)}
    return {
        "family": [f.input, f.output],
        "n": n,
        "requested": [i, j],
        "relabelling": red.to_dict(),
        "identities": identities,
        "top_d_coefficient": d[n - 1].serialize(),
        "d": {f"d{k}": d[k].serialize() for k in range(n - 1, -1, -1)},
        "c": {f"c{k}": eq.c[k].serialize() for k in range(n - 1, -1, -1)},
        "recovery_point": {k: int(v) for k, v in point.items()},
        "recovery": rec,
    }
