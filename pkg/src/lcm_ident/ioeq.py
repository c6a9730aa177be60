"""Input-output equation coefficients.

Two independent engines:

* the forest engine sums edge-label products over spanning incoming forests
  (symbolic, exact; one input, one output, no leaks, strongly connected);
* the determinant engine evaluates det(sI - A) and the signed (input, output)
  minors at exact rational parameter points and n+1 integer values of s, then
  interpolates in s (numeric, exact; any inputs/outputs/leaks).

A third route, :func:`coeffs_symbolic_det`, expands the same determinants
symbolically for models the forest engine does not cover.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ._parallel import pmap
from .errors import InapplicableError, ModelError
from .model import Model, compartmental_matrix, numeric_compartmental_matrix, reduced_graph, validate
from .polyalg import MultiPoly, bareiss_det, interpolate_univariate, symbolic_det

S_SYMBOL = "s"
POINT_RANGE = (1, 10**4)


# -- forests -------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Forest:
    """Edge subset ``((from, to), ...)`` in lexicographic order."""

    edges: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.edges)

    def labels(self, m: Model) -> tuple[str, ...]:
        return tuple(m.edge_symbol(e) for e in self.edges)

    def connects(self, a: int, b: int) -> bool:
        if a == b:
            return True
        parent: dict[int, int] = {}

        def find(x):
            while parent.get(x, x) != x:
                x = parent[x]
            return x

        for u, v in self.edges:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
        return find(a) == find(b)


def all_spanning_incoming_forests(m: Model) -> list[Forest]:
    """Every spanning incoming forest of the model's graph, sorted.

    Backtracks over vertices choosing at most one outgoing edge each. With
    out-degree <= 1 every undirected cycle is a directed one, so a chosen edge
    v -> w is rejected exactly when following out-edges from w returns to v.
    """
    n = m.n
    out_choices = {v: [b for a, b in m.edges if a == v] for v in range(1, n + 1)}
    succ = [0] * (n + 1)
    found: list[Forest] = []

    def closes_cycle(v: int, w: int) -> bool:
        x = w
        while x:
            if x == v:
                return True
            x = succ[x]
        return False

    def extend(v: int) -> None:
        if v > n:
            found.append(Forest(tuple((a, succ[a]) for a in range(1, n + 1) if succ[a])))
            return
        extend(v + 1)
        for w in out_choices[v]:
            if not closes_cycle(v, w):
                succ[v] = w
                extend(v + 1)
                succ[v] = 0

    extend(1)
    return sorted(found)


def spanning_incoming_forests(g: Model, n_edges: int,
                              connect: tuple[int, int] | None = None) -> list[Forest]:
    """Spanning incoming forests of ``g`` with exactly ``n_edges`` edges; with
    ``connect=(j, i)`` only those in which j and i share a component."""
    if not 0 <= n_edges <= g.n:
        raise ValueError(f"edge count {n_edges} out of range 0..{g.n}")
    out = [f for f in all_spanning_incoming_forests(g) if len(f) == n_edges]
    if connect is not None:
        j, i = connect
        out = [f for f in out if f.connects(j, i)]
    return out


def forest_sum(m: Model, forests: Sequence[Forest], symbols: Sequence[str]) -> MultiPoly:
    return MultiPoly.from_monomials(symbols, (f.labels(m) for f in forests))


# -- input-output equations -------------------------------------------------------------

@dataclass(frozen=True)
class IOEquation:
    """Coefficients of y_i^(n) + c_{n-1} y_i^(n-1) + ... + c_0 y_i
    = sum_j (d_{j,n-1} u_j^(n-1) + ... + d_{j,0} u_j), indexed c[k], d[j][k]."""

    n: int
    output: int
    c: tuple[MultiPoly, ...]
    d: Mapping[int, tuple[MultiPoly, ...]]

    def evaluate(self, point) -> "NumericIOEquation":
        return NumericIOEquation(
            self.n, self.output,
            tuple(p.evaluate(point) for p in self.c),
            {j: tuple(p.evaluate(point) for p in ds) for j, ds in self.d.items()})


@dataclass(frozen=True)
class NumericIOEquation:
    n: int
    output: int
    c: tuple
    d: Mapping[int, tuple]


def coeffs_forest(m: Model) -> IOEquation:
    rep = validate(m)
    if not rep.forest_formula_applicable:
        raise InapplicableError(
            "forest method inapplicable: needs a strongly connected model with one input, "
            "one output and no leaks")
    (j,) = m.inputs
    (i,) = m.outputs
    n = m.n
    syms = m.parameters
    by_size: dict[int, list[Forest]] = {}
    for f in all_spanning_incoming_forests(m):
        by_size.setdefault(len(f), []).append(f)
    c = tuple(forest_sum(m, by_size.get(n - k, []), syms) for k in range(n))
    g_star = reduced_graph(m, i)
    star_by_size: dict[int, list[Forest]] = {}
    for f in all_spanning_incoming_forests(g_star):
        if f.connects(j, i):
            star_by_size.setdefault(len(f), []).append(f)
    d = tuple(forest_sum(m, star_by_size.get(n - k - 1, []), syms) for k in range(n))
    return IOEquation(n, i, c, {j: d})


def _minor(matrix: Sequence[Sequence], row: int, col: int) -> list[list]:
    """Drop 1-indexed ``row`` and ``col``."""
    return [[v for cc, v in enumerate(r, start=1) if cc != col]
            for rr, r in enumerate(matrix, start=1) if rr != row]


def _s_coefficients(p: MultiPoly, degree: int, symbols: Sequence[str]) -> list[MultiPoly]:
    """Split a polynomial in s and the parameters into coefficients of s^k."""
    si = p.symbols.index(S_SYMBOL)
    buckets: list[dict] = [dict() for _ in range(degree + 1)]
    for exp, coef in p.terms.items():
        k = exp[si]
        rest = exp[:si] + (0,) + exp[si + 1:]
        buckets[k][rest] = coef
    return [MultiPoly(b, p.symbols).with_symbols(symbols) for b in buckets]


def coeffs_symbolic_det(m: Model) -> list[IOEquation]:
    """Expand det(sI - A) and the signed minors symbolically (one equation
    per output). Exponential in n; meant for n <= 8."""
    if not m.inputs:
        raise ModelError("model has no inputs")
    syms = m.parameters
    all_syms = syms + (S_SYMBOL,)
    a = compartmental_matrix(m)
    s = MultiPoly.var(S_SYMBOL, all_syms)
    mat = [[(s if r == c else MultiPoly.zero(all_syms)) - a[r][c].with_symbols(all_syms)
            for c in range(m.n)] for r in range(m.n)]
    lhs = _s_coefficients(symbolic_det(mat).with_symbols(all_syms), m.n, syms)
    out = []
    for i in sorted(m.outputs):
        d = {}
        for j in sorted(m.inputs):
            minor = symbolic_det(_minor(mat, j, i))
            if minor.is_zero():
                minor = MultiPoly.zero(all_syms)
            coeffs = _s_coefficients(minor.with_symbols(all_syms), m.n, syms)[: m.n]
            sign = -1 if (i + j) % 2 else 1
            d[j] = tuple(sign * p for p in coeffs)
        out.append(IOEquation(m.n, i, tuple(lhs[: m.n]), d))
    return out


def coeffs_determinant(m: Model, point: Mapping[str, int | Fraction]) -> list[NumericIOEquation]:
    """Exact coefficient values at one rational parameter point, one equation
    per output, by Bareiss determinants at s = 0..n and interpolation in s."""
    if not m.inputs:
        raise ModelError("model has no inputs")
    n = m.n
    a = numeric_compartmental_matrix(m, point)
    s_values = list(range(n + 1))
    mats = {s: [[(s if r == c else 0) - a[r][c] for c in range(n)] for r in range(n)]
            for s in s_values}
    lhs = interpolate_univariate([(s, bareiss_det(mats[s])) for s in s_values]).coeffs
    lhs = list(lhs) + [0] * (n + 1 - len(lhs))
    if lhs[n] != 1:
        raise AssertionError(f"det(sI - A) not monic: leading coefficient {lhs[n]}")
    out = []
    for i in sorted(m.outputs):
        d = {}
        for j in sorted(m.inputs):
            vals = [(s, bareiss_det(_minor(mats[s], j, i))) for s in s_values]
            coeffs = list(interpolate_univariate(vals).coeffs)
            coeffs += [0] * (n - len(coeffs))
            if len(coeffs) > n:
                raise AssertionError("minor of sI - A has degree >= n")
            sign = -1 if (i + j) % 2 else 1
            d[j] = tuple(sign * v for v in coeffs)
        out.append(NumericIOEquation(n, i, tuple(lhs[:n]), d))
    return out


# -- coefficient map -------------------------------------------------------------------------

@dataclass
class CoefficientMap:
    """Named non-constant coefficients as polynomials in the model parameters."""

    names: list[str]
    polys: list[MultiPoly]
    symbols: tuple[str, ...]
    dropped: list[tuple[str, int]] = field(default_factory=list)
    _derivs: list[list[MultiPoly]] | None = field(default=None, repr=False)
    _compiled: tuple | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.polys)

    def __getitem__(self, name: str) -> MultiPoly:
        return self.polys[self.names.index(name)]

    def evaluate(self, point) -> list:
        return [p.evaluate(point) for p in self.polys]

    def derivatives(self) -> list[list[MultiPoly]]:
        if self._derivs is None:
            self._derivs = [[p.with_symbols(self.symbols).differentiate(s) for s in self.symbols]
                            for p in self.polys]
        return self._derivs

    def renamed(self, mapping: Mapping[str, str]) -> "CoefficientMap":
        return CoefficientMap(list(self.names), [p.rename(mapping) for p in self.polys],
                              self.symbols, list(self.dropped))

    # float evaluation for the fiber solver -----------------------------------------
    def _compile(self):
        if self._compiled is None:
            def pack(polys):
                exps, coefs, owner = [], [], []
                column = {s: i for i, s in enumerate(self.symbols)}
                for idx, p in enumerate(polys):
                    q = p.with_symbols(self.symbols)
                    # q.symbols is canonically sorted; columns follow self.symbols
                    perm = [column[s] for s in q.symbols]
                    for e, c in q.terms.items():
                        row = [0] * len(self.symbols)
                        for pos, k in zip(perm, e):
                            row[pos] = k
                        exps.append(row)
                        coefs.append(float(c))
                        owner.append(idx)
                width = len(self.symbols)
                return (np.array(exps, dtype=int).reshape(-1, width),
                        np.array(coefs), np.array(owner, dtype=int), len(polys))

            flat = [d for row in self.derivatives() for d in row]
            self._compiled = (pack(self.polys), pack(flat))
        return self._compiled

    @staticmethod
    def _run(packed, x: np.ndarray) -> np.ndarray:
        exps, coefs, owner, size = packed
        if not len(coefs):
            return np.zeros(size)
        top = int(exps.max()) if exps.size else 0
        powers = np.ones((top + 1, len(x)))
        for k in range(1, top + 1):
            powers[k] = powers[k - 1] * x
        vals = coefs * np.prod(powers[exps, np.arange(len(x))], axis=1)
        return np.bincount(owner, weights=vals, minlength=size)

    def eval_float(self, x: np.ndarray) -> np.ndarray:
        return self._run(self._compile()[0], np.asarray(x, dtype=float))

    def jacobian_float(self, x: np.ndarray) -> np.ndarray:
        flat = self._run(self._compile()[1], np.asarray(x, dtype=float))
        return flat.reshape(len(self.polys), len(self.symbols))


def coefficient_name(kind: str, k: int, eq: IOEquation | NumericIOEquation, j: int | None,
                     multi: bool) -> str:
    if not multi:
        return f"{kind}{k}"
    if kind == "c":
        return f"c{k}[y{eq.output}]"
    return f"d{k}[y{eq.output},u{j}]"


def named_coefficients(equations: Sequence[IOEquation | NumericIOEquation]):
    """(name, value) pairs in map order: per output, c descending, then d per
    input descending."""
    multi = len(equations) > 1 or any(len(eq.d) > 1 for eq in equations)
    out = []
    for eq in equations:
        for k in range(eq.n - 1, -1, -1):
            out.append((coefficient_name("c", k, eq, None, multi), eq.c[k]))
        for j in sorted(eq.d):
            for k in range(eq.n - 1, -1, -1):
                out.append((coefficient_name("d", k, eq, j, multi), eq.d[j][k]))
    return out


def io_equations(m: Model, method: str = "auto") -> list[IOEquation]:
    """Symbolic equations; ``method`` is ``forest``, ``det`` or ``auto``
    (forest when applicable)."""
    if method not in ("forest", "det", "auto", "both"):
        raise ValueError(f"unknown method {method!r}")
    if method == "forest":
        return [coeffs_forest(m)]
    if method in ("auto", "both") and validate(m).forest_formula_applicable:
        return [coeffs_forest(m)]
    return coeffs_symbolic_det(m)


def coefficient_map(m: Model, method: str = "auto") -> CoefficientMap:
    eqs = io_equations(m, method)
    names, polys, dropped = [], [], []
    for name, p in named_coefficients(eqs):
        if p.is_constant():
            dropped.append((name, p.constant_value()))
        else:
            names.append(name)
            polys.append(p.with_symbols(m.parameters))
    if not polys:
        raise ModelError("no non-constant coefficients")
    return CoefficientMap(names, polys, m.parameters, dropped)


# -- cross validation ------------------------------------------------------------------------

def random_rational_point(symbols: Sequence[str], rng: np.random.Generator) -> dict[str, int]:
    lo, hi = POINT_RANGE
    vals = rng.integers(lo, hi + 1, size=len(symbols))
    return {s: int(v) for s, v in zip(symbols, vals)}


def trial_point(symbols: Sequence[str], seed: int, trial: int) -> dict[str, int]:
    return random_rational_point(symbols, np.random.default_rng([seed, trial]))


@dataclass
class CrossValidationReport:
    model: Model
    trials: int
    seed: int
    passed: bool
    first_failure: dict | None

    def to_dict(self) -> dict:
        from .model import serialize_model
        import json
        return {
            "model": json.loads(serialize_model(self.model)),
            "trials": self.trials,
            "seed": self.seed,
            "pass": self.passed,
            "first_failure": self.first_failure,
        }


def cross_validate(m: Model, trials: int = 20, seed: int = 42,
                   fault: str | None = None) -> CrossValidationReport:
    """Compare forest and determinant coefficient values bit-exactly at
    ``trials`` random integer points.

    ``fault="flip-d-sign"`` negates the forest engine's d-coefficients; it
    exists so tests can check that a sign error is caught and located.
    """
    eq = coeffs_forest(m)
    if fault == "flip-d-sign":
        eq = IOEquation(eq.n, eq.output, eq.c, {j: tuple(-p for p in ds) for j, ds in eq.d.items()})
    elif fault is not None:
        raise ValueError(f"unknown fault {fault!r}")
    syms = m.parameters

    def run(t: int):
        point = trial_point(syms, seed, t)
        sym_vals = named_coefficients([eq.evaluate(point)])
        det_vals = named_coefficients(coeffs_determinant(m, point))
        for (name, fv), (_, dv) in zip(sym_vals, det_vals):
            if fv != dv:
                return {"trial": t, "point": point, "coefficient_name": name,
                        "forest_value": str(fv), "det_value": str(dv)}
        return None

    results = pmap(run, range(trials))
    failure = next((r for r in results if r is not None), None)
    return CrossValidationReport(m, trials, seed, failure is None, failure)
