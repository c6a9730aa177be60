"""Linear compartmental models: construction, file format, validation,
compartmental matrices, output-reduced graphs and automorphisms."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ModelError
from .polyalg import MultiPoly, param_symbol

FORMAT_VERSION = 1
AUTOMORPHISM_BOUND = 12

Edge = tuple[int, int]  # (from, to)


@dataclass(frozen=True)
class Model:
    """A linear compartmental model on vertices 1..n.

    Edges are stored as ``(from, to)`` pairs in lexicographic order; the edge
    ``j -> i`` carries the parameter ``k_{ij}``, and a leak at ``j`` carries
    ``k_{0j}``.
    """

    n: int
    edges: tuple[Edge, ...]
    inputs: frozenset[int] = field(default_factory=frozenset)
    outputs: frozenset[int] = field(default_factory=frozenset)
    leaks: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ModelError(f"compartment count must be an integer >= 1, got {self.n!r}")
        seen = set()
        for e in self.edges:
            if len(e) != 2:
                raise ModelError(f"edge {e!r} is not a pair")
            a, b = e
            for v in (a, b):
                if not isinstance(v, int) or not 1 <= v <= self.n:
                    raise ModelError(f"index out of range 1..{self.n}: edge {list(e)}")
            if a == b:
                raise ModelError(f"self-loop at compartment {a}")
            if (a, b) in seen:
                raise ModelError(f"duplicate edge {[a, b]}")
            seen.add((a, b))
        for name in ("inputs", "outputs", "leaks"):
            vals = getattr(self, name)
            for v in vals:
                if not isinstance(v, int) or not 1 <= v <= self.n:
                    raise ModelError(f"index out of range 1..{self.n}: {name} contains {v!r}")
            object.__setattr__(self, name, frozenset(vals))
        object.__setattr__(self, "edges", tuple(sorted(tuple(e) for e in self.edges)))

    @classmethod
    def build(cls, n: int, edges: Iterable[Sequence[int]], inputs: Iterable[int] = (),
              outputs: Iterable[int] = (), leaks: Iterable[int] = ()) -> "Model":
        return cls(n, tuple(tuple(e) for e in edges), frozenset(inputs),
                   frozenset(outputs), frozenset(leaks))

    # -- parameters ---------------------------------------------------------
    def edge_symbol(self, edge: Edge) -> str:
        frm, to = edge
        return param_symbol(to, frm)

    def leak_symbol(self, j: int) -> str:
        return param_symbol(0, j)

    @property
    def parameters(self) -> tuple[str, ...]:
        """Parameter symbols: edges in canonical order, then leaks."""
        return tuple(self.edge_symbol(e) for e in self.edges) + tuple(
            self.leak_symbol(j) for j in sorted(self.leaks))

    def parameter_edge(self, symbol: str) -> tuple[int, int]:
        """Index pair ``(to, from)`` of a parameter; leaks give ``(0, j)``."""
        for e in self.edges:
            if self.edge_symbol(e) == symbol:
                return (e[1], e[0])
        for j in self.leaks:
            if self.leak_symbol(j) == symbol:
                return (0, j)
        raise KeyError(f"{symbol!r} is not a parameter of this model")

    def with_edges(self, edges: Iterable[Edge]) -> "Model":
        return Model(self.n, tuple(edges), self.inputs, self.outputs, self.leaks)

    # -- graph queries --------------------------------------------------------
    def out_neighbors(self, v: int) -> list[int]:
        return [b for a, b in self.edges if a == v]

    def relabel(self, sigma: "Permutation") -> "Model":
        """Image of the model under a vertex permutation."""
        return Model.build(
            self.n, [(sigma(a), sigma(b)) for a, b in self.edges],
            [sigma(v) for v in self.inputs], [sigma(v) for v in self.outputs],
            [sigma(v) for v in self.leaks])


# -- file format ---------------------------------------------------------------

def parse_model(text: str) -> Model:
    """Parse the JSON model document (see :func:`serialize_model`)."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ModelError(f"malformed document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError("malformed document: top level must be an object")
    version = doc.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ModelError(f"unsupported format version {version!r}")
    unknown = set(doc) - {"version", "n", "edges", "in", "out", "leak"}
    if unknown:
        raise ModelError(f"malformed document: unknown keys {sorted(unknown)}")
    if "n" not in doc or "edges" not in doc:
        raise ModelError("malformed document: 'n' and 'edges' are required")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ModelError("malformed document: 'n' must be an integer")

    def int_list(key):
        vals = doc.get(key, [])
        if not isinstance(vals, list) or any(isinstance(v, bool) or not isinstance(v, int)
                                             for v in vals):
            raise ModelError(f"malformed document: '{key}' must be a list of integers")
        if len(set(vals)) != len(vals):
            raise ModelError(f"malformed document: '{key}' has repeated entries")
        return vals

    edges = doc["edges"]
    if not isinstance(edges, list) or any(
            not isinstance(e, list) or len(e) != 2
            or any(isinstance(v, bool) or not isinstance(v, int) for v in e) for e in edges):
        raise ModelError("malformed document: 'edges' must be a list of [from, to] integer pairs")
    return Model.build(n, [tuple(e) for e in edges], int_list("in"), int_list("out"),
                       int_list("leak"))


def serialize_model(m: Model) -> str:
    """Canonical JSON: fixed key order, sorted edges and index lists."""
    doc = {
        "version": FORMAT_VERSION,
        "n": m.n,
        "edges": [list(e) for e in m.edges],
        "in": sorted(m.inputs),
        "out": sorted(m.outputs),
        "leak": sorted(m.leaks),
    }
    return json.dumps(doc, separators=(", ", ": "))


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


# -- validation ------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    strongly_connected: bool
    n_inputs: int
    n_outputs: int
    n_leaks: int
    forest_formula_applicable: bool

    def to_dict(self) -> dict:
        return {
            "strongly_connected": self.strongly_connected,
            "n_inputs": self.n_inputs,
            "n_outputs": self.n_outputs,
            "n_leaks": self.n_leaks,
            "forest_formula_applicable": self.forest_formula_applicable,
        }


def _reachable(n: int, adj: dict[int, list[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def is_strongly_connected(m: Model) -> bool:
    fwd: dict[int, list[int]] = {}
    bwd: dict[int, list[int]] = {}
    for a, b in m.edges:
        fwd.setdefault(a, []).append(b)
        bwd.setdefault(b, []).append(a)
    full = set(range(1, m.n + 1))
    return _reachable(m.n, fwd, 1) == full and _reachable(m.n, bwd, 1) == full


def validate(m: Model) -> ValidationReport:
    sc = is_strongly_connected(m)
    return ValidationReport(
        strongly_connected=sc,
        n_inputs=len(m.inputs),
        n_outputs=len(m.outputs),
        n_leaks=len(m.leaks),
        forest_formula_applicable=(sc and len(m.inputs) == 1 and len(m.outputs) == 1
                                   and not m.leaks),
    )


# -- compartmental matrix ----------------------------------------------------------

def compartmental_matrix(m: Model) -> list[list[MultiPoly]]:
    """Symbolic n x n matrix A (0-indexed lists, entry [i-1][j-1] = a_ij)."""
    syms = m.parameters
    zero = MultiPoly.zero(syms)
    a = [[zero for _ in range(m.n)] for _ in range(m.n)]
    for frm, to in m.edges:
        k = MultiPoly.var(m.edge_symbol((frm, to)), syms)
        a[to - 1][frm - 1] = a[to - 1][frm - 1] + k
        a[frm - 1][frm - 1] = a[frm - 1][frm - 1] - k
    for j in m.leaks:
        a[j - 1][j - 1] = a[j - 1][j - 1] - MultiPoly.var(m.leak_symbol(j), syms)
    return a


def numeric_compartmental_matrix(m: Model, point) -> list[list]:
    """A evaluated at a parameter point (exact if the point is)."""
    a = [[0] * m.n for _ in range(m.n)]
    for frm, to in m.edges:
        k = point[m.edge_symbol((frm, to))]
        a[to - 1][frm - 1] += k
        a[frm - 1][frm - 1] -= k
    for j in m.leaks:
        a[j - 1][j - 1] -= point[m.leak_symbol(j)]
    return a


def reduced_graph(m: Model, i: int) -> Model:
    """The model with every edge leaving output compartment ``i`` removed."""
    if i not in m.outputs:
        raise ModelError(f"compartment {i} is not an output")
    return m.with_edges(e for e in m.edges if e[0] != i)


# -- automorphisms ------------------------------------------------------------------

class Permutation:
    """A bijection on {1..n}, stored as the tuple of images."""

    __slots__ = ("images",)

    def __init__(self, images: Sequence[int]):
        images = tuple(images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"not a permutation of 1..{len(images)}: {images}")
        self.images = images

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(1, n + 1))

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> "Permutation":
        img = list(range(1, n + 1))
        img[a - 1], img[b - 1] = b, a
        return cls(img)

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, v: int) -> int:
        return self.images[v - 1] if v else 0

    def compose(self, other: "Permutation") -> "Permutation":
        """``self ∘ other`` (apply ``other`` first)."""
        return Permutation(self(other(v)) for v in range(1, self.n + 1))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for v, w in enumerate(self.images, start=1):
            inv[w - 1] = v
        return Permutation(inv)

    def is_identity(self) -> bool:
        return self.images == tuple(range(1, self.n + 1))

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for v in range(1, self.n + 1):
            if v in seen or self(v) == v:
                continue
            cyc, w = [], v
            while w not in seen:
                seen.add(w)
                cyc.append(w)
                w = self(w)
            out.append(tuple(cyc))
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        cyc = self.cycles()
        return "()" if not cyc else "".join("(" + " ".join(map(str, c)) + ")" for c in cyc)

    def rename_map(self, m: Model) -> dict[str, str]:
        """Symbol renaming k_ij -> k_{σ(i)σ(j)}, k_0j -> k_{0σ(j)}."""
        out = {}
        for frm, to in m.edges:
            out[m.edge_symbol((frm, to))] = param_symbol(self(to), self(frm))
        for j in m.leaks:
            out[m.leak_symbol(j)] = param_symbol(0, self(j))
        return out


def _signature(m: Model, v: int, out_adj, in_adj) -> tuple:
    return (len(out_adj[v]), len(in_adj[v]), v in m.inputs, v in m.outputs, v in m.leaks)


def automorphisms(m: Model, bound: int = AUTOMORPHISM_BOUND) -> list[Permutation]:
    """All vertex permutations preserving E, In, Out and Leak.

    Backtracking assignment of images vertex by vertex; candidates must match
    the vertex's degree/role signature and keep every edge between already
    assigned vertices an edge.
    """
    if m.n > bound:
        raise ModelError(f"automorphism search limited to n <= {bound}, got n = {m.n}")
    n = m.n
    out_adj = {v: set() for v in range(1, n + 1)}
    in_adj = {v: set() for v in range(1, n + 1)}
    for a, b in m.edges:
        out_adj[a].add(b)
        in_adj[b].add(a)
    edge_set = set(m.edges)
    sig = {v: _signature(m, v, out_adj, in_adj) for v in range(1, n + 1)}
    images = [0] * (n + 1)
    used = [False] * (n + 1)
    found: list[Permutation] = []

    def consistent(v: int, w: int) -> bool:
        for u in range(1, v):
            iu = images[u]
            if ((u, v) in edge_set) != ((iu, w) in edge_set):
                return False
            if ((v, u) in edge_set) != ((w, iu) in edge_set):
                return False
        return True

    def extend(v: int) -> None:
        if v > n:
            found.append(Permutation(images[1:]))
            return
        for w in range(1, n + 1):
            if used[w] or sig[w] != sig[v] or not consistent(v, w):
                continue
            images[v], used[w] = w, True
            extend(v + 1)
            used[w] = False
        images[v] = 0

    extend(1)
    return found

