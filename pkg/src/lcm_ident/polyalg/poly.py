"""Sparse multivariate polynomials with exact integer coefficients.

A polynomial is a map from exponent vectors to nonzero ``int`` coefficients,
over an ordered tuple of symbol names. Binary operations unify the symbol
tables of their operands, so polynomials built independently can be mixed
freely.

Terms are kept in a plain dict; ordering only matters for serialization,
which uses graded lexicographic order (highest total degree first, ties
broken lexicographically with the symbol order given by :func:`symbol_key`).
"""

from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Union

Number = Union[int, Fraction, float]

_PARAM_RE = re.compile(r"^k(\d)(\d)$|^k(\d+)_(\d+)$")
_NATURAL_RE = re.compile(r"(\d+)")


def symbol_key(name: str) -> tuple:
    """Sort key for symbol names.

    Rate parameters ``k{to}{from}`` (or ``k{to}_{from}`` once an index has
    two digits) sort numerically by (to, from), ahead of every other name.
    Anything else sorts naturally (``x2`` before ``x10``).
    """
    m = _PARAM_RE.match(name)
    if m:
        a, b = (m.group(1), m.group(2)) if m.group(1) is not None else (m.group(3), m.group(4))
        return (0, int(a), int(b), "")
    parts = _NATURAL_RE.split(name)
    return (1, 0, 0, tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in parts if p))


def param_symbol(to: int, frm: int) -> str:
    """Name of the rate parameter on edge ``frm -> to`` (``frm = 0`` never
    occurs; leaks are ``param_symbol(0, j)``)."""
    if to < 10 and frm < 10:
        return f"k{to}{frm}"
    return f"k{to}_{frm}"


def parse_param_symbol(name: str) -> tuple[int, int]:
    """Inverse of :func:`param_symbol`: returns ``(to, from)``."""
    m = _PARAM_RE.match(name)
    if not m:
        raise ValueError(f"not a rate parameter symbol: {name!r}")
    if m.group(1) is not None:
        return int(m.group(1)), int(m.group(2))
    return int(m.group(3)), int(m.group(4))


def _sorted_symbols(names: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(names), key=symbol_key))


class MultiPoly:
    """Exact sparse polynomial in named symbols with ``int`` coefficients.

    Instances are treated as immutable; every operation returns a new object.
    """

    __slots__ = ("symbols", "terms")

    def __init__(self, terms: Mapping[tuple[int, ...], int] | None = None,
                 symbols: Iterable[str] = ()):
        symbols = tuple(symbols)
        if list(symbols) != list(_sorted_symbols(symbols)):
            raise ValueError(f"symbols must be unique and canonically ordered: {symbols}")
        clean: dict[tuple[int, ...], int] = {}
        for exp, coef in (terms or {}).items():
            if len(exp) != len(symbols):
                raise ValueError("exponent vector length does not match symbol table")
            if any(e < 0 for e in exp):
                raise ValueError("negative exponent")
            if coef:
                clean[tuple(exp)] = clean.get(tuple(exp), 0) + int(coef)
                if clean[tuple(exp)] == 0:
                    del clean[tuple(exp)]
        self.symbols: tuple[str, ...] = symbols
        self.terms: dict[tuple[int, ...], int] = clean

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, symbols: Iterable[str] = ()) -> "MultiPoly":
        return cls({}, _sorted_symbols(symbols))

    @classmethod
    def const(cls, c: int, symbols: Iterable[str] = ()) -> "MultiPoly":
        if isinstance(c, Fraction):
            if c.denominator != 1:
                raise ValueError("MultiPoly coefficients are integers")
            c = c.numerator
        syms = _sorted_symbols(symbols)
        return cls({(0,) * len(syms): int(c)}, syms)

    @classmethod
    def var(cls, name: str, symbols: Iterable[str] = ()) -> "MultiPoly":
        syms = _sorted_symbols([*symbols, name])
        exp = tuple(1 if s == name else 0 for s in syms)
        return cls({exp: 1}, syms)

    @classmethod
    def from_monomials(cls, symbols: Iterable[str],
                       monomials: Iterable[Iterable[str]]) -> "MultiPoly":
        """Sum of monomials, each given as a multiset of symbol names."""
        syms = _sorted_symbols(symbols)
        index = {s: i for i, s in enumerate(syms)}
        terms: dict[tuple[int, ...], int] = {}
        for mono in monomials:
            exp = [0] * len(syms)
            for s in mono:
                exp[index[s]] += 1
            key = tuple(exp)
            terms[key] = terms.get(key, 0) + 1
        return cls(terms, syms)

    @classmethod
    def parse(cls, text: str) -> "MultiPoly":
        """Inverse of :meth:`serialize` (also accepts ``-`` separators)."""
        text = text.strip()
        if text == "0":
            return cls.zero()
        text = re.sub(r"\s+-\s+", " + -", text)
        result = cls.zero()
        for chunk in text.split(" + "):
            factors = chunk.strip().split("*")
            coef = int(factors[0])
            term = cls.const(coef)
            for f in factors[1:]:
                name, _, e = f.partition("^")
                term = term * cls.var(name) ** (int(e) if e else 1)
            result = result + term
        return result

    # -- symbol handling --------------------------------------------------
    def with_symbols(self, symbols: Iterable[str]) -> "MultiPoly":
        """Re-express over a (canonically ordered) superset of the symbols."""
        syms = _sorted_symbols(symbols)
        if syms == self.symbols:
            return self
        index = {s: i for i, s in enumerate(syms)}
        missing = [s for s in self.symbols if s not in index]
        if missing:
            used = self.used_symbols()
            if any(s in used for s in missing):
                raise ValueError(f"symbols {missing} are used by the polynomial")
        positions = [index.get(s) for s in self.symbols]
        out: dict[tuple[int, ...], int] = {}
        for exp, c in self.terms.items():
            new = [0] * len(syms)
            for pos, e in zip(positions, exp):
                if e:
                    new[pos] = e
            out[tuple(new)] = c
        return MultiPoly(out, syms)

    def used_symbols(self) -> tuple[str, ...]:
        used = [False] * len(self.symbols)
        for exp in self.terms:
            for i, e in enumerate(exp):
                if e:
                    used[i] = True
        return tuple(s for s, u in zip(self.symbols, used) if u)

    def _unify(self, other: "MultiPoly") -> tuple["MultiPoly", "MultiPoly"]:
        if self.symbols == other.symbols:
            return self, other
        syms = _sorted_symbols(self.symbols + other.symbols)
        return self.with_symbols(syms), other.with_symbols(syms)

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.const(other, self.symbols)
        return NotImplemented

    # -- ring operations --------------------------------------------------
    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._unify(other)
        out = dict(a.terms)
        for exp, c in b.terms.items():
            v = out.get(exp, 0) + c
            if v:
                out[exp] = v
            else:
                out.pop(exp, None)
        return MultiPoly._raw(out, a.symbols)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._raw({e: -c for e, c in self.terms.items()}, self.symbols)

    def __sub__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "MultiPoly":
        return (-self) + other

    def __mul__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._unify(other)
        out: dict[tuple[int, ...], int] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                exp = tuple(x + y for x, y in zip(e1, e2))
                v = out.get(exp, 0) + c1 * c2
                if v:
                    out[exp] = v
                else:
                    del out[exp]
        return MultiPoly._raw(out, a.symbols)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MultiPoly":
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            raise ValueError("negative exponent")
        result = MultiPoly.const(1, self.symbols)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    @classmethod
    def _raw(cls, terms: dict, symbols: tuple[str, ...]) -> "MultiPoly":
        obj = cls.__new__(cls)
        obj.symbols = symbols
        obj.terms = terms
        return obj

    # -- predicates -------------------------------------------------------
    def __eq__(self, other) -> bool:
        other = self._coerce(other) if not isinstance(other, MultiPoly) else other
        if other is NotImplemented:
            return NotImplemented
        a, b = self._unify(other)
        return a.terms == b.terms

    __hash__ = None  # type: ignore[assignment]

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(exp) for exp in self.terms)

    def constant_value(self) -> int:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()), 0)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def __len__(self) -> int:
        return len(self.terms)

    # -- calculus and evaluation -------------------------------------------
    def differentiate(self, symbol: str) -> "MultiPoly":
        if symbol not in self.symbols:
            raise KeyError(f"symbol {symbol!r} not in table {self.symbols}")
        i = self.symbols.index(symbol)
        out: dict[tuple[int, ...], int] = {}
        for exp, c in self.terms.items():
            e = exp[i]
            if e:
                new = exp[:i] + (e - 1,) + exp[i + 1:]
                out[new] = out.get(new, 0) + c * e
        return MultiPoly._raw({k: v for k, v in out.items() if v}, self.symbols)

    def evaluate(self, point: Mapping[str, Number]) -> Number:
        """Value at ``point``; exact when every assigned value is int/Fraction.

        Raises ``KeyError`` naming the first symbol the point leaves unassigned
        (only symbols that actually occur are required).
        """
        used = self.used_symbols()
        for s in used:
            if s not in point:
                raise KeyError(f"missing assignment for symbol {s!r}")
        values = [point[s] if s in used else 0 for s in self.symbols]
        total: Number = 0
        for exp, c in self.terms.items():
            term: Number = c
            for v, e in zip(values, exp):
                if e:
                    term = term * v ** e
            total = total + term
        if isinstance(total, Fraction) and total.denominator == 1:
            return total.numerator
        return total

    def substitute(self, values: Mapping[str, int]) -> "MultiPoly":
        """Substitute integer constants for some symbols (they stay in the
        symbol table with exponent zero)."""
        idx = [(i, values[s]) for i, s in enumerate(self.symbols) if s in values]
        out: dict[tuple[int, ...], int] = {}
        for exp, c in self.terms.items():
            new = list(exp)
            for i, v in idx:
                c = c * v ** exp[i]
                new[i] = 0
            key = tuple(new)
            out[key] = out.get(key, 0) + c
        return MultiPoly({k: v for k, v in out.items() if v}, self.symbols)

    def rename(self, mapping: Mapping[str, str]) -> "MultiPoly":
        """Rename symbols (a permutation of names, or injective renaming)."""
        new_names = [mapping.get(s, s) for s in self.symbols]
        if len(set(new_names)) != len(new_names):
            raise ValueError("renaming is not injective")
        syms = _sorted_symbols(new_names)
        pos = [syms.index(s) for s in new_names]
        out = {}
        for exp, c in self.terms.items():
            new = [0] * len(syms)
            for p, e in zip(pos, exp):
                new[p] = e
            out[tuple(new)] = c
        return MultiPoly._raw(out, syms)

    # -- serialization ------------------------------------------------------
    def sorted_terms(self) -> list[tuple[tuple[int, ...], int]]:
        """Terms in graded lexicographic order, highest first."""
        return sorted(self.terms.items(),
                      key=lambda t: (-sum(t[0]), tuple(-e for e in t[0])))

    def serialize(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp, c in self.sorted_terms():
            s = str(c)
            for name, e in zip(self.symbols, exp):
                if e == 1:
                    s += f"*{name}"
                elif e > 1:
                    s += f"*{name}^{e}"
            parts.append(s)
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.serialize()

    def __repr__(self) -> str:
        return f"MultiPoly({self.serialize()!r})"


def elementary_symmetric(k: int, symbols: Iterable[str]) -> MultiPoly:
    """k-th elementary symmetric polynomial of distinct ``symbols``; e_0 = 1."""
    syms = list(symbols)
    if len(set(syms)) != len(syms):
        raise ValueError("elementary_symmetric needs distinct symbols")
    if not 0 <= k <= len(syms):
        raise ValueError(f"degree {k} out of range 0..{len(syms)}")
    return MultiPoly.from_monomials(syms, combinations(syms, k))


def elementary_symmetric_values(values: Iterable[Number]) -> list[Number]:
    """[e_0, e_1, ..., e_m] of a list of numbers (exact for int/Fraction)."""
    e: list[Number] = [1]
    for x in values:
        e = [1] + [e[i] + x * e[i - 1] for i in range(1, len(e))] + [x * e[-1]]
    return e
