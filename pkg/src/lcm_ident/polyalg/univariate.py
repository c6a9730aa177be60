"""Univariate polynomials: exact interpolation, real roots, and inverting the
elementary symmetric map."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from ..errors import NonRealRootsError

Coef = Union[int, Fraction, float]

ROOT_TOL = 1e-10
IMAG_TOL = 1e-8


class UniPoly:
    """Polynomial in one indeterminate, coefficients stored lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Coef]):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: list[Coef] = c

    @classmethod
    def from_roots(cls, roots: Iterable[Coef]) -> "UniPoly":
        p = cls([1])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, z):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        if not self.coeffs or not other.coeffs:
            return UniPoly([])
        out: list[Coef] = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    def __add__(self, other: "UniPoly") -> "UniPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + [0] * (n - len(self.coeffs))
        b = other.coeffs + [0] * (n - len(other.coeffs))
        return UniPoly([x + y for x, y in zip(a, b)])

    def derivative(self) -> "UniPoly":
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __eq__(self, other) -> bool:
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"UniPoly({self.coeffs!r})"


def interpolate_univariate(points: Sequence[tuple[Coef, Coef]]) -> UniPoly:
    """Exact interpolating polynomial of minimal degree (Newton divided
    differences over the rationals)."""
    xs = [Fraction(x) for x, _ in points]
    ys = [Fraction(y) for _, y in points]
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate abscissae")
    if not xs:
        return UniPoly([])
    n = len(xs)
    table = list(ys)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            table[i] = (table[i] - table[i - 1]) / (xs[i] - xs[i - level])
    poly = UniPoly([table[-1]])
    for i in range(n - 2, -1, -1):
        poly = poly * UniPoly([-xs[i], 1]) + UniPoly([table[i]])
    return UniPoly([c.numerator if c.denominator == 1 else c for c in poly.coeffs])


def _polish(p: UniPoly, dp: UniPoly, x: float, steps: int = 8) -> float:
    fx = p(x)
    for _ in range(steps):
        d = dp(x)
        if d == 0:
            break
        nx = x - fx / d
        nfx = p(nx)
        if abs(nfx) >= abs(fx):
            break
        x, fx = nx, nfx
    return x


def complex_roots(p: UniPoly) -> np.ndarray:
    if p.is_zero():
        raise ValueError("the zero polynomial has no finite root set")
    coeffs = np.array([float(c) for c in reversed(p.coeffs)], dtype=float)
    if len(coeffs) == 1:
        return np.array([], dtype=complex)
    return np.roots(coeffs)


def real_roots(p: UniPoly) -> list[float]:
    """Real roots, ascending, repeated according to multiplicity.

    Companion-matrix eigenvalues whose imaginary part is at most ``IMAG_TOL``
    count as real; each is then refined by a few Newton steps.
    """
    roots = complex_roots(p)
    fp = UniPoly([float(c) for c in p.coeffs])
    dfp = fp.derivative()
    out = [_polish(fp, dfp, float(r.real)) for r in roots if abs(r.imag) <= IMAG_TOL]
    return sorted(out)


def recover_multiset(e: Sequence[Coef]) -> list[float]:
    """Numbers x_1..x_m (ascending) with e_k(x) = e[k-1] for k = 1..m.

    They are the roots of z^m - e_1 z^{m-1} + e_2 z^{m-2} - ... . Raises
    :class:`NonRealRootsError` if any root is non-real.
    """
    m = len(e)
    if m < 1:
        raise ValueError("need at least one elementary symmetric value")
    desc = [1.0] + [(-1) ** k * float(v) for k, v in enumerate(e, start=1)]
    p = UniPoly(list(reversed(desc)))
    roots = complex_roots(p)
    if np.any(np.abs(roots.imag) > IMAG_TOL):
        raise NonRealRootsError(f"elementary symmetric values {list(e)} have non-real preimage")
    dp = p.derivative()
    return sorted(_polish(p, dp, float(r.real)) for r in roots)
