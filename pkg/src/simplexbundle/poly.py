"""Sparse polynomials with exact rational coefficients.

Indeterminates are probabilities ``p<cell>``, velocities ``pdot<cell>``,
scores ``s<cell>`` and free coefficient names (``x``, ``y``, ...). The only
derivation implemented is the tangent rule ``d p_x = s_x p_x``; binomial
equations ``p^a - p^b`` turn into linear score relations ``<a - b, s> = 0``.

Text format::

    3/2*p11^2*s22 - p12*p21 + 1
"""

from __future__ import annotations

import re
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .curves import ParamCurve, score
from .errors import (
    BoundaryPoint,
    EqualExponents,
    RankDeficientBasis,
    UnsupportedIndeterminate,
)
from .simplex import ContrastVector, SampleSpace

P, PDOT, S, COEF = "p", "pdot", "s", "coef"
_KIND_RANK = {P: 0, PDOT: 1, S: 2, COEF: 3}


@lru_cache(maxsize=None)
def _natural_key(label: str):
    return tuple((0, int(tok), "") if tok.isdigit() else (1, 0, tok)
                 for tok in re.findall(r"\d+|\D+", label))


@dataclass(frozen=True)
class Indeterminate:
    """One variable of the ring; ``rank`` is its position in the sample space."""

    kind: str
    cell: str
    rank: int | None = field(default=None, compare=False, hash=False)
    _key: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown indeterminate kind {self.kind!r}")
        object.__setattr__(self, "cell", str(self.cell))
        object.__setattr__(self, "_key", (_KIND_RANK[self.kind], _natural_key(self.cell), self.cell))

    def sort_key(self):
        rank = self.rank if self.rank is not None else -1
        return (_KIND_RANK[self.kind], rank, _natural_key(self.cell))

    def identity_key(self):
        return self._key

    def __str__(self) -> str:
        return self.cell if self.kind == COEF else f"{self.kind}{self.cell}"


def p_var(cell, space: SampleSpace | None = None) -> Indeterminate:
    return Indeterminate(P, str(cell), space.index(cell) if space else None)


def s_var(cell, space: SampleSpace | None = None) -> Indeterminate:
    return Indeterminate(S, str(cell), space.index(cell) if space else None)


def pdot_var(cell, space: SampleSpace | None = None) -> Indeterminate:
    return Indeterminate(PDOT, str(cell), space.index(cell) if space else None)


Monomial = tuple  # sorted tuple of (Indeterminate, exponent) with exponent >= 1


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    powers: dict = {}
    for var, e in a + b:
        powers[var] = powers.get(var, 0) + e
    # Storage order ignores rank so equal polynomials always share keys.
    return tuple(sorted(powers.items(), key=lambda ve: ve[0]._key))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _display_order(m: Monomial) -> Monomial:
    return tuple(sorted(m, key=lambda ve: ve[0].sort_key()))


def _grlex_key(m: Monomial):
    # Descending total degree, then lexicographic in the indeterminate order.
    return (-_mono_degree(m), [(var.sort_key(), -e) for var, e in _display_order(m)])


def _to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, (float, np.floating)):
        return Fraction(float(c)).limit_denominator(10**12)
    return Fraction(c)


class Polynomial:
    """Immutable sparse polynomial over the rationals.

    Zero coefficients are never stored, so structural equality is equality
    of polynomials.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for mono, coef in items:
            mono = _mono_mul(tuple(mono), ())
            acc[mono] = acc.get(mono, Fraction(0)) + _to_fraction(coef)
        self._terms = {m: c for m, c in acc.items() if c != 0}

    @classmethod
    def _canonical(cls, terms: dict) -> "Polynomial":
        # Trusted constructor: monomials already in storage order, no zero coefficients.
        out = cls.__new__(cls)
        out._terms = terms
        return out

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls({(): c})

    @classmethod
    def var(cls, v: Indeterminate, power: int = 1) -> "Polynomial":
        return cls({((v, power),): 1}) if power else cls.constant(1)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def variables(self) -> set:
        return {v for m in self._terms for v, _ in m}

    def sorted_terms(self) -> list:
        return sorted(self._terms.items(), key=lambda mc: _grlex_key(mc[0]))

    def __add__(self, other) -> "Polynomial":
        acc = dict(self._terms)
        for m, c in _coerce(other)._terms.items():
            acc[m] = acc.get(m, 0) + c
        return Polynomial._canonical({m: c for m, c in acc.items() if c != 0})

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._canonical({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return _coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = _coerce(other)
        acc: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                acc[m] = acc.get(m, 0) + c1 * c2
        return Polynomial._canonical({m: c for m, c in acc.items() if c != 0})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = Polynomial.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def leading_coefficient(self) -> Fraction:
        return self.sorted_terms()[0][1] if self._terms else Fraction(0)

    def evaluate(self, values: Mapping) -> float:
        """Evaluate numerically; ``values`` maps indeterminates (or their names) to numbers."""
        total = 0.0
        for mono, coef in self._terms.items():
            term = float(coef)
            for var, e in mono:
                x = values[var] if var in values else values[str(var)]
                term *= x ** e
            total += term
        return total

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for i, (mono, coef) in enumerate(self.sorted_terms()):
            sign = "-" if coef < 0 else "+"
            mag = abs(coef)
            factors = [f"{v}^{e}" if e > 1 else str(v) for v, e in _display_order(mono)]
            if mag != 1 or not factors:
                factors.insert(0, str(mag))
            body = "*".join(factors)
            if i == 0:
                out.append(("-" if sign == "-" else "") + body)
            else:
                out.append(f" {sign} {body}")
        return "".join(out)

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"


def _coerce(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, Fraction, float, np.integer, np.floating)):
        return Polynomial.constant(x)
    if isinstance(x, Indeterminate):
        return Polynomial.var(x)
    raise TypeError(f"cannot use {type(x).__name__} as a polynomial")


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def _make_indeterminate(name: str, space: SampleSpace | None) -> Indeterminate:
    prefixed = False
    for kind in (PDOT, P, S):
        if name.startswith(kind) and len(name) > len(kind):
            prefixed = True
            cell = name[len(kind):]
            if space is None or cell in space.labels:
                return Indeterminate(kind, cell, space.index(cell) if space else None)
    if prefixed:
        raise ValueError(f"{name!r} names no cell of {', '.join(space.labels)}")
    return Indeterminate(COEF, name)


class _Parser:
    def __init__(self, text: str, space: SampleSpace | None):
        self.tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                break
            self.tokens.append(m.group(1) and ("num", m.group(1))
                               or m.group(2) and ("name", m.group(2))
                               or ("op", m.group(3)))
            pos = m.end()
        self.i = 0
        self.space = space

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, op=None):
        tok = self.peek()
        if op is not None and tok != ("op", op):
            raise ValueError(f"expected {op!r}, found {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self) -> Polynomial:
        if not self.tokens:
            raise ValueError("empty polynomial")
        poly = self.expr()
        if self.i != len(self.tokens):
            raise ValueError(f"unexpected token {self.peek()[1]!r}")
        return poly

    def expr(self) -> Polynomial:
        out = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> Polynomial:
        out = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            out = out * self.factor()
        return out

    def factor(self) -> Polynomial:
        if self.peek() in (("op", "-"), ("op", "+")):
            op = self.take()[1]
            inner = self.factor()
            return -inner if op == "-" else inner
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise ValueError("exponent must be a nonnegative integer")
            base = base ** int(val)
        return base

    def atom(self) -> Polynomial:
        kind, val = self.take()
        if kind == "num":
            num = Fraction(int(val))
            if self.peek() == ("op", "/"):
                self.take()
                k2, v2 = self.take()
                if k2 != "num":
                    raise ValueError("rational coefficients are written a/b")
                num = num / int(v2)
            return Polynomial.constant(num)
        if kind == "name":
            return Polynomial.var(_make_indeterminate(val, self.space))
        if (kind, val) == ("op", "("):
            inner = self.expr()
            self.take(")")
            return inner
        raise ValueError(f"unexpected token {val!r}")


def parse_polynomial(text: str, space: SampleSpace | None = None) -> Polynomial:
    """Parse text such as ``3/2*p11^2*s22 - p12``; parentheses are allowed."""
    return _Parser(text, space).parse()


# -- derivation ----------------------------------------------------------------

def _tangent_rule(var: Indeterminate) -> Polynomial:
    return Polynomial.var(Indeterminate(S, var.cell, var.rank)) * Polynomial.var(var)


def _velocity_rule(var: Indeterminate) -> Polynomial:
    return Polynomial.var(Indeterminate(PDOT, var.cell, var.rank))


def derive(f: Polynomial, in_velocities: bool = False) -> Polynomial:
    """Leibniz derivative of a polynomial in the ``p`` variables.

    By default ``d p_x`` is replaced by ``s_x p_x``; with ``in_velocities``
    it is left as ``pdot_x``.
    """
    rule = _velocity_rule if in_velocities else _tangent_rule
    out = Polynomial()
    for mono, coef in f.terms.items():
        for var, _ in mono:
            if var.kind != P:
                raise UnsupportedIndeterminate(f"cannot derive with respect to {var}")
        for i, (var, e) in enumerate(mono):
            rest = mono[:i] + ((var, e - 1),) + mono[i + 1:] if e > 1 else mono[:i] + mono[i + 1:]
            out = out + Polynomial._canonical({rest: coef * e}) * rule(var)
    return out


def substitute_velocities(f: Polynomial) -> Polynomial:
    """Rewrite every ``pdot_x`` as ``s_x p_x``."""
    out = Polynomial()
    for mono, coef in f.terms.items():
        term = Polynomial.constant(coef)
        for var, e in mono:
            factor = _tangent_rule(Indeterminate(P, var.cell, var.rank)) if var.kind == PDOT \
                else Polynomial.var(var)
            term = term * factor ** e
        out = out + term
    return out


def rewrite_monomial(f: Polynomial, lhs: Monomial, rhs: Monomial) -> Polynomial:
    """Replace one factor ``lhs`` by ``rhs`` in every term divisible by ``lhs``."""
    lhs_pow = dict(lhs)
    out = []
    for mono, coef in f.terms.items():
        powers = dict(mono)
        if all(powers.get(v, 0) >= e for v, e in lhs_pow.items()):
            for v, e in lhs_pow.items():
                powers[v] -= e
            mono = _mono_mul(tuple((v, e) for v, e in powers.items() if e), tuple(rhs))
        out.append((mono, coef))
    return Polynomial(out)


def monomial(space: SampleSpace, exponents: Sequence[int], kind: str = P) -> Monomial:
    return tuple((Indeterminate(kind, lab, i), int(e))
                 for i, (lab, e) in enumerate(zip(space.labels, exponents)) if e)


# -- score relations ---------------------------------------------------------

@dataclass(frozen=True)
class LinearScoreForm:
    """The linear relation ``sum_x c_x s_x = 0`` with integer coefficients."""

    space: SampleSpace
    coefficients: tuple

    def __post_init__(self):
        c = tuple(int(x) for x in self.coefficients)
        if len(c) != self.space.d:
            raise ValueError("coefficient vector does not match the sample space")
        if not any(c):
            raise ValueError("a score relation needs a nonzero coefficient")
        object.__setattr__(self, "coefficients", c)

    def as_polynomial(self) -> Polynomial:
        return sum((c * Polynomial.var(s_var(lab, self.space))
                    for lab, c in zip(self.space.labels, self.coefficients) if c), Polynomial())

    def evaluate(self, scores) -> float:
        return float(np.dot(self.coefficients, np.asarray(scores, dtype=float)))

    def __str__(self) -> str:
        return str(self.as_polynomial())


def _exponent_vector(space: SampleSpace, exps) -> np.ndarray:
    if isinstance(exps, Mapping):
        vec = np.zeros(space.d, dtype=int)
        for lab, e in exps.items():
            vec[space.index(lab)] = int(e)
        return vec
    vec = np.asarray(exps, dtype=int)
    if vec.shape != (space.d,):
        raise ValueError("exponent vector does not match the sample space")
    return vec


def binomial_score_relation(alpha, beta, space: SampleSpace) -> LinearScoreForm:
    """Linear score relation ``<alpha - beta, s> = 0`` carried by ``p^alpha = p^beta``."""
    a = _exponent_vector(space, alpha)
    b = _exponent_vector(space, beta)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("exponents must be nonnegative")
    if np.array_equal(a, b):
        raise EqualExponents("alpha and beta coincide; the binomial is identically zero")
    return LinearScoreForm(space, tuple(a - b))


def detect_binomial(f: Polynomial, space: SampleSpace):
    """Return ``(alpha, beta)`` if ``f`` is ``p^alpha - p^beta``, else ``None``."""
    if len(f) != 2:
        return None
    (m1, c1), (m2, c2) = f.sorted_terms()
    if {c1, c2} != {Fraction(1), Fraction(-1)}:
        return None
    if any(v.kind != P for m in (m1, m2) for v, _ in m):
        return None
    if c1 < 0:
        m1, m2 = m2, m1
    vecs = []
    for m in (m1, m2):
        vec = np.zeros(space.d, dtype=int)
        for v, e in m:
            vec[space.index(v.cell)] = e
        vecs.append(vec)
    return vecs[0], vecs[1]


def relation_residual(form: LinearScoreForm, curve: ParamCurve, t_grid) -> float:
    """Largest ``|<c, s(t)>|`` over the grid; every point must be in the open simplex."""
    worst = 0.0
    for t in t_grid:
        res = score(curve, float(t))
        if not res.base.is_interior:
            raise BoundaryPoint(f"gamma({t!r}) has defective support")
        worst = max(worst, abs(form.evaluate(res.values)))
    return worst


# -- face ideals and tangent systems -------------------------------------------

def face_factors(basis: Sequence[ContrastVector], coeff_names: Sequence[str]) -> list[Polynomial]:
    """Cellwise linear forms of the generic contrast ``sum_i coeff_i basis_i``."""
    if not basis:
        raise RankDeficientBasis("empty basis")
    space = basis[0].space
    if len(coeff_names) != len(basis):
        raise ValueError("need one coefficient name per basis vector")
    mat = np.array([b.values for b in basis])
    if len(basis) != space.d - 1 or np.linalg.matrix_rank(mat) != space.d - 1:
        raise RankDeficientBasis(f"basis does not span the {space.d - 1}-dimensional contrasts")
    names = [Indeterminate(COEF, n, i) for i, n in enumerate(coeff_names)]
    return [sum((Polynomial({((v, 1),): _to_fraction(mat[i, x])}) for i, v in enumerate(names)),
                Polynomial())
            for x in range(space.d)]


def face_product(basis: Sequence[ContrastVector], coeff_names: Sequence[str]) -> Polynomial:
    """Product of the cellwise forms, signed so the first factor leads with ``+1``."""
    factors = face_factors(basis, coeff_names)
    out = Polynomial.constant(1)
    for f in factors:
        out = out * f
    if factors[0].leading_coefficient() < 0:
        out = -out
    return out


def model_tangent_system(model_polys: Iterable, space: SampleSpace) -> list[Polynomial]:
    """Generators of the implicit tangent-bundle presentation in ``(p, s)``.

    Model equations, their derivatives under ``d p = s p``, the sum-to-one
    constraint and the zero-mean score constraint, in that order.
    """
    polys = [parse_polynomial(f, space) if isinstance(f, str) else f for f in model_polys]
    for f in polys:
        if any(v.kind != P for v in f.variables()):
            raise UnsupportedIndeterminate(f"model equation {f} is not in the p variables")
    derived = [derive(f) for f in polys]
    total = sum((Polynomial.var(p_var(lab, space)) for lab in space.labels), Polynomial()) - 1
    mean = sum((Polynomial.var(s_var(lab, space)) * Polynomial.var(p_var(lab, space))
                for lab in space.labels), Polynomial())
    return polys + [g for g in derived if not g.is_zero()] + [total, mean]
