"""Exact arithmetic kernel.

Rationals are :class:`fractions.Fraction`.  On top of that this module provides
truncated multivariate polynomials, Laurent polynomials in ``q^{1/2}``,
bivariate power series in ``(u, y)`` and coefficient-wise Lagrange
interpolation in the variable ``r``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rational = Fraction
Monomial = tuple[tuple[str, int], ...]


class ConfigurationError(ValueError):
    """Raised when two objects with incompatible settings are combined."""


class InterpolationError(ValueError):
    """Raised when node data is not consistent with a polynomial."""


class WindowError(IndexError):
    """Raised when a series coefficient outside its truncation window is read."""


# --------------------------------------------------------------------------
# symbol table and monomial order

_PREFIX_RANK = {"r": 0, "l": 1, "psi": 2, "u": 3, "y": 4}
_SYMBOL_RE = re.compile(r"^([A-Za-z]+)(?:_(\d+))?$")


def symbol_key(name: str) -> tuple:
    """Position of ``name`` in the global symbol table.

    Symbols are grouped by prefix (``r`` first, then edge lengths ``l_*``,
    then cotangent classes ``psi_*``) and ordered by numeric index inside a
    group.  Unknown prefixes come last, alphabetically.
    """
    m = _SYMBOL_RE.match(name)
    if m is None:
        return (99, name, -1)
    prefix, idx = m.group(1), m.group(2)
    return (_PREFIX_RANK.get(prefix, 50), prefix, -1 if idx is None else int(idx))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items(), key=lambda t: symbol_key(t[0])))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_sort_key(m: Monomial) -> tuple:
    # graded lex: total degree first, then higher powers of earlier symbols first
    return (mono_degree(m), tuple((symbol_key(v), -e) for v, e in m))


def _fmt_frac(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


# --------------------------------------------------------------------------
# truncated polynomials


class TruncPoly:
    """Polynomial with rational coefficients, truncated at a total degree.

    ``bound=None`` means no truncation.  Instances are immutable.
    """

    __slots__ = ("_terms", "_bound", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None,
                 bound: int | None = None):
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c == 0:
                    continue
                m = tuple(sorted(((v, e) for v, e in m if e), key=lambda t: symbol_key(t[0])))
                if bound is not None and mono_degree(m) > bound:
                    continue
                clean[m] = clean.get(m, Fraction(0)) + c
                if clean[m] == 0:
                    del clean[m]
        self._terms = clean
        self._bound = bound
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c, bound: int | None = None) -> "TruncPoly":
        return cls({(): Fraction(c)}, bound)

    @classmethod
    def var(cls, name: str, bound: int | None = None, power: int = 1) -> "TruncPoly":
        return cls({((name, power),): Fraction(1)}, bound)

    @classmethod
    def zero(cls, bound: int | None = None) -> "TruncPoly":
        return cls({}, bound)

    # accessors
    @property
    def bound(self) -> int | None:
        return self._bound

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def coeff(self, monomial: Monomial | Mapping[str, int] = ()) -> Fraction:
        if isinstance(monomial, Mapping):
            monomial = tuple(monomial.items())
        m = tuple(sorted(((v, e) for v, e in monomial if e), key=lambda t: symbol_key(t[0])))
        return self._terms.get(m, Fraction(0))

    def variables(self) -> set[str]:
        return {v for m in self._terms for v, _ in m}

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((mono_degree(m) for m in self._terms), default=-1)

    def homogeneous_part(self, k: int) -> "TruncPoly":
        return TruncPoly({m: c for m, c in self._terms.items() if mono_degree(m) == k}, self._bound)

    def with_bound(self, bound: int | None) -> "TruncPoly":
        return TruncPoly(self._terms, bound)

    # arithmetic
    def _check(self, other: "TruncPoly") -> None:
        if self._bound != other._bound:
            raise ConfigurationError(
                f"truncation bounds differ: {self._bound} vs {other._bound}")

    def _coerce(self, other) -> "TruncPoly":
        if isinstance(other, TruncPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return TruncPoly.const(other, self._bound)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return TruncPoly(out, self._bound)

    __radd__ = __add__

    def __neg__(self):
        return TruncPoly({m: -c for m, c in self._terms.items()}, self._bound)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return TruncPoly({m: c * other for m, c in self._terms.items()}, self._bound)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, Fraction] = {}
        bound = self._bound
        for m1, c1 in self._terms.items():
            d1 = mono_degree(m1)
            for m2, c2 in other._terms.items():
                if bound is not None and d1 + mono_degree(m2) > bound:
                    continue
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return TruncPoly(out, bound)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int) -> "TruncPoly":
        if n < 0:
            raise ValueError("negative power")
        result = TruncPoly.const(1, self._bound)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self._terms == ({(): Fraction(other)} if other != 0 else {})
        if not isinstance(other, TruncPoly):
            return NotImplemented
        return self._bound == other._bound and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._bound, frozenset(self._terms.items())))
        return self._hash

    def exp(self) -> "TruncPoly":
        """``exp`` of a polynomial without constant term, truncated at the bound."""
        if self.coeff(()) != 0:
            raise ValueError("exp needs a vanishing constant term")
        if self._bound is None:
            raise ConfigurationError("exp needs a finite truncation bound")
        result = TruncPoly.const(1, self._bound)
        term = TruncPoly.const(1, self._bound)
        for k in range(1, self._bound + 1):
            term = term * self / k
            if term.is_zero():
                break
            result = result + term
        return result

    def subs(self, values: Mapping[str, Fraction | int | "TruncPoly"]) -> "TruncPoly":
        """Substitute variables by numbers or polynomials (same bound)."""
        out = TruncPoly.zero(self._bound)
        for m, c in self._terms.items():
            piece = TruncPoly.const(c, self._bound)
            rest: list[tuple[str, int]] = []
            for v, e in m:
                if v in values:
                    val = values[v]
                    if isinstance(val, TruncPoly):
                        piece = piece * val.with_bound(self._bound) ** e
                    else:
                        piece = piece * Fraction(val) ** e
                else:
                    rest.append((v, e))
            out = out + piece * TruncPoly({tuple(rest): 1}, self._bound)
        return out

    def rename(self, mapping: Mapping[str, str]) -> "TruncPoly":
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            nm: Monomial = ()
            for v, e in m:
                nm = _mono_mul(nm, ((mapping.get(v, v), e),))
            out[nm] = out.get(nm, Fraction(0)) + c
        return TruncPoly(out, self._bound)

    # serialization
    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: _mono_sort_key(t[0]))

    def to_text(self) -> str:
        """Canonical text form: graded-lex ordered terms, ``num/den`` coefficients."""
        if not self._terms:
            return "0/1"
        parts = []
        for i, (m, c) in enumerate(self.sorted_terms()):
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            body = _fmt_frac(abs(c)) + (f"*{mono}" if mono else "")
            if i == 0:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    def to_json(self) -> list[list]:
        return [[[[v, e] for v, e in m], _fmt_frac(c)] for m, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, data: Sequence, bound: int | None = None) -> "TruncPoly":
        return cls({tuple((v, int(e)) for v, e in m): Fraction(c) for m, c in data}, bound)

    def __repr__(self) -> str:
        return f"TruncPoly({self.to_text()!r}, bound={self._bound})"


def poly_arith(a: TruncPoly, b: TruncPoly, op: str) -> TruncPoly:
    """Add or multiply two truncated polynomials with the same bound."""
    if a.bound != b.bound:
        raise ConfigurationError(f"truncation bounds differ: {a.bound} vs {b.bound}")
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


# --------------------------------------------------------------------------
# interpolation in r


def _lagrange_1d(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> list[Fraction]:
    """Coefficients (ascending) of the interpolating polynomial, Newton form."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    # expand Newton form into monomial basis
    poly = [Fraction(0)] * n
    poly[0] = coef[n - 1]
    deg = 0
    for k in range(n - 2, -1, -1):
        # poly = poly * (x - xs[k]) + coef[k]
        new = [Fraction(0)] * n
        for i in range(deg + 1):
            new[i + 1] += poly[i]
            new[i] -= poly[i] * xs[k]
        new[0] += coef[k]
        poly = new
        deg += 1
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly


def _eval_1d(coefs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coefs):
        acc = acc * x + c
    return acc


def interpolate(nodes: Sequence[tuple[Fraction | int, TruncPoly | Fraction | int]],
                degree: int | None = None, var: str = "r") -> TruncPoly:
    """Interpolate in ``var`` through ``nodes``, one l-monomial at a time.

    With ``degree`` set, the first ``degree + 1`` nodes fix the polynomial and
    every further node is used for validation.  The result is untruncated.
    """
    xs = [Fraction(x) for x, _ in nodes]
    if len(set(xs)) != len(xs):
        raise InterpolationError("duplicate interpolation nodes")
    vals = [v if isinstance(v, TruncPoly) else TruncPoly.const(v) for _, v in nodes]
    if degree is None:
        degree = len(xs) - 1
    if len(xs) < degree + 1:
        raise InterpolationError(f"need {degree + 1} nodes, got {len(xs)}")
    for v in vals:
        if var in v.variables():
            raise InterpolationError(f"node values must not involve {var}")
    monos = set()
    for v in vals:
        monos.update(v.terms)
    fit, check = slice(0, degree + 1), slice(degree + 1, None)
    out: dict[Monomial, Fraction] = {}
    for m in monos:
        ys = [v.coeff(m) for v in vals]
        coefs = _lagrange_1d(xs[fit], ys[fit])
        for x, y in zip(xs[check], ys[check]):
            if _eval_1d(coefs, x) != y:
                raise InterpolationError("not polynomial in sampled window")
        for k, c in enumerate(coefs):
            if c:
                out[_mono_mul(m, ((var, k),) if k else ())] = c
    return TruncPoly(out, None)


def constant_term(p: TruncPoly, var: str = "r") -> TruncPoly:
    """Set ``var = 0``."""
    return TruncPoly({m: c for m, c in p.terms.items() if all(v != var for v, _ in m)}, p.bound)


# --------------------------------------------------------------------------
# Laurent polynomials in q^{1/2}


class LaurentQ:
    """Finite Laurent polynomial in ``q^{1/2}``.

    Keys count units of ``q^{1/2}``: key ``k`` stands for ``q^{k/2}``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, Fraction | int] | None = None):
        self._c = {int(k): Fraction(v) for k, v in (coeffs or {}).items() if v != 0}

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return dict(self._c)

    def coeff_half(self, k: int) -> Fraction:
        """Coefficient of ``q^{k/2}``."""
        return self._c.get(k, Fraction(0))

    def is_zero(self) -> bool:
        return not self._c

    def __add__(self, other: "LaurentQ") -> "LaurentQ":
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out.get(k, Fraction(0)) + v
        return LaurentQ(out)

    def __neg__(self) -> "LaurentQ":
        return LaurentQ({k: -v for k, v in self._c.items()})

    def __sub__(self, other: "LaurentQ") -> "LaurentQ":
        return self + (-other)

    def __mul__(self, other) -> "LaurentQ":
        if isinstance(other, (int, Fraction)):
            return LaurentQ({k: v * other for k, v in self._c.items()})
        out: dict[int, Fraction] = {}
        for k1, v1 in self._c.items():
            for k2, v2 in other._c.items():
                out[k1 + k2] = out.get(k1 + k2, Fraction(0)) + v1 * v2
        return LaurentQ(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentQ) and self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def divmod(self, other: "LaurentQ") -> tuple["LaurentQ", "LaurentQ"]:
        """Long division by leading exponent; remainder has smaller span."""
        if other.is_zero():
            raise ZeroDivisionError("division by zero Laurent polynomial")
        top_o = max(other._c)
        low_o = min(other._c)
        lead = other._c[top_o]
        rem = LaurentQ(self._c)
        quo: dict[int, Fraction] = {}
        while not rem.is_zero() and max(rem._c) - min(rem._c) >= top_o - low_o:
            k = max(rem._c)
            c = rem._c[k] / lead
            quo[k - top_o] = quo.get(k - top_o, Fraction(0)) + c
            rem = rem - LaurentQ({k - top_o: c}) * other
        return LaurentQ(quo), rem

    def __truediv__(self, other: "LaurentQ") -> "LaurentQ":
        quo, rem = self.divmod(other)
        if not rem.is_zero():
            raise ArithmeticError("Laurent division is not exact")
        return quo

    def u_expansion(self, order: int) -> tuple[list[Fraction], list[Fraction]]:
        """Real and imaginary u-series of the substitution ``q = e^{iu}``.

        Returns coefficient lists of length ``order + 1`` for the real and
        imaginary parts: ``q^{k/2}`` becomes ``cos(ku/2) + i sin(ku/2)``.
        """
        re_ = [Fraction(0)] * (order + 1)
        im_ = [Fraction(0)] * (order + 1)
        for k, v in self._c.items():
            x = Fraction(k, 2)
            for j in range(order + 1):
                t = v * x ** j / math.factorial(j)
                # i^j
                if j % 4 == 0:
                    re_[j] += t
                elif j % 4 == 1:
                    im_[j] += t
                elif j % 4 == 2:
                    re_[j] -= t
                else:
                    im_[j] -= t
        return re_, im_

    def to_text(self) -> str:
        if not self._c:
            return "0/1"
        parts = []
        for k in sorted(self._c, reverse=True):
            parts.append(f"{_fmt_frac(self._c[k])}*q^({k}/2)")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"LaurentQ({self.to_text()!r})"


def qint(n: int) -> LaurentQ:
    """The q-analog ``[n] = q^{n/2} - q^{-n/2}``."""
    return LaurentQ({n: 1}) - LaurentQ({-n: 1})


# --------------------------------------------------------------------------
# bivariate series


@dataclass(frozen=True)
class BiSeries:
    """Power series in ``(u, y)`` known up to ``u^max_u`` and ``y^max_y``."""

    coeffs: Mapping[tuple[int, int], Fraction]
    max_u: int
    max_y: int

    def __post_init__(self):
        clean = {}
        for (a, b), c in self.coeffs.items():
            c = Fraction(c)
            if c and 0 <= a <= self.max_u and 0 <= b <= self.max_y:
                clean[(a, b)] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def from_u_series(cls, us: Sequence[Fraction], y_exp: int, max_u: int, max_y: int) -> "BiSeries":
        return cls({(i, y_exp): c for i, c in enumerate(us)}, max_u, max_y)

    def _check(self, other: "BiSeries") -> None:
        if (self.max_u, self.max_y) != (other.max_u, other.max_y):
            raise ConfigurationError("truncation windows differ")

    def __add__(self, other: "BiSeries") -> "BiSeries":
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return BiSeries(out, self.max_u, self.max_y)

    def __mul__(self, other) -> "BiSeries":
        if isinstance(other, (int, Fraction)):
            return BiSeries({k: v * other for k, v in self.coeffs.items()}, self.max_u, self.max_y)
        self._check(other)
        out: dict[tuple[int, int], Fraction] = {}
        for (a1, b1), c1 in self.coeffs.items():
            for (a2, b2), c2 in other.coeffs.items():
                a, b = a1 + a2, b1 + b2
                if a <= self.max_u and b <= self.max_y:
                    out[(a, b)] = out.get((a, b), Fraction(0)) + c1 * c2
        return BiSeries(out, self.max_u, self.max_y)

    __rmul__ = __mul__

    def coeff(self, ue: int, ye: int) -> Fraction:
        return series_coeff(self, ue, ye)


def series_coeff(s: BiSeries, ue: int, ye: int) -> Fraction:
    """Exact coefficient of ``u^ue y^ye``; outside the window is an error."""
    if not (0 <= ue <= s.max_u and 0 <= ye <= s.max_y):
        raise WindowError(f"(u^{ue}, y^{ye}) outside window ({s.max_u}, {s.max_y})")
    return s.coeffs.get((ue, ye), Fraction(0))


def sin_series(c: Fraction | int, order: int) -> list[Fraction]:
    """Coefficients of ``sin(c u)`` up to ``u^order``."""
    c = Fraction(c)
    out = [Fraction(0)] * (order + 1)
    for j in range(1, order + 1, 2):
        out[j] = (-1) ** (j // 2) * c ** j / math.factorial(j)
    return out


def useries_mul(a: Sequence[Fraction], b: Sequence[Fraction], order: int) -> list[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a[: order + 1]):
        if x:
            for j, z in enumerate(b[: order + 1 - i]):
                if z:
                    out[i + j] += x * z
    return out


def monomials_up_to(variables: Iterable[str], bound: int) -> list[Monomial]:
    """All monomials in ``variables`` of total degree at most ``bound``."""
    vs = sorted(variables, key=symbol_key)
    out: list[Monomial] = [()]

    def rec(start: int, cur: list[tuple[str, int]], deg: int):
        for i in range(start, len(vs)):
            for e in range(1, bound - deg + 1):
                m = cur + [(vs[i], e)]
                out.append(tuple(m))
                rec(i + 1, m, deg + e)

    rec(0, [], 0)
    return out
