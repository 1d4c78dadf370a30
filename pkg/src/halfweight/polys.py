"""Multivariate Laurent polynomials and truncated power series with exact coefficients.

Coefficients may be Fractions or Cyclotomic numbers (anything closed under
+, *, with a zero test).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .cyclotomic import Cyclotomic, as_exact

__all__ = ["LaurentPoly", "TruncatedSeries"]

Scalar = (int, Fraction, Cyclotomic)


def _is_zero(c) -> bool:
    return c == 0


class LaurentPoly:
    """Finite sum of coefficient * prod(var_i ** e_i), e_i in Z."""

    __slots__ = ("vars", "terms")

    def __init__(self, variables: Iterable[str], terms: Mapping[tuple, object] | None = None):
        self.vars = tuple(variables)
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != len(self.vars):
                raise ValueError("exponent length does not match variables")
            c = as_exact(c)
            if not _is_zero(c):
                clean[e] = c
        self.terms = clean

    # constructors
    @classmethod
    def gens(cls, *names: str) -> tuple["LaurentPoly", ...]:
        out = []
        for i, _ in enumerate(names):
            e = [0] * len(names)
            e[i] = 1
            out.append(cls(names, {tuple(e): 1}))
        return tuple(out)

    @classmethod
    def const(cls, c, variables: Iterable[str] = ()) -> "LaurentPoly":
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def monomial(cls, variables, exps, c=1) -> "LaurentPoly":
        return cls(variables, {tuple(exps): c})

    # variable alignment
    def with_vars(self, variables: Iterable[str]) -> "LaurentPoly":
        variables = tuple(variables)
        if variables == self.vars:
            return self
        idx = {v: i for i, v in enumerate(variables)}
        missing = [v for v in self.vars if v not in idx]
        for v, e in ((v, e) for e in self.terms for v in missing):
            if e[self.vars.index(v)] != 0:
                raise ValueError(f"variable {v} is used but not in the target set")
        terms = {}
        for e, c in self.terms.items():
            ne = [0] * len(variables)
            for v, ev in zip(self.vars, e):
                if v in idx:
                    ne[idx[v]] = ev
            terms[tuple(ne)] = c
        return LaurentPoly(variables, terms)

    def _align(self, other):
        if isinstance(other, LaurentPoly):
            if other.vars == self.vars:
                return self, other
            vs = list(self.vars) + [v for v in other.vars if v not in self.vars]
            return self.with_vars(vs), other.with_vars(vs)
        if isinstance(other, Scalar):
            return self, LaurentPoly.const(other, self.vars)
        return None, None

    # arithmetic
    def __add__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms.get(e, 0) + c
        return LaurentPoly(a.vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return LaurentPoly(self.vars, {e: c * other for e, c in self.terms.items()})
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        terms: dict = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return LaurentPoly(a.vars, terms)

    __rmul__ = __mul__

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def inv(self) -> "LaurentPoly":
        if not self.is_monomial():
            raise ZeroDivisionError("only monomials are units in a Laurent ring")
        (e, c), = self.terms.items()
        return LaurentPoly(self.vars, {tuple(-x for x in e): 1 / c})

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            return self * (1 / (Fraction(other) if isinstance(other, int) else other))
        if isinstance(other, LaurentPoly):
            return self * other.inv()
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        acc = LaurentPoly.const(1, self.vars)
        base = self
        while k:
            if k & 1:
                acc = acc * base
            base = base * base
            k >>= 1
        return acc

    def __eq__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        return a.terms == b.terms

    def __hash__(self):
        return hash(frozenset((tuple(zip(self.vars, e)), c) for e, c in self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self):
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def coefficient(self, **exps):
        e = tuple(exps.get(v, 0) for v in self.vars)
        return self.terms.get(e, Fraction(0))

    # calculus and substitution
    def diff(self, var: str) -> "LaurentPoly":
        if var not in self.vars:
            return LaurentPoly(self.vars)
        i = self.vars.index(var)
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                terms[tuple(ne)] = c * e[i]
        return LaurentPoly(self.vars, terms)

    def subs(self, mapping: Mapping[str, object]) -> "LaurentPoly":
        """Substitute scalars or polynomials for variables; the rest are kept."""
        keep = [v for v in self.vars if v not in mapping]
        out_vars = list(keep)
        for val in mapping.values():
            if isinstance(val, LaurentPoly):
                out_vars += [v for v in val.vars if v not in out_vars]
        out = LaurentPoly(out_vars)
        cache: dict = {}

        def power(v, k):
            key = (v, k)
            if key not in cache:
                val = mapping[v]
                if isinstance(val, LaurentPoly):
                    cache[key] = (val.with_vars(out_vars)) ** k
                else:
                    val = Fraction(val) if isinstance(val, int) else val
                    cache[key] = LaurentPoly.const(val ** k if k >= 0 else (1 / val) ** (-k), out_vars)
            return cache[key]

        acc_terms: dict = {}
        for e, c in self.terms.items():
            mono_e = [0] * len(out_vars)
            factor = None
            for v, k in zip(self.vars, e):
                if v in mapping:
                    if k:
                        pw = power(v, k)
                        factor = pw if factor is None else factor * pw
                else:
                    mono_e[out_vars.index(v)] = k
            term = LaurentPoly(out_vars, {tuple(mono_e): c})
            if factor is not None:
                term = term * factor
            for te, tc in term.terms.items():
                acc_terms[te] = acc_terms.get(te, 0) + tc
        out = LaurentPoly(out_vars, acc_terms)
        return out

    def evaluate(self, mapping: Mapping[str, object]):
        """Full substitution to a scalar (exact if the values are exact)."""
        r = self.subs(mapping)
        if any(any(e) for e in r.terms):
            raise ValueError("not all variables were substituted")
        return r.constant_term()

    def map_coefficients(self, fn) -> "LaurentPoly":
        return LaurentPoly(self.vars, {e: fn(c) for e, c in self.terms.items()})

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(f"{v}^{k}" if k != 1 else v for v, k in zip(self.vars, e) if k)
            parts.append(f"({c})" + ("*" + mono if mono else ""))
        return " + ".join(parts)


class TruncatedSeries:
    """sum_{m<=order} coeffs[m] * var^m; coefficients are scalars or LaurentPolys."""

    __slots__ = ("var", "order", "coeffs")

    def __init__(self, coeffs, order: int, var: str = "t"):
        coeffs = list(coeffs)[: order + 1]
        coeffs += [Fraction(0)] * (order + 1 - len(coeffs))
        self.var = var
        self.order = order
        self.coeffs = coeffs

    @classmethod
    def from_poly_in(cls, poly: LaurentPoly, var: str, order: int) -> "TruncatedSeries":
        """Split a LaurentPoly by powers of `var` (non-negative powers only)."""
        i = poly.vars.index(var)
        rest = tuple(v for v in poly.vars if v != var)
        buckets: dict[int, dict] = {}
        for e, c in poly.terms.items():
            if e[i] < 0:
                raise ValueError("negative power of the series variable")
            if e[i] > order:
                continue
            ne = e[:i] + e[i + 1:]
            buckets.setdefault(e[i], {})[ne] = c
        return cls([LaurentPoly(rest, buckets.get(m, {})) for m in range(order + 1)], order, var)

    def _check(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries([other], self.order, self.var)
        if other.var != self.var:
            raise ValueError("series in different variables")
        return other

    def __add__(self, other):
        other = self._check(other)
        m = min(self.order, other.order)
        return TruncatedSeries([self.coeffs[i] + other.coeffs[i] for i in range(m + 1)], m, self.var)

    def __sub__(self, other):
        other = self._check(other)
        m = min(self.order, other.order)
        return TruncatedSeries([self.coeffs[i] - other.coeffs[i] for i in range(m + 1)], m, self.var)

    def __mul__(self, other):
        other = self._check(other)
        m = min(self.order, other.order)
        out = []
        for k in range(m + 1):
            acc = Fraction(0)
            for i in range(k + 1):
                a, b = self.coeffs[i], other.coeffs[k - i]
                if _nonzero(a) and _nonzero(b):
                    acc = a * b + acc
            out.append(acc)
        return TruncatedSeries(out, m, self.var)

    def inverse(self) -> "TruncatedSeries":
        b0 = self.coeffs[0]
        if not _nonzero(b0):
            raise ZeroDivisionError("constant term is zero; series is not invertible")
        if isinstance(b0, LaurentPoly):
            c0 = b0.inv()
        else:
            c0 = 1 / (Fraction(b0) if isinstance(b0, int) else b0)
        out = [c0]
        for k in range(1, self.order + 1):
            acc = Fraction(0)
            for j in range(1, k + 1):
                if _nonzero(self.coeffs[j]) and _nonzero(out[k - j]):
                    acc = self.coeffs[j] * out[k - j] + acc
            out.append(-(c0 * acc) if _nonzero(acc) else Fraction(0))
        return TruncatedSeries(out, self.order, self.var)

    def __truediv__(self, other):
        other = self._check(other)
        m = min(self.order, other.order)
        a = TruncatedSeries(self.coeffs, m, self.var)
        b = TruncatedSeries(other.coeffs, m, self.var)
        return a * b.inverse()

    def __eq__(self, other):
        other = self._check(other)
        if self.order != other.order:
            return False
        return all(_eq(a, b) for a, b in zip(self.coeffs, other.coeffs))

    def __repr__(self):
        return " + ".join(f"[{c}]{self.var}^{i}" for i, c in enumerate(self.coeffs))


def _nonzero(c) -> bool:
    if isinstance(c, LaurentPoly):
        return not c.is_zero()
    return c != 0


def _eq(a, b) -> bool:
    if isinstance(a, LaurentPoly) or isinstance(b, LaurentPoly):
        if not isinstance(a, LaurentPoly):
            a, b = b, a
        return (a - b).is_zero()
    return a == b
