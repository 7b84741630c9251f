"""Pluggable coefficient rings for the truncated-series kernel.

A ring object bundles the operations the series code needs (zero, one,
add, mul, neg, equality) plus two optional extras: a derivation and JSON
encoding of coefficients.  Values themselves are plain Python objects
(Fraction, complex, Poly, ...); the ring decides how to combine them, so
one series kernel serves exact and floating backends alike.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Any, Mapping, Sequence


class CoefficientRing:
    """Abstract coefficient ring. Subclasses fix the carrier type."""

    name = "abstract"

    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def is_zero(self, a) -> bool:
        raise NotImplementedError

    def eq(self, a, b) -> bool:
        return self.is_zero(self.sub(a, b))

    def from_int(self, n: int):
        """Image of the integer n under the unique map from Z."""
        result = self.zero()
        one = self.one()
        for _ in range(abs(n)):
            result = self.add(result, one)
        return result if n >= 0 else self.neg(result)

    @property
    def has_derivation(self) -> bool:
        return False

    def derive(self, a):
        raise TypeError(f"ring {self.name!r} has no derivation")

    def coeff_to_json(self, a) -> Any:
        raise NotImplementedError

    def coeff_from_json(self, data: Any):
        raise NotImplementedError


class RationalRing(CoefficientRing):
    """Exact rationals (Fraction). Constants under any derivation."""

    name = "rational"

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def add(self, a, b):
        return Fraction(a) + Fraction(b)

    def mul(self, a, b):
        return Fraction(a) * Fraction(b)

    def neg(self, a):
        return -Fraction(a)

    def is_zero(self, a):
        return Fraction(a) == 0

    def from_int(self, n):
        return Fraction(n)

    def coeff_to_json(self, a):
        return str(Fraction(a))

    def coeff_from_json(self, data):
        return Fraction(data)


class ComplexRing(CoefficientRing):
    """complex with an equality tolerance used by all identity checks."""

    name = "complex"

    def __init__(self, tol: float = 1e-12):
        self.tol = float(tol)

    def zero(self):
        return 0j

    def one(self):
        return 1 + 0j

    def add(self, a, b):
        return complex(a) + complex(b)

    def mul(self, a, b):
        return complex(a) * complex(b)

    def neg(self, a):
        return -complex(a)

    def is_zero(self, a):
        return abs(complex(a)) <= self.tol

    def from_int(self, n):
        return complex(n)

    def coeff_to_json(self, a):
        a = complex(a)
        return {"re": a.real, "im": a.imag}

    def coeff_from_json(self, data):
        return complex(data["re"], data.get("im", 0.0))


class Poly:
    """Sparse multivariate polynomial with Fraction coefficients.

    Monomials are exponent tuples (one slot per variable of the owning
    PolynomialRing).  Instances are immutable by convention; arithmetic
    returns new objects.
    """

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs: Mapping[tuple, Fraction] | None = None):
        self.nvars = nvars
        clean = {}
        if coeffs:
            for mono, c in coeffs.items():
                c = Fraction(c)
                if c:
                    if len(mono) != nvars:
                        raise ValueError("monomial arity mismatch")
                    clean[tuple(mono)] = c
        self.coeffs = clean

    @classmethod
    def constant(cls, nvars: int, value) -> "Poly":
        value = Fraction(value)
        return cls(nvars, {(0,) * nvars: value} if value else {})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Poly":
        mono = tuple(1 if i == index else 0 for i in range(nvars))
        return cls(nvars, {mono: Fraction(1)})

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.nvars, frozenset(self.coeffs.items())))

    def __add__(self, other):
        out = dict(self.coeffs)
        for mono, c in other.coeffs.items():
            s = out.get(mono, Fraction(0)) + c
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return Poly(self.nvars, out)

    def __neg__(self):
        return Poly(self.nvars, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly(self.nvars, {m: c * other for m, c in self.coeffs.items()})
        out: dict[tuple, Fraction] = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                mono = tuple(a + b for a, b in zip(m1, m2))
                s = out.get(mono, Fraction(0)) + c1 * c2
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def derive(self, index: int) -> "Poly":
        """Formal partial derivative with respect to variable `index`."""
        out: dict[tuple, Fraction] = {}
        for mono, c in self.coeffs.items():
            e = mono[index]
            if e:
                lowered = tuple(x - 1 if i == index else x for i, x in enumerate(mono))
                out[lowered] = out.get(lowered, Fraction(0)) + c * e
        return Poly(self.nvars, out)

    def subs(self, values: Sequence) -> complex:
        """Evaluate numerically at the given variable values."""
        total = 0
        for mono, c in self.coeffs.items():
            term = complex(c)
            for e, v in zip(mono, values):
                term *= v ** e
            total += term
        return total

    def __repr__(self):
        if not self.coeffs:
            return "Poly(0)"
        bits = []
        for mono in sorted(self.coeffs):
            c = self.coeffs[mono]
            stem = "*".join(
                f"v{i}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(mono) if e
            )
            bits.append(f"{c}" + (f"*{stem}" if stem else ""))
        return "Poly(" + " + ".join(bits) + ")"


class PolynomialRing(CoefficientRing):
    """Exact polynomials over Q in named variables.

    When `derive_wrt` names a variable the ring is a differential ring
    with the corresponding formal partial derivative.
    """

    def __init__(self, variables: Sequence[str], derive_wrt: str | None = None):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        self.name = "poly(" + ",".join(self.variables) + ")"
        self._derive_index = None
        if derive_wrt is not None:
            self._derive_index = self.variables.index(derive_wrt)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def var(self, name: str) -> Poly:
        return Poly.variable(self.nvars, self.variables.index(name))

    def const(self, value) -> Poly:
        return Poly.constant(self.nvars, value)

    def zero(self):
        return Poly(self.nvars)

    def one(self):
        return Poly.constant(self.nvars, 1)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return not a

    def eq(self, a, b):
        return a == b

    def from_int(self, n):
        return Poly.constant(self.nvars, n)

    @property
    def has_derivation(self):
        return self._derive_index is not None

    def derive(self, a):
        if self._derive_index is None:
            raise TypeError(f"ring {self.name!r} has no derivation")
        return a.derive(self._derive_index)

    def coeff_to_json(self, a):
        return {
            "monomials": [
                {"exponents": list(mono), "coeff": str(c)}
                for mono, c in sorted(a.coeffs.items())
            ]
        }

    def coeff_from_json(self, data):
        return Poly(
            self.nvars,
            {
                tuple(entry["exponents"]): Fraction(entry["coeff"])
                for entry in data["monomials"]
            },
        )


QQ = RationalRing()
CC = ComplexRing()
