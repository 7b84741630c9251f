"""Exact differential ring spanned by z^a (1-z)^b L0^p L1^q.

Here L0 = log z and L1 = log(1/(1-z)) are formal symbols; a and b are
exact rational combinations of declared transcendence symbols, while the
scalar coefficients are complex floats compared with a tolerance.  The
sub-ring with p = q = 0 is the monoid algebra of the z^a(1-z)^b family
and is the scalar ring for all the independence checks.

Numeric symbol values (e.g. beta = sqrt(2)) are declared once in a
SymbolValues table; only the operations that genuinely need them
(derivation, evaluation, monodromy) take the table.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Any, Iterator, Mapping, NamedTuple, Union

from .rings import CoefficientRing

RATIONAL_KEY = "1"   # reserved coordinate name for the rational part


class BranchCutError(ValueError):
    """Raised when a numeric evaluation lands on a branch cut."""


@dataclass(frozen=True)
class ExponentScalar:
    """Exact exponent: a finitely supported rational combination of the
    basis {1, beta_1, beta_2, ...} of transcendence symbols."""

    coords: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        clean = tuple(sorted((s, Fraction(c)) for s, c in self.coords if Fraction(c)))
        if len({s for s, _ in clean}) != len(clean):
            raise ValueError("duplicate symbol in exponent")
        object.__setattr__(self, "coords", clean)

    @classmethod
    def rational(cls, value) -> "ExponentScalar":
        return cls(((RATIONAL_KEY, Fraction(value)),))

    @classmethod
    def symbol(cls, name: str, mult=1) -> "ExponentScalar":
        if name == RATIONAL_KEY:
            return cls.rational(mult)
        return cls(((name, Fraction(mult)),))

    def coord(self, name: str) -> Fraction:
        for s, c in self.coords:
            if s == name:
                return c
        return Fraction(0)

    @property
    def is_zero(self) -> bool:
        return not self.coords

    @property
    def is_rational(self) -> bool:
        return all(s == RATIONAL_KEY for s, _ in self.coords)

    def __add__(self, other) -> "ExponentScalar":
        other = as_exponent(other)
        out = dict(self.coords)
        for s, c in other.coords:
            out[s] = out.get(s, Fraction(0)) + c
        return ExponentScalar(tuple(out.items()))

    def __sub__(self, other):
        return self + (-as_exponent(other))

    def __neg__(self):
        return ExponentScalar(tuple((s, -c) for s, c in self.coords))

    def __mul__(self, scalar) -> "ExponentScalar":
        scalar = Fraction(scalar)
        return ExponentScalar(tuple((s, c * scalar) for s, c in self.coords))

    __rmul__ = __mul__

    def numeric(self, symbols: "SymbolValues") -> complex:
        total = 0j
        for s, c in self.coords:
            if s == RATIONAL_KEY:
                total += complex(c)
            else:
                total += complex(c) * symbols[s]
        return total

    def __repr__(self):
        if not self.coords:
            return "0"
        bits = []
        for s, c in self.coords:
            bits.append(str(c) if s == RATIONAL_KEY else f"{c}*{s}")
        return "+".join(bits).replace("+-", "-")


ExponentLike = Union[ExponentScalar, Fraction, int, str]

EXP_ZERO = ExponentScalar()
EXP_ONE = ExponentScalar.rational(1)


def as_exponent(x: ExponentLike) -> ExponentScalar:
    if isinstance(x, ExponentScalar):
        return x
    if isinstance(x, str):
        return ExponentScalar.symbol(x)
    return ExponentScalar.rational(x)


class SymbolValues(Mapping):
    """Write-once table of numeric values for transcendence symbols."""

    def __init__(self, values: Mapping[str, complex] | None = None, **kwargs):
        table = dict(values or {})
        table.update(kwargs)
        if RATIONAL_KEY in table:
            raise ValueError(f"symbol name {RATIONAL_KEY!r} is reserved")
        self._table = {str(k): complex(v) for k, v in table.items()}

    def __getitem__(self, name: str) -> complex:
        try:
            return self._table[name]
        except KeyError:
            raise KeyError(f"symbol {name!r} has no declared numeric value") from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._table)

    def __len__(self):
        return len(self._table)

    def __repr__(self):
        return f"SymbolValues({self._table})"


NO_SYMBOLS = SymbolValues()


class FunKey(NamedTuple):
    """One basis monomial z^a (1-z)^b L0^p L1^q."""

    a: ExponentScalar
    b: ExponentScalar
    p: int
    q: int


@dataclass(frozen=True, eq=False)
class FunElem:
    """Finite complex combination of FunKey monomials."""

    terms: dict

    def __post_init__(self):
        clean = {}
        for key, c in self.terms.items():
            c = complex(c)
            if c != 0:
                if key.p < 0 or key.q < 0:
                    raise ValueError("log powers must be nonnegative")
                clean[key] = c
        object.__setattr__(self, "terms", clean)

    # -- ring structure ----------------------------------------------------

    def __add__(self, other: "FunElem") -> "FunElem":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0j) + c
        return FunElem(out)

    def __neg__(self):
        return FunElem({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FunElem):
            out: dict[FunKey, complex] = {}
            for k1, c1 in self.terms.items():
                for k2, c2 in other.terms.items():
                    key = FunKey(k1.a + k2.a, k1.b + k2.b, k1.p + k2.p, k1.q + k2.q)
                    out[key] = out.get(key, 0j) + c1 * c2
            return FunElem(out)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "FunElem":
        return FunElem({k: complex(c) * v for k, v in self.terms.items()})

    # -- queries -------------------------------------------------------------

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def in_monoid_ring(self) -> bool:
        """True when no logarithm factors appear (p = q = 0 throughout)."""
        return all(k.p == 0 and k.q == 0 for k in self.terms)

    def max_log_power(self, which: str = "p") -> int:
        if not self.terms:
            return -1
        return max(getattr(k, which) for k in self.terms)

    def __repr__(self):
        if not self.terms:
            return "FunElem(0)"
        bits = []
        for key in sorted(self.terms, key=lambda k: (str(k.a), str(k.b), k.p, k.q)):
            c = self.terms[key]
            factors = []
            if not key.a.is_zero:
                factors.append(f"z^({key.a})")
            if not key.b.is_zero:
                factors.append(f"(1-z)^({key.b})")
            if key.p:
                factors.append(f"L0^{key.p}" if key.p > 1 else "L0")
            if key.q:
                factors.append(f"L1^{key.q}" if key.q > 1 else "L1")
            stem = "*".join(factors) or "1"
            bits.append(f"({c:g})*{stem}")
        return "FunElem(" + " + ".join(bits) + ")"


def monomial(a: ExponentLike = 0, b: ExponentLike = 0, p: int = 0, q: int = 0,
             coeff: complex = 1.0) -> FunElem:
    return FunElem({FunKey(as_exponent(a), as_exponent(b), p, q): coeff})


FUN_ZERO = FunElem({})
FUN_ONE = monomial()
L0 = monomial(p=1)
L1 = monomial(q=1)


def fun_eq(f: FunElem, g: FunElem, tol: float = 1e-12) -> bool:
    return (f - g).is_zero(tol)


# -- derivation ----------------------------------------------------------------

def derive(f: FunElem, symbols: SymbolValues = NO_SYMBOLS) -> FunElem:
    """d/dz, with d(z^a) = a z^(a-1), d((1-z)^b) = -b (1-z)^(b-1),
    d(L0) = z^-1 and d(L1) = (1-z)^-1, extended by Leibniz."""
    out: dict[FunKey, complex] = {}

    def acc(key: FunKey, c: complex):
        if c != 0:
            out[key] = out.get(key, 0j) + c

    for key, c in f.terms.items():
        a_num = key.a.numeric(symbols)
        b_num = key.b.numeric(symbols)
        acc(FunKey(key.a - EXP_ONE, key.b, key.p, key.q), c * a_num)
        acc(FunKey(key.a, key.b - EXP_ONE, key.p, key.q), -c * b_num)
        if key.p:
            acc(FunKey(key.a - EXP_ONE, key.b, key.p - 1, key.q), c * key.p)
        if key.q:
            acc(FunKey(key.a, key.b - EXP_ONE, key.p, key.q - 1), c * key.q)
    return FunElem(out)


def wronskian(f1: FunElem, f2: FunElem, symbols: SymbolValues = NO_SYMBOLS) -> FunElem:
    """d(f1) f2 - f1 d(f2); bilinear and antisymmetric."""
    return derive(f1, symbols) * f2 - f1 * derive(f2, symbols)


# -- monodromy -----------------------------------------------------------------

@dataclass(frozen=True)
class MonodromyOp:
    """Deck transformation of index one around 0 or around 1."""

    center: int

    def __post_init__(self):
        if self.center not in (0, 1):
            raise ValueError("monodromy center must be 0 or 1")

    @property
    def log_power_field(self) -> str:
        return "p" if self.center == 0 else "q"


D0 = MonodromyOp(0)
D1 = MonodromyOp(1)

_TWO_PI_I = 2j * cmath.pi


def apply_monodromy(op: MonodromyOp, n: int, f: FunElem,
                    symbols: SymbolValues = NO_SYMBOLS) -> FunElem:
    """Apply the n-th power of the deck transformation as a ring morphism.

    Around 0: z^a picks up e^(2 i pi n a) and L0 shifts by 2 i pi n;
    around 1: (1-z)^b picks up e^(-2 i pi n b) and L1 shifts by 2 i pi n.
    """
    shift = _TWO_PI_I * n
    out: dict[FunKey, complex] = {}
    for key, c in f.terms.items():
        if op.center == 0:
            factor = cmath.exp(_TWO_PI_I * n * key.a.numeric(symbols))
            for j in range(key.p + 1):
                coeff = c * factor * comb(key.p, j) * shift ** (key.p - j)
                new = FunKey(key.a, key.b, j, key.q)
                out[new] = out.get(new, 0j) + coeff
        else:
            factor = cmath.exp(-_TWO_PI_I * n * key.b.numeric(symbols))
            for j in range(key.q + 1):
                coeff = c * factor * comb(key.q, j) * shift ** (key.q - j)
                new = FunKey(key.a, key.b, key.p, j)
                out[new] = out.get(new, 0j) + coeff
    return FunElem(out)


def log_coefficient_elimination(f: FunElem, op: MonodromyOp,
                                tol: float = 0.0) -> list[FunElem]:
    """Decompose f by powers of op's log symbol.

    Returns [c_0, c_1, ..., c_m] with f = sum_j c_j * L^j where L is L0
    (center 0) or L1 (center 1) and the c_j carry no such log factor.
    The zero element decomposes to [].
    """
    field = op.log_power_field
    top = f.max_log_power(field)
    if top < 0:
        return []
    parts: list[dict[FunKey, complex]] = [dict() for _ in range(top + 1)]
    for key, c in f.terms.items():
        j = getattr(key, field)
        stripped = key._replace(**{field: 0})
        parts[j][stripped] = parts[j].get(stripped, 0j) + c
    out = []
    for part in parts:
        elem = FunElem({k: c for k, c in part.items() if abs(c) > tol})
        out.append(elem)
    return out


# -- numeric evaluation ----------------------------------------------------------

def _principal_power(base: complex, expo: complex) -> complex:
    if expo == 0:
        return 1.0 + 0j
    if base == 0:
        if expo.real > 0:
            return 0j
        raise BranchCutError("0 raised to a non-positive-real-part exponent")
    if base.imag == 0 and base.real < 0:
        raise BranchCutError("power base on the negative real axis")
    return cmath.exp(expo * cmath.log(base))


def evaluate(f: FunElem, z: complex, symbols: SymbolValues = NO_SYMBOLS) -> complex:
    """Numeric value with principal branches, arg in (-pi, pi].

    The domain is the doubly cut plane C minus (]-inf,0] union [1,+inf[);
    a term is only rejected when it actually needs a singular factor, so
    e.g. pure z^a monomials still evaluate at z = 1.
    """
    z = complex(z)
    w = 1 - z
    total = 0j
    for key, c in f.terms.items():
        val = c
        val *= _principal_power(z, key.a.numeric(symbols))
        val *= _principal_power(w, key.b.numeric(symbols))
        if key.p:
            if z == 0 or (z.imag == 0 and z.real < 0):
                raise BranchCutError("log z undefined on the cut ]-inf,0]")
            val *= cmath.log(z) ** key.p
        if key.q:
            if w == 0 or (w.imag == 0 and w.real < 0):
                raise BranchCutError("log(1/(1-z)) undefined on the cut [1,+inf[")
            val *= (-cmath.log(w)) ** key.q
        total += val
    return total


# -- coefficient-ring adapter ---------------------------------------------------

class FunRing(CoefficientRing):
    """FunElem coefficients for the series kernel.

    Carries the session's symbol table so the induced derivation on
    series coefficients is available, plus the equality tolerance.
    """

    name = "funring"

    def __init__(self, symbols: SymbolValues | Mapping[str, complex] | None = None,
                 tol: float = 1e-12):
        if symbols is None:
            symbols = NO_SYMBOLS
        elif not isinstance(symbols, SymbolValues):
            symbols = SymbolValues(symbols)
        self.symbols = symbols
        self.tol = float(tol)

    def zero(self):
        return FUN_ZERO

    def one(self):
        return FUN_ONE

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return a.is_zero(self.tol)

    def from_int(self, n):
        return monomial(coeff=float(n)) if n else FUN_ZERO

    @property
    def has_derivation(self):
        return True

    def derive(self, a):
        return derive(a, self.symbols)

    def coeff_to_json(self, a):
        return {"terms": _terms_to_json(a)}

    def coeff_from_json(self, data):
        return _terms_from_json(data["terms"])


# -- JSON -------------------------------------------------------------------------

def _exponent_to_json(xs: ExponentScalar) -> dict:
    if xs.is_zero:
        return {RATIONAL_KEY: "0"}
    return {s: str(c) for s, c in xs.coords}

def _exponent_from_json(data: Mapping) -> ExponentScalar:
    return ExponentScalar(tuple((s, Fraction(v)) for s, v in data.items()))

def _terms_to_json(f: FunElem) -> list:
    entries = []
    for key in sorted(f.terms, key=lambda k: (str(k.a), str(k.b), k.p, k.q)):
        c = f.terms[key]
        entries.append({
            "a": _exponent_to_json(key.a),
            "b": _exponent_to_json(key.b),
            "p": key.p,
            "q": key.q,
            "re": c.real,
            "im": c.imag,
        })
    return entries

def _terms_from_json(entries) -> FunElem:
    terms = {}
    for e in entries:
        key = FunKey(_exponent_from_json(e["a"]), _exponent_from_json(e["b"]),
                     int(e["p"]), int(e["q"]))
        terms[key] = terms.get(key, 0j) + complex(e["re"], e.get("im", 0.0))
    return FunElem(terms)


def fun_to_json(f: FunElem, symbols: SymbolValues = NO_SYMBOLS) -> dict:
    return {
        "symbols": {k: v.real if v.imag == 0 else {"re": v.real, "im": v.imag}
                    for k, v in symbols.items()},
        "terms": _terms_to_json(f),
    }


def fun_from_json(data: Mapping) -> tuple[FunElem, SymbolValues]:
    raw = data.get("symbols", {})
    values = {}
    for k, v in raw.items():
        values[k] = complex(v["re"], v.get("im", 0.0)) if isinstance(v, Mapping) else complex(v)
    return _terms_from_json(data["terms"]), SymbolValues(values)
