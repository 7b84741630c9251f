"""Degree-truncated noncommutative polynomials/series over a coefficient ring.

Every series carries a hard truncation degree; concatenation and shuffle
products silently drop words longer than that, which keeps all the graded
identities exact degree by degree.  Storage is a sparse word -> coefficient
map with zero coefficients pruned eagerly, so support-based predicates
(leading monomial, degree) are reliable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .rings import CoefficientRing
from .words import (
    EMPTY_WORD,
    Alphabet,
    Word,
    graded_lex_key,
    shuffle_words,
    word_of,
)


@dataclass(frozen=True, eq=False)
class Series:
    alphabet: Alphabet
    max_degree: int
    ring: CoefficientRing
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        clean = {}
        for w, c in self.terms.items():
            if len(w) > self.max_degree or self.ring.is_zero(c):
                continue
            if any(i < 0 or i >= len(self.alphabet) for i in w.letters):
                raise ValueError(f"word {w} has letters outside the alphabet")
            clean[w] = c
        object.__setattr__(self, "terms", clean)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, alphabet: Alphabet, max_degree: int, ring: CoefficientRing):
        return cls(alphabet, max_degree, ring, {})

    @classmethod
    def one(cls, alphabet: Alphabet, max_degree: int, ring: CoefficientRing):
        return cls(alphabet, max_degree, ring, {EMPTY_WORD: ring.one()})

    @classmethod
    def monomial(cls, alphabet, max_degree, ring, word: Word, coeff=None):
        c = ring.one() if coeff is None else coeff
        return cls(alphabet, max_degree, ring, {word: c})

    @classmethod
    def letter(cls, alphabet, max_degree, ring, name: str, coeff=None):
        return cls.monomial(alphabet, max_degree, ring,
                            word_of(alphabet, [name]), coeff)

    # -- basic queries -----------------------------------------------------

    def coeff(self, w: Word):
        return self.terms.get(w, self.ring.zero())

    def support(self) -> list[Word]:
        """Stored words in increasing graded-lex order."""
        return sorted(self.terms, key=graded_lex_key)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Max stored word length; -1 for the zero series."""
        return max((len(w) for w in self.terms), default=-1)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        if self.alphabet != other.alphabet or self.max_degree != other.max_degree:
            return False
        for w in set(self.terms) | set(other.terms):
            if not self.ring.eq(self.coeff(w), other.coeff(w)):
                return False
        return True

    def __repr__(self):
        if not self.terms:
            return "Series(0)"
        bits = []
        for w in self.support():
            name = ".".join(w.names(self.alphabet)) or "1"
            bits.append(f"({self.terms[w]!r})*{name}")
        return "Series(" + " + ".join(bits) + ")"

    # -- linear structure ----------------------------------------------------

    def _check_compatible(self, other: "Series"):
        if self.alphabet != other.alphabet:
            raise ValueError("alphabet mismatch")
        if self.max_degree != other.max_degree:
            raise ValueError("truncation degree mismatch")

    def __add__(self, other: "Series") -> "Series":
        self._check_compatible(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = self.ring.add(out.get(w, self.ring.zero()), c)
        return Series(self.alphabet, self.max_degree, self.ring, out)

    def __neg__(self):
        return Series(self.alphabet, self.max_degree, self.ring,
                      {w: self.ring.neg(c) for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, coeff) -> "Series":
        """Left-multiply every coefficient by a ring element."""
        return Series(self.alphabet, self.max_degree, self.ring,
                      {w: self.ring.mul(coeff, c) for w, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Series):
            return concat_mul(self, other)
        return NotImplemented

    def truncated(self, max_degree: int) -> "Series":
        return Series(self.alphabet, max_degree, self.ring,
                      {w: c for w, c in self.terms.items() if len(w) <= max_degree})


# -- products and pairings ---------------------------------------------------

def concat_mul(s: Series, t: Series) -> Series:
    """Concatenation (Cauchy) product, truncated at the shared degree."""
    s._check_compatible(t)
    ring = s.ring
    out: dict[Word, Any] = {}
    for u, cu in s.terms.items():
        for v, cv in t.terms.items():
            if len(u) + len(v) > s.max_degree:
                continue
            w = u.concat(v)
            prod = ring.mul(cu, cv)
            out[w] = ring.add(out.get(w, ring.zero()), prod)
    return Series(s.alphabet, s.max_degree, ring, out)


def shuffle_mul(s: Series, t: Series) -> Series:
    """Shuffle product, bilinear extension of the word shuffle."""
    s._check_compatible(t)
    ring = s.ring
    out: dict[Word, Any] = {}
    for u, cu in s.terms.items():
        for v, cv in t.terms.items():
            if len(u) + len(v) > s.max_degree:
                continue
            cuv = ring.mul(cu, cv)
            for w, mult in shuffle_words(u, v).items():
                prod = ring.mul(cuv, ring.from_int(mult))
                out[w] = ring.add(out.get(w, ring.zero()), prod)
    return Series(s.alphabet, s.max_degree, ring, out)


def pairing(s: Series, p: Series):
    """<S|P> = sum over words of <S|w><P|w>; P must have finite support."""
    if s.alphabet != p.alphabet:
        raise ValueError("alphabet mismatch")
    ring = s.ring
    total = ring.zero()
    for w, cp in p.terms.items():
        cs = s.terms.get(w)
        if cs is not None:
            total = ring.add(total, ring.mul(cs, cp))
    return total


def left_residual(letter: int | str, s: Series, alphabet: Alphabet | None = None) -> Series:
    """x^dagger S: the series w -> <S|xw>, one degree shorter."""
    if isinstance(letter, str):
        letter = (alphabet or s.alphabet).index(letter)
    if letter < 0 or letter >= len(s.alphabet):
        raise ValueError("letter outside the alphabet")
    out = {}
    for w, c in s.terms.items():
        if w.letters and w.letters[0] == letter:
            out[Word(w.letters[1:])] = c
    return Series(s.alphabet, s.max_degree, s.ring, out)


def leading_monomial(p: Series) -> Word:
    """Greatest word of the support in graded-lex order."""
    if p.is_zero():
        raise ValueError("zero polynomial has no leading monomial")
    return max(p.terms, key=graded_lex_key)


def adjoint_multiplier_apply(m: Series, q: Series) -> Series:
    """M^dagger Q = sum over letters x of u_x (x^dagger Q).

    M must be homogeneous of degree 1 (a letter-linear multiplier).
    """
    m._check_compatible(q)
    if any(len(w) != 1 for w in m.terms):
        raise ValueError("multiplier must be homogeneous of degree 1")
    ring = q.ring
    acc = Series.zero(q.alphabet, q.max_degree, ring)
    for w, ux in m.terms.items():
        acc = acc + left_residual(w.letters[0], q).scale(ux)
    return acc


def coefficientwise_derivation(s: Series) -> Series:
    """Apply the coefficient ring's derivation to every coefficient."""
    if not s.ring.has_derivation:
        raise TypeError("coefficient ring has no derivation")
    return Series(s.alphabet, s.max_degree, s.ring,
                  {w: s.ring.derive(c) for w, c in s.terms.items()})


def star_letter_series(alphabet: Alphabet, weights: Mapping[str, Any],
                       max_degree: int, ring: CoefficientRing) -> Series:
    """(sum_x a_x x)^* truncated: coefficient of w is the product of its
    letter weights; the empty word gets 1."""
    idx_weights = {alphabet.index(name): c for name, c in weights.items()
                   if not ring.is_zero(c)}
    out = {EMPTY_WORD: ring.one()}
    frontier = {EMPTY_WORD: ring.one()}
    for _ in range(max_degree):
        nxt: dict[Word, Any] = {}
        for w, c in frontier.items():
            for i, a in idx_weights.items():
                nxt[Word(w.letters + (i,))] = ring.mul(c, a)
        if not nxt:
            break
        out.update(nxt)
        frontier = nxt
    return Series(alphabet, max_degree, ring, out)


# -- JSON ---------------------------------------------------------------------

def series_to_json(s: Series) -> dict:
    return {
        "alphabet": list(s.alphabet.letters),
        "max_degree": s.max_degree,
        "terms": [
            {"word": list(w.names(s.alphabet)), "coeff": s.ring.coeff_to_json(c)}
            for w, c in ((w, s.terms[w]) for w in s.support())
        ],
    }


def series_from_json(data: Mapping, ring: CoefficientRing) -> Series:
    alphabet = Alphabet(tuple(data["alphabet"]))
    terms = {}
    for entry in data["terms"]:
        w = word_of(alphabet, entry["word"])
        terms[w] = ring.coeff_from_json(entry["coeff"])
    return Series(alphabet, int(data["max_degree"]), ring, terms)
