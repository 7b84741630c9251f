"""Words over a finite ordered alphabet, graded-lex order, word shuffles.

Letters are stored as indices into an Alphabet; the alphabet's declared
order of letter names is the well-ordering used everywhere below.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite alphabet; position in `letters` is the letter order."""

    letters: tuple[str, ...]

    def __post_init__(self):
        if not self.letters:
            raise ValueError("alphabet must be nonempty")
        if len(set(self.letters)) != len(self.letters):
            raise ValueError("alphabet letters must be distinct")
        object.__setattr__(self, "letters", tuple(self.letters))

    def __len__(self):
        return len(self.letters)

    def index(self, name: str) -> int:
        try:
            return self.letters.index(name)
        except ValueError:
            raise KeyError(f"letter {name!r} not in alphabet {self.letters}") from None


@dataclass(frozen=True)
class Word:
    """A finite sequence of letter indices; Word(()) is the empty word."""

    letters: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def concat(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def names(self, alphabet: Alphabet) -> tuple[str, ...]:
        return tuple(alphabet.letters[i] for i in self.letters)

    def __repr__(self):
        return "Word(" + ",".join(map(str, self.letters)) + ")"


EMPTY_WORD = Word(())


def word_of(alphabet: Alphabet, names: Iterable[str] | str) -> Word:
    """Build a word from letter names; a string is split on commas."""
    if isinstance(names, str):
        names = [s for s in names.split(",") if s]
    return Word(tuple(alphabet.index(n) for n in names))


def graded_lex_key(w: Word) -> tuple:
    return (len(w.letters), w.letters)


def graded_lex_compare(u: Word, v: Word) -> int:
    """-1, 0 or +1 as u precedes, equals or follows v in graded-lex order.

    Length decides first; equal lengths fall back to the letter order.
    """
    ku, kv = graded_lex_key(u), graded_lex_key(v)
    return -1 if ku < kv else (1 if ku > kv else 0)


def all_words(alphabet: Alphabet, max_len: int) -> Iterator[Word]:
    """All words of length <= max_len in increasing graded-lex order."""
    n = len(alphabet)
    for length in range(max_len + 1):
        for tup in itertools.product(range(n), repeat=length):
            yield Word(tup)


@functools.lru_cache(maxsize=None)
def _shuffle_letters(u: tuple[int, ...], v: tuple[int, ...]) -> dict:
    # xu sh yv = x(u sh yv) + y(xu sh v); base cases absorb the empty word.
    if not u:
        return {v: 1}
    if not v:
        return {u: 1}
    out: dict[tuple[int, ...], int] = {}
    for w, m in _shuffle_letters(u[1:], v).items():
        key = (u[0],) + w
        out[key] = out.get(key, 0) + m
    for w, m in _shuffle_letters(u, v[1:]).items():
        key = (v[0],) + w
        out[key] = out.get(key, 0) + m
    return out


def shuffle_words(u: Word, v: Word) -> dict[Word, int]:
    """Shuffle product of two words as a word -> multiplicity map."""
    return {Word(k): m for k, m in _shuffle_letters(u.letters, v.letters).items()}
