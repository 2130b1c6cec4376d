"""Words in a free group with inverse letters.

A word is a tuple of (generator index, exponent) with exponent +1 or -1,
kept freely reduced.  The text form follows the corpus convention: lower
case letters are generators, the matching capital is the inverse, so
"aBAb" is a b^-1 a^-1 b.
"""

from __future__ import annotations

from ptower.errors import ValidationError


def free_reduce(letters):
    """Cancel adjacent x x^-1 pairs; idempotent."""
    out = []
    for g, e in letters:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((g, e))
    return tuple(out)


class Word:
    """Freely reduced word; immutable and hashable."""

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        for g, e in letters:
            if e not in (1, -1):
                raise ValidationError(f"letter exponent must be +-1, got {e}")
            if g < 0:
                raise ValidationError("negative generator index")
        object.__setattr__(self, "letters", free_reduce(letters))

    def __setattr__(self, *a):
        raise AttributeError("Word is immutable")

    @classmethod
    def identity(cls):
        return cls(())

    @classmethod
    def generator(cls, i, e=1):
        return cls(((i, e),))

    @classmethod
    def parse(cls, text: str, generators: list[str]) -> "Word":
        """Parse the corpus text form against an ordered generator name list."""
        index = {}
        for i, name in enumerate(generators):
            if len(name) != 1 or not name.isalpha() or not name.islower():
                raise ValidationError(f"generator name {name!r} must be one lower case letter")
            if name in index:
                raise ValidationError(f"duplicate generator name {name!r}")
            index[name] = i
        letters = []
        for ch in text:
            if ch.isspace():
                continue
            low = ch.lower()
            if low not in index:
                raise ValidationError(f"unknown letter {ch!r} in word {text!r}")
            letters.append((index[low], 1 if ch.islower() else -1))
        return cls(letters)

    def format(self, generators: list[str]) -> str:
        return "".join(
            generators[g] if e == 1 else generators[g].upper() for g, e in self.letters
        )

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def max_generator(self) -> int:
        return max((g for g, _ in self.letters), default=-1)

    def exponent_sum(self, j: int) -> int:
        return sum(e for g, e in self.letters if g == j)

    def is_identity(self) -> bool:
        return not self.letters

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        if not self.letters:
            return "Word(1)"
        return "Word(" + " ".join(f"g{g}" if e == 1 else f"g{g}^-1" for g, e in self.letters) + ")"
