"""Group presentations, free group ring elements, and Fox calculus.

The free differential rules used throughout:

    d(uv)/dg = du/dg + u . dv/dg
    dg_i/dg_j = delta_ij
    dg_i^-1/dg_j = -g_i^-1 . delta_ij

Together with d1(e_i) = 1 - g_i these turn a presentation into the chain
maps consumed by the cohomology module.  On relators written with positive
letters only the derivative reduces to the running-prefix sum.
"""

from __future__ import annotations

from ptower.errors import ValidationError
from ptower.words import Word

DEFAULT_NAMES = "abcdefghijklmnopqrstuvwxyz"


class FreeRingElement:
    """Element of the integral group ring of a free group; immutable."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for w, c in (terms.items() if isinstance(terms, dict) else terms):
                if not isinstance(w, Word):
                    raise ValidationError("ring element terms must be Words")
                c = clean.get(w, 0) + c if w in clean else c
                if c:
                    clean[w] = c
                else:
                    clean.pop(w, None)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("FreeRingElement is immutable")

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def one(cls):
        return cls({Word.identity(): 1})

    @classmethod
    def from_word(cls, w: Word, c: int = 1):
        return cls({w: c})

    def __add__(self, other):
        terms = dict(self.terms)
        for w, c in other.terms.items():
            v = terms.get(w, 0) + c
            if v:
                terms[w] = v
            else:
                terms.pop(w, None)
        return FreeRingElement(terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, a: int):
        if a == 0:
            return FreeRingElement()
        return FreeRingElement({w: c * a for w, c in self.terms.items()})

    def __mul__(self, other):
        """Ring multiplication (words concatenate and freely reduce)."""
        acc: dict[Word, int] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 * w2
                acc[w] = acc.get(w, 0) + c1 * c2
        return FreeRingElement(acc)

    def mul_word(self, w: Word, left=False):
        if left:
            return FreeRingElement({w * u: c for u, c in self.terms.items()})
        return FreeRingElement({u * w: c for u, c in self.terms.items()})

    def star(self):
        """The standard involution: sum c_w w maps to sum c_w w^-1."""
        acc: dict[Word, int] = {}
        for w, c in self.terms.items():
            wi = w.inverse()
            acc[wi] = acc.get(wi, 0) + c
        return FreeRingElement(acc)

    def is_zero(self):
        return not self.terms

    def max_generator(self):
        return max((w.max_generator() for w in self.terms), default=-1)

    def __eq__(self, other):
        return isinstance(other, FreeRingElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def format(self, generators):
        if not self.terms:
            return "0"
        bits = []
        for w in sorted(self.terms, key=lambda w: (len(w), w.letters)):
            c = self.terms[w]
            ws = w.format(generators) if len(w) else "1"
            bits.append(f"{c:+d}*{ws}")
        return " ".join(bits)

    def __repr__(self):
        return f"<FreeRingElement {len(self.terms)} terms>"


class GroupPresentation:
    """Finitely presented group: generator count, relator words, a label."""

    __slots__ = ("n_generators", "relators", "label", "generator_names")

    def __init__(self, n_generators, relators, label="", generator_names=None):
        if n_generators < 0:
            raise ValidationError("negative generator count")
        relators = tuple(relators)
        for r in relators:
            if not isinstance(r, Word):
                raise ValidationError("relators must be Words")
            if r.max_generator() >= n_generators:
                raise ValidationError(
                    f"relator {r!r} uses generator index >= {n_generators}"
                )
        if generator_names is None:
            generator_names = list(DEFAULT_NAMES[:n_generators])
        if len(generator_names) != n_generators:
            raise ValidationError("generator name count mismatch")
        object.__setattr__(self, "n_generators", n_generators)
        object.__setattr__(self, "relators", relators)
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "generator_names", list(generator_names))

    def __setattr__(self, *a):
        raise AttributeError("GroupPresentation is immutable")

    @classmethod
    def from_strings(cls, generator_names, relator_strings, label=""):
        gens = list(generator_names)
        rels = [Word.parse(s, gens) for s in relator_strings]
        return cls(len(gens), rels, label=label, generator_names=gens)

    @property
    def n_relators(self):
        return len(self.relators)

    def exponent_matrix(self):
        """Relator-by-generator exponent sums (abelianised relation matrix)."""
        return [
            [r.exponent_sum(j) for j in range(self.n_generators)] for r in self.relators
        ]

    def __repr__(self):
        return f"<GroupPresentation {self.label or '?'}: {self.n_generators} gens, {self.n_relators} relators>"


def fox_derivative(r: Word, j: int, n_generators: int | None = None) -> FreeRingElement:
    """Free derivative dr/dg_j."""
    if n_generators is not None and j >= n_generators:
        raise ValidationError(f"generator index {j} out of range")
    if j < 0:
        raise ValidationError("negative generator index")
    acc: dict[Word, int] = {}
    prefix = Word.identity()
    for g, e in r.letters:
        if g == j:
            if e == 1:
                w = prefix
                acc[w] = acc.get(w, 0) + 1
            else:
                w = prefix * Word.generator(g, -1)
                acc[w] = acc.get(w, 0) - 1
        prefix = prefix * Word.generator(g, e)
    return FreeRingElement(acc)


def boundary_data(pres: GroupPresentation):
    """d0 spec (list 1 - g_i) and d1 spec (relator-by-generator Fox matrix)."""
    one = Word.identity()
    d0 = [
        FreeRingElement({one: 1, Word.generator(i): -1})
        for i in range(pres.n_generators)
    ]
    d1 = [
        [fox_derivative(r, j, pres.n_generators) for j in range(pres.n_generators)]
        for r in pres.relators
    ]
    return d0, d1


def laplacian_element(pres: GroupPresentation) -> FreeRingElement:
    """Sum over generators of 2 - g_i - g_i^-1."""
    acc: dict[Word, int] = {Word.identity(): 2 * pres.n_generators}
    if pres.n_generators == 0:
        return FreeRingElement()
    for i in range(pres.n_generators):
        for e in (1, -1):
            w = Word.generator(i, e)
            acc[w] = acc.get(w, 0) - 1
    return FreeRingElement(acc)


def fox_fundamental_identity_holds(pres: GroupPresentation) -> bool:
    """Check sum_j (dR/dg_j)(g_j - 1) = R - 1 symbolically for every relator."""
    one = FreeRingElement.one()
    for r in pres.relators:
        total = FreeRingElement.zero()
        for j in range(pres.n_generators):
            gj = FreeRingElement.from_word(Word.generator(j))
            total = total + fox_derivative(r, j) * (gj - one)
        if total != FreeRingElement.from_word(r) - one:
            return False
    return True


def validate_presentation(pres: GroupPresentation, hom) -> bool:
    """True iff every relator maps to the identity matrix under ``hom``.

    ``hom`` must provide word_image(word) and identity(); CongruenceMap does.
    """
    if getattr(hom, "n_generators", pres.n_generators) != pres.n_generators:
        raise ValidationError("homomorphism does not cover all generators")
    ident = hom.identity()
    return all(hom.word_image(r) == ident for r in pres.relators)
