"""Corpus entries: presentations with ring data and polynomial matrix images.

File format (UTF-8 JSON): a list of entries with
  label, generators (one lower case letter each), relators (words, capitals
  are inverses), ring {min_poly: coefficients low degree first, label},
  generator_images (2x2 arrays of integer-coefficient polynomial strings in
  x), arithmetic, congruence, provenance, optional bad_primes.

Entries are gated twice: exact symbolic validation of every relator over
Z[x]/(min_poly), and validate_presentation against the reduced images at
every level actually used.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from ptower.congruence import CongruenceMap, RingSpec
from ptower.errors import ValidationError
from ptower.group_core import GroupPresentation

_TERM = re.compile(
    r"^(?P<sign>[+-]?)(?P<coef>\d+)?(?:\*?(?P<var>x)(?:\^(?P<exp>\d+))?)?$"
)


def parse_poly(text: str) -> list[int]:
    """Integer polynomial from a string like '2x^2-3x+1'; low degree first."""
    s = text.replace(" ", "")
    if not s:
        raise ValidationError("empty polynomial string")
    chunks = re.findall(r"[+-]?[^+-]+", s)
    coeffs: dict[int, int] = {}
    for chunk in chunks:
        m = _TERM.match(chunk)
        if not m or (m.group("coef") is None and m.group("var") is None):
            raise ValidationError(f"cannot parse polynomial term {chunk!r} in {text!r}")
        sign = -1 if m.group("sign") == "-" else 1
        coef = int(m.group("coef")) if m.group("coef") is not None else 1
        if m.group("var"):
            exp = int(m.group("exp")) if m.group("exp") else 1
        else:
            exp = 0
        coeffs[exp] = coeffs.get(exp, 0) + sign * coef
    deg = max(coeffs) if coeffs else 0
    return [coeffs.get(i, 0) for i in range(deg + 1)]


# -- exact arithmetic in Z[x]/(f) --------------------------------------------


def _poly_mulmod(a, b, f):
    deg = len(f) - 1
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    # reduce by the monic f
    for i in range(len(out) - 1, deg - 1, -1):
        c = out[i]
        if c:
            for j in range(deg + 1):
                out[i - deg + j] -= c * f[j]
    out = out[:deg] if deg > 0 else [0]
    return tuple(out + [0] * (max(deg, 1) - len(out)))


def _ring_elems(f):
    deg = max(len(f) - 1, 1)
    zero = tuple([0] * deg)
    one = tuple([1] + [0] * (deg - 1))
    return zero, one


def _mat_mul_ring(a, b, f):
    zero, _ = _ring_elems(f)

    def dot(r, c):
        acc = list(zero)
        for t in range(2):
            prod = _poly_mulmod(list(a[r][t]), list(b[t][c]), f)
            acc = [x + y for x, y in zip(acc, prod)]
        return tuple(acc)

    return tuple(tuple(dot(r, c) for c in range(2)) for r in range(2))


@dataclass
class CorpusEntry:
    label: str
    generators: list[str]
    relators: list[str]
    ring: RingSpec
    generator_images: list  # per generator, 2x2 nested coefficient lists
    arithmetic: bool = False
    congruence: bool = False
    provenance: str = ""
    bad_primes: list[int] = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusEntry":
        ring = RingSpec(d["ring"]["min_poly"], d["ring"].get("label", ""))
        images = []
        for gmat in d["generator_images"]:
            images.append([[parse_poly(gmat[r][c]) for c in range(2)] for r in range(2)])
        return cls(
            label=d["label"],
            generators=list(d["generators"]),
            relators=list(d["relators"]),
            ring=ring,
            generator_images=images,
            arithmetic=bool(d.get("arithmetic", False)),
            congruence=bool(d.get("congruence", False)),
            provenance=d.get("provenance", ""),
            bad_primes=list(d.get("bad_primes", [])),
            raw=d,
        )

    def presentation(self) -> GroupPresentation:
        return GroupPresentation.from_strings(self.generators, self.relators, label=self.label)

    def hom(self, p: int, k: int, root: int | None = None) -> CongruenceMap:
        return CongruenceMap.from_polynomial_images(
            self.ring, p, k, self.generator_images, a1=root, label=self.label
        )

    def usable_roots(self, p: int) -> list[int]:
        if p in self.bad_primes:
            return []
        return self.ring.simple_roots_mod(p)

    def validate_exact(self) -> bool:
        """Every relator equals the identity matrix over Z[x]/(min_poly)."""
        f = self.ring.min_poly
        zero, one = _ring_elems(f)
        ident = ((one, zero), (zero, one))
        mats = {}
        for name, gmat in zip(self.generators, self.generator_images):
            deg = max(len(f) - 1, 1)

            def lift(coeffs):
                c = list(coeffs) + [0] * deg
                return tuple(c[:deg])

            m = tuple(tuple(lift(gmat[r][c]) for c in range(2)) for r in range(2))
            (a, b), (c_, d_) = m
            neg = lambda t: tuple(-x for x in t)
            mats[name] = m
            mats[name.upper()] = ((d_, neg(b)), (neg(c_), a))
        for rel in self.relators:
            m = ident
            for ch in rel:
                if ch.isspace():
                    continue
                if ch not in mats:
                    raise ValidationError(f"unknown letter {ch!r} in relator {rel!r}")
                m = _mat_mul_ring(m, mats[ch], f)
            if m != ident:
                return False
        return True

    def to_dict(self) -> dict:
        return self.raw


def load_corpus(path: str | None = None) -> list[CorpusEntry]:
    if path is None:
        text = resources.files("ptower").joinpath("data/corpus.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    data = json.loads(text)
    entries = [CorpusEntry.from_dict(d) for d in data]
    labels = [e.label for e in entries]
    if len(set(labels)) != len(labels):
        raise ValidationError("duplicate labels in corpus")
    return entries


def entry_by_label(entries: list[CorpusEntry], label: str) -> CorpusEntry:
    for e in entries:
        if e.label == label:
            return e
    raise ValidationError(f"no corpus entry labelled {label!r}")
