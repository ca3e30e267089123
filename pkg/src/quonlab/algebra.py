"""Quon operator polynomials and their normal-ordering rewrite engine.

The only relation is the q-mutator ``b_m bd_n - q bd_n b_m = delta_{mn}``.
Words in which every creation generator precedes every annihilation
generator are irreducible, so they form a basis and the normal-ordered form
of a polynomial is unique.

Modes are stored as ``twice_m`` integers so half-integer projections stay exact.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .scalars import ConfigurationError, DeformationParameter, format_scalar, parse_number


def format_mode(twice_m: int) -> str:
    if twice_m % 2 == 0:
        return str(twice_m // 2)
    return f"{twice_m}/2"


def parse_mode(text: str) -> int:
    """``"1"`` -> 2, ``"-1/2"`` -> -1."""
    text = text.strip()
    m = re.fullmatch(r"([+-]?\d+)(?:/(\d+))?", text)
    if not m:
        raise ValueError(f"bad mode {text!r}")
    num, den = int(m.group(1)), m.group(2)
    if den is None:
        return 2 * num
    if int(den) == 1:
        return 2 * num
    if int(den) != 2:
        raise ValueError(f"mode must be an integer or a half-integer p/2, got {text!r}")
    return num


class Generator(NamedTuple):
    creation: bool
    twice_m: int

    def adjoint(self) -> "Generator":
        return Generator(not self.creation, self.twice_m)

    def __str__(self):
        return f"{'bd' if self.creation else 'b'}({format_mode(self.twice_m)})"


Factors = tuple  # tuple[Generator, ...]


def _sort_key(factors: Factors):
    cre = tuple(-g.twice_m for g in factors if g.creation)
    ann = tuple(-g.twice_m for g in factors if not g.creation)
    return (len(factors), len(cre), cre, ann)


def is_normal(factors: Factors) -> bool:
    seen_annihilation = False
    for g in factors:
        if g.creation and seen_annihilation:
            return False
        seen_annihilation |= not g.creation
    return True


class QuonAlgebra:
    """Generators ``b_m``, ``bd_m`` (m = -j..j) of one level at a fixed q.

    The instance also owns the memo tables of the rewriter, so polynomials of
    the same algebra share their normal-ordering work.
    """

    def __init__(self, twice_j: int, q):
        if twice_j < 0:
            raise ConfigurationError("twice_j must be non-negative")
        self.twice_j = int(twice_j)
        self.q = DeformationParameter.coerce(q)
        self.modes = tuple(range(-self.twice_j, self.twice_j + 1, 2))
        self._normal_cache: dict = {}
        self._vev_cache: dict = {}

    def __repr__(self):
        return f"QuonAlgebra(twice_j={self.twice_j}, q={self.q})"

    def __eq__(self, other):
        return (
            isinstance(other, QuonAlgebra)
            and self.twice_j == other.twice_j
            and self.q == other.q
        )

    def __hash__(self):
        return hash((self.twice_j, self.q))

    def check_mode(self, twice_m: int) -> int:
        if twice_m not in self.modes:
            raise ConfigurationError(
                f"mode {format_mode(twice_m)} outside -{format_mode(self.twice_j)}..{format_mode(self.twice_j)}"
            )
        return twice_m

    # construction helpers
    def bd(self, twice_m: int) -> "OperatorPolynomial":
        return self.word([Generator(True, self.check_mode(twice_m))])

    def b(self, twice_m: int) -> "OperatorPolynomial":
        return self.word([Generator(False, self.check_mode(twice_m))])

    def word(self, factors: Iterable[Generator], coeff=1) -> "OperatorPolynomial":
        return OperatorPolynomial.from_terms(self, {tuple(factors): coeff})

    def scalar(self, c) -> "OperatorPolynomial":
        return OperatorPolynomial.from_terms(self, {(): c})

    def one(self) -> "OperatorPolynomial":
        return self.scalar(1)

    def zero(self) -> "OperatorPolynomial":
        return OperatorPolynomial(self, {})

    def creation_word(self, modes: Iterable[int]) -> "OperatorPolynomial":
        """``bd(m1) bd(m2) ... bd(mn)``: the operator that builds word (m1..mn) from the vacuum."""
        return self.word([Generator(True, self.check_mode(m)) for m in modes])

    # rewriting
    def normal_form(self, factors: Factors) -> dict:
        """Normal-ordered expansion of one word as ``{factors: coeff}``.

        Rewrites the leftmost ``b_m bd_n`` pair into ``q bd_n b_m + delta_mn``;
        each step removes at least one annihilation-before-creation inversion,
        so the recursion terminates.
        """
        cached = self._normal_cache.get(factors)
        if cached is not None:
            return cached
        q = self.q.value
        result = None
        for i in range(len(factors) - 1):
            a, c = factors[i], factors[i + 1]
            if not a.creation and c.creation:
                swapped = factors[:i] + (c, a) + factors[i + 2 :]
                result = {}
                if q != 0:
                    for f, v in self.normal_form(swapped).items():
                        result[f] = q * v
                if a.twice_m == c.twice_m:
                    for f, v in self.normal_form(factors[:i] + factors[i + 2 :]).items():
                        result[f] = result.get(f, 0) + v
                result = {f: v for f, v in result.items() if v != 0}
                break
        if result is None:
            result = {factors: self.q.scalar(1)}
        self._normal_cache[factors] = result
        return result

    def vacuum_value(self, factors: Factors):
        """``<0| word |0>`` by the same rewrite rule, pruning terms that cannot reach the vacuum."""
        charge = Counter()
        for g in factors:
            charge[g.twice_m] += 1 if g.creation else -1
        if any(charge.values()):
            # every rewrite conserves bd-count minus b-count per mode
            return self.q.scalar(0)
        return self._vev(tuple(factors))

    def _vev(self, factors: Factors):
        if not factors:
            return self.q.scalar(1)
        if factors[0].creation or not factors[-1].creation:
            # <0| bd = 0 and b |0> = 0
            return self.q.scalar(0)
        cached = self._vev_cache.get(factors)
        if cached is not None:
            return cached
        i = next(
            k for k in range(len(factors) - 1) if not factors[k].creation and factors[k + 1].creation
        )
        a, c = factors[i], factors[i + 1]
        value = self.q.scalar(0)
        if self.q.value != 0:
            value = self.q.value * self._vev(factors[:i] + (c, a) + factors[i + 2 :])
        if a.twice_m == c.twice_m:
            value = value + self._vev(factors[:i] + factors[i + 2 :])
        self._vev_cache[factors] = value
        return value


@dataclass(frozen=True)
class Monomial:
    """A scalar times an arbitrary (not necessarily normal-ordered) word."""

    coeff: object
    factors: Factors

    @classmethod
    def of(cls, *generators: Generator, coeff=1) -> "Monomial":
        return cls(coeff, tuple(generators))


class OperatorPolynomial:
    """Finite linear combination of normal-ordered words over one :class:`QuonAlgebra`.

    Instances are immutable; arithmetic returns new polynomials in canonical form.
    """

    __slots__ = ("algebra", "_terms")

    def __init__(self, algebra: QuonAlgebra, normal_terms: dict):
        # trusted constructor: terms already normal-ordered and nonzero
        self.algebra = algebra
        self._terms = normal_terms

    @classmethod
    def from_terms(cls, algebra: QuonAlgebra, terms: dict) -> "OperatorPolynomial":
        """Build from arbitrary words, normal-ordering each one."""
        out: dict = {}
        for factors, coeff in terms.items():
            coeff = algebra.q.scalar(coeff)
            if coeff == 0:
                continue
            for g in factors:
                algebra.check_mode(g.twice_m)
            for f, v in algebra.normal_form(tuple(factors)).items():
                out[f] = out.get(f, 0) + coeff * v
        return cls(algebra, {f: v for f, v in out.items() if v != 0})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        """Terms in canonical order."""
        return sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0]))

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self):
        return self._terms.get((), self.algebra.q.scalar(0))

    def particle_shift(self) -> int | None:
        """Change of particle number if the same for every term, else None."""
        shifts = {sum(1 if g.creation else -1 for g in f) for f in self._terms}
        if len(shifts) > 1:
            return None
        return shifts.pop() if shifts else 0

    def _check(self, other: "OperatorPolynomial"):
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        if other.algebra != self.algebra:
            raise ConfigurationError(
                f"cannot combine polynomials of {self.algebra!r} and {other.algebra!r}"
            )
        return other

    def __add__(self, other):
        if not isinstance(other, OperatorPolynomial):
            return self + self.algebra.scalar(other)
        self._check(other)
        out = dict(self._terms)
        for f, v in other._terms.items():
            out[f] = out.get(f, 0) + v
        return OperatorPolynomial(self.algebra, {f: v for f, v in out.items() if v != 0})

    __radd__ = __add__

    def __neg__(self):
        return OperatorPolynomial(self.algebra, {f: -v for f, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "OperatorPolynomial":
        c = self.algebra.q.scalar(c)
        if c == 0:
            return self.algebra.zero()
        return OperatorPolynomial(self.algebra, {f: c * v for f, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, OperatorPolynomial):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return self.algebra == other.algebra and self._terms == other._terms

    def __hash__(self):
        return hash((self.algebra, frozenset(self._terms.items())))

    def adjoint(self) -> "OperatorPolynomial":
        return adjoint(self)

    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        body = " + ".join(
            f"{format_scalar(v)}*{' '.join(map(str, f)) or '1'}" for f, v in self.items()
        )
        return f"OperatorPolynomial({body or '0'})"


def normal_order(m: Monomial, algebra: QuonAlgebra) -> OperatorPolynomial:
    return OperatorPolynomial.from_terms(algebra, {tuple(m.factors): m.coeff})


def multiply(a: OperatorPolynomial, b: OperatorPolynomial) -> OperatorPolynomial:
    a._check(b)
    raw: dict = {}
    for fa, va in a._terms.items():
        for fb, vb in b._terms.items():
            raw[fa + fb] = raw.get(fa + fb, 0) + va * vb
    return OperatorPolynomial.from_terms(a.algebra, raw)


def adjoint(p: OperatorPolynomial) -> OperatorPolynomial:
    # q is real, so scalars are self-conjugate
    raw = {tuple(g.adjoint() for g in reversed(f)): v for f, v in p._terms.items()}
    return OperatorPolynomial.from_terms(p.algebra, raw)


def q_mutator(a: OperatorPolynomial, b: OperatorPolynomial, q=None) -> OperatorPolynomial:
    """``a b - q b a``; ``q`` defaults to the algebra's deformation."""
    a._check(b)
    if q is None:
        q = a.algebra.q
    else:
        q = DeformationParameter.coerce(q)
        if q.exact != a.algebra.q.exact:
            raise ConfigurationError("q backend differs from the algebra backend")
    return multiply(a, b) - multiply(b, a).scale(q.value)


def commutator(a: OperatorPolynomial, b: OperatorPolynomial) -> OperatorPolynomial:
    return multiply(a, b) - multiply(b, a)


def vacuum_expectation(p, algebra: QuonAlgebra | None = None):
    """``<0|p|0>``.

    For a polynomial this is its constant term.  A :class:`Monomial` (an
    unordered product) is evaluated with the rewrite rule directly, dropping
    branches that start with a creation or end with an annihilation generator.
    """
    if isinstance(p, OperatorPolynomial):
        return p.constant_term()
    if algebra is None:
        raise ConfigurationError("a Monomial needs its algebra")
    return algebra.q.scalar(p.coeff) * algebra.vacuum_value(tuple(p.factors))


# ---------------------------------------------------------------------------
# text serialization


def format_polynomial(p: OperatorPolynomial) -> str:
    """One term per line, ``coeff * bd(m1) ... b(mk)``, in canonical order."""
    if p.is_zero():
        return "0"
    lines = []
    for f, v in p.items():
        if f:
            lines.append(f"{format_scalar(v)} * {' '.join(map(str, f))}")
        else:
            lines.append(format_scalar(v))
    return "\n".join(lines)


_GEN_RE = re.compile(r"(bd|b)\(\s*([+-]?\d+(?:/\d+)?)\s*\)")


def parse_polynomial(text: str, algebra: QuonAlgebra) -> OperatorPolynomial:
    """Inverse of :func:`format_polynomial`."""
    raw: dict = {}
    text = text.strip()
    if text == "0":
        return algebra.zero()
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        coeff_text, _, word_text = line.partition("*")
        coeff = algebra.q.scalar(parse_number(coeff_text.strip()))
        factors = []
        pos = 0
        word_text = word_text.strip()
        while pos < len(word_text):
            m = _GEN_RE.match(word_text, pos)
            if not m:
                raise ValueError(f"bad generator near {word_text[pos:]!r}")
            factors.append(Generator(m.group(1) == "bd", parse_mode(m.group(2))))
            pos = m.end()
            while pos < len(word_text) and word_text[pos] == " ":
                pos += 1
        key = tuple(factors)
        raw[key] = raw.get(key, 0) + coeff
    return OperatorPolynomial.from_terms(algebra, raw)
