"""Coefficient fields.

Two backends are supported.  The *exact* backend uses :class:`fractions.Fraction`
(and :class:`Surd` once square roots appear, as in the su(2) ladder weights);
the *float* backend uses IEEE doubles.  The deformation parameter fixes the
backend for everything built from it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

FLOAT_TOLERANCE = 1e-10


class ConfigurationError(ValueError):
    """Inconsistent inputs: mixed backends, modes outside the level, bad ranges."""


class EndpointError(ValueError):
    """Operation undefined at q = +1 or q = -1."""


_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_number(text: str):
    """Parse ``"p/q"`` or an integer as an exact Fraction, anything else as float."""
    match = _RATIONAL_RE.match(text)
    if match:
        num, den = match.groups()
        return Fraction(int(num), int(den) if den else 1)
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"not a number: {text!r}") from None


def format_scalar(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Surd):
        return str(x)
    return repr(float(x))


@dataclass(frozen=True)
class DeformationParameter:
    """The deformation q, tagged with the coefficient backend it selects."""

    value: Fraction | float
    exact: bool

    def __post_init__(self):
        if self.exact and not isinstance(self.value, Fraction):
            raise ConfigurationError("exact backend needs a rational q")
        if not self.exact and not math.isfinite(self.value):
            raise ConfigurationError(f"q must be finite, got {self.value}")
        if abs(self.value) > 1:
            raise ConfigurationError(f"|q| must be <= 1, got {format_scalar(self.value)}")

    @classmethod
    def coerce(cls, q) -> "DeformationParameter":
        if isinstance(q, cls):
            return q
        if isinstance(q, str):
            q = parse_number(q)
        if isinstance(q, bool):
            raise ConfigurationError("q must be a number")
        if isinstance(q, (Fraction, int, np.integer)) or isinstance(q, Rational):
            return cls(Fraction(q), True)
        return cls(float(q), False)

    @property
    def backend(self) -> str:
        return "exact" if self.exact else "float"

    @property
    def is_endpoint(self) -> bool:
        return abs(self.value) == 1

    @property
    def dtype(self):
        return object if self.exact else np.float64

    def scalar(self, x):
        """Convert ``x`` into this backend's scalar type."""
        if self.exact:
            if isinstance(x, Surd):
                return x.simplify()
            if isinstance(x, float):
                raise ConfigurationError("float scalar in the exact backend")
            return Fraction(x)
        return float(x)

    def sqrt(self, x):
        """Square root of a non-negative rational, exact as a Surd when possible."""
        if self.exact:
            return Surd.sqrt(Fraction(x)).simplify()
        return math.sqrt(x)

    def power(self, k: int):
        return self.value**k

    def zeros(self, shape):
        if self.exact:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape)

    def eye(self, n: int):
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = Fraction(1) if self.exact else 1.0
        return out

    def cast(self, array) -> np.ndarray:
        """Integer array -> backend array."""
        array = np.asarray(array)
        if self.exact:
            out = np.empty(array.shape, dtype=object)
            flat = out.reshape(-1)
            for i, v in enumerate(array.reshape(-1).tolist()):
                flat[i] = Fraction(v)
            return out
        return array.astype(np.float64)

    def __str__(self):
        return format_scalar(self.value)


# ---------------------------------------------------------------------------
# exact square roots


@lru_cache(maxsize=None)
def squarefree_split(n: int) -> tuple[int, int]:
    """Return (s, f) with n = s*s*f and f squarefree (n >= 1)."""
    if n < 1:
        raise ValueError("squarefree_split needs a positive integer")
    s, f = 1, 1
    p = 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            s *= p
        if n % p == 0:
            n //= p
            f *= p
        p += 1
    return s, f * n


class Surd:
    """Exact number sum_d r_d * sqrt(d) with rationals r_d and distinct squarefree d.

    Square roots of distinct squarefree integers are linearly independent over
    the rationals, so equality with zero is decided exactly.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {d: Fraction(r) for d, r in (terms or {}).items() if r != 0}

    @classmethod
    def sqrt(cls, x) -> "Surd":
        x = Fraction(x)
        if x < 0:
            raise ValueError("square root of a negative rational")
        if x == 0:
            return cls()
        # sqrt(p/q) = sqrt(p*q)/q
        s, f = squarefree_split(x.numerator * x.denominator)
        return cls({f: Fraction(s, x.denominator)})

    @classmethod
    def _lift(cls, other):
        if isinstance(other, Surd):
            return other
        if isinstance(other, (int, Fraction, np.integer)):
            return cls({1: Fraction(other)})
        return None

    def simplify(self):
        """Collapse to a Fraction when the value is rational."""
        if not self.terms:
            return Fraction(0)
        if set(self.terms) == {1}:
            return self.terms[1]
        return self

    def is_rational(self) -> bool:
        return set(self.terms) <= {1}

    def sign_radicand(self) -> tuple[int, Fraction]:
        """(sign, r) with self == sign*sqrt(r); only for single-radical values."""
        if not self.terms:
            return 0, Fraction(0)
        if len(self.terms) != 1:
            raise ValueError("value is not of the form sign*sqrt(rational)")
        (d, r), = self.terms.items()
        return (1 if r > 0 else -1), r * r * d

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for d, r in other.terms.items():
            out[d] = out.get(d, 0) + r
        return Surd(out)

    __radd__ = __add__

    def __neg__(self):
        return Surd({d: -r for d, r in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for d1, r1 in self.terms.items():
            for d2, r2 in other.terms.items():
                g = math.gcd(d1, d2)
                # sqrt(d1*d2) = g*sqrt(d1*d2/g^2), and d1*d2/g^2 is squarefree
                d = (d1 // g) * (d2 // g)
                out[d] = out.get(d, 0) + r1 * r2 * g
        return Surd(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, np.integer)):
            return Surd({d: r / Fraction(other) for d, r in self.terms.items()})
        return NotImplemented

    def __eq__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        simple = self.simplify()
        if isinstance(simple, Fraction):
            return hash(simple)
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __float__(self):
        return float(sum(float(r) * math.sqrt(d) for d, r in self.terms.items()))

    def __abs__(self):
        return abs(float(self))

    def __lt__(self, other):
        return float(self) < float(other)

    def __repr__(self):
        return f"Surd({str(self)})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for d in sorted(self.terms):
            r = self.terms[d]
            if d == 1:
                parts.append(format_scalar(r))
            elif r == 1:
                parts.append(f"sqrt({d})")
            else:
                parts.append(f"{format_scalar(r)}*sqrt({d})")
        return " + ".join(parts)
