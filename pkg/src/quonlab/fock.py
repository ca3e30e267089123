"""Truncated Fock space of one quon level in the word basis.

Sector n is spanned by the (2j+1)**n words ``(m1, ..., mn)`` standing for
``bd(m1) ... bd(mn) |0>``, enumerated lexicographically in ``twice_m``.  For
|q| < 1 the words are linearly independent (the Gram matrix is positive
definite) but not orthogonal, so operators are represented by their exact
action on word coefficients rather than by matrix elements.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .algebra import OperatorPolynomial, QuonAlgebra, format_mode
from .linalg import leading_pivots_exact, matmul, rank_exact, to_float
from .scalars import ConfigurationError, DeformationParameter, format_scalar

RANK_THRESHOLD = 1e-10


class TruncationError(ValueError):
    """An operator would leave the represented sectors 0..n_max."""


@dataclass(frozen=True)
class Sector:
    twice_j: int
    n: int

    @property
    def d(self) -> int:
        return self.twice_j + 1

    @property
    def dim(self) -> int:
        return self.d**self.n if self.n >= 0 else 0

    def index_table(self) -> np.ndarray:
        """Words as mode indices 0..d-1, shape (dim, n)."""
        return _kernels.word_table(self.d, self.n)

    @property
    def words(self) -> list[tuple[int, ...]]:
        """Words as ``twice_m`` tuples, in basis order."""
        table = self.index_table()
        return [tuple(int(2 * i - self.twice_j) for i in row) for row in table]

    def index(self, word) -> int:
        if len(word) != self.n:
            raise ValueError(f"word {word} is not in sector {self.n}")
        idx = 0
        for m in word:
            i = (m + self.twice_j) // 2
            if not (0 <= i < self.d) or (m + self.twice_j) % 2:
                raise ConfigurationError(f"mode {format_mode(m)} outside the level")
            idx = idx * self.d + i
        return idx


@dataclass(frozen=True, eq=False)
class FockVector:
    sector: Sector
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.sector.dim,):
            raise ValueError("coefficient count does not match the sector")

    def __getitem__(self, word):
        return self.coeffs[self.sector.index(word)]

    def nonzero(self) -> dict:
        words = self.sector.words
        return {words[i]: self.coeffs[i] for i in np.nonzero(self.coeffs != 0)[0]}

    def __eq__(self, other):
        return (
            isinstance(other, FockVector)
            and self.sector == other.sector
            and bool(np.all(self.coeffs == other.coeffs))
        )


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Block of an operator from sector ``source`` to sector ``target``."""

    source: int
    target: int
    data: np.ndarray = field(repr=False)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if other.target != self.source:
            raise ValueError(f"cannot compose {self.source}->{self.target} after {other.source}->{other.target}")
        return OperatorMatrix(other.source, self.target, matmul(self.data, other.data))

    def _same_block(self, other):
        if (self.source, self.target) != (other.source, other.target):
            raise ValueError("operator blocks act between different sectors")

    def __add__(self, other):
        self._same_block(other)
        return OperatorMatrix(self.source, self.target, self.data + other.data)

    def __sub__(self, other):
        self._same_block(other)
        return OperatorMatrix(self.source, self.target, self.data - other.data)

    def __neg__(self):
        return OperatorMatrix(self.source, self.target, -self.data)

    def __mul__(self, c):
        return OperatorMatrix(self.source, self.target, self.data * c)

    __rmul__ = __mul__

    def apply(self, v: FockVector) -> FockVector:
        if v.sector.n != self.source:
            raise ValueError("vector is not in the source sector")
        out = matmul(self.data, v.coeffs.reshape(-1, 1)).reshape(-1)
        return FockVector(Sector(v.sector.twice_j, self.target), out)


@dataclass(frozen=True)
class PositivityReport:
    n: int
    dim: int
    q: str
    backend: str
    min_eigenvalue: float
    rank: int
    positive_definite: bool
    method: str

    @property
    def degenerate(self) -> bool:
        return self.rank < self.dim


class FockSpace:
    """Sectors 0..n_max of one level, with cached generator matrices."""

    def __init__(self, twice_j: int, q, n_max: int):
        if n_max < 0:
            raise ConfigurationError("n_max must be >= 0")
        self.algebra = QuonAlgebra(twice_j, q)
        self.twice_j = self.algebra.twice_j
        self.q: DeformationParameter = self.algebra.q
        self.n_max = int(n_max)
        self.d = self.twice_j + 1
        self._cache: dict = {}

    @classmethod
    def of(cls, algebra: QuonAlgebra, n_max: int) -> "FockSpace":
        return cls(algebra.twice_j, algebra.q, n_max)

    def __repr__(self):
        return f"FockSpace(twice_j={self.twice_j}, q={self.q}, n_max={self.n_max})"

    @property
    def modes(self) -> tuple[int, ...]:
        return self.algebra.modes

    def mode_index(self, twice_m: int) -> int:
        return (self.algebra.check_mode(twice_m) + self.twice_j) // 2

    def sector(self, n: int) -> Sector:
        return Sector(self.twice_j, n)

    def dim(self, n: int) -> int:
        return self.sector(n).dim

    def _check_sector(self, n: int):
        if n > self.n_max:
            raise TruncationError(f"sector {n} exceeds n_max={self.n_max}")
        if n < 0:
            raise ValueError(f"no sector {n}")

    def _memo(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    # vectors
    def vacuum(self) -> FockVector:
        return self.basis_vector(())

    def basis_vector(self, word) -> FockVector:
        sector = self.sector(len(word))
        self._check_sector(sector.n)
        coeffs = self.q.zeros(sector.dim)
        coeffs[sector.index(word)] = self.q.scalar(1)
        return FockVector(sector, coeffs)

    def vector(self, n: int, amplitudes: dict) -> FockVector:
        sector = self.sector(n)
        coeffs = self.q.zeros(sector.dim)
        for word, c in amplitudes.items():
            coeffs[sector.index(word)] += c
        return FockVector(sector, coeffs)

    # generator blocks
    def identity(self, n: int) -> OperatorMatrix:
        self._check_sector(n)
        return self._memo(("id", n), lambda: OperatorMatrix(n, n, self.q.eye(self.dim(n))))

    def zero_map(self, source: int, target: int) -> OperatorMatrix:
        return OperatorMatrix(source, target, self.q.zeros((max(self.dim(target), 0), self.dim(source))))

    def creation(self, twice_m: int, n: int) -> OperatorMatrix:
        """``bd_m`` from sector n to n+1: prepends m to every word."""
        self._check_sector(n)
        self._check_sector(n + 1)
        i = self.mode_index(twice_m)

        def build():
            dim = self.dim(n)
            data = self.q.zeros((self.dim(n + 1), dim))
            one = self.q.scalar(1)
            for c in range(dim):
                data[i * dim + c, c] = one
            return OperatorMatrix(n, n + 1, data)

        return self._memo(("bd", twice_m, n), build)

    def annihilation(self, twice_m: int, n: int) -> OperatorMatrix:
        """``b_m`` from sector n to n-1 (the empty sector -1 when n = 0)."""
        self._check_sector(n)
        i = self.mode_index(twice_m)

        def build():
            data = self.q.zeros((self.dim(n - 1), self.dim(n)))
            if n > 0:
                rows, cols, exps = _kernels.annihilation_entries(self.sector(n).index_table(), self.d, i)
                powers = [self.q.power(k) for k in range(n)]
                for r, c, k in zip(rows.tolist(), cols.tolist(), exps.tolist()):
                    data[r, c] += powers[k]
            return OperatorMatrix(n, n - 1, data)

        return self._memo(("b", twice_m, n), build)

    def substitution(self, alpha: int, beta: int, n: int) -> OperatorMatrix:
        """Sum over positions of the letter replacement beta -> alpha (q-independent)."""
        self._check_sector(n)
        ia, ib = self.mode_index(alpha), self.mode_index(beta)

        def build():
            rows, cols = _kernels.substitution_entries(self.sector(n).index_table(), self.d, ia, ib)
            counts = np.zeros((self.dim(n), self.dim(n)), dtype=np.int64)
            np.add.at(counts, (rows, cols), 1)
            return OperatorMatrix(n, n, self.q.cast(counts))

        return self._memo(("sub", alpha, beta, n), build)

    def gram(self, n: int) -> np.ndarray:
        self._check_sector(n)
        return self._memo(("gram", n), lambda: gram_from_histogram(self._histogram(n), self.q))

    def _histogram(self, n: int) -> np.ndarray:
        table = self.sector(n).index_table()
        return _kernels.inversion_histogram(table, table)

    def operator_matrix(self, p: OperatorPolynomial, n: int) -> OperatorMatrix:
        return operator_matrix(self, p, n)


def gram_from_histogram(hist: np.ndarray, q: DeformationParameter) -> np.ndarray:
    """Evaluate ``sum_k hist[..., k] q**k``."""
    powers = [q.power(k) for k in range(hist.shape[-1])]
    if q.exact:
        out = np.empty(hist.shape[:-1], dtype=object)
        flat_h = hist.reshape(-1, hist.shape[-1]).tolist()
        flat = out.reshape(-1)
        for i, row in enumerate(flat_h):
            flat[i] = sum((c * p for c, p in zip(row, powers) if c), Fraction(0))
        return out
    # fixed summation order: increasing power
    out = np.zeros(hist.shape[:-1])
    for k, p in enumerate(powers):
        out += hist[..., k] * p
    return out


# ---------------------------------------------------------------------------
# module-level operations


def apply_creation(space: FockSpace, twice_m: int, v: FockVector) -> FockVector:
    return space.creation(twice_m, v.sector.n).apply(v)


def apply_annihilation(space: FockSpace, twice_m: int, v: FockVector) -> FockVector:
    """``b_m (j1..jn) = sum_k q**(k-1) delta(m, jk) (j1..^jk..jn)``; zero on the vacuum."""
    if v.sector.n == 0:
        return FockVector(v.sector, space.q.zeros(1))
    return space.annihilation(twice_m, v.sector.n).apply(v)


def inner_product(w1, w2, q, twice_j: int | None = None):
    """``<w1|w2>`` = sum of q**inv(s) over bijections s with w1 = w2 o s."""
    q = DeformationParameter.coerce(q)
    if len(w1) != len(w2):
        return q.scalar(0)
    if twice_j is None:
        twice_j = max((abs(m) for m in (*w1, *w2)), default=0)
    sector = Sector(twice_j, len(w1))
    table = sector.index_table()
    left = table[[sector.index(w1)]]
    right = table[[sector.index(w2)]]
    return gram_from_histogram(_kernels.inversion_histogram(left, right), q)[0, 0]


def gram_matrix(space: FockSpace, n: int) -> np.ndarray:
    return space.gram(n)


def check_positivity(space: FockSpace, n: int) -> PositivityReport:
    """Positive-definiteness and rank of the sector-n Gram matrix.

    Exact backend: Sylvester pivots and exact elimination rank.  Float backend:
    smallest eigenvalue and a singular-value rank threshold of 1e-10 * max.
    """
    g = space.gram(n)
    gf = to_float(g)
    eig = np.linalg.eigvalsh(gf) if gf.size else np.zeros(0)
    min_eig = float(eig.min()) if eig.size else 0.0
    if space.q.exact:
        rank = rank_exact(g)
        pivots = leading_pivots_exact(g)
        pd = len(pivots) == g.shape[0] and all(p > 0 for p in pivots)
        method = "exact elimination"
    else:
        sv = np.linalg.svd(gf, compute_uv=False)
        rank = int(np.sum(sv > RANK_THRESHOLD * sv.max())) if sv.size else 0
        pd = bool(min_eig > 0 and rank == g.shape[0])
        method = "eigvalsh/svd"
    return PositivityReport(
        n=n,
        dim=g.shape[0],
        q=str(space.q),
        backend=space.q.backend,
        min_eigenvalue=min_eig,
        rank=rank,
        positive_definite=pd,
        method=method,
    )


def operator_matrix(space: FockSpace, p: OperatorPolynomial, n: int, shift: int | None = None) -> OperatorMatrix:
    """Matrix of ``p`` on sector n, composed term by term from generator blocks.

    ``shift`` fixes the target sector when ``p`` may vanish (a zero polynomial
    has no particle shift of its own).  Raises :class:`TruncationError` if
    any term passes through a sector above n_max.
    """
    if p.algebra != space.algebra:
        raise ConfigurationError("polynomial and Fock space use different algebras")
    own = p.particle_shift() if len(p) else shift
    if shift is not None and own != shift:
        raise ValueError(f"polynomial shifts particle number by {own}, not {shift}")
    shift = 0 if own is None and not len(p) else own
    if shift is None:
        raise ValueError("polynomial does not shift particle number uniformly")
    space._check_sector(n)
    target = n + shift
    if target < 0:
        return space.zero_map(n, target)
    space._check_sector(target)
    total = space.zero_map(n, target).data
    for factors, coeff in p.items():
        block = space.identity(n)
        for g in reversed(factors):
            if block.target < 0:
                break
            step = space.creation(g.twice_m, block.target) if g.creation else space.annihilation(g.twice_m, block.target)
            block = step @ block
        else:
            total = total + block.data * coeff
    return OperatorMatrix(n, target, total)


# ---------------------------------------------------------------------------
# dumps


def _header(space: FockSpace, n: int) -> dict:
    return {
        "j": format_mode(space.twice_j),
        "twice_j": space.twice_j,
        "n": n,
        "q": str(space.q),
        "backend": space.q.backend,
    }


def _word_label(word) -> str:
    return "(" + ",".join(format_mode(m) for m in word) + ")"


def matrix_to_json(space: FockSpace, n: int, matrix: np.ndarray, kind: str = "gram") -> str:
    doc = _header(space, n)
    doc["kind"] = kind
    doc["words"] = [_word_label(w) for w in space.sector(n).words]
    doc["matrix"] = [[format_scalar(x) for x in row] for row in matrix.tolist()]
    return json.dumps(doc, indent=2)


def matrix_to_csv(space: FockSpace, n: int, matrix: np.ndarray) -> str:
    buf = io.StringIO()
    head = _header(space, n)
    buf.write("# " + " ".join(f"{k}={v}" for k, v in head.items()) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    words = [_word_label(w) for w in space.sector(n).words]
    writer.writerow(["word", *words])
    for w, row in zip(words, matrix.tolist()):
        writer.writerow([w, *(format_scalar(x) for x in row)])
    return buf.getvalue()


def verify_defining_relation(space: FockSpace, alpha: int, beta: int, acc) -> None:
    """``M(b_a) M(bd_b) - q M(bd_b) M(b_a) = delta_ab * 1`` on sectors 0..n_max-1."""
    q = space.q.value
    for n in range(space.n_max):
        bd = space.creation(beta, n)
        lhs = space.annihilation(alpha, n + 1) @ bd
        if n > 0:
            lhs = lhs - (space.creation(beta, n - 1) @ space.annihilation(alpha, n)) * q
        rhs = space.identity(n) if alpha == beta else space.zero_map(n, n)
        acc.compare(lhs, rhs, f"qmut[b({format_mode(alpha)}), bd({format_mode(beta)})]")
