"""Transition number operators N_ab.

Two constructions are provided:

* the *direct* operator, fixed by ``[N_ab, bd_m] = delta_bm bd_a`` and
  ``N_ab |0> = 0``: on a word it replaces each occurrence of b by a, one
  position at a time, independently of q;
* the *series* ``bd_a b_b + sum_n sum_i sum_pi c_pi (Y_{a,pi(i)})^dag Y_{b,i}``
  built from nested q-commutators of annihilators, whose coefficients are
  solved order by order so that the series reproduces the direct operator.

The module also checks the commutator identities satisfied by N and Y.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import OperatorPolynomial, QuonAlgebra
from .fock import FockSpace, FockVector, OperatorMatrix, operator_matrix
from .linalg import IllPosedError, solve_exact, solve_float, to_float
from .report import Accumulator, CheckResult
from .scalars import ConfigurationError, DeformationParameter, EndpointError, format_scalar


class SeriesStateError(RuntimeError):
    """Series requested beyond the solved order."""


def direct_N(space: FockSpace, alpha: int, beta: int, n: int) -> OperatorMatrix:
    return space.substitution(alpha, beta, n)


def apply_direct_N(space: FockSpace, alpha: int, beta: int, v: FockVector) -> FockVector:
    return direct_N(space, alpha, beta, v.sector.n).apply(v)


# ---------------------------------------------------------------------------
# Y operators


@dataclass(frozen=True)
class YOperator:
    head: int
    tail: tuple[int, ...]
    expansion: OperatorPolynomial

    @property
    def order(self) -> int:
        return len(self.tail)

    def dagger(self) -> OperatorPolynomial:
        return self.expansion.adjoint()


def build_Y(algebra: QuonAlgebra, k: int, tail) -> YOperator:
    """Nested q-commutator ``Y_{k i1..in}``.

    ``Y_{ki} = b_k b_i - q b_i b_k`` and
    ``Y_{k i1..i(n+1)} = Y_{k i1..in} b_(i(n+1)) - q**(n+1) b_(i(n+1)) Y_{k i1..in}``.
    """
    tail = tuple(tail)
    if not tail:
        raise ValueError("Y needs a tail of length >= 1")
    q = algebra.q
    y = algebra.b(k) * algebra.b(tail[0]) - algebra.b(tail[0]) * algebra.b(k) * q.value
    for r, i in enumerate(tail[1:], start=1):
        bi = algebra.b(i)
        y = y * bi - (bi * y) * q.power(r + 1)
    return YOperator(k, tail, y)


def _y_poly(space: FockSpace, head: int, tail: tuple, dagger: bool) -> OperatorPolynomial:
    def build():
        y = build_Y(space.algebra, head, tail)
        return y.dagger() if dagger else y.expansion

    return space._memo(("Ypoly", head, tail, dagger), build)


def y_matrix(space: FockSpace, head: int, tail, n: int, dagger: bool = False) -> OperatorMatrix:
    """Block of ``Y`` (from sector n down) or ``Y^dag`` (from sector n up)."""
    tail = tuple(tail)
    return space._memo(
        ("Y", head, tail, n, dagger),
        lambda: operator_matrix(space, _y_poly(space, head, tail, dagger), n,
                                shift=(len(tail) + 1) * (1 if dagger else -1)),
    )


def permute(perm, tail) -> tuple:
    """``pi(i)`` with ``pi(i)_k = i_(pi(k))``."""
    return tuple(tail[p] for p in perm)


def one_line(perm) -> str:
    """One-line notation, 1-based: (1, 0) -> ``"21"``."""
    sep = "" if len(perm) < 10 else ","
    return sep.join(str(p + 1) for p in perm)


def pair_sum(space: FockSpace, left_head: int, right_head: int, order: int, perm, n: int) -> OperatorMatrix:
    """``sum_i (Y_{left,pi(i)})^dag Y_{right,i}`` on sector n, i over all order-tuples of modes."""

    def build():
        low = n - order - 1
        if low < 0:
            return space.zero_map(n, n)
        total = space.zero_map(n, n)
        for tail in itertools.product(space.modes, repeat=order):
            up = y_matrix(space, left_head, permute(perm, tail), low, dagger=True)
            down = y_matrix(space, right_head, tail, n)
            total = total + up @ down
        return total

    return space._memo(("pair", left_head, right_head, order, tuple(perm), n), build)


# ---------------------------------------------------------------------------
# series coefficients


@dataclass(frozen=True)
class SeriesCoefficient:
    order: int
    permutation: tuple[int, ...]
    value: object

    @property
    def key(self) -> str:
        return one_line(self.permutation)


class SeriesCoefficients:
    """Solved coefficients ``c[order][perm]`` at one q."""

    def __init__(self, q: DeformationParameter, table: dict, notes: dict | None = None):
        self.q = q
        self.table = table
        self.notes = notes or {}

    @property
    def max_order(self) -> int:
        return max(self.table, default=0)

    def coefficient(self, order: int, perm) -> object:
        return self.table[order][tuple(perm)]

    def entries(self) -> list[SeriesCoefficient]:
        return [
            SeriesCoefficient(n, perm, value)
            for n in sorted(self.table)
            for perm, value in self.table[n].items()
        ]

    def to_json(self) -> str:
        doc = {
            "q": str(self.q),
            "backend": self.q.backend,
            "max_order": self.max_order,
            "coefficients": {
                str(n): {one_line(p): format_scalar(v) for p, v in self.table[n].items()}
                for n in sorted(self.table)
            },
        }
        if self.notes:
            doc["notes"] = self.notes
        return json.dumps(doc, indent=2) + "\n"


def order_term(space, alpha, beta, order, coeffs: SeriesCoefficients, n) -> OperatorMatrix:
    total = space.zero_map(n, n)
    for perm, c in coeffs.table[order].items():
        total = total + pair_sum(space, alpha, beta, order, perm, n) * c
    return total


def _leading(space: FockSpace, alpha: int, beta: int, n: int) -> OperatorMatrix:
    alg = space.algebra
    return space._memo(("lead", alpha, beta, n), lambda: operator_matrix(space, alg.bd(alpha) * alg.b(beta), n))


def series_N(space: FockSpace, alpha: int, beta: int, K: int, n: int, coeffs: SeriesCoefficients) -> OperatorMatrix:
    """Series for ``N_ab`` truncated after order K, on sector n."""
    if K > coeffs.max_order:
        raise SeriesStateError(f"coefficients solved through order {coeffs.max_order}, need {K}")
    if coeffs.q != space.q:
        raise ConfigurationError("coefficients were solved at a different q")
    total = _leading(space, alpha, beta, n)
    for order in range(1, min(K, n - 1) + 1):
        total = total + order_term(space, alpha, beta, order, coeffs, n)
    return total


@lru_cache(maxsize=64)
def _solve_cached(order: int, q: DeformationParameter) -> SeriesCoefficients:
    table: dict = {}
    notes = {}
    for n in range(1, order + 1):
        # S_n acts faithfully on words over >= n letters, so d = max(2, n) determines every c_pi
        d = max(2, n)
        space = FockSpace(d - 1, q, n + 1)
        perms = list(itertools.permutations(range(n)))
        partial = SeriesCoefficients(q, dict(table))
        a, b = space.modes[0], space.modes[1]
        columns = [[] for _ in perms]
        rhs = []
        for alpha, beta in ((a, a), (a, b), (b, a)):
            target = direct_N(space, alpha, beta, n + 1) - series_N(space, alpha, beta, n - 1, n + 1, partial)
            rhs.extend(target.data.reshape(-1).tolist())
            for col, perm in zip(columns, perms):
                col.extend(pair_sum(space, alpha, beta, n, perm, n + 1).data.reshape(-1).tolist())
        matrix = np.array(columns, dtype=object).T
        try:
            if q.exact:
                values = solve_exact(matrix, rhs)
            else:
                values = [float(x) for x in solve_float(to_float(matrix), np.array(rhs, dtype=float))]
        except IllPosedError as exc:
            raise IllPosedError(f"order {n}: {exc}") from None
        table[n] = dict(zip(perms, values))
        notes[str(n)] = f"{len(perms)} unknowns (identity permutation included), {len(rhs)} equations, alphabet {d}"
    return SeriesCoefficients(q, table, notes)


def solve_series_coefficients(order: int, q) -> SeriesCoefficients:
    """Solve orders 1..order so the series matches the direct operator on sectors <= order+1.

    One unknown per permutation per order.  Raises :class:`EndpointError` at
    |q| = 1 and :class:`IllPosedError` if some order has no unique solution.
    """
    q = DeformationParameter.coerce(q)
    if q.is_endpoint:
        raise EndpointError(f"series coefficients have poles at q = {q}")
    if order < 0:
        raise ValueError("order must be >= 0")
    return _solve_cached(order, q)


def series_residual(space, alpha, beta, K, n, coeffs) -> float:
    """Max-norm distance between the order-K series and direct N on sector n."""
    diff = series_N(space, alpha, beta, K, n, coeffs).data - direct_N(space, alpha, beta, n).data
    return float(np.max(np.abs(to_float(diff)))) if diff.size else 0.0


# ---------------------------------------------------------------------------
# identity checks


def _transition_relations(space, alpha, beta, mu, acc):
    kd = space.q.scalar(1)
    for n in range(space.n_max):
        bd_mu = space.creation(mu, n)
        lhs = direct_N(space, alpha, beta, n + 1) @ bd_mu - bd_mu @ direct_N(space, alpha, beta, n)
        rhs = space.creation(alpha, n) * kd if beta == mu else space.zero_map(n, n + 1)
        acc.compare(lhs, rhs, f"[N({alpha},{beta}), bd({mu})]")
    for n in range(1, space.n_max + 1):
        b_mu = space.annihilation(mu, n)
        lhs = direct_N(space, alpha, beta, n - 1) @ b_mu - b_mu @ direct_N(space, alpha, beta, n)
        rhs = -space.annihilation(beta, n) if alpha == mu else space.zero_map(n, n - 1)
        acc.compare(lhs, rhs, f"[N({alpha},{beta}), b({mu})]")


def verify_transition_relations(space: FockSpace, alpha: int, beta: int, mu: int) -> CheckResult:
    """``[N_ab, bd_m] = delta_bm bd_a`` and ``[N_ab, b_m] = -delta_am b_b`` on every sector."""
    acc = Accumulator("eq2", alpha=alpha, beta=beta, mu=mu, q=str(space.q))
    _transition_relations(space, alpha, beta, mu, acc)
    return acc.done()


def _y_dagger_commutator(space, alpha, beta, head, tail, acc):
    order = len(tail)
    for n in range(space.n_max - order):
        up = y_matrix(space, head, tail, n, dagger=True)
        lhs = direct_N(space, alpha, beta, up.target) @ up - up @ direct_N(space, alpha, beta, n)
        rhs = space.zero_map(n, up.target)
        for k, i in enumerate(tail):
            if i == beta:
                rhs = rhs + y_matrix(space, head, tail[:k] + (alpha,) + tail[k + 1 :], n, dagger=True)
        if head == beta:
            rhs = rhs + y_matrix(space, alpha, tail, n, dagger=True)
        acc.compare(lhs, rhs, f"[N({alpha},{beta}), Y({head};{tail})^dag]")


def _pair_commutator(space, alpha, beta, left, right, perm, acc):
    order = len(perm)
    for n in range(space.n_max + 1):
        s = pair_sum(space, left, right, order, perm, n)
        nab = direct_N(space, alpha, beta, n)
        lhs = nab @ s - s @ nab
        rhs = space.zero_map(n, n)
        if beta == left:
            rhs = rhs + pair_sum(space, alpha, right, order, perm, n)
        if alpha == right:
            rhs = rhs - pair_sum(space, left, beta, order, perm, n)
        acc.compare(lhs, rhs, f"[N({alpha},{beta}), sum_i Y({left};pi i)^dag Y({right};i)]")


def verify_Y_commutators(space: FockSpace, alpha: int, beta: int, head: int, tail,
                         other_head: int | None = None, perm=None) -> list[CheckResult]:
    """Commutators of N_ab with ``Y^dag`` and with ``Y^dag Y`` pairs.

    The first record checks ``[N_ab, (Y_{head,tail})^dag]`` against the sum of
    Y^dag with one index replaced by a.  The second checks
    ``[N_ab, sum_i (Y_{head,pi(i)})^dag Y_{other,i}]``, summed over all index
    tuples i of the tail's length; for a single tuple the identity does not
    hold, only the sum closes.
    """
    tail = tuple(tail)
    other_head = head if other_head is None else other_head
    perm = tuple(range(len(tail))) if perm is None else tuple(perm)
    acc6 = Accumulator("eq6", alpha=alpha, beta=beta, head=head, tail=list(tail), q=str(space.q))
    _y_dagger_commutator(space, alpha, beta, head, tail, acc6)
    acc7 = Accumulator("eq7", alpha=alpha, beta=beta, left=head, right=other_head,
                       perm=one_line(perm), q=str(space.q))
    _pair_commutator(space, alpha, beta, head, other_head, perm, acc7)
    return [acc6.done(), acc7.done()]


def _unitary_closure(space, a, b, a2, b2, acc):
    one = space.q.scalar(1)
    for n in range(space.n_max + 1):
        x, y = direct_N(space, a, b, n), direct_N(space, a2, b2, n)
        lhs = x @ y - y @ x
        rhs = space.zero_map(n, n)
        if b == a2:
            rhs = rhs + direct_N(space, a, b2, n) * one
        if a == b2:
            rhs = rhs - direct_N(space, a2, b, n)
        acc.compare(lhs, rhs, f"[N({a},{b}), N({a2},{b2})]")


def verify_su2jp1_closure(space: FockSpace, alpha: int, beta: int, alpha2: int, beta2: int) -> CheckResult:
    """``[N_ab, N_cd] = delta_bc N_ad - delta_ad N_cb`` on every sector."""
    acc = Accumulator("eq8", alpha=alpha, beta=beta, alpha2=alpha2, beta2=beta2, q=str(space.q))
    _unitary_closure(space, alpha, beta, alpha2, beta2, acc)
    return acc.done()


# sweeps used by the suites: one record per identity family


def check_transition_relations(space: FockSpace) -> CheckResult:
    acc = Accumulator("eq2", q=str(space.q), twice_j=space.twice_j, n_max=space.n_max)
    for a, b, m in itertools.product(space.modes, repeat=3):
        _transition_relations(space, a, b, m, acc)
    return acc.done()


def check_y_dagger_commutators(space: FockSpace, max_tail: int = 2) -> CheckResult:
    acc = Accumulator("eq6", q=str(space.q), twice_j=space.twice_j, n_max=space.n_max, max_tail=max_tail)
    for order in range(1, max_tail + 1):
        for a, b, head in itertools.product(space.modes, repeat=3):
            for tail in itertools.product(space.modes, repeat=order):
                _y_dagger_commutator(space, a, b, head, tail, acc)
    return acc.done()


def check_pair_commutators(space: FockSpace, max_tail: int = 2) -> CheckResult:
    acc = Accumulator("eq7", q=str(space.q), twice_j=space.twice_j, n_max=space.n_max, max_tail=max_tail)
    for order in range(1, max_tail + 1):
        for perm in itertools.permutations(range(order)):
            for a, b, left, right in itertools.product(space.modes, repeat=4):
                _pair_commutator(space, a, b, left, right, perm, acc)
    return acc.done()


def check_su2jp1_closure(space: FockSpace) -> CheckResult:
    acc = Accumulator("eq8", q=str(space.q), twice_j=space.twice_j, n_max=space.n_max)
    for a, b, a2, b2 in itertools.product(space.modes, repeat=4):
        _unitary_closure(space, a, b, a2, b2, acc)
    return acc.done()


def check_series(space: FockSpace, K: int) -> list[CheckResult]:
    """Order-1 coefficient against 1/(1-q^2) and sector-exactness of every truncation K' <= K."""
    q = space.q
    coeffs = solve_series_coefficients(K, q)
    out = []
    if K >= 1:
        expected = 1 / (1 - q.value**2)
        got = coeffs.coefficient(1, (0,))
        diff = abs(float(got - expected)) if not q.exact else (0.0 if got == expected else abs(float(got - expected)))
        ok = (got == expected) if q.exact else diff <= 1e-10 * max(1.0, abs(expected))
        out.append(CheckResult("series.order1", {"q": str(q)}, residual=diff,
                               status="pass" if ok else "fail",
                               detail=f"c1 = {format_scalar(got)}, 1/(1-q^2) = {format_scalar(expected)}"))
    for k in range(K + 1):
        acc = Accumulator("series.exactness", q=str(q), K=k, twice_j=space.twice_j)
        for a, b in itertools.product(space.modes, repeat=2):
            for n in range(min(k + 1, space.n_max) + 1):
                acc.compare(series_N(space, a, b, k, n, coeffs), direct_N(space, a, b, n), f"N({a},{b})")
        out.append(acc.done())
    return out


__all__ = [
    "SeriesCoefficient",
    "SeriesCoefficients",
    "SeriesStateError",
    "YOperator",
    "apply_direct_N",
    "build_Y",
    "check_transition_relations",
    "check_y_dagger_commutators",
    "check_pair_commutators",
    "check_su2jp1_closure",
    "check_series",
    "direct_N",
    "pair_sum",
    "series_N",
    "series_residual",
    "solve_series_coefficients",
    "verify_Y_commutators",
    "verify_su2jp1_closure",
    "verify_transition_relations",
    "y_matrix",
]
