"""Mini-language for ad-hoc operator identities.

Grammar::

    expr   := poly "==" poly
    poly   := ["-"] term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := scalar | "q" | atom | "comm[" poly "," poly "]"
            | "qmut[" poly "," poly "]" | "(" poly ")"
    atom   := "bd(" mode ")" | "b(" mode ")" | "N(" mode "," mode ")"
            | "J0" | "Jp" | "Jm"
    mode   := signed integer or half-integer "p/2"
    scalar := integer, decimal or "p/r"

Both sides are realised as per-sector matrices and compared sector by sector.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from fractions import Fraction

from .algebra import format_mode, parse_mode
from .fock import FockSpace, OperatorMatrix, TruncationError
from .linalg import residual
from .report import ERROR, FAIL, PASS, CheckResult
from .scalars import ConfigurationError, format_scalar
from .su2 import build_generators
from .number_ops import direct_N


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.line, self.column, self.pos = line, col, pos


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Scalar:
    value: Fraction


@dataclass(frozen=True)
class QSymbol:
    pass


@dataclass(frozen=True)
class Creation:
    mode: int


@dataclass(frozen=True)
class Annihilation:
    mode: int


@dataclass(frozen=True)
class Transition:
    alpha: int
    beta: int


@dataclass(frozen=True)
class SU2:
    name: str  # J0, Jp, Jm


@dataclass(frozen=True)
class Comm:
    left: object
    right: object


@dataclass(frozen=True)
class QMut:
    left: object
    right: object


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Sum:
    terms: tuple  # ((sign, node), ...)


@dataclass(frozen=True)
class Relation:
    lhs: object
    rhs: object


# ---------------------------------------------------------------------------
# lexer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:/\d+)?)
  | (?P<name>comm\[|qmut\[|bd|b|N|J0|Jp|Jm|q)
  | (?P<op>==|[-+*(),\]])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, twice_j: int | None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.twice_j = twice_j

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None, kind=None):
        tok = self.tokens[self.i]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = repr(value) if value is not None else kind
            got = repr(tok[1]) if tok[0] != "end" else "end of input"
            raise ExpressionSyntaxError(f"expected {want}, got {got}", self.text, tok[2])
        self.i += 1
        return tok

    def relation(self):
        lhs = self.poly()
        self.take("==")
        rhs = self.poly()
        self.take(kind="end")
        return Relation(lhs, rhs)

    def poly(self):
        terms = []
        sign = 1
        if self.peek()[1] == "-":
            self.take("-")
            sign = -1
        terms.append((sign, self.term()))
        while self.peek()[1] in ("+", "-"):
            sign = 1 if self.take()[1] == "+" else -1
            terms.append((sign, self.term()))
        if len(terms) == 1 and terms[0][0] == 1:
            return terms[0][1]
        return Sum(tuple(terms))

    def term(self):
        factors = [self.factor()]
        while self.peek()[1] == "*":
            self.take("*")
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self):
        kind, value, pos = self.peek()
        if kind == "number":
            self.take()
            return Scalar(Fraction(value))
        if value == "(":
            self.take("(")
            node = self.poly()
            self.take(")")
            return node
        if value in ("comm[", "qmut["):
            self.take()
            left = self.poly()
            self.take(",")
            right = self.poly()
            self.take("]")
            return Comm(left, right) if value == "comm[" else QMut(left, right)
        if value == "q":
            self.take()
            return QSymbol()
        if value in ("J0", "Jp", "Jm"):
            self.take()
            return SU2(value)
        if value in ("bd", "b"):
            self.take()
            self.take("(")
            m = self.mode()
            self.take(")")
            return Creation(m) if value == "bd" else Annihilation(m)
        if value == "N":
            self.take()
            self.take("(")
            a = self.mode()
            self.take(",")
            b = self.mode()
            self.take(")")
            return Transition(a, b)
        got = repr(value) if kind != "end" else "end of input"
        raise ExpressionSyntaxError(f"unexpected {got}", self.text, pos)

    def mode(self):
        sign = ""
        start = self.peek()[2]
        if self.peek()[1] == "-":
            self.take("-")
            sign = "-"
        elif self.peek()[1] == "+":
            self.take("+")
        _, value, pos = self.take(kind="number")
        try:
            m = parse_mode(sign + value)
        except ValueError as exc:
            raise ExpressionSyntaxError(str(exc), self.text, pos) from None
        if self.twice_j is not None and (abs(m) > self.twice_j or (m - self.twice_j) % 2):
            raise ExpressionSyntaxError(
                f"mode {format_mode(m)} outside -{format_mode(self.twice_j)}..{format_mode(self.twice_j)}",
                self.text,
                start,
            )
        return m


def parse_expression(text: str, twice_j: int | None = None) -> Relation:
    """Parse ``lhs == rhs``; with ``twice_j`` given, modes are range-checked."""
    return _Parser(text, twice_j).relation()


def parse_operator(text: str, twice_j: int | None = None):
    p = _Parser(text, twice_j)
    node = p.poly()
    p.take(kind="end")
    return node


# ---------------------------------------------------------------------------
# printer


def to_text(node) -> str:
    if isinstance(node, Relation):
        return f"{to_text(node.lhs)} == {to_text(node.rhs)}"
    if isinstance(node, Scalar):
        return format_scalar(node.value)
    if isinstance(node, QSymbol):
        return "q"
    if isinstance(node, Creation):
        return f"bd({format_mode(node.mode)})"
    if isinstance(node, Annihilation):
        return f"b({format_mode(node.mode)})"
    if isinstance(node, Transition):
        return f"N({format_mode(node.alpha)},{format_mode(node.beta)})"
    if isinstance(node, SU2):
        return node.name
    if isinstance(node, Comm):
        return f"comm[{to_text(node.left)}, {to_text(node.right)}]"
    if isinstance(node, QMut):
        return f"qmut[{to_text(node.left)}, {to_text(node.right)}]"
    if isinstance(node, Product):
        return "*".join(f"({to_text(f)})" if isinstance(f, (Sum, Product)) else to_text(f) for f in node.factors)
    if isinstance(node, Sum):
        out = []
        for k, (sign, t) in enumerate(node.terms):
            body = f"({to_text(t)})" if isinstance(t, Sum) else to_text(t)
            if k == 0:
                out.append(("-" if sign < 0 else "") + body)
            else:
                out.append(("- " if sign < 0 else "+ ") + body)
        return " ".join(out)
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# evaluation


class _Evaluator:
    """Evaluates a node on a source sector as ``{target sector: block}``."""

    def __init__(self, space: FockSpace):
        self.space = space
        self.gens = build_generators(space)
        self.memo: dict = {}

    def blocks(self, node, n: int) -> dict:
        key = (node, n)
        if key not in self.memo:
            self.memo[key] = self._eval(node, n)
        return self.memo[key]

    def _scaled_identity(self, c, n):
        return {n: self.space.identity(n) * c}

    def _eval(self, node, n):
        s = self.space
        if isinstance(node, Scalar):
            return self._scaled_identity(s.q.scalar(node.value), n)
        if isinstance(node, QSymbol):
            return self._scaled_identity(s.q.value, n)
        if isinstance(node, Creation):
            return {n + 1: s.creation(node.mode, n)}
        if isinstance(node, Annihilation):
            return {n - 1: s.annihilation(node.mode, n)} if n > 0 else {}
        if isinstance(node, Transition):
            return {n: direct_N(s, node.alpha, node.beta, n)}
        if isinstance(node, SU2):
            return {n: self.gens.get(node.name, n)}
        if isinstance(node, Product):
            current = self.blocks(node.factors[-1], n)
            for f in reversed(node.factors[:-1]):
                current = self._compose(f, current)
            return current
        if isinstance(node, Sum):
            out: dict = {}
            for sign, t in node.terms:
                for target, block in self.blocks(t, n).items():
                    block = block if sign > 0 else -block
                    out[target] = out[target] + block if target in out else block
            return out
        if isinstance(node, (Comm, QMut)):
            ab = self._compose(node.left, self.blocks(node.right, n))
            ba = self._compose(node.right, self.blocks(node.left, n))
            c = s.q.value if isinstance(node, QMut) else s.q.scalar(1)
            out = dict(ab)
            for target, block in ba.items():
                block = block * c
                out[target] = out[target] - block if target in out else -block
            return out
        raise TypeError(f"cannot evaluate {node!r}")

    def _compose(self, node, inner: dict) -> dict:
        out: dict = {}
        for mid, block in inner.items():
            for target, outer in self.blocks(node, mid).items():
                prod = outer @ block
                out[target] = out[target] + prod if target in out else prod
        return out


def evaluate_identity(expr, space: FockSpace, text: str | None = None) -> CheckResult:
    """Compare both sides on every source sector that stays within n_max.

    Sectors where either side would need a sector above n_max are skipped;
    if no sector can be checked the record carries a truncation error.
    """
    if isinstance(expr, str):
        text = expr
        expr = parse_expression(expr, space.twice_j)
    t0 = time.perf_counter()
    result = CheckResult("identity", {"expr": text or to_text(expr), "q": str(space.q)}, count=0)
    ev = _Evaluator(space)
    checked = []
    try:
        for n in range(space.n_max + 1):
            try:
                lhs = ev.blocks(expr.lhs, n)
                rhs = ev.blocks(expr.rhs, n)
            except TruncationError:
                continue
            checked.append(n)
            for target in sorted(set(lhs) | set(rhs)):
                zero = space.zero_map(n, target) if target >= 0 else None
                a = lhs.get(target, zero)
                b = rhs.get(target, zero)
                if a is None or b is None:
                    continue
                value, ok = residual(a.data, b.data)
                result.count += 1
                result.residual = max(result.residual, value)
                if not ok and result.status == PASS:
                    result.status = FAIL
                    result.detail = f"sector {n}->{target}: residual {value:.3e}"
    except ConfigurationError as exc:
        result.status, result.detail = ERROR, str(exc)
    if not checked and result.status == PASS:
        result.status = ERROR
        result.detail = f"truncation overflow: no sector <= n_max={space.n_max} can hold both sides"
    else:
        result.params["sectors"] = checked
    result.elapsed = time.perf_counter() - t0
    return result


def evaluate_operator(node, space: FockSpace, n: int) -> dict[int, OperatorMatrix]:
    return _Evaluator(space).blocks(node, n)
