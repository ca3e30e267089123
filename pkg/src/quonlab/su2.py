"""su(2) generators built from transition number operators, and Clebsch-Gordan coupling.

``J0 = sum_v v N_vv`` and ``J+- = sum_v sqrt((j -+ v)(j +- v + 1)) N_(v+-1, v)``.
Because the direct N do not depend on q, neither do the generators; what
does depend on q is the Gram form, hence the norms of coupled states.

Angular momenta and projections are passed as twice their value.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fock import FockSpace, FockVector, OperatorMatrix
from .linalg import matmul, to_float
from .number_ops import direct_N
from .report import EXCLUDED, Accumulator, CheckResult
from .scalars import DeformationParameter, EndpointError, Surd, format_scalar


def ladder_weight_squared(twice_j: int, twice_m: int, raising: bool) -> Fraction:
    """``(j -+ m)(j +- m + 1)``."""
    if raising:
        return Fraction((twice_j - twice_m) * (twice_j + twice_m + 2), 4)
    return Fraction((twice_j + twice_m) * (twice_j - twice_m + 2), 4)


class Su2Generators:
    """Per-sector blocks of J0, J+ and J- for one Fock space (built lazily, then cached)."""

    def __init__(self, space: FockSpace):
        self.space = space

    def _weight(self, twice_m: int, raising: bool):
        return self.space.q.sqrt(ladder_weight_squared(self.space.twice_j, twice_m, raising))

    def J0(self, n: int) -> OperatorMatrix:
        s = self.space

        def build():
            total = s.zero_map(n, n)
            for m in s.modes:
                total = total + direct_N(s, m, m, n) * s.q.scalar(Fraction(m, 2))
            return total

        return s._memo(("J0", n), build)

    def Jplus(self, n: int) -> OperatorMatrix:
        return self._ladder(n, raising=True)

    def Jminus(self, n: int) -> OperatorMatrix:
        return self._ladder(n, raising=False)

    def _ladder(self, n: int, raising: bool) -> OperatorMatrix:
        s = self.space
        step = 2 if raising else -2

        def build():
            total = s.zero_map(n, n)
            for m in s.modes:
                if m + step not in s.modes:
                    continue
                total = total + direct_N(s, m + step, m, n) * self._weight(m, raising)
            return total

        return s._memo(("J+" if raising else "J-", n), build)

    def get(self, name: str, n: int) -> OperatorMatrix:
        return {"J0": self.J0, "Jp": self.Jplus, "Jm": self.Jminus}[name](n)

    def casimir(self, n: int) -> OperatorMatrix:
        """``J^2 = J0^2 + (J+ J- + J- J+)/2``."""
        s = self.space

        def build():
            j0, jp, jm = self.J0(n), self.Jplus(n), self.Jminus(n)
            return j0 @ j0 + (jp @ jm + jm @ jp) * s.q.scalar(Fraction(1, 2))

        return s._memo(("J2", n), build)


def build_generators(space: FockSpace) -> Su2Generators:
    return space._memo(("su2",), lambda: Su2Generators(space))


def casimir(space: FockSpace, n: int) -> OperatorMatrix:
    return build_generators(space).casimir(n)


def _closure(gens: Su2Generators, acc: Accumulator):
    s = gens.space
    two = s.q.scalar(2)
    for n in range(s.n_max + 1):
        j0, jp, jm = gens.J0(n), gens.Jplus(n), gens.Jminus(n)
        acc.compare(j0 @ jp - jp @ j0, jp, "[J0, J+]")
        acc.compare(j0 @ jm - jm @ j0, -jm, "[J0, J-]")
        acc.compare(jp @ jm - jm @ jp, j0 * two, "[J+, J-]")
        c = gens.casimir(n)
        for name, g in (("J0", j0), ("J+", jp), ("J-", jm)):
            acc.compare(c @ g - g @ c, s.zero_map(n, n), f"[J^2, {name}]")


def verify_su2_closure(space: FockSpace) -> CheckResult:
    """``[J0, J+-] = +-J+-``, ``[J+, J-] = 2 J0`` and J^2 central, on every sector."""
    acc = Accumulator("eq10", q=str(space.q), twice_j=space.twice_j, n_max=space.n_max)
    _closure(build_generators(space), acc)
    return acc.done()


def _tensor(gens: Su2Generators, mu: int, acc: Accumulator):
    s = gens.space
    for n in range(s.n_max):
        bd = s.creation(mu, n)
        for name, g_lo, g_hi in (
            ("J0", gens.J0(n), gens.J0(n + 1)),
            ("Jp", gens.Jplus(n), gens.Jplus(n + 1)),
            ("Jm", gens.Jminus(n), gens.Jminus(n + 1)),
        ):
            lhs = g_hi @ bd - bd @ g_lo
            if name == "J0":
                rhs = bd * s.q.scalar(Fraction(mu, 2))
            else:
                raising = name == "Jp"
                target = mu + (2 if raising else -2)
                if target in s.modes:
                    rhs = s.creation(target, n) * gens._weight(mu, raising)
                else:
                    rhs = s.zero_map(n, n + 1)
            acc.compare(lhs, rhs, f"[{name}, bd({mu}/2)]")


def verify_tensor_relations(space: FockSpace, mu: int) -> CheckResult:
    """``[J0, bd_mu] = mu bd_mu`` and ``[J+-, bd_mu] = sqrt((j -+ mu)(j +- mu + 1)) bd_(mu+-1)``."""
    acc = Accumulator("eq9", q=str(space.q), twice_j=space.twice_j, mu=mu)
    _tensor(build_generators(space), mu, acc)
    return acc.done()


def check_tensor_property(space: FockSpace) -> CheckResult:
    acc = Accumulator("eq9", q=str(space.q), twice_j=space.twice_j, n_max=space.n_max)
    gens = build_generators(space)
    for mu in space.modes:
        _tensor(gens, mu, acc)
    return acc.done()


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients


def _fact(twice_x: int) -> int:
    if twice_x % 2 or twice_x < 0:
        raise ValueError("factorial argument must be a non-negative integer")
    return math.factorial(twice_x // 2)


def clebsch_gordan(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> Surd:
    """``<j1 m1; j2 m2 | J M>`` by Racah's sum, Condon-Shortley phase, as an exact Surd.

    All arguments are twice the physical value.  Invalid combinations give 0.
    """
    if tM != tm1 + tm2:
        return Surd()
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tJ, tM)):
        if tj < 0 or abs(tm) > tj or (tj - tm) % 2:
            return Surd()
    if not abs(tj1 - tj2) <= tJ <= tj1 + tj2 or (tj1 + tj2 - tJ) % 2:
        return Surd()
    prefactor = Fraction(
        (tJ + 1) * _fact(tJ + tj1 - tj2) * _fact(tJ - tj1 + tj2) * _fact(tj1 + tj2 - tJ),
        _fact(tj1 + tj2 + tJ + 2),
    )
    prefactor *= (
        _fact(tJ + tM) * _fact(tJ - tM) * _fact(tj1 - tm1) * _fact(tj1 + tm1)
        * _fact(tj2 - tm2) * _fact(tj2 + tm2)
    )
    total = Fraction(0)
    for k in range(0, (tj1 + tj2 - tJ) // 2 + 1):
        args = (
            2 * k,
            tj1 + tj2 - tJ - 2 * k,
            tj1 - tm1 - 2 * k,
            tj2 + tm2 - 2 * k,
            tJ - tj2 + tm1 + 2 * k,
            tJ - tj1 - tm2 + 2 * k,
        )
        if min(args) < 0:
            continue
        denom = 1
        for a in args:
            denom *= _fact(a)
        total += Fraction((-1) ** k, denom)
    if total == 0:
        return Surd()
    sign = 1 if total > 0 else -1
    return Surd.sqrt(prefactor * total * total) * sign


def cg_value(q: DeformationParameter, *args):
    """Clebsch-Gordan coefficient in the backend of ``q``."""
    value = clebsch_gordan(*args)
    return value.simplify() if q.exact else float(value)


@dataclass
class CGTable:
    tj1: int
    tj2: int
    values: dict  # (tm1, tm2, tJ, tM) -> Surd, nonzero entries only

    def get(self, tm1, tm2, tJ, tM) -> Surd:
        return self.values.get((tm1, tm2, tJ, tM), Surd())

    def to_json(self) -> str:
        rows = []
        for (tm1, tm2, tJ, tM), v in sorted(self.values.items()):
            sign, radicand = v.sign_radicand()
            rows.append({
                "twice_j1": self.tj1, "twice_m1": tm1, "twice_j2": self.tj2, "twice_m2": tm2,
                "twice_J": tJ, "twice_M": tM,
                "sign": sign, "radicand": format_scalar(radicand),
            })
        return json.dumps({"coefficients": rows}, indent=2) + "\n"

    def orthonormality_defect(self) -> Fraction:
        """Largest |sum_m1m2 CG(JM) CG(J'M') - delta| over all (J,M), (J',M'); exact."""
        states = [(tJ, tM) for tJ in range(abs(self.tj1 - self.tj2), self.tj1 + self.tj2 + 1, 2)
                  for tM in range(-tJ, tJ + 1, 2)]
        worst = Fraction(0)
        for (a, am), (b, bm) in itertools.product(states, repeat=2):
            s = Surd()
            for tm1 in range(-self.tj1, self.tj1 + 1, 2):
                for tm2 in range(-self.tj2, self.tj2 + 1, 2):
                    s = s + self.get(tm1, tm2, a, am) * self.get(tm1, tm2, b, bm)
            s = s - (1 if (a, am) == (b, bm) else 0)
            simple = s.simplify()
            if simple != 0:
                worst = max(worst, Fraction(abs(float(simple))))
        return worst


def cg_table(tj1: int, tj2: int) -> CGTable:
    values = {}
    for tm1 in range(-tj1, tj1 + 1, 2):
        for tm2 in range(-tj2, tj2 + 1, 2):
            for tJ in range(abs(tj1 - tj2), tj1 + tj2 + 1, 2):
                v = clebsch_gordan(tj1, tm1, tj2, tm2, tJ, tm1 + tm2)
                if v:
                    values[(tm1, tm2, tJ, tm1 + tm2)] = v
    return CGTable(tj1, tj2, values)


# ---------------------------------------------------------------------------
# coupled quon pairs


@dataclass(frozen=True, eq=False)
class CoupledState:
    twice_J: int
    twice_M: int
    vector: FockVector
    norm_squared: object


def couple_pair(space: FockSpace, tJ: int, tM: int) -> CoupledState:
    """``sum_(m1+m2=M) CG(j m1, j m2 | J M) bd_m1 bd_m2 |0>`` in the two-quon sector."""
    if space.q.is_endpoint:
        raise EndpointError(f"Gram form is degenerate at q = {space.q}")
    if not 0 <= tJ <= 2 * space.twice_j or abs(tM) > tJ or (tJ - tM) % 2:
        raise ValueError(f"no coupled state J={tJ}/2, M={tM}/2 for twice_j={space.twice_j}")
    tj = space.twice_j
    amplitudes = {}
    for m1 in space.modes:
        m2 = tM - m1
        if m2 in space.modes:
            c = cg_value(space.q, tj, m1, tj, m2, tJ, tM)
            if c != 0:
                amplitudes[(m1, m2)] = c
    v = space.vector(2, amplitudes)
    g = space.gram(2)
    col = v.coeffs.reshape(-1, 1)
    norm2 = matmul(col.T, matmul(g, col))[0, 0]
    return CoupledState(tJ, tM, v, norm2)


def _as_block(v: FockVector) -> OperatorMatrix:
    return OperatorMatrix(0, v.sector.n, v.coeffs.reshape(-1, 1))


def check_coupled_state(space: FockSpace, state: CoupledState, acc: Accumulator):
    gens = build_generators(space)
    v = _as_block(state.vector)
    q = space.q
    acc.compare(gens.J0(2) @ v, v * q.scalar(Fraction(state.twice_M, 2)), f"J0 |{state.twice_J},{state.twice_M}>")
    jj = Fraction(state.twice_J * (state.twice_J + 2), 4)
    acc.compare(gens.casimir(2) @ v, v * q.scalar(jj), f"J^2 |{state.twice_J},{state.twice_M}>")
    if state.twice_M < state.twice_J:
        up = couple_pair(space, state.twice_J, state.twice_M + 2)
        w = q.sqrt(Fraction((state.twice_J - state.twice_M) * (state.twice_J + state.twice_M + 2), 4))
        acc.compare(gens.Jplus(2) @ v, _as_block(up.vector) * w, f"J+ |{state.twice_J},{state.twice_M}>")
    positive = float(state.norm_squared) > 0
    if not positive:
        acc.result.status = "fail"
        acc.result.detail = f"zero or negative norm for J={state.twice_J}/2 M={state.twice_M}/2"


def verify_coupling(space: FockSpace) -> list[CheckResult]:
    """Every coupled pair state is a J^2, J0 eigenvector with nonzero norm; CG rows orthonormal."""
    if space.q.is_endpoint:
        return [CheckResult("coupling", {"q": str(space.q), "twice_j": space.twice_j}, status=EXCLUDED,
                            detail="degenerate Gram form at |q| = 1")]
    acc = Accumulator("coupling", q=str(space.q), twice_j=space.twice_j)
    tj = space.twice_j
    states = []
    for tJ in range(0, 2 * tj + 1, 2):
        for tM in range(-tJ, tJ + 1, 2):
            state = couple_pair(space, tJ, tM)
            states.append(state)
            check_coupled_state(space, state, acc)
    # the coupled states span the two-quon sector
    basis = np.column_stack([to_float(s.vector.coeffs) for s in states])
    rank = int(np.linalg.matrix_rank(basis))
    if rank != space.dim(2) and acc.result.status == "pass":
        acc.result.status = "fail"
        acc.result.detail = f"coupled states span rank {rank} of {space.dim(2)}"
    out = [acc.done()]
    table = cg_table(tj, tj)
    defect = table.orthonormality_defect()
    out.append(CheckResult("coupling.cg_orthonormality", {"q": str(space.q), "twice_j": tj}, residual=float(defect),
                           status="pass" if defect == 0 else "fail"))
    return out
