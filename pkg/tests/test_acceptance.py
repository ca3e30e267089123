"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line; under pytest the lines are
collected into a terminal summary section.  Run this file directly to
print only the lines.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


from quonlab.algebra import Generator
from quonlab.fock import FockSpace, check_positivity
from quonlab.number_ops import solve_series_coefficients
from quonlab.suites import RunConfig, run_suite

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

FLOAT_SWEEP = [-0.9, -0.5, 0, 0.5, 0.9]
EXACT_SWEEP = ["1/2"]
LEVELS = [1, 2, 3]  # twice j: 1/2, 1, 3/2
TOL = 1e-10


def _verdict(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _records(checks, twice_js, n_max, **kw):
    out = []
    for tj in twice_js:
        for q_list in (FLOAT_SWEEP, EXACT_SWEEP):
            report = run_suite(RunConfig(twice_j=tj, q_list=q_list, n_max=n_max, checks=checks, **kw))
            out.extend(report.records)
    return out


def _summarize(records, names=None):
    if names is not None:
        records = [r for r in records if r.name in names]
    bad = [r for r in records if not r.passed]
    exact_bad = [r for r in records if "/" in str(r.params.get("q", "")) and r.residual != 0]
    worst = max((r.residual for r in records), default=0.0)
    ok = bool(records) and not bad and not exact_bad and worst <= TOL
    detail = f"records={len(records)} comparisons={sum(r.count for r in records)} worst residual={worst:.2e}"
    if bad:
        detail += f"; first failure: {bad[0].name} {bad[0].params} {bad[0].detail}"
    return ok, detail


def test_criterion_1_defining_relation():
    ok, detail = _summarize(_records(["eq1"], LEVELS, n_max=4))
    _verdict(1, "defining q-mutation relation", ok, detail)


def test_criterion_2_positivity():
    mins = []
    failures = []
    for tj in range(4):  # 1..4 modes
        for q in [*FLOAT_SWEEP, Fraction(1, 2)]:
            space = FockSpace(tj, float(q) if not isinstance(q, Fraction) else q, 4)
            for n in range(1, 5):
                rep = check_positivity(space, n)
                mins.append(rep.min_eigenvalue)
                if not (rep.positive_definite and rep.min_eigenvalue > 0):
                    failures.append((tj, q, n))
    r_plus = check_positivity(FockSpace(1, 1, 2), 2).rank
    r_minus = check_positivity(FockSpace(1, -1, 2), 2).rank
    ok = not failures and r_plus == 3 and r_minus == 1
    _verdict(2, "Gram positivity", ok,
             f"grams={len(mins)} smallest eigenvalue={min(mins):.3e} rank(q=1)={r_plus} rank(q=-1)={r_minus}"
             + (f"; failures={failures[:3]}" if failures else ""))


def test_criterion_3_transition_relations():
    ok, detail = _summarize(_records(["eq2"], LEVELS, n_max=3))
    _verdict(3, "transition operator commutators", ok, detail)


def test_criterion_4_series():
    problems = []
    for q in [*FLOAT_SWEEP, Fraction(1, 2)]:
        q = q if isinstance(q, Fraction) else float(q)
        c1 = solve_series_coefficients(1, q).coefficient(1, (0,))
        expected = 1 / (1 - q * q)
        if isinstance(q, Fraction):
            if c1 != expected:
                problems.append(f"c1({q})={c1}")
        elif abs(c1 - expected) > TOL * abs(expected):
            problems.append(f"c1({q})={c1}")
    half = solve_series_coefficients(1, Fraction(1, 2)).coefficient(1, (0,))
    if half != Fraction(4, 3):
        problems.append(f"c1(1/2)={half}")
    records = _records(["series"], [1, 2], n_max=3, series_order=2)
    exactness = [r for r in records if r.name == "series.exactness"]
    ks = sorted({r.params["K"] for r in exactness})
    ok, detail = _summarize(records)
    ok = ok and not problems and ks == [0, 1, 2]
    _verdict(4, "number-operator series", ok, f"c1(1/2)={half} K={ks} {detail}" + (f"; {problems}" if problems else ""))


def test_criterion_5_Y_commutators():
    ok, detail = _summarize(_records(["eq6", "eq7"], [1, 2], n_max=3, max_tail=2))
    _verdict(5, "Y-operator commutators", ok, detail)


def test_criterion_6_su2jp1_closure():
    records = _records(["eq8"], [2], n_max=3)
    quadruples = {r.count for r in records}
    ok, detail = _summarize(records)
    ok = ok and quadruples == {81 * 4}
    _verdict(6, "su(2j+1) closure at j=1", ok, detail)


def test_criterion_7_su2_and_tensor():
    records = _records(["eq9", "eq10"], LEVELS, n_max=3)
    indep = [r for r in records if r.name == "eq9.q_independence"]
    ok, detail = _summarize(records)
    ok = ok and len(indep) == len(LEVELS) and all(r.passed for r in indep)
    _verdict(7, "su(2) closure, tensor property, q-independence", ok, detail)


def test_criterion_8_coupling():
    ok, detail = _summarize(_records(["coupling"], [1, 2], n_max=2))
    _verdict(8, "Clebsch-Gordan coupling of quon pairs", ok, detail)


def test_criterion_9_oracle_cross_validation():
    pairs = mismatches = 0
    for q in (Fraction(1, 2), Fraction(-2, 3)):
        for tj in range(4):
            space = FockSpace(tj, q, 4)
            alg = space.algebra
            for n in range(5):
                words = space.sector(n).words
                g = space.gram(n)
                for (a, w1), (b, w2) in itertools.product(enumerate(words), repeat=2):
                    factors = tuple(Generator(False, m) for m in reversed(w1)) + tuple(Generator(True, m) for m in w2)
                    pairs += 1
                    mismatches += alg.vacuum_value(factors) != g[a, b]
    ok = mismatches == 0 and pairs > 0
    _verdict(9, "inner product vs rewrite-engine oracle", ok, f"word pairs={pairs} mismatches={mismatches}")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
