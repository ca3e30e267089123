"""Run configuration and the named verification suites."""

from __future__ import annotations

import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import linalg
from .fock import FockSpace, check_positivity, verify_defining_relation
from .number_ops import check_transition_relations, check_y_dagger_commutators, check_pair_commutators, check_su2jp1_closure, check_series
from .report import ERROR, EXCLUDED, FAIL, PASS, Accumulator, CheckResult, Report
from .scalars import FLOAT_TOLERANCE, ConfigurationError, DeformationParameter, EndpointError, format_scalar
from .su2 import build_generators, check_tensor_property, verify_coupling, verify_su2_closure

SUITES = ("eq1", "positivity", "eq2", "eq6", "eq7", "eq8", "eq9", "eq10", "series", "coupling")
# undefined where the Gram form degenerates
ENDPOINT_EXCLUDED = ("series", "coupling")


def _q_literal(value):
    """Config q entry -> Fraction (exact literal), int, or float."""
    if isinstance(value, bool):
        raise ConfigurationError(f"not a q value: {value!r}")
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            try:
                return Fraction(int(num), int(den))
            except (ValueError, ZeroDivisionError):
                raise ConfigurationError(f"not a q value: {value!r}") from None
        try:
            return int(text)
        except ValueError:
            pass
        try:
            return float(text)
        except ValueError:
            raise ConfigurationError(f"not a q value: {value!r}") from None
    if isinstance(value, (int, float, Fraction)):
        return value
    raise ConfigurationError(f"not a q value: {value!r}")


def resolve_q_list(values, backend: str | None = None) -> tuple[list[DeformationParameter], str]:
    """Infer the backend from the literals and coerce every q into it.

    Decimals select the float backend and ``p/r`` literals the exact one;
    integers fit either.  Mixing decimals with ``p/r`` literals is rejected.
    """
    if not values:
        raise ConfigurationError("q_list must not be empty")
    lits = [_q_literal(v) for v in values]
    kinds = {type(v) for v in lits if not isinstance(v, int)}
    if float in kinds and Fraction in kinds:
        raise ConfigurationError("q_list mixes decimal (float) and p/r (exact) literals")
    inferred = "float" if float in kinds else "exact"
    if backend is None:
        backend = inferred
    elif backend not in ("exact", "float"):
        raise ConfigurationError(f"unknown backend {backend!r}")
    elif backend == "exact" and float in kinds:
        raise ConfigurationError("decimal q literal with the exact backend")
    out = []
    for v in lits:
        if abs(v) > 1:
            raise ConfigurationError(f"|q| must be <= 1, got {format_scalar(v)}")
        out.append(DeformationParameter(Fraction(v), True) if backend == "exact"
                   else DeformationParameter(float(v), False))
    return out, backend


@dataclass
class RunConfig:
    twice_j: int = 2
    q_list: list = field(default_factory=lambda: [-0.9, 0, 0.9])
    n_max: int = 3
    series_order: int = 1
    backend: str | None = None
    checks: list = field(default_factory=lambda: list(SUITES))
    tolerance: float = FLOAT_TOLERANCE
    max_tail: int = 2
    jobs: int = 1
    output_json: str | None = None
    output_summary: str | None = None

    def __post_init__(self):
        if not isinstance(self.twice_j, int) or self.twice_j < 0:
            raise ConfigurationError("twice_j must be a non-negative integer")
        if not isinstance(self.n_max, int) or self.n_max < 1:
            raise ConfigurationError("n_max must be >= 1")
        if not isinstance(self.series_order, int) or self.series_order < 0:
            raise ConfigurationError("series_order must be >= 0")
        if self.max_tail < 1:
            raise ConfigurationError("max_tail must be >= 1")
        if not self.tolerance > 0:
            raise ConfigurationError("tolerance must be positive")
        unknown = [c for c in self.checks if c not in SUITES]
        if unknown:
            raise ConfigurationError(f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
        if not self.checks:
            raise ConfigurationError("no suites selected")
        self.q_values, self.backend = resolve_q_list(self.q_list, self.backend)

    _ALIASES = {"N_max": "n_max", "nmax": "n_max", "K": "series_order"}

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        if "j" in doc:
            if "twice_j" in doc:
                raise ConfigurationError("give either j or twice_j")
            j = Fraction(str(doc.pop("j")))
            if (2 * j).denominator != 1:
                raise ConfigurationError("j must be a half-integer")
            doc["twice_j"] = int(2 * j)
        for alias, name in cls._ALIASES.items():
            if alias in doc:
                doc[name] = doc.pop(alias)
        outputs = doc.pop("output", None)
        if isinstance(outputs, dict):
            doc.setdefault("output_json", outputs.get("json"))
            doc.setdefault("output_summary", outputs.get("summary"))
        known = {f for f in cls.__dataclass_fields__}
        extra = sorted(set(doc) - known)
        if extra:
            raise ConfigurationError(f"unknown config key(s): {extra}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigurationError(f"{path}: expected a JSON object")
        return cls.from_dict(doc)

    def describe(self) -> dict:
        """Normalised config for the report header (no output paths, no job count)."""
        return {
            "twice_j": self.twice_j,
            "q_list": [str(q) for q in self.q_values],
            "backend": self.backend,
            "n_max": self.n_max,
            "series_order": self.series_order,
            "checks": [c for c in SUITES if c in self.checks],
            "tolerance": self.tolerance,
            "max_tail": self.max_tail,
        }


# ---------------------------------------------------------------------------
# suites


@lru_cache(maxsize=32)
def _space(twice_j: int, q: DeformationParameter, n_max: int) -> FockSpace:
    return FockSpace(twice_j, q, n_max)


def _defining_relation(space: FockSpace) -> list[CheckResult]:
    acc = Accumulator("eq1", q=str(space.q), twice_j=space.twice_j, n_max=space.n_max)
    for a, b in itertools.product(space.modes, repeat=2):
        verify_defining_relation(space, a, b, acc)
    return [acc.done()]


def _positivity(space: FockSpace) -> list[CheckResult]:
    out = []
    for n in range(1, space.n_max + 1):
        t0 = time.perf_counter()
        rep = check_positivity(space, n)
        params = {"q": str(space.q), "twice_j": space.twice_j, "n": n}
        if space.q.is_endpoint:
            # degenerate by construction; the rank is the observable
            status = PASS
            detail = f"endpoint: rank {rep.rank} of {rep.dim}"
        else:
            status = PASS if rep.positive_definite else FAIL
            detail = f"min eigenvalue {rep.min_eigenvalue:.6g}, rank {rep.rank} of {rep.dim}"
        rec = CheckResult("positivity", params, residual=0.0, status=status, detail=detail)
        rec.params["rank"] = rep.rank
        rec.elapsed = time.perf_counter() - t0
        out.append(rec)
    return out


def _run_one(suite: str, space: FockSpace, cfg_series_order: int, max_tail: int) -> list[CheckResult]:
    if suite in ENDPOINT_EXCLUDED and space.q.is_endpoint:
        return [CheckResult(suite, {"q": str(space.q), "twice_j": space.twice_j}, status=EXCLUDED,
                            detail=f"endpoint: {suite} is undefined at |q| = 1")]
    if suite == "eq1":
        return _defining_relation(space)
    if suite == "positivity":
        return _positivity(space)
    if suite == "eq2":
        return [check_transition_relations(space)]
    if suite == "eq6":
        return [check_y_dagger_commutators(space, max_tail)]
    if suite == "eq7":
        return [check_pair_commutators(space, max_tail)]
    if suite == "eq8":
        return [check_su2jp1_closure(space)]
    if suite == "eq9":
        return [check_tensor_property(space)]
    if suite == "eq10":
        return [verify_su2_closure(space)]
    if suite == "series":
        return check_series(space, cfg_series_order)
    if suite == "coupling":
        return verify_coupling(space)
    raise ConfigurationError(f"unknown suite {suite!r}")


def run_job(suite: str, twice_j: int, q: DeformationParameter, n_max: int, series_order: int,
            max_tail: int, tolerance: float) -> list[CheckResult]:
    """One (suite, q) job; failures inside are recorded, never raised."""
    linalg.set_float_tolerance(tolerance)
    t0 = time.perf_counter()
    try:
        return _run_one(suite, _space(twice_j, q, n_max), series_order, max_tail)
    except EndpointError as exc:
        return [CheckResult(suite, {"q": str(q), "twice_j": twice_j}, status=EXCLUDED, detail=str(exc))]
    except Exception as exc:  # noqa: BLE001 - recorded in the report
        return [CheckResult(suite, {"q": str(q), "twice_j": twice_j}, status=ERROR,
                            detail=f"{type(exc).__name__}: {exc}", elapsed=time.perf_counter() - t0)]


def _generator_fingerprint(twice_j: int, q: DeformationParameter, n_max: int) -> list:
    gens = build_generators(_space(twice_j, q, n_max))
    return [gens.get(name, n).data for name in ("J0", "Jp", "Jm") for n in range(n_max + 1)]


def q_independence(cfg: RunConfig) -> CheckResult:
    """Generator matrices are identical (entry for entry) at every q of the sweep."""
    t0 = time.perf_counter()
    prints = [_generator_fingerprint(cfg.twice_j, q, cfg.n_max) for q in cfg.q_values]
    same = all(
        a.shape == b.shape and (np.array_equal(a, b) if a.dtype != object else bool(np.all(a == b)))
        for other in prints[1:]
        for a, b in zip(prints[0], other)
    )
    return CheckResult("eq9.q_independence", {"twice_j": cfg.twice_j, "q_list": [str(q) for q in cfg.q_values]},
                       status=PASS if same else FAIL, count=len(prints),
                       detail="" if same else "generator matrices differ between q values",
                       elapsed=time.perf_counter() - t0)


def run_suite(cfg: RunConfig) -> Report:
    """Run every selected suite at every q; the record order does not depend on scheduling."""
    linalg.set_float_tolerance(cfg.tolerance)
    jobs = [(s, cfg.twice_j, q, cfg.n_max, cfg.series_order, cfg.max_tail, cfg.tolerance)
            for s in SUITES if s in cfg.checks for q in cfg.q_values]
    report = Report(cfg.describe())
    workers = cfg.jobs if cfg.jobs > 0 else (os.cpu_count() or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for records in pool.map(run_job, *zip(*jobs)):
                report.extend(records)
    else:
        for job in jobs:
            report.extend(run_job(*job))
    if "eq9" in cfg.checks and len(cfg.q_values) > 1:
        report.extend([q_independence(cfg)])
    return report


def write_outputs(report: Report, cfg: RunConfig) -> None:
    if cfg.output_json:
        Path(cfg.output_json).write_text(report.to_json())
    if cfg.output_summary:
        Path(cfg.output_summary).write_text(report.to_text())

