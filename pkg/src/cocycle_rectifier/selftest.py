"""Brute-force oracles behind ``cocycle-rectifier selftest``.

Each oracle returns an :class:`OracleResult` recording the worst error seen,
the tolerance it was held to, its wall time, and (on failure) a JSON-ready
description of the first failing case.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .cochain import Cochain, coboundary, defect, homotopy_last_slot
from .groups import FiniteGroup, GroupAxiomError, small_groups
from .rectify import RectifySettings, rectify_step
from .scenarios import build_input, load_scenario, template
from .target import GAction, TargetGroup

__all__ = [
    "OracleResult",
    "regular_action",
    "oracle_group_axioms",
    "oracle_dd_zero",
    "oracle_homotopy",
    "oracle_quadratic_step",
    "oracle_exp_log",
    "oracle_bch",
    "run_all",
]

DD_TOL = 1e-13
HOMOTOPY_TOL = 1e-12
ROUNDTRIP_TOL = 1e-12


@dataclass
class OracleResult:
    name: str
    passed: bool
    worst: float
    tol: float
    seconds: float = 0.0
    cases: int = 0
    failure: dict | None = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"{tag} {self.name:<16} worst={self.worst:.3e} tol={self.tol:.1e} "
                f"cases={self.cases} time={self.seconds:.2f}s")

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "worst": self.worst,
                "tol": self.tol, "cases": self.cases, "failure": self.failure}


@dataclass
class _Tracker:
    name: str
    tol: float
    worst: float = 0.0
    cases: int = 0
    failure: dict | None = field(default=None)

    def record(self, err: float, case: dict) -> None:
        self.cases += 1
        if not np.isfinite(err) or err > self.tol:
            if self.failure is None:
                self.failure = {**case, "error": float(err) if np.isfinite(err) else None}
        if np.isfinite(err):
            self.worst = max(self.worst, float(err))
        else:
            self.worst = float("inf")

    def result(self, t0: float) -> OracleResult:
        return OracleResult(self.name, self.failure is None, self.worst, self.tol,
                            time.perf_counter() - t0, self.cases, self.failure)


def regular_action(g: FiniteGroup) -> GAction:
    """Left-regular permutation action of ``g`` on ``R^|g|`` (orthogonal)."""
    n = g.order
    mats = np.zeros((n, n, n))
    for s in range(n):
        mats[s, g.table[s], np.arange(n)] = 1.0
    return GAction.linear(lambda s: mats[np.asarray(s, dtype=np.int64)],
                          {"kind": "linear", "rep": "regular"})


def _actions(g: FiniteGroup):
    yield "trivial", GAction.trivial(), 2
    yield "regular", regular_action(g), g.order


def oracle_group_axioms(tables) -> tuple[OracleResult, list[FiniteGroup]]:
    """Rebuild each ``(name, table)`` with full axiom checks.

    Returns the result and the groups that passed; a broken table fails the
    oracle with the violated axiom in its failure record.
    """
    t0 = time.perf_counter()
    tr = _Tracker("group-axioms", 0.0)
    ok = []
    for name, table in tables:
        try:
            ok.append(FiniteGroup(table, name=name, check=True))
            tr.record(0.0, {"group": name})
        except GroupAxiomError as exc:
            tr.record(float("inf"), {"group": name, "axiom": str(exc).split(":")[0],
                                     "detail": str(exc)})
    return tr.result(t0), ok


def oracle_dd_zero(groups, max_arity: int = 3, seed: int = 0) -> OracleResult:
    """``delta delta c = 0`` for random abelian cochains of arity 0..max_arity."""
    t0 = time.perf_counter()
    tr = _Tracker("delta-delta", DD_TOL)
    rng = np.random.default_rng(seed)
    for g in groups:
        for aname, act, d in _actions(g):
            target = TargetGroup.abelian(d)
            for n in range(max_arity + 1):
                c = Cochain(g, target, act, n, table=rng.standard_normal((g.order,) * n + (d,)))
                dd = coboundary(coboundary(c)).table
                tr.record(float(np.max(np.abs(dd))),
                          {"group": g.name, "action": aname, "arity": n})
    return tr.result(t0)


def oracle_homotopy(groups, max_arity: int = 3, seed: int = 1) -> OracleResult:
    """``delta h + h delta = id`` for the last-slot homotopy, arity 1..max_arity."""
    t0 = time.perf_counter()
    tr = _Tracker("homotopy", HOMOTOPY_TOL)
    rng = np.random.default_rng(seed)
    for g in groups:
        scheme = g.haar_scheme()
        for aname, act, d in _actions(g):
            target = TargetGroup.abelian(d)
            for n in range(1, max_arity + 1):
                c = Cochain(g, target, act, n, table=rng.standard_normal((g.order,) * n + (d,)))
                lhs = (coboundary(homotopy_last_slot(c, scheme)).table
                       + homotopy_last_slot(coboundary(c), scheme).table)
                tr.record(float(np.max(np.abs(lhs - c.table))),
                          {"group": g.name, "action": aname, "arity": n})
    return tr.result(t0)


def oracle_quadratic_step(names=("s3-gl2", "q8-u2", "c4-twisted-r2"),
                          epsilons=(1e-2, 1e-3), seeds=(0, 1)) -> OracleResult:
    """One correction step maps defect ``e`` to at most ``10 e^2``.

    The recorded error is ``e_1 / (10 e_0^2)``, held to 1.
    """
    t0 = time.perf_counter()
    tr = _Tracker("quadratic-step", 1.0)
    for name in names:
        for eps in epsilons:
            for seed in seeds:
                doc = template(name)
                doc["perturbation"].update(epsilon=eps, seed=seed)
                sc = load_scenario(doc)
                _, rho = build_input(sc)
                ev = RectifySettings().eval_set(sc.group, 2)
                e0 = defect(rho, ev).value
                _, diag = rectify_step(rho, sc.group.haar_scheme(), ev, pre_defect=e0)
                tr.record(diag.post_defect / (10.0 * e0 * e0),
                          {"scenario": name, "epsilon": eps, "seed": seed,
                           "pre_defect": e0, "post_defect": diag.post_defect})
    return tr.result(t0)


def _random_algebra(rng, n: int, complex_: bool, radius: float) -> np.ndarray:
    x = rng.standard_normal((n, n))
    if complex_:
        x = x + 1j * rng.standard_normal((n, n))
    nrm = linalg.op_norm(x)
    return x * (radius * rng.uniform() / nrm) if nrm > 0 else x


def oracle_exp_log(count: int = 1000, seed: int = 2) -> OracleResult:
    """``log(exp(x)) = x`` for ``||x|| <= 1``, dims 1..8, real and complex."""
    t0 = time.perf_counter()
    tr = _Tracker("exp-log", ROUNDTRIP_TOL)
    rng = np.random.default_rng(seed)
    for k in range(count):
        n = 1 + k % 8
        x = _random_algebra(rng, n, bool(k % 2), 1.0)
        err = float(linalg.op_norm(linalg.logm(linalg.expm(x)) - x))
        tr.record(err, {"index": k, "dim": n})
    return tr.result(t0)


def bch_discrepancy(a: np.ndarray, b: np.ndarray, t: float) -> float:
    """``|| bch4(ta, tb) - log(exp(ta) exp(tb)) ||``."""
    exact = linalg.logm(linalg.expm(t * a) @ linalg.expm(t * b))
    return float(linalg.op_norm(linalg.bch4(t * a, t * b) - exact))


def oracle_bch(trials: int = 20, seed: int = 3, t0_scale: float = 0.2) -> OracleResult:
    """Halving ``t`` divides the BCH truncation error by ``2^5`` within a factor 4.

    The recorded error is ``|log2(ratio) - 5|`` held to ``log2(4) = 2``.
    """
    start = time.perf_counter()
    tr = _Tracker("bch4-order", 2.0)
    rng = np.random.default_rng(seed)
    for k in range(trials):
        n = 2 + k % 3
        a = _random_algebra(rng, n, False, 1.0)
        b = _random_algebra(rng, n, False, 1.0)
        a, b = a / linalg.op_norm(a), b / linalg.op_norm(b)
        e1, e2 = bch_discrepancy(a, b, t0_scale), bch_discrepancy(a, b, t0_scale / 2)
        err = abs(np.log2(e1 / e2) - 5.0) if e2 > 0 else float("inf")
        tr.record(err, {"index": k, "dim": n, "e_t": e1, "e_half": e2})
    return tr.result(start)


def run_all(extra_tables=()) -> list[OracleResult]:
    """The full suite on the built-in small groups plus ``(name, table)`` extras."""
    tables = [(g.name, g.table) for g in small_groups(12)] + list(extra_tables)
    axioms, groups = oracle_group_axioms(tables)
    return [
        axioms,
        oracle_dd_zero(groups),
        oracle_homotopy([g for g in groups if g.order <= 8]),
        oracle_quadratic_step(),
        oracle_exp_log(),
        oracle_bch(),
    ]
