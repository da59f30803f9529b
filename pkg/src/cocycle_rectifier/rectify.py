"""Deforming almost-cocycles into cocycles.

Degree 1, matrix targets: repeat ``beta = log(delta rho)``, Haar-average
``beta`` into a correction ``alpha`` and replace ``rho`` by ``exp(alpha) rho``;
each pass squares the defect.  Abelian targets, any degree: a single
last-slot homotopy step removes the defect outright.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg
from .cochain import (
    ChartError,
    Cochain,
    CochainError,
    EvaluationSet,
    beta_of,
    coboundary,
    defect,
    evaluation_set,
    homotopy_average,
    homotopy_last_slot,
    twisted_coboundary_values,
)
from .groups import HaarScheme
from .target import ad_operator_norm

__all__ = [
    "Status",
    "RectifySettings",
    "RectifyReport",
    "StepDiagnostics",
    "GateResult",
    "gate_check",
    "rectify_step",
    "rectify",
    "rectify_abelian",
    "fit_contraction",
    "is_quadratic",
    "distance",
    "near_coboundary_residual",
    "report_to_json",
    "trace_csv",
    "REPORT_SCHEMA",
]

REPORT_SCHEMA = 1

# Pairs whose successor is below this are roundoff, not contraction.
FIT_FLOOR = 1e-14


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    QUADRATURE_FLOOR = "QuadratureFloor"
    DIVERGED = "Diverged"
    CHART_ERROR = "ChartError"
    GATE_REJECTED = "GateRejected"


@dataclass(frozen=True)
class RectifySettings:
    tol: float = 1e-12
    max_iter: int = 30
    input_defect_max: float = 1.0 / 16.0
    ad_bound_max: float = 1e3
    random_tuples: int = 256
    eval_seed: int = 0
    node_tuple_cap: int = 4096
    stagnation_window: int = 2

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.input_defect_max <= 0.25:
            raise ValueError("input_defect_max must lie in (0, 0.25]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.ad_bound_max <= 0:
            raise ValueError("ad_bound_max must be positive")
        if self.stagnation_window < 1:
            raise ValueError("stagnation_window must be at least 1")

    def eval_set(self, group, size: int) -> EvaluationSet:
        return evaluation_set(group, size, self.random_tuples, self.eval_seed, self.node_tuple_cap)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class RectifyReport:
    status: Status
    defect_trace: list[float]
    iterations: int
    final_defect: float
    distance: float | None = None
    fitted_K: float | None = None
    fitted_order: float | None = None
    near_coboundary: float | None = None
    witness: tuple | None = None
    message: str = ""
    eval_provenance: str = ""
    alpha_sups: list[float] = field(default_factory=list)

    @property
    def hyers_ulam_ratio(self) -> float | None:
        """``distance / initial defect``: the measured closeness constant."""
        if self.distance is None or not self.defect_trace or self.defect_trace[0] <= 0:
            return None
        return self.distance / self.defect_trace[0]


@dataclass(frozen=True)
class StepDiagnostics:
    alpha_sup: float
    pre_defect: float
    post_defect: float


@dataclass(frozen=True)
class GateResult:
    passed: bool
    reason: str = ""
    value: float = 0.0
    bound: float = 0.0
    witness: object = None

    def __bool__(self) -> bool:
        return self.passed


def _as_witness(group, e):
    return int(e) if group.is_finite else tuple(float(x) for x in np.atleast_1d(e))


def gate_check(rho: Cochain, settings: RectifySettings, scheme: HaarScheme,
               eval_set: EvaluationSet | None = None) -> GateResult:
    """Admission test: Ad-norm bound over the Haar nodes, then the defect bound."""
    g = rho.group
    if not rho.target.is_abelian:
        try:
            ad = np.asarray(ad_operator_norm(rho.target, rho(scheme.nodes))).reshape(-1)
        except linalg.SingularMatrixError:
            return GateResult(False, "singular value of rho at a Haar node", math.inf,
                              settings.ad_bound_max)
        i = int(np.argmax(ad))
        if not ad[i] <= settings.ad_bound_max:
            return GateResult(False, "Ad bound", float(ad[i]), settings.ad_bound_max,
                              _as_witness(g, scheme.nodes[i]))
    if eval_set is None:
        eval_set = settings.eval_set(g, rho.arity + 1)
    try:
        d = defect(rho, eval_set)
    except ChartError as exc:
        return GateResult(False, "defect outside chart", math.inf, settings.input_defect_max,
                          exc.witness)
    if not d.value <= settings.input_defect_max:
        return GateResult(False, "defect", d.value, settings.input_defect_max, d.witness)
    return GateResult(True, "", d.value, settings.input_defect_max)


def _update(rho: Cochain, alpha: Cochain) -> Cochain:
    t = rho.target

    def fn(x):
        return t.exp(alpha(x)) @ rho(x)

    return Cochain.from_function(rho.group, t, rho.action, 1, fn, "group")


def rectify_step(rho: Cochain, scheme: HaarScheme, eval_set: EvaluationSet | None = None,
                 pre_defect: float | None = None) -> tuple[Cochain, StepDiagnostics]:
    """One correction ``rho -> exp(alpha) rho`` with ``alpha`` the Haar average of ``beta``."""
    if rho.arity != 1 or rho.target.is_abelian:
        raise CochainError("rectify_step works on degree-1 cochains with matrix targets")
    if eval_set is None:
        eval_set = evaluation_set(rho.group, 2)
    if pre_defect is None:
        pre_defect = defect(rho, eval_set).value
    beta = beta_of(rho)
    alpha = homotopy_average(beta, rho, scheme)
    new = _update(rho, alpha)
    post = defect(new, eval_set).value
    # exp(alpha) = new . rho^-1, and new is already cached at these points
    alpha_sup = distance(new, rho, eval_set)
    return new, StepDiagnostics(alpha_sup, pre_defect, post)


def distance(new: Cochain, old: Cochain, eval_set: EvaluationSet) -> float:
    """Sup of ``||log(new . old^-1)||`` (``||new - old||`` if abelian) over the
    leading slots of the evaluation set."""
    args = eval_set.tuples[:old.arity]
    a, b = new(*args), old(*args)
    t = old.target
    if t.is_abelian:
        diff = a - b
    else:
        diff = t.log(a @ linalg.inv_batch(b))
    return float(np.max(t.norm(diff), initial=0.0))


def near_coboundary_residual(rho0: Cochain, rho1: Cochain, eval_set: EvaluationSet) -> float:
    """Sup of ``||beta_0 + delta_|> alpha_total||`` with ``alpha_total = log(rho1 rho0^-1)``
    and the almost-action of ``rho0``."""
    t = rho0.target

    def total(x):
        return t.log(rho1(x) @ linalg.inv_batch(rho0(x)))

    alpha = Cochain.from_function(rho0.group, t, rho0.action, 1, total, "algebra", memo=False)
    s, u = eval_set.tuples[:2]
    vals = beta_of(rho0)(s, u) + twisted_coboundary_values(alpha, rho0, (s, u))
    return float(np.max(t.norm(vals), initial=0.0))


def fit_contraction(defect_trace, floor: float = 0.0) -> tuple[float, float]:
    """Least-squares fit of ``log e_{k+1} = order * log e_k + log K``.

    Only consecutive pairs whose successor exceeds ``floor`` are used.  When
    fewer than two pairs survive (a short trace that reaches roundoff on its
    second step), the first two pairs are used as they are.  A flat trace has
    no slope information and reports order 0.
    """
    trace = [float(x) for x in defect_trace]
    if len(trace) < 3:
        raise ValueError("fit_contraction needs a trace of length >= 3")
    if any(not x > 0 for x in trace):
        raise ValueError("fit_contraction needs positive defects")
    pairs = [(a, b) for a, b in zip(trace, trace[1:]) if b > floor]
    if len(pairs) < 2:
        pairs = list(zip(trace, trace[1:]))[:2]
    x = np.log([p[0] for p in pairs])
    y = np.log([p[1] for p in pairs])
    if np.ptp(x) == 0:
        return float(np.exp(np.mean(y))), 0.0
    order, logk = np.polyfit(x, y, 1)
    return float(np.exp(logk)), float(order)


def is_quadratic(order: float) -> bool:
    return 1.7 <= order <= 2.3


def _classify(trace: list[float], settings: RectifySettings) -> Status | None:
    cur = trace[-1]
    if cur <= settings.tol:
        return Status.CONVERGED
    w = settings.stagnation_window
    if len(trace) >= 3 and trace[-1] > trace[-2] > trace[-3] and cur > trace[0]:
        return Status.DIVERGED
    if len(trace) > w and all(b > 0.5 * a for a, b in zip(trace[-w - 1:-1], trace[-w:])):
        return Status.QUADRATURE_FLOOR
    return None


def _fit(report: RectifyReport, tol: float) -> None:
    try:
        k, order = fit_contraction(report.defect_trace, floor=FIT_FLOOR)
    except ValueError:
        return
    report.fitted_K, report.fitted_order = k, order


def rectify(rho: Cochain, settings: RectifySettings | None = None,
            scheme: HaarScheme | None = None) -> tuple[Cochain, RectifyReport]:
    """Iterate ``rectify_step`` until the defect is below ``settings.tol``.

    Stops early with QuadratureFloor when ``stagnation_window`` consecutive
    steps each fail to halve the defect, with Diverged after two consecutive
    increases that leave the defect above its initial value, and with
    ChartError when a coboundary value leaves the logarithm chart.  Hitting
    ``max_iter`` above ``tol`` is reported as QuadratureFloor.
    """
    settings = settings or RectifySettings()
    g = rho.group
    scheme = scheme or g.haar_scheme()
    if rho.target.is_abelian:
        return rectify_abelian(rho, settings, scheme)
    if rho.arity != 1:
        raise CochainError("non-abelian rectification is for degree-1 cochains")
    ev = settings.eval_set(g, 2)
    gate = gate_check(rho, settings, scheme, ev)
    if not gate:
        trace = [gate.value] if math.isfinite(gate.value) and gate.reason != "Ad bound" else []
        return rho, RectifyReport(
            Status.GATE_REJECTED, trace, 0, gate.value,
            witness=gate.witness,
            message=f"{gate.reason}: {gate.value:.6g} > {gate.bound:.6g}",
            eval_provenance=ev.provenance)
    trace = [gate.value]
    cur = rho
    status = _classify(trace, settings)
    message = ""
    alpha_sups: list[float] = []
    iterations = 0
    while status is None and iterations < settings.max_iter:
        try:
            nxt, diag = rectify_step(cur, scheme, ev, pre_defect=trace[-1])
        except ChartError as exc:
            status, message = Status.CHART_ERROR, str(exc)
            break
        except (OverflowError, linalg.SingularMatrixError) as exc:
            status, message = Status.CHART_ERROR, f"numeric failure: {exc}"
            break
        iterations += 1
        cur = nxt
        trace.append(diag.post_defect)
        alpha_sups.append(diag.alpha_sup)
        status = _classify(trace, settings)
    if status is None:
        status = Status.QUADRATURE_FLOOR
        message = f"max_iter={settings.max_iter} reached above tol"
    report = RectifyReport(status, trace, iterations, trace[-1], message=message,
                           eval_provenance=ev.provenance, alpha_sups=alpha_sups)
    try:
        report.distance = distance(cur, rho, ev)
    except linalg.BranchCutError:
        report.distance = None
    if status in (Status.CONVERGED, Status.QUADRATURE_FLOOR) and iterations:
        try:
            report.near_coboundary = near_coboundary_residual(rho, cur, ev)
        except linalg.BranchCutError:
            report.near_coboundary = None
    _fit(report, settings.tol)
    return cur, report


def rectify_abelian(rho: Cochain, settings: RectifySettings | None = None,
                    scheme: HaarScheme | None = None) -> tuple[Cochain, RectifyReport]:
    """One-shot correction ``rho' = rho - h(delta rho)`` for abelian targets."""
    if not rho.target.is_abelian:
        raise CochainError("rectify_abelian needs an abelian target")
    if rho.arity < 1:
        raise CochainError("rectify_abelian needs arity >= 1")
    settings = settings or RectifySettings()
    g = rho.group
    scheme = scheme or g.haar_scheme()
    ev = settings.eval_set(g, rho.arity + 1)
    eps0 = defect(rho, ev).value
    trace = [eps0]
    new = rho
    iterations = 0
    if eps0 > settings.tol:
        correction = homotopy_last_slot(coboundary(rho), scheme)
        t = rho.target

        def fn(*args):
            return rho(*args) - correction(*args)

        new = Cochain.from_function(g, t, rho.action, rho.arity, fn, rho.values)
        iterations = 1
        trace.append(defect(new, ev).value)
    status = Status.CONVERGED if trace[-1] <= settings.tol else Status.QUADRATURE_FLOOR
    report = RectifyReport(status, trace, iterations, trace[-1],
                           distance=distance(new, rho, ev), eval_provenance=ev.provenance)
    return new, report


# ---------------------------------------------------------- serialization

def _plain(x):
    """JSON-ready copy: numpy scalars/arrays to Python, non-finite floats to None."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, enum.Enum):
        return x.value
    return x


def report_to_json(report: RectifyReport, settings: RectifySettings, seed: int | None) -> dict:
    """The report document.  Contains no timestamps, so equal runs serialize identically."""
    return _plain({
        "schema": REPORT_SCHEMA,
        "status": report.status.value,
        "iterations": report.iterations,
        "defect_trace": report.defect_trace,
        "fitted_K": report.fitted_K,
        "fitted_order": report.fitted_order,
        "final_defect": report.final_defect,
        "distance": report.distance,
        "seed": seed,
        "settings": settings.to_json(),
        "hyers_ulam_ratio": report.hyers_ulam_ratio,
        "near_coboundary": report.near_coboundary,
        "alpha_sups": report.alpha_sups,
        "witness": report.witness,
        "message": report.message,
        "eval_provenance": report.eval_provenance,
    })


def trace_csv(report: RectifyReport) -> str:
    """``iteration,defect`` rows, one per trace entry."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "defect"])
    for k, e in enumerate(report.defect_trace):
        w.writerow([k, repr(float(e))])
    return buf.getvalue()
