"""Command-line front end.

Commands::

    gen TEMPLATE        write a runnable scenario file
    rectify SCENARIO    rectify and write report JSON, trace CSV, cochain table
    verify COCHAIN SCENARIO
                        defect of a stored cochain table
    sweep SCENARIO      one rectification per epsilon, CSV plus slope JSON
    selftest            brute-force oracle suite

Exit codes: 0 success/Converged, 1 check failed (selftest, verify above tol),
2 malformed input, 3 QuadratureFloor, 4 Diverged or ChartError,
5 GateRejected.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .cochain import ChartError, CochainError, cochain_from_json, cochain_to_json, defect
from .groups import GroupAxiomError
from .rectify import Status, gate_check, report_to_json, trace_csv
from .scenarios import (
    TEMPLATES,
    ScenarioError,
    load_scenario,
    run_scenario,
    sweep,
    template,
)
from .target import ActionError

SEED_ENV = "COCYCLE_RECTIFIER_SEED"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_CODES = {
    Status.CONVERGED: 0,
    Status.QUADRATURE_FLOOR: 3,
    Status.DIVERGED: 4,
    Status.CHART_ERROR: 4,
    Status.GATE_REJECTED: 5,
}
SWEEP_COLUMNS = ["epsilon", "final_defect", "distance", "fitted_order", "status"]
DEFAULT_EPSILONS = "1e-4,3e-4,1e-3,3e-3,1e-2"


class InputError(Exception):
    """Malformed input; reported with a location and mapped to exit code 2."""


# ---------------------------------------------------------------- output

def write_atomic(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_all(files: dict) -> None:
    """Write several outputs only after all of them have been rendered."""
    for path, text in files.items():
        write_atomic(path, text)


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


# ----------------------------------------------------------------- input

def read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror or exc})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc


def resolve_seed(flag: int | None) -> int | None:
    """``--seed`` wins, then ``$COCYCLE_RECTIFIER_SEED``, else the file's own seed."""
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return None
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"{SEED_ENV}={env!r} is not an integer") from exc


def apply_overrides(doc: dict, args) -> dict:
    doc = copy.deepcopy(doc)
    seed = resolve_seed(getattr(args, "seed", None))
    if seed is not None:
        doc.setdefault("perturbation", {})["seed"] = seed
    settings = doc.setdefault("settings", {})
    if getattr(args, "tol", None) is not None:
        settings["tol"] = args.tol
    if getattr(args, "max_iter", None) is not None:
        settings["max_iter"] = args.max_iter
    return doc


def load_checked(path, args):
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise InputError(f"{path}: scenario must be a JSON object")
    doc = apply_overrides(doc, args)
    try:
        return load_scenario(doc)
    except ScenarioError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except (GroupAxiomError, ActionError, CochainError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def parse_epsilons(text: str) -> list[float]:
    items = [x.strip() for x in text.split(",") if x.strip()]
    try:
        eps = [float(x) for x in items]
    except ValueError as exc:
        raise InputError(f"--epsilons: {exc}") from exc
    if any(not e >= 0 for e in eps):
        raise InputError("--epsilons: values must be nonnegative")
    return eps


def _sibling(stem: Path, suffix: str) -> Path:
    return stem.with_name(stem.name + suffix)


def _stem(path: Path) -> Path:
    name = path.name
    for suffix in (".report.json", ".json", ".csv"):
        if name.endswith(suffix):
            return path.with_name(name[: -len(suffix)])
    return path


# -------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    if args.template not in TEMPLATES:
        names = ", ".join(sorted(TEMPLATES))
        print(f"error: unknown template {args.template!r}; available: {names}", file=sys.stderr)
        return EXIT_INPUT
    doc = apply_overrides(template(args.template), args)
    load_scenario(doc)
    text = dump_json(doc)
    if args.output:
        write_atomic(Path(args.output), text)
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_rectify(args) -> int:
    sc = load_checked(args.scenario, args)
    try:
        _, out, report = run_scenario(sc)
    except (ScenarioError, CochainError, ValueError) as exc:
        raise InputError(f"{args.scenario}: {exc}") from exc
    doc = report_to_json(report, sc.settings, sc.perturbation.seed)
    out_path = Path(args.output) if args.output else _sibling(_stem(Path(args.scenario)), ".report.json")
    stem = _stem(out_path)
    files = {out_path: dump_json(doc), _sibling(stem, ".trace.csv"): trace_csv(report)}
    if sc.group.is_finite and report.status is not Status.GATE_REJECTED:
        files[_sibling(stem, ".cochain.json")] = dump_json(cochain_to_json(out))
    write_all(files)
    print(f"status={report.status.value} iterations={report.iterations} "
          f"final_defect={report.final_defect!r}")
    if report.message:
        print(f"note: {report.message}")
    for p in files:
        print(f"wrote {p}")
    return EXIT_CODES[report.status]


def cmd_verify(args) -> int:
    sc = load_checked(args.scenario, args)
    raw = read_json(args.cochain)
    expected = sc.arity if sc.target.is_abelian else 1
    if not isinstance(raw, dict) or raw.get("arity") != expected:
        got = raw.get("arity") if isinstance(raw, dict) else None
        raise InputError(f"{args.cochain}: arity {got!r} does not match the scenario "
                         f"(expected {expected})")
    try:
        rho = cochain_from_json(raw, sc.group, sc.target, sc.action)
    except (CochainError, ValueError, TypeError) as exc:
        raise InputError(f"{args.cochain}: {exc}") from exc
    settings = sc.settings
    ev = settings.eval_set(sc.group, rho.arity + 1)
    try:
        res = defect(rho, ev)
    except ChartError as exc:
        print(f"defect: outside logarithm chart at {list(exc.witness or ())}")
        return EXIT_CODES[Status.CHART_ERROR]
    if sc.target.is_abelian:
        gate = "not applicable (abelian target)"
    else:
        g = gate_check(rho, settings, sc.group.haar_scheme(), ev)
        gate = "admitted" if g else f"rejected ({g.reason}: {g.value!r} > {g.bound!r})"
    ok = res.value <= settings.tol
    summary = {"defect": res.value, "argmax": [int(x) for x in res.witness],
               "gate": gate, "tol": settings.tol, "cocycle": ok}
    print(f"defect: {res.value!r}")
    print(f"argmax: {tuple(summary['argmax'])}")
    print(f"gate: {gate}")
    print(f"cocycle within tol={settings.tol!r}: {'yes' if ok else 'no'}")
    if args.output:
        write_atomic(Path(args.output), dump_json(summary))
    return EXIT_OK if ok else EXIT_FAILED


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([repr(r.epsilon), _fmt(r.final_defect), _fmt(r.distance),
                    _fmt(r.fitted_order), r.status])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    sc = load_checked(args.scenario, args)
    eps = parse_epsilons(args.epsilons)
    if args.jobs < 1:
        raise InputError("--jobs must be at least 1")
    result = sweep(sc, eps, jobs=args.jobs)
    out_path = Path(args.output) if args.output else _sibling(_stem(Path(args.scenario)), ".sweep.csv")
    slope_doc = {
        "schema": 1,
        "slope": result.slope,
        "epsilons": eps,
        "converged": sum(r.status == Status.CONVERGED.value for r in result.rows),
        "rows": len(result.rows),
        "seed": sc.perturbation.seed,
    }
    files = {out_path: sweep_csv(result.rows),
             _sibling(_stem(out_path), ".slope.json"): dump_json(slope_doc)}
    write_all(files)
    for r in result.rows:
        extra = f" ({r.error})" if r.error else ""
        print(f"epsilon={r.epsilon!r} status={r.status}{extra}")
    print(f"slope={result.slope!r}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_all

    extra = []
    for path in args.cayley or []:
        doc = read_json(path)
        try:
            extra.append((doc.get("name", Path(path).stem), doc["table"]))
        except (KeyError, AttributeError) as exc:
            raise InputError(f"{path}: Cayley file needs a 'table' field") from exc
    results = run_all(extra)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(r.line())
    total = sum(r.seconds for r in results)
    print(f"{len(results) - len(failed)}/{len(results)} oracles passed in {total:.2f}s")
    for r in failed:
        print(f"failing case [{r.name}]: {json.dumps(r.failure, sort_keys=True)}")
    if args.output:
        write_atomic(Path(args.output), dump_json([r.to_json() for r in results]))
    return EXIT_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser, seed=True, tol=True) -> None:
    p.add_argument("-o", "--output", help="output path")
    if tol:
        p.add_argument("--tol", type=float, help="override settings.tol")
        p.add_argument("--max-iter", type=int, dest="max_iter", help="override settings.max_iter")
    if seed:
        p.add_argument("--seed", type=int,
                       help=f"perturbation seed (falls back to ${SEED_ENV}, then the file)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cocycle-rectifier",
                                description="Deform almost-cocycles into exact cocycles.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a built-in scenario template")
    g.add_argument("template", help="one of: " + ", ".join(sorted(TEMPLATES)))
    _common(g)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("rectify", help="rectify a scenario")
    r.add_argument("scenario")
    _common(r)
    r.set_defaults(func=cmd_rectify)

    v = sub.add_parser("verify", help="defect of a stored cochain table")
    v.add_argument("cochain")
    v.add_argument("scenario")
    _common(v, seed=False)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="rectify over a list of epsilons")
    s.add_argument("scenario")
    s.add_argument("--epsilons", default=DEFAULT_EPSILONS, help="comma-separated list")
    s.add_argument("--jobs", type=int, default=1, help="worker threads")
    _common(s)
    s.set_defaults(func=cmd_sweep)

    t = sub.add_parser("selftest", help="run the brute-force oracle suite")
    t.add_argument("--cayley", action="append", metavar="FILE",
                   help="extra Cayley table JSON to check (repeatable)")
    _common(t, seed=False, tol=False)
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
