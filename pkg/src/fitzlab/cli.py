"""Command-line scenario runner.

    fitzlab run <config.json> [--format=json|csv] [--parallel] [--tol-scale=K]
    fitzlab describe <check>

Exit codes: 0 all checks pass, 1 some check fails, 2 the config cannot be
parsed or built, 3 a search ran out of grid resolution (and nothing failed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import checks as ck
from .analysis import br_report, equivalence_suite, ni_scan, range_density_check
from .catalog import ConfigError, make_function, make_grid, make_operator
from .numerics import OffGridError
from .reports import CHECKS, CheckReport, PreconditionError, ResolutionExhausted, anchor, jsonable
from .operators import graph_resolution
from .representations import family_membership, lipschitz_estimate, s_function
from .spaces import SpaceSpec
from .sumrule import qualification_check, sum_operator_check

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_EXHAUSTED = 0, 1, 2, 3


class Scenario:
    """Parsed config: the space plus named operators and functions."""

    def __init__(self, cfg: dict):
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        try:
            self.space = SpaceSpec.from_json(cfg["space"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad space spec: {exc}") from None
        self.operators = {}
        for spec in cfg.get("operators", []):
            self.operators[_name(spec)] = make_operator(spec, self.space)
        self.functions = {}
        for spec in cfg.get("functions", []):
            self.functions[_name(spec)] = make_function(spec, self.space, self.operators, self.functions)
        self.checks = list(cfg.get("checks", []))
        for c in self.checks:
            if c.get("check") not in CHECKS:
                raise ConfigError(f"unknown check {c.get('check')!r}")

    def op(self, name):
        if name not in self.operators:
            raise ConfigError(f"unknown operator {name!r}")
        return self.operators[name]

    def fn(self, name):
        if name not in self.functions:
            raise ConfigError(f"unknown function {name!r}")
        return self.functions[name]


def _name(spec: dict) -> str:
    if "name" not in spec:
        raise ConfigError(f"spec without a name: {spec!r}")
    return str(spec["name"])


def _scaled(value, k: float, default: float | None = None):
    """Configured tolerance (or the check's own default) times ``k``."""
    if value is None:
        value = default
    return None if value is None else float(value) * k


def _vec(v, d: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(v, dtype=float), (d,)).copy()


def run_check(sc: Scenario, c: dict, k: float) -> list[CheckReport]:
    """Run one configured check; ``k`` scales every tolerance."""
    name = c["check"]
    s = sc.space
    d = s.dim
    if name == "monotonicity":
        return [ck.monotonicity_check(sc.op(c["operator"]), 1e-12 * k)]
    if name == "maximality":
        T = sc.op(c["operator"])
        return [ck.maximality_check(T, make_grid(c["probes"], 2 * d),
                                    _scaled(c.get("tol"), k, 1.5 * graph_resolution(T)))]
    if name == "ni_deficit":
        return [ni_scan(sc.op(c["operator"]), make_grid(c["probes"], 2 * d), c.get("tol", 1e-12) * k)]
    if name == "fenchel_young":
        f = sc.fn(c["function"])
        dual = make_grid(c["dual_grid"], f.grid.dim) if "dual_grid" in c else None
        return [ck.fenchel_young_check(f, dual, float(c.get("eps", 0.0)), c.get("tol", 1e-9) * k)]
    if name == "fitzpatrick":
        g = make_grid(c["grid"], 2 * d)
        return [ck.fitzpatrick_check(sc.op(c["operator"]), g, _scaled(c.get("tol"), k, 10 * g.spacing))]
    if name == "s_function":
        T = sc.op(c["operator"])
        g = make_grid(c["grid"], 2 * d)
        rows = [{"query": q, "value": s_function(T, (_vec(q[0], d), _vec(q[1], d)), g)} for q in c["queries"]]
        expect = c.get("expect")
        ok = True
        first = None
        if expect is not None:
            tol = c.get("tol", 10 * g.spacing) * k
            for r, e in zip(rows, expect):
                v = float(r["value"])
                good = (v == np.inf) if e == "inf" else abs(v - float(e)) <= tol
                if not good and first is None:
                    first = {**r, "expected": e}
            ok = first is None
        return [CheckReport("s_function", ok, tol={"tol": c.get("tol", 10 * g.spacing) * k}, probes=len(rows),
                            first_violation=first, witnesses=rows, anchor=anchor("s_function"),
                            details={"exact": False, "sup_radius": g.radius})]
    if name == "family_membership":
        h = sc.fn(c["function"])
        default = 10 * h.grid.spacing * max(lipschitz_estimate(h), 1.0)
        return [family_membership(h, sc.op(c["operator"]), _scaled(c.get("tol"), k, default))]
    if name == "flip_conjugate":
        g = make_grid(c["grid"], 2 * d)
        return [ck.flip_check(sc.op(c["operator"]), g, _scaled(c.get("tol"), k, 10 * g.spacing))]
    if name == "aux_infimum":
        h = sc.fn(c["function"])
        shifts = [(_vec(a, d), _vec(b, d)) for a, b in c["shifts"]]
        return [ck.aux_check(h, s, shifts, _scaled(c.get("tol"), k, 10 * h.grid.spacing), c.get("expect", "zero"),
                             float(c.get("threshold", 0.0)))]
    if name == "range_density":
        T = sc.op(c["operator"])
        rr = range_density_check(T, s, float(c.get("mu", 1.0)), float(c.get("eps", 0.0)), _vec(c.get("z0", 0.0), d),
                                 make_grid(c["dual_probes"], d), float(c["hit_tol"]))
        first = {"miss": rr.misses[0]} if rr.misses else None
        return [CheckReport("range_density", rr.dense, tol={"hit_tol": rr.resolution}, probes=rr.probes,
                            first_violation=first, witnesses=rr.witnesses, anchor=anchor("range_density"),
                            details=rr.to_json())]
    if name == "equivalence_suite":
        T = sc.op(c["operator"])
        rep = equivalence_suite(
            T, s, [_vec(z, d) for z in c.get("shifts", [0.0])], c.get("eps", [0.05, 0.2]), c.get("mu", [0.5, 1.0, 2.0]),
            maximality_probes=make_grid(c["maximality_probes"], 2 * d),
            ni_probes=make_grid(c.get("ni_probes", c["maximality_probes"]), 2 * d),
            dual_probes=make_grid(c["dual_probes"], d),
            hit_tol=float(c["hit_tol"]),
            max_tol=_scaled(c.get("maximality_tol"), k, 1.5 * graph_resolution(T)),
            ni_tol=c.get("ni_tol", 1e-12) * k,
        )
        out = []
        for cell in rep.details["cells"]:
            out.append(CheckReport(
                "equivalence_suite", cell["equivalent"], tol=rep.tol, probes=rep.probes // len(rep.details["cells"]),
                first_violation=None if cell["equivalent"] else cell, witnesses=rep.witnesses[:1],
                anchor=rep.anchor,
                details={"cell": cell, "operator": rep.details["operator"], "equivalent": rep.details["equivalent"]},
            ))
        return out
    if name == "br_search":
        return [br_report(sc.fn(c["function"]), None, _vec(c["x"], d), _vec(c["xstar"], d), float(c["eps"]),
                          float(c["lambda"]), s, c.get("tol", 1e-9) * k)]
    if name == "eps_duality_gap":
        return [ck.eps_gap_check(s, c.get("eps", [0.01, 0.1, 1.0]), int(c.get("samples", 1000)),
                                 int(c.get("seed", 0)), float(c.get("box", 2.0)))]
    if name == "preimage_bound":
        return [ck.preimage_check(sc.op(c["operator"]), s, float(c["M"]), float(c["eps"]),
                                  make_grid(c["dual_grid"], d))]
    if name == "qualification":
        return [qualification_check(sc.fn(c["h1"]), sc.fn(c["h2"]), bool(c.get("strict", False)))]
    if name == "conjugate_min_formula":
        probes = [(_vec(a, d), _vec(b, d)) for a, b in c["probes"]]
        h1 = sc.fn(c["h1"])
        return [ck.min_formula_check(h1, sc.fn(c["h2"]), probes, _scaled(c.get("tol"), k, 10 * h1.grid.spacing),
                                     bool(c.get("strict", False)))]
    if name == "sum_rule":
        h1 = sc.fn(c["h1"])
        ni_probes = make_grid(c["ni_probes"], 2 * d) if "ni_probes" in c else None
        return [sum_operator_check(sc.op(c["T1"]), sc.op(c["T2"]), h1, sc.fn(c["h2"]),
                                   make_grid(c["probes"], 2 * d),
                                   _scaled(c.get("eq_tol"), k, 0.5 * h1.grid.spacing ** 2 + 1e-12), ni_probes)]
    raise ConfigError(f"unknown check {name!r}")  # pragma: no cover - filtered at parse time


def _guarded(sc: Scenario, c: dict, k: float) -> list[CheckReport]:
    try:
        return run_check(sc, c, k)
    except ResolutionExhausted as exc:
        return [CheckReport(c["check"], "exhausted", anchor=anchor(c["check"]), details={"reason": str(exc)})]
    except (PreconditionError, OffGridError) as exc:
        return [CheckReport(c["check"], "fail", anchor=anchor(c["check"]),
                            first_violation={"precondition": str(exc)})]


def execute(sc: Scenario, tol_scale: float = 1.0, parallel: bool = False) -> list[CheckReport]:
    if parallel and len(sc.checks) > 1:
        with ThreadPoolExecutor() as pool:
            batches = list(pool.map(lambda c: _guarded(sc, c, tol_scale), sc.checks))
    else:
        batches = [_guarded(sc, c, tol_scale) for c in sc.checks]
    return [r for b in batches for r in b]


def exit_code(reports: list[CheckReport]) -> int:
    verdicts = {r.verdict for r in reports}
    if "fail" in verdicts:
        return EXIT_FAIL
    if "exhausted" in verdicts:
        return EXIT_EXHAUSTED
    return EXIT_OK


def to_lines(reports: list[CheckReport]) -> str:
    return "".join(json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in reports)


CSV_FIELDS = ("check", "verdict", "anchor", "probes", "tol", "first_violation", "details")


def to_csv(reports: list[CheckReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in reports:
        obj = r.to_json()
        w.writerow([obj["check"], obj["verdict"], obj["anchor"], obj["probes"], json.dumps(obj["tol"]),
                    json.dumps(obj.get("first_violation")), json.dumps(obj.get("details", {}))])
    return buf.getvalue()


def load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return json.loads(text)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except json.JSONDecodeError as exc:
        print(f"{args.config}:{exc.lineno}:{exc.colno}: JSON parse error: {exc.msg}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        sc = Scenario(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"{args.config}: invalid config: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        reports = execute(sc, args.tol_scale, args.parallel)
    except ConfigError as exc:
        print(f"{args.config}: invalid config: {exc}", file=sys.stderr)
        return EXIT_PARSE
    sys.stdout.write(to_csv(reports) if args.format == "csv" else to_lines(reports))
    sys.stdout.flush()
    return exit_code(reports)


def describe(check: str) -> str:
    if check not in CHECKS:
        raise KeyError(check)
    text, schema = CHECKS[check]
    return f"{check}\n  anchor: {text}\n  parameters: {json.dumps(jsonable(schema), ensure_ascii=False)}\n"


def cmd_describe(args) -> int:
    try:
        sys.stdout.write(describe(args.check))
    except KeyError:
        print(f"unknown check {args.check!r}; valid checks: {', '.join(sorted(CHECKS))}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


def _positive(v: str) -> float:
    x = float(v)
    if not x > 0:
        raise argparse.ArgumentTypeError("tol-scale must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fitzlab", description="Monotone-operator checks on finite grids.")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="execute the checks listed in a JSON config")
    r.add_argument("config")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--parallel", action="store_true", help="run checks concurrently (output order is kept)")
    r.add_argument("--tol-scale", type=_positive, default=1.0, help="multiply every tolerance by K")
    r.set_defaults(func=cmd_run)
    dsc = sub.add_parser("describe", help="print the anchor and parameters of a check")
    dsc.add_argument("check")
    dsc.set_defaults(func=cmd_describe)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
