"""Command-line runner for declarative experiment files.

    firmmono run experiment.json [--out report.json] [--format json|text] [--jobs N]
    firmmono list-checks
    firmmono version
"""

import argparse
import hashlib
import io
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, catalog, checks, duality, splitting
from .checks import Verdict, _jsonable
from .core import FirmMap, complement, from_firm, inverse, minty_sample, reflect
from .errors import ConvergenceError, DimensionError, MonotonicityError, SingularMatrixError
from .numeric import SampleConfig, as_vector, sample_points

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_SCHEMA = 4
EXIT_UNKNOWN_CHECK = 5
EXIT_DIMENSION = 6
EXIT_NUMERICAL = 7


class SpecError(Exception):
    def __init__(self, message, code=EXIT_SCHEMA):
        super().__init__(message)
        self.code = code


_NAMED_OBJECT = {"type": "object", "required": ["type"], "properties": {"type": {"type": "string"}}}

SCHEMA = {
    "type": "object",
    "required": ["checks"],
    "additionalProperties": False,
    "properties": {
        "description": {"type": "string"},
        "defaults": {"type": "object"},
        "operators": {"type": "object", "additionalProperties": _NAMED_OBJECT},
        "maps": {"type": "object", "additionalProperties": _NAMED_OBJECT},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "target"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string"},
                    "name": {"type": "string"},
                    "target": {"type": "string"},
                    "params": {"type": "object"},
                    "expect": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {
                            "verdict": {"type": "string"},
                            "constants": {"type": "object", "additionalProperties": {
                                "type": "object",
                                "additionalProperties": False,
                                "properties": {"value": {"type": "number"}, "tol": {"type": "number"},
                                               "min": {"type": "number"}, "max": {"type": "number"}},
                            }},
                            "fields": {"type": "object"},
                        },
                    },
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": ["json", "text"]}},
        },
    },
}


# --------------------------------------------------------------------------
# object construction
# --------------------------------------------------------------------------


class Registry:
    """Resolves operator and map names lazily, so declaration order does not matter."""

    def __init__(self, operators, maps):
        clash = sorted(set(operators) & set(maps))
        if clash:
            raise SpecError(f"names declared as both operator and map: {clash}")
        self.op_specs, self.map_specs = operators, maps
        self._ops, self._maps, self._busy = {}, {}, set()

    def has(self, name):
        return name in self.op_specs or name in self.map_specs

    def operator(self, name, where):
        if name not in self.op_specs:
            what = "a map, not an operator" if name in self.map_specs else "not declared"
            raise SpecError(f"{where}: {name!r} is {what}")
        if name not in self._ops:
            self._ops[name] = self._guard(name, lambda: self._build_operator(name, self.op_specs[name]))
        return self._ops[name]

    def map(self, name, where):
        """A map by name; an operator name stands for its resolvent."""
        if name in self.op_specs:
            return self.operator(name, where).resolvent
        if name not in self.map_specs:
            raise SpecError(f"{where}: {name!r} is not declared")
        if name not in self._maps:
            self._maps[name] = self._guard(name, lambda: self._build_map(name, self.map_specs[name]))
        return self._maps[name]

    def _guard(self, name, build):
        if name in self._busy:
            raise SpecError(f"circular reference through {name!r}")
        self._busy.add(name)
        try:
            return build()
        finally:
            self._busy.discard(name)

    def _build_operator(self, name, d):
        where = f"operator {name!r}"
        t = d["type"]
        if t == "inverse":
            return inverse(self.operator(_field(d, "of", where), where))
        if t == "from_firm":
            return from_firm(self.map(_field(d, "of", where), where))
        try:
            return catalog.make_operator(catalog.spec_from_dict(d))
        except (DimensionError, MonotonicityError):
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise SpecError(f"{where}: {exc}") from exc

    def _build_map(self, name, d):
        where = f"map {name!r}"
        t = d["type"]
        of = lambda: _field(d, "of", where)
        if t == "linear":
            M = np.asarray(_field(d, "matrix", where), dtype=float)
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise DimensionError(f"{where}: matrix must be square, got shape {M.shape}")
            off = d.get("offset")
            return FirmMap.from_matrix(M, {"op": "linear", "name": name},
                                       None if off is None else as_vector(off, M.shape[0]), "map")
        if t == "resolvent":
            return self.operator(of(), where).resolvent
        if t == "complement":
            return complement(self.map(of(), where))
        if t == "reflect":
            return reflect(self.map(of(), where))
        if t == "compose":
            return splitting.compose([self.map(n, where) for n in of()])
        if t == "combine":
            return splitting.convex_combine([self.map(n, where) for n in of()], _field(d, "weights", where))
        if t in ("douglas_rachford", "backward_backward"):
            names = of()
            if len(names) != 2:
                raise SpecError(f"{where}: {t} takes exactly two operators")
            a1, a2 = (self.operator(n, where) for n in names)
            build = splitting.douglas_rachford_operator if t == "douglas_rachford" else splitting.backward_backward
            return build(a1, a2)
        if t == "prox":
            f = catalog.spec_from_dict(_field(d, "function", where))
            return catalog.make_operator(catalog.Subdifferential(f)).resolvent
        if t == "strong_mono_test":
            return splitting.strong_mono_test_map(self.operator(of(), where), float(_field(d, "eps", where)))
        raise SpecError(f"{where}: unknown map type {t!r}")


def _field(d, key, where):
    if key not in d:
        raise SpecError(f"{where}: missing field {key!r}")
    return d[key]


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------


class Context:
    def __init__(self, registry, params, where, csv_dir):
        self.registry, self.params, self.where, self.csv_dir = registry, params, where, csv_dir

    def get(self, key, default=None):
        return self.params.get(key, default)

    def cfg(self, dim):
        if "seed" not in self.params:
            raise SpecError(f"{self.where}: a seed is required (params or defaults)")
        return SampleConfig(int(self.params["seed"]), int(self.get("count", 1000)), dim,
                            float(self.get("scale", 1.0)))

    def graph(self, A):
        return minty_sample(A, sample_points(self.cfg(A.dim), stream=int(self.get("stream", 0))))


def _check_firm(ctx, T):
    return checks.check_firm(T, ctx.cfg(T.dim)).to_dict()


def _check_lipschitz(ctx, T):
    return checks.estimate_lipschitz(T, ctx.cfg(T.dim), float(ctx.get("threshold", 1.0))).to_dict()


def _check_strict(ctx, T):
    return checks.check_strict(T, ctx.cfg(T.dim)).to_dict()


def _check_cyclic(ctx, T):
    n_max, per_n = int(ctx.get("n_max", 5)), int(ctx.get("tuples_per_n", 200))
    return checks.check_cyclic_firm(T, n_max, per_n, ctx.cfg(T.dim)).to_dict()


def _check_structure(ctx, T):
    return checks.classify_structure(T, ctx.cfg(T.dim)).to_dict()


def _check_banach(ctx, A):
    return checks.check_banach_graph_inequality(ctx.graph(A), float(_field(ctx.params, "beta", ctx.where))).to_dict()


def _check_strong(ctx, A):
    return checks.estimate_strong_monotonicity(ctx.graph(A), float(ctx.get("eps", 0.0))).to_dict()


def _check_cocoercive(ctx, A):
    return checks.estimate_cocoercivity(ctx.graph(A), float(ctx.get("gamma", 0.0))).to_dict()


def _check_paramonotone(ctx, A):
    return checks.check_paramonotone(A, ctx.graph(A)).to_dict()


def _check_rectangular(ctx, A):
    scales = tuple(float(s) for s in ctx.get("scales", (1.0, 10.0, 100.0)))
    r = checks.rectangular_sweep(A, ctx.cfg(A.dim), scales).to_dict()
    r["trend"] = r["details"]["trend"]
    return r


def _check_modulus(ctx, A):
    m = checks.estimate_uniform_modulus(ctx.graph(A), int(ctx.get("bins", 10)))
    return {"verdict": Verdict.INCONCLUSIVE.value, "constants": {}, "modulus": m.to_dict()}


def _check_duality(ctx, A):
    res = duality.run_duality_suite(A, ctx.cfg(A.dim), int(ctx.get("n_max", 4)), int(ctx.get("tuples_per_n", 200)))
    d = res.to_dict()
    d["verdict"] = "consistent" if res.consistent else "inconsistent"
    d["constants"] = {}
    return d


def _check_resolvent_identity(ctx, A):
    X = sample_points(ctx.cfg(A.dim), stream=int(ctx.get("stream", 0)))
    err = duality.resolvent_identity_error(A, X)
    tol = float(ctx.get("tol", 1e-10))
    v = Verdict.HOLDS if err <= tol else Verdict.VIOLATED
    return {"verdict": v.value, "constants": {"max_error": err}, "tol": tol}


def _check_surjectivity(ctx, T):
    targets = np.asarray(_field(ctx.params, "targets", ctx.where), dtype=float)
    if targets.ndim != 2 or targets.shape[1] != T.dim:
        raise DimensionError(f"{ctx.where}: targets must be vectors in R^{T.dim}")
    return duality.surjectivity_probe(T, targets, ctx.cfg(T.dim)).to_dict()


def _check_reflected(ctx, A):
    a = splitting.analyze_reflected_contraction(A, ctx.cfg(A.dim))
    d = a.to_dict()
    d["verdict"] = a.condition_iii_verdict.value if a.agree else Verdict.INCONCLUSIVE.value
    d["constants"] = {"beta": a.beta_estimate}
    return d


def _check_strong_reflected(ctx, A):
    eps = float(_field(ctx.params, "eps", ctx.where))
    return splitting.check_strong_mono_via_reflected(A, eps, ctx.cfg(A.dim)).to_dict()


def _check_picard(ctx, T):
    x0 = as_vector(_field(ctx.params, "x0", ctx.where), T.dim)
    tr = splitting.picard_iterate(T, x0, int(ctx.get("max_iter", 1000)), float(ctx.get("stop_tol", 1e-9)))
    d = tr.summary()
    d["verdict"] = "diverged" if tr.diverged else ("converged" if tr.converged else "cap_reached")
    d["constants"] = {"final_residual": d["final_residual"], "iterations_used": tr.iterations_used}
    if ctx.get("csv"):
        buf = io.StringIO()
        tr.write_csv(buf)
        path = Path(ctx.get("csv"))
        if not path.is_absolute():
            path = ctx.csv_dir / path
        _atomic_write(path, buf.getvalue())
        d["csv"] = str(ctx.get("csv"))
    return d


def _check_fixed_points(ctx, T):
    ev = splitting.multistart_fixed_points(T, ctx.cfg(T.dim), int(ctx.get("starts", 10)),
                                           int(ctx.get("max_iter", 1000)), float(ctx.get("stop_tol", 1e-9)))
    d = ev.to_dict()
    d["verdict"] = ev.label
    d["constants"] = {"diameter": ev.diameter, "max_iterations": max(t.iterations_used for t in ev.traces)}
    return d


# id -> (library function, runner, target kind, description); order is the list-checks order
CHECKS = {
    "firm": ("check_firm", _check_firm, "map",
             "five equivalent forms of firm nonexpansiveness on sampled pairs"),
    "lipschitz": ("estimate_lipschitz", _check_lipschitz, "map",
                  "sampled and, for affine maps, exact Lipschitz constant against a threshold"),
    "strict": ("check_strict", _check_strict, "map",
               "strict nonexpansiveness, injectivity and strict firm nonexpansiveness"),
    "cyclic_firm": ("check_cyclic_firm", _check_cyclic, "map",
                    "cyclic firm nonexpansiveness, the resolvent side of cyclic monotonicity"),
    "structure": ("classify_structure", _check_structure, "map",
                  "linear, affine, isometry and projection flags of a resolvent"),
    "banach_graph": ("check_banach_graph_inequality", _check_banach, "operator",
                     "graph inequality equivalent to the resolvent being a Banach contraction with constant beta"),
    "strong_monotonicity": ("estimate_strong_monotonicity", _check_strong, "operator",
                            "strong monotonicity constant of the graph (A - eps Id monotone)"),
    "cocoercivity": ("estimate_cocoercivity", _check_cocoercive, "operator",
                     "cocoercivity constant of the graph, the inverse-side twin of strong monotonicity"),
    "paramonotone": ("check_paramonotone", _check_paramonotone, "operator",
                     "orthogonal graph pairs force the crossed pairs into the graph"),
    "rectangular": ("rectangular_sweep", _check_rectangular, "operator",
                    "rectangularity (3* monotonicity) as a scale-sweep trend of the empirical infimum"),
    "uniform_modulus": ("estimate_uniform_modulus", _check_modulus, "operator",
                        "binned lower envelope of the uniform monotonicity modulus"),
    "duality_suite": ("run_duality_suite", _check_duality, "operator",
                      "self-dual and dual-pair properties of (A, J_A) against (A^-1, Id - J_A)"),
    "resolvent_identity": ("resolvent_identity_error", _check_resolvent_identity, "operator",
                           "J_A + J_{A^-1} = Id on sampled points"),
    "surjectivity": ("surjectivity_probe", _check_surjectivity, "map",
                     "multistart search for preimages of target points (range versus full domain)"),
    "reflected_contraction": ("analyze_reflected_contraction", _check_reflected, "operator",
                              "three equivalent conditions for 2 J_A - Id to be a Banach contraction"),
    "strong_mono_via_reflected": ("check_strong_mono_via_reflected", _check_strong_reflected, "operator",
                                  "strong monotonicity read off nonexpansiveness of eps Id + (1 + eps) N"),
    "picard": ("picard_iterate", _check_picard, "map",
               "Banach-Picard iteration trace, optional per-iteration CSV"),
    "fixed_points": ("multistart_fixed_points", _check_fixed_points, "map",
                     "multistart Picard limits: singleton evidence or empty-or-nonattracting"),
}


def list_checks_text():
    w1 = max(len(k) for k in CHECKS)
    w2 = max(len(v[0]) for v in CHECKS.values())
    return "".join(f"{cid:<{w1}}  {fn:<{w2}}  {kind:<8}  {desc}\n" for cid, (fn, _, kind, desc) in CHECKS.items())


# --------------------------------------------------------------------------
# expectations
# --------------------------------------------------------------------------


def _lookup(doc, dotted):
    cur = doc
    for part in dotted.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        elif isinstance(cur, dict) and part in cur:
            cur = cur[part]
        else:
            raise KeyError(dotted)
    return cur


def _compare(result, expect):
    problems = []
    if "verdict" in expect and result.get("verdict") != expect["verdict"]:
        problems.append(f"verdict {result.get('verdict')!r}, expected {expect['verdict']!r}")
    for name, rule in expect.get("constants", {}).items():
        val = result.get("constants", {}).get(name)
        if val is None:
            problems.append(f"constant {name!r} missing")
            continue
        if "value" in rule and abs(val - rule["value"]) > rule.get("tol", 0.0):
            problems.append(f"constant {name}={val!r}, expected {rule['value']!r} +- {rule.get('tol', 0.0)!r}")
        if "min" in rule and val < rule["min"]:
            problems.append(f"constant {name}={val!r} below {rule['min']!r}")
        if "max" in rule and val > rule["max"]:
            problems.append(f"constant {name}={val!r} above {rule['max']!r}")
    for path, want in expect.get("fields", {}).items():
        try:
            got = _lookup(result, path)
        except (KeyError, IndexError, ValueError):
            problems.append(f"field {path!r} missing")
            continue
        if got != want:
            problems.append(f"field {path}={got!r}, expected {want!r}")
    return problems


# --------------------------------------------------------------------------
# run
# --------------------------------------------------------------------------


def load_spec(path):
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise SpecError(f"{path}: not UTF-8 text ({exc})", EXIT_PARSE) from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", EXIT_PARSE) from exc
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SpecError(f"{path}: schema error at {loc}: {exc.message}") from exc
    return doc, hashlib.sha256(raw).hexdigest()


def _validate_checks(doc, registry):
    for k, c in enumerate(doc["checks"]):
        where = f"check #{k} ({c['id']})"
        if c["id"] not in CHECKS:
            raise SpecError(f"{where}: unknown check id {c['id']!r}; see 'firmmono list-checks'", EXIT_UNKNOWN_CHECK)
        if not registry.has(c["target"]):
            raise SpecError(f"{where}: target {c['target']!r} is not declared")
        if CHECKS[c["id"]][2] == "operator" and c["target"] not in registry.op_specs:
            raise SpecError(f"{where}: target {c['target']!r} must be an operator")


def _run_one(registry, k, c, defaults, base_dir, timing):
    cid = c["id"]
    _, runner, kind, _ = CHECKS[cid]
    where = f"check #{k} ({cid})"
    params = dict(defaults)
    params.update(c.get("params", {}))
    ctx = Context(registry, params, where, base_dir)
    target = registry.operator(c["target"], where) if kind == "operator" else registry.map(c["target"], where)
    start = time.perf_counter()
    result = runner(ctx, target)
    elapsed = time.perf_counter() - start
    out = {"index": k, "id": cid, "target": c["target"]}
    if "name" in c:
        out["name"] = c["name"]
    out["params"] = params
    out.update(result)
    problems = _compare(out, c.get("expect", {}))
    out["expectation"] = {"declared": c.get("expect"), "met": not problems, "problems": problems}
    if timing:
        out["timing_seconds"] = elapsed
    return _jsonable(out)


def run_spec(path, jobs=1, timing=False):
    """Execute every check of the experiment file; returns ``(exit_code, report)``."""
    path = Path(path)
    doc, digest = load_spec(path)
    return execute(doc, digest, path, jobs, timing)


def execute(doc, digest, path, jobs=1, timing=False):
    registry = Registry(doc.get("operators", {}), doc.get("maps", {}))
    _validate_checks(doc, registry)
    # build every declared object up front so reference errors surface before any check runs
    for name in registry.op_specs:
        registry.operator(name, "operators")
    for name in registry.map_specs:
        registry.map(name, "maps")
    defaults = doc.get("defaults", {})
    items = list(enumerate(doc["checks"]))
    run = lambda kc: _run_one(registry, kc[0], kc[1], defaults, path.parent, timing)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(kc) for kc in items]
    mismatches = [r["index"] for r in results if not r["expectation"]["met"]]
    report = {
        "tool": "firmmono",
        "version": __version__,
        "spec_sha256": digest,
        "spec_path": path.name,
        "description": doc.get("description", ""),
        "results": results,
        "summary": {"checks": len(results), "mismatches": mismatches},
    }
    return (EXIT_MISMATCH if mismatches else EXIT_OK), report


def render_json(report):
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(v):
    return f"{v:.12g}" if isinstance(v, float) else str(v)


def render_text(report):
    lines = [f"firmmono {report['version']}  spec {report['spec_path']}  sha256 {report['spec_sha256'][:16]}"]
    for r in report["results"]:
        status = "ok" if r["expectation"]["met"] else "MISMATCH"
        consts = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(r.get("constants", {}).items()))
        lines.append(f"[{r['index']:>3}] {r['id']:<26} {r['target']:<20} {r['verdict']:<22} {status:<8} {consts}".rstrip())
        for p in r["expectation"]["problems"]:
            lines.append(f"      - {p}")
    s = report["summary"]
    lines.append(f"{s['checks']} checks, {len(s['mismatches'])} mismatches")
    return "\n".join(lines) + "\n"


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="firmmono", description="Check firm nonexpansiveness and monotone operator properties.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="execute an experiment file")
    r.add_argument("spec", help="experiment JSON file")
    r.add_argument("--out", help="report path (default: the file's output.path, else stdout)")
    r.add_argument("--format", choices=["json", "text"], help="report format (default json)")
    r.add_argument("--jobs", type=int, default=1, help="checks run concurrently (default 1)")
    r.add_argument("--timing", action="store_true", help="add per-check wall time to the report")
    sub.add_parser("list-checks", help="list check ids")
    sub.add_parser("version", help="print the version")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "version":
        print(f"firmmono {__version__}")
        return EXIT_OK
    if args.command == "list-checks":
        sys.stdout.write(list_checks_text())
        return EXIT_OK
    if args.jobs < 1:
        print("firmmono: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        doc, digest = load_spec(args.spec)
        code, report = execute(doc, digest, Path(args.spec), args.jobs, args.timing)
    except SpecError as exc:
        print(f"firmmono: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"firmmono: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DimensionError as exc:
        print(f"firmmono: dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except MonotonicityError as exc:
        print(f"firmmono: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (ConvergenceError, SingularMatrixError, FloatingPointError) as exc:
        print(f"firmmono: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out_cfg = doc.get("output", {})
    fmt = args.format or out_cfg.get("format", "json")
    text = render_json(report) if fmt == "json" else render_text(report)
    out = args.out
    if out is None and "path" in out_cfg:
        out = Path(args.spec).parent / out_cfg["path"]
    if out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(out, text)
    if code == EXIT_MISMATCH:
        print(f"firmmono: {len(report['summary']['mismatches'])} check(s) did not meet expectations: "
              f"{report['summary']['mismatches']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
