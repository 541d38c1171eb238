"""Command-line front end.

Every invocation prints one JSON document on stdout whose first key is
``status`` (ok, violation, infeasible or budget-exhausted). Rationals are
strings ``"n/d"``. Exit code 0 for ok, 1 for the expected negative outcomes,
2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Any, Optional

from . import couplings as cp
from .clopen import ClopenSet, DepthTooSmall, boolean_op
from .exact import format_rational, parse_rational, pow2
from .layerwise import (
    CauchyBitApprox,
    agreement_defect,
    bit_view,
    combine_bits,
    defect_test,
    evaluate,
    from_machine,
    from_total,
    to_machine,
)
from .measures import DepthExceeded, MeasureSpec, bernoulli, load_explicit, table, uniform
from .mltests import (
    IncompatibleBounds,
    StagedTest,
    check_stage_bounds,
    combine_diagonal,
    constant_prefix_test,
    deficiency_lower_bound,
    empty_test,
    full_test,
)
from .pushforward import closed_image_complement, image_mass, pullback_test
from .showcase import (
    evenodd_cauchy,
    evenodd_split,
    identity_map,
    paths_relation,
    survival_prob,
    threshold_map,
    threshold_total,
    tree_code_measure,
    tree_dist_direct,
    tree_dist_percolation,
    tree_dist_percolation_bracket,
    tree_pruning_map,
)

EXIT = {"ok": 0, "violation": 1, "infeasible": 1, "budget-exhausted": 1}
DEFAULT_BUDGET = 10**6
ANTICHAIN_LIMIT = 4096


class UsageError(ValueError):
    pass


# argument parsing helpers ----------------------------------------------------

def max_budget() -> int:
    raw = os.environ.get("CANTORLAB_MAX_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"CANTORLAB_MAX_BUDGET must be an integer, got {raw!r}")
    if value < 0:
        raise UsageError("CANTORLAB_MAX_BUDGET must be non-negative")
    return value


def rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def bitstring(text: str) -> str:
    if text in ("ε", "-"):
        return ""
    if any(c not in "01" for c in text):
        raise argparse.ArgumentTypeError(f"not a binary string: {text!r}")
    return text


def clopen_arg(text: str) -> ClopenSet:
    """Comma-separated strings; ``ε`` is the empty string, ``{}`` the empty set."""
    text = text.strip()
    if text in ("", "{}"):
        return ClopenSet.empty()
    return ClopenSet.from_strings(bitstring(s.strip()) for s in text.split(","))


def measure_arg(text: str) -> MeasureSpec:
    if text == "uniform":
        return uniform()
    if text == "table":
        return table()
    if text.startswith("bernoulli:"):
        try:
            return bernoulli(parse_rational(text.split(":", 1)[1]))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    if text.startswith("treecode:"):
        try:
            return tree_code_measure(int(text.split(":", 1)[1]))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    if text.startswith("explicit@"):
        try:
            return load_explicit(text.split("@", 1)[1])
        except (OSError, ValueError) as exc:
            raise argparse.ArgumentTypeError(str(exc))
    raise argparse.ArgumentTypeError(f"unknown measure {text!r} (bernoulli:p, uniform, table, treecode:n, explicit@path)")


def map_arg(text: str) -> CauchyBitApprox:
    if text == "identity":
        return identity_map()
    if text == "split":
        return evenodd_cauchy()
    if text == "tree":
        return tree_pruning_map()
    if text.startswith("threshold:"):
        try:
            return threshold_map(parse_rational(text.split(":", 1)[1]))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    raise argparse.ArgumentTypeError(f"unknown map {text!r} (identity, split, threshold:θ, tree)")


def test_arg(text: str) -> StagedTest:
    table_ = {"empty": empty_test, "full": full_test, "zeros": lambda: constant_prefix_test("0"),
              "ones": lambda: constant_prefix_test("1")}
    if text in table_:
        return table_[text]()
    raise argparse.ArgumentTypeError(f"unknown test {text!r} (empty, full, zeros, ones)")


def relation_arg(text: str) -> cp.Relation:
    if text == "paths":
        return paths_relation()
    if text in cp.BUILTIN:
        return cp.BUILTIN[text]()
    if text.startswith("@"):
        try:
            return cp.load_relation(text[1:])
        except (OSError, ValueError) as exc:
            raise argparse.ArgumentTypeError(str(exc))
    raise argparse.ArgumentTypeError(f"unknown relation {text!r} (domination, paths, equality, full, empty, @path)")


def nonneg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def positive(text: str) -> int:
    value = nonneg(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


# serialization -----------------------------------------------------------------

def q(x: Fraction) -> str:
    return format_rational(x)


def set_doc(c: ClopenSet) -> Any:
    try:
        return list(c.antichain(limit=ANTICHAIN_LIMIT))
    except ValueError:
        return {"nodes": c.node_count, "depth": c.depth}


def result(status: str, **payload) -> dict:
    doc = {"status": status}
    doc.update(payload)
    return doc


def summable(c: CauchyBitApprox) -> CauchyBitApprox:
    if c.total_weight is not None:
        return c
    return combine_bits(lambda k: bit_view(c, k), name=f"combined({c.name})")


# commands -------------------------------------------------------------------------

def cmd_measure(a) -> dict:
    m = a.measure
    if a.action == "mass":
        return result("ok", value=q(m.mass(a.prefix)))
    if a.action == "clopen-mass":
        return result("ok", value=q(m.clopen_mass(a.set)))
    return result("ok", value=q(m.distance(a.a, a.b)))


def cmd_clopen(a) -> dict:
    if a.action == "op":
        if a.kind == "complement":
            if a.b is not None:
                raise UsageError("complement takes only --a")
            out = boolean_op("complement", a.a)
        else:
            if a.b is None:
                raise UsageError(f"{a.kind} needs --b")
            out = boolean_op(a.kind, a.a, a.b)
        return result("ok", set=set_doc(out))
    return result("ok", strings=a.set.refine(a.depth))


def _report_doc(rep) -> dict:
    return result(
        "ok" if rep.ok else "violation",
        violations=[{"kind": v.kind, "i": v.i, "t": v.t, "detail": v.detail} for v in rep.violations],
        worst_ratio=q(rep.worst_ratio()),
    )


def cmd_test(a) -> dict:
    if a.action == "check":
        return _report_doc(check_stage_bounds(a.test[0], a.measure, a.max_i, a.max_t))
    if a.action == "combine":
        combined = combine_diagonal(a.test)
        doc = _report_doc(check_stage_bounds(combined, a.measure, a.max_i, a.max_t))
        doc["masses"] = [q(a.measure.clopen_mass(combined.stage(i, a.max_t))) for i in range(1, a.max_i + 1)]
        return doc
    return result("ok", value=deficiency_lower_bound(a.test[0], a.prefix, a.time))


def cmd_map(a) -> dict:
    c = a.map
    if a.action == "eval":
        r = evaluate(c, a.input, a.stage, a.bits)
        return result("ok", bits=[b if b is not None else "undetermined" for b in r.bits], certificate=q(r.certificate))
    if a.action == "defect":
        d = agreement_defect(c, a.bit, a.level, a.horizon)
        return result("ok", set=set_doc(d), mass=q(c.base_measure.clopen_mass(d)), bound=q(4 * pow2(-a.level)))
    # convert
    if a.total:
        budget = min(a.budget if a.budget is not None else max_budget(), max_budget())
        f = evenodd_split() if a.total == "split" else threshold_total(parse_rational(a.total.split(":", 1)[1]))
        res = from_total(f, c.base_measure if a.measure is None else a.measure, a.bit, a.level, budget)
        return result(res.status, set=set_doc(res.clopen), deficit=q(res.deficit), steps=res.steps)
    mm = to_machine(c)
    back = from_machine(mm, a.bit, a.level)
    dist = c.base_measure.distance(back, c.approx(a.bit, a.level))
    bound = 4 * pow2(-a.level)
    return result(
        "ok" if dist <= bound else "violation",
        modulus=mm.modulus(a.bit, pow2(-a.level)),
        set=set_doc(back),
        distance=q(dist),
        bound=q(bound),
    )


def cmd_image(a) -> dict:
    c = a.map
    if a.action == "mass":
        r = image_mass(c, a.prefix, a.eps)
        return result("ok", value=q(r.value), error_bound=q(r.error_bound), stage_used=r.stage_used)
    if a.action == "pullback":
        cm = summable(c)
        pb = pullback_test(cm, defect_test(cm), a.test, audit_levels=a.max_i, audit_time=a.max_t)
        doc = _report_doc(check_stage_bounds(pb, cm.base_measure, a.max_i, a.max_t))
        doc["shift"] = pb.shift
        return doc
    r = closed_image_complement(c, a.r_complement, a.stage, a.output_depth, a.input_depth)
    return result("ok", depth_searched=r.depth_searched, cylinders=list(r.cylinders))


def _matrix_doc(mtx) -> list:
    return [{"u": u, "v": v, "mass": q(w)} for (u, v), w in sorted(mtx.entries.items())]


def cmd_coupling(a) -> dict:
    r = a.relation
    if a.action == "check":
        rep = cp.check_conditions(r, a.depth)
        return result(
            "ok" if rep.ok else "violation",
            violations=[{"kind": v.kind, "depth": v.depth, "u": v.u, "v": v.v} for v in rep.violations],
        )
    if a.action == "solve":
        if a.q is None:
            raise UsageError("coupling solve needs --q")
        out = cp.solve_coupling(a.p, a.q, r, a.depth)
        if isinstance(out, cp.CutCertificate):
            return result(
                "infeasible",
                cut={
                    "input_side": list(out.input_side),
                    "related_side": list(out.related_side),
                    "p_mass": q(out.p_mass),
                    "q_mass": q(out.q_mass),
                },
            )
        return result("ok", depth=out.depth, entries=_matrix_doc(out))
    try:
        w = cp.class_witness(a.p, r, a.depth)
    except cp.TotalityViolation as exc:
        return result("violation", detail=str(exc))
    return result("ok", depth=w.depth, entries=_matrix_doc(w))


def _shape_doc(dist: dict, key) -> list:
    return [
        {"shape": s.label(), "nodes": s.sorted_nodes(), **key(v)}
        for s, v in sorted(dist.items(), key=lambda kv: (len(kv[0].nodes), kv[0].sorted_nodes()))
    ]


def cmd_tree(a) -> dict:
    if a.action == "pn":
        return result("ok", value=q(survival_prob(a.n)))
    if a.action == "dist":
        if a.process == "direct":
            dist = tree_dist_direct(a.k)
        else:
            dist = tree_dist_percolation(a.k, a.conditioned)
        return result("ok", shapes=_shape_doc(dist, lambda v: {"mass": q(v)}))
    if a.horizon < a.k:
        raise UsageError("--horizon must be at least --k")
    dist = tree_dist_percolation_bracket(a.k, a.horizon, a.conditioned)
    return result("ok", shapes=_shape_doc(dist, lambda iv: {"lo": q(iv.lo), "hi": q(iv.hi)}))


def cmd_examples(a) -> dict:
    if a.action == "threshold":
        c = threshold_map(a.theta)
        r = image_mass(c, a.prefix, a.eps)
        target = a.theta ** a.prefix.count("1") * (1 - a.theta) ** a.prefix.count("0")
        ok = abs(r.value - target) <= r.error_bound
        return result(
            "ok" if ok else "violation",
            value=q(r.value),
            error_bound=q(r.error_bound),
            bernoulli=q(target),
            stage_used=r.stage_used,
        )
    return result("ok", output=evenodd_split().emit(a.input))


# parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="cantorlab", description=__doc__.split("\n")[0], allow_abbrev=False)
    top.add_argument("--pretty", action="store_true", help="human-readable table instead of JSON")
    groups = top.add_subparsers(dest="group", required=True)

    def sub(group: str, helptext: str):
        g = groups.add_parser(group, help=helptext, allow_abbrev=False)
        g.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS)
        return g.add_subparsers(dest="action", required=True)

    def leaf(parent, name: str):
        p = parent.add_parser(name, allow_abbrev=False)
        p.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS)
        return p

    s = sub("measure", "cylinder and clopen masses")
    p = leaf(s, "mass")
    p.add_argument("--measure", type=measure_arg, required=True)
    p.add_argument("--prefix", type=bitstring, required=True)
    p = leaf(s, "clopen-mass")
    p.add_argument("--measure", type=measure_arg, required=True)
    p.add_argument("--set", type=clopen_arg, required=True)
    p = leaf(s, "distance")
    p.add_argument("--measure", type=measure_arg, required=True)
    p.add_argument("--a", type=clopen_arg, required=True)
    p.add_argument("--b", type=clopen_arg, required=True)

    s = sub("clopen", "clopen-set algebra")
    p = leaf(s, "op")
    p.add_argument("--kind", choices=["union", "intersection", "complement", "symmetric-difference"], required=True)
    p.add_argument("--a", type=clopen_arg, required=True)
    p.add_argument("--b", type=clopen_arg)
    p = leaf(s, "refine")
    p.add_argument("--set", type=clopen_arg, required=True)
    p.add_argument("--depth", type=nonneg, required=True)

    s = sub("test", "staged tests")
    for name in ("check", "combine"):
        p = leaf(s, name)
        p.add_argument("--test", type=test_arg, action="append", required=True)
        p.add_argument("--measure", type=measure_arg, default=uniform())
        p.add_argument("--max-i", type=positive, default=6)
        p.add_argument("--max-t", type=nonneg, default=20)
    p = leaf(s, "deficiency")
    p.add_argument("--test", type=test_arg, action="append", required=True)
    p.add_argument("--prefix", type=bitstring, required=True)
    p.add_argument("--time", type=nonneg, required=True)

    s = sub("map", "layerwise maps")
    p = leaf(s, "eval")
    p.add_argument("--map", type=map_arg, required=True)
    p.add_argument("--input", type=bitstring, required=True)
    p.add_argument("--stage", type=nonneg, required=True)
    p.add_argument("--bits", type=positive, default=1)
    p = leaf(s, "defect")
    p.add_argument("--map", type=map_arg, required=True)
    p.add_argument("--bit", type=nonneg, default=0)
    p.add_argument("--level", type=nonneg, required=True)
    p.add_argument("--horizon", type=nonneg, required=True)
    p = leaf(s, "convert")
    p.add_argument("--map", type=map_arg, default=None)
    p.add_argument("--total", default=None, help="split or threshold:θ, enumerated as a total map")
    p.add_argument("--measure", type=measure_arg, default=None)
    p.add_argument("--bit", type=nonneg, default=0)
    p.add_argument("--level", type=nonneg, required=True)
    p.add_argument("--budget", type=nonneg, default=None)

    s = sub("image", "image measures and pulled-back tests")
    p = leaf(s, "mass")
    p.add_argument("--map", type=map_arg, required=True)
    p.add_argument("--prefix", type=bitstring, required=True)
    p.add_argument("--eps", type=rational, required=True)
    p = leaf(s, "pullback")
    p.add_argument("--map", type=map_arg, required=True)
    p.add_argument("--test", type=test_arg, required=True)
    p.add_argument("--max-i", type=positive, default=5)
    p.add_argument("--max-t", type=nonneg, default=20)
    p = leaf(s, "complement")
    p.add_argument("--map", type=map_arg, required=True)
    p.add_argument("--r-complement", type=clopen_arg, required=True)
    p.add_argument("--stage", type=nonneg, required=True)
    p.add_argument("--output-depth", type=nonneg, required=True)
    p.add_argument("--input-depth", type=nonneg, required=True)

    s = sub("coupling", "relations and coupling feasibility")
    p = leaf(s, "check")
    p.add_argument("--relation", type=relation_arg, required=True)
    p.add_argument("--depth", type=nonneg, required=True)
    for name in ("solve", "witness"):
        p = leaf(s, name)
        p.add_argument("--p", type=measure_arg, required=True)
        if name == "solve":
            p.add_argument("--q", type=measure_arg, required=True)
        p.add_argument("--relation", type=relation_arg, required=True)
        p.add_argument("--depth", type=nonneg, required=True)

    s = sub("tree", "random trees and survival")
    p = leaf(s, "pn")
    p.add_argument("--n", type=nonneg, required=True)
    p = leaf(s, "dist")
    p.add_argument("--k", type=positive, required=True)
    p.add_argument("--process", choices=["direct", "percolation"], default="direct")
    p.add_argument("--conditioned", action="store_true")
    p = leaf(s, "bracket")
    p.add_argument("--k", type=positive, required=True)
    p.add_argument("--horizon", type=nonneg, required=True)
    p.add_argument("--conditioned", action="store_true")

    s = sub("examples", "showcase shortcuts")
    p = leaf(s, "threshold")
    p.add_argument("--theta", type=rational, required=True)
    p.add_argument("--prefix", type=bitstring, default="1")
    p.add_argument("--eps", type=rational, default=Fraction(1, 1024))
    p = leaf(s, "split")
    p.add_argument("--input", type=bitstring, required=True)
    return top


COMMANDS = {
    "measure": cmd_measure,
    "clopen": cmd_clopen,
    "test": cmd_test,
    "map": cmd_map,
    "image": cmd_image,
    "coupling": cmd_coupling,
    "tree": cmd_tree,
    "examples": cmd_examples,
}


def render_pretty(doc: dict) -> str:
    lines = []
    for key, value in doc.items():
        if isinstance(value, list) and value and isinstance(value[0], dict):
            cols = list(value[0].keys())
            rows = [[_cell(r.get(c)) for c in cols] for r in value]
            widths = [max(len(c), *(len(r[i]) for r in rows)) for i, c in enumerate(cols)]
            lines.append(f"{key}:")
            lines.append("  " + "  ".join(c.ljust(w) for c, w in zip(cols, widths)))
            for r in rows:
                lines.append("  " + "  ".join(x.ljust(w) for x, w in zip(r, widths)))
        else:
            lines.append(f"{key}: {_cell(value)}")
    return "\n".join(lines)


def _cell(value) -> str:
    if isinstance(value, list):
        return " ".join(_cell(v) for v in value) if value else "-"
    if isinstance(value, dict):
        return " ".join(f"{k}={_cell(v)}" for k, v in value.items())
    if value == "":
        return "ε"
    return str(value)


def run(argv: Optional[list[str]] = None) -> tuple[dict, int]:
    """Parse and execute; returns the document and the exit code.

    argparse itself exits with code 2 on malformed command lines.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.group == "map" and args.action == "convert" and args.map is None:
        if args.total is None:
            parser.error("map convert needs --map or --total")
        args.map = evenodd_cauchy() if args.total == "split" else threshold_map(parse_rational(args.total.split(":", 1)[1]))
        if args.total == "split" and args.measure is None:
            args.measure = uniform()
    try:
        doc = COMMANDS[args.group](args)
    except (UsageError, DepthTooSmall, DepthExceeded, IncompatibleBounds, IndexError) as exc:
        parser.error(str(exc))
    return doc, EXIT[doc["status"]]


def main(argv: Optional[list[str]] = None) -> int:
    try:
        parser_args = argv if argv is not None else sys.argv[1:]
        doc, code = run(parser_args)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else 2
    pretty = "--pretty" in (argv if argv is not None else sys.argv[1:])
    if pretty:
        print(render_pretty(doc))
    else:
        print(json.dumps(doc, separators=(",", ":"), ensure_ascii=False))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
