"""Command-line entry point.

Subcommands::

    gtc check FILE --name N --claim 'A|B -> C|D' [--dot OUT] [--json OUT]
    gtc synthesize DIAGRAM.json [--claim 'A|B -> C|D'] [--cert OUT]
    gtc eval FILE --name N --model M --bindings B.json [--inputs IN.json]
    gtc suite [--models ...] [--seeds ...] [--out REPORT.jsonl] [--jobs N]

Exit codes: 0 success, 1 a check or hypothesis failed (witness on
stdout), 2 malformed input.  Data goes to stdout, errors to stderr.
The environment variable GTC_SEED overrides the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .diagrams import DiagramError, elaborate, export_dot, export_json, import_json
from .expressions import ParseError, TypingError, parse_source, print_expr
from .guardedness import check_annotated
from .models import MODEL_NAMES, EvalError, eval_expr
from .models.io import load_bindings
from .signatures import SignatureError, parse_claim
from .synthesis import SynthesisError, synthesize

PARSE_ERRORS = (ParseError, SignatureError, TypingError, DiagramError)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gtc")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="verify a guardedness claim")
    p_check.add_argument("file")
    p_check.add_argument("--name", required=True, help="binding to check")
    p_check.add_argument("--claim", required=True, help="claim 'A|B -> C|D'")
    p_check.add_argument("--dot", help="write the elaborated diagram as DOT")
    p_check.add_argument("--json", dest="json_out", help="write the diagram as JSON")

    p_syn = sub.add_parser("synthesize", help="diagram JSON to traced expression")
    p_syn.add_argument("diagram")
    p_syn.add_argument(
        "--claim",
        help="claim 'A|B -> C|D'; defaults to the diagram's boundary decorations",
    )
    p_syn.add_argument("--cert", help="write the checker certificate here")

    p_eval = sub.add_parser("eval", help="evaluate an expression in a model")
    p_eval.add_argument("file")
    p_eval.add_argument("--name", required=True)
    p_eval.add_argument("--model", required=True, choices=MODEL_NAMES)
    p_eval.add_argument("--bindings", required=True)
    p_eval.add_argument("--claim", help="claim to check before evaluating")
    p_eval.add_argument("--inputs", help="JSON file with an input point")
    p_eval.add_argument("--tol", type=float, default=1e-12)

    p_suite = sub.add_parser("suite", help="run the axiom and law suites")
    p_suite.add_argument("--models", nargs="*", default=list(MODEL_NAMES))
    p_suite.add_argument("--seeds", nargs="*", type=int, default=None)
    p_suite.add_argument("--per-axiom", type=int, default=50)
    p_suite.add_argument("--tol", type=float, default=1e-9)
    p_suite.add_argument("--jobs", type=int, default=1)
    p_suite.add_argument("--out", help="write the JSON-lines report here")

    args = parser.parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args)
        if args.command == "synthesize":
            return cmd_synthesize(args)
        if args.command == "eval":
            return cmd_eval(args)
        return cmd_suite(args)
    except PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EvalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _load_expr(path: str, name: str):
    with open(path, encoding="utf-8") as fh:
        src = parse_source(fh.read())
    if name not in src.exprs:
        raise ParseError(f"no binding named {name!r} in {path}")
    return src, src.exprs[name]


def cmd_check(args) -> int:
    src, expr = _load_expr(args.file, args.name)
    claim = parse_claim(args.claim, expr.dom, expr.cod)
    result = check_annotated(expr, claim)
    diagram = elaborate(expr, claim)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(export_dot(diagram))
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(export_json(diagram))
    print(json.dumps(result.to_json(), indent=2))
    return 0 if result.ok else 1


def cmd_synthesize(args) -> int:
    with open(args.diagram, encoding="utf-8") as fh:
        diagram = import_json(fh.read())
    claim = (
        parse_claim(args.claim, diagram.dom, diagram.cod)
        if args.claim
        else diagram.boundary_claim()
    )
    try:
        expr = synthesize(diagram, claim)
    except SynthesisError as exc:
        print(
            json.dumps({"ok": False, "reason": exc.reason, "witness": exc.witness}),
        )
        return 1
    result = check_annotated(expr, claim)
    lines = [str(sig) for sig in dict.fromkeys(diagram.boxes)]
    lines.append(f"let synthesized = {print_expr(expr)}")
    print("\n".join(lines))
    if args.cert:
        with open(args.cert, "w", encoding="utf-8") as fh:
            json.dump(result.to_json(), fh, indent=2)
    return 0 if result.ok else 1


def cmd_eval(args) -> int:
    src, expr = _load_expr(args.file, args.name)
    if args.claim:
        claim = parse_claim(args.claim, expr.dom, expr.cod)
        res = check_annotated(expr, claim)
        if not res.ok:
            print(json.dumps(res.to_json(), indent=2))
            return 1
    with open(args.bindings, encoding="utf-8") as fh:
        model, boxes = load_bindings(json.load(fh), src.sigs)
    if model.name != args.model:
        raise EvalError(
            f"bindings file is for model {model.name!r}, not {args.model!r}"
        )
    value = eval_expr(expr, model, boxes, tol=args.tol)
    if args.inputs:
        with open(args.inputs, encoding="utf-8") as fh:
            point = json.load(fh)
        print(json.dumps(_apply(model.name, value, point)))
    else:
        print(json.dumps(_render(model.name, value)))
    return 0


def _apply(model_name: str, value, point):
    if model_name == "finset":
        gate, elem = point["gate"], point["elem"]
        out = value.table[(int(gate), elem)]
        return {"gate": out[0], "elem": out[1]}
    if model_name == "metric":
        blocks = [np.asarray(b, dtype=float) for b in point["blocks"]]
        ys = value.apply([b.reshape(1, -1) for b in blocks])
        return {"blocks": [y[0].tolist() for y in ys]}
    if model_name == "hilbert":
        vec = np.asarray(point["vector"], dtype=float)
        return {"vector": (value.mat @ vec).tolist()}
    if model_name == "tot":
        stages = [tuple(s.split("|")) if s else () for s in point["stages"]]
        out = [value.maps[n][stages[n]] for n in range(len(value.maps))]
        return {"stages": ["|".join(t) for t in out]}
    if model_name == "flat":
        x = tuple(point["elems"].split("|")) if point["elems"] else ()
        return {"elems": "|".join(value.table[x])}
    raise EvalError(f"unknown model {model_name!r}")


def _render(model_name: str, value):
    if model_name == "finset":
        return {
            "table": {f"{g}:{e}": f"{g2}:{e2}" for (g, e), (g2, e2) in value.table.items()}
        }
    if model_name == "metric":
        return {
            "in_dims": list(value.in_dims),
            "out_dims": list(value.out_dims),
            "lip": np.asarray(value.lip).tolist(),
        }
    if model_name == "hilbert":
        return {"matrix": value.mat.tolist()}
    if model_name == "tot":
        return {
            "stages": [
                {"|".join(k): "|".join(v) for k, v in stage.items()}
                for stage in value.maps
            ]
        }
    if model_name == "flat":
        return {"table": {"|".join(k): "|".join(v) for k, v in value.table.items()}}
    raise EvalError(f"unknown model {model_name!r}")


def cmd_suite(args) -> int:
    from .axioms import run_axiom_suite
    from .laws import (
        finset_conway_suite,
        flat_transfer_suite,
        law_implication_report,
        tot_conway_suite,
    )

    seeds = args.seeds
    if seeds is None:
        seeds = [int(os.environ.get("GTC_SEED", "0"))]
    header, reports = run_axiom_suite(
        models=tuple(args.models),
        seeds=tuple(seeds),
        per_axiom=args.per_axiom,
        tol=args.tol,
        jobs=args.jobs,
    )
    lines = [json.dumps(header)]
    failures = 0
    for rep in reports:
        lines.append(json.dumps(rep))
        if rep["verdict"] != "pass":
            failures += 1

    law_blocks = {}
    if "finset" in args.models:
        suite = finset_conway_suite()
        law_blocks["finset_laws"] = suite
        law_blocks["finset_implications"] = law_implication_report(suite)
    if "tot" in args.models:
        law_blocks["tot_laws"] = tot_conway_suite()
    if "flat" in args.models:
        law_blocks["flat_laws"] = flat_transfer_suite()
    law_blocks["structural_geometric"] = _oracle_block(seeds[0])
    law_blocks["synthesis_round_trip"] = _synthesis_block(seeds[0])
    for name, block in law_blocks.items():
        lines.append(json.dumps({"kind": name, **block}))
        failures += _count_failures(block)

    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    summary = {
        "kind": "summary",
        "checks": len(reports),
        "failures": failures,
    }
    print(json.dumps(summary))
    return 0 if failures == 0 else 1


def _oracle_block(seed: int, n_expr: int = 100) -> dict:
    """Sampled agreement of the structural and geometric deciders."""
    from itertools import product as iproduct

    from .generators import rand_trace_free_expr
    from .guardedness import claim_derivable, derivable_splits
    from .signatures import mk_split

    rng = np.random.default_rng([seed, 91])
    checked = failures = 0
    for _ in range(n_expr):
        e = rand_trace_free_expr(rng, max_boxes=6)
        d = elaborate(e)
        maxes = derivable_splits(e)
        n_in, n_out = len(e.dom), len(e.cod)
        for a_bits in iproduct([0, 1], repeat=n_in):
            for d_bits in iproduct([0, 1], repeat=n_out):
                claim = mk_split(
                    n_in,
                    n_out,
                    {i for i in range(n_in) if a_bits[i]},
                    {j for j in range(n_out) if d_bits[j]},
                )
                from .guardedness import geometric_check

                checked += 1
                if claim_derivable(maxes, claim) != geometric_check(d, claim):
                    failures += 1
    return {"claims": {"instances": checked, "failures": failures}}


def _synthesis_block(seed: int, n_good: int = 50, n_bad: int = 10) -> dict:
    from .diagrams import diagram_iso
    from .generators import rand_guarded_diagram
    from .guardedness import check_annotated

    rng = np.random.default_rng([seed, 92])
    good = bad = good_fail = bad_fail = 0
    from .synthesis import synthesis_preconditions

    while good < n_good or bad < n_bad:
        d, claim = rand_guarded_diagram(rng)
        try:
            synthesis_preconditions(d, claim)
        except SynthesisError as exc:
            if bad < n_bad:
                bad += 1
                if exc.witness is None:
                    bad_fail += 1
            continue
        if good >= n_good:
            continue
        good += 1
        e = synthesize(d, claim)
        if not check_annotated(e, claim).ok or not diagram_iso(elaborate(e, claim), d):
            good_fail += 1
    return {
        "round_trips": {"instances": good, "failures": good_fail},
        "witnessed_violations": {"instances": bad, "failures": bad_fail},
    }


def _count_failures(block: dict) -> int:
    total = 0
    for v in block.values():
        if isinstance(v, dict) and "failures" in v:
            total += v["failures"]
        elif isinstance(v, bool) and not v:
            total += 1
    return total


if __name__ == "__main__":
    sys.exit(main())
