"""Walkthrough: one traced expression, five semantics.

The same feedback loop means five different things: a dataflow that
never actually cycles (tagged finite sets), a contraction solved by
iteration (metric blocks), a stagewise recurrence one step behind
(stage-indexed sets), a partial trace (matrices), and a one-step
constant fixpoint (flat posets).
"""

import json

import numpy as np

from gtc import check_annotated, parse_claim, parse_source
from gtc.models import eval_expr
from gtc.models.io import load_bindings

SOURCE = """
box step : P*U | I -> U | U
let solved = tr[U: P|I -> U|I]{ step }
"""

src = parse_source(SOURCE)
expr = src.exprs["solved"]
claim = parse_claim("P|I -> U|I", expr.dom, expr.cod)
assert check_annotated(expr, claim).ok

# metric: step(p, u) = ((p+u)/2, (p+u)/2); the loop settles at u = p
metric = {
    "model": "metric",
    "objects": {"P": 1, "U": 1},
    "boxes": {
        "step": {
            "kind": "affine",
            "weight": [[0.5, 0.5], [0.5, 0.5]],
            "offset": [0.0, 0.0],
        }
    },
}
model, boxes = load_bindings(json.dumps(metric), src.sigs)
val = eval_expr(expr, model, boxes, tol=1e-12)
out = val.apply([np.array([[3.0]])])
print("metric: fixpoint of u = (p+u)/2 at p=3 ->", float(out[0][0, 0]))

# finset: promised gates are unreachable, so the loop is dead data flow
finset = {
    "model": "finset",
    "objects": {"P": ["p0", "p1"], "U": ["u0"]},
    "boxes": {
        "step": {
            "table": {
                "0:p0": "0:u0",
                "0:p1": "0:u0",
                "1:u0": "0:u0",
            }
        }
    },
}
model, boxes = load_bindings(json.dumps(finset), src.sigs)
val = eval_expr(expr, model, boxes)
print("finset: traced table ->", {f"{g}:{e}": f"{g2}:{e2}" for (g, e), (g2, e2) in val.table.items()})

# hilbert: the loop is a partial trace; profile P x U -> U x U needs a 4x2 matrix
hilbert = {
    "model": "hilbert",
    "objects": {"P": 1, "U": 2},
    "boxes": {
        "step": {
            "matrix": [
                [1.0, 0.0],
                [0.0, 1.0],
                [0.3, 0.0],
                [0.0, 0.3],
            ]
        }
    },
}
model, boxes = load_bindings(json.dumps(hilbert), src.sigs)
val = eval_expr(expr, model, boxes)
print("hilbert: traced matrix ->", val.mat.tolist())

# flat posets: promised outputs are constant in promised inputs
flatb = {
    "model": "flat",
    "objects": {"P": {"elements": ["lo", "hi"]}, "U": {"elements": ["s"]}},
    "boxes": {
        "step": {
            "table": {"lo|s": "s|s", "hi|s": "s|s"}
        }
    },
}
model, boxes = load_bindings(json.dumps(flatb), src.sigs)
val = eval_expr(expr, model, boxes)
print("flat: traced table ->", {"|".join(k): "|".join(v) for k, v in val.table.items()})
