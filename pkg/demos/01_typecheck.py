"""Walkthrough: declaring boxes, making claims, and what the checker sees.

A box declares which inputs it can absorb unguarded (left of the bar)
and which outputs it promises to guard (right of the bar).  A claim
about a whole expression has the same shape, and holds exactly when
every path from a claimed-unguarded input to a claimed-guarded output
crosses some box from an unguarded input gate to a guarded output gate.
"""

from gtc import (
    check_annotated,
    derivable_splits,
    elaborate,
    export_dot,
    geometric_check,
    parse_claim,
    parse_source,
)

SOURCE = """
# A guard: absorbs X unguarded, promises its U output.
box produce : X | I -> I | U
# A consumer: wants its input already guarded, promises nothing.
box consume : I | U -> Y | I
let pipeline = produce ; consume
"""

src = parse_source(SOURCE)
pipeline = src.exprs["pipeline"]
claim = parse_claim("X|I -> I|Y", pipeline.dom, pipeline.cod)

print("expression:", "produce ; consume", "with profile", pipeline.dom, "->", pipeline.cod)
result = check_annotated(pipeline, claim)
print("claim X|I -> I|Y accepted?", result.ok)

print("\nall maximal derivable claims of the pipeline:")
for a, d in sorted(derivable_splits(pipeline), key=str):
    print("  unguarded inputs", sorted(a), "guarded outputs", sorted(d))

diagram = elaborate(pipeline, claim)
print("\ngeometric view agrees?", geometric_check(diagram, claim))
print("\nDOT rendering:\n")
print(export_dot(diagram))
