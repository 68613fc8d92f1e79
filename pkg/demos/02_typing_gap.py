"""Walkthrough: why annotations matter.

Two expressions can draw the same diagram while only one of them admits
a guardedness derivation.  And a diagram can satisfy the geometric
condition while no expression inducing it type-checks, once boxes mix
guarded and unguarded gates.  These are the two directions in which
expression-level typing and diagram-level geometry come apart.
"""

from gtc import (
    check_annotated,
    diagram_iso,
    elaborate,
    geometric_check,
    print_expr,
)
from gtc.counterexamples import (
    equal_morphisms_different_typing,
    find_untypable_diagram,
)

sigs, traced, composite, claim = equal_morphisms_different_typing()
print("traced form:    ", print_expr(traced))
print("composite form: ", print_expr(composite))
print("same diagram?   ", diagram_iso(elaborate(traced), elaborate(composite)))
print("composite checks?", check_annotated(composite, claim).ok)
res = check_annotated(traced, claim)
print("traced checks?  ", res.ok, "- witness:", res.witness)

print("\nsearching two-box diagrams for the converse gap...")
witness = find_untypable_diagram()
print("found a diagram with boxes:")
for sig in witness.diagram.boxes:
    print("  ", sig, f"({sig.kind})")
print("geometric condition holds?", geometric_check(witness.diagram, witness.claim))
print("ways of opening its loop, and whether any re-checks:")
for cut, ok in witness.cut_reports:
    print("   cut", [f"{s}->{t}" for s, t in cut], "->", "passes" if ok else "fails")
print("so no annotated expression induces it.")
