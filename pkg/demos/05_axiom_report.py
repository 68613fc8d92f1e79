"""Walkthrough: the feedback-axiom harness.

Each axiom instance is a pair of expressions that both type-check under
one claim; the harness instantiates the boxes in every model and
compares denotations, exactly for the set-like models and within 1e-9
for the numeric ones.  The law suites run the iteration/recursion
equations exhaustively over tiny carriers.
"""

import json

from gtc.axioms import run_axiom_suite
from gtc.laws import finset_conway_suite, law_implication_report

header, reports = run_axiom_suite(per_axiom=5, seeds=(7,))
print("header:", json.dumps(header))
by_axiom = {}
for rep in reports:
    key = (rep["axiom"], rep["model"])
    cur = by_axiom.setdefault(key, {"n": 0, "worst": 0.0, "fail": 0})
    cur["n"] += 1
    cur["worst"] = max(cur["worst"], rep["max_dev"])
    cur["fail"] += rep["verdict"] != "pass"

print(f"\n{'axiom':<12} {'model':<8} {'checks':>6} {'failures':>8} {'worst dev':>12}")
for (axiom, model), cur in sorted(by_axiom.items()):
    print(f"{axiom:<12} {model:<8} {cur['n']:>6} {cur['fail']:>8} {cur['worst']:>12.2e}")

print("\niteration laws on tagged finite sets:")
suite = finset_conway_suite()
for law, res in suite.items():
    print(f"  {law:<24} {res['instances']:>5} instances, {res['failures']} failures")
print("implication chain:", json.dumps(law_implication_report(suite), indent=2))
