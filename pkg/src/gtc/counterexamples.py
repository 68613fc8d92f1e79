"""Boundary fixtures for the typing discipline.

Two phenomena are witnessed here:

* ``equal_morphisms_different_typing`` builds a traced expression and a
  trace-free composite that elaborate to isomorphic diagrams (they are
  the same morphism), yet the checker accepts only the composite under
  the shared claim.  Acceptance of a claim is a property of the
  expression, not of the diagram it draws.

* ``find_untypable_diagram`` searches two-box diagrams for the converse
  gap: a diagram whose loop and critical paths are all guarded but which
  no annotated expression induces.  The verification is by exhausting
  the ways a trace could have produced the diagram's single loop: every
  nonempty set of loop wires, once cut open into trace-shaped boundary
  ports, leaves an unguarded path from a claimed-unguarded input to a
  claimed-guarded output.  With mixed boxes such diagrams exist; with
  only white and black boxes they cannot (that is the synthesis
  guarantee), which is why the search must leave the ideally guarded
  world.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations, product

from .diagrams import Diagram
from .expressions import parse_expr
from .guardedness import geometric_check
from .signatures import BoxSig, ObjectExpr, Split, mk_split, parse_box_decl
from .synthesis import cut_wire, loop_wires


def equal_morphisms_different_typing():
    """The traced-vs-composite fixture.

    Returns (sigs, traced, composite, claim): ``traced`` and
    ``composite`` elaborate to isomorphic diagrams; under ``claim`` the
    checker rejects ``traced`` and accepts ``composite``.
    """
    sigs = {}
    for line in ("box f : X | I -> I | U", "box g : I | U -> Y | I"):
        sig = parse_box_decl(line)
        sigs[sig.name] = sig
    traced = parse_expr("tr[U: X|I -> I|Y]{ sym[X,U] ; (g (*) f) }", sigs)
    composite = parse_expr("f ; g", sigs)
    claim = mk_split(1, 1, unguarded_in={0}, guarded_out={0})
    return sigs, traced, composite, claim


@dataclass(frozen=True)
class UntypableDiagram:
    diagram: Diagram
    claim: Split
    cut_reports: tuple[tuple[tuple, bool], ...]  # (sorted cut wires, geometric ok)


def _two_box_diagrams(max_gates: int = 2):
    """All two-box, one-atom diagrams with one boundary input and output,
    whose wires form exactly one simple loop, over all splits."""
    atom = "A"
    shapes = [
        (fi, fo, gi, go)
        for fi in range(1, max_gates + 1)
        for fo in range(1, max_gates + 1)
        for gi in range(1, max_gates + 1)
        for go in range(1, max_gates + 1)
        if 1 + fo + go == 1 + fi + gi  # sources must match sinks
    ]
    for fi, fo, gi, go in shapes:
        sources = [("din", 0)] + [("bout", 0, k) for k in range(fo)] + [
            ("bout", 1, k) for k in range(go)
        ]
        sinks = [("dout", 0)] + [("bin", 0, k) for k in range(fi)] + [
            ("bin", 1, k) for k in range(gi)
        ]
        for perm in permutations(range(len(sinks))):
            wires = frozenset(
                (sources[i], sinks[perm[i]]) for i in range(len(sources))
            )
            if _simple_loop_count(wires) != 1:
                continue
            for f_ui, f_go, g_ui, g_go in product(
                _subsets(fi), _subsets(fo), _subsets(gi), _subsets(go)
            ):
                f = BoxSig(
                    "f",
                    ObjectExpr((atom,) * fi),
                    ObjectExpr((atom,) * fo),
                    mk_split(fi, fo, f_ui, f_go),
                )
                g = BoxSig(
                    "g",
                    ObjectExpr((atom,) * gi),
                    ObjectExpr((atom,) * go),
                    mk_split(gi, go, g_ui, g_go),
                )
                yield Diagram(
                    (f, g),
                    wires,
                    ((atom, False),),
                    ((atom, True),),
                )


def _subsets(n: int):
    items = list(range(n))
    for r in range(n + 1):
        yield from (set(c) for c in combinations(items, r))


def _simple_loop_count(wires) -> int:
    """Simple cycles in the box-level multigraph of a two-box diagram."""
    self_f = sum(1 for s, t in wires if s[0] == "bout" and t[0] == "bin" and s[1] == 0 and t[1] == 0)
    self_g = sum(1 for s, t in wires if s[0] == "bout" and t[0] == "bin" and s[1] == 1 and t[1] == 1)
    fg = sum(1 for s, t in wires if s[0] == "bout" and t[0] == "bin" and s[1] == 0 and t[1] == 1)
    gf = sum(1 for s, t in wires if s[0] == "bout" and t[0] == "bin" and s[1] == 1 and t[1] == 0)
    return self_f + self_g + fg * gf


def _all_cuts_fail(d: Diagram, claim: Split):
    """Cut every nonempty subset of the loop wires open and require the
    geometric condition to fail each time."""
    wires = sorted(loop_wires(d))
    reports = []
    for r in range(1, len(wires) + 1):
        for chosen in combinations(wires, r):
            cur, cur_claim = d, claim
            for w in chosen:
                cur, cur_claim = cut_wire(cur, w, cur_claim)
            ok = geometric_check(cur, cur_claim)
            reports.append((chosen, ok))
            if ok:
                return None
    return tuple(reports)


def find_untypable_diagram(max_gates: int = 2) -> UntypableDiagram:
    """Exhaustive search for the smallest two-box witness: geometric
    condition holds, every way of opening the loop fails it."""
    claim_of = lambda d: d.boundary_claim()
    for d in _two_box_diagrams(max_gates):
        claim = claim_of(d)
        if not geometric_check(d, claim):
            continue
        if not any(sig.kind == "mixed" for sig in d.boxes):
            # ideally guarded diagrams are synthesizable; skip early
            continue
        reports = _all_cuts_fail(d, claim)
        if reports is not None:
            return UntypableDiagram(d, claim, reports)
    raise LookupError("no witness in the searched family")
