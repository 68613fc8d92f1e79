"""Random well-typed expressions, accepted traced expressions, and
feedback diagrams for the property suites.

Expressions are built as layered circuits: each slice tensors fresh
boxes, identities, and adjacent swaps over the current word.  Traced
expressions wrap a trace around a derivable promise of a trace-free
core, so they are accepted by construction.  Diagrams are built by
matching box gates and boundary ports atom by atom, which freely
produces cycles and bare wires.
"""

from __future__ import annotations

from .diagrams import Diagram
from .expressions import Box, Comp, Id, MorphExpr, Sym, Tensor, trace as mk_trace
from .guardedness import derivable_splits
from .signatures import BoxSig, ObjectExpr, Split, mk_split
from .synthesis import perm_to_expr

ATOMS = ("A", "B", "C", "D")


def rand_word(rng, atoms, lo: int, hi: int) -> ObjectExpr:
    k = int(rng.integers(lo, hi + 1))
    return ObjectExpr(tuple(str(rng.choice(atoms)) for _ in range(k)))


def rand_split(rng, n_in: int, n_out: int) -> Split:
    ui = [i for i in range(n_in) if rng.random() < 0.5]
    go = [j for j in range(n_out) if rng.random() < 0.5]
    return mk_split(n_in, n_out, ui, go)


def rand_trace_free_expr(
    rng,
    max_boxes: int = 8,
    n_atoms: int = 4,
    max_width: int = 5,
    max_slices: int = 4,
) -> MorphExpr:
    atoms = ATOMS[:n_atoms]
    counter = [0]

    def fresh_box(dom: ObjectExpr) -> BoxSig:
        cod = rand_word(rng, atoms, 0 if len(dom) else 1, 2)
        counter[0] += 1
        name = f"b{counter[0]}"
        return BoxSig(name, dom, cod, rand_split(rng, len(dom), len(cod)))

    word = rand_word(rng, atoms, 1, max_width)
    expr: MorphExpr = Id(word)
    boxes_left = max_boxes
    for _ in range(int(rng.integers(1, max_slices + 1))):
        pieces: list[MorphExpr] = []
        i = 0
        n = len(word)
        while i < n:
            roll = rng.random()
            if roll < 0.45 and boxes_left > 0:
                take = int(rng.integers(1, min(2, n - i) + 1))
                sig = fresh_box(word[i : i + take])
                pieces.append(Box(sig))
                boxes_left -= 1
                i += take
            elif roll < 0.6 and i + 1 < n:
                pieces.append(Sym(word[i : i + 1], word[i + 1 : i + 2]))
                i += 2
            else:
                pieces.append(Id(word[i : i + 1]))
                i += 1
        if boxes_left > 0 and rng.random() < 0.15 and len(word) < max_width:
            sig = fresh_box(ObjectExpr())
            pieces.insert(int(rng.integers(0, len(pieces) + 1)), Box(sig))
            boxes_left -= 1
        if not pieces:
            break
        slice_expr = pieces[0]
        for p in pieces[1:]:
            slice_expr = Tensor(slice_expr, p)
        if len(slice_expr.cod) > max_width:
            continue
        expr = Comp(expr, slice_expr)
        word = expr.cod
    return expr


def wrap_in_trace(rng, base: MorphExpr, claim_a, claim_d) -> tuple[MorphExpr, Split] | None:
    """Close one matching promised pair of ``base`` into a feedback loop.

    ``claim_a``/``claim_d`` must be a derivable promise.  Returns the
    traced expression and its conclusion claim, or None when no input in
    claim_a shares an atom with an output in claim_d.
    """
    dom, cod = base.dom, base.cod
    pairs = [
        (i, j)
        for i in sorted(claim_a)
        for j in sorted(claim_d)
        if dom[i] == cod[j]
    ]
    if not pairs:
        return None
    i, j = pairs[int(rng.integers(0, len(pairs)))]
    atom = dom[i]
    a_gates = sorted(set(claim_a) - {i})
    b_gates = sorted(set(range(len(dom))) - set(claim_a) - {i})
    c_gates = sorted(set(range(len(cod))) - set(claim_d) - {j})
    d_gates = sorted(set(claim_d) - {j})

    dom_atoms = list(dom)
    cod_atoms = list(cod)
    canon_in = [dom_atoms[g] for g in a_gates] + [atom] + [dom_atoms[g] for g in b_gates]
    src = {g: pos for pos, g in enumerate(a_gates)}
    src.update({g: len(a_gates) + 1 + pos for pos, g in enumerate(b_gates)})
    pre_dest = [src[g] if g != i else len(a_gates) for g in range(len(dom))]
    perm_pre = perm_to_expr(canon_in, pre_dest)
    post_dest = c_gates + d_gates + [j]
    perm_post = perm_to_expr(cod_atoms, post_dest)
    body = Comp(Comp(perm_pre, base), perm_post)
    traced = mk_trace(ObjectExpr((atom,)), body, len(a_gates), len(c_gates))
    claim = mk_split(
        len(traced.dom),
        len(traced.cod),
        unguarded_in=range(len(a_gates)),
        guarded_out=range(len(c_gates), len(traced.cod)),
    )
    return traced, claim


def rand_accepted_traced(rng, max_boxes: int = 6) -> tuple[MorphExpr, Split] | None:
    """A traced expression plus a claim that check_annotated accepts,
    built by closing loops over derivable promises."""
    base = rand_trace_free_expr(rng, max_boxes=max_boxes)
    maxes = sorted(
        derivable_splits(base), key=lambda ad: (sorted(ad[0]), sorted(ad[1]))
    )
    options = [(a, d) for a, d in maxes if a and d]
    if not options:
        return None
    a, d = options[int(rng.integers(0, len(options)))]
    got = wrap_in_trace(rng, base, a, d)
    if got is None:
        return None
    expr, claim = got
    if rng.random() < 0.35:
        again = wrap_in_trace(
            rng, expr, sorted(claim.unguarded_in), sorted(claim.guarded_out)
        )
        if again is not None:
            return again
    return expr, claim


def rand_guarded_diagram(
    rng,
    max_boxes: int = 6,
    n_atoms: int = 2,
    p_black: float = 0.6,
) -> tuple[Diagram, Split]:
    """A random diagram of white/black boxes with a random claim; no
    filtering, so callers sort into hypothesis-satisfying and violating
    populations themselves."""
    atoms = ATOMS[:n_atoms]
    n_boxes = int(rng.integers(1, max_boxes + 1))
    boxes = []
    for k in range(n_boxes):
        dom = rand_word(rng, atoms, 1, 2)
        cod = rand_word(rng, atoms, 1, 2)
        if rng.random() < p_black:
            split = mk_split(len(dom), len(cod), range(len(dom)), range(len(cod)))
        else:
            split = mk_split(len(dom), len(cod))
        boxes.append(BoxSig(f"n{k}", dom, cod, split))

    sinks: dict[str, list] = {a: [] for a in atoms}
    sources: dict[str, list] = {a: [] for a in atoms}
    for b, sig in enumerate(boxes):
        for k, a in enumerate(sig.inputs):
            sinks[a].append(("bin", b, k))
        for k, a in enumerate(sig.outputs):
            sources[a].append(("bout", b, k))

    boundary_in: list[tuple[str, bool]] = []
    boundary_out: list[tuple[str, bool]] = []
    for a in atoms:
        need = len(sinks[a]) - len(sources[a])
        extra = int(rng.integers(0, 2))
        n_din = max(0, need) + extra
        n_dout = n_din - need
        for _ in range(n_din):
            sources[a].append(("din", len(boundary_in)))
            boundary_in.append((a, False))
        for _ in range(n_dout):
            sinks[a].append(("dout", len(boundary_out)))
            boundary_out.append((a, False))

    wires = set()
    for a in atoms:
        src = list(sources[a])
        dst = list(sinks[a])
        order = rng.permutation(len(src))
        for s, t in zip([src[int(o)] for o in order], dst):
            wires.add((s, t))

    claim = mk_split(
        len(boundary_in),
        len(boundary_out),
        unguarded_in=[i for i in range(len(boundary_in)) if rng.random() < 0.5],
        guarded_out=[j for j in range(len(boundary_out)) if rng.random() < 0.4],
    )
    d = Diagram(tuple(boxes), frozenset(wires), tuple(boundary_in), tuple(boundary_out))
    return d.with_claim(claim), claim
