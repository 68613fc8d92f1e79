"""Turning guarded cyclic diagrams back into annotated traced expressions.

The recursion mirrors the constructive argument: if the diagram is
acyclic, read off a trace-free expression by topological slicing; else
find a loop wire whose source box has no unguarded path from the claimed
unguarded inputs (not in V) and whose target box has no unguarded path to
the claimed guarded outputs (not in U), cut it, synthesize the opened
diagram, and close the cut with a trace node.  Each cut removes a wire
from a loop, so the recursion terminates.
"""

from __future__ import annotations

from .diagrams import Diagram, Port
from .expressions import Comp, Id, MorphExpr, Sym, Tensor
from .expressions import Box as BoxNode
from .expressions import trace as mk_trace
from .guardedness import (
    GeometricWitness,
    geometric_witness,
    unguarded_reach,
)
from .signatures import ObjectExpr, Split, mk_split


class SynthesisError(ValueError):
    """A hypothesis fails; carries which one and a concrete witness."""

    def __init__(self, reason: str, witness=None):
        super().__init__(reason)
        self.reason = reason
        self.witness = witness


def synthesis_preconditions(d: Diagram, claim: Split) -> None:
    """Raise SynthesisError unless the diagram is ideally guarded, every
    loop is guarded, and every claimed-critical path is guarded."""
    for b, sig in enumerate(d.boxes):
        if sig.kind == "mixed":
            raise SynthesisError(
                f"box {b} ({sig.name}) is neither white nor black",
                witness={"box": b, "sig": str(sig)},
            )
    bad: GeometricWitness | None = geometric_witness(d, claim)
    if bad is not None:
        what = "unguarded loop" if bad.kind == "loop" else "unguarded critical path"
        raise SynthesisError(what, witness=bad.to_json())


def compute_uv(d: Diagram, claim: Split) -> tuple[frozenset[int], frozenset[int]]:
    """U: boxes with an unguarded path from their own inputs to a
    claimed-guarded output.  V: boxes whose outputs lie on an unguarded
    path from a claimed-unguarded input."""
    reach = unguarded_reach(d)
    guarded_outs = {("dout", j) for j in claim.guarded_out}
    u_set = set()
    for b, sig in enumerate(d.boxes):
        for i in range(len(sig.inputs)):
            if reach[("bin", b, i)] & guarded_outs:
                u_set.add(b)
                break
    v_set = set()
    from_inputs: set[Port] = set()
    for i in claim.unguarded_in:
        from_inputs |= reach[("din", i)]
    for b, sig in enumerate(d.boxes):
        if any(("bout", b, k) in from_inputs for k in range(len(sig.outputs))):
            v_set.add(b)
    return frozenset(u_set), frozenset(v_set)


def _full_successors(d: Diagram) -> dict[Port, list[Port]]:
    succ: dict[Port, list[Port]] = {p: [] for p in d.all_ports()}
    for src, dst in d.wires:
        succ[src].append(dst)
    for b, sig in enumerate(d.boxes):
        for i in range(len(sig.inputs)):
            for j in range(len(sig.outputs)):
                succ[("bin", b, i)].append(("bout", b, j))
    return succ


def loop_wires(d: Diagram) -> list[tuple[Port, Port]]:
    """Wires lying on some directed cycle (box passages included)."""
    succ = _full_successors(d)

    def reaches(start: Port, goal: Port) -> bool:
        seen = set()
        stack = [start]
        while stack:
            p = stack.pop()
            if p == goal:
                return True
            if p in seen:
                continue
            seen.add(p)
            stack.extend(succ[p])
        return False

    return [w for w in d.wires if reaches(w[1], w[0])]


def find_cut_wire(
    d: Diagram, u_set: frozenset[int], v_set: frozenset[int]
) -> tuple[Port, Port]:
    """The lexicographically least loop wire from a box outside V into a
    box outside U."""
    candidates = [
        w
        for w in loop_wires(d)
        if w[0][1] not in v_set and w[1][1] not in u_set
    ]
    if not candidates:
        raise SynthesisError(
            "no loop wire avoids U and V; hypotheses do not hold",
            witness={"U": sorted(u_set), "V": sorted(v_set)},
        )
    return min(candidates, key=lambda w: (w[0][1], w[0][2]))


def cut_wire(
    d: Diagram, wire: tuple[Port, Port], claim: Split
) -> tuple[Diagram, Split]:
    """Open one wire into a fresh unguarded input and guarded output,
    appended at the end of the respective boundaries."""
    src, dst = wire
    atom = d.port_atom(src)
    n_in, n_out = len(d.boundary_in), len(d.boundary_out)
    wires = (d.wires - {wire}) | {
        (("din", n_in), dst),
        (src, ("dout", n_out)),
    }
    d2 = Diagram(
        d.boxes,
        frozenset(wires),
        d.boundary_in + ((atom, False),),
        d.boundary_out + ((atom, True),),
    )
    claim2 = mk_split(
        n_in + 1,
        n_out + 1,
        unguarded_in=set(claim.unguarded_in) | {n_in},
        guarded_out=set(claim.guarded_out) | {n_out},
    )
    return d2, claim2


# --- permutations as expressions ---------------------------------------------


def perm_to_expr(atoms: list[str], dest: list[int]) -> MorphExpr:
    """Expression with domain ``atoms`` whose output at position j is the
    input at position ``dest[j]``, realized as adjacent transpositions."""
    n = len(atoms)
    if sorted(dest) != list(range(n)):
        raise ValueError(f"not a permutation: {dest}")
    cur = list(range(n))
    cur_atoms = list(atoms)
    slices: list[MorphExpr] = []
    for pos in range(n):
        q = cur.index(dest[pos])
        while q > pos:
            pieces: list[MorphExpr] = []
            if q - 1 > 0:
                pieces.append(Id(ObjectExpr(tuple(cur_atoms[: q - 1]))))
            pieces.append(
                Sym(ObjectExpr((cur_atoms[q - 1],)), ObjectExpr((cur_atoms[q],)))
            )
            if q + 1 < n:
                pieces.append(Id(ObjectExpr(tuple(cur_atoms[q + 1 :]))))
            step = pieces[0]
            for p in pieces[1:]:
                step = Tensor(step, p)
            slices.append(step)
            cur[q - 1], cur[q] = cur[q], cur[q - 1]
            cur_atoms[q - 1], cur_atoms[q] = cur_atoms[q], cur_atoms[q - 1]
            q -= 1
    if not slices:
        return Id(ObjectExpr(tuple(atoms)))
    e = slices[0]
    for s in slices[1:]:
        e = Comp(e, s)
    return e


def _compose(parts: list[MorphExpr]) -> MorphExpr:
    e = parts[0]
    for p in parts[1:]:
        e = Comp(e, p)
    return e


def _is_trivial_perm(e: MorphExpr) -> bool:
    return isinstance(e, Id)


def _compose_opt(parts: list[MorphExpr]) -> MorphExpr:
    useful = [p for p in parts if not _is_trivial_perm(p)]
    if not useful:
        return parts[0]
    return _compose(useful)


# --- acyclic extraction -------------------------------------------------------


def acyclic_to_expr(d: Diagram) -> MorphExpr:
    """Read an acyclic diagram off as slices of boxes between explicit
    wire permutations."""
    if loop_wires(d):
        raise SynthesisError("diagram is cyclic", witness=None)

    # longest-path layering over the box dependency graph
    deps: dict[int, set[int]] = {b: set() for b in range(len(d.boxes))}
    for src, dst in d.wires:
        if src[0] == "bout" and dst[0] == "bin":
            deps[dst[1]].add(src[1])
    layer: dict[int, int] = {}

    def depth(b: int) -> int:
        if b not in layer:
            layer[b] = 1 + max((depth(p) for p in deps[b]), default=0)
        return layer[b]

    for b in deps:
        depth(b)
    levels = sorted({v for v in layer.values()})

    alive: list[tuple[Port, Port]] = [
        d.wire_from(("din", i)) for i in range(len(d.boundary_in))
    ]
    parts: list[MorphExpr] = []

    def alive_atoms() -> list[str]:
        return [d.port_atom(w[0]) for w in alive]

    def rearrange(desired: list[tuple[Port, Port]]) -> None:
        nonlocal alive
        if desired == alive:
            return
        index = {w: i for i, w in enumerate(alive)}
        dest = [index[w] for w in desired]
        parts.append(perm_to_expr(alive_atoms(), dest))
        alive = desired

    for lv in levels:
        boxes = sorted(b for b in layer if layer[b] == lv)
        needed: list[tuple[Port, Port]] = []
        for b in boxes:
            for k in range(len(d.boxes[b].inputs)):
                needed.append(d.wire_into(("bin", b, k)))
        rest = [w for w in alive if w not in set(needed)]
        rearrange(needed + rest)
        pieces: list[MorphExpr] = [BoxNode(d.boxes[b]) for b in boxes]
        if rest:
            pieces.append(Id(ObjectExpr(tuple(d.port_atom(w[0]) for w in rest))))
        slice_expr = pieces[0]
        for p in pieces[1:]:
            slice_expr = Tensor(slice_expr, p)
        parts.append(slice_expr)
        produced: list[tuple[Port, Port]] = []
        for b in boxes:
            for k in range(len(d.boxes[b].outputs)):
                produced.append(d.wire_from(("bout", b, k)))
        alive = produced + rest

    final = [d.wire_into(("dout", j)) for j in range(len(d.boundary_out))]
    rearrange(final)
    if not parts:
        return Id(d.dom)
    return _compose_opt(parts)


# --- the main recursion -------------------------------------------------------


def synthesize(d: Diagram, claim: Split) -> MorphExpr:
    """Produce an annotated expression that checks under ``claim`` and
    elaborates back to ``d`` (up to diagram isomorphism)."""
    synthesis_preconditions(d, claim)
    return _synthesize(d, claim)


def _synthesize(d: Diagram, claim: Split) -> MorphExpr:
    if not loop_wires(d):
        return acyclic_to_expr(d)
    u_set, v_set = compute_uv(d, claim)
    wire = find_cut_wire(d, u_set, v_set)
    d2, claim2 = cut_wire(d, wire, claim)
    inner = _synthesize(d2, claim2)

    atom = d.port_atom(wire[0])
    loop = ObjectExpr((atom,))
    a_gates = sorted(claim.unguarded_in)
    b_gates = sorted(claim.guarded_in)
    c_gates = sorted(claim.unguarded_out)
    d_gates = sorted(claim.guarded_out)
    dom_atoms = [a for a, _ in d.boundary_in]
    cod_atoms = [a for a, _ in d.boundary_out]
    n_in, n_out = len(dom_atoms), len(cod_atoms)

    # canonical body domain: A then loop then B; inner's domain appends the
    # fresh loop input after the original boundary
    canon_in = [dom_atoms[g] for g in a_gates] + [atom] + [dom_atoms[g] for g in b_gates]
    src_of_gate: dict[int, int] = {}
    for pos, g in enumerate(a_gates):
        src_of_gate[g] = pos
    for pos, g in enumerate(b_gates):
        src_of_gate[g] = len(a_gates) + 1 + pos
    pre_dest = [src_of_gate[g] for g in range(n_in)] + [len(a_gates)]
    perm_pre = perm_to_expr(canon_in, pre_dest)

    # canonical body codomain: C then D then loop
    post_dest = c_gates + d_gates + [n_out]
    inner_cod_atoms = cod_atoms + [atom]
    perm_post = perm_to_expr(inner_cod_atoms, post_dest)

    body = _compose_opt([perm_pre, inner, perm_post])
    traced = mk_trace(loop, body, len(a_gates), len(c_gates))

    outer_pre = perm_to_expr(dom_atoms, a_gates + b_gates)
    out_pos: dict[int, int] = {}
    for pos, g in enumerate(c_gates):
        out_pos[g] = pos
    for pos, g in enumerate(d_gates):
        out_pos[g] = len(c_gates) + pos
    outer_post = perm_to_expr(
        [cod_atoms[g] for g in c_gates] + [cod_atoms[g] for g in d_gates],
        [out_pos[g] for g in range(n_out)],
    )
    return _compose_opt([outer_pre, traced, outer_post])
