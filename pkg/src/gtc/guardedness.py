"""Deciding guardedness claims, three ways.

* ``geometric_check`` inspects the port graph: a claim holds when no
  unguarded path joins a claimed-unguarded input to a claimed-guarded
  output and no loop is unguarded.  A path is guarded when it crosses
  some box from an unguarded input gate to a guarded output gate.

* ``derivable_splits`` runs the structural rules bottom-up over a
  trace-free expression, returning the exact derivable claims as an
  antichain of maximal elements.  On trace-free expressions the two
  computations agree; the test suite exercises that equivalence as an
  oracle.

* ``check_annotated`` verifies a traced expression layer by layer:
  each trace node is opaqued into a box carrying its conclusion split,
  and the resulting trace-free layers are checked geometrically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .diagrams import Diagram, Port, elaborate
from .expressions import Box, Comp, Id, MorphExpr, Sym, Tensor, Trace
from .signatures import BoxSig, Split


@dataclass(frozen=True)
class PortPath:
    """A directed walk through a diagram, as the ports it visits.

    Consecutive ports alternate wires (source -> target) and box
    passages (input gate -> output gate of one box).
    """

    ports: tuple[Port, ...]

    def __post_init__(self) -> None:
        for a, b in zip(self.ports, self.ports[1:]):
            wire_step = a[0] in ("din", "bout") and b[0] in ("dout", "bin")
            passage = (
                a[0] == "bin" and b[0] == "bout" and a[1] == b[1]
            )
            if not (wire_step or passage):
                raise ValueError(f"ports {a} and {b} are not incident")

    def passages(self) -> list[tuple[int, int, int]]:
        """(box, input gate, output gate) for each box crossing."""
        out = []
        for a, b in zip(self.ports, self.ports[1:]):
            if a[0] == "bin":
                out.append((a[1], a[2], b[2]))
        return out

    def is_guarded(self, d: Diagram) -> bool:
        return any(
            d.boxes[b].split.passage_guarded(i, j) for b, i, j in self.passages()
        )


def _unguarded_successors(d: Diagram) -> dict[Port, list[Port]]:
    """Adjacency of the graph whose edges are wires plus every box
    passage that is not guarded."""
    succ: dict[Port, list[Port]] = {p: [] for p in d.all_ports()}
    for src, dst in d.wires:
        succ[src].append(dst)
    for b, sig in enumerate(d.boxes):
        for i in range(len(sig.inputs)):
            for j in range(len(sig.outputs)):
                if not sig.split.passage_guarded(i, j):
                    succ[("bin", b, i)].append(("bout", b, j))
    return succ


def unguarded_reach(d: Diagram) -> dict[Port, frozenset[Port]]:
    """For every port, the set of ports reachable along unguarded paths
    of at least one step."""
    succ = _unguarded_successors(d)
    reach: dict[Port, frozenset[Port]] = {}
    for start in succ:
        seen: set[Port] = set()
        stack = list(succ[start])
        while stack:
            p = stack.pop()
            if p in seen:
                continue
            seen.add(p)
            stack.extend(succ[p])
        reach[start] = frozenset(seen)
    return reach


def _bfs_path(
    succ: dict[Port, list[Port]], sources: list[Port], targets: set[Port]
) -> list[Port] | None:
    parent: dict[Port, Port | None] = {}
    queue = []
    for s in sources:
        if s not in parent:
            parent[s] = None
            queue.append(s)
    while queue:
        p = queue.pop(0)
        if p in targets:
            path = [p]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return list(reversed(path))
        for q in succ[p]:
            if q not in parent:
                parent[q] = p
                queue.append(q)
    return None


def find_unguarded_loop(d: Diagram) -> PortPath | None:
    """A cycle surviving deletion of all guarded passages, if any."""
    succ = _unguarded_successors(d)
    color: dict[Port, int] = {}
    stack_path: list[Port] = []

    def dfs(p: Port) -> list[Port] | None:
        color[p] = 1
        stack_path.append(p)
        for q in succ[p]:
            if color.get(q, 0) == 1:
                i = stack_path.index(q)
                return stack_path[i:] + [q]
            if color.get(q, 0) == 0:
                got = dfs(q)
                if got is not None:
                    return got
        stack_path.pop()
        color[p] = 2
        return None

    for p in succ:
        if color.get(p, 0) == 0:
            cyc = dfs(p)
            if cyc is not None:
                return PortPath(tuple(cyc))
    return None


@dataclass(frozen=True)
class GeometricWitness:
    kind: str  # "path" or "loop"
    path: PortPath

    def to_json(self) -> dict:
        return {"kind": self.kind, "ports": [list(p) for p in self.path.ports]}


def geometric_witness(d: Diagram, claim: Split) -> GeometricWitness | None:
    """None if the claim holds geometrically, else the offending path or
    unguarded loop."""
    if claim.n_in != len(d.boundary_in) or claim.n_out != len(d.boundary_out):
        raise ValueError("claim does not fit the diagram boundary")
    loop = find_unguarded_loop(d)
    if loop is not None:
        return GeometricWitness("loop", loop)
    succ = _unguarded_successors(d)
    sources = [("din", i) for i in sorted(claim.unguarded_in)]
    targets = {("dout", j) for j in claim.guarded_out}
    path = _bfs_path(succ, sources, targets)
    if path is not None:
        return GeometricWitness("path", PortPath(tuple(path)))
    return None


def geometric_check(d: Diagram, claim: Split) -> bool:
    return geometric_witness(d, claim) is None


# --- structural derivation search -------------------------------------------


class TraceNotAllowed(ValueError):
    """derivable_splits only covers trace-free expressions."""


def _antichain(pairs: set[tuple[int, int]]) -> set[tuple[int, int]]:
    # distinct pairs with a <= a2 and d <= d2 are strictly dominated
    out = set()
    for a, d in pairs:
        if not any(
            (a, d) != (a2, d2) and a & ~a2 == 0 and d & ~d2 == 0
            for a2, d2 in pairs
        ):
            out.add((a, d))
    return out


def _mask(gates, n: int) -> int:
    m = 0
    for g in gates:
        m |= 1 << g
    return m


def _derivable_masks(e: MorphExpr, memo: dict) -> set[tuple[int, int]]:
    key = id(e)
    if key in memo:
        return memo[key]
    n_in, n_out = len(e.dom), len(e.cod)
    full_in = (1 << n_in) - 1
    full_out = (1 << n_out) - 1
    if isinstance(e, Box):
        s = e.sig.split
        cands = {
            (_mask(s.unguarded_in, n_in), _mask(s.guarded_out, n_out)),
            (full_in, 0),
            (0, full_out),
        }
    elif isinstance(e, (Id, Sym)):
        # wires only: a claim holds iff no claimed-unguarded input is
        # wired straight to a claimed-guarded output
        if isinstance(e, Id):
            perm = list(range(n_in))
        else:
            k = len(e.left)
            perm = [i + len(e.right) for i in range(k)] + list(range(len(e.right)))
            perm = [perm[i] for i in range(n_in)]
        cands = set()
        for s_mask in range(1 << n_in):
            img = 0
            for i in range(n_in):
                if s_mask >> i & 1:
                    img |= 1 << perm[i]
            cands.add((s_mask, full_out & ~img))
    elif isinstance(e, Comp):
        left = _derivable_masks(e.first, memo)
        right = _derivable_masks(e.second, memo)
        mid_full = (1 << len(e.first.cod)) - 1
        cands = set()
        for ag, dg in left:
            for af, df in right:
                # need a middle partition E|F with F <= dg and (mid - F) <= af,
                # i.e. every middle gate is covered by dg or af
                if mid_full & ~af & ~dg == 0:
                    cands.add((ag, df))
    elif isinstance(e, Tensor):
        top = _derivable_masks(e.top, memo)
        bottom = _derivable_masks(e.bottom, memo)
        si, so = len(e.top.dom), len(e.top.cod)
        cands = {
            (a1 | (a2 << si), d1 | (d2 << so))
            for a1, d1 in top
            for a2, d2 in bottom
        }
    elif isinstance(e, Trace):
        raise TraceNotAllowed("expression contains a trace node")
    else:
        raise TypeError(f"not an expression: {e!r}")
    got = _antichain(cands)
    memo[key] = got
    return got


def derivable_splits(e: MorphExpr) -> frozenset[tuple[frozenset[int], frozenset[int]]]:
    """All derivable claims of a trace-free expression, given by their
    maximal elements (claims are downward closed under weakening)."""
    masks = _derivable_masks(e, {})
    n_in, n_out = len(e.dom), len(e.cod)

    def unmask(m: int, n: int) -> frozenset[int]:
        return frozenset(i for i in range(n) if m >> i & 1)

    return frozenset((unmask(a, n_in), unmask(d, n_out)) for a, d in masks)


def claim_derivable(
    maxes: frozenset[tuple[frozenset[int], frozenset[int]]], claim: Split
) -> bool:
    return any(
        claim.unguarded_in <= a and claim.guarded_out <= d for a, d in maxes
    )


def split_derivable(e: MorphExpr, claim: Split) -> bool:
    """Convenience: is the claim derivable for this trace-free expression?"""
    return claim_derivable(derivable_splits(e), claim)


# --- syntax-directed checking of annotated traced expressions ---------------


@dataclass
class CheckResult:
    ok: bool
    certificate: list[dict] = field(default_factory=list)
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {"ok": self.ok, "nodes": self.certificate}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _opaque(e: MorphExpr, queue: list, counter) -> MorphExpr:
    """Replace maximal trace subterms by boxes decorated with their
    conclusion splits, queueing the nodes for their own layer checks."""
    if isinstance(e, Trace):
        idx = next(counter)
        sig = BoxSig(f"tr_{idx}", e.dom, e.cod, e.conclusion_split())
        queue.append((idx, e))
        return Box(sig)
    if isinstance(e, Comp):
        return Comp(_opaque(e.first, queue, counter), _opaque(e.second, queue, counter))
    if isinstance(e, Tensor):
        return Tensor(_opaque(e.top, queue, counter), _opaque(e.bottom, queue, counter))
    return e


def check_annotated(e: MorphExpr, claim: Split) -> CheckResult:
    """Verify every trace annotation and the top-level claim.

    Each layer (the expression with its immediate trace subterms turned
    opaque) is elaborated and checked geometrically; a trace node's body
    is checked against its annotation.  Returns per-node certificates
    and, on failure, the first offending path or loop.
    """
    counter = itertools.count()
    queue: list[tuple[int, Trace]] = []
    result = CheckResult(ok=True)

    top_layer = _opaque(e, queue, counter)
    layers: list[tuple[str, MorphExpr, Split, dict]] = [
        ("top", top_layer, claim, {"node": "top", "claim": str(claim)})
    ]
    while queue:
        idx, tr = queue.pop(0)
        body_layer = _opaque(tr.body, queue, counter)
        a, b, c, d = tr.corners
        entry = {
            "node": f"tr_{idx}",
            "loop": str(tr.loop),
            "corners": f"{a}|{b} -> {c}|{d}",
        }
        layers.append((f"tr_{idx}", body_layer, tr.annotation, entry))

    for _, layer, layer_claim, entry in layers:
        diagram = elaborate(layer)
        bad = geometric_witness(diagram, layer_claim)
        entry["ok"] = bad is None
        result.certificate.append(entry)
        if bad is not None and result.ok:
            result.ok = False
            result.witness = {"node": entry["node"], **bad.to_json()}
    return result


def infer_trace_annotations(
    e: MorphExpr, claim: Split, max_nodes: int = 3
) -> MorphExpr | None:
    """Brute-force annotation search for a lightly traced expression.

    The loop word and its position are part of each trace node (they fix
    the feedback wiring), so the only annotation freedom left is how many
    body outputs are claimed unguarded ahead of the guarded block.  Tries
    every combination across all trace nodes and returns a re-annotated
    expression that checks under ``claim``, or None.  Refuses expressions
    with more than ``max_nodes`` trace nodes.
    """
    from .expressions import trace as mk_trace

    nodes: list[Trace] = []

    def collect(x: MorphExpr) -> None:
        if isinstance(x, Trace):
            nodes.append(x)
            collect(x.body)
        elif isinstance(x, Comp):
            collect(x.first)
            collect(x.second)
        elif isinstance(x, Tensor):
            collect(x.top)
            collect(x.bottom)

    collect(e)
    if len(nodes) > max_nodes:
        raise ValueError(f"refusing inference with more than {max_nodes} trace nodes")

    def rebuild(x: MorphExpr, choice: dict[int, int], idx: list[int]) -> MorphExpr:
        if isinstance(x, Trace):
            my = idx[0]
            idx[0] += 1
            body = rebuild(x.body, choice, idx)
            a, _, _, _ = x.corners
            return mk_trace(x.loop, body, len(a), choice[my])
        if isinstance(x, Comp):
            return Comp(rebuild(x.first, choice, idx), rebuild(x.second, choice, idx))
        if isinstance(x, Tensor):
            return Tensor(rebuild(x.top, choice, idx), rebuild(x.bottom, choice, idx))
        return x

    ranges = [range(len(t.body.cod) - len(t.loop) + 1) for t in nodes]
    for combo in itertools.product(*ranges):
        choice = dict(enumerate(combo))
        try:
            candidate = rebuild(e, choice, [0])
        except Exception:
            continue
        if check_annotated(candidate, claim).ok:
            return candidate
    return None
