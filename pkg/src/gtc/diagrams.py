"""Port-graph diagrams and elaboration of expressions into them.

A diagram is a list of box instances plus a set of directed wires between
ports.  Ports are small tuples:

    ("din", i)        i-th diagram input
    ("dout", j)       j-th diagram output
    ("bin", b, k)     input gate k of box instance b
    ("bout", b, k)    output gate k of box instance b

Wires run from a source port (``din`` or ``bout``) to a target port
(``dout`` or ``bin``); every port carries exactly one wire end.  Each wire
carries a single atom, so tensor-typed connections appear as parallel
wires.  Cycles are allowed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .expressions import Box, Comp, Id, MorphExpr, Sym, Tensor, Trace
from .signatures import BoxSig, ObjectExpr, Split, mk_split, parse_object

Port = tuple


class DiagramError(ValueError):
    """Ill-formed diagram data."""


@dataclass(frozen=True)
class Diagram:
    boxes: tuple[BoxSig, ...]
    wires: frozenset[tuple[Port, Port]]
    boundary_in: tuple[tuple[str, bool], ...]  # (atom, guarded flag)
    boundary_out: tuple[tuple[str, bool], ...]

    def __post_init__(self) -> None:
        seen: dict[Port, int] = {}
        for src, dst in self.wires:
            if src[0] not in ("din", "bout") or dst[0] not in ("dout", "bin"):
                raise DiagramError(f"wire {src} -> {dst} has bad orientation")
            for p in (src, dst):
                seen[p] = seen.get(p, 0) + 1
                if seen[p] > 1:
                    raise DiagramError(f"port {p} carries more than one wire")
            if self.port_atom(src) != self.port_atom(dst):
                raise DiagramError(
                    f"wire {src} -> {dst} joins atoms "
                    f"{self.port_atom(src)} and {self.port_atom(dst)}"
                )
        for p in self.all_ports():
            if p not in seen:
                raise DiagramError(f"port {p} is not wired")

    def port_atom(self, p: Port) -> str:
        if p[0] == "din":
            return self.boundary_in[p[1]][0]
        if p[0] == "dout":
            return self.boundary_out[p[1]][0]
        b = self.boxes[p[1]]
        return b.inputs[p[2]] if p[0] == "bin" else b.outputs[p[2]]

    def all_ports(self) -> list[Port]:
        out: list[Port] = []
        out += [("din", i) for i in range(len(self.boundary_in))]
        out += [("dout", j) for j in range(len(self.boundary_out))]
        for b, sig in enumerate(self.boxes):
            out += [("bin", b, k) for k in range(len(sig.inputs))]
            out += [("bout", b, k) for k in range(len(sig.outputs))]
        return out

    @property
    def dom(self) -> ObjectExpr:
        return ObjectExpr(tuple(a for a, _ in self.boundary_in))

    @property
    def cod(self) -> ObjectExpr:
        return ObjectExpr(tuple(a for a, _ in self.boundary_out))

    def boundary_claim(self) -> Split:
        """The claim recorded in the boundary decorations."""
        return mk_split(
            len(self.boundary_in),
            len(self.boundary_out),
            unguarded_in=[i for i, (_, g) in enumerate(self.boundary_in) if not g],
            guarded_out=[j for j, (_, g) in enumerate(self.boundary_out) if g],
        )

    def with_claim(self, claim: Split) -> "Diagram":
        """Same graph, boundary decorations replaced by ``claim``."""
        bi = tuple(
            (a, i not in claim.unguarded_in) for i, (a, _) in enumerate(self.boundary_in)
        )
        bo = tuple(
            (a, j in claim.guarded_out) for j, (a, _) in enumerate(self.boundary_out)
        )
        return Diagram(self.boxes, self.wires, bi, bo)

    def is_ideally_guarded(self) -> bool:
        return all(sig.kind in ("white", "black") for sig in self.boxes)

    def wire_from(self, src: Port) -> tuple[Port, Port]:
        for w in self.wires:
            if w[0] == src:
                return w
        raise DiagramError(f"no wire out of {src}")

    def wire_into(self, dst: Port) -> tuple[Port, Port]:
        for w in self.wires:
            if w[1] == dst:
                return w
        raise DiagramError(f"no wire into {dst}")


# --- elaboration ------------------------------------------------------------


class _Frag:
    """Union-find scratchpad used while flattening an expression."""

    def __init__(self) -> None:
        self.parent: list[int] = []
        self.boxes: list[tuple[BoxSig, list[int], list[int]]] = []

    def fresh(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def elaborate(e: MorphExpr, claim: Split | None = None) -> Diagram:
    """Flatten a well-typed expression into its port graph.

    Identities, symmetries, and trace feedback contribute wires only; the
    boundary decorations come from ``claim`` (default: nothing guarded).
    Raises DiagramError if a trace closes a wire that passes through no
    box at all, since such a loop has no ports to hang on to.
    """
    fr = _Frag()

    def walk(x: MorphExpr) -> tuple[list[int], list[int]]:
        if isinstance(x, Box):
            ins = [fr.fresh() for _ in x.sig.inputs]
            outs = [fr.fresh() for _ in x.sig.outputs]
            fr.boxes.append((x.sig, ins, outs))
            return ins, outs
        if isinstance(x, Id):
            nodes = [fr.fresh() for _ in x.obj]
            return nodes, list(nodes)
        if isinstance(x, Sym):
            nodes = [fr.fresh() for _ in range(len(x.left) + len(x.right))]
            k = len(x.left)
            return nodes, nodes[k:] + nodes[:k]
        if isinstance(x, Comp):
            ins1, outs1 = walk(x.first)
            ins2, outs2 = walk(x.second)
            for a, b in zip(outs1, ins2):
                fr.union(a, b)
            return ins1, outs2
        if isinstance(x, Tensor):
            ins1, outs1 = walk(x.top)
            ins2, outs2 = walk(x.bottom)
            return ins1 + ins2, outs1 + outs2
        if isinstance(x, Trace):
            ins, outs = walk(x.body)
            a, _, _, _ = x.corners
            k = len(x.loop)
            a_len = len(a)
            m = len(outs)
            for t in range(k):
                fr.union(outs[m - k + t], ins[a_len + t])
            return ins[:a_len] + ins[a_len + k :], outs[: m - k]
        raise TypeError(f"not an expression: {x!r}")

    top_ins, top_outs = walk(e)

    drivers: dict[int, Port] = {}
    consumers: dict[int, Port] = {}

    def add_driver(node: int, port: Port) -> None:
        r = fr.find(node)
        if r in drivers:
            raise DiagramError(f"node driven twice: {drivers[r]} and {port}")
        drivers[r] = port

    def add_consumer(node: int, port: Port) -> None:
        r = fr.find(node)
        if r in consumers:
            raise DiagramError(f"node consumed twice: {consumers[r]} and {port}")
        consumers[r] = port

    for i, n in enumerate(top_ins):
        add_driver(n, ("din", i))
    for j, n in enumerate(top_outs):
        add_consumer(n, ("dout", j))
    for b, (_, ins, outs) in enumerate(fr.boxes):
        for k, n in enumerate(ins):
            add_consumer(n, ("bin", b, k))
        for k, n in enumerate(outs):
            add_driver(n, ("bout", b, k))

    roots = {fr.find(i) for i in range(len(fr.parent))}
    wires = set()
    for r in roots:
        if r in drivers and r in consumers:
            wires.add((drivers[r], consumers[r]))
        elif r in drivers or r in consumers:
            raise DiagramError("dangling wire end (expression is ill-typed)")
        else:
            raise DiagramError(
                "trace closes a wire through no box; the resulting bare loop "
                "has no port-graph representation"
            )

    n_in, n_out = len(top_ins), len(top_outs)
    if claim is None:
        claim = mk_split(n_in, n_out, unguarded_in=range(n_in))
    bi = tuple((e.dom[i], i not in claim.unguarded_in) for i in range(n_in))
    bo = tuple((e.cod[j], j in claim.guarded_out) for j in range(n_out))
    return Diagram(tuple(sig for sig, _, _ in fr.boxes), frozenset(wires), bi, bo)


# --- isomorphism ------------------------------------------------------------


def diagram_iso(d1: Diagram, d2: Diagram) -> bool:
    """Decide whether a box bijection exists that preserves signatures,
    gate order, wires, and both boundaries verbatim."""
    if d1.boundary_in != d2.boundary_in or d1.boundary_out != d2.boundary_out:
        return False
    if len(d1.boxes) != len(d2.boxes):
        return False
    by_sig: dict[BoxSig, list[int]] = {}
    for b, sig in enumerate(d2.boxes):
        by_sig.setdefault(sig, []).append(b)
    groups = sorted(
        ((sig, list(idxs)) for sig, idxs in by_sig.items()),
        key=lambda kv: str(kv[0]),
    )
    want: dict[BoxSig, int] = {}
    for sig in d1.boxes:
        want[sig] = want.get(sig, 0) + 1
    for sig, idxs in groups:
        if want.get(sig, 0) != len(idxs):
            return False
    if sum(want.values()) != len(d1.boxes):
        return False

    wires2 = d2.wires
    order1 = sorted(range(len(d1.boxes)), key=lambda b: str(d1.boxes[b]))

    def mapped(p: Port, assign: dict[int, int]) -> Port | None:
        if p[0] in ("din", "dout"):
            return p
        if p[1] in assign:
            return (p[0], assign[p[1]], p[2])
        return None

    def consistent(assign: dict[int, int]) -> bool:
        for src, dst in d1.wires:
            ms, md = mapped(src, assign), mapped(dst, assign)
            if ms is not None and md is not None and (ms, md) not in wires2:
                return False
        return True

    def backtrack(pos: int, assign: dict[int, int], used: set[int]) -> bool:
        if pos == len(order1):
            return True
        b1 = order1[pos]
        for b2 in by_sig.get(d1.boxes[b1], []):
            if b2 in used:
                continue
            assign[b1] = b2
            used.add(b2)
            if consistent(assign) and backtrack(pos + 1, assign, used):
                return True
            del assign[b1]
            used.discard(b2)
        return False

    return backtrack(0, {}, set())


# --- reversal ---------------------------------------------------------------


def reverse_diagram(d: Diagram) -> Diagram:
    """Turn the diagram half a turn: reverse every wire, dualize every
    box split, swap the boundaries, and flip their decorations."""
    from .signatures import dual_split

    boxes = tuple(
        BoxSig(sig.name, sig.outputs, sig.inputs, dual_split(sig.split))
        for sig in d.boxes
    )

    def rev(p: Port) -> Port:
        if p[0] == "din":
            return ("dout", p[1])
        if p[0] == "dout":
            return ("din", p[1])
        if p[0] == "bin":
            return ("bout", p[1], p[2])
        return ("bin", p[1], p[2])

    wires = frozenset((rev(dst), rev(src)) for src, dst in d.wires)
    bi = tuple((a, not g) for a, g in d.boundary_out)
    bo = tuple((a, not g) for a, g in d.boundary_in)
    return Diagram(boxes, wires, bi, bo)


# --- serialization ----------------------------------------------------------


def _sig_to_json(sig: BoxSig) -> dict:
    return {
        "name": sig.name,
        "inputs": str(sig.inputs),
        "outputs": str(sig.outputs),
        "unguarded_in": sorted(sig.split.unguarded_in),
        "guarded_out": sorted(sig.split.guarded_out),
    }


def _sig_from_json(d: dict) -> BoxSig:
    inputs = parse_object(d["inputs"])
    outputs = parse_object(d["outputs"])
    split = mk_split(
        len(inputs), len(outputs), d.get("unguarded_in", []), d.get("guarded_out", [])
    )
    return BoxSig(d["name"], inputs, outputs, split)


def _port_to_json(p: Port) -> list:
    return list(p)


def _port_from_json(v: list) -> Port:
    kind = v[0]
    if kind in ("din", "dout"):
        return (kind, int(v[1]))
    if kind in ("bin", "bout"):
        return (kind, int(v[1]), int(v[2]))
    raise DiagramError(f"bad port {v!r}")


def export_json(d: Diagram) -> str:
    payload = {
        "boxes": [{"id": b, "sig": _sig_to_json(sig)} for b, sig in enumerate(d.boxes)],
        "wires": sorted(
            [[_port_to_json(s), _port_to_json(t)] for s, t in d.wires]
        ),
        "in": [{"atom": a, "guarded": g} for a, g in d.boundary_in],
        "out": [{"atom": a, "guarded": g} for a, g in d.boundary_out],
    }
    return json.dumps(payload, indent=2)


def import_json(text: str) -> Diagram:
    try:
        payload = json.loads(text)
        boxes_raw = sorted(payload["boxes"], key=lambda b: b["id"])
        if [b["id"] for b in boxes_raw] != list(range(len(boxes_raw))):
            raise DiagramError("box ids must be 0..n-1")
        boxes = tuple(_sig_from_json(b["sig"]) for b in boxes_raw)
        wires = frozenset(
            (_port_from_json(s), _port_from_json(t)) for s, t in payload["wires"]
        )
        bi = tuple((p["atom"], bool(p["guarded"])) for p in payload["in"])
        bo = tuple((p["atom"], bool(p["guarded"])) for p in payload["out"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DiagramError(f"bad diagram JSON: {exc}") from None
    return Diagram(boxes, wires, bi, bo)


def export_dot(d: Diagram) -> str:
    """Graphviz rendering; record nodes, filled marks on the promising
    gates (unguarded inputs, guarded outputs)."""

    def gate_label(flag: bool, tag: str) -> str:
        return f"<{tag}> {'&#9679;' if flag else '&#9675;'}"

    lines = ["digraph diagram {", "  rankdir=LR;", "  node [shape=record];"]
    for i, (a, g) in enumerate(d.boundary_in):
        lines.append(f'  din{i} [label="in {i}: {a}", shape=plaintext];')
    for j, (a, g) in enumerate(d.boundary_out):
        lines.append(f'  dout{j} [label="out {j}: {a}", shape=plaintext];')
    for b, sig in enumerate(d.boxes):
        ins = "|".join(
            gate_label(k in sig.split.unguarded_in, f"i{k}")
            for k in range(len(sig.inputs))
        )
        outs = "|".join(
            gate_label(k in sig.split.guarded_out, f"o{k}")
            for k in range(len(sig.outputs))
        )
        left = f"{{{ins}}}|" if ins else ""
        right = f"|{{{outs}}}" if outs else ""
        lines.append(f'  b{b} [label="{{{left}{sig.name}{right}}}"];')

    def dot_ref(p: Port) -> str:
        if p[0] == "din":
            return f"din{p[1]}"
        if p[0] == "dout":
            return f"dout{p[1]}"
        side = "i" if p[0] == "bin" else "o"
        return f"b{p[1]}:{side}{p[2]}"

    for src, dst in sorted(d.wires):
        lines.append(f"  {dot_ref(src)} -> {dot_ref(dst)};")
    lines.append("}")
    return "\n".join(lines)
