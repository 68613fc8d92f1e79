"""Finite posets and monotone maps (monoidal structure = product).

Expression evaluation uses flat (discrete) carriers, where a split is
respected exactly when every promised output is constant in the promised
inputs; feedback then settles in one step.  The recursion bridge between
plain least-fixpoint recursion on pointed carriers and guarded recursion
on lifted arguments lives here too: ``grec_to_rec`` and ``rec_to_grec``
transport one operator into the other and are mutually inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from ..signatures import BoxSig, ObjectExpr
from .base import EvalError


@dataclass(frozen=True)
class Poset:
    elements: tuple[str, ...]
    leq: frozenset  # all pairs (a, b) with a <= b, reflexivity included

    def __post_init__(self) -> None:
        elems = set(self.elements)
        if len(elems) != len(self.elements):
            raise EvalError("duplicate poset elements")
        for a, b in self.leq:
            if a not in elems or b not in elems:
                raise EvalError(f"order pair ({a}, {b}) uses unknown elements")
        for a in elems:
            if (a, a) not in self.leq:
                raise EvalError(f"order not reflexive at {a}")
        for a, b in self.leq:
            for c, d in self.leq:
                if b == c and (a, d) not in self.leq:
                    raise EvalError("order not transitive")
                if (b, a) in self.leq and a != b:
                    raise EvalError("order not antisymmetric")

    def le(self, a: str, b: str) -> bool:
        return (a, b) in self.leq

    @property
    def is_flat(self) -> bool:
        return all(a == b for a, b in self.leq)

    def bottom(self) -> str | None:
        for a in self.elements:
            if all((a, b) in self.leq for b in self.elements):
                return a
        return None


def flat(elements) -> Poset:
    elements = tuple(elements)
    return Poset(elements, frozenset((a, a) for a in elements))


def lift(p: Poset) -> tuple[Poset, str]:
    """Adjoin a fresh bottom; returns (lifted poset, bottom's name)."""
    bot = "_BOT"
    while bot in p.elements:
        bot += "_"
    leq = set(p.leq) | {(bot, e) for e in p.elements} | {(bot, bot)}
    return Poset((bot,) + p.elements, frozenset(leq)), bot


def product_order(posets: tuple[Poset, ...]):
    elems = list(product(*(p.elements for p in posets)))

    def le(x, y):
        return all(p.le(a, b) for p, a, b in zip(posets, x, y))

    return elems, le


def is_monotone(table: dict, dom: tuple[Poset, ...], cod: tuple[Poset, ...]) -> bool:
    elems, le = product_order(dom)
    _, le_out = product_order(cod)
    return all(
        le_out(table[x], table[y]) for x in elems for y in elems if le(x, y)
    )


@dataclass(frozen=True, eq=False)
class PosetMorphism:
    dom: tuple[Poset, ...]
    cod: tuple[Poset, ...]
    table: dict

    def __post_init__(self) -> None:
        elems, _ = product_order(self.dom)
        if set(self.table) != set(elems):
            raise EvalError("table does not cover the domain")
        out_elems = set(product(*(p.elements for p in self.cod)))
        for y in self.table.values():
            if y not in out_elems:
                raise EvalError("table leaves the codomain")
        if not is_monotone(self.table, self.dom, self.cod):
            raise EvalError("table is not monotone")

    def __eq__(self, other):
        return (
            isinstance(other, PosetMorphism)
            and self.dom == other.dom
            and self.cod == other.cod
            and self.table == other.table
        )


class FlatPosetModel:
    name = "flat"

    def __init__(self, objects: dict[str, Poset]):
        for name, p in objects.items():
            if not p.is_flat:
                raise EvalError(
                    f"carrier for {name!r} is not flat; expression evaluation "
                    f"uses discrete carriers only"
                )
        self.objects = dict(objects)

    def ob(self, word: ObjectExpr) -> tuple[Poset, ...]:
        try:
            return tuple(self.objects[a] for a in word)
        except KeyError as exc:
            raise EvalError(f"no carrier for atom {exc.args[0]!r}") from None

    def identity(self, word: ObjectExpr) -> PosetMorphism:
        dom = self.ob(word)
        elems, _ = product_order(dom)
        return PosetMorphism(dom, dom, {x: x for x in elems})

    def symmetry(self, left: ObjectExpr, right: ObjectExpr) -> PosetMorphism:
        dom = self.ob(left * right)
        cod = self.ob(right * left)
        k = len(left)
        elems, _ = product_order(dom)
        return PosetMorphism(dom, cod, {x: x[k:] + x[:k] for x in elems})

    def compose(self, f: PosetMorphism, g: PosetMorphism) -> PosetMorphism:
        if f.cod != g.dom:
            raise EvalError("composition mismatch")
        return PosetMorphism(f.dom, g.cod, {x: g.table[y] for x, y in f.table.items()})

    def tensor(self, f: PosetMorphism, g: PosetMorphism) -> PosetMorphism:
        ni = len(f.dom)
        elems, _ = product_order(f.dom + g.dom)
        table = {x: f.table[x[:ni]] + g.table[x[ni:]] for x in elems}
        return PosetMorphism(f.dom + g.dom, f.cod + g.cod, table)

    def trace(self, m: PosetMorphism, loop, corners, tol=None) -> PosetMorphism:
        a, b, c, d = corners
        n_a, n_cd, k = len(a), len(c) + len(d), len(loop)
        dom = m.dom[:n_a] + m.dom[n_a + k :]
        cod = m.cod[:n_cd]
        loops = m.dom[n_a : n_a + k]
        for p in loops:
            if not p.elements:
                raise EvalError("empty loop carrier")
        fill = tuple(p.elements[0] for p in loops)
        elems, _ = product_order(dom)
        table = {}
        for x in elems:
            xa, xb = x[:n_a], x[n_a:]
            u = m.table[xa + fill + xb][n_cd:]
            y = m.table[xa + u + xb]
            if y[n_cd:] != u:
                raise EvalError(
                    "feedback does not settle: a binding is not constant on its "
                    "promised gates"
                )
            table[x] = y[:n_cd]
        return PosetMorphism(dom, cod, table)

    def validate_box(self, sig: BoxSig, m: PosetMorphism) -> None:
        if m.dom != self.ob(sig.inputs) or m.cod != self.ob(sig.outputs):
            raise EvalError(f"binding for {sig.name!r} has the wrong carriers")
        g_out = sorted(sig.split.guarded_out)
        if not g_out or not sig.split.unguarded_in:
            return
        buckets: dict[tuple, tuple] = {}
        for x, y in m.table.items():
            key = tuple(v for g, v in enumerate(x) if g not in sig.split.unguarded_in)
            out = tuple(y[j] for j in g_out)
            if buckets.setdefault(key, out) != out:
                raise EvalError(
                    f"binding for {sig.name!r} is not constant in its promised "
                    f"inputs on promised outputs"
                )

    def equal(self, m1: PosetMorphism, m2: PosetMorphism, tol=None, rng=None):
        same = m1 == m2
        return same, 0.0 if same else 1.0


# --- recursion bridge ---------------------------------------------------------


def lfp_rec(f: dict, b_poset: Poset, a_poset: Poset) -> dict:
    """Least-fixpoint recursion: for f: B x A -> A monotone with A
    pointed, iterate from the bottom until stable."""
    bot = a_poset.bottom()
    if bot is None:
        raise EvalError("recursion needs a pointed carrier")
    out = {}
    for bv in b_poset.elements:
        x = bot
        for _ in range(len(a_poset.elements) + 1):
            nxt = f[(bv, x)]
            if nxt == x:
                break
            if not a_poset.le(x, nxt):
                raise EvalError("iteration left the ascending chain; f not monotone?")
            x = nxt
        else:
            raise EvalError("no fixpoint within the carrier height")
        out[bv] = x
    return out


def rec_to_grec(rec):
    """Transport a recursion operator to a guarded one: given the witness
    g: Y x TX -> X of a guarded map f = g(id x eta), solve z = eta g(y, z)
    over the lifted carrier by ``rec``, then finish with one g step.

    Witness tables index the lifted carrier by ``lift(x_poset)`` names.
    """

    def grec(g: dict, y_poset: Poset, x_poset: Poset) -> dict:
        tx, _ = lift(x_poset)
        want = {(yv, z) for yv in y_poset.elements for z in tx.elements}
        if set(g) != want:
            raise EvalError("witness table does not cover Y x TX")
        # eta injects by name, so eta . g reuses the same table over TX
        z_star = rec(dict(g), y_poset, tx)
        return {yv: g[(yv, z_star[yv])] for yv in y_poset.elements}

    return grec


def grec_to_rec(grec):
    """Transport a guarded operator back: for f: B x A -> A over pointed A,
    recurse the lifted map eta f (id x alg) through ``grec`` and collapse
    with the algebra."""

    def rec(f: dict, b_poset: Poset, a_poset: Poset) -> dict:
        bot_a = a_poset.bottom()
        if bot_a is None:
            raise EvalError("recursion needs a pointed carrier")
        ta, bot = lift(a_poset)
        tta, bot2 = lift(ta)

        def alg(t: str) -> str:  # structure map TA -> A
            return bot_a if t == bot else t

        def alg2(w: str) -> str:  # a . Ta : TTA -> A
            if w == bot2:
                return bot_a
            return alg(w)

        g = {
            (bv, w): f[(bv, alg2(w))]
            for bv in b_poset.elements
            for w in tta.elements
        }
        z = grec(g, b_poset, ta)
        return {bv: alg(z[bv]) for bv in b_poset.elements}

    return rec
