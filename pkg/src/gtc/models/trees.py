"""Stage-indexed finite sets (monoidal structure = product).

An object assigns each stage 1..N a finite set together with restriction
maps from each stage to the one below; all restrictions here are required
surjective so that stage-(n-1) values always have stage-n representatives.
A morphism is a stagewise family of maps commuting with the restrictions.

A split is respected when every promised (guarded) output runs one stage
behind the promised (unguarded) inputs: its stage-1 component ignores
them, and its stage-(n+1) component sees them only through the
restriction to stage n.  Feedback is then solved stage by stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from ..signatures import BoxSig, ObjectExpr
from .base import EvalError


@dataclass(frozen=True, eq=False)
class StageObject:
    stages: tuple[tuple[str, ...], ...]
    restr: tuple[dict, ...]  # restr[n]: stage n+2 -> stage n+1

    def __post_init__(self) -> None:
        if len(self.restr) != len(self.stages) - 1:
            raise EvalError("need exactly one restriction per adjacent stage pair")
        for n, r in enumerate(self.restr):
            hi, lo = self.stages[n + 1], self.stages[n]
            if set(r) != set(hi):
                raise EvalError(f"restriction {n} does not cover stage {n + 2}")
            if not set(r.values()) <= set(lo):
                raise EvalError(f"restriction {n} leaves stage {n + 1}")
            if set(r.values()) != set(lo):
                raise EvalError(f"restriction {n} is not surjective")
        if any(len(s) == 0 for s in self.stages):
            raise EvalError("empty stage sets are not supported")

    def __eq__(self, other):
        return (
            isinstance(other, StageObject)
            and self.stages == other.stages
            and self.restr == other.restr
        )

    def __hash__(self):
        return hash((self.stages, tuple(tuple(sorted(r.items())) for r in self.restr)))


def _stage_tuples(gates: tuple[StageObject, ...], n: int):
    return product(*(g.stages[n] for g in gates))


def _restrict(gates: tuple[StageObject, ...], n: int, values: tuple) -> tuple:
    """Restrict a stage-(n+1) tuple down to stage n (both 1-based)."""
    return tuple(g.restr[n - 1][v] for g, v in zip(gates, values))


@dataclass(frozen=True, eq=False)
class ToTMorphism:
    dom: tuple[StageObject, ...]
    cod: tuple[StageObject, ...]
    maps: tuple[dict, ...]  # maps[n]: stage-(n+1) tuples -> tuples

    def __post_init__(self) -> None:
        depth = len(self.maps)
        for n in range(depth):
            want = set(_stage_tuples(self.dom, n))
            if set(self.maps[n]) != want:
                raise EvalError(f"stage {n + 1} map does not cover its domain")
        for n in range(depth - 1):
            for x in _stage_tuples(self.dom, n + 1):
                lhs = _restrict(self.cod, n + 1, self.maps[n + 1][x])
                rhs = self.maps[n][_restrict(self.dom, n + 1, x)]
                if lhs != rhs:
                    raise EvalError(
                        f"naturality fails between stages {n + 2} and {n + 1} at {x}"
                    )

    def __eq__(self, other):
        return (
            isinstance(other, ToTMorphism)
            and self.dom == other.dom
            and self.cod == other.cod
            and self.maps == other.maps
        )


class ToposOfTreesModel:
    name = "tot"

    def __init__(self, objects: dict[str, StageObject]):
        depths = {len(o.stages) for o in objects.values()}
        if len(depths) > 1:
            raise EvalError("all carriers must use the same stage count")
        self.depth = depths.pop() if depths else 1
        self.objects = dict(objects)

    def ob(self, word: ObjectExpr) -> tuple[StageObject, ...]:
        try:
            return tuple(self.objects[a] for a in word)
        except KeyError as exc:
            raise EvalError(f"no carrier for atom {exc.args[0]!r}") from None

    def identity(self, word: ObjectExpr) -> ToTMorphism:
        dom = self.ob(word)
        maps = tuple(
            {x: x for x in _stage_tuples(dom, n)} for n in range(self.depth)
        )
        return ToTMorphism(dom, dom, maps)

    def symmetry(self, left: ObjectExpr, right: ObjectExpr) -> ToTMorphism:
        dom = self.ob(left * right)
        cod = self.ob(right * left)
        k = len(left)
        maps = tuple(
            {x: x[k:] + x[:k] for x in _stage_tuples(dom, n)}
            for n in range(self.depth)
        )
        return ToTMorphism(dom, cod, maps)

    def compose(self, f: ToTMorphism, g: ToTMorphism) -> ToTMorphism:
        if f.cod != g.dom:
            raise EvalError("composition mismatch")
        maps = tuple(
            {x: g.maps[n][y] for x, y in f.maps[n].items()}
            for n in range(len(f.maps))
        )
        return ToTMorphism(f.dom, g.cod, maps)

    def tensor(self, f: ToTMorphism, g: ToTMorphism) -> ToTMorphism:
        ni = len(f.dom)
        maps = []
        for n in range(len(f.maps)):
            table = {}
            for x in _stage_tuples(f.dom + g.dom, n):
                table[x] = f.maps[n][x[:ni]] + g.maps[n][x[ni:]]
            maps.append(table)
        return ToTMorphism(f.dom + g.dom, f.cod + g.cod, tuple(maps))

    def trace(self, m: ToTMorphism, loop, corners, tol=None) -> ToTMorphism:
        a, b, c, d = corners
        n_a, n_cd, k = len(a), len(c) + len(d), len(loop)
        dom = m.dom[:n_a] + m.dom[n_a + k :]
        cod = m.cod[:n_cd]
        loops = m.dom[n_a : n_a + k]

        def value(n: int, x: tuple) -> tuple:
            # restriction chain of the outer input down to stage 1
            chain = [x]
            for s in range(n, 0, -1):
                chain.append(_restrict(dom, s, chain[-1]))
            chain.reverse()  # chain[s] lives at stage s+1
            u: tuple | None = None
            for s in range(n + 1):
                if s == 0:
                    z = tuple(g.stages[0][0] for g in loops)
                else:
                    z = tuple(
                        next(e for e, lo in g.restr[s - 1].items() if lo == uv)
                        for g, uv in zip(loops, u)
                    )
                xa, xb = chain[s][:n_a], chain[s][n_a:]
                y = m.maps[s][xa + z + xb]
                u = y[n_cd:]
            xa, xb = x[:n_a], x[n_a:]
            y = m.maps[n][xa + u + xb]
            if y[n_cd:] != u:
                raise EvalError(
                    "feedback does not settle stagewise: a binding is not "
                    "actually delayed on its promised gates"
                )
            return y[:n_cd]

        maps = tuple(
            {x: value(n, x) for x in _stage_tuples(dom, n)}
            for n in range(len(m.maps))
        )
        return ToTMorphism(dom, cod, maps)

    def validate_box(self, sig: BoxSig, m: ToTMorphism) -> None:
        if m.dom != self.ob(sig.inputs) or m.cod != self.ob(sig.outputs):
            raise EvalError(f"binding for {sig.name!r} has the wrong carriers")
        ug_in = sorted(sig.split.unguarded_in)
        g_out = sorted(sig.split.guarded_out)
        if not g_out or not ug_in:
            return
        for n in range(len(m.maps)):
            buckets: dict[tuple, tuple] = {}
            for x, y in m.maps[n].items():
                if n == 0:
                    key = tuple(v for g, v in enumerate(x) if g not in sig.split.unguarded_in)
                else:
                    key = tuple(
                        m.dom[g].restr[n - 1][v] if g in sig.split.unguarded_in else v
                        for g, v in enumerate(x)
                    )
                out = tuple(y[j] for j in g_out)
                if buckets.setdefault(key, out) != out:
                    raise EvalError(
                        f"binding for {sig.name!r} is not delayed on its promised "
                        f"outputs at stage {n + 1}"
                    )

    def equal(self, m1: ToTMorphism, m2: ToTMorphism, tol=None, rng=None):
        same = m1 == m2
        return same, 0.0 if same else 1.0


def tot_fixpoint(f: ToTMorphism, witness: tuple[dict, ...], y: list[tuple]):
    """Solve x = f(y, x) stage by stage for f: Y x X -> X with a delayed
    witness g: the stage-1 value ignores x, later stages read the previous
    stage's x.

    ``witness[n]`` maps (y stage-(n+1) tuple, previous x or "*") to x;
    ``y`` is a compatible family of stage tuples for the parameter gates.
    Returns the x family and asserts the fixpoint property.
    """
    depth = len(f.maps)
    if len(f.cod) != 1 or f.dom[-1] != f.cod[0]:
        raise EvalError("fixpoint needs a morphism of shape Y x X -> X")
    ys = [tuple(v) for v in y]
    if len(ys) != depth:
        raise EvalError("parameter family must cover every stage")
    xs: list = []
    for n in range(depth):
        prev = xs[n - 1] if n else "*"
        try:
            xs.append(witness[n][(ys[n], prev)])
        except KeyError:
            raise EvalError("witness does not cover the needed arguments") from None
    for n in range(depth):
        if f.maps[n][ys[n] + (xs[n],)] != (xs[n],):
            raise EvalError("witness disagrees with the morphism: not a fixpoint")
    return xs
