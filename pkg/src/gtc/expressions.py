"""Morphism expression AST, parser, and printer.

Concrete syntax::

    e  := t (';' t)*                    composition, diagrammatic order
    t  := a ('(*)' a)*                  tensor, binds tighter than ';'
    a  := NAME                          a declared box
        | 'id' '[' obj ']'
        | 'sym' '[' obj ',' obj ']'
        | 'tr' '[' obj ':' corners ']' '{' e '}'
        | '(' e ')'
    corners := obj '|' obj '->' obj '|' obj

A trace ``tr[U: A|B -> C|D]{ body }`` feeds the trailing U outputs of the
body back into its U inputs; the body must have profile ``A*U*B -> C*D*U``
and the annotation claims the body split with A and U unguarded on the
input side, D and U guarded on the output side.  The trace itself then has
profile ``A*B -> C*D``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from .signatures import (
    UNIT,
    BoxSig,
    ObjectExpr,
    SignatureError,
    Split,
    mk_split,
    parse_box_decl,
    parse_object,
)


class TypingError(ValueError):
    """Profile mismatch while building or parsing an expression."""


class ParseError(ValueError):
    """Concrete-syntax error, with position information."""


@dataclass(frozen=True)
class MorphExpr:
    """Base class; every node exposes a plain profile dom -> cod."""

    @property
    def dom(self) -> ObjectExpr:
        raise NotImplementedError

    @property
    def cod(self) -> ObjectExpr:
        raise NotImplementedError

    def __rshift__(self, other: "MorphExpr") -> "MorphExpr":
        return Comp(self, other)

    def __matmul__(self, other: "MorphExpr") -> "MorphExpr":
        return Tensor(self, other)


@dataclass(frozen=True)
class Box(MorphExpr):
    sig: BoxSig

    @property
    def dom(self) -> ObjectExpr:
        return self.sig.inputs

    @property
    def cod(self) -> ObjectExpr:
        return self.sig.outputs


@dataclass(frozen=True)
class Id(MorphExpr):
    obj: ObjectExpr

    @property
    def dom(self) -> ObjectExpr:
        return self.obj

    @property
    def cod(self) -> ObjectExpr:
        return self.obj


@dataclass(frozen=True)
class Sym(MorphExpr):
    left: ObjectExpr
    right: ObjectExpr

    @property
    def dom(self) -> ObjectExpr:
        return self.left * self.right

    @property
    def cod(self) -> ObjectExpr:
        return self.right * self.left


@dataclass(frozen=True)
class Comp(MorphExpr):
    """first ; second (run ``first``, feed its outputs to ``second``)."""

    first: MorphExpr
    second: MorphExpr

    def __post_init__(self) -> None:
        if self.first.cod.factors != self.second.dom.factors:
            raise TypingError(
                f"cannot compose: left produces {self.first.cod}, "
                f"right consumes {self.second.dom}"
            )

    @property
    def dom(self) -> ObjectExpr:
        return self.first.dom

    @cached_property
    def cod(self) -> ObjectExpr:
        return self.second.cod


@dataclass(frozen=True)
class Tensor(MorphExpr):
    top: MorphExpr
    bottom: MorphExpr

    @cached_property
    def dom(self) -> ObjectExpr:
        return self.top.dom * self.bottom.dom

    @cached_property
    def cod(self) -> ObjectExpr:
        return self.top.cod * self.bottom.cod


@dataclass(frozen=True)
class Trace(MorphExpr):
    """Feedback node; ``annotation`` is the split claimed for the body."""

    loop: ObjectExpr
    body: MorphExpr
    annotation: Split

    def __post_init__(self) -> None:
        a, b, c, d = _check_trace_shape(self.loop, self.body, self.annotation)
        object.__setattr__(self, "_corners", (a, b, c, d))

    @property
    def corners(self) -> tuple[ObjectExpr, ObjectExpr, ObjectExpr, ObjectExpr]:
        """The four boundary words (A, B, C, D) of the conclusion."""
        return self._corners  # type: ignore[attr-defined]

    @cached_property
    def dom(self) -> ObjectExpr:
        a, b, _, _ = self.corners
        return a * b

    @cached_property
    def cod(self) -> ObjectExpr:
        _, _, c, d = self.corners
        return c * d

    def conclusion_split(self) -> Split:
        a, _, c, d = self.corners
        return mk_split(
            len(self.dom),
            len(self.cod),
            unguarded_in=range(len(a)),
            guarded_out=range(len(c), len(c) + len(d)),
        )


def _check_trace_shape(loop: ObjectExpr, body: MorphExpr, ann: Split):
    """Validate the canonical trace shape and recover the corner words."""
    k = len(loop)
    dom, cod = body.dom, body.cod
    if ann.n_in != len(dom) or ann.n_out != len(cod):
        raise TypingError("trace annotation does not cover the body profile")
    n_ung_in = len(ann.unguarded_in)
    n_grd_out = len(ann.guarded_out)
    if ann.unguarded_in != frozenset(range(n_ung_in)):
        raise TypingError("trace annotation: unguarded inputs must be a gate prefix")
    if ann.guarded_out != frozenset(range(len(cod) - n_grd_out, len(cod))):
        raise TypingError("trace annotation: guarded outputs must be a gate suffix")
    if n_ung_in < k or n_grd_out < k:
        raise TypingError("trace annotation must cover the loop gates")
    a_len = n_ung_in - k
    if dom.factors[a_len : a_len + k] != loop.factors:
        raise TypingError(
            f"body domain {dom} lacks loop word {loop} at gates "
            f"{a_len}..{a_len + k - 1}"
        )
    if cod.factors[len(cod) - k :] != loop.factors:
        raise TypingError(f"body codomain {cod} does not end with loop word {loop}")
    a = dom[:a_len]
    b = dom[a_len + k :]
    c = cod[: len(cod) - n_grd_out]
    d = cod[len(cod) - n_grd_out : len(cod) - k]
    return a, b, c, d


def trace(loop: ObjectExpr, body: MorphExpr, a_len: int, c_len: int) -> Trace:
    """Build a trace node from corner lengths instead of a full split."""
    ann = mk_split(
        len(body.dom),
        len(body.cod),
        unguarded_in=range(a_len + len(loop)),
        guarded_out=range(c_len, len(body.cod)),
    )
    return Trace(loop, body, ann)


def leaf_boxes(e: MorphExpr) -> list[BoxSig]:
    """Box leaves in left-to-right order (the diagram's box multiset)."""
    out: list[BoxSig] = []

    def go(x: MorphExpr) -> None:
        if isinstance(x, Box):
            out.append(x.sig)
        elif isinstance(x, Comp):
            go(x.first)
            go(x.second)
        elif isinstance(x, Tensor):
            go(x.top)
            go(x.bottom)
        elif isinstance(x, Trace):
            go(x.body)

    go(e)
    return out


# --- printer ---------------------------------------------------------------


def print_expr(e: MorphExpr) -> str:
    """Render with minimal parentheses; both binary operators print as
    left-associated chains, so right-nested children get parenthesized."""
    return _pp(e, 0)


def _pp(e: MorphExpr, level: int) -> str:
    # level 0: composition context; 1: tensor context; 2: atom context
    if isinstance(e, Comp):
        s = f"{_pp(e.first, 1)} ; {_pp(e.second, 2 if isinstance(e.second, Comp) else 1)}"
        return f"({s})" if level >= 1 else s
    if isinstance(e, Tensor):
        right = e.bottom
        s = f"{_pp(e.top, 2)} (*) {_pp(right, 2)}"
        if isinstance(right, Tensor):
            s = f"{_pp(e.top, 2)} (*) ({_pp(right, 0)})"
        return f"({s})" if level >= 2 else s
    if isinstance(e, Box):
        return e.sig.name
    if isinstance(e, Id):
        return f"id[{e.obj}]"
    if isinstance(e, Sym):
        return f"sym[{e.left},{e.right}]"
    if isinstance(e, Trace):
        a, b, c, d = e.corners
        return f"tr[{e.loop}: {a}|{b} -> {c}|{d}]{{ {_pp(e.body, 0)} }}"
    raise TypeError(f"not an expression: {e!r}")


# --- parser ----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<tensor>\(\*\))|(?P<lpar>\()|(?P<rpar>\))|(?P<semi>;)"
    r"|(?P<lbrak>\[)|(?P<rbrak>\])|(?P<lbrace>\{)|(?P<rbrace>\})"
    r"|(?P<arrow>->)|(?P<colon>:)|(?P<comma>,)|(?P<pipe>\|)|(?P<star>\*)"
    r"|(?P<name>[A-Za-z0-9_]+))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r} at position {pos}")
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, sigs: dict[str, BoxSig]):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.sigs = sigs

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self, kind: str) -> str:
        k, v, p = self.toks[self.i]
        if k != kind:
            raise ParseError(f"expected {kind} at position {p}, got {v!r}")
        self.i += 1
        return v

    def at(self, kind: str) -> bool:
        return self.toks[self.i][0] == kind

    # object words are re-assembled from name/star tokens
    def parse_obj(self) -> ObjectExpr:
        k, v, p = self.peek()
        if k != "name":
            raise ParseError(f"expected object at position {p}, got {v!r}")
        parts = [self.take("name")]
        while self.at("star"):
            self.take("star")
            parts.append(self.take("name"))
        if parts == ["I"]:
            return UNIT
        try:
            return parse_object("*".join(parts))
        except SignatureError as exc:
            raise ParseError(f"bad object at position {p}: {exc}") from None

    def parse_expr(self) -> MorphExpr:
        e = self.parse_tensor()
        while self.at("semi"):
            self.take("semi")
            rhs = self.parse_tensor()
            try:
                e = Comp(e, rhs)
            except TypingError as exc:
                raise ParseError(str(exc)) from None
        return e

    def parse_tensor(self) -> MorphExpr:
        e = self.parse_atom()
        while self.at("tensor"):
            self.take("tensor")
            e = Tensor(e, self.parse_atom())
        return e

    def parse_atom(self) -> MorphExpr:
        k, v, p = self.peek()
        if k == "lpar":
            self.take("lpar")
            e = self.parse_expr()
            self.take("rpar")
            return e
        if k != "name":
            raise ParseError(f"expected expression at position {p}, got {v!r}")
        if v == "id":
            self.take("name")
            self.take("lbrak")
            o = self.parse_obj()
            self.take("rbrak")
            return Id(o)
        if v == "sym":
            self.take("name")
            self.take("lbrak")
            left = self.parse_obj()
            self.take("comma")
            right = self.parse_obj()
            self.take("rbrak")
            return Sym(left, right)
        if v == "tr":
            return self.parse_trace()
        self.take("name")
        if v not in self.sigs:
            raise ParseError(f"unknown box {v!r} at position {p}")
        return Box(self.sigs[v])

    def parse_trace(self) -> MorphExpr:
        self.take("name")  # 'tr'
        self.take("lbrak")
        loop = self.parse_obj()
        self.take("colon")
        a = self.parse_obj()
        self.take("pipe")
        b = self.parse_obj()
        self.take("arrow")
        c = self.parse_obj()
        self.take("pipe")
        d = self.parse_obj()
        self.take("rbrak")
        self.take("lbrace")
        body = self.parse_expr()
        self.take("rbrace")
        want_dom = a * loop * b
        want_cod = c * d * loop
        if body.dom.factors != want_dom.factors or body.cod.factors != want_cod.factors:
            raise ParseError(
                f"trace body has profile {body.dom} -> {body.cod}, "
                f"annotation requires {want_dom} -> {want_cod}"
            )
        try:
            return trace(loop, body, len(a), len(c))
        except TypingError as exc:
            raise ParseError(str(exc)) from None


def parse_expr(text: str, sigs: dict[str, BoxSig]) -> MorphExpr:
    """Parse a single expression against a signature registry."""
    p = _Parser(text, sigs)
    e = p.parse_expr()
    k, v, pos = p.peek()
    if k != "eof":
        raise ParseError(f"trailing input at position {pos}: {v!r}")
    return e


# --- .gtc files -------------------------------------------------------------


@dataclass(frozen=True)
class SourceFile:
    """A parsed .gtc file: signature registry plus named expressions."""

    sigs: dict[str, BoxSig]
    exprs: dict[str, MorphExpr]


def parse_source(text: str) -> SourceFile:
    """Parse a .gtc source: box declarations then ``let name = expr`` lines.

    Lines starting with ``#`` (or anything after ``#``) are comments.
    """
    sigs: dict[str, BoxSig] = {}
    exprs: dict[str, MorphExpr] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("box"):
                sig = parse_box_decl(line)
                if sig.name in sigs:
                    raise SignatureError(f"duplicate box {sig.name!r}")
                sigs[sig.name] = sig
            elif line.startswith("let"):
                m = re.fullmatch(r"let\s+(\w+)\s*=\s*(.+)", line)
                if m is None:
                    raise ParseError("malformed let binding")
                name, body = m.group(1), m.group(2)
                if name in exprs:
                    raise ParseError(f"duplicate binding {name!r}")
                exprs[name] = parse_expr(body, sigs)
            else:
                raise ParseError(f"unrecognized line: {line!r}")
        except (ParseError, SignatureError, TypingError) as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return SourceFile(sigs, exprs)
