"""The interpretation routine shared by all model backends.

A backend supplies the categorical operations; this module folds an
expression over them.  Box bindings are validated against their declared
splits once per evaluation, in whatever sense the backend defines
(image restrictions, contraction factors, stage delays, factorization
witnesses).
"""

from __future__ import annotations

from ..expressions import Box, Comp, Id, MorphExpr, Sym, Tensor, Trace


class EvalError(ValueError):
    """Unbound box, witness/split inconsistency, or bad model data."""


def eval_expr(e: MorphExpr, model, boxes: dict, tol: float | None = None):
    """Denotation of ``e`` in ``model`` under the given box bindings.

    ``tol`` is forwarded to backends that solve feedback numerically.
    The expression is assumed to have passed ``check_annotated``; this
    routine still validates each binding against its declared split.
    """
    checked: set[str] = set()

    def go(x: MorphExpr):
        if isinstance(x, Box):
            name = x.sig.name
            if name not in boxes:
                raise EvalError(f"no binding for box {name!r}")
            m = boxes[name]
            if name not in checked:
                model.validate_box(x.sig, m)
                checked.add(name)
            return m
        if isinstance(x, Id):
            return model.identity(x.obj)
        if isinstance(x, Sym):
            return model.symmetry(x.left, x.right)
        if isinstance(x, Comp):
            return model.compose(go(x.first), go(x.second))
        if isinstance(x, Tensor):
            return model.tensor(go(x.top), go(x.bottom))
        if isinstance(x, Trace):
            return model.trace(go(x.body), x.loop, x.corners, tol)
        raise TypeError(f"not an expression: {x!r}")

    return go(e)
