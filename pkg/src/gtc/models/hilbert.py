"""Real matrices under the Kronecker product (monoidal structure = tensor).

Gates carry dimensions; a word denotes the tensor product of its gates,
flattened row-major (gate 0 slowest).  A split is respected when the
morphism factors so that nothing flows from promised inputs to promised
outputs directly: the promised outputs are produced from the guarded
inputs alone (through an auxiliary middle space), while the promised
inputs are absorbed into the unguarded outputs.  Feedback over a loop
factor is then the partial trace, computable either from the factorization
witness or by the orthonormal-basis sum; both are implemented and agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..signatures import BoxSig, ObjectExpr
from .base import EvalError

WITNESS_TOL = 1e-12


def kron_perm(dims: tuple[int, ...], perm: list[int]) -> np.ndarray:
    """Matrix reordering tensor factors: output axis t is input axis perm[t]."""
    total = int(np.prod(dims)) if dims else 1
    if not dims:
        return np.eye(1)
    arr = np.arange(total).reshape(dims)
    flat = arr.transpose(perm).ravel()
    return np.eye(total)[flat]


@dataclass(frozen=True, eq=False)
class HilbertMorphism:
    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]
    mat: np.ndarray
    witness: dict | None = None  # {"e_dim", "g", "h"} for the box's own split

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=float)
        want = (_prod(self.out_dims), _prod(self.in_dims))
        if mat.shape != want:
            raise EvalError(f"matrix shape {mat.shape} does not match profile {want}")
        object.__setattr__(self, "mat", mat)

    def dagger(self) -> "HilbertMorphism":
        return HilbertMorphism(self.out_dims, self.in_dims, self.mat.T)


def _prod(dims) -> int:
    out = 1
    for d in dims:
        out *= int(d)
    return out


class HilbertModel:
    name = "hilbert"

    def __init__(self, objects: dict[str, int]):
        self.objects = {k: int(v) for k, v in objects.items()}

    def ob(self, word: ObjectExpr) -> tuple[int, ...]:
        try:
            return tuple(self.objects[a] for a in word)
        except KeyError as exc:
            raise EvalError(f"no dimension for atom {exc.args[0]!r}") from None

    def identity(self, word: ObjectExpr) -> HilbertMorphism:
        dims = self.ob(word)
        return HilbertMorphism(dims, dims, np.eye(_prod(dims)))

    def symmetry(self, left: ObjectExpr, right: ObjectExpr) -> HilbertMorphism:
        dl, dr = self.ob(left), self.ob(right)
        k, n = len(dl), len(dl) + len(dr)
        perm = list(range(k, n)) + list(range(k))
        return HilbertMorphism(dl + dr, dr + dl, kron_perm(dl + dr, perm))

    def compose(self, f: HilbertMorphism, g: HilbertMorphism) -> HilbertMorphism:
        if f.out_dims != g.in_dims:
            raise EvalError("composition mismatch")
        return HilbertMorphism(f.in_dims, g.out_dims, g.mat @ f.mat)

    def tensor(self, f: HilbertMorphism, g: HilbertMorphism) -> HilbertMorphism:
        return HilbertMorphism(
            f.in_dims + g.in_dims, f.out_dims + g.out_dims, np.kron(f.mat, g.mat)
        )

    def trace(self, m: HilbertMorphism, loop, corners, tol=None) -> HilbertMorphism:
        a, b, c, d = corners
        n_a, n_c, n_d, k = len(a), len(c), len(d), len(loop)
        da = _prod(m.in_dims[:n_a])
        du = _prod(m.in_dims[n_a : n_a + k])
        db = _prod(m.in_dims[n_a + k :])
        dc = _prod(m.out_dims[:n_c])
        dd = _prod(m.out_dims[n_c : n_c + n_d])
        mat = hs_sum_trace(m.mat, da, du, db, dc, dd)
        return HilbertMorphism(
            m.in_dims[:n_a] + m.in_dims[n_a + k :], m.out_dims[: n_c + n_d], mat
        )

    def validate_box(self, sig: BoxSig, m: HilbertMorphism) -> None:
        if m.in_dims != self.ob(sig.inputs) or m.out_dims != self.ob(sig.outputs):
            raise EvalError(f"binding for {sig.name!r} has the wrong dimensions")
        if sig.split.unguarded_in and sig.split.guarded_out:
            if m.witness is None:
                raise EvalError(
                    f"binding for {sig.name!r} promises guarded outputs but "
                    f"carries no factorization witness"
                )
            check_witness(m, sig.split)

    def equal(self, m1: HilbertMorphism, m2: HilbertMorphism, tol=1e-9, rng=None):
        if m1.in_dims != m2.in_dims or m1.out_dims != m2.out_dims:
            return False, float("inf")
        dev = float(np.max(np.abs(m1.mat - m2.mat) / (1.0 + np.abs(m1.mat))))
        return dev <= tol, dev


def split_permuted(m: HilbertMorphism, split) -> tuple[np.ndarray, tuple, tuple]:
    """Conjugate the matrix so unguarded inputs come first and guarded
    outputs last; returns (matrix, grouped in dims, grouped out dims)."""
    a_gates = sorted(split.unguarded_in)
    b_gates = sorted(split.guarded_in)
    c_gates = sorted(split.unguarded_out)
    d_gates = sorted(split.guarded_out)
    p_in = kron_perm(m.in_dims, a_gates + b_gates)
    p_out = kron_perm(m.out_dims, c_gates + d_gates)
    grouped = p_out @ m.mat @ p_in.T
    in_dims = tuple(m.in_dims[g] for g in a_gates + b_gates)
    out_dims = tuple(m.out_dims[g] for g in c_gates + d_gates)
    return grouped, in_dims, out_dims


def check_witness(m: HilbertMorphism, split) -> None:
    """Verify that the stored (g, h, E) recompose to the matrix: with
    inputs grouped A|B and outputs C|D, the morphism must equal
    (h x id_D) . (id_A x g) for g: B -> E x D and h: A x E -> C."""
    w = m.witness
    grouped, in_dims, out_dims = split_permuted(m, split)
    na = len(split.unguarded_in)
    nc = len(split.unguarded_out)
    da = _prod(in_dims[:na])
    db = _prod(in_dims[na:])
    dc = _prod(out_dims[:nc])
    dd = _prod(out_dims[nc:])
    e_dim = int(w["e_dim"])
    g = np.asarray(w["g"], dtype=float)
    h = np.asarray(w["h"], dtype=float)
    if g.shape != (e_dim * dd, db) or h.shape != (dc, da * e_dim):
        raise EvalError("witness matrices have the wrong shapes")
    rebuilt = np.kron(h, np.eye(dd)) @ np.kron(np.eye(da), g)
    if not np.allclose(rebuilt, grouped, atol=WITNESS_TOL, rtol=0):
        raise EvalError("witness does not recompose to the bound matrix")


def hs_sum_trace(
    mat: np.ndarray, da: int, du: int, db: int, dc: int, dd: int
) -> np.ndarray:
    """Partial trace over the loop factor by summing matched orthonormal
    basis coefficients: w[(c,d),(a,b)] = sum_u M[(c,d,u),(a,u,b)]."""
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (dc * dd * du, da * du * db):
        raise EvalError("matrix shape does not factor as (C,D,U) x (A,U,B)")
    six = mat.reshape(dc, dd, du, da, du, db)
    return np.einsum("cduaub->cdab", six).reshape(dc * dd, da * db)


def hs_factored_trace(
    g: np.ndarray, h: np.ndarray, e_dim: int, da: int, du: int, db: int, dc: int, dd: int
) -> np.ndarray:
    """Partial trace computed from a factorization witness by rewiring:
    route B through g, pass the loop factor across, absorb through h."""
    g = np.asarray(g, dtype=float).reshape(e_dim, dd, du, db)
    h = np.asarray(h, dtype=float).reshape(dc, da, du, e_dim)
    return np.einsum("caue,edub->cdab", h, g).reshape(dc * dd, da * db)


def trace_witness(
    mat: np.ndarray, da: int, du: int, db: int, dc: int, dd: int
) -> tuple[np.ndarray, np.ndarray, int]:
    """A canonical factorization of a matrix of loop shape
    (A,U,B) -> (C,D,U), with middle space E = B x D x U.

    Every finite matrix factors this way; what the guardedness promise
    adds is that the result of the partial trace is witness-independent.
    Returns (g, h, e_dim).
    """
    mat = np.asarray(mat, dtype=float)
    dw = dd * du
    e_dim = db * dw
    name = np.eye(dw).reshape(dw * dw, 1)
    g = np.kron(np.eye(db), name)  # B -> (B x D x U) x (D x U)
    six = mat.reshape(dc, dd, du, da, du, db)
    h = six.transpose(0, 3, 4, 5, 1, 2).reshape(dc, da * du * e_dim)
    return g, h, e_dim


def rotate_witness(
    g: np.ndarray, h: np.ndarray, e_dim: int, da: int, du: int, dd: int, rot: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Conjugate a witness by an invertible map on the middle space;
    the represented morphism is unchanged."""
    rot = np.asarray(rot, dtype=float)
    if rot.shape != (e_dim, e_dim):
        raise EvalError("rotation must act on the middle space")
    g2 = np.kron(rot, np.eye(dd * du)) @ g
    h2 = h @ np.kron(np.eye(da * du), np.linalg.inv(rot))
    return g2, h2
