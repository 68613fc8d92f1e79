import math
from itertools import product

import numpy as np
import pytest

from gtc.axioms import BINDING_GENERATORS, AxiomInstance
from gtc.expressions import parse_expr
from gtc.models import (
    EvalError,
    FinSetModel,
    FinSetMorphism,
    HilbertModel,
    MetricMorphism,
    Poset,
    banach_rec,
    eval_expr,
    finset_iter,
    flat,
    grec_to_rec,
    hs_factored_trace,
    hs_sum_trace,
    lfp_rec,
    lift,
    metric_trace,
    rec_to_grec,
)
from gtc.models.hilbert import kron_perm, rotate_witness, trace_witness
from gtc.models.metric import affine, named_function
from gtc.models.trees import StageObject, ToTMorphism, ToposOfTreesModel, tot_fixpoint
from gtc.signatures import parse_box_decl

# --- finset -------------------------------------------------------------------


def test_finset_iter_forced_value():
    f = FinSetMorphism(
        (("x",),), (("y",), ("x",)), {(0, "x"): (0, "y")}
    )
    assert finset_iter(f).table == {(0, "x"): (0, "y")}


def test_finset_iter_rejects_feedback_hit():
    f = FinSetMorphism(
        (("x",),), (("y",), ("x",)), {(0, "x"): (1, "x")}
    )
    with pytest.raises(EvalError):
        finset_iter(f)


def test_finset_fixpoint_law_brute_force():
    model = FinSetModel({})
    for sx in range(4):
        for sy in range(4):
            xs = tuple(f"x{i}" for i in range(sx))
            ys = tuple(f"y{i}" for i in range(sy))
            for targets in product(ys, repeat=sx):
                f = FinSetMorphism(
                    (xs,), (ys, xs), {(0, x): (0, t) for x, t in zip(xs, targets)}
                )
                fd = finset_iter(f)
                case = FinSetMorphism(
                    (ys, xs),
                    (ys,),
                    {
                        **{(0, y): (0, y) for y in ys},
                        **{(1, x): fd.table[(0, x)] for x in xs},
                    },
                )
                assert model.compose(f, case) == fd


def test_finset_eval_identity_and_composition():
    sigs = {
        s.name: s
        for s in map(
            parse_box_decl,
            ["box p : I | A -> B | I", "box q : I | B -> A | I"],
        )
    }
    model = FinSetModel({"A": ("a0", "a1"), "B": ("b0",)})
    boxes = {
        "p": FinSetMorphism(
            (("a0", "a1"),), (("b0",),), {(0, "a0"): (0, "b0"), (0, "a1"): (0, "b0")}
        ),
        "q": FinSetMorphism((("b0",),), (("a0", "a1"),), {(0, "b0"): (0, "a0")}),
    }
    ident = eval_expr(parse_expr("id[A]", sigs), model, boxes)
    assert ident.table == {(0, "a0"): (0, "a0"), (0, "a1"): (0, "a1")}
    both = eval_expr(parse_expr("p ; q", sigs), model, boxes)
    assert both.table == {(0, "a0"): (0, "a0"), (0, "a1"): (0, "a0")}


def test_finset_binding_split_enforced():
    sigs = {"p": parse_box_decl("box p : A | I -> I | B")}
    model = FinSetModel({"A": ("a0",), "B": ("b0",)})
    bad = FinSetMorphism((("a0",),), (("b0",),), {(0, "a0"): (0, "b0")})
    with pytest.raises(EvalError):
        model.validate_box(sigs["p"], bad)


# --- metric -------------------------------------------------------------------


def test_banach_simple_halving():
    # y = y/2 + 1 has the unique fixpoint 2
    f = affine([1], [1], np.array([[0.5]]), np.array([1.0]))
    y, _ = banach_rec(f, [], 1e-12)
    assert abs(float(y[0][0]) - 2.0) < 1e-10


def test_banach_average_returns_parameter():
    f = affine([1, 1], [1], np.array([[0.5, 0.5]]), np.array([0.0]))
    for x in (3.0, -1.25, 0.0):
        y, _ = banach_rec(f, [np.array([x])], 1e-11)
        assert abs(float(y[0][0]) - x) < 1e-9


def _bisect(fun, lo, hi, n=200):
    for _ in range(n):
        mid = (lo + hi) / 2
        if (fun(lo) - lo) * (fun(mid) - mid) <= 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def test_banach_cos_against_bisection():
    f = named_function("cos_half")
    y, _ = banach_rec(f, [], 1e-12)
    target = _bisect(lambda t: math.cos(t) / 2.0, 0.0, 1.0)
    assert abs(float(y[0][0]) - target) < 1e-9


def test_banach_bound_respected():
    rng = np.random.default_rng(9)
    for _ in range(100):
        c = float(rng.uniform(0.1, 0.9))
        dim = int(rng.integers(1, 3))
        w = rng.normal(size=(dim, dim))
        w *= c / max(np.max(np.sum(np.abs(w), axis=1)), 1e-9)
        b = rng.uniform(-1, 1, size=dim)
        f = affine([dim], [dim], w, b)
        assert float(f.lip[0, 0]) <= c + 1e-12
        tol = 10.0 ** rng.uniform(-12, -6)
        y, count = banach_rec(f, [], tol)
        y0 = np.zeros(dim)
        d0 = float(np.max(np.abs(w @ y0 + b - y0)))
        goal = tol * (1.0 - float(f.lip[0, 0]))
        if d0 <= goal:
            bound = 1
        else:
            bound = math.ceil(math.log(goal / d0) / math.log(float(f.lip[0, 0]))) + 1
        assert count <= bound + 1
        resid = float(np.max(np.abs(w @ np.asarray(y[0]) + b - np.asarray(y[0]))))
        assert resid <= goal * (1.0 + 1e-9)


def test_banach_wrong_factor_reported():
    # expanding map declared contractive
    f = MetricMorphism((1,), (1,), lambda xs: [2.0 * xs[0] + 1.0], np.array([[0.9]]))
    with pytest.raises(EvalError):
        banach_rec(f, [], 1e-10)


def test_metric_trace_no_loop_is_plain_evaluation():
    f = affine([1, 1], [1, 1], np.eye(2), np.zeros(2))
    c_out, d_out = metric_trace(f, 2, 0, 1, [np.array([1.5]), np.array([-2.0])], [], 1e-12)
    assert abs(float(c_out[0][0]) - 1.5) < 1e-12
    assert abs(float(d_out[0][0]) + 2.0) < 1e-12


def test_metric_trace_solves_loop():
    # (A, U) -> (C, U'): C copies the loop value, U' = (a + u)/2
    w = np.array([[0.0, 1.0], [0.5, 0.5]])
    f = affine([1, 1], [1, 1], w, np.zeros(2))
    c_out, _ = metric_trace(f, 1, 1, 1, [np.array([4.0])], [], 1e-12)
    assert abs(float(c_out[0][0]) - 4.0) < 1e-9


# --- trees --------------------------------------------------------------------


def _simple_objects():
    x = StageObject(
        (("x0",), ("x0", "x1"), ("x0", "x1")),
        ({"x0": "x0", "x1": "x0"}, {"x0": "x0", "x1": "x1"}),
    )
    y = StageObject(
        (("y0",), ("y0", "y1"), ("y0", "y1")),
        ({"y0": "y0", "y1": "y0"}, {"y0": "y0", "y1": "y1"}),
    )
    return x, y


def test_tot_fixpoint_constant_witness():
    x, y = _simple_objects()
    witness = (
        {(("y0",), "*"): "x0"},
        {(("y0",), "x0"): "x0", (("y1",), "x0"): "x0"},
        {(("y0",), "x0"): "x0", (("y1",), "x0"): "x0",
         (("y0",), "x1"): "x0", (("y1",), "x1"): "x0"},
    )
    maps = []
    for n in range(3):
        table = {}
        for yv in y.stages[n]:
            for xv in x.stages[n]:
                prev = "*" if n == 0 else x.restr[n - 1][xv]
                table[(yv, xv)] = (witness[n][((yv,), prev)],)
        maps.append(table)
    f = ToTMorphism((y, x), (x,), tuple(maps))
    xs = tot_fixpoint(f, witness, [("y0",), ("y1",), ("y1",)])
    assert xs == ["x0", "x0", "x0"]


def test_tot_fixpoint_is_unique():
    """Exhaustive: the computed fixpoint is the only compatible family
    solving x = f(y, x)."""
    x, y = _simple_objects()
    from gtc.laws import _enumerate_natural, _guarded_from_witness, _later

    families = []
    stage_elems = x.stages
    for v1 in stage_elems[0]:
        for v2 in stage_elems[1]:
            if x.restr[0][v2] != v1:
                continue
            for v3 in stage_elems[2]:
                if x.restr[1][v3] == v2:
                    families.append([v1, v2, v3])
    y_families = []
    for w1 in y.stages[0]:
        for w2 in y.stages[1]:
            if y.restr[0][w2] != w1:
                continue
            for w3 in y.stages[2]:
                if y.restr[1][w3] == w2:
                    y_families.append([w1, w2, w3])

    count = 0
    for w in _enumerate_natural((y, _later(x)), x):
        maps = _guarded_from_witness((y, x), x, w, {1})
        f = ToTMorphism((y, x), (x,), tuple(maps))
        witness = tuple(
            {((yv,), pv): w[n][(yv, pv)] for (yv, pv) in w[n]} for n in range(3)
        )
        for yf in y_families:
            solutions = [
                xf
                for xf in families
                if all(f.maps[n][(yf[n], xf[n])] == (xf[n],) for n in range(3))
            ]
            computed = tot_fixpoint(f, witness, [(v,) for v in yf])
            assert solutions == [computed]
            count += 1
    assert count > 0


def test_tot_binding_validation_rejects_undelayed():
    x, _ = _simple_objects()
    sig = parse_box_decl("box d : X | I -> I | X")
    model = ToposOfTreesModel({"X": x})
    maps = tuple({(v,): (v,) for v in x.stages[n]} for n in range(3))  # identity
    ident = ToTMorphism((x,), (x,), maps)
    with pytest.raises(EvalError):
        model.validate_box(sig, ident)


# --- hilbert ------------------------------------------------------------------


def test_full_trace_matches_basis_sum():
    rng = np.random.default_rng(31)
    f = rng.normal(size=(5, 5))
    by_formula = float(sum(f[i, i] for i in range(5)))
    assert hs_sum_trace(f, 1, 5, 1, 1, 1)[0, 0] == by_formula
    g, h, e = trace_witness(f, 1, 5, 1, 1, 1)
    assert hs_factored_trace(g, h, e, 1, 5, 1, 1, 1)[0, 0] == pytest.approx(
        by_formula, abs=1e-9
    )


def test_partial_trace_of_product_factors():
    rng = np.random.default_rng(32)
    p = rng.normal(size=(2, 2))
    q = rng.normal(size=(3, 3))
    f = np.kron(p, q)  # (C x U) <- (A x U) with A = C = dim 2, U = dim 3
    # arrange as (A,U,B=1) -> (C,D=1,U): same layout
    w = hs_sum_trace(f, 2, 3, 1, 2, 1)
    assert np.allclose(w, np.trace(q) * p, atol=1e-12)


def test_witness_independence():
    rng = np.random.default_rng(33)
    for _ in range(20):
        da, du, db, dc, dd = (int(rng.integers(1, 3)) for _ in range(5))
        mat = rng.normal(size=(dc * dd * du, da * du * db))
        g, h, e = trace_witness(mat, da, du, db, dc, dd)
        t1 = hs_factored_trace(g, h, e, da, du, db, dc, dd)
        rot = np.linalg.qr(rng.normal(size=(e, e)))[0]
        g2, h2 = rotate_witness(g, h, e, da, du, dd, rot)
        t2 = hs_factored_trace(g2, h2, e, da, du, db, dc, dd)
        assert np.max(np.abs(t1 - t2)) < 1e-9
        assert np.max(np.abs(t1 - hs_sum_trace(mat, da, du, db, dc, dd))) < 1e-9


def test_basis_independence():
    rng = np.random.default_rng(34)
    for _ in range(20):
        da, du, db, dc, dd = 2, 3, 2, 2, 2
        mat = rng.normal(size=(dc * dd * du, da * du * db))
        q = np.linalg.qr(rng.normal(size=(du, du)))[0]
        pre = np.kron(np.kron(np.eye(da), q), np.eye(db))
        post = np.kron(np.eye(dc * dd), q.T)
        rotated = post @ mat @ pre
        t1 = hs_sum_trace(mat, da, du, db, dc, dd)
        t2 = hs_sum_trace(rotated, da, du, db, dc, dd)
        assert np.max(np.abs(t1 - t2)) < 1e-9


def test_dagger_commutes_with_trace():
    rng = np.random.default_rng(35)
    for _ in range(20):
        da, du, db, dc, dd = (int(rng.integers(1, 3)) for _ in range(5))
        e_dim = int(rng.integers(1, 3))
        g = rng.normal(size=(e_dim * dd * du, db))
        h = rng.normal(size=(dc, da * du * e_dim))
        mat = np.kron(h, np.eye(dd * du)) @ np.kron(np.eye(da * du), g)
        g1 = kron_perm((dd, du, dc), [2, 0, 1])  # (D,U,C) -> (C,D,U)
        g2 = kron_perm((da, du, db), [2, 0, 1])  # (A,U,B) -> (B,A,U)
        body = g2 @ mat.T @ g1
        lhs = hs_sum_trace(body, dd, du, dc, db, da)
        w = hs_sum_trace(mat, da, du, db, dc, dd)
        sym_dc = kron_perm((dd, dc), [1, 0])
        sym_ab = kron_perm((da, db), [1, 0])
        rhs = sym_ab @ w.T @ sym_dc
        assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_hilbert_box_requires_witness():
    sig = parse_box_decl("box b : U | I -> I | U")
    model = HilbertModel({"U": 2})
    from gtc.models.hilbert import HilbertMorphism

    bare = HilbertMorphism((2,), (2,), np.eye(2))
    with pytest.raises(EvalError):
        model.validate_box(sig, bare)


def test_metric_binding_contraction_enforced():
    from gtc.models import MetricModel

    sig = parse_box_decl("box c : A | I -> I | A")
    model = MetricModel({"A": 1})
    loose = affine([1], [1], np.array([[1.0]]), np.array([0.0]))
    with pytest.raises(EvalError):
        model.validate_box(sig, loose)
    tight = affine([1], [1], np.array([[0.5]]), np.array([0.0]))
    model.validate_box(sig, tight)


def test_unbound_box_reported():
    sigs = {"p": parse_box_decl("box p : I | A -> A | I")}
    model = FinSetModel({"A": ("a0",)})
    with pytest.raises(EvalError):
        eval_expr(parse_expr("p", sigs), model, {})


# --- flat posets ---------------------------------------------------------------


def test_flat_binding_constancy_enforced():
    from gtc.models import FlatPosetModel, PosetMorphism

    sig = parse_box_decl("box c : A | I -> I | A")
    model = FlatPosetModel({"A": flat(("p", "q"))})
    ident = PosetMorphism(
        (flat(("p", "q")),), (flat(("p", "q")),), {("p",): ("p",), ("q",): ("q",)}
    )
    with pytest.raises(EvalError):
        model.validate_box(sig, ident)


def test_one_point_carrier_forces_everything():
    x = flat(["only"])
    tx, bot = lift(x)
    b = flat(["b"])
    f = {("b", bot): "only", ("b", "only"): "only"}
    assert lfp_rec(f, b, tx) == {"b": "only"}
    grec = rec_to_grec(lfp_rec)
    rec2 = grec_to_rec(grec)
    assert rec2(f, b, tx) == {"b": "only"}
    g = {("b", bot): "only", ("b", "only"): "only"}
    assert grec(g, b, x) == {"b": "only"}


def test_lfp_needs_pointed_carrier():
    x = flat(["p", "q"])
    with pytest.raises(EvalError):
        lfp_rec({("b", "p"): "p", ("b", "q"): "q"}, flat(["b"]), x)


def test_poset_validation():
    with pytest.raises(EvalError):
        Poset(("a", "b"), frozenset({("a", "a"), ("b", "b"), ("a", "b"), ("b", "a")}))


# --- interchange in every model -------------------------------------------------


def test_eval_respects_interchange_everywhere():
    """(f (*) g) ; (h1 (*) h2) equals (f ; h1) (*) (g ; h2) in each model."""
    rng_master = np.random.default_rng(77)
    sigs = {
        s.name: s
        for s in map(
            parse_box_decl,
            [
                "box f : I | A -> B | I",
                "box g : I | C -> D | I",
                "box h1 : I | B -> A | I",
                "box h2 : I | D -> C | I",
            ],
        )
    }
    inst = AxiomInstance("vanishing1", 0, sigs, None, None, None)
    lhs = parse_expr("(f (*) g) ; (h1 (*) h2)", sigs)
    rhs = parse_expr("(f ; h1) (*) (g ; h2)", sigs)
    for model_name, gen in BINDING_GENERATORS.items():
        rng = np.random.default_rng([77, hash(model_name) % 1000])
        model, boxes = gen(inst, rng)
        v1 = eval_expr(lhs, model, boxes, tol=1e-12)
        v2 = eval_expr(rhs, model, boxes, tol=1e-12)
        ok, dev = model.equal(v1, v2, tol=1e-9, rng=rng)
        assert ok, (model_name, dev)
