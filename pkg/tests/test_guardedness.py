from itertools import product

import numpy as np
import pytest

from gtc.counterexamples import equal_morphisms_different_typing
from gtc.diagrams import diagram_iso, elaborate
from gtc.expressions import parse_expr
from gtc.generators import rand_accepted_traced, rand_trace_free_expr
from gtc.guardedness import (
    check_annotated,
    claim_derivable,
    derivable_splits,
    geometric_check,
    infer_trace_annotations,
    split_derivable,
    unguarded_reach,
)
from gtc.signatures import mk_split, parse_box_decl

SIGS = {
    s.name: s
    for s in map(
        parse_box_decl,
        [
            "box blk : A | I -> I | A",  # black 1-1
            "box wht : I | A -> A | I",  # white 1-1
        ],
    )
}


def test_reach_black_box():
    d = elaborate(parse_expr("blk", SIGS))
    reach = unguarded_reach(d)
    assert ("bout", 0, 0) not in reach[("bin", 0, 0)]
    assert ("dout", 0) not in reach[("din", 0)]


def test_reach_white_box():
    d = elaborate(parse_expr("wht", SIGS))
    reach = unguarded_reach(d)
    assert ("bout", 0, 0) in reach[("bin", 0, 0)]
    assert ("dout", 0) in reach[("din", 0)]


def test_reach_white_then_black_chain():
    d = elaborate(parse_expr("wht ; blk", SIGS))
    reach = unguarded_reach(d)
    assert ("bin", 1, 0) in reach[("din", 0)]  # reaches the middle wire
    assert ("dout", 0) not in reach[("din", 0)]  # but not the final output


def test_geometric_single_box_with_declared_claim():
    d = elaborate(parse_expr("blk", SIGS))
    assert geometric_check(d, mk_split(1, 1, {0}, {0}))


def test_geometric_white_box_rejects_promise():
    d = elaborate(parse_expr("wht", SIGS))
    assert not geometric_check(d, mk_split(1, 1, {0}, {0}))
    assert geometric_check(d, mk_split(1, 1, {0}, set()))
    assert geometric_check(d, mk_split(1, 1, set(), {0}))


def test_derivable_box_is_weakening_closure():
    maxes = derivable_splits(parse_expr("blk", SIGS))
    assert (frozenset({0}), frozenset({0})) in maxes
    maxes_w = derivable_splits(parse_expr("wht", SIGS))
    assert maxes_w == frozenset(
        {(frozenset({0}), frozenset()), (frozenset(), frozenset({0}))}
    )


def test_derivable_identity():
    e = parse_expr("id[A]", SIGS)
    maxes = derivable_splits(e)
    assert not claim_derivable(maxes, mk_split(1, 1, {0}, {0}))
    assert claim_derivable(maxes, mk_split(1, 1, {0}, set()))
    assert claim_derivable(maxes, mk_split(1, 1, set(), {0}))


def test_derivable_black_then_white_matches_geometry():
    e = parse_expr("blk ; wht", SIGS)
    d = elaborate(e)
    maxes = derivable_splits(e)
    for a_bits, d_bits in product([0, 1], repeat=2):
        claim = mk_split(1, 1, {0} if a_bits else set(), {0} if d_bits else set())
        assert claim_derivable(maxes, claim) == geometric_check(d, claim)


def test_oracle_equivalence_random():
    rng = np.random.default_rng(100)
    for _ in range(150):
        e = rand_trace_free_expr(rng, max_boxes=6)
        d = elaborate(e)
        maxes = derivable_splits(e)
        n_in, n_out = len(e.dom), len(e.cod)
        for a_bits in product([0, 1], repeat=n_in):
            for d_bits in product([0, 1], repeat=n_out):
                claim = mk_split(
                    n_in,
                    n_out,
                    {i for i in range(n_in) if a_bits[i]},
                    {j for j in range(n_out) if d_bits[j]},
                )
                assert claim_derivable(maxes, claim) == geometric_check(d, claim)


def test_downward_closure():
    rng = np.random.default_rng(101)
    for _ in range(50):
        e = rand_trace_free_expr(rng, max_boxes=5)
        maxes = derivable_splits(e)
        for a, dd in maxes:
            for i in sorted(a):
                weaker = mk_split(len(e.dom), len(e.cod), a - {i}, dd)
                assert claim_derivable(maxes, weaker)


def test_check_annotated_matches_derivable_on_trace_free():
    rng = np.random.default_rng(102)
    for _ in range(50):
        e = rand_trace_free_expr(rng, max_boxes=5)
        n_in, n_out = len(e.dom), len(e.cod)
        for _ in range(5):
            a = {i for i in range(n_in) if rng.random() < 0.5}
            dd = {j for j in range(n_out) if rng.random() < 0.5}
            claim = mk_split(n_in, n_out, a, dd)
            assert check_annotated(e, claim).ok == split_derivable(e, claim)


def test_typing_gap_fixture():
    sigs, traced, composite, claim = equal_morphisms_different_typing()
    assert not check_annotated(traced, claim).ok
    assert check_annotated(composite, claim).ok
    assert diagram_iso(elaborate(traced), elaborate(composite))


def test_accepted_implies_geometric():
    rng = np.random.default_rng(103)
    done = 0
    while done < 100:
        got = rand_accepted_traced(rng)
        if got is None:
            continue
        e, claim = got
        assert check_annotated(e, claim).ok
        assert geometric_check(elaborate(e), claim)
        done += 1


def test_certificate_lists_trace_nodes():
    rng = np.random.default_rng(104)
    while True:
        got = rand_accepted_traced(rng)
        if got is None:
            continue
        e, claim = got
        res = check_annotated(e, claim)
        names = {entry["node"] for entry in res.certificate}
        assert "top" in names and any(n.startswith("tr_") for n in names)
        break


def test_inference_finds_no_annotation_for_the_gap_fixture():
    sigs, traced, composite, claim = equal_morphisms_different_typing()
    assert infer_trace_annotations(composite, claim) == composite
    # no choice of output promise rescues the traced form
    assert infer_trace_annotations(traced, claim) is None


def test_inference_refuses_many_nodes():
    sigs, traced, _, claim = equal_morphisms_different_typing()
    with pytest.raises(ValueError):
        infer_trace_annotations(traced, claim, max_nodes=0)
