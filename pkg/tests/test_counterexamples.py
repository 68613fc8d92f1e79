import pytest

from gtc.counterexamples import (
    equal_morphisms_different_typing,
    find_untypable_diagram,
)
from gtc.diagrams import diagram_iso, elaborate
from gtc.guardedness import check_annotated, geometric_check
from gtc.synthesis import SynthesisError, loop_wires, synthesize


def test_left_fixture_properties():
    sigs, traced, composite, claim = equal_morphisms_different_typing()
    assert not check_annotated(traced, claim).ok
    assert check_annotated(composite, claim).ok
    # equal as morphisms: the same diagram
    assert diagram_iso(elaborate(traced), elaborate(composite))


def test_right_fixture_properties():
    witness = find_untypable_diagram()
    d, claim = witness.diagram, witness.claim
    assert len(d.boxes) == 2
    assert loop_wires(d), "the witness must be cyclic"
    assert geometric_check(d, claim)
    assert witness.cut_reports, "the loop must have been opened at least once"
    assert all(not ok for _, ok in witness.cut_reports)
    # it must leave the polarized world, otherwise synthesis would succeed
    assert any(sig.kind == "mixed" for sig in d.boxes)
    with pytest.raises(SynthesisError):
        synthesize(d, claim)
