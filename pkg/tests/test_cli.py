import json

import numpy as np
import pytest

from gtc.cli import main
from gtc.diagrams import export_json
from gtc.generators import rand_guarded_diagram
from gtc.synthesis import SynthesisError, synthesis_preconditions

GTC_SOURCE = """
box f : X | I -> I | U
box g : I | U -> Y | I
let pipeline = f ; g
let looped = tr[U: X|I -> I|Y]{ sym[X,U] ; (g (*) f) }
"""


@pytest.fixture()
def source_file(tmp_path):
    path = tmp_path / "demo.gtc"
    path.write_text(GTC_SOURCE, encoding="utf-8")
    return str(path)


def test_check_accepts(source_file, capsys):
    code = main(["check", source_file, "--name", "pipeline", "--claim", "X|I -> I|Y"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["ok"]


def test_check_rejects_with_witness(source_file, capsys):
    code = main(["check", source_file, "--name", "looped", "--claim", "X|I -> I|Y"])
    assert code == 1
    payload = json.loads(capsys.readouterr().out)
    assert not payload["ok"]
    assert payload["witness"]["kind"] == "path"


def test_check_cross_checked_against_structural_oracle(source_file, capsys):
    from gtc.expressions import parse_source
    from gtc.guardedness import split_derivable
    from gtc.signatures import parse_claim

    src = parse_source(GTC_SOURCE)
    expr = src.exprs["pipeline"]
    claim = parse_claim("X|I -> I|Y", expr.dom, expr.cod)
    code = main(["check", source_file, "--name", "pipeline", "--claim", "X|I -> I|Y"])
    assert (code == 0) == split_derivable(expr, claim)
    capsys.readouterr()


def test_check_parse_error_exit_2(source_file, capsys):
    assert main(["check", source_file, "--name", "missing", "--claim", "X|I -> I|Y"]) == 2
    assert main(["check", source_file, "--name", "pipeline", "--claim", "bogus"]) == 2
    capsys.readouterr()


def test_check_writes_dot_and_json(source_file, tmp_path, capsys):
    dot = tmp_path / "d.dot"
    js = tmp_path / "d.json"
    main(
        [
            "check", source_file, "--name", "pipeline",
            "--claim", "X|I -> I|Y", "--dot", str(dot), "--json", str(js),
        ]
    )
    capsys.readouterr()
    assert dot.read_text().startswith("digraph")
    json.loads(js.read_text())


def _find(rng, want_ok: bool):
    while True:
        d, claim = rand_guarded_diagram(rng)
        try:
            synthesis_preconditions(d, claim)
            ok = True
        except SynthesisError:
            ok = False
        if ok == want_ok:
            return d


def test_synthesize_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(2)
    d = _find(rng, True)
    path = tmp_path / "d.json"
    path.write_text(export_json(d))
    code = main(["synthesize", str(path), "--cert", str(tmp_path / "c.json")])
    out = capsys.readouterr().out
    assert code == 0
    assert "let synthesized" in out
    cert = json.loads((tmp_path / "c.json").read_text())
    assert cert["ok"]
    # the emitted text re-parses and re-checks
    from gtc.expressions import parse_source
    from gtc.guardedness import check_annotated

    src = parse_source(out)
    assert check_annotated(src.exprs["synthesized"], d.boundary_claim()).ok


def test_synthesize_reports_violation(tmp_path, capsys):
    rng = np.random.default_rng(3)
    d = _find(rng, False)
    path = tmp_path / "bad.json"
    path.write_text(export_json(d))
    code = main(["synthesize", str(path)])
    out = capsys.readouterr().out
    assert code == 1
    payload = json.loads(out)
    assert not payload["ok"] and payload["witness"] is not None


def test_eval_banach_closed_form(tmp_path, capsys):
    src = tmp_path / "m.gtc"
    src.write_text(
        "box avg2 : A*U | I -> U | U\nlet fix = tr[U: A|I -> U|I]{ avg2 }\n"
    )
    bind = tmp_path / "b.json"
    bind.write_text(
        json.dumps(
            {
                "model": "metric",
                "objects": {"A": 1, "U": 1},
                "boxes": {
                    "avg2": {
                        "kind": "affine",
                        "weight": [[0.5, 0.5], [0.5, 0.5]],
                        "offset": [0.0, 0.0],
                    }
                },
            }
        )
    )
    inputs = tmp_path / "in.json"
    inputs.write_text('{"blocks": [[3.0]]}')
    code = main(
        [
            "eval", str(src), "--name", "fix", "--model", "metric",
            "--bindings", str(bind), "--inputs", str(inputs),
            "--claim", "A|I -> U|I",
        ]
    )
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert abs(out["blocks"][0][0] - 3.0) < 1e-9


def test_eval_identity_finset(tmp_path, capsys):
    src = tmp_path / "f.gtc"
    src.write_text("box p : I | A -> A | I\nlet idA = id[A]\n")
    bind = tmp_path / "b.json"
    bind.write_text(
        json.dumps({"model": "finset", "objects": {"A": ["a0", "a1"]}, "boxes": {}})
    )
    code = main(
        ["eval", str(src), "--name", "idA", "--model", "finset", "--bindings", str(bind)]
    )
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["table"] == {"0:a0": "0:a0", "0:a1": "0:a1"}


def test_eval_full_trace_of_identity(tmp_path, capsys):
    src = tmp_path / "h.gtc"
    src.write_text("box w : U | I -> I | U\nlet t = tr[U: I|I -> I|I]{ w }\n")
    bind = tmp_path / "b.json"
    bind.write_text(
        json.dumps(
            {
                "model": "hilbert",
                "objects": {"U": 2},
                "boxes": {"w": {"matrix": [[1.0, 0.0], [0.0, 1.0]]}},
            }
        )
    )
    code = main(
        [
            "eval", str(src), "--name", "t", "--model", "hilbert",
            "--bindings", str(bind), "--claim", "I|I -> I|I",
        ]
    )
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["matrix"] == [[2.0]]


def test_suite_small_green(tmp_path, capsys):
    report = tmp_path / "report.jsonl"
    code = main(
        [
            "suite", "--models", "finset", "flat", "--per-axiom", "2",
            "--seeds", "4", "--out", str(report),
        ]
    )
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert code == 0
    assert summary["failures"] == 0
    lines = [json.loads(l) for l in report.read_text().splitlines()]
    assert lines[0]["kind"] == "axiom-suite"
    assert {l["model"] for l in lines if "model" in l} == {"finset", "flat"}


def test_suite_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("GTC_SEED", "13")
    env_out = tmp_path / "env.jsonl"
    assert main(["suite", "--models", "finset", "--per-axiom", "1", "--out", str(env_out)]) == 0
    capsys.readouterr()
    explicit_out = tmp_path / "explicit.jsonl"
    assert main(
        ["suite", "--models", "finset", "--per-axiom", "1", "--seeds", "13",
         "--out", str(explicit_out)]
    ) == 0
    capsys.readouterr()
    assert env_out.read_text() == explicit_out.read_text()


def test_suite_determinism_across_runs(tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (a, b):
        code = main(
            ["suite", "--models", "finset", "--per-axiom", "2", "--seeds", "9",
             "--out", str(out)]
        )
        assert code == 0
        capsys.readouterr()
    assert a.read_text() == b.read_text()
