import io
import json
from fractions import Fraction

import pytest

from courantred.cli import EXIT_FAIL, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, main
from courantred.errors import SceneParseError
from courantred.report import parse_structured
from courantred.scene import load_scene, parse_scene, run_scene, scene_source, shipped_scenes


def _scene(**extra):
    doc = {"scene": "mini", "coords": ["x1", "y1", "x2", "y2"], "sampling": {"random": 2, "lattice": 1}}
    doc.update(extra)
    return json.dumps(doc, indent=2)


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_minimal_scene_runs_axioms():
    text = _scene(commands=[{"name": "ax", "command": "check", "what": "axioms"}])
    sc = parse_scene(text)
    (rep,) = run_scene(sc)
    assert rep.ok and rep.as_expected


def test_twist_must_be_closed():
    with pytest.raises(SceneParseError, match="closed"):
        parse_scene(_scene(twist={"x1 x2 y2": "y1"}))
    # x1 dx1 dx2 dy2 has d = dx1 ^ dx1 ^ ... = 0, so it is accepted
    sc = parse_scene(_scene(twist={"x1 x2 y2": "x1"}))
    assert sc.H.d().is_zero() and not sc.H.is_zero()


def test_unknown_name_reports_location():
    text = _scene(forms={"b": {"degree": 2, "components": {"x1 y1": "z9 + 1"}}})
    with pytest.raises(SceneParseError) as exc:
        parse_scene(text, "mini.json")
    e = exc.value
    assert "z9" in str(e)
    line = text.splitlines()[e.line - 1]
    assert line[e.column - 1:].startswith("z9 + 1")


def test_malformed_json_location():
    with pytest.raises(SceneParseError) as exc:
        parse_scene('{\n  "scene": "x",\n  "coords": [\n}')
    assert exc.value.line == 4


@pytest.mark.parametrize("name", shipped_scenes())
def test_shipped_scene_as_expected(name):
    code, out, _ = _cli("--scene", name)
    assert code == EXIT_OK, out


def test_list_includes_every_shipped_scene():
    code, out, _ = _cli("--list")
    assert code == EXIT_OK and out.split() == shipped_scenes()
    assert {"hopf", "halfspace", "cylinder", "c2-brane", "coiso", "sympbrane"} <= set(out.split())


def test_algebraically_invalid_gcs_is_a_parse_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(_scene(gcs={"J": {"A": {"x1": {"y1": "1"}, "y1": {"x1": "-1"}, "x2": {"y2": "1"}, "y2": {"x2": "-1"}},
                                    "Pi": {"x1 x2": "x1*y1"}}},
                        commands=[{"name": "g", "command": "check", "what": "gcs", "J": "J"}]))
    code, _, err = _cli("--scene", str(p))
    assert code == EXIT_PARSE and "J^2 = -Id" in err


def test_nonintegrable_gcs_fails_check(tmp_path):
    # nondegenerate but not closed
    p = tmp_path / "nij.json"
    p.write_text(_scene(forms={"w": {"degree": 2, "components": {"x1 y1": "1+x2^2", "x2 y2": "1"}}},
                        gcs={"J": {"symplectic": "w"}},
                        commands=[{"name": "g", "command": "check", "what": "gcs", "J": "J"}]))
    code, out, _ = _cli("--scene", str(p))
    assert code == EXIT_FAIL and "[fail ] Nijenhuis" in out


def test_exit_code_on_check_failure(tmp_path):
    p = tmp_path / "fail.json"
    p.write_text(_scene(commands=[{"name": "e", "command": "eval", "exprs": {"a": "x1"}, "zero": ["a"],
                                   "points": [{"x1": 1}]}]))
    code, out, _ = _cli("--scene", str(p))
    assert code == EXIT_FAIL and "FAILED" in out


def test_exit_code_on_precondition(tmp_path):
    code, _, err = _cli("--scene", "hopf", "--command", "no-such-command")
    assert code == EXIT_PRECONDITION and "no command" in err
    code, _, _ = _cli("--scene", str(tmp_path / "missing.json"))
    assert code == EXIT_PRECONDITION
    # an unexpected hypothesis failure: severa with the non-adapted trivial splitting
    p = tmp_path / "pre.json"
    doc = json.loads(scene_source("hopf")[0])
    doc["commands"] = [{"name": "s", "command": "severa", "patch": "P", "K": "K"}]
    p.write_text(json.dumps(doc))
    code, out, _ = _cli("--scene", str(p))
    assert code == EXIT_PRECONDITION and "[error]" in out


def test_exit_code_on_parse_error(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text(_scene(forms={"b": {"degree": 2, "components": {"x1 y1": "x1 +* 2"}}}))
    code, _, err = _cli("--scene", str(p))
    assert code == EXIT_PARSE and "line" in err


def test_structured_output_deterministic_and_round_trips():
    a = _cli("--scene", "hopf", "--command", "reduce", "--format", "structured", "--seed", "5")[1]
    b = _cli("--scene", "hopf", "--command", "reduce", "--format", "structured", "--seed", "5")[1]
    assert a == b
    doc = parse_structured(a)
    assert doc["header"] == {"scene": "hopf", "seed": 5, "samples": doc["header"]["samples"], "command": "reduce"}
    assert all(r["as_expected"] for r in doc["reports"])
    assert json.loads(a)["reports"][0]["title"] == doc["reports"][0]["title"]


def test_structured_rationals_become_fractions():
    out = _cli("--scene", "c2-brane", "--command", "characteristic-rank", "--format", "structured")[1]
    doc = parse_structured(out)
    assert doc["reports"][0]["outputs"]["ranks"] == [0, 2]
    assert parse_structured('{"v": "3/4", "w": "x1"}') == {"v": Fraction(3, 4), "w": "x1"}


def test_empty_scene_prints_header_only(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text(_scene(commands=[]))
    code, out, _ = _cli("--scene", str(p))
    assert code == EXIT_OK
    assert out.strip().splitlines() == ["scene=mini seed=0 samples=2 command=all"]


def test_environment_defaults(monkeypatch):
    monkeypatch.setenv("COURANTRED_SCENE", "nstar")
    monkeypatch.setenv("COURANTRED_COMMAND", "setup")
    monkeypatch.setenv("COURANTRED_SEED", "9")
    monkeypatch.setenv("COURANTRED_FORMAT", "structured")
    code, out, _ = _cli()
    assert code == EXIT_OK
    assert json.loads(out)["header"]["seed"] == 9
    # flags win over the environment
    code, out, _ = _cli("--format", "text")
    assert out.startswith("scene=nstar seed=9")


def test_seed_and_samples_change_sampling():
    a = load_scene("cf", seed=1, samples=3)
    b = load_scene("cf", seed=2, samples=3)
    assert a.seed == 1 and a.samples == 3
    assert a.patches["C"].samples != b.patches["C"].samples
