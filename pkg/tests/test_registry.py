from __future__ import annotations

import json

import pytest

from gz4.registry import (
    EXPECTED_CONJECTURAL,
    InvariantViolation,
    ParseError,
    UnknownFamily,
    dump_registry,
    find_family,
    load_registry,
    parse_registry,
    verify_all,
    verify_family,
)

import support


def registry_json():
    return json.loads(dump_registry(support.records()))


def test_default_registry_shape():
    recs = support.records()
    assert len(recs) == 23
    assert {r.id for r in recs if r.status == "conjectural"} == EXPECTED_CONJECTURAL
    assert {r.id: r.external_ref for r in recs if r.external_ref} == {
        "2-6": "#3873.2", "2-12": "#1193", "3-1": "#3873.4"}
    assert len(support.explicit_ids()) == 20
    for N in support.MODULAR_N:
        assert support.record(f"{N},1").group_label == f"G0({N})+{N}"


def test_dump_parse_round_trip():
    text = dump_registry(support.records())
    assert parse_registry(text) == support.records()
    assert dump_registry(parse_registry(text)) == text


def test_dropped_row_violates_invariants():
    data = registry_json()
    data["families"].pop()
    with pytest.raises(InvariantViolation):
        parse_registry(json.dumps(data))


def test_wrong_group_violates_invariants():
    data = registry_json()
    row = next(r for r in data["families"] if r["id"] == "5,1")
    row["group"] = "G0(5)"
    with pytest.raises(InvariantViolation):
        parse_registry(json.dumps(data))


def test_non_reflexive_row_violates_invariants():
    data = registry_json()
    row = next(r for r in data["families"] if r["id"] == "3-27")
    row["phi"] = "(1+x+y+z)^6/(x*y*z)"
    with pytest.raises(InvariantViolation):
        parse_registry(json.dumps(data))


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_registry("{")
    with pytest.raises(ParseError):
        parse_registry(json.dumps({"schema_version": 2, "families": []}))
    data = registry_json()
    del data["families"][0]["notes"]
    with pytest.raises(ParseError):
        parse_registry(json.dumps(data))


def test_find_family():
    recs = support.records()
    assert find_family(recs, "(2,1)").id == "2,1"
    assert find_family(recs, " 3-27 ").id == "3-27"
    with pytest.raises(UnknownFamily):
        find_family(recs, "nope")


def test_label_only_groups():
    assert support.record("2-12").group() is None
    assert support.record("2-12").label_only
    assert support.record("2,1").group() is not None


def test_env_override(tmp_path, monkeypatch):
    path = tmp_path / "families.json"
    path.write_text(dump_registry(support.records()), encoding="utf-8")
    monkeypatch.setenv("GZ4_REGISTRY", str(path))
    assert load_registry() == support.records()
    monkeypatch.setenv("GZ4_REGISTRY", str(tmp_path / "missing.json"))
    with pytest.raises(ParseError):
        load_registry()


def test_verify_quick_explicit_family():
    rep = verify_family(support.record("3-27"))
    assert rep.ok and rep.fully_checked
    assert [c.name for c in rep.checks] == ["reflexive", "period_sequence", "recurrence"]
    assert all(c.status == "pass" for c in rep.checks)


def test_verify_external_family_skips():
    rep = verify_family(support.record("3-1"), depth="full")
    assert rep.ok and not rep.fully_checked
    skipped = [c for c in rep.checks if c.status == "skipped"]
    assert all("#3873.4" in c.detail["reason"] for c in skipped if c.name != "green_smoke")
    assert rep.check("green_smoke").status == "pass"


def test_verify_full_family():
    rep = verify_family(support.record("4,1"), depth="full")
    assert rep.ok and rep.fully_checked
    assert rep.check("singular_points").status == "pass"
    assert rep.check("mirror_map").status == "pass"
    assert rep.check("green_smoke").status == "pass"


def test_verify_label_only_group_skips_smoke():
    rep = verify_family(support.record("2-12"), depth="full")
    assert rep.check("green_smoke").status == "skipped"
    assert "unavailable" in rep.check("green_smoke").detail["reason"]


def test_verify_depth_validation():
    with pytest.raises(ValueError):
        verify_family(support.record("2,1"), depth="deep")


def test_verify_all_empty_and_json():
    empty = verify_all([])
    assert empty.ok and empty.summary()["families"] == 0
    rep = verify_all([support.record("3-27"), support.record("2-6")])
    data = rep.to_json()
    assert data["summary"] == {"families": 2, "fully_checked": 1, "partially_checked": 1,
                               "failed": [], "conjectural": ["2-6"]}
    assert all("seconds" in c for f in data["families"] for c in f["checks"])
    assert not any("seconds" in c for f in rep.to_json(deterministic=True)["families"] for c in f["checks"])
    json.dumps(data)
