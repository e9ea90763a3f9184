import json
from fractions import Fraction

import numpy as np

from opan import __version__, gallery
from opan.classify import classify
from opan.report import emit_report, rational, to_jsonable, write_csv


def test_rational_encoding():
    assert rational(Fraction(1, 3)) == {"decimal": "0.33333333333333331", "exact": "1/3"}
    assert rational(Fraction(-4)) == {"decimal": "-4", "exact": "-4"}


def test_jsonable_values():
    data = to_jsonable({"z": 1 + 2j, "a": np.array([1.5, np.inf]), (1, 0): Fraction(1, 2)})
    assert data == {"z": "1.0+2.0j", "a": [1.5, "inf"], "1,0": {"decimal": "0.5", "exact": "1/2"}}


def test_json_is_byte_deterministic(gallery_reports):
    rep = gallery_reports["lap_div_curl_n3"]
    assert emit_report(rep) == emit_report(rep)
    data = json.loads(emit_report(rep))
    assert data["artifact_version"] == __version__
    assert data["seed"] == 0
    assert data["report"]["canceling"]["status"] == "fails_exact"
    assert data["report"]["intersection"]["dim"] == 1
    assert data["report"]["config"]["sphere_samples"] == 10_000


def test_text_contains_predictions(gallery_reports):
    text = emit_report(gallery_reports["dn_n2"], "text").decode()
    assert "BV^B maps continuous" in text
    text = emit_report(gallery_reports["example_ab"], "text").decode()
    assert "continuous up to boundary on cubes" in text
    text = emit_report(gallery_reports["div_curl_n2"], "text").decode()
    assert "xi1^2 + xi2^2" in text


def test_partial_report_still_serializes():
    rep = classify(gallery.get("mixed_partials_n2"))
    data = json.loads(emit_report(rep))
    assert data["report"]["canceling"] is None
    assert data["report"]["errors"]


def test_csv(tmp_path):
    path = write_csv([{"a": 0.1, "b": "x"}, {"a": 1 / 3, "c": [1, 2]}], tmp_path / "t.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "a,b,c"
    assert lines[2] == "0.3333333333333333,,1 2"
