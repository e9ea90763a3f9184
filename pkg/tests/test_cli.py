import io
import json

import pytest

from opan.cli import run_cli


def run(*args):
    out = io.StringIO()
    code = run_cli(list(args), out=out)
    return code, out.getvalue()


def test_classify_json():
    code, out = run("classify", "--gallery", "lap_div_curl_n3", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["report"]["canceling"]["status"] == "fails_exact"
    assert data["report"]["intersection"]["dim"] == 1
    assert run("classify", "--gallery", "lap_div_curl_n3", "--json")[1] == out


def test_missing_file(capsys):
    code, _ = run("classify", "--op", "missing.dsl")
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_usage_errors():
    assert run("frobnicate")[0] == 2
    assert run("classify")[0] == 2
    assert run("classify", "--gallery", "nope")[0] == 2
    assert run("classify", "--gallery", "dn_n1", "--op", "x")[0] == 2


def test_op_file_and_text(tmp_path):
    path = tmp_path / "ab.dsl"
    path.write_text("dim 2 order 2 from 1 to 2 [ d1^2 + d2^2 ; d1^2 + 2 d2^2 ]\n")
    code, out = run("classify", "--op", str(path), "--out", str(tmp_path / "o"))
    assert code == 0
    assert "continuous up to boundary on cubes" in out
    assert json.loads((tmp_path / "o" / "classification.json").read_text())["kind"] == "classification"


def test_bad_dsl_is_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.dsl"
    path.write_text("dim 2 order 1 from 1 to 1 [ d1^2 ]")
    assert run("classify", "--op", str(path))[0] == 2
    assert "DegreeError" in capsys.readouterr().err


def test_gallery_listing_and_check():
    code, out = run("gallery", "--json")
    assert code == 0 and len(json.loads(out)["report"]) == 12
    code, out = run("gallery", "--check")
    assert code == 0 and "12/12" in out


def test_kernel_command(tmp_path):
    code, out = run("kernel", "--gallery", "bitsadze_n2", "--w", "1,0", "--grid", "128", "--json", "--out", str(tmp_path))
    assert code == 0
    data = json.loads(out)["report"]
    assert data["witness"]["kind"] == "bounded_discontinuous"
    assert {p.name for p in tmp_path.iterdir()} >= {"kernel_field.opgf", "oscillation.csv", "profile.csv", "kernel.json"}


def test_kernel_membership_refusal():
    assert run("kernel", "--gallery", "grad_n2", "--w", "1,0")[0] == 2
    assert run("kernel", "--gallery", "bitsadze_n2", "--w", "1,0,0")[0] == 2


def test_verify_and_refusal():
    code, out = run("verify", "--gallery", "dn_n1", "--samples", "5", "--json")
    assert code == 0 and json.loads(out)["report"]["max_ratio"] <= 0.5 + 1e-6
    assert run("verify", "--gallery", "lap_div_curl_n3", "--which", "vs_j")[0] == 2


def test_demo_commands(tmp_path):
    code, out = run("demo", "--case", "indicator_1d", "--out", str(tmp_path))
    assert code == 0 and "strict convergence" in out
    assert (tmp_path / "demo_indicator_1d.csv").exists()
    assert run("demo", "--gallery", "example_ab")[0] == 2


def test_band_too_wide_is_usage_error():
    assert run("verify", "--gallery", "dn_n2", "--which", "modulus", "--grid", "16", "--samples", "1")[0] == 2


def test_numerical_failure_exit_code(monkeypatch, capsys):
    import opan.cli
    from opan.errors import IllConditionedFitError

    def broken(*args, **kwargs):
        raise IllConditionedFitError("singular design matrix")

    monkeypatch.setattr(opan.cli, "classify", broken)
    assert run("classify", "--gallery", "dn_n1")[0] == 3
    assert "numerical failure" in capsys.readouterr().err


@pytest.mark.parametrize("flag", ["--version", "--help"])
def test_info_flags(flag):
    assert run(flag)[0] == 0
