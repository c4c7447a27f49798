import json
import math

import pytest

from tempus.cli import main, parse_gamma
from tempus.errors import InvalidParam


@pytest.mark.parametrize("text,value", [
    ("pi/2", math.pi / 2), ("-pi/4", -math.pi / 4), ("3pi/4", 3 * math.pi / 4),
    ("0.5*pi", 0.5 * math.pi), ("pi", math.pi), ("0", 0.0), ("1.25", 1.25),
])
def test_parse_gamma(text, value):
    assert parse_gamma(text) == pytest.approx(value, rel=1e-15)


def test_parse_gamma_rejects_garbage():
    with pytest.raises(InvalidParam):
        parse_gamma("half")


@pytest.mark.parametrize("argv", [
    ["symmetry", "--family", "cto", "--gamma", "0"],
    ["symmetry", "--family", "gto", "--gamma", "pi/2", "--alpha", "power:50,1"],
    ["variance", "--preset", "fig1a"],
    ["spectrum", "--preset", "nope"],
    ["spectrum", "--N", "0"],
])
def test_usage_errors_exit_2(argv, tmp_path, capsys):
    assert main(argv + ["--out-dir", str(tmp_path)]) == 2
    assert "tempus" in capsys.readouterr().err


def test_argparse_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--route", "Z"])
    assert exc.value.code == 2


def test_computation_failure_exit_3(tmp_path, capsys):
    code = main(["carpet", "--N", "40", "--q-points", "15", "--out-dir", str(tmp_path)])
    assert code == 3
    assert "NormDrift" in capsys.readouterr().err
    # the manifest precedes the computation, so it survives the failure
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "carpet" and manifest["config"]["q_points"] == 15


def test_spectrum_rerun_is_byte_identical(tmp_path):
    argv = ["spectrum", "--route", "both", "--N", "20", "--count", "2", "--s", "0,5"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out-dir", str(a)]) == 0
    assert main(argv + ["--out-dir", str(b), "--jobs", "2"]) == 0
    assert (a / "spectrum.csv").read_bytes() == (b / "spectrum.csv").read_bytes()
    header = (a / "spectrum.csv").read_text().splitlines()[0]
    assert header == "n,tau,route,sector,s_or_alpha_rule,N,convergence_delta"


def test_config_file_precedence(tmp_path, monkeypatch):
    conf = tmp_path / "tempus.conf"
    conf.write_text("# defaults for a run\nN = 12\nfamily = cto\ngamma = pi/4\n")
    monkeypatch.setenv("TEMPUS_CONFIG", str(conf))
    out = tmp_path / "o"
    assert main(["symmetry", "--N", "8", "--out-dir", str(out)]) == 0
    cfg = json.loads((out / "manifest.json").read_text())["config"]
    assert cfg["N"] == 8 and cfg["family"] == "cto" and cfg["gamma"] == "pi/4"


def test_bad_config_file(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n")
    assert main(["symmetry", "--config", str(conf), "--out-dir", str(tmp_path)]) == 2


def test_preset_overridden_by_flags(tmp_path):
    assert main(["variance", "--preset", "fig2a", "--N", "20", "--out-dir", str(tmp_path)]) == 0
    cfg = json.loads((tmp_path / "manifest.json").read_text())["config"]
    assert cfg["N"] == 20
    rows = dict(r.split(",") for r in (tmp_path / "variance.csv").read_text().splitlines()[-4:])
    assert abs(float(rows["t_min"]) - float(rows["tau"])) <= 0.05 * abs(float(rows["tau"]))


def test_symmetry_and_ccr_outputs(tmp_path, capsys):
    assert main(["symmetry", "--s", "0,5", "--N", "16", "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "symmetry.csv").read_text().splitlines()
    assert len(lines) == 1 + 6
    assert "tau-symmetric" in capsys.readouterr().out
    assert main(["verify-ccr", "--family", "cto", "--gamma", "pi/4", "--N", "30",
                 "--trials", "5", "--out-dir", str(tmp_path)]) == 0
    res = [float(r.split(",")[1]) for r in (tmp_path / "ccr.csv").read_text().splitlines()[1:]]
    assert len(res) == 5 and max(res) < 1e-8


def test_transition_law_output(tmp_path):
    assert main(["transition", "--preset", "fig6a", "--N", "30", "--out-dir", str(tmp_path)]) == 0
    text = (tmp_path / "transition_law.csv").read_text()
    assert "slope" in text and "min_height" in text
