import json

import pytest

from ginlab import cli

CASE = {"n": 2, "k": [1, 1], "a": [0.3, 0.1, -0.2, 0.4]}


def run(argv):
    return cli.main([str(a) for a in argv])


def test_kernel_eval_writes_csv(tmp_path):
    out = tmp_path / "k"
    assert run(["kernel-eval", "--t", 1, "--grid=-1:1:0.5", "--out", out]) == cli.EXIT_PASS
    rows = (out / "kernel.csv").read_text().splitlines()
    assert rows[0] == "re_zhat,im_zhat,prediction" and len(rows) == 6
    man = json.loads((out / "manifest.json").read_text())
    assert man["complete"] is True and man["command"] == "kernel-eval"


def test_duality_reports_are_byte_identical(tmp_path):
    args = ["duality-check", "--seed", 4, "--beta", 2, "--case", json.dumps(CASE), "--budget", 4000]
    assert run(args + ["--out", tmp_path / "a"]) == cli.EXIT_PASS
    assert run(args + ["--out", tmp_path / "b"]) == cli.EXIT_PASS
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "command": "integral-check", "seed": 1, "output_dir": str(tmp_path / "o"),
        "parameters": {"n": 1, "t": 0, "points": [0.3], "budget": 1000},
    }, indent=2))
    assert run(["integral-check", "--config", cfg, "--budget", 20000]) == cli.EXIT_PASS
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["config"]["parameters"]["budget"] == 20000


def test_validate_names_unknown_key_and_line(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{\n  "command": "prop13-check",\n  "seed": 1,\n  "parameters": {\n    "z": 0.9,\n    "bogus": 3\n  }\n}\n')
    assert run(["validate", cfg]) == cli.EXIT_ERROR
    assert "line 6" in capsys.readouterr().out


def test_validate_prints_defaults(tmp_path, capsys):
    cfg = tmp_path / "ok.json"
    cfg.write_text(json.dumps({"command": "prop13-check", "seed": 1, "parameters": {"z": 0.9}}))
    assert run(["validate", cfg]) == cli.EXIT_PASS
    resolved = json.loads(capsys.readouterr().out)
    assert resolved["parameters"]["n"] == 8 and resolved["parameters"]["disk_radius"] == 0.15


def test_missing_seed_is_an_error(tmp_path):
    assert run(["prop13-check", "--z", 0.9, "--out", tmp_path]) == cli.EXIT_ERROR


def test_usage_error_exit_status():
    with pytest.raises(SystemExit) as info:
        run(["kernel-eval", "--nonsense"])
    assert info.value.code == cli.EXIT_ERROR


def test_failed_check_exit_status(tmp_path):
    # an impossible threshold forces the statistical failure path
    args = ["duality-check", "--seed", 1, "--beta", 2, "--case", json.dumps(CASE), "--budget", 2000,
            "--threshold", 0, "--retry", "false", "--out", tmp_path]
    assert run(args) == cli.EXIT_FAIL
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["complete"] is True and man["pass"] is False


def test_runtime_error_leaves_incomplete_manifest(tmp_path):
    args = ["integral-check", "--seed", 1, "--n", 2, "--points", "[0.1, 0.1]", "--budget", 1000, "--out", tmp_path]
    assert run(args) == cli.EXIT_ERROR
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["complete"] is False and "coincide" in man["error"]


@pytest.mark.parametrize("text,value", [("1.5", 1.5), ('"0.5-0.2j"', 0.5 - 0.2j), ('{"re": 1, "im": 2}', 1 + 2j)])
def test_complex_encodings(text, value):
    assert cli.to_complex(json.loads(text)) == value


def test_matrix_encodings():
    assert cli.to_matrix([1, "2j"]).tolist() == [[1, 0], [0, 2j]]
    assert cli.to_matrix({"re": [[1, 0], [0, 1]], "im": [[0, 1], [0, 0]]})[0, 1] == 1j
    with pytest.raises(cli.ConfigError):
        cli.to_matrix([[1, 2], [3]])


def test_grid_parser():
    assert cli.parse_grid("-1:1:0.5").tolist() == [-1, -0.5, 0, 0.5, 1]
