import pytest

from ppt_discrimination.cli import EXIT_OK
from tests.utils import read_json, run_cli


def test_bound_yde4(monkeypatch, capsys):
    assert run_cli(monkeypatch, "bound", "--set", "yde4") == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["instance   yde4", "eq3 bound  0.875", "d/k bound  1.0"]


def test_bound_pow2(monkeypatch, capsys):
    assert run_cli(monkeypatch, "bound", "--set", "pow2(3)") == EXIT_OK
    output = capsys.readouterr().out
    assert "instance   pow2_3" in output
    bound = float(output.splitlines()[1].split()[-1])
    assert bound <= 1.0 + 1e-6


def test_bound_not_applicable(monkeypatch, capsys, write_state_set):
    doc = {
        "dim_a": 2,
        "dim_b": 2,
        "states": [
            {"kind": "raw_vector", "re": [1.0, 0.0, 0.0, 0.0], "im": [0.0, 0.0, 0.0, 0.0]},
            {"kind": "raw_vector", "re": [0.0, 0.0, 0.0, 1.0], "im": [0.0, 0.0, 0.0, 0.0]},
        ],
    }
    assert run_cli(monkeypatch, "bound", "--set", str(write_state_set(doc))) == EXIT_OK
    output = capsys.readouterr().out
    assert "instance   states" in output
    assert "eq3 bound  1.0" in output
    assert "d/k bound  not applicable" in output


def test_bound_report(monkeypatch, tmp_path):
    out = tmp_path / "bound.json"
    args = ["bound", "--set", "bell_basis", "--force-sdp", "--out", str(out)]
    assert run_cli(monkeypatch, *args) == EXIT_OK
    report = read_json(out)
    assert report["kind"] == "bound"
    assert report["problem"]["path"] == "sdp"
    assert report["problem"]["instance"]["k"] == 4
    assert report["eq3_bound"] == pytest.approx(0.5, abs=1e-6)
    assert report["theorem1_bound"] == 0.5
    assert report["certificate"]["form"] == "dual3"
    assert "q_ops" not in report["certificate"]
