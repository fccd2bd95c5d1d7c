import pytest

from ppt_discrimination.actions.certify import load_certificate
from ppt_discrimination.actions.exceptions import InvalidCertificateFile
from ppt_discrimination.actions.report import certificate_to_dict
from ppt_discrimination.cli import EXIT_INPUT_ERROR, EXIT_OK
from ppt_discrimination.discrim import CertificateForm
from ppt_discrimination.discrim.fixtures import thm3_certificate
from tests.utils import read_json, run_cli, write_json


def test_certify_thm3_exact(monkeypatch, capsys):
    args = ["certify", "--set", "yde4", "--certificate", "fixture:thm3", "--exact"]
    assert run_cli(monkeypatch, *args) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["certificate  valid (exact backend)", "bound        7/8 (0.875)"]


def test_certify_thm5(monkeypatch, capsys):
    args = ["certify", "--set", "pow2_3", "--certificate", "fixture:thm5"]
    assert run_cli(monkeypatch, *args) == EXIT_OK
    output = capsys.readouterr().out
    assert "certificate  valid (float backend)" in output
    assert "bound        0.96875" in output


def test_certify_thm6_is_invalid(monkeypatch, capsys, caplog):
    args = ["certify", "--set", "yde4", "--certificate", "fixture:thm6", "--exact"]
    assert run_cli(monkeypatch, *args) == EXIT_INPUT_ERROR
    assert "certificate  invalid (exact backend)" in capsys.readouterr().out
    assert "Verification failed for yde4" in caplog.text


@pytest.mark.parametrize(
    "name,source,valid,bound",
    [
        ("yde4", "Y=identity/4", True, "1.0"),
        ("bell_basis", "Y=identity/2", True, "0.5"),
        ("bell_basis", "Y=identity/4", False, "0.25"),
        ("bell_basis", "Y=identity", True, "1.0"),
    ],
)
def test_certify_identity(monkeypatch, capsys, name, source, valid, bound):
    code = run_cli(monkeypatch, "certify", "--set", name, "--certificate", source)
    assert code == (EXIT_OK if valid else EXIT_INPUT_ERROR)
    output = capsys.readouterr().out
    assert output.startswith(f"certificate  {'valid' if valid else 'invalid'}")
    assert f"bound        {bound}\n" in output


def test_certify_identity_zero(monkeypatch, caplog):
    args = ["certify", "--set", "yde4", "--certificate", "Y=identity/0"]
    assert run_cli(monkeypatch, *args) == EXIT_INPUT_ERROR
    assert "needs a positive N" in caplog.text


def test_certify_solve_report(monkeypatch, capsys, tmp_path):
    out = tmp_path / "report.json"
    assert run_cli(monkeypatch, "solve", "--set", "yde4", "--out", str(out)) == EXIT_OK
    capsys.readouterr()
    args = ["certify", "--set", "yde4", "--certificate", str(out)]
    assert run_cli(monkeypatch, *args) == EXIT_OK
    output = capsys.readouterr().out
    assert "certificate  valid (float backend)" in output
    assert "measurement  valid" in output
    assert "success      0.875" in output
    report = read_json(out)
    assert f"bound        {round(report['dual_value'], 6)}" in output


def test_certify_rounded_report(monkeypatch, capsys, tmp_path):
    out = tmp_path / "bound.json"
    assert run_cli(monkeypatch, "bound", "--set", "yde4", "--out", str(out)) == EXIT_OK
    capsys.readouterr()
    args = ["certify", "--set", "yde4", "--certificate", str(out), "--round", "--exact"]
    assert run_cli(monkeypatch, *args) == EXIT_OK
    assert "certificate  valid (exact backend)" in capsys.readouterr().out


def test_certify_certificate_file(monkeypatch, capsys, tmp_path, yde4):
    path = write_json(tmp_path / "thm3.json", certificate_to_dict(thm3_certificate()))
    cert, measurement = load_certificate(str(path), yde4)
    assert cert.form is CertificateForm.DUAL3
    assert cert.y.allclose(thm3_certificate().y)
    assert measurement is None

    args = ["certify", "--set", "yde4", "--certificate", str(path), "--exact"]
    assert run_cli(monkeypatch, *args) == EXIT_OK
    assert "bound        7/8 (0.875)" in capsys.readouterr().out


def test_load_certificate_errors(tmp_path, yde4, bell_basis):
    with pytest.raises(InvalidCertificateFile, match="does not exist"):
        load_certificate(str(tmp_path / "missing.json"), yde4)

    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(InvalidCertificateFile, match="Cannot load"):
        load_certificate(str(broken), yde4)

    listing = write_json(tmp_path / "list.json", [1, 2])
    with pytest.raises(InvalidCertificateFile, match="does not contain a mapping"):
        load_certificate(str(listing), yde4)

    newer = write_json(tmp_path / "newer.json", {"schema_version": "2.0", "form": "dual3"})
    with pytest.raises(InvalidCertificateFile, match="is not supported"):
        load_certificate(str(newer), yde4)

    no_y = write_json(tmp_path / "no-y.json", {"form": "dual3"})
    with pytest.raises(InvalidCertificateFile, match="does not match the schema"):
        load_certificate(str(no_y), yde4)

    thm3 = write_json(tmp_path / "thm3.json", certificate_to_dict(thm3_certificate()))
    with pytest.raises(InvalidCertificateFile, match="does not act on 2x2"):
        load_certificate(str(thm3), bell_basis)
