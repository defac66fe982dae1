import json

import pytest

from skewmix.cli import run


def test_validate_ok(tmp_path, capsys):
    assert run(["validate", "--config", "tripling_cos", "--outdir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "lambda_tilde,3" in out
    manifest = json.loads((tmp_path / "validate.manifest.json").read_text())
    assert manifest["command"] == "validate"
    assert "gamma2_theory" in manifest["constants"]


def test_validate_rejects_doubling():
    assert run(["validate", "--config", "doubling"]) == 1


def test_unknown_subcommand_is_invalid():
    assert run(["bogus"]) == 1


def test_missing_config_file():
    assert run(["validate", "--config", "no/such/file.json"]) == 1


def test_cap_exceeded_is_numerical_failure():
    assert run(["preimages", "--config", "tripling_cos", "--y", "0.5", "--n", "20"]) == 2


def test_constant_tau_verdict(capsys):
    assert run(["validate", "--config", "constant_tau"]) == 0
    assert "Cohomologous" in capsys.readouterr().out


def test_preimages_columns(capsys):
    assert run(["preimages", "--config", "tripling_cos", "--y", "0.5", "--n", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "word,x,J_n,tau_n,dtau_n"
    assert len(lines) == 10


def test_csv_has_17_significant_digits(capsys):
    run(["phi", "--config", "tripling_cos", "--n", "2"])
    row = capsys.readouterr().out.splitlines()[2].split(",")
    assert row[1] == format(float(row[1]), ".17g")


def test_json_output(capsys):
    assert run(["phi", "--config", "tripling_cos", "--n", "2", "--out", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data[1]["n"] == 2


def test_cohomology_writes_profiles(tmp_path, capsys):
    assert run(["cohomology", "--config", "tripling_cohomologous_const", "--grid", "4096", "--outdir", str(tmp_path)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["verdict"] == "Cohomologous"
    assert (tmp_path / "cohomology_theta.csv").exists()


@pytest.mark.parametrize("threads", ["1", "4"])
def test_spectrum_bytes_do_not_depend_on_threads(tmp_path, threads, monkeypatch):
    monkeypatch.setenv("SKEWMIX_THREADS", threads)
    run(["spectrum", "--config", "tripling_cos", "--b", "40", "--probes", "3", "--outdir", str(tmp_path / threads)])
    ref = tmp_path / "ref"
    run(["spectrum", "--config", "tripling_cos", "--b", "40", "--probes", "3", "--threads", "1", "--outdir", str(ref)])
    assert (tmp_path / threads / "spectrum.csv").read_bytes() == (ref / "spectrum.csv").read_bytes()


def test_growth_and_vdc(capsys):
    assert run(["growth", "--config", "tripling_cos", "--omega0", "0,0.05", "--n", "4", "--eps", "1e-3"]) == 0
    assert run(["vdc", "--suite", "closed_form"]) == 0
    out = capsys.readouterr().out
    assert "problem_id,integral_abs,bound_paper,bound_corrected,pass" in out


def test_growth_rejects_long_interval():
    assert run(["growth", "--config", "tripling_cos", "--omega0", "0,0.9"]) == 1


def test_correlation_with_modes_file(tmp_path, capsys):
    obs = tmp_path / "obs.json"
    obs.write_text(json.dumps({"g": {"modes": {"1": "0.5*cos(2*pi*x)", "-1": "0.5*cos(2*pi*x)"}}}))
    assert run(["correlation", "--config", "tripling_cos", "--obs", str(obs), "--nmax", "8", "--grid", "1024"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,cor_fourier_re,cor_fourier_im,cor_direct,zeta_fit,r2"
    first = lines[1].split(",")
    assert float(first[1]) == pytest.approx(0.25, abs=1e-6)


def test_suite_subset(capsys):
    assert run(["suite", "--only", "10"]) == 0
