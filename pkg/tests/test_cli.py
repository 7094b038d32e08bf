import csv
import json
import subprocess
import sys

import pytest

from netmimo import cli, experiments


def _run(*args):
    return cli.main([str(a) for a in args])


def _csvs(path):
    return {p.name: p.read_bytes() for p in sorted(path.glob("*.csv"))}


def test_validate_exits_zero(tmp_path, capsys):
    assert _run("--experiment", "validate", "--out-dir", tmp_path) == 0
    rows = [r for p in tmp_path.glob("*.csv") for r in csv.DictReader(p.open())]
    assert rows and all(r["status"] == "pass" for r in rows)


def test_csv_schema_and_manifest(tmp_path):
    assert _run("--experiment", "fig2-eta-cluster-sweep", "--etas", "0.6", "--cluster-sizes", "2,4",
                "--out-dir", tmp_path) == 0
    files = sorted(tmp_path.glob("*.csv"))
    assert files
    for p in files:
        with p.open() as fh:
            reader = csv.DictReader(fh)
            assert tuple(reader.fieldnames) == experiments.CSV_COLUMNS
            rows = list(reader)
        assert [float(r["axis"]) for r in rows] == [2.0, 4.0]
        assert all(float(r["value"]) > 0 and r["method"] == "analytic" and r["status"] == "ok" for r in rows)
    manifest = json.loads((tmp_path / experiments.MANIFEST_NAME).read_text())
    assert manifest["experiment"] == "fig2-eta-cluster-sweep"
    assert set(manifest["files"]) == {p.name for p in files}
    assert manifest["failures"] == 0


def test_manifest_replay_is_bitwise(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert _run("--experiment", "fig4-cluster-scaling", "--method", "montecarlo", "--cluster-sizes", "1,2",
                "--topologies", "4", "--fading", "2", "--seed", "7", "--out-dir", first) == 0
    assert _run("--from-manifest", first / experiments.MANIFEST_NAME, "--workers", "2", "--out-dir", second) == 0
    assert _csvs(first) == _csvs(second)


def test_bad_config_exits_with_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("alpha = 1.5\n")
    assert _run("--experiment", "validate", "--config", cfg, "--out-dir", tmp_path) == 2
    assert "alpha" in capsys.readouterr().err


def test_missing_experiment_is_an_error(tmp_path):
    assert _run("--out-dir", tmp_path) == 2


def test_analytic_cdf_request_is_reported(tmp_path):
    assert _run("--experiment", "cdf-user-rates", "--method", "analytic", "--out-dir", tmp_path) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "netmimo", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "--experiment" in out.stdout


@pytest.mark.parametrize("text", ["0.2,x", "abc"])
def test_bad_axis_list_rejected(text):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["--etas", text])
