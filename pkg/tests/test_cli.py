import json
import os
import subprocess
import sys

import pytest

from gaussmix import cli


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _kv(text):
    pairs = (line.split(" = ", 1) for line in text.splitlines() if " = " in line)
    return {k.strip(): v.split("  [")[0].strip() for k, v in pairs}


def test_point_squeezed_vacuum(capsys):
    code, out, _ = _run(capsys, "point", "--ns", "1", "--nt", "0", "--n2", "0", "--tau", "0.5")
    assert code == 0
    kv = _kv(out)
    assert kv["depth"] == "0.414213562373"
    assert kv["entangled"] == "true"
    assert kv["effective_nc"] == "2.41421356237"
    assert "[nats]" in out


def test_point_thermal_is_discordant_not_entangled(capsys):
    code, out, _ = _run(capsys, "point", "--ns", "0", "--nt", "1")
    kv = _kv(out)
    assert code == 0 and kv["depth"] == "0" and kv["entangled"] == "false"
    assert float(kv["discord_1g2"]) > 0


def test_point_vacuum_all_zero(capsys):
    code, out, _ = _run(capsys, "point", "--ns", "0", "--nt", "0", "--tau", "0.3", "--json")
    data = json.loads(out)
    assert code == 0
    for key in ("discord_1g2", "discord_2g1", "mutual_info", "classical_corr_1g2",
                "log_negativity", "depth", "effective_nc"):
        assert data[key] == 0
    assert data["units"] == "nats"


def test_point_bits(capsys):
    _, nats, _ = _run(capsys, "point", "--ns", "0", "--nt", "1", "--json")
    _, bits, _ = _run(capsys, "point", "--ns", "0", "--nt", "1", "--json", "--bits")
    a, b = json.loads(nats), json.loads(bits)
    assert b["units"] == "bits"
    assert b["discord_1g2"] == pytest.approx(a["discord_1g2"] / 0.6931471805599453)


@pytest.mark.parametrize("argv, flag", [
    (["point", "--ns", "-1", "--nt", "0"], "--ns"),
    (["point", "--ns", "1", "--nt", "x"], "--nt"),
    (["point", "--ns", "1", "--nt", "0", "--tau", "1.5"], "--tau"),
    (["point", "--ns", "1"], "--nt"),
    (["sweep", "scatter", "--out", "-"], "seed"),
    (["sweep", "surface", "--range", "n_s=0:1"], "--range"),
    (["sweep", "surface", "--range", "n_s=0:1:1", "--out", "-"], "ranges.n_s.count"),
    (["sweep", "surface", "--tau", "random", "--out", "-"], "tau"),
])
def test_invalid_input_exits_1(capsys, argv, flag):
    code = None
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    _, err = capsys.readouterr()
    assert code == 1
    assert flag in err


def test_sweep_writes_to_env_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = _run(capsys, "sweep", "scatter", "--samples", "50", "--seed", "42",
                        "--n2", "random")
    path = tmp_path / "scatter.csv"
    assert code == 0 and path.exists()
    assert out.strip() == f"50 rows written to {path}"
    first = path.read_text().splitlines()[0]
    assert first.startswith("# ") and json.loads(first[2:])["seed"] == 42


def test_sweep_spec_file_and_override(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"version": 1, "kind": "imbalance", "N": 5,
                                "tau": [0.5, 0.8, 0.99]}))
    out_path = tmp_path / "imb.json"
    code, out, _ = _run(capsys, "sweep", "imbalance", "--spec", str(spec), "--tau", "0.5",
                        "--format", "json", "--out", str(out_path))
    assert code == 0 and out.startswith("101 rows")
    rows = json.loads(out_path.read_text())
    assert {r["tau"] for r in rows} == {0.5}


def test_sweep_spec_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(capsys, "sweep", "surface", "--spec", str(bad))[0] == 1
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"kind": "scatter", "seed": 1}))
    code, _, err = _run(capsys, "sweep", "surface", "--spec", str(other))
    assert code == 1 and "kind" in err
    code, _, err = _run(capsys, "sweep", "surface", "--spec", str(tmp_path / "missing.json"))
    assert code == 1 and "--spec" in err


def test_sweep_unwritable_path(capsys, tmp_path):
    code, _, err = _run(capsys, "sweep", "threshold-curve", "--out",
                        str(tmp_path / "no" / "such" / "dir.csv"))
    assert code == 1 and "--out" in err


def test_sweep_scatter_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        _run(capsys, "sweep", "scatter", "--samples", "200", "--seed", "42", "--n2", "random",
             "--out", str(p))
    assert a.read_bytes() == b.read_bytes()


def test_verify_single_checks(capsys):
    code, out, _ = _run(capsys, "verify", "--check", "emin-oracle", "--samples", "50")
    assert code == 0 and out.startswith("PASS  emin-oracle") and "all 1 checks passed" in out
    code, out, _ = _run(capsys, "verify", "--check", "depth-identity", "--samples", "30")
    assert code == 0 and "depth-identity" in out


def test_verify_failure_exit_code(capsys, monkeypatch):
    from gaussmix import checks

    def failing(name, samples=None, seed=None):
        return checks.CheckResult(name, 1, 1.0, 0.0, False, "forced")

    monkeypatch.setattr(checks, "run_check", failing)
    code, out, _ = _run(capsys, "verify", "--check", "purity")
    assert code == 2 and "1 of 1 checks failed: purity" in out


@pytest.mark.parametrize("sub", ["point", "sweep", "verify"])
def test_help_lists_units(capsys, sub):
    with pytest.raises(SystemExit) as exc:
        cli.main([sub, "--help"])
    out = capsys.readouterr().out
    assert exc.value.code == 0
    if sub == "verify":
        assert "nats" in out and "photons" in out
    else:
        for word in ("photons", "dimensionless", "nats"):
            assert word in out


def test_module_entry_point():
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "gaussmix", "point", "--ns", "1", "--nt", "0"],
                          capture_output=True, text=True, env=env, check=False)
    assert proc.returncode == 0 and "depth" in proc.stdout
