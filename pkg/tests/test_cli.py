import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from affine_loophole.cli import RunConfig, main
from affine_loophole.qstate import bell_singlet, random_density
from affine_loophole.serialization import matrix_from_json, matrix_to_json

SMALL = ["--trials", "20000"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def result(capsys, *argv):
    code, out = run(capsys, *argv)
    assert code == 0
    return json.loads(out)["result"]


def test_separate_named_states(capsys):
    r = result(capsys, "separate", "--state", "bell-singlet")
    assert r["a"] == pytest.approx(6)
    assert r["n_terms"] == 12
    assert r["reconstruction_error"] <= 1e-10
    assert result(capsys, "separate", "--state", "maximally-mixed", "--qubits", "2")["a"] == 1
    assert result(capsys, "separate", "--state", "qdice-sigma", "--strategy", "sequential")["a"] == pytest.approx(1)


def test_separate_matrix_file(capsys, tmp_path):
    rho = random_density(3, 3)
    path = tmp_path / "rho.json"
    path.write_text(json.dumps(matrix_to_json(rho)))
    r = result(capsys, "separate", "--state", str(path))
    assert r["n_qubits"] == 3 and r["reconstruction_error"] <= 1e-10


def test_invalid_inputs_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[[1, 2], [3]]")
    assert run(capsys, "separate", "--state", str(bad))[0] == 2
    not_state = tmp_path / "neg.json"
    not_state.write_text(json.dumps(matrix_to_json(np.diag([1.5, -0.5]))))
    assert run(capsys, "separate", "--state", str(not_state))[0] == 2
    assert run(capsys, "separate", "--state", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "separate", "--state", "bloch:1,1,0")[0] == 2
    code, out = run(capsys, "validate", "--state", str(not_state))
    assert code == 2 and json.loads(out)["result"]["psd"] is False


def test_validate(capsys):
    r = result(capsys, "validate", "--state", "bell-singlet")
    assert r["valid"] and r["psd"] and r["unit_trace"] and r["hermitian"]


def test_pseudopure(capsys):
    r = result(capsys, "pseudopure", "--state", "bloch:0,0.6,0")
    assert r["pseudo_pure"] and r["a"] == pytest.approx(1 / 0.6)
    assert result(capsys, "pseudopure", "--state", "maximally-mixed")["pseudo_pure"] is False
    r = result(capsys, "pseudopure", "--state", "bell-singlet")
    np.testing.assert_allclose(matrix_from_json(r["pure_state"]), bell_singlet(), atol=1e-12)


def test_chsh(capsys):
    assert result(capsys, "chsh", "--source", "qdice", "--pipeline", "a3")["S"] == pytest.approx(2 * np.sqrt(2), abs=1e-10)
    assert result(capsys, "chsh", "--source", "singlet")["S"] == pytest.approx(2 * np.sqrt(2), abs=1e-10)
    assert result(capsys, "chsh", "--source", "separated", "--pipeline", "a6")["S"] == pytest.approx(2 * np.sqrt(2), abs=1e-10)
    r = result(capsys, "chsh", "--source", "qdice", "--mode", "sampled", "--trials", "100000", "--seed", "3")
    assert r["S"] == pytest.approx(2 * np.sqrt(2) / 3, abs=5 * r["S_error"])


def test_curve_csv(capsys):
    code, out = run(capsys, "curve", "--source", "qdice", "--points", "64", "--format", "csv")
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(lines))
    assert len(rows) == 64
    theta = np.array([float(r["theta"]) for r in rows])
    E = np.array([float(r["E"]) for r in rows])
    np.testing.assert_allclose(E, -np.cos(theta) / 3, atol=1e-10)
    assert {r["source"] for r in rows} == {"classical-raw"}
    assert "# seed=" in out


def test_mimic(capsys):
    r = result(capsys, "mimic", "--trials", "1200000", "--seed", "11")
    zz = r["z_z"]
    assert r["equivalent_a"] == pytest.approx(3)
    np.testing.assert_allclose(zz["distorted_exact"], [0, 0.5, 0.5, 0], atol=1e-12)
    np.testing.assert_allclose(zz["distorted_sampled"], zz["quantum"], atol=3 * 3 * 4.3e-4)
    assert r["chsh"]["distorted_sampled"]["S"] == pytest.approx(2 * np.sqrt(2), abs=0.02)


def test_mimic_without_threshold_changes_nothing(capsys):
    r = result(capsys, "mimic", "--theta", "0", *SMALL)
    assert r["z_z"]["distorted_sampled"] == r["z_z"]["raw_frequencies"]


def test_mimic_saturated_exit_3(capsys):
    assert run(capsys, "mimic", "--trials", "1200", "--theta", "300")[0] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["mimic", *SMALL, "--seed", "4"],
        ["chsh", "--source", "qdice", "--mode", "sampled", "--pipeline", "a3", *SMALL],
        ["curve", "--source", "singlet", "--points", "16", "--format", "csv"],
        ["separate", "--state", "bell-singlet"],
    ],
)
def test_artifacts_are_byte_identical(tmp_path, argv):
    path = tmp_path / "artifact.out"
    assert main(argv + ["--out", str(path)]) == 0
    first = path.read_bytes()
    path.unlink()
    assert main(argv + ["--out", str(path)]) == 0
    assert path.read_bytes() == first


def test_artifact_metadata(capsys, monkeypatch):
    monkeypatch.setenv("AFFINE_LOOPHOLE_SEED", "77")
    code, out = run(capsys, "separate", "--state", "bell-singlet")
    doc = json.loads(out)
    assert doc["seed"] == 77 and doc["config"]["seed"] == 77
    assert doc["tool"] == "affine-loophole" and doc["version"]
    assert "duration_s" not in doc
    code, out = run(capsys, "separate", "--state", "bell-singlet", "--timing")
    assert json.loads(out)["duration_s"] >= 0


def test_config_round_trip(tmp_path, capsys):
    cfg = RunConfig(command="chsh", source="qdice", pipeline="a3", seed=5, trials=50_000)
    assert RunConfig.from_json(cfg.to_json()) == cfg
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    r = result(capsys, "chsh", "--config", str(path))
    assert r["S"] == pytest.approx(2 * np.sqrt(2), abs=1e-10)
    saved = tmp_path / "saved.json"
    main(["chsh", "--config", str(path), "--seed", "6", "--save-config", str(saved)])
    capsys.readouterr()
    assert RunConfig.from_json(saved.read_text()).seed == 6


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "affine_loophole", "validate", "--state", "qdice-sigma"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["result"]["valid"]
