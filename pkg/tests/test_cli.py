import json
import subprocess
import sys

import pytest

from cpfgate import config as cfgmod
from cpfgate.cli import run


def _run(tmp_path, *argv):
    out = tmp_path / "out.txt"
    code = run([*argv, "--out", str(out)])
    return code, (out.read_text() if out.exists() else "")


def _scalars(text):
    rows = {}
    for line in text.splitlines()[2:]:
        if not line:
            break
        k, v = line.split(",", 1)
        rows[k] = v
    return rows


def test_truth_table_ideal_and_error(tmp_path):
    code, text = _run(tmp_path, "truth-table", "--mode", "ideal")
    assert code == 0
    assert text.startswith("# cpfgate truth-table config_sha256=")
    assert float(_scalars(text)["F_CNOT"]) == pytest.approx(1.0, abs=1e-12)
    code, text = _run(tmp_path, "truth-table")
    assert 0.72 <= float(_scalars(text)["F_CNOT"]) <= 0.82


def test_bell_ideal_exact(tmp_path):
    code, text = _run(tmp_path, "bell", "--mode", "ideal", "--exact")
    s = _scalars(text)
    assert float(s["F_psi_plus_exact"]) == pytest.approx(1.0, abs=1e-12)
    assert float(s["capability_exact"]) == pytest.approx(-0.5, abs=1e-10)


def test_bell_sampled_needs_seed(tmp_path, capsys):
    code, _ = _run(tmp_path, "bell")
    assert code == 1
    assert "--seed" in capsys.readouterr().err
    code, text = _run(tmp_path, "bell", "--seed", "4")
    assert code == 0
    assert abs(float(_scalars(text)["F_psi_plus"]) - 0.73) < 0.08


def test_missing_or_bad_config(tmp_path, capsys):
    assert run(["budget", "--config", str(tmp_path / "nope.cfg")]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("g_mhz = 7\nwarp_factor = 9\n")
    assert run(["budget", "--config", str(bad)]) == 1
    assert "unknown key" in capsys.readouterr().err
    assert run(["no-such-command"]) == 1


def test_custom_config_changes_hash(tmp_path):
    cfg = cfgmod.reference_config()
    path = tmp_path / "c.cfg"
    cfgmod.save(cfg, path)
    _, a = _run(tmp_path, "efficiency", "--config", str(path))
    _, b = _run(tmp_path, "efficiency")
    assert a == b  # same content, same hash
    text = path.read_text().replace("t_optics = 0.81", "t_optics = 0.8")
    path.write_text(text)
    _, c = _run(tmp_path, "efficiency", "--config", str(path))
    assert c.splitlines()[0] != a.splitlines()[0]


def test_budget_sorted(tmp_path):
    _, text = _run(tmp_path, "budget")
    body = text.split("# table: budget\n")[1].splitlines()[1:]
    red = [float(line.split(",")[1]) for line in body]
    assert red == sorted(red, reverse=True) and len(red) == 6
    _, text = _run(tmp_path, "budget", "--mode", "ideal")
    assert text.split("# table: budget\n")[1].splitlines()[1:] == []


def test_json_output(tmp_path):
    code, text = _run(tmp_path, "avg-fidelity", "--exact", "--format", "json")
    doc = json.loads(text)
    assert doc["header"].startswith("cpfgate avg-fidelity config_sha256=")
    assert 0.71 <= doc["scalars"]["F_avg_exact"] <= 0.81
    assert len(doc["tables"]["state_fidelities"]["rows"]) == 36
    code, text = _run(tmp_path, "trace", "--format", "json")
    assert json.loads(text)["trace"]["outcome_probs"]["up"] == pytest.approx(0.5)


def test_ramsey_synthetic_and_file(tmp_path):
    code, text = _run(tmp_path, "ramsey", "--synthetic", "--seed", "2")
    assert code == 0
    assert abs(float(_scalars(text)["rabi_khz"]) - 250) < 3
    spectrum_file = tmp_path / "spectrum.csv"
    table = text.split("# table: spectrum\n")[1].splitlines()
    spectrum_file.write_text("delta_khz,p_up,sigma\n" + "\n".join(",".join(r.split(",")[:3]) for r in table[1:]))
    code, again = _run(tmp_path, "ramsey", "--data", str(spectrum_file))
    assert code == 0
    assert _scalars(again)["rabi_khz"] == _scalars(text)["rabi_khz"]
    assert _run(tmp_path, "ramsey")[0] == 1


def test_ramsey_fit_failure_exit_code(tmp_path, capsys):
    argv = ["ramsey", "--synthetic", "--seed", "1", "--max-nfev", "1", "--out", str(tmp_path / "o")]
    assert run(argv) == 2
    assert "numerical failure" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["truth-table", "--shots", "200", "--seed", "9"],
    ["bell", "--seed", "9"],
    ["ramsey", "--synthetic", "--seed", "9"],
    ["phase-spectrum", "--points", "11"],
])
def test_reruns_are_byte_identical(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run([*argv, "--out", str(a)]) == 0
    assert run([*argv, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cpfgate.cli", "efficiency"], capture_output=True,
                         text=True, check=True)
    assert "per_photon,0.21925" in res.stdout
