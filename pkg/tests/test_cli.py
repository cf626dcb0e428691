import csv
import io
import json
import math
import subprocess
import sys

import pytest

from bellfield.cli import dumps, main, run

SPIN_TARGET = 2 * math.sqrt(2) * (1 + math.sqrt(2)) / 3


@pytest.fixture
def config(tmp_path):
    def write(obj, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return write


def _json(argv):
    code, text, _ = run(argv)
    assert code == 0, text
    return json.loads(text)


def test_correlator_defaults_to_reference_point():
    out = _json(["correlator"])
    assert out["result"]["value"] == pytest.approx(2.14931, abs=1e-5)
    assert out["result"]["violation"] is True
    assert out["version"] and out["config"]["params"]["lambda"] == 0.495456


def test_correlator_zero_params(config):
    out = _json(["correlator", "--config", config({"params": {"eta": 0, "eta_prime": 0, "lambda": 0.3}})])
    assert out["result"]["value"] == 2
    assert out["result"]["violation"] is False


@pytest.mark.parametrize(
    "cfg, message",
    [
        ({"params": {"eta": 0.1, "eta_prime": 0.1, "lambda": 1.2}}, "lambda out of (0,1)"),
        ({"params": {"eta": 0.1, "lam": 0.3}}, "unknown field"),
        ({"extra": 1}, "unknown field"),
        ({"params": {"eta": "x"}}, "must be a number"),
    ],
)
def test_invalid_config_exits_2(config, cfg, message):
    code, text, _ = run(["correlator", "--config", config(cfg)])
    assert code == 2
    assert message in text


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["spin", "--config", str(bad)])[0] == 2
    assert run(["spin", "--config", str(tmp_path / "missing.json")])[0] == 2


def test_spin_reference_angles():
    res = _json(["spin"])["result"]
    assert res["matrix"] == pytest.approx(SPIN_TARGET, abs=1e-12)
    assert res["closed_form"] == pytest.approx(SPIN_TARGET, abs=1e-12)


def test_spin_csv():
    code, text, _ = run(["spin", "--format", "csv"])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["matrix", "closed_form", "violation"]
    assert float(rows[1][0]) == pytest.approx(SPIN_TARGET)


def test_spin_product_state(config):
    res = _json(["spin", "--config", config({"state": "product"})])["result"]
    assert res["matrix"] == 0 and res["closed_form"] is None


def test_oracle_report(config):
    out = _json(["oracle", "--config", config({"convergence": [6, 10]}), "--nmax", "16"])
    res = out["result"]
    assert res["abs_difference"] < 1e-6
    assert all(row["norm_C"] <= 2 * math.sqrt(2) + 1e-9 for row in res["convergence"])
    errors = [row["abs_error"] for row in res["convergence"]]
    assert errors == sorted(errors, reverse=True)


def test_oracle_zero_functions(config):
    cfg = {"params": {"eta": 0, "eta_prime": 0, "lambda": 0.5}, "convergence": [4], "n_max": 4}
    assert _json(["oracle", "--config", config(cfg)])["result"]["oracle"] == pytest.approx(2, abs=1e-14)


def test_oracle_tolerance_failure_exits_1(config):
    cfg = {"convergence": [], "n_max": 4, "tolerances": {"oracle": 1e-12}}
    code, text, _ = run(["oracle", "--config", config(cfg)])
    assert code == 1
    assert "numerical failure" in text


def test_jc_report():
    res = _json(["jc"])["result"]
    assert res["corrected"] == pytest.approx((1 - res["delta_sq"]) * res["C0"])
    assert abs(res["oracle"]["residual"]) < 1e-8


def test_jc_equal_couplings(config):
    cfg = {"jc": {"omega_A": 0.01, "omega_B": 0.01, "J": 1, "m": 1}, "n_max": 8}
    res = _json(["jc", "--config", config(cfg)])["result"]
    assert res["delta_sq"] == 0
    assert res["corrected"] == res["C0"]


def test_jc_discrete_profiles(config):
    prof = {"kind": "discrete", "modes": [[0.05, 0.7]], "values": [1.0]}
    cfg = {"jc": {"omega_A": 0.01, "omega_B": 0, "J": 1, "m": 1}, "profile_A": prof, "profile_B": prof, "n_max": 12}
    res = _json(["jc", "--config", config(cfg)])["result"]
    assert res["oracle"]["delta_sq"] == res["delta_sq"]
    assert abs(res["oracle"]["residual"]) < 1e-6


def test_jc_bad_profile(config):
    assert run(["jc", "--config", config({"profile_A": {"kind": "box"}})])[0] == 2


def test_optimize_seed_flag_and_determinism(config):
    path = config({"budget": 300})
    a = run(["optimize", "--config", path, "--seed", "5"])
    b = run(["optimize", "--config", path, "--seed", "5"])
    assert a == b
    out = json.loads(a[1])
    assert out["result"]["seed"] == 5 and out["config"]["seed"] == 5


def test_optimize_spin(config):
    res = _json(["optimize", "--config", config({"target": "spin", "budget": 0, "start": {}})])["result"]
    assert res["best_value"] == pytest.approx(SPIN_TARGET, abs=1e-15)


def test_optimize_bad_target(config):
    assert run(["optimize", "--config", config({"target": "both"})])[0] == 2


def test_sweep_default_lattice():
    code, text, _ = run(["sweep"])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["eta", "eta_prime", "lambda", "C0", "violation"]
    assert len(rows) == 8001
    assert all(abs(float(r[3])) <= 2 * math.sqrt(2) for r in rows[1:])
    assert {r[4] for r in rows[1:]} <= {"true", "false"}


def test_sweep_json_and_bad_lambda(config):
    out = _json(["sweep", "--format", "json", "--config", config({"eta": [0, 1, 2], "eta_prime": [0, 1, 2], "lambda": [0.1, 0.5, 2]})])
    assert out["result"]["rows"] == 8 and len(out["rows"]) == 8
    code, _, _ = run(["sweep", "--config", config({"lambda": [0.0, 0.5, 3]})])
    assert code == 2


def test_byte_identical_json(config):
    path = config({"params": {"eta": 0.3, "eta_prime": 0.7, "lambda": 0.6}})
    assert run(["correlator", "--config", path])[1] == run(["correlator", "--config", path])[1]


def test_dumps_format():
    text = dumps({"b": 0.1, "a": [1, True, None], "c": {"x": 1e-300}})
    assert text.index('"b"') < text.index('"a"')
    assert "0.10000000000000001" in text
    assert json.loads(text) == {"b": 0.1, "a": [1, True, None], "c": {"x": 1e-300}}


def test_main_writes_out_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["spin", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["command"] == "spin"
    assert main(["correlator", "--seed", "-1"]) == 2
    assert "error" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bellfield", "spin", "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("matrix,closed_form,violation")
