import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from zenolab.cli import EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, SCHEMA_VERSION, WORKERS_ENV, main

DATA = Path(__file__).parent / "data"


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    text = Path(path).read_text()
    comments = [line for line in text.splitlines() if line.startswith("#")]
    body = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    return comments, rows


def run(tmp_path, command, cfg, out="out.csv", extra=()):
    out_path = tmp_path / out
    code = main([command, "--config", write_config(tmp_path, cfg), "--out", str(out_path), *extra])
    return code, out_path


FLAT = {"kind": "flat_interval", "g0_sq": 0.01, "omega_g": 0.0, "omega_max": 1.0}
RABI = {"hamiltonian": [[0, 1.3], [1.3, 0]], "times": {"start": 0, "stop": 5, "num": 51}}


def test_rabi_csv_matches_cos_squared(tmp_path):
    code, out = run(tmp_path, "survival", RABI)
    assert code == EXIT_OK
    comments, rows = read_csv(out)
    assert comments[0] == f"# schema_version={SCHEMA_VERSION}"
    for r in rows:
        assert float(r["p"]) == pytest.approx(math.cos(1.3 * float(r["t"])) ** 2, abs=1e-10)


def test_single_time_zero(tmp_path):
    code, out = run(tmp_path, "survival", {**RABI, "times": [0.0]})
    assert code == EXIT_OK
    _, rows = read_csv(out)
    assert len(rows) == 1 and float(rows[0]["p"]) == 1.0


def test_csv_dialect(tmp_path):
    _, out = run(tmp_path, "survival", RABI)
    raw = out.read_bytes()
    assert b"\r\n" not in raw
    header = [line for line in raw.decode().splitlines() if not line.startswith("#")][0]
    assert header == "t,re_A,im_A,p"


def test_golden_3x3_is_byte_identical(tmp_path):
    golden = (DATA / "golden_survival_3x3.csv").read_bytes()
    for k in range(2):
        out = tmp_path / f"run{k}.csv"
        assert main(["survival", "--config", str(DATA / "survival_3x3.json"), "--out", str(out)]) == EXIT_OK
        assert out.read_bytes() == golden


def test_golden_3x3_agrees_with_scipy():
    cfg = json.loads((DATA / "survival_3x3.json").read_text())
    h = np.array([[complex(*v) for v in row] for row in cfg["hamiltonian"]])
    _, rows = read_csv(DATA / "golden_survival_3x3.csv")
    for r in rows:
        a = expm(-1j * h * float(r["t"]))[0, 0]
        assert complex(float(r["re_A"]), float(r["im_A"])) == pytest.approx(a, abs=1e-12)


def test_pulsed_rows_and_zeno_trend(tmp_path):
    cfg = {"omega": 1.0, "times": [0.5, 1.0], "n_list": [1, 5, 50]}
    code, out = run(tmp_path, "pulsed", cfg)
    assert code == EXIT_OK
    _, rows = read_csv(out)
    assert len(rows) == 6
    p = {(int(r["N"]), float(r["t"])): float(r["p"]) for r in rows}
    assert p[(5, 1.0)] == pytest.approx(math.cos(0.2) ** 10, abs=1e-12)
    assert p[(1, 1.0)] < p[(5, 1.0)] < p[(50, 1.0)]


def test_continuous_sweep_orders_like_stronger_measurement(tmp_path):
    cfg = {
        "command": "continuous",
        "parameter": "v",
        "values": [0.4, 2, 10],
        "base": {"omega": 1.0, "times": [3.0]},
        "workers": 2,
    }
    code, out = run(tmp_path, "sweep", cfg)
    assert code == EXIT_OK
    comments, rows = read_csv(out)
    assert "# workers=2" in comments
    assert [int(r["sweep_index"]) for r in rows] == [0, 1, 2]
    p = [float(r["p"]) for r in rows]
    assert p[0] < p[1] < p[2]


def test_sweep_output_is_ordered_regardless_of_workers(tmp_path):
    cfg = {"command": "survival", "parameter": "hamiltonian", "values": [], "base": RABI}
    cfg["parameter"] = "times"
    cfg["values"] = [[0.1 * k] for k in range(1, 7)]
    outs = []
    for w in (1, 4):
        code, out = run(tmp_path, "sweep", {**cfg, "workers": w}, out=f"w{w}.csv")
        assert code == EXIT_OK
        outs.append([r for r in out.read_text().splitlines() if not r.startswith("#")])
    assert outs[0] == outs[1]


def test_pole_json(tmp_path):
    cfg = {"form_factor": {"kind": "flat_interval", "g0_sq": 0.01, "omega_g": 0.0, "omega_max": 1.0}, "omega0": 0.5}
    code, out = run(tmp_path, "pole", cfg, out="pole.json")
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["golden_rule"] == pytest.approx(2 * math.pi * 0.01)
    assert doc["pole"]["gamma"] == pytest.approx(0.0654459636, rel=1e-6)


def test_json_round_trip(tmp_path):
    code, out = run(tmp_path, "survival", RABI, out="s.json")
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["columns"] == ["t", "re_A", "im_A", "p"]
    code, again = run(tmp_path, "survival", doc["params"], out="again.json")
    assert code == EXIT_OK
    assert json.loads(again.read_text())["rows"] == doc["rows"]


def test_regimes_writes_fit(tmp_path):
    cfg = {"form_factor": FLAT, "omega0": 0.5}
    code, out = run(tmp_path, "regimes", cfg, out="reg.csv")
    assert code == EXIT_OK
    fit = json.loads((tmp_path / "reg.fit.json").read_text())
    assert fit["schema_version"] == SCHEMA_VERSION
    assert fit["exp_rate"] == pytest.approx(0.0654459636, rel=0.02)
    assert fit["power_exponent"] == pytest.approx(-2, abs=0.15)


@pytest.mark.parametrize(
    "command, cfg",
    [
        ("sweep", {"command": "survival", "parameter": "times", "values": [], "base": RABI}),
        ("survival", {"hamiltonian": [[0, 1], [1]], "times": [0.0]}),
        ("survival", {"hamiltonian": [[0, "x"], [1, 0]], "times": [0.0]}),
        ("survival", {"hamiltonian": [[0, float("inf")], [1, 0]], "times": [0.0]}),
        ("survival", {**RABI, "colour": "blue"}),
        ("survival", {**RABI, "times": [1.0, 0.5]}),
        ("continuous", {"omega": 1.0, "v": -1.0, "times": [0.0]}),
    ],
)
def test_config_errors_exit_2(tmp_path, command, cfg, capsys):
    code, _ = run(tmp_path, command, cfg)
    assert code == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_malformed_matrix_message_names_field(tmp_path, capsys):
    run(tmp_path, "survival", {"hamiltonian": [[0, 1], [1]], "times": [0.0]})
    assert "hamiltonian" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path):
    assert main(["survival", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG


def test_numeric_errors_exit_3(tmp_path, capsys):
    cfg = {"form_factor": FLAT, "omega0": 1.5}
    code, _ = run(tmp_path, "invert", cfg)
    assert code == EXIT_NUMERIC
    assert "RegimeError" in capsys.readouterr().err


def test_environment_overrides_workers(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(WORKERS_ENV, "3")
    cfg = {"command": "survival", "parameter": "times", "values": [[0.1], [0.2]], "base": RABI, "workers": 1}
    code, out = run(tmp_path, "sweep", cfg)
    assert code == EXIT_OK
    assert WORKERS_ENV in capsys.readouterr().err
    assert "# workers=3" in out.read_text().splitlines()


def test_output_path_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = {**RABI, "output": {"path": "from_cfg.json"}}
    assert main(["survival", "--config", write_config(tmp_path, cfg)]) == EXIT_OK
    assert json.loads((tmp_path / "from_cfg.json").read_text())["command"] == "survival"


def test_acceptance_passes_a_fast_criterion(capsys):
    assert main(["acceptance", "--only", "6"]) == EXIT_OK
    assert "PASS" in capsys.readouterr().out


def test_acceptance_tampered_tolerance_fails(tmp_path):
    out = tmp_path / "report.json"
    assert main(["acceptance", "--only", "6", "--tolerance-scale", "6=1e-6", "--out", str(out)]) == EXIT_ACCEPTANCE
    report = json.loads(out.read_text())
    assert report["results"][0]["passed"] is False


def test_acceptance_unknown_criterion_exits_2():
    assert main(["acceptance", "--only", "42"]) == EXIT_CONFIG


def test_bad_arguments_exit_2():
    assert main(["survival"]) == EXIT_CONFIG
