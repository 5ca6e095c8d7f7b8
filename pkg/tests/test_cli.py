import json
import math

import numpy as np
import pytest

from gapkit.cli import load_config, main


def run_json(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(argv + ["-o", str(out)])
    return code, json.loads(out.read_text())


def test_gen_writes_201_lines(tmp_path):
    out = tmp_path / "seq.txt"
    code = main(["gen", "--spec", "lattice:1", "--window=-100,100", "-o", str(out)])
    assert code == 0
    lines = [l for l in out.read_text().splitlines() if l.strip()]
    assert len(lines) == 201


def test_density_cli(tmp_path):
    code, payload = run_json(
        ["density", "--method", "d1", "--seq", "lattice:1", "--window=-500,500"],
        tmp_path)
    assert code == 0
    assert payload["result"]["value"] == pytest.approx(1.0, abs=0.05)
    assert payload["result"]["method"] == "d1"
    assert payload["command"] == "density"


def test_fekete_cli(tmp_path):
    code, payload = run_json(["fekete", "-k", "5", "--interval=-1,1"], tmp_path)
    assert code == 0
    res = payload["result"]
    assert res["max_deviation"] <= 1e-6
    assert res["residual"] <= 1e-8


def test_gap_certificate_cli(tmp_path):
    code, payload = run_json(
        ["gap", "--seq", "lattice:1", "--window=-1500,1500"], tmp_path)
    assert code == 0
    cert = payload["result"]["certificate"]
    assert 5.65 <= cert["g_estimate"] <= 6.29
    assert cert["g_estimate"] == pytest.approx(2 * math.pi * cert["c_estimate"])


def test_gap_sweep_csv(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    code, payload = run_json(
        ["gap", "--seq", "lattice:1", "--window=0,63", "--sweep", "1.0:7.0:12",
         "--csv", str(csv_path)], tmp_path)
    assert code == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "a,sigma_min"
    assert len(lines) == 13
    sigmas = [float(l.split(",")[1]) for l in lines[1:]]
    assert all(b >= a - 1e-10 for a, b in zip(sigmas, sigmas[1:]))


def test_gap_synthesize_cli(tmp_path):
    code, payload = run_json(
        ["gap", "--seq", "lattice:1", "--window=0,31", "--synthesize", "3.14159"],
        tmp_path)
    assert code == 0
    syn = payload["result"]["synthesis"]
    assert syn["l2_gap_norm"] <= 1e-3


def test_spread_cli(tmp_path):
    seq_file = tmp_path / "pts.txt"
    seq_file.write_text("0.0\n0.1\n10.0\n")
    code, payload = run_json(
        ["spread", "--seq", str(seq_file), "--J", "0,10", "--C", "2"], tmp_path)
    assert code == 0
    assert payload["result"]["points"] == [0.0, 5.0, 10.0]
    assert payload["result"]["energy_after"] >= payload["result"]["energy_floor"]


def test_spread_infeasible_exit_3(tmp_path):
    seq_file = tmp_path / "pts.txt"
    seq_file.write_text("\n".join(str(x) for x in np.linspace(0, 10, 9)) + "\n")
    code, payload = run_json(
        ["spread", "--seq", str(seq_file), "--J", "0,10", "--C", "3"], tmp_path)
    assert code == 3
    assert not payload["result"]["ok"]


def test_regularize_cli(tmp_path):
    prefix = tmp_path / "reg"
    code, payload = run_json(
        ["regularize", "--seq", "lacunary:2", "--window=1,1024", "--C", "4",
         "--out-prefix", str(prefix)], tmp_path)
    assert code == 0
    assert payload["result"]["max_gap"] <= 8.0
    gamma = (tmp_path / "reg.gamma.txt").read_text().strip().splitlines()
    added = (tmp_path / "reg.added.txt").read_text().strip().splitlines()
    assert len(gamma) == 11 + len(added)


def test_partition_cli_greedy_and_file(tmp_path):
    code, payload = run_json(
        ["partition", "--seq", "lattice:1", "--window=-200,200",
         "--partition", "greedy:d=1.0"], tmp_path)
    assert code == 0
    assert payload["result"]["shortness"]["verdict"] == "short"
    part_file = tmp_path / "part.json"
    part_file.write_text(json.dumps({"breakpoints": [-8, -4, -2, -1, 0, 1, 2, 4, 8]}))
    code2, payload2 = run_json(
        ["partition", "--seq", "lattice:1", "--window=-8,8",
         "--partition", str(part_file)], tmp_path, "p2.json")
    assert payload2["result"]["breakpoints"][0] == -8


def test_partition_cli_infeasible(tmp_path):
    code, payload = run_json(
        ["partition", "--seq", "lattice:2", "--window=-100,100",
         "--partition", "greedy:d=1.0"], tmp_path)
    assert code == 3
    assert payload["result"]["ok"] is False


def test_energy_cli_with_partition_csv(tmp_path):
    csv_path = tmp_path / "energy.csv"
    code, payload = run_json(
        ["energy", "--seq", "lattice:1", "--window=-150,150",
         "--partition", "greedy:d=1.0", "--csv", str(csv_path)], tmp_path)
    assert code == 0
    assert payload["result"]["total_energy"] > 0
    assert payload["result"]["energy_condition"]["verdict"] == "supported"
    assert csv_path.read_text().startswith("n,a,b,count")


def test_clark_cli(tmp_path):
    csv_path = tmp_path / "clark.csv"
    code, payload = run_json(
        ["clark", "--seq", "lattice:1", "--window=-400,400", "--width", "5",
         "--tail-mode", "persistent", "--csv", str(csv_path)], tmp_path)
    assert code == 0
    recs = payload["result"]["records"]
    assert all(abs(r["beta_n"] - 1 / math.pi) < 1e-3 for r in recs)
    header = csv_path.read_text().splitlines()[0]
    assert header == "n,a_n,delta_n,beta_n,tail_bound"


def test_report_cli(tmp_path):
    code, payload = run_json(
        ["report", "--seq", "lattice:1", "--window=-1000,1000"], tmp_path)
    assert code == 0
    res = payload["result"]
    assert res["density_d1"]["value"] == pytest.approx(1.0, abs=0.05)
    assert res["gap_certificate"]["c_estimate"] == pytest.approx(1.0, abs=0.1)


def test_determinism_except_timestamp(tmp_path):
    _, p1 = run_json(["density", "--method", "bm", "--seq", "lattice:1",
                      "--window=-300,300"], tmp_path, "a.json")
    _, p2 = run_json(["density", "--method", "bm", "--seq", "lattice:1",
                      "--window=-300,300"], tmp_path, "b.json")
    p1.pop("timestamp"), p2.pop("timestamp")
    assert p1 == p2


def test_invocation_embedded(tmp_path):
    _, payload = run_json(["density", "--method", "d3", "--seq", "lattice:1",
                           "--window=-200,200"], tmp_path)
    assert payload["invocation"][0] == "density"
    assert "--method" in payload["invocation"]


def test_parameter_error_exit_2(tmp_path):
    assert main(["gen", "--spec", "lattice:0", "--window=0,10"]) == 2
    assert main(["density", "--method", "d1", "--seq", "lattice:1"]) == 2  # no window
    assert main(["nonsense"]) == 2
    assert main([]) == 2


def test_config_file_and_env(tmp_path, monkeypatch):
    cfg = tmp_path / "gapkit.conf"
    cfg.write_text("resolution = 0.01\n# comment\nsweep_points=11\n")
    loaded = load_config(str(cfg))
    assert loaded["resolution"] == 0.01
    assert loaded["sweep_points"] == 11
    monkeypatch.setenv("GAPKIT_CONFIG", str(cfg))
    assert load_config()["resolution"] == 0.01
    _, payload = run_json(["density", "--method", "d1", "--seq", "lattice:1",
                           "--window=-200,200"], tmp_path)
    assert payload["config"]["resolution"] == 0.01
