import csv
import json

import numpy as np
import pytest

from fracbspde.cli import main, run_verification
from fracbspde.grid import Grid1D, GridFunction, write_field_csv


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def test_kernel_subcommand_mass(tmp_path):
    out = tmp_path / "k.csv"
    rep = tmp_path / "k.json"
    code = main(
        [
            "kernel",
            "--alpha",
            "1.5",
            "--A",
            "1.0",
            "--output",
            str(out),
            "--report",
            str(rep),
        ]
    )
    assert code == 0
    header, data = read_csv(out)
    assert header == ["x", "G", "DG", "D2G"]
    tail = json.load(open(rep))["tail_mass_beyond_box"]
    mass = np.trapezoid(data[:, 1], data[:, 0]) + tail
    assert abs(mass - 1.0) < 1e-6


def test_unknown_flag_exits_2(capsys):
    assert main(["kernel", "--frobnicate"]) == 2


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"alpha": 1.5, "bogus_key": 1}')
    code = main(["kernel", "--config", str(cfg), "--output", str(tmp_path / "k.csv")])
    assert code == 2


def test_fraclap_round_trip(tmp_path):
    grid = Grid1D(-32.0, 32.0, 256)
    xi3 = 2 * np.pi * 3 / grid.length
    f = GridFunction.from_callable(grid, lambda x: np.sin(xi3 * x))
    src = tmp_path / "f.csv"
    write_field_csv(f, str(src))
    for method, tol in (("spectral", 1e-10), ("integral", 1e-3)):
        out = tmp_path / f"out_{method}.csv"
        code = main(
            [
                "fraclap",
                "--alpha",
                "1.5",
                "--method",
                method,
                "--input",
                str(src),
                "--output",
                str(out),
            ]
        )
        assert code == 0
        _, data = read_csv(out)
        assert np.max(np.abs(data[:, 1] - xi3**1.5 * f.values)) < max(tol, 1e-3)


def test_levy_outputs(tmp_path):
    out = tmp_path / "paths.csv"
    summ = tmp_path / "summary.json"
    code = main(
        [
            "levy",
            "--alpha",
            "1.5",
            "--paths",
            "3",
            "--steps",
            "16",
            "--seed",
            "11",
            "--output",
            str(out),
            "--summary",
            str(summ),
        ]
    )
    assert code == 0
    header, data = read_csv(out)
    assert header == ["t", "path0", "path1", "path2"]
    assert data.shape == (17, 4)
    assert np.all(data[0, 1:] == 0.0)
    s = json.load(open(summ))
    assert set(s["empirical_char_function"]) == {"0.5", "1.0", "2.0"}


def test_solve_pde_subcommand(tmp_path):
    cfg = tmp_path / "pde.json"
    cfg.write_text(
        json.dumps(
            {
                "grid": {"x_min": -32.0, "x_max": 32.0, "n": 128},
                "alpha": 1.5,
                "T": 1.0,
                "g": "sin:1",
                "steps": 32,
            }
        )
    )
    out = tmp_path / "sol.csv"
    code = main(["solve-pde", "--config", str(cfg), "--output", str(out)])
    assert code == 0
    _, data = read_csv(out)
    # terminal snapshot reproduces g, and t=0 shows single-mode decay
    xi1 = 2 * np.pi / 64.0
    last = data[data[:, 0] == 1.0]
    assert np.max(np.abs(last[:, 2] - np.sin(xi1 * last[:, 1]))) < 1e-9
    first = data[data[:, 0] == 0.0]
    assert np.max(
        np.abs(first[:, 2] - np.exp(-(xi1**1.5)) * np.sin(xi1 * first[:, 1]))
    ) < 1e-9


def test_solve_bspde_subcommand(tmp_path):
    cfg = tmp_path / "bspde.json"
    cfg.write_text(
        json.dumps(
            {
                "grid": {"x_min": -32.0, "x_max": 32.0, "n": 128},
                "alpha": 1.5,
                "g_profile": "sin:1",
                "g_c0": 0.5,
                "g_c1": 1.0,
                "paths": 400,
                "steps": 32,
            }
        )
    )
    rep = tmp_path / "probe.json"
    code = main(
        [
            "solve-bspde",
            "--config",
            str(cfg),
            "--seed",
            "3",
            "--probe",
            "0.0,16.0",
            "--output",
            str(tmp_path / "b.csv"),
            "--report",
            str(rep),
        ]
    )
    assert code == 0
    probes = json.load(open(rep))["probes"]
    assert abs(probes[0]["difference_mean"]) < 0.05


def test_zakai_subcommand(tmp_path):
    out = tmp_path / "movie.csv"
    code = main(["zakai", "--steps", "16", "--seed", "5", "--output", str(out)])
    assert code == 0
    header, data = read_csv(out)
    assert header == ["t", "x", "p"]
    t0 = data[data[:, 0] == 0.0]
    assert abs(np.trapezoid(t0[:, 2], t0[:, 1]) - 1.0) < 1e-3


def test_control_subcommand(tmp_path):
    cfg = tmp_path / "ctrl.json"
    cfg.write_text(
        json.dumps(
            {
                "grid": {"x_min": -32.0, "x_max": 32.0, "n": 64},
                "controls": [0.0, 0.5],
                "intervals": 1,
                "paths": 200,
                "steps": 16,
            }
        )
    )
    out = tmp_path / "control.json"
    code = main(["control", "--config", str(cfg), "--seed", "2", "--output", str(out)])
    payload = json.load(open(out))
    assert payload["maximum_principle_passed"] == (code == 0)
    assert len(payload["policy_table"]) == 2


def test_verify_all_subset_and_determinism(tmp_path):
    args = [
        "verify-all",
        "--checks",
        "gaussian-reduction,chapman-kolmogorov",
        "--seed",
        "7",
    ]
    r1, t1 = tmp_path / "r1.json", tmp_path / "t1.json"
    r2, t2 = tmp_path / "r2.json", tmp_path / "t2.json"
    assert main(args + ["--report", str(r1), "--timing", str(t1)]) == 0
    assert main(args + ["--report", str(r2), "--timing", str(t2)]) == 0
    assert r1.read_bytes() == r2.read_bytes()  # canonical report is byte-identical
    payload = json.loads(r1.read_text())
    assert payload["tier"] == "custom"
    assert all(c["status"] == "pass" for c in payload["checks"])


def test_verify_all_unknown_check_exits_2(tmp_path):
    code = main(
        [
            "verify-all",
            "--checks",
            "not-a-check",
            "--report",
            str(tmp_path / "r.json"),
            "--timing",
            str(tmp_path / "t.json"),
        ]
    )
    assert code == 2


def test_run_verification_payload_schema():
    payload, timings = run_verification(ids=["gaussian-reduction"], seed=1)
    assert payload["checks"][0]["id"] == "gaussian-reduction"
    assert "gaussian-reduction" in timings
    # timings are excluded from the canonical payload by design
    assert "seconds" not in payload
    with pytest.raises(Exception):
        run_verification(tier="bogus")
