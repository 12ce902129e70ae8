import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from qrkit.bayes import generate_design, generate_response
from qrkit.cli import main
from qrkit.io import CsvFormatError, load_dataset, read_matrix, write_matrix


class TestMatrixIO:
    def test_roundtrip_full_precision(self, tmp_path):
        rng = np.random.default_rng(0)
        A = rng.standard_normal((7, 4)) * 10.0 ** rng.integers(-200, 200, size=(7, 4))
        path = tmp_path / "m.csv"
        write_matrix(path, A)
        B = read_matrix(path)
        assert np.array_equal(A, B)

    def test_malformed_reports_position(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2,3\n4,x,6\n")
        with pytest.raises(CsvFormatError) as e:
            read_matrix(path)
        assert e.value.line == 2
        assert e.value.column == 2
        assert "x" in str(e.value)

    def test_ragged_reports_line(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1,2\n3,4,5\n")
        with pytest.raises(CsvFormatError) as e:
            read_matrix(path)
        assert e.value.line == 2


class TestDataset:
    def test_y_first_column(self, tmp_path):
        M = np.hstack([np.arange(5.0)[:, None], np.ones((5, 1)), np.full((5, 1), 2.0)])
        path = tmp_path / "d.csv"
        write_matrix(path, M)
        ds = load_dataset(path)
        assert np.array_equal(ds.y, np.arange(5.0))
        assert not ds.added_intercept  # first covariate already constant one
        assert ds.X.shape == (5, 2)

    def test_intercept_added(self, tmp_path):
        M = np.hstack([np.arange(5.0)[:, None], np.full((5, 1), 2.0)])
        path = tmp_path / "d.csv"
        write_matrix(path, M)
        ds = load_dataset(path)
        assert ds.added_intercept
        assert np.all(ds.X[:, 0] == 1.0)

    def test_separate_y_file(self, tmp_path):
        X = np.random.default_rng(1).standard_normal((6, 3))
        y = np.arange(6.0)
        write_matrix(tmp_path / "X.csv", X)
        write_matrix(tmp_path / "y.csv", y[:, None])
        ds = load_dataset(tmp_path / "X.csv", y_path=tmp_path / "y.csv")
        assert np.array_equal(ds.y, y)
        assert ds.X.shape == (6, 4)


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestCli:
    def test_verify_passes(self, tmp_path, capsys):
        from qrkit.verify import CHECKS

        out = tmp_path / "report.csv"
        rc = main(["verify", "--sizes", "1", "--out", str(out)])
        assert rc == 0
        rows = _read_csv(out)
        assert len(rows) == len(CHECKS)  # one row per documented check
        assert all(r["status"] == "pass" for r in rows)

    def test_verify_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["verify", "--seed", "5", "--out", str(a)]) == 0
        assert main(["verify", "--seed", "5", "--out", str(b)]) == 0
        assert a.read_text() == b.read_text()

    def test_verify_fault_injection_fails(self, tmp_path):
        rc = main(["verify", "--sizes", "1", "--inject-fault", "--out", str(tmp_path / "r.csv")])
        assert rc == 1

    def test_costs_csv(self, tmp_path):
        out = tmp_path / "costs.csv"
        rc = main(["costs", "--no-measure", "--out", str(out)])
        assert rc == 0
        rows = _read_csv(out)
        assert len(rows) == 288
        hit = [
            r
            for r in rows
            if r["operation"] == "r_add_row" and r["N"] == "1000" and r["p"] == "100"
        ]
        assert hit and int(hit[0]["predicted"]) == 30600

    def test_simulate_deterministic(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": [60], "p": [12], "p0": [3], "reps": 2, "draws": 800}))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--config", str(cfg), "--seed", "3", "--out", str(a)]) == 0
        assert main(["simulate", "--config", str(cfg), "--seed", "3", "--out", str(b)]) == 0
        ra, rb = _read_csv(a), _read_csv(b)
        assert len(ra) == len(rb) == 1
        stat_cols = [c for c in ra[0] if not c.startswith("seconds")]
        # bit-identical statistics; wall time is reported but can't repeat
        assert [{c: r[c] for c in stat_cols} for r in ra] == [
            {c: r[c] for c in stat_cols} for r in rb
        ]
        assert float(ra[0]["seconds_mean"]) > 0.0

    def test_simulate_threads_match_serial(self, tmp_path):
        # scheduling must not change results: jobs are keyed by rep id
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": [50], "p": [10], "p0": [2], "reps": 4, "draws": 400}))
        a, b = tmp_path / "serial.csv", tmp_path / "pool.csv"
        assert main(["simulate", "--config", str(cfg), "--seed", "1", "--out", str(a)]) == 0
        assert main(
            ["simulate", "--config", str(cfg), "--seed", "1", "--threads", "2", "--out", str(b)]
        ) == 0
        ra, rb = _read_csv(a), _read_csv(b)
        stat_cols = [c for c in ra[0] if not c.startswith("seconds")]
        assert [{c: r[c] for c in stat_cols} for r in ra] == [
            {c: r[c] for c in stat_cols} for r in rb
        ]

    def test_select_end_to_end(self, tmp_path):
        X = generate_design(80, 8, seed=5)
        y, beta = generate_response(X, 3, 1.0, seed=6)
        data = np.hstack([y[:, None], X[:, 1:]])  # intercept added by loader
        write_matrix(tmp_path / "data.csv", data)
        out = tmp_path / "mip.csv"
        pmp = tmp_path / "pmp.csv"
        rc = main(
            [
                "select",
                str(tmp_path / "data.csv"),
                "--draws",
                "4000",
                "--seed",
                "2",
                "--enumerate",
                "--out",
                str(out),
                "--pmp-out",
                str(pmp),
            ]
        )
        assert rc == 0
        rows = _read_csv(out)
        assert len(rows) == 8
        mip = np.array([float(r["mip"]) for r in rows])
        truth = beta != 0
        assert np.all(mip[truth] > 0.5)
        assert np.all(mip[~truth] < 0.5)
        prows = _read_csv(pmp)
        assert "pmp_exact" in prows[0]
        assert abs(float(prows[0]["pmp_est"]) - float(prows[0]["pmp_exact"])) < 0.05

    def test_select_malformed_csv(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2\n3,oops\n")
        rc = main(["select", str(bad)])
        assert rc == 2
        err = capsys.readouterr().err
        assert "2:2" in err

    def test_cv_grid_flag(self, tmp_path):
        X = generate_design(40, 5, seed=7)
        y, _ = generate_response(X, 2, 1.0, seed=8)
        write_matrix(tmp_path / "d.csv", np.hstack([y[:, None], X[:, 1:]]))
        rc = main(
            [
                "select",
                str(tmp_path / "d.csv"),
                "--draws",
                "500",
                "--upsilon-grid",
                "0.5,5",
                "--out",
                str(tmp_path / "o.csv"),
                "--pmp-out",
                str(tmp_path / "p.csv"),
            ]
        )
        assert rc == 0

    def test_console_script_installed(self):
        proc = subprocess.run(
            [sys.executable, "-m", "qrkit.cli", "--version"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "qrkit" in proc.stdout


def test_threads_env_fallback(monkeypatch):
    from qrkit.cli import _threads

    monkeypatch.setenv("QRKIT_THREADS", "3")
    assert _threads(None) == 3
    assert _threads(2) == 2
    monkeypatch.delenv("QRKIT_THREADS")
    assert _threads(None) == 1
