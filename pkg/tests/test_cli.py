"""Command surface: schemas, sidecars, determinism, exit codes."""

import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

import ris_secrecy.special_functions as sf
from ris_secrecy.cli import main
from ris_secrecy.presets import config_to_dict, fig3_config, save_config


def read_csv(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [dict(zip(header, r)) for r in reader]
    return header, rows


@pytest.fixture
def fig3_file(tmp_path):
    path = tmp_path / "fig3.json"
    save_config(fig3_config(), path)
    return str(path)


class TestAnalyze:
    def test_rho_sweep_row_count(self, tmp_path, fig3_file):
        out = tmp_path / "an.csv"
        rc = main(["analyze", "--config", fig3_file,
                   "--sweep", "rho_d_db=0:60:5", "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        assert len(rows) == 13
        assert header[:4] == ["rho_d_db", "sop_quadrature", "sop_closed",
                              "sop_asymptotic"]
        # closed and quadrature agree, both monotone nonincreasing
        closed = [float(r["sop_closed"]) for r in rows]
        quadr = [float(r["sop_quadrature"]) for r in rows]
        assert max(abs(a - b) for a, b in zip(closed, quadr)) < 1e-6
        assert all(b <= a + 1e-12 for a, b in zip(closed, closed[1:]))

    def test_sidecar_provenance(self, tmp_path, fig3_file):
        out = tmp_path / "an.csv"
        main(["analyze", "--config", fig3_file, "--out", str(out)])
        sidecar = json.loads(Path(str(out) + ".json").read_text())
        assert sidecar["config"]["beta0"] == 1e-3
        assert sidecar["config_hash"] == fig3_config().config_hash()
        assert "psi_re_a" in sidecar["config"]

    def test_density_sweep_monotone(self, tmp_path, fig3_file):
        out = tmp_path / "lam.csv"
        rc = main(["analyze", "--config", fig3_file, "--methods", "closed",
                   "--sweep", "eve_density=0.0002:0.002:0.0002",
                   "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        vals = [float(r["sop_closed"]) for r in rows]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_seventeen_digit_serialization(self, tmp_path, fig3_file):
        out = tmp_path / "an.csv"
        main(["analyze", "--config", fig3_file, "--out", str(out)])
        _, rows = read_csv(out)
        v = rows[0]["sop_closed"]
        assert len(v.replace(".", "").replace("-", "").lstrip("0")) >= 15

    def test_json_format(self, tmp_path, fig3_file):
        out = tmp_path / "an.json"
        main(["analyze", "--config", fig3_file, "--out", str(out),
              "--format", "json"])
        rows = json.loads(out.read_text())
        assert isinstance(rows, list) and "sop_closed" in rows[0]

    def test_invalid_square_rejected(self, tmp_path, fig3_file):
        bad = json.loads(Path(fig3_file).read_text())
        bad["n_ris"] = 15
        bad_path = tmp_path / "bad.json"
        bad_path.write_text(json.dumps(bad))
        rc = main(["analyze", "--config", str(bad_path),
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 1

    def test_unknown_sweep_field(self, tmp_path, fig3_file):
        rc = main(["analyze", "--config", fig3_file,
                   "--sweep", "bogus=0:1:1", "--out", str(tmp_path / "x.csv")])
        assert rc == 1

    def test_cth_bits_conversion(self, tmp_path, fig3_file):
        out_nats = tmp_path / "nats.csv"
        out_bits = tmp_path / "bits.csv"
        main(["analyze", "--config", fig3_file, "--methods", "closed",
              "--out", str(out_nats)])
        main(["analyze", "--config", fig3_file, "--methods", "closed",
              "--cth-bits", str(0.05 / math.log(2.0)), "--out", str(out_bits)])
        _, rows_n = read_csv(out_nats)
        _, rows_b = read_csv(out_bits)
        assert float(rows_n[0]["sop_closed"]) == pytest.approx(
            float(rows_b[0]["sop_closed"]), rel=1e-12)

    def test_numerical_failure_exit_code(self, fig3_file, tmp_path, monkeypatch):
        from ris_secrecy.sop import SopEngineError
        import ris_secrecy.cli as cli_mod

        def boom(*a, **k):
            raise SopEngineError("forced")
        monkeypatch.setattr(cli_mod, "sop_quadrature", boom)
        rc = main(["analyze", "--config", fig3_file,
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2


class TestSimulate:
    def test_bit_identical_reruns(self, tmp_path, fig3_file):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["simulate", "--config", fig3_file, "--trials", "1000",
                "--seed", "4", "--channel-mode", "reduced"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_text() == b.read_text()

    def test_no_eve_zero_threshold_all_zero(self, tmp_path):
        cfg = fig3_config().replace(eve_density=0.0, c_th=0.0)
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        out = tmp_path / "sim.csv"
        main(["simulate", "--config", str(path), "--trials", "2000",
              "--sweep", "rho_d_db=10:30:10", "--out", str(out)])
        _, rows = read_csv(out)
        assert all(float(r["sop_mc"]) == 0.0 for r in rows)

    def test_schema(self, tmp_path, fig3_file):
        out = tmp_path / "sim.csv"
        main(["simulate", "--config", fig3_file, "--trials", "500",
              "--channel-mode", "reduced", "--out", str(out)])
        header, rows = read_csv(out)
        assert header == ["rho_d_db", "sop_mc", "ci95_lo", "ci95_hi",
                          "trials", "seed"]
        assert rows[0]["trials"] == "500"

    def test_cross_command_against_analyze(self, tmp_path, fig3_file):
        sweep = "rho_d_db=20:40:10"
        sim_out = tmp_path / "sim.csv"
        an_out = tmp_path / "an.csv"
        main(["simulate", "--config", fig3_file, "--trials", "20000",
              "--seed", "2", "--channel-mode", "reduced",
              "--sweep", sweep, "--out", str(sim_out)])
        main(["analyze", "--config", fig3_file, "--sweep", sweep,
              "--out", str(an_out)])
        _, sim_rows = read_csv(sim_out)
        _, an_rows = read_csv(an_out)
        for s, a in zip(sim_rows, an_rows):
            assert s["rho_d_db"] == a["rho_d_db"]
            mc = float(s["sop_mc"])
            ci = float(s["ci95_hi"]) - float(s["sop_mc"])
            ref = float(a["sop_quadrature_exact"])
            assert abs(mc - ref) <= max(3 * ci, 0.01)


class TestReproduce:
    def test_fig3_outputs_and_cross_check(self, tmp_path):
        rc = main(["reproduce", "fig3", "--out", str(tmp_path),
                   "--trials", "2000", "--seed", "1"])
        assert rc == 0
        files = sorted(tmp_path.glob("fig3_N*_K*.csv"))
        assert len(files) == 4
        for f in files:
            header, rows = read_csv(f)
            assert len(rows) == 13
            sidecar = json.loads(Path(str(f) + ".json").read_text())
            assert sidecar["config"]["beta0"] == 1e-3
            for r in rows:
                mc = float(r["sop_mc"])
                qe = float(r["sop_quadrature_exact"])
                ci = float(r["ci95_halfwidth"])
                assert abs(mc - qe) <= max(3 * ci, 0.01)

    def test_fig3_n_ordering_of_closed_curves(self, tmp_path):
        main(["reproduce", "fig3", "--out", str(tmp_path),
              "--trials", "500", "--seed", "1"])
        _, rows16 = read_csv(tmp_path / "fig3_N16_K16.csv")
        _, rows64 = read_csv(tmp_path / "fig3_N64_K16.csv")
        for r16, r64 in zip(rows16, rows64):
            assert float(r64["sop_closed_ratio"]) <= \
                float(r16["sop_closed_ratio"]) + 1e-12

    def test_fig7_diversity_summary(self, tmp_path):
        rc = main(["reproduce", "fig7", "--out", str(tmp_path),
                   "--trials", "500", "--seed", "1"])
        assert rc == 0
        summary = json.loads((tmp_path / "fig7_diversity_summary.json").read_text())
        for alpha2 in (2.0, 3.0, 4.0):
            entry = summary[f"alpha2={alpha2:g}"]
            assert entry["fitted_slope_top_decade"] == pytest.approx(
                2.0 / alpha2, rel=0.05)
            assert 0.95 <= entry["closed_over_asymptotic_at_100dB"] <= 1.05


class TestSelftest:
    def test_passes_clean(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out

    def test_perturbed_coefficient_fails(self, monkeypatch, capsys):
        # negative control: nudge one printed Marcum-fit coefficient
        bad = (-0.840 + 0.25, 0.327, -0.740, 0.083, -0.004)
        monkeypatch.setattr(sf, "MARCUM_POLY_V", bad)
        assert main(["selftest"]) == 3
        assert "FAIL" in capsys.readouterr().out

    def test_missing_config_is_validation_error(self, tmp_path):
        rc = main(["analyze", "--config", str(tmp_path / "nope.json"),
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 1
