"""Command-line front end: output shapes, determinism, out-dir containment."""

import numpy as np
import pytest

from smilekernel.cli import main


class TestClassifyCommand:
    @pytest.mark.parametrize(
        "flags,expect",
        [
            (["--a", "1", "--b", "0", "--c", "-1"], "Hyperbolic, Delta=4, roots [-1, 1]"),
            (["--a", "1", "--b", "-2", "--c", "1"], "Euclidean, Delta=0"),
            (["--a", "1", "--b", "0", "--c", "1"], "Spherical, Delta=-4"),
        ],
    )
    def test_examples(self, capsys, flags, expect):
        assert main(["classify", *flags]) == 0
        assert expect in capsys.readouterr().out

    def test_invalid_params_nonzero_exit(self, capsys):
        assert main(["classify", "--a", "0", "--b", "0", "--c", "0"]) == 2
        assert "error" in capsys.readouterr().err


class TestSpectrumCommand:
    def test_writes_profile_and_spectrum(self, tmp_path, capsys):
        code = main([
            "spectrum", "--a", "1", "--b", "0", "--c", "-1",
            "--grid-nodes", "801", "--k-nodes", "32",
            "--out-dir", str(tmp_path / "out"),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "fit: lam=0" in out
        assert (tmp_path / "out" / "profile.csv").exists()
        assert (tmp_path / "out" / "spectrum.csv").exists()
        # nothing written outside out-dir
        assert sorted(p.name for p in tmp_path.iterdir()) == ["out"]

    def test_spherical_message(self, tmp_path, capsys):
        main([
            "spectrum", "--a", "1", "--b", "0", "--c", "1",
            "--out-dir", str(tmp_path),
        ])
        assert "closed-form spectrum unavailable; numerical path only" in capsys.readouterr().out


class TestPriceCommand:
    BASE = [
        "price", "--a", "1", "--b", "0", "--c", "-1",
        "--kind", "call", "--strike", "0", "--maturity", "0.5",
        "--grid-nodes", "1001", "--k-nodes", "128",
        "--spots=-0.2,0.2", "--mc-paths", "20000",
    ]

    def test_header_and_determinism(self, tmp_path, capsys):
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        assert main([*self.BASE, "--seed", "7", "--out-dir", str(out1)]) == 0
        assert main([*self.BASE, "--seed", "7", "--out-dir", str(out2)]) == 0
        csv1 = (out1 / "prices.csv").read_bytes()
        csv2 = (out2 / "prices.csv").read_bytes()
        assert csv1 == csv2
        header = csv1.decode().splitlines()[0]
        assert header == "spot,price_spectral,price_cn,price_mc,mc_se"

    def test_seed_changes_mc_column(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        args = [
            "price", "--a", "1", "--b", "0", "--c", "-1",
            "--kind", "call", "--strike", "0", "--maturity", "0.5",
            "--methods", "monte_carlo", "--spots", "0.2", "--mc-paths", "20000",
        ]
        main([*args, "--seed", "1", "--out-dir", str(out1)])
        main([*args, "--seed", "2", "--out-dir", str(out2)])
        assert (out1 / "prices.csv").read_text() != (out2 / "prices.csv").read_text()

    def test_custom_table(self, tmp_path):
        table = tmp_path / "payoff.csv"
        table.write_text("S,payoff\n-1.0,1.0\n1.0,1.0\n")
        code = main([
            "price", "--a", "1", "--b", "0", "--c", "-1",
            "--kind", "custom", "--payoff-table", str(table), "--maturity", "1.0",
            "--methods", "spectral", "--spots", "0.0",
            "--grid-nodes", "1001", "--k-nodes", "128",
            "--out-dir", str(tmp_path / "out"),
        ])
        assert code == 0
        body = (tmp_path / "out" / "prices.csv").read_text().splitlines()[1]
        assert float(body.split(",")[1]) == pytest.approx(1.0, abs=1e-3)


class TestConfigPrecedence:
    def test_flags_override_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("a = 1\nb = 0\nc = 1\nseed = 5\n")
        main(["classify", "--config", str(cfg), "--c", "-1"])
        assert "Hyperbolic" in capsys.readouterr().out

    def test_config_file_alone(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("a = 2\nb = -6\nc = 4\n")
        main(["classify", "--config", str(cfg)])
        assert "roots [1, 2]" in capsys.readouterr().out

    def test_bad_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("frobnicate = 7\n")
        assert main(["classify", "--config", str(cfg)]) == 2


class TestValidateCommand:
    def test_subset_pass_and_report_file(self, tmp_path, capsys):
        code = main([
            "validate", "--criteria", "AC-1,AC-8", "--out-dir", str(tmp_path),
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "[PASS] AC-1" in out
        assert "[PASS] AC-8" in out
        assert (tmp_path / "validation.txt").exists()

    def test_coarse_grid_negative_control(self, tmp_path, capsys):
        # resolution-sensitive criterion fails with diagnostics on 201 nodes
        code = main([
            "validate", "--criteria", "AC-3", "--grid-nodes", "201",
            "--out-dir", str(tmp_path),
        ])
        out = capsys.readouterr().out
        assert code == 1
        assert "[FAIL] AC-3" in out

    def test_report_determinism(self, tmp_path):
        main(["validate", "--criteria", "AC-1", "--seed", "3",
              "--out-dir", str(tmp_path / "r1")])
        main(["validate", "--criteria", "AC-1", "--seed", "3",
              "--out-dir", str(tmp_path / "r2")])
        assert (
            (tmp_path / "r1" / "validation.txt").read_bytes()
            == (tmp_path / "r2" / "validation.txt").read_bytes()
        )
