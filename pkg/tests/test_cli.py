"""
Unit Tests for the Command Line

Run configuration parsing, exit codes, the check manifest and report files.
"""
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from src.cli.checks import CHECKS, Check, select_checks
from src.cli.config import GridSpacing, RunConfig, load_run_config, parse_config_text
from src.cli.main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, build_parser, main
from src.cli.report import PlotSpec, RunReport
from src.models import decoupling
from src.superop.residuals import Residual
from src.utils.errors import InvalidParameterError, ResourceLimitError

DEFAULT_CONF = Path(__file__).resolve().parent.parent / "configs" / "default.conf"
SMALL_RUN = ["--fock-cutoff", "6", "--spin-halfwidth", "6", "--t-end", "1", "--points", "3"]


class TestRunConfig:
    """Test RunConfig validation and derived values."""

    def test_defaults_match_shipped_file(self):
        assert load_run_config(DEFAULT_CONF).config_hash() == RunConfig().config_hash()

    def test_list_fields_split_on_commas(self):
        config = RunConfig.model_validate({"sigma_sweep": "0.3, 0.5", "formats": "csv,svg", "ell_sweep": "4, 8"})
        assert config.sigma_sweep == [0.3, 0.5]
        assert config.formats == ["csv", "svg"]
        assert config.ell_sweep == [4, 8]

    def test_lambda_alias(self):
        config = RunConfig.model_validate({"lambda": "0.35"})
        assert config.model_params().lam == pytest.approx(0.35)

    @pytest.mark.parametrize(
        "data",
        [
            {"formats": "csv,pdf"},
            {"sigma_sweep": "0.5, -1"},
            {"t_start": 2.0, "t_end": 1.0},
            {"spacing": "log"},
            {"margin_fock": 16},
            {"initial_photons": 40},
            {"unknown_key": 1},
        ],
    )
    def test_rejects_invalid_values(self, data):
        with pytest.raises(ValidationError):
            RunConfig.model_validate(data)

    def test_time_grid(self):
        grid = RunConfig(gamma=0.5, points=5).time_grid()
        assert grid[0] == 0.0 and grid[-1] == pytest.approx(40.0)
        log_grid = RunConfig(t_start=0.1, t_end=10.0, points=3, spacing=GridSpacing.LOG).time_grid()
        assert np.allclose(log_grid, [0.1, 1.0, 10.0])

    def test_time_grid_needs_end_without_damping(self):
        with pytest.raises(InvalidParameterError):
            RunConfig(gamma=0.0).time_grid()

    def test_initial_state(self):
        config = RunConfig(fock_cutoff=3, spin_halfwidth=2, initial_spin=1, initial_photons=2)
        rho = config.initial_state()
        assert np.trace(rho) == 1.0
        assert rho[config.geometry().flat_index(1, 2), config.geometry().flat_index(1, 2)] == 1.0

    def test_margins_default_to_quarter_width(self):
        assert RunConfig(fock_cutoff=12, spin_halfwidth=8).margins() == (2, 3)

    def test_config_hash(self):
        assert RunConfig().config_hash() == RunConfig().config_hash()
        assert RunConfig().config_hash() != RunConfig(J=0.6).config_hash()


class TestConfigFile:
    """Test the key = value parser and file loading."""

    def test_comments_and_blank_lines(self):
        values = parse_config_text("# run\n\nomega = 2.0  # faster\nformats = csv, json\n")
        assert values == {"omega": "2.0", "formats": "csv, json"}

    @pytest.mark.parametrize("text", ["omega 2.0", "= 1", "omega = 1\nomega = 2"])
    def test_malformed_text(self, text):
        with pytest.raises(InvalidParameterError):
            parse_config_text(text)

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text("omega = 2.0\nmu = 0.4\n", encoding="utf-8")
        config = load_run_config(path, {"mu": "0.9", "gamma": None})
        assert config.omega == 2.0
        assert config.mu == 0.9
        assert config.gamma == 0.3

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(InvalidParameterError):
            load_run_config(tmp_path / "missing.conf")


class TestManifest:
    """Test the check registry."""

    def test_names_are_unique_and_ordered(self):
        names = list(CHECKS)
        assert names[0] == "identities"
        assert len(set(c.tag for c in CHECKS.values())) >= 10
        assert all(CHECKS[name].name == name for name in names)

    def test_select_checks(self):
        assert [c.name for c in select_checks(["semigroup", "kraus"])] == ["kraus", "semigroup"]
        assert len(select_checks(None)) == len(CHECKS)

    def test_unknown_check(self):
        with pytest.raises(InvalidParameterError):
            select_checks(["nope"])


class TestMain:
    """Test exit codes and written files."""

    def test_list(self, capsys):
        assert main(["list"]) == EXIT_OK
        assert "decoupling" in capsys.readouterr().out

    def test_verify_list_flag(self, capsys):
        assert main(["verify", "--list"]) == EXIT_OK
        assert "spectrum" in capsys.readouterr().out

    def test_flags_cover_every_field(self):
        args = build_parser().parse_args(["evolve", "--lambda", "0.3", "--out", "x", "--format", "svg"])
        assert args.lam == "0.3"
        assert args.out_dir == "x"
        assert args.formats == "svg"

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["evolve", "--no-such-flag", "1"])
        assert exc_info.value.code == EXIT_USAGE

    def test_invalid_value(self, tmp_path):
        assert main(["evolve", "--fock-cutoff", "0", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_unknown_check_name(self, tmp_path):
        assert main(["verify", "--checks", "nope", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_verify_passes(self, tmp_path):
        assert main(["verify", "--checks", "kraus,semigroup", "--out", str(tmp_path)]) == EXIT_OK
        rows = pd.read_csv(tmp_path / "verify_checks.csv")
        assert set(rows["tag"]) == {"trace=1", "3eq"}
        assert rows["passed"].all()
        report = json.loads((tmp_path / "verify_report.json").read_text(encoding="utf-8"))
        assert report["passed"] is True
        assert report["environment"]["seed"] == report["config"]["seed"]

    def test_failing_check_exits_nonzero(self, tmp_path, mocker):
        def broken(ctx):
            return [Residual("deliberately wrong", "trace=1", 1.0, 1.0, 1e-10)]

        mocker.patch.dict(CHECKS, {"kraus": Check("kraus", "trace=1", "broken", broken)})
        assert main(["verify", "--checks", "kraus", "--out", str(tmp_path)]) == EXIT_FAILED
        rows = pd.read_csv(tmp_path / "verify_checks.csv")
        assert not rows["passed"].any()

    def test_corrupted_decoupled_generator_fails_split(self, tmp_path, mocker):
        honest = decoupling.build_L_decoupled

        def wrong_coupling(params, geo):
            return honest(params.with_updates(lam=2.0 * params.lam), geo)

        mocker.patch("src.models.decoupling.build_L_decoupled", side_effect=wrong_coupling)
        assert main(["verify", "--checks", "decoupling", "--out", str(tmp_path)]) == EXIT_FAILED
        rows = pd.read_csv(tmp_path / "verify_checks.csv")
        failing = rows[~rows["passed"]]
        assert not failing.empty
        assert set(failing["tag"]) == {"SPLIT"}

    @pytest.mark.slow
    def test_default_verify_passes_and_is_reproducible(self, tmp_path):
        names = ("verify_checks.csv", "verify_report.json")
        argv = ["verify", "--config", str(DEFAULT_CONF)]
        assert main([*argv, "--out", str(tmp_path / "a")]) == EXIT_OK
        assert main([*argv, "--out", str(tmp_path / "b")]) == EXIT_OK
        first = [(tmp_path / "a" / name).read_bytes() for name in names]
        assert [(tmp_path / "b" / name).read_bytes() for name in names] == first
        rows = pd.read_csv(tmp_path / "a" / "verify_checks.csv")
        assert rows["passed"].all()
        assert {"SPLIT", "prod_L", "CP", "EST", "toastGIB", "slim"} <= set(rows["tag"])

    def test_sync_compare_refuses_unbounded_inverse(self, tmp_path):
        # J = 0.5 caps σ below log(2)/2; the shipped σ = 0.5 is past it
        assert main(["sync-compare", *SMALL_RUN, "--out", str(tmp_path)]) == EXIT_FAILED

    @pytest.mark.slow
    def test_sync_compare_at_zero_temperature(self, tmp_path):
        argv = ["sync-compare", "--J", "0", "--lambda", "0.05", "--fock-cutoff", "8", "--spin-halfwidth", "8",
                "--t-end", "2", "--points", "3", "--out", str(tmp_path)]
        assert main(argv) == EXIT_OK
        frame = pd.read_csv(tmp_path / "sync_compare.csv")
        assert (frame["distance"] <= frame["bound"] + 1e-6).all()
        assert frame["ode_distance"].max() < 1e-6

    def test_evolve(self, tmp_path):
        assert main(["evolve", *SMALL_RUN, "--out", str(tmp_path)]) == EXIT_OK
        frame = pd.read_csv(tmp_path / "evolve.csv")
        assert list(frame.columns) == [
            "t",
            "trace",
            "min_eigenvalue",
            "mean_N",
            "mean_M",
            "window_population",
            "ode_distance",
        ]
        assert len(frame) == 3
        assert frame["mean_N"].iloc[0] == pytest.approx(1.0)
        assert frame["ode_distance"].max() < 1e-3

    def test_spectrum_is_deterministic(self, tmp_path):
        argv = ["spectrum", "--J", "0", "--fock-cutoff", "6", "--out", str(tmp_path)]
        names = ("spectrum.csv", "spectrum_report.json")
        assert main(argv) == EXIT_OK
        first = [(tmp_path / name).read_bytes() for name in names]
        assert main(argv) == EXIT_OK
        assert [(tmp_path / name).read_bytes() for name in names] == first
        frame = pd.read_csv(tmp_path / "spectrum.csv")
        assert frame["deviation"].max() < 1e-8

    def test_refused_computation_exits_one(self, tmp_path, mocker):
        mocker.patch("src.cli.main.spectrum_table", side_effect=ResourceLimitError("dense cap"))
        assert main(["spectrum", "--out", str(tmp_path)]) == EXIT_FAILED


class TestRunReport:
    """Test report writing."""

    @pytest.fixture
    def report(self):
        report = RunReport("demo", RunConfig())
        frame = pd.DataFrame({"t": [0.0, 1.0, 2.0], "distance": [1.0, 0.1, 0.01]})
        frame.attrs["fitted_rate"] = 2.3
        report.add_series("demo", frame, PlotSpec("t", ["distance"], log_y=True, title="demo"))
        report.add_checks([Residual("ok", "trace=1", 0.0, 0.0, 1e-10)])
        return report

    def test_summary_collects_frame_attrs(self, report):
        assert report.summary == {"demo.fitted_rate": 2.3}
        assert report.passed

    def test_write_all_formats(self, report, tmp_path):
        written = report.write(tmp_path, ["csv", "json", "svg"])
        assert [p.name for p in written] == ["demo_checks.csv", "demo.csv", "demo_report.json", "demo.svg"]
        assert (tmp_path / "demo.svg").read_text(encoding="utf-8").lstrip().startswith("<?xml")
        payload = json.loads((tmp_path / "demo_report.json").read_text(encoding="utf-8"))
        assert payload["series"]["demo"]["distance"] == [1.0, 0.1, 0.01]

    def test_svg_is_reproducible(self, report, tmp_path):
        report.write(tmp_path / "a", ["svg"])
        report.write(tmp_path / "b", ["svg"])
        assert (tmp_path / "a" / "demo.svg").read_bytes() == (tmp_path / "b" / "demo.svg").read_bytes()
