"""Command-line layer: config precedence, CSV schemas, exit codes, determinism."""

import csv

import pytest

from tfmhd.cli import (
    EXIT_CONFIG,
    EXIT_NONCONVERGENCE,
    EXIT_OK,
    ConfigError,
    build_run_config,
    fmt,
    main,
    merge_settings,
    parse_dts,
    read_config_file,
)
from tfmhd.diagnostics import CSV_COLUMNS


def run_cli(*argv):
    return main(list(argv))


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


class TestConfigFile:
    def test_sectioned_keys_parse(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "[grid]\nn = 32\nlength = 6.283185307179586\n"
            "[physics]\nre_inv = 0.5\n[time]\ndt = 0.02\nt_end = 0.1\n"
            "[solver]\nfilter = off\n[run]\nkind = orszag_tang\ndts = 0.1, 0.05\n"
        )
        settings = read_config_file(str(cfg))
        assert settings["n"] == 32
        assert settings["re_inv"] == 0.5
        assert settings["filter"] is False
        assert settings["dts"] == (0.1, 0.05)

    def test_unknown_key_is_fatal_and_lists_valid_keys(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[grid]\nm = 32\n")
        with pytest.raises(ConfigError, match="valid keys.*length.*n"):
            read_config_file(str(cfg))

    def test_unknown_section_is_fatal(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[mesh]\nn = 32\n")
        with pytest.raises(ConfigError, match="unknown config section"):
            read_config_file(str(cfg))

    def test_type_mismatch_names_the_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[time]\ndt = banana\n")
        with pytest.raises(ConfigError, match="'dt'.*banana"):
            read_config_file(str(cfg))

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            read_config_file("/nonexistent/x.cfg")

    def test_key_in_wrong_section_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[grid]\ndt = 0.1\n")
        with pytest.raises(ConfigError, match="unknown key 'dt'"):
            read_config_file(str(cfg))


class TestPrecedence:
    def test_flags_override_file_override_defaults(self):
        file_settings = {"n": 32, "dt": 0.05}
        flag_settings = {"dt": 0.02}
        merged = merge_settings("orszag-tang", file_settings, flag_settings)
        assert merged["n"] == 32  # file beats default (64)
        assert merged["dt"] == 0.02  # flag beats file
        assert merged["t_end"] == 2.7  # subcommand default survives

    def test_vortex_defaults_match_benchmark(self):
        merged = merge_settings("orszag-tang", {}, {})
        assert merged["n"] == 64
        assert merged["dt"] == 0.01
        assert merged["t_end"] == 2.7
        assert merged["s"] == 1.0
        assert merged["re_inv"] == 0.0
        assert merged["rem_inv"] == 0.0
        assert merged["filter"] is True

    def test_converge_defaults(self):
        merged = merge_settings("converge", {}, {})
        assert merged["dts"] == (0.1, 0.05, 0.025, 0.0125)
        assert merged["re_inv"] == 1.0

    def test_bad_solver_params_become_config_errors(self):
        merged = merge_settings("run", {}, {"dt": -0.5})
        with pytest.raises(ConfigError):
            build_run_config(merged)


class TestDtsFlagParsing:
    def test_comma_list(self):
        assert parse_dts("0.1,0.05,0.025") == (0.1, 0.05, 0.025)

    def test_bad_entry(self):
        with pytest.raises(ConfigError, match="dts"):
            parse_dts("0.1,fast")

    def test_bad_dts_flag_is_config_error(self, tmp_path, capsys):
        code = run_cli("converge", "--dts", "0.1,banana", "--output-dir", str(tmp_path))
        assert code == EXIT_CONFIG
        assert "dts" in capsys.readouterr().err


class TestFloatFormatting:
    def test_round_trip_17_digits(self):
        import numpy as np

        rng = np.random.default_rng(3)
        for x in rng.standard_normal(200):
            assert float(fmt(float(x))) == float(x)

    def test_none_serializes_empty(self):
        assert fmt(None) == ""

    def test_int_stays_plain(self):
        assert fmt(7) == "7"


class TestSubcommands:
    def test_orszag_tang_emits_schema_and_succeeds(self, tmp_path):
        code = run_cli(
            "orszag-tang", "--n", "16", "--t-end", "0.05",
            "--output-dir", str(tmp_path),
        )
        assert code == EXIT_OK
        path = tmp_path / "orszag_tang_filtered.csv"
        with open(path) as fh:
            header = fh.readline().strip()
        assert header == ",".join(CSV_COLUMNS)
        rows = read_rows(path)
        assert len(rows) == 6
        assert [int(r["step"]) for r in rows] == list(range(6))

    def test_no_filter_writes_unfiltered_file(self, tmp_path):
        code = run_cli(
            "orszag-tang", "--n", "16", "--t-end", "0.05", "--no-filter",
            "--output-dir", str(tmp_path),
        )
        assert code == EXIT_OK
        assert (tmp_path / "orszag_tang_unfiltered.csv").exists()

    def test_converge_row_and_rate_counts(self, tmp_path):
        code = run_cli(
            "converge", "--n", "16", "--t-end", "0.2",
            "--dts", "0.1,0.05,0.025,0.0125",
            "--output-dir", str(tmp_path),
        )
        assert code == EXIT_OK
        rows = read_rows(tmp_path / "rates.csv")
        assert len(rows) == 4
        assert [r["rate_u_h1"] != "" for r in rows] == [False, True, True, True]

    def test_run_manufactured(self, tmp_path):
        code = run_cli(
            "run", "--n", "16", "--dt", "0.02", "--t-end", "0.06",
            "--output-dir", str(tmp_path),
        )
        assert code == EXIT_OK
        assert len(read_rows(tmp_path / "run_manufactured.csv")) == 4

    def test_lemma_rates(self, tmp_path):
        code = run_cli("lemma-rates", "--dts", "0.1,0.05", "--output-dir", str(tmp_path))
        assert code == EXIT_OK
        rows = read_rows(tmp_path / "lemma_rates.csv")
        assert len(rows) == 4
        kinds = {r["kind"] for r in rows}
        assert kinds == {"filter_consistency", "bdf2_consistency"}

    def test_verify_passes_on_correct_build(self, capsys):
        assert run_cli("verify", "--seed", "5") == EXIT_OK
        out = capsys.readouterr().out
        assert out.count("[PASS]") >= 7
        assert "[FAIL]" not in out

    def test_config_error_exit_code(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[time]\ndt = banana\n")
        code = run_cli("run", "--config", str(cfg))
        assert code == EXIT_CONFIG

    def test_combined_without_filter_is_config_error(self, tmp_path):
        code = run_cli(
            "orszag-tang", "--n", "16", "--t-end", "0.05", "--no-filter",
            "--formulation", "combined", "--output-dir", str(tmp_path),
        )
        assert code == EXIT_CONFIG

    def test_nonconvergence_exit_and_truncation_marker(self, tmp_path, capsys):
        code = run_cli(
            "orszag-tang", "--n", "16", "--dt", "30", "--t-end", "90",
            "--picard-max-iters", "6", "--output-dir", str(tmp_path),
        )
        assert code == EXIT_NONCONVERGENCE
        text = (tmp_path / "orszag_tang_filtered.csv").read_text()
        assert "# truncated:" in text
        err = capsys.readouterr().err
        assert "converge" in err

    def test_determinism_byte_identical_reruns(self, tmp_path):
        args = ["orszag-tang", "--n", "16", "--t-end", "0.1"]
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert run_cli(*args, "--output-dir", str(out_a)) == EXIT_OK
        assert run_cli(*args, "--output-dir", str(out_b)) == EXIT_OK
        a = (out_a / "orszag_tang_filtered.csv").read_bytes()
        b = (out_b / "orszag_tang_filtered.csv").read_bytes()
        assert a == b

    def test_config_file_drives_run(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "[grid]\nn = 16\n[time]\ndt = 0.02\nt_end = 0.06\n"
            f"[run]\nkind = orszag_tang\noutput_dir = {tmp_path}\n"
        )
        assert run_cli("run", "--config", str(cfg)) == EXIT_OK
        assert (tmp_path / "run_orszag_tang.csv").exists()


class TestOutputValidation:
    def test_unusable_output_dir_is_config_error(self, tmp_path):
        # a plain file where a directory is needed fails for any user
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        code = run_cli(
            "orszag-tang", "--n", "16", "--t-end", "0.05",
            "--output-dir", str(blocker / "sub"),
        )
        assert code == EXIT_CONFIG
