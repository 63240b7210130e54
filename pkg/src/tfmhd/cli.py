"""Command-line entry point: configuration parsing and bit-stable CSV output.

Subcommands:

* ``converge``    manufactured-solution convergence study -> rates CSV
* ``orszag-tang`` ideal conservation run -> diagnostics CSV
* ``run``         single manufactured or vortex run -> diagnostics CSV
* ``lemma-rates`` consistency-rate study of the filter/stencil operators
* ``verify``      algebraic identity property suites, one pass/fail line each

Settings merge with precedence: command-line flags over config-file keys over
per-subcommand defaults.  The config file is flat ``key = value`` text with
sections; exit codes are 0 on success, 1 on solver non-convergence, 2 on
configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

from tfmhd.grid import TWO_PI
from tfmhd.harness import (
    ConvergenceRow,
    LemmaRateRow,
    RunConfig,
    convergence_study,
    identity_suite,
    lemma_rate_study,
    manufactured_run,
    orszag_tang_run,
)
from tfmhd.mhd import SolverParams
from tfmhd.stepper import NonConvergence

EXIT_OK = 0
EXIT_NONCONVERGENCE = 1
EXIT_CONFIG = 2

RATES_COLUMNS = (
    "dt",
    "err_u_h1",
    "rate_u_h1",
    "err_b_h1",
    "rate_b_h1",
    "err_u_l2",
    "rate_u_l2",
    "err_b_l2",
    "rate_b_l2",
)

LEMMA_COLUMNS = ("kind", "dt", "quantity", "slope")


class ConfigError(Exception):
    """Invalid configuration: unknown key, bad type, or missing requirement."""


# key -> (section, parser)
_KEY_SPECS = {
    "n": ("grid", int),
    "length": ("grid", float),
    "re_inv": ("physics", float),
    "rem_inv": ("physics", float),
    "s": ("physics", float),
    "dt": ("time", float),
    "t_end": ("time", float),
    "picard_tol": ("solver", float),
    "picard_max_iters": ("solver", int),
    "formulation": ("solver", str),
    "filter": ("solver", bool),
    "filter_pressure": ("solver", bool),
    "kind": ("run", str),
    "dts": ("run", "dts"),
    "output_dir": ("run", str),
    "seed": ("run", int),
}

_VALID_KEYS_BY_SECTION: dict[str, set[str]] = {}
for _key, (_section, _) in _KEY_SPECS.items():
    _VALID_KEYS_BY_SECTION.setdefault(_section, set()).add(_key)

_BOOL_WORDS = {
    "1": True, "true": True, "yes": True, "on": True,
    "0": False, "false": False, "no": False, "off": False,
}


def _parse_value(key: str, raw: str):
    _, kind = _KEY_SPECS[key]
    raw = raw.strip()
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is bool:
            word = raw.lower()
            if word not in _BOOL_WORDS:
                raise ValueError(raw)
            return _BOOL_WORDS[word]
        if kind == "dts":
            return parse_dts(raw)
        return raw
    except ValueError:
        raise ConfigError(
            f"type mismatch for key '{key}': cannot parse {raw!r} as {getattr(kind, '__name__', kind)}"
        ) from None


def parse_dts(raw: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"type mismatch for key 'dts': cannot parse {raw!r} as float list") from None
    if not values:
        raise ConfigError("key 'dts' needs at least one value")
    return values


def read_config_file(path: str) -> dict:
    """Parse the sectioned key = value file; unknown keys are fatal."""
    file = Path(path)
    if not file.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read_string(file.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from None
    settings: dict = {}
    for section in parser.sections():
        if section not in _VALID_KEYS_BY_SECTION:
            raise ConfigError(
                f"unknown config section [{section}]; valid sections: "
                + ", ".join(sorted(_VALID_KEYS_BY_SECTION))
            )
        for key, raw in parser.items(section):
            if key not in _VALID_KEYS_BY_SECTION[section] or _KEY_SPECS[key][0] != section:
                raise ConfigError(
                    f"unknown key '{key}' in section [{section}]; valid keys: "
                    + ", ".join(sorted(_VALID_KEYS_BY_SECTION[section]))
                )
            settings[key] = _parse_value(key, raw)
    return settings


_COMMON_DEFAULTS = dict(
    n=64,
    length=TWO_PI,
    re_inv=0.0,
    rem_inv=0.0,
    s=1.0,
    dt=0.01,
    t_end=1.0,
    picard_tol=1e-10,
    picard_max_iters=100,
    formulation="two_step",
    filter=True,
    filter_pressure=True,
    kind="orszag_tang",
    dts=None,
    output_dir=".",
    seed=0,
)

_DEFAULTS_BY_COMMAND = {
    # ideal vortex benchmark; tight tolerance so identity residuals resolve
    "orszag-tang": dict(t_end=2.7, picard_tol=1e-12, kind="orszag_tang"),
    "converge": dict(
        re_inv=1.0,
        rem_inv=1.0,
        kind="manufactured",
        dts=(0.1, 0.05, 0.025, 0.0125),
        dt=0.1,
    ),
    "run": dict(re_inv=1.0, rem_inv=1.0, kind="manufactured"),
    "lemma-rates": dict(dts=(0.1, 0.05, 0.025, 0.0125)),
    "verify": dict(),
}


def merge_settings(command: str, file_settings: dict, flag_settings: dict) -> dict:
    settings = dict(_COMMON_DEFAULTS)
    settings.update(_DEFAULTS_BY_COMMAND[command])
    settings.update(file_settings)
    settings.update({k: v for k, v in flag_settings.items() if v is not None})
    return settings


def _require_writable_dir(path: str) -> None:
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        probe = directory / ".tfmhd-write-probe"
        probe.touch()
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output_dir is not writable: {path} ({exc})") from None


def build_run_config(settings: dict) -> RunConfig:
    _require_writable_dir(settings["output_dir"])
    try:
        params = SolverParams(
            re_inv=settings["re_inv"],
            rem_inv=settings["rem_inv"],
            s=settings["s"],
            dt=settings["dt"],
            t_end=settings["t_end"],
            filter_enabled=settings["filter"],
            picard_tol=settings["picard_tol"],
            picard_max_iters=settings["picard_max_iters"],
            filter_pressure=settings["filter_pressure"],
        )
        return RunConfig(
            params=params,
            n=settings["n"],
            length=settings["length"],
            kind=settings["kind"],
            dts=tuple(settings["dts"]) if settings["dts"] else None,
            output_dir=settings["output_dir"],
            formulation=settings["formulation"],
            seed=settings["seed"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def fmt(value) -> str:
    """Serialize one CSV cell; floats carry 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


class CsvWriter:
    """Streaming CSV writer with fixed newline discipline for byte-stable output."""

    def __init__(self, path: Path, columns):
        self.path = path
        self.columns = tuple(columns)
        path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(path, "w", newline="")
        self._fh.write(",".join(self.columns) + "\n")

    def row(self, values) -> None:
        self._fh.write(",".join(fmt(v) for v in values) + "\n")

    def mark_truncated(self, reason: str) -> None:
        self._fh.write(f"# truncated: {reason}\n")

    def close(self) -> None:
        self._fh.close()


def _diag_writer(path: Path) -> CsvWriter:
    from tfmhd.diagnostics import CSV_COLUMNS

    return CsvWriter(path, CSV_COLUMNS)


def _write_rates(path: Path, rows: list[ConvergenceRow]) -> None:
    writer = CsvWriter(path, RATES_COLUMNS)
    for r in rows:
        writer.row(
            (
                r.dt,
                r.err_u_h1,
                r.rate_u_h1,
                r.err_b_h1,
                r.rate_b_h1,
                r.err_u_l2,
                r.rate_u_l2,
                r.err_b_l2,
                r.rate_b_l2,
            )
        )
    writer.close()


def _write_lemma(path: Path, rows: list[LemmaRateRow]) -> None:
    writer = CsvWriter(path, LEMMA_COLUMNS)
    for r in rows:
        writer.row((r.kind, r.dt, r.quantity, r.slope))
    writer.close()


def _run_diag_command(config: RunConfig, path: Path, runner, verbose: bool) -> int:
    writer = _diag_writer(path)
    try:
        runner(config, on_record=lambda rec: writer.row(rec.csv_values()))
    except NonConvergence as exc:
        writer.mark_truncated(str(exc))
        writer.close()
        print(f"error: {exc}", file=sys.stderr)
        print(f"partial output in {path}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    writer.close()
    if verbose:
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_orszag_tang(settings: dict, verbose: bool) -> int:
    config = build_run_config(settings)
    mode = "filtered" if config.params.filter_enabled else "unfiltered"
    path = Path(config.output_dir) / f"orszag_tang_{mode}.csv"
    return _run_diag_command(config, path, orszag_tang_run, verbose)


def _cmd_run(settings: dict, verbose: bool) -> int:
    config = build_run_config(settings)
    if config.kind == "manufactured":
        runner = manufactured_run
    else:
        runner = orszag_tang_run
    path = Path(config.output_dir) / f"run_{config.kind}.csv"
    return _run_diag_command(config, path, runner, verbose)


def _cmd_converge(settings: dict, verbose: bool) -> int:
    config = build_run_config(settings)
    if config.kind != "manufactured":
        raise ConfigError("the convergence study requires kind = manufactured")
    if config.dts is None:
        raise ConfigError("the convergence study requires the 'dts' key (or --dts)")
    path = Path(config.output_dir) / "rates.csv"
    try:
        rows = convergence_study(config)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_rates(path, rows)
    if verbose:
        for r in rows:
            print(
                f"dt={r.dt:g} err_u_h1={r.err_u_h1:.3e} rate={r.rate_u_h1}",
                file=sys.stderr,
            )
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_lemma_rates(settings: dict, verbose: bool) -> int:
    config = build_run_config(settings)
    dts = list(config.dts or ())
    if not dts:
        raise ConfigError("the rate study requires the 'dts' key (or --dts)")
    rows = []
    for kind in ("filter_consistency", "bdf2_consistency"):
        rows.extend(lemma_rate_study(kind, dts))
    path = Path(config.output_dir) / "lemma_rates.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_lemma(path, rows)
    if verbose:
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(settings: dict, verbose: bool) -> int:
    results = identity_suite(seed=settings["seed"])
    all_ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"[{status}] {r.name}: max residual {r.max_residual:.3e} "
            f"(tolerance {r.tolerance:.1e}, {r.trials} trials)"
        )
        all_ok = all_ok and r.passed
    return EXIT_OK if all_ok else EXIT_NONCONVERGENCE


_COMMANDS = {
    "orszag-tang": _cmd_orszag_tang,
    "converge": _cmd_converge,
    "run": _cmd_run,
    "lemma-rates": _cmd_lemma_rates,
    "verify": _cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfmhd",
        description="Time-filtered backward Euler solver for incompressible MHD "
        "on 2D periodic domains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("converge", "manufactured-solution convergence study (rates CSV)"),
        ("orszag-tang", "ideal conservation benchmark run (diagnostics CSV)"),
        ("run", "single manufactured or vortex run (diagnostics CSV)"),
        ("lemma-rates", "consistency-rate study of the filter/stencil operators"),
        ("verify", "run the algebraic identity property suites"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--n", type=int, help="grid samples per dimension")
        p.add_argument("--length", type=float, help="domain edge length")
        p.add_argument("--re-inv", dest="re_inv", type=float, help="inverse Reynolds number")
        p.add_argument(
            "--rem-inv", dest="rem_inv", type=float, help="inverse magnetic Reynolds number"
        )
        p.add_argument("--s", type=float, help="coupling number")
        p.add_argument("--dt", type=float, help="time step")
        p.add_argument("--t-end", dest="t_end", type=float, help="final time")
        p.add_argument("--picard-tol", dest="picard_tol", type=float)
        p.add_argument("--picard-max-iters", dest="picard_max_iters", type=int)
        p.add_argument("--formulation", choices=("two_step", "combined"))
        p.add_argument(
            "--no-filter", dest="filter", action="store_false", default=None,
            help="disable the time filter (plain backward Euler)",
        )
        p.add_argument(
            "--no-filter-pressure", dest="filter_pressure", action="store_false", default=None,
            help="skip the filter post-step for the recovered pressure",
        )
        p.add_argument("--kind", choices=("manufactured", "orszag_tang"))
        p.add_argument("--dts", type=parse_dts, help="comma-separated halving dt list")
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--seed", type=int)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        flag_settings = {
            key: getattr(args, key, None)
            for key in _KEY_SPECS
            if getattr(args, key, None) is not None
        }
        file_settings = read_config_file(args.config) if args.config else {}
        settings = merge_settings(args.command, file_settings, flag_settings)
        return _COMMANDS[args.command](settings, args.verbose)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
