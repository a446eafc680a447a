"""Command-line interface for the MIMO-MC-CDMA link simulator.

Example:
    >>> # Full default sweep (6 modulations, -10..20 dB)
    >>> python -m src.cli run
    >>> # Quick coded QPSK check with a plot script
    >>> python -m src.cli run --modulation qpsk --snr 0:2:10 --emit-plot results/plot_ber.py
    >>> # Resolved experiment in canonical form
    >>> python -m src.cli show-config --config experiments/table1.cfg
    >>> # Gain table from a saved sweep
    >>> python -m src.cli gains results/ber.csv
"""

from __future__ import annotations

import logging
from pathlib import Path

import typer

from src.analysis import gain_table
from src.config import AppConfig, ConfigError, SimConfig, load_experiment, render_config
from src.phy.common import PhyError
from src.phy.modem import get_scheme
from src.reporters import ConsoleReporter
from src.runner import BerRecord, SimulationError, run_sweep
from src.utils.exit_codes import EXIT_CONFIG_ERROR, EXIT_SUCCESS, exit_code_for, log_exit
from src.utils.logging_config import setup_logging
from src.utils.storage import InvalidDataError, StorageIOError, read_csv, write_csv
from src.utils.templates import TemplateNotFoundError, TemplateRenderError, emit_plot_script

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="mcsim",
    help="2x4 MIMO-MC-CDMA link simulator - Monte-Carlo BER sweeps",
)


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
) -> None:
    """MIMO-MC-CDMA simulator CLI."""
    level = logging.DEBUG if verbose else logging.INFO
    setup_logging(level=level)


def _load_app_config() -> AppConfig:
    try:
        return AppConfig.load()
    except ConfigError as e:
        typer.echo(f"Configuration error: {e}", err=True)
        raise typer.Exit(code=exit_code_for(e))


def _load_experiment(path: Path | None, overrides: dict[str, str]) -> SimConfig:
    try:
        return load_experiment(path, overrides)
    except ConfigError as e:
        typer.echo(f"Configuration error: {e}", err=True)
        raise typer.Exit(code=exit_code_for(e))


def _parse_sets(pairs: list[str]) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            typer.echo(f"Configuration error: --set expects KEY=VALUE, got {pair!r}", err=True)
            raise typer.Exit(code=EXIT_CONFIG_ERROR)
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _parse_workers(value: str | None, app_config: AppConfig) -> int:
    if value is None:
        return app_config.resolve_workers()
    try:
        workers = int(value)
    except ValueError:
        workers = 0
    if workers < 1:
        typer.echo(
            f"Configuration error: --workers must be an integer >= 1, got {value!r}", err=True
        )
        raise typer.Exit(code=EXIT_CONFIG_ERROR)
    return workers


def _parse_float_option(name: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        typer.echo(f"Configuration error: {name} must be a number, got {value!r}", err=True)
        raise typer.Exit(code=EXIT_CONFIG_ERROR) from None


def _print_gains(
    reporter: ConsoleReporter,
    records: list[BerRecord],
    reference: str,
    at_ber: float,
    ber_snr_db: float,
) -> None:
    rows = gain_table(records, reference, at_ber, ber_snr_db)
    reporter.output_gains(rows, reference=reference, at_ber=at_ber, ber_snr_db=ber_snr_db)


@app.command()
def run(
    config: Path | None = typer.Option(None, "--config", help="Experiment file (key = value)"),
    modulation: str | None = typer.Option(None, "--modulation", help="Comma list, e.g. qpsk,64qam"),
    snr: str | None = typer.Option(None, "--snr", help="START:STEP:STOP in dB"),
    frames: str | None = typer.Option(None, "--frames", help="Minimum frames per point"),
    min_errors: str | None = typer.Option(None, "--min-errors", help="Bit errors per point"),
    seed: str | None = typer.Option(None, "--seed", help="Master seed"),
    subcarriers: str | None = typer.Option(None, "--subcarriers", help="OFDM subcarriers"),
    cp_len: str | None = typer.Option(None, "--cp-len", help="Cyclic prefix samples"),
    spread_factor: str | None = typer.Option(None, "--spread-factor", help="Chips per bit"),
    spreading_code: str | None = typer.Option(
        None, "--spreading-code", help="auto, pn or walsh"
    ),
    users: str | None = typer.Option(None, "--users", help="Superposed users"),
    nr: str | None = typer.Option(None, "--nr", help="Receive antennas"),
    msg_bits: str | None = typer.Option(None, "--msg-bits", help="Message bits per frame"),
    detector: str | None = typer.Option(None, "--detector", help="zf, real-ls or ml"),
    uncoded: bool = typer.Option(False, "--uncoded", help="Skip the convolutional code"),
    terminate: bool = typer.Option(False, "--terminate", help="Flush the encoder per frame"),
    reference: str | None = typer.Option(None, "--reference", help="Gain reference modulation"),
    gain_ber: str | None = typer.Option(None, "--gain-ber", help="Target BER for gains"),
    ber_snr: str | None = typer.Option(None, "--ber-snr", help="SNR of the BER column"),
    output: Path | None = typer.Option(None, "--output", help="CSV path"),
    emit_plot: Path | None = typer.Option(None, "--emit-plot", help="Plot script path"),
    workers: str | None = typer.Option(None, "--workers", help="Worker processes (>= 1)"),
) -> None:
    """Run a BER sweep and save the records as CSV.

    Flags override values from --config; absent keys take the reference
    system defaults.
    """
    app_config = _load_app_config()

    flags: dict[str, str | None] = {
        "modulation": modulation,
        "snr": snr,
        "frames": frames,
        "min_errors": min_errors,
        "seed": seed,
        "subcarriers": subcarriers,
        "cp_len": cp_len,
        "spread_factor": spread_factor,
        "spreading_code": spreading_code,
        "users": users,
        "nr": nr,
        "msg_bits": msg_bits,
        "detector": detector,
        "coding": "none" if uncoded else None,
        "terminate": "true" if terminate else None,
        "reference": reference,
        "gain_ber": gain_ber,
        "ber_snr": ber_snr,
    }
    overrides = {key: value for key, value in flags.items() if value is not None}
    cfg = _load_experiment(config, overrides)

    pool = _parse_workers(workers, app_config)
    try:
        records = run_sweep(cfg, workers=pool, batch_frames=app_config.runtime.batch_frames)
    except (SimulationError, PhyError) as e:
        typer.echo(f"Simulation failed: {e}", err=True)
        raise typer.Exit(code=exit_code_for(e))

    csv_path = output or app_config.resolve_path(app_config.output.csv_path)
    plot_value = emit_plot
    if plot_value is None and app_config.output.plot_path:
        plot_value = app_config.resolve_path(app_config.output.plot_path)
    try:
        write_csv(records, csv_path)
        if plot_value is not None:
            emit_plot_script(records, plot_value, csv_path=csv_path)
    except StorageIOError as e:
        typer.echo(f"Storage error: {e}", err=True)
        raise typer.Exit(code=exit_code_for(e))
    except (TemplateNotFoundError, TemplateRenderError) as e:
        typer.echo(f"Plot script error: {e}", err=True)
        raise typer.Exit(code=exit_code_for(e))

    reporter = ConsoleReporter(show_table=app_config.output.show_table)
    reporter.output_records(records, cfg)
    if cfg.reference_modulation is not None:
        _print_gains(
            reporter, records, cfg.reference_modulation, cfg.gain_at_ber, cfg.ber_snr_db
        )

    log_exit(logger, EXIT_SUCCESS, f"{len(records)} record(s) in {csv_path}")


@app.command("show-config")
def show_config(
    config: Path | None = typer.Option(None, "--config", help="Experiment file (key = value)"),
    sets: list[str] = typer.Option([], "--set", help="KEY=VALUE override, repeatable"),
) -> None:
    """Print the resolved experiment in canonical form."""
    cfg = _load_experiment(config, _parse_sets(sets))
    typer.echo(render_config(cfg), nl=False)
    raise typer.Exit(code=EXIT_SUCCESS)


@app.command()
def gains(
    csv_path: Path = typer.Argument(..., help="CSV written by 'run'"),
    reference: str = typer.Option("64qam", "--reference", help="Gain reference modulation"),
    gain_ber: str = typer.Option("1e-2", "--gain-ber", help="Target BER for gains"),
    ber_snr: str = typer.Option("-1", "--ber-snr", help="SNR of the BER column"),
) -> None:
    """Print the gain table of a saved sweep."""
    at_ber = _parse_float_option("--gain-ber", gain_ber)
    ber_snr_db = _parse_float_option("--ber-snr", ber_snr)
    if not 0.0 < at_ber < 1.0:
        typer.echo(f"Configuration error: --gain-ber must be in (0, 1), got {gain_ber}", err=True)
        raise typer.Exit(code=EXIT_CONFIG_ERROR)

    try:
        records = read_csv(csv_path)
    except (StorageIOError, InvalidDataError) as e:
        typer.echo(f"Cannot load results: {e}", err=True)
        raise typer.Exit(code=exit_code_for(e))

    try:
        ref = get_scheme(reference).name
    except ValueError as e:
        typer.echo(f"Configuration error: {e}", err=True)
        raise typer.Exit(code=EXIT_CONFIG_ERROR)
    if ref not in {r.modulation for r in records}:
        typer.echo(f"Configuration error: reference '{ref}' not found in {csv_path}", err=True)
        raise typer.Exit(code=EXIT_CONFIG_ERROR)

    _print_gains(ConsoleReporter(), records, ref, at_ber, ber_snr_db)
    raise typer.Exit(code=EXIT_SUCCESS)


if __name__ == "__main__":
    app()
