"""Main CLI entry point for netwave."""

import functools
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import click

from ..exceptions import (
    ConfigurationError,
    NetwaveException,
    ParameterError,
    RunawayError,
    ScenarioError,
    ValidationError,
)
from ..formatters.output_writer import OutputWriter, RunSummary
from ..infrastructure.settings import Settings, configure_logging, load_settings
from ..services.scenarios import ScenarioId, ScenarioParameters
from ..services.simulation import SimulationService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_RUNAWAY = 3

SCENARIOS = [member.value for member in ScenarioId]


def exit_code_for(error: NetwaveException) -> int:
    """Map a netwave error to the process exit status."""
    if isinstance(error, RunawayError):
        return EXIT_RUNAWAY
    if isinstance(error, (ConfigurationError, ValidationError, ParameterError, ScenarioError)):
        return EXIT_CONFIG
    return EXIT_FAILURE


def handle_errors(command):
    """Report netwave errors on stderr and exit with the mapped status."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except NetwaveException as e:
            click.echo(click.style(f"Error: {e}", fg="red"), err=True)
            if isinstance(e, RunawayError):
                for record in e.last_events:
                    click.echo(f"  {record}", err=True)
            logger.debug("Command failed", exc_info=True)
            sys.exit(exit_code_for(e))

    return wrapper


def parse_float_list(value: Optional[str], option: str) -> Optional[List[float]]:
    """Parse a comma separated list of floats, or None when not given."""
    if value is None:
        return None
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma separated numbers, got '{value}'",
                                 param_hint=option)


def scenario_options(command):
    """Options shared by every subcommand that builds a network."""
    options = [
        click.option("--scenario", type=click.Choice(SCENARIOS), default=None,
                     help="Built-in scenario (custom when --config is given)"),
        click.option("--config", "-c", "config_path", type=click.Path(exists=True),
                     help="Network document (JSON)"),
        click.option("--delta", type=float, help="Rarefaction discretization step"),
        click.option("--horizon", type=float, help="Final simulation time"),
        click.option("--rho1-flux", type=float, help="Flux level of the incoming road-1 wave"),
        click.option("--alpha1", type=float, help="appendix_b coefficient alpha1"),
        click.option("--alpha2", type=float, help="appendix_b coefficient alpha2"),
        click.option("--beta1", type=float, help="traffic_light_swap coefficient beta1"),
        click.option("--beta2", type=float, help="traffic_light_swap coefficient beta2"),
        click.option("--no-wave", is_flag=True, help="Build the equilibrium without its wave"),
        click.option("--max-events", type=int, help="Event-count circuit breaker"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _scenario_and_params(ctx_kwargs: Dict[str, Any]) -> Tuple[ScenarioId, ScenarioParameters]:
    name = ctx_kwargs["scenario"]
    config_path = ctx_kwargs["config_path"]
    if name is None:
        name = ScenarioId.CUSTOM.value if config_path else ScenarioId.APPENDIX_A.value
    scenario = ScenarioId.from_name(name)
    if scenario is ScenarioId.CUSTOM and not config_path:
        raise ScenarioError("The custom scenario needs --config")
    params = ScenarioParameters(
        rho1_flux=ctx_kwargs["rho1_flux"],
        alpha1=ctx_kwargs["alpha1"],
        alpha2=ctx_kwargs["alpha2"],
        beta1=ctx_kwargs["beta1"],
        beta2=ctx_kwargs["beta2"],
        delta=ctx_kwargs["delta"],
        horizon=ctx_kwargs["horizon"],
        path=config_path,
        with_wave=not ctx_kwargs["no_wave"],
    )
    return scenario, params


@click.group()
@click.option("--settings", "settings_path", type=click.Path(),
              envvar="NETWAVE_SETTINGS", help="Settings file (YAML)")
@click.option("--debug", "-d", is_flag=True, help="Debug logging and engine consistency checks")
@click.version_option(package_name="netwave")
@click.pass_context
def cli(ctx: click.Context, settings_path: Optional[str], debug: bool):
    """netwave - exact front tracking for traffic on road networks.

    Examples:
        netwave run --scenario appendix_a --rho1-flux 0.75 --out out/
        netwave run --config net.json --delta 0.05 --horizon 10
        netwave validate --config net.json
        netwave sweep --scenario traffic_light_swap --beta1-values 0.31,0.33,0.35
    """
    try:
        settings = load_settings(settings_path)
    except ConfigurationError as e:
        click.echo(click.style(f"Error: {e}", fg="red"), err=True)
        sys.exit(EXIT_CONFIG)
    configure_logging(settings.logging, debug)
    ctx.obj = {"settings": settings, "debug": debug}


@cli.command()
@scenario_options
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False), default="out",
              show_default=True, help="Output directory")
@click.option("--snapshot-times", help="Comma separated snapshot times")
@click.option("--phi-columns", is_flag=True, help="Add per-junction bad-trace columns")
@click.option("--quiet", "-q", is_flag=True, help="Do not print the run summary")
@click.pass_context
@handle_errors
def run(ctx: click.Context, out_dir: str, snapshot_times: Optional[str],
        phi_columns: bool, quiet: bool, **kwargs):
    """Run a scenario to its horizon and write the artifacts."""
    settings: Settings = ctx.obj["settings"]
    debug: bool = ctx.obj["debug"]
    times = parse_float_list(snapshot_times, "--snapshot-times")
    if times is None:
        times = settings.output.snapshot_times

    service = SimulationService(settings)
    scenario, params = _scenario_and_params(kwargs)
    spec = service.build(scenario, params)
    for warning in spec.warnings:
        logger.warning(warning)

    writer = OutputWriter(Path(out_dir), phi_columns or settings.output.phi_columns)
    with writer.event_snapshots() as event_snapshots:
        result = service.run(spec, times, [event_snapshots], kwargs["max_events"], debug)
    written = writer.write_run(spec, result)

    if not quiet:
        RunSummary().print_run(spec, result)
    logger.info("Wrote %d artifacts to %s", len(written) + 1, out_dir)


@cli.command()
@click.option("--config", "-c", "config_path", type=click.Path(exists=True), required=True,
              help="Network document (JSON)")
@click.pass_context
@handle_errors
def validate(ctx: click.Context, config_path: str):
    """Validate a network document without running it."""
    service = SimulationService(ctx.obj["settings"])
    spec = service.validate(config_path)
    click.echo(click.style(
        f"✓ {config_path}: {len(spec.roads)} roads, {len(spec.junctions)} junctions",
        fg="green",
    ))
    for warning in spec.warnings:
        click.echo(click.style(f"warning: {warning}", fg="yellow"), err=True)


@cli.command()
@scenario_options
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False), default="out",
              show_default=True, help="Output directory")
@click.option("--seeds", type=click.IntRange(min=1),
              help="Number of randomly perturbed copies of the network")
@click.option("--beta1-values", help="Comma separated beta1 values (traffic_light_swap)")
@click.option("--workers", type=click.IntRange(min=1), help="Worker processes")
@click.pass_context
@handle_errors
def sweep(ctx: click.Context, out_dir: str, seeds: Optional[int],
          beta1_values: Optional[str], workers: Optional[int], **kwargs):
    """Run independent simulations and write sweep.csv."""
    service = SimulationService(ctx.obj["settings"])
    scenario, params = _scenario_and_params(kwargs)
    betas = parse_float_list(beta1_values, "--beta1-values")

    if betas is not None:
        if scenario is not ScenarioId.TRAFFIC_LIGHT_SWAP:
            raise ScenarioError("--beta1-values needs --scenario traffic_light_swap")
        cases = service.beta_cases(params, betas, kwargs["max_events"])
    elif seeds is not None:
        spec = service.build(scenario, params)
        cases = service.seed_cases(spec, range(seeds), kwargs["max_events"])
    else:
        raise ScenarioError("sweep needs --seeds or --beta1-values")

    rows = service.sweep(cases, workers)
    OutputWriter(Path(out_dir)).write_sweep(rows)
    RunSummary().print_sweep(rows)


def main():
    """Console script entry point."""
    cli(prog_name="netwave")


if __name__ == "__main__":
    main()
