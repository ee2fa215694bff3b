"""Command-line front end.

A thin client over the scheduling service: commands read a fleet config,
call the service (in-process by default, or a remote instance via
``--server``) and render the responses as CSV files.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible model.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import csvio
from .client import ServiceClient, ServiceClientError
from .experiments import DEFAULT_PSI_GRID, DEFAULT_RHO_GRID
from .scheduler.schedule import Schedule
from .service.schemas import SweepResponse, ValidationModel

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


def _read_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise click.ClickException(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise click.ClickException(
            f"config {path} is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise click.ClickException(f"config {path} must be a JSON object")
    return data


def _parse_grid(text: str, name: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise click.ClickException(f"--{name} must be a comma-separated list of numbers") from exc


def _fail(exc: ServiceClientError) -> None:
    click.echo(f"error: {exc.detail}", err=True)
    sys.exit(EXIT_USAGE)


server_option = click.option(
    "--server", default=None, metavar="URL",
    help="Base URL of a running service; default runs the engine in-process.",
)
timestamp_option = click.option(
    "--no-timestamp", is_flag=True,
    help="Suppress the timestamp header (and wall-time cells) for byte-identical reruns.",
)


@click.group()
def cli() -> None:
    """Chance-constrained day-ahead scheduling for (networked) microgrids."""


@cli.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["networked", "independent"]), default=None,
              help="Override the config's scheduling mode.")
@click.option("--gap", default=1e-3, show_default=True, help="Relative MIP gap.")
@click.option("--time-limit", type=float, default=None, help="Solver time limit, seconds.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--samples", default=10_000, show_default=True,
              help="Monte Carlo samples per period for validation.")
@click.option("--seed", default=20240601, show_default=True)
@click.option("--n-segments", default=32, show_default=True,
              help="Piecewise-linear CDF segments.")
@click.option("--z-max", default=4.0, show_default=True,
              help="CDF breakpoint range in std-dev units.")
@click.option("--skip-validation", is_flag=True, help="Skip the Monte Carlo check.")
@timestamp_option
@server_option
def solve(config, mode, gap, time_limit, out_dir, samples, seed, n_segments, z_max,
          skip_validation, no_timestamp, server) -> None:
    """Solve one fleet config; write schedule, cost and validation CSVs."""
    payload = _read_config(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with ServiceClient(server) as client:
        try:
            resp = client.solve(
                payload, mode=mode, gap=gap, time_limit=time_limit,
                n_segments=n_segments, z_max=z_max,
                validate_psi=not skip_validation, samples=samples, seed=seed,
            )
        except ServiceClientError as exc:
            _fail(exc)
    if resp["status"] == "infeasible":
        click.echo(f"infeasible: {resp.get('detail', '')}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    timestamp = not no_timestamp
    schedules = [Schedule.model_validate(s) for s in resp["schedules"]]
    validations = [ValidationModel.model_validate(v) for v in resp.get("validations", [])]
    for i, schedule in enumerate(schedules):
        label = "networked" if resp["mode"] == "networked" else schedule.microgrids[0].id
        csvio.write_schedule_csv(schedule, out / f"schedule_{label}.csv", timestamp)
        csvio.write_cost_csv(schedule.cost, out / f"costs_{label}.csv", timestamp)
        if i < len(validations):
            csvio.write_validation_csv(validations[i], out / f"validation_{label}.csv", timestamp)
    total = resp.get("total_cost")
    click.echo(f"status: ok  mode: {resp['mode']}  total cost: {total:.4f} $")
    if validations:
        worst = min(v.min_empirical_psi for v in validations)
        click.echo(f"min empirical PSI across periods: {worst:.5f}")
    click.echo(f"wrote {len(schedules)} schedule(s) to {out}")


def _run_sweep(kind, config, grid_text, default_grid, gap, time_limit, samples, seed,
               jobs, out_dir, no_timestamp, server) -> None:
    payload = _read_config(config)
    grid = _parse_grid(grid_text, f"{kind}-grid") if grid_text else list(default_grid)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with ServiceClient(server) as client:
        try:
            call = client.sweep_psi if kind == "psi" else client.sweep_corr
            resp = call(payload, grid, gap=gap, time_limit=time_limit,
                        samples=samples, seed=seed, jobs=jobs)
        except ServiceClientError as exc:
            _fail(exc)
    sweep = SweepResponse.model_validate(resp)
    path = out / f"sweep_{kind}.csv"
    csvio.write_sweep_csv(sweep, path, not no_timestamp)
    failed = [p.axis for p in sweep.points if p.status != "ok"]
    click.echo(f"wrote {path} ({len(sweep.points)} points)")
    if failed:
        click.echo(f"points that did not solve: {failed}", err=True)


@cli.command("sweep-psi")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--psi-grid", default=None, metavar="Q1,Q2,...",
              help=f"PSI requirements to sweep [default: {','.join(map(str, DEFAULT_PSI_GRID))}].")
@click.option("--gap", default=1e-3, show_default=True)
@click.option("--time-limit", type=float, default=None)
@click.option("--samples", default=10_000, show_default=True)
@click.option("--seed", default=20240601, show_default=True)
@click.option("--jobs", default=1, show_default=True, help="Concurrent sweep points.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@timestamp_option
@server_option
def sweep_psi(config, psi_grid, gap, time_limit, samples, seed, jobs, out_dir,
              no_timestamp, server) -> None:
    """Sweep the PSI requirement; compare networked vs independent cost."""
    _run_sweep("psi", config, psi_grid, DEFAULT_PSI_GRID, gap, time_limit, samples,
               seed, jobs, out_dir, no_timestamp, server)


@cli.command("sweep-corr")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--rho-grid", default=None, metavar="R1,R2,...",
              help=f"Correlation levels to sweep [default: {','.join(map(str, DEFAULT_RHO_GRID))}].")
@click.option("--gap", default=1e-3, show_default=True)
@click.option("--time-limit", type=float, default=None)
@click.option("--samples", default=10_000, show_default=True)
@click.option("--seed", default=20240601, show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@timestamp_option
@server_option
def sweep_corr(config, rho_grid, gap, time_limit, samples, seed, jobs, out_dir,
               no_timestamp, server) -> None:
    """Sweep the cross-microgrid correlation; compare both modes."""
    _run_sweep("corr", config, rho_grid, DEFAULT_RHO_GRID, gap, time_limit, samples,
               seed, jobs, out_dir, no_timestamp, server)


@cli.command("export-mps")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["networked", "independent"]), default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Destination MPS file; the name map lands beside it.")
@click.option("--n-segments", default=32, show_default=True)
@click.option("--z-max", default=4.0, show_default=True)
@server_option
def export_mps(config, mode, out, n_segments, z_max, server) -> None:
    """Export the fleet's MILP in fixed-format MPS with a name sidecar."""
    payload = _read_config(config)
    with ServiceClient(server) as client:
        try:
            resp = client.export_mps(payload, mode=mode, n_segments=n_segments, z_max=z_max)
        except ServiceClientError as exc:
            _fail(exc)
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(resp["mps"])
    sidecar = out_path.with_name(out_path.name + ".names.json")
    sidecar.write_text(json.dumps(resp["name_map"], indent=2, sort_keys=True) + "\n")
    click.echo(
        f"wrote {out_path} ({resp['n_variables']} variables, "
        f"{resp['n_binaries']} binaries, {resp['n_constraints']} rows) and {sidecar}"
    )


@cli.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@server_option
def validate(config, server) -> None:
    """Check a fleet config against every domain invariant."""
    payload = _read_config(config)
    with ServiceClient(server) as client:
        resp = client.validate_fleet(payload)
    if resp["valid"] and not resp["violations"]:
        click.echo("config is valid")
        return
    for violation in resp["violations"]:
        click.echo(violation, err=True)
    sys.exit(EXIT_USAGE)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port) -> None:
    """Run the scheduling service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code mapping (click's default
    usage-error code is 2, which is reserved here for infeasibility)."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
