"""Command-line front end: bound maps, campaigns, densification, service.

Every command is a pure function of (config, seed): rerunning with the
same inputs reproduces the data files byte for byte, whatever the thread
count. Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import json
import sys
import time
from json import JSONDecodeError
from pathlib import Path

import click

from . import __version__
from .bounds import bound_grid, grid_to_csv, grid_to_dict
from .campaign import (
    CampaignConfig,
    cdf_to_csv,
    densification_step,
    drops_to_csv,
    los_histogram_to_csv,
    percentiles_to_csv,
    run_campaign,
    worst_ue_locations,
)
from .config import ConfigError, RunConfig, config_digest, load_config
from .scenario import deployment_to_dict

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load(config_path: str, seed: int | None) -> RunConfig:
    try:
        return load_config(config_path, seed_override=seed)
    except FileNotFoundError:
        click.echo(f"error: config file not found: {config_path}", err=True)
        sys.exit(EXIT_CONFIG)
    except JSONDecodeError as exc:
        click.echo(
            f"error: {config_path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}",
            err=True,
        )
        sys.exit(EXIT_CONFIG)
    except ConfigError as exc:
        click.echo(f"error: {config_path}: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _campaign_config(run: RunConfig, deployment, n_drops: int | None = None) -> CampaignConfig:
    return CampaignConfig(
        deployment=deployment,
        noise=run.noise,
        n_drops=run.n_drops if n_drops is None else n_drops,
        ue_height=run.ue_height,
        measurement_mode=run.measurement_mode,
        seed=run.seed,
        solve_options=run.solve_options,
    )


def _write(out_dir: Path, name: str, text: str, outputs: list[str]) -> None:
    path = out_dir / name
    path.write_text(text, encoding="utf-8")
    outputs.append(name)


def _write_manifest(
    out_dir: Path, command: str, config_path: str, seed: int | None, run: RunConfig,
    outputs: list[str], started: float,
) -> None:
    manifest = {
        "command": command,
        "config_digest": config_digest(config_path, seed_override=seed),
        "seed": run.seed,
        "tool_version": __version__,
        "outputs": sorted(outputs),
        "duration_s": round(time.monotonic() - started, 3),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Plan and evaluate indoor TRP deployments for TDOA positioning."""


config_option = click.option(
    "--config", "config_path", required=True, type=click.Path(), help="JSON run configuration."
)
out_option = click.option(
    "--out", "out_dir", required=True, type=click.Path(file_okay=False), help="Output directory."
)
seed_option = click.option(
    "--seed", type=int, default=None, help="Override the config seed (flag wins over file)."
)
threads_option = click.option(
    "--threads", type=int, default=1, show_default=True, help="Worker threads for drop evaluation."
)


@main.command("bounds")
@config_option
@out_option
@seed_option
@click.option("--cells", type=float, default=None, help="Override grid cell size in meters.")
def cmd_bounds(config_path: str, out_dir: str, seed: int | None, cells: float | None) -> None:
    """Evaluate GDOP/RMSE bound maps over the hall for each deployment."""
    started = time.monotonic()
    run = _load(config_path, seed)
    cell_size = run.cell_size if cells is None else cells
    if cell_size <= 0:
        click.echo("error: --cells must be positive", err=True)
        sys.exit(EXIT_CONFIG)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []
    try:
        for req in run.deployments:
            grid = bound_grid(run.scenario, req.deployment, cell_size=cell_size, noise=run.noise)
            _write(out, f"{req.label}_grid.csv", grid_to_csv(grid), outputs)
            _write(
                out,
                f"{req.label}_grid.json",
                json.dumps(grid_to_dict(grid)) + "\n",
                outputs,
            )
    except Exception as exc:
        click.echo(f"error: bound evaluation failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    _write_manifest(out, "bounds", config_path, seed, run, outputs, started)
    click.echo(f"wrote {len(outputs) + 1} files to {out}")


@main.command("campaign")
@config_option
@out_option
@seed_option
@threads_option
def cmd_campaign(config_path: str, out_dir: str, seed: int | None, threads: int) -> None:
    """Run Monte Carlo positioning campaigns for each deployment."""
    started = time.monotonic()
    run = _load(config_path, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []
    labeled = []
    try:
        for req in run.deployments:
            result = run_campaign(_campaign_config(run, req.deployment), n_workers=threads)
            labeled.append((req.label, result))
            _write(out, f"{req.label}_drops.csv", drops_to_csv(result), outputs)
            _write(out, f"{req.label}_cdf.csv", cdf_to_csv(result), outputs)
            _write(out, f"{req.label}_los_histogram.csv", los_histogram_to_csv(result), outputs)
    except Exception as exc:
        click.echo(f"error: campaign failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    _write(out, "percentiles.csv", percentiles_to_csv(labeled), outputs)
    _write_manifest(out, "campaign", config_path, seed, run, outputs, started)
    click.echo(f"wrote {len(outputs) + 1} files to {out}")


@main.command("densify")
@config_option
@out_option
@seed_option
@threads_option
@click.option("--k-max", type=int, default=3, show_default=True, help="Densification steps to run.")
def cmd_densify(config_path: str, out_dir: str, seed: int | None, threads: int, k_max: int) -> None:
    """Iteratively add TRPs where accuracy is worst and re-evaluate.

    Uses the first deployment of the config as the base layout.
    """
    started = time.monotonic()
    if k_max < 0:
        click.echo("error: --k-max must be >= 0", err=True)
        sys.exit(EXIT_CONFIG)
    run = _load(config_path, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []
    deployment = run.deployments[0].deployment
    labeled = []
    try:
        for step in range(k_max + 1):
            config = _campaign_config(run, deployment)
            result = run_campaign(config, n_workers=threads)
            labeled.append((f"step{step}", result))
            _write(
                out,
                f"step{step}_deployment.json",
                json.dumps(deployment_to_dict(deployment), indent=2) + "\n",
                outputs,
            )
            worst = worst_ue_locations(result, 0.1)
            worst_csv = "x_m,y_m,z_m\n" + "".join(
                f"{p[0]:.6g},{p[1]:.6g},{p[2]:.6g}\n" for p in worst
            )
            _write(out, f"step{step}_worst_ues.csv", worst_csv, outputs)
            if step < k_max:
                deployment = densification_step(config, result, 1)
    except Exception as exc:
        click.echo(f"error: densification failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    _write(out, "percentiles.csv", percentiles_to_csv(labeled), outputs)
    _write_manifest(out, "densify", config_path, seed, run, outputs, started)
    click.echo(f"wrote {len(outputs) + 1} files to {out}")


@main.command("serve")
@click.option("--bind", default="127.0.0.1:8000", show_default=True, help="host:port to listen on.")
@click.option(
    "--static-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Directory with planner UI assets to serve at /.",
)
def cmd_serve(bind: str, static_dir: str | None) -> None:
    """Serve the evaluation API (and optionally the planner UI)."""
    try:
        import uvicorn

        from .service import create_app
    except ImportError as exc:
        click.echo(f"error: service dependencies missing: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        click.echo("error: --bind must look like host:port", err=True)
        sys.exit(EXIT_CONFIG)
    app = create_app(static_dir=static_dir)
    try:
        uvicorn.run(app, host=host, port=int(port), log_level="info")
    except SystemExit:
        raise
    except Exception as exc:
        click.echo(f"error: server failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)


if __name__ == "__main__":
    main()
