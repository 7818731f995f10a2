"""Command-line entry points for every pipeline stage.

Exit codes: 0 success, 1 runtime failure (infeasible plan, diverged sim),
2 malformed input.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import pipeline, recordio
from .config import load_config
from .letters import letter_strokes
from .metrics import Raster
from .planner import PlannerInfeasible
from .sim import SimulationDiverged
from .strokes import StrokeFormatError, parse_strokes


def _config(path):
    return load_config(path)


def raster_png(raster: Raster, path: str | Path):
    """Write a raster as a PNG (ink black on white)."""
    from PIL import Image

    img = Image.fromarray(
        np.where(raster.grid, 0, 255).astype(np.uint8), mode="L"
    )
    img.save(path, format="PNG")


@click.group()
def main():
    """Aerial calligraphy: plan, simulate, render and score wall writing."""


@main.command()
@click.argument("strokes_file", type=click.Path(exists=True))
@click.option("-o", "--out", required=True, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--baseline-planning", is_flag=True, default=False)
@click.option("--max-speed", default=None, type=float)
def plan(strokes_file, out, config_path, baseline_planning, max_speed):
    """Plan a trajectory from a strokes document."""
    cfg = _config(config_path)
    try:
        sset = parse_strokes(Path(strokes_file).read_text())
    except StrokeFormatError as e:
        click.echo(f"invalid strokes file: {e}", err=True)
        sys.exit(2)
    try:
        res = pipeline.plan_strokes(
            sset, cfg, baseline=baseline_planning, max_speed=max_speed
        )
    except PlannerInfeasible as e:
        click.echo(f"plan infeasible: {e}", err=True)
        for k, v in sorted(e.report.items(), key=lambda kv: -kv[1]):
            click.echo(f"  {k}: {v:.3e}", err=True)
        sys.exit(1)
    Path(out).write_text(recordio.dump_trajectory(res.trajectory))
    click.echo(
        f"planned {res.trajectory.duration():.2f} s, "
        f"{len(res.trajectory)} samples -> {out}"
    )


@main.command()
@click.argument("trajectory_file", type=click.Path(exists=True))
@click.option("-o", "--out", required=True, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--seed", default=None, type=int)
@click.option("--no-contact-compensation", is_flag=True, default=False)
def sim(trajectory_file, out, config_path, seed, no_contact_compensation):
    """Simulate a planned trajectory in closed loop."""
    cfg = _config(config_path)
    try:
        traj = recordio.load_trajectory(Path(trajectory_file).read_text())
    except ValueError as e:
        click.echo(f"invalid trajectory file: {e}", err=True)
        sys.exit(2)
    try:
        log = pipeline.simulate(
            traj,
            cfg,
            seed=seed,
            contact_compensation=not no_contact_compensation,
        )
    except SimulationDiverged as e:
        Path(out).write_text(recordio.dump_log(e.log))
        click.echo(f"simulation diverged: {e} (partial log -> {out})", err=True)
        sys.exit(1)
    Path(out).write_text(recordio.dump_log(log))
    click.echo(f"simulated {len(log)} ticks -> {out}")


@main.command()
@click.argument("log_file", type=click.Path(exists=True))
@click.option("-o", "--out", required=True, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option(
    "--strokes",
    "strokes_file",
    default=None,
    type=click.Path(exists=True),
    help="window the image on the target strokes instead of the written ink",
)
def render(log_file, out, config_path, strokes_file):
    """Render the ink written during a simulation to a PNG."""
    from . import metrics

    cfg = _config(config_path)
    try:
        log = recordio.load_log(Path(log_file).read_text())
    except ValueError as e:
        click.echo(f"invalid log file: {e}", err=True)
        sys.exit(2)
    window = None
    if strokes_file is not None:
        sset = parse_strokes(Path(strokes_file).read_text())
        pwps = pipeline.strokes.to_waypoints(
            sset,
            cfg.surface.build(),
            cfg.pen.build(),
            ds=cfg.planner.waypoint_spacing,
            lift=cfg.planner.lift,
        )
        window = pipeline.target_raster(pwps, cfg)
        window = Raster(
            grid=np.zeros_like(window.grid),
            resolution=window.resolution,
            origin=window.origin,
        )
    written = metrics.render(
        log,
        cfg.surface.build(),
        cfg.pen.build(),
        resolution=cfg.raster_resolution,
        window=window,
    )
    raster_png(written, out)
    click.echo(f"rendered {written.grid.shape[1]}x{written.grid.shape[0]} -> {out}")


@main.command()
@click.argument("log_file", type=click.Path(exists=True))
@click.option("--trajectory", required=True, type=click.Path(exists=True))
@click.option("--strokes", "strokes_file", required=True, type=click.Path(exists=True))
@click.option("-o", "--out", default=None, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path())
def eval(log_file, trajectory, strokes_file, out, config_path):
    """Score a simulation log against its trajectory and target strokes."""
    cfg = _config(config_path)
    try:
        log = recordio.load_log(Path(log_file).read_text())
        traj = recordio.load_trajectory(Path(trajectory).read_text())
        sset = parse_strokes(Path(strokes_file).read_text())
    except (ValueError, StrokeFormatError) as e:
        click.echo(f"invalid input: {e}", err=True)
        sys.exit(2)
    pwps = pipeline.strokes.to_waypoints(
        sset,
        cfg.surface.build(),
        cfg.pen.build(),
        ds=cfg.planner.waypoint_spacing,
        lift=cfg.planner.lift,
    )
    target = pipeline.target_raster(pwps, cfg)
    report = pipeline.evaluate(log, traj, target, cfg)
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    click.echo(text)


@main.command()
@click.argument("letter")
@click.option("-d", "--outdir", default="demo_out", type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--seed", default=None, type=int)
@click.option("--baseline-planning", is_flag=True, default=False)
@click.option("--no-contact-compensation", is_flag=True, default=False)
@click.option("--max-speed", default=None, type=float)
def demo(
    letter,
    outdir,
    config_path,
    seed,
    baseline_planning,
    no_contact_compensation,
    max_speed,
):
    """Run the full pipeline on a built-in letter."""
    cfg = _config(config_path)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        sset = letter_strokes(letter)
    except KeyError as e:
        click.echo(str(e), err=True)
        sys.exit(2)
    try:
        res = pipeline.plan_strokes(
            sset, cfg, baseline=baseline_planning, max_speed=max_speed
        )
    except PlannerInfeasible as e:
        click.echo(f"plan infeasible: {e}", err=True)
        sys.exit(1)
    (outdir / "trajectory.txt").write_text(
        recordio.dump_trajectory(res.trajectory)
    )
    try:
        log = pipeline.simulate(
            res.trajectory,
            cfg,
            seed=seed,
            contact_compensation=not no_contact_compensation,
        )
    except SimulationDiverged as e:
        (outdir / "log.txt").write_text(recordio.dump_log(e.log))
        click.echo(f"simulation diverged: {e}", err=True)
        sys.exit(1)
    (outdir / "log.txt").write_text(recordio.dump_log(log))
    target = pipeline.target_raster(res.waypoints, cfg)
    from . import metrics

    written = metrics.render(
        log, cfg.surface.build(), cfg.pen.build(), window=target
    )
    raster_png(written, outdir / "render.png")
    raster_png(target, outdir / "target.png")
    report = pipeline.evaluate(log, res.trajectory, target, cfg)
    (outdir / "metrics.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    click.echo(json.dumps(report, indent=2, sort_keys=True))


@main.command()
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--workspace", default="jobs", type=click.Path())
def serve(port, host, config_path, workspace):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(config_path=config_path, workspace=workspace)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
