"""End-to-end orchestration: strokes document -> waypoints -> plan ->
simulate -> render -> score.  Shared by the CLI and the HTTP service so
both produce identical artifacts for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import metrics, planner, sim, strokes
from .config import AppConfig
from .contact import linewidth


@dataclass
class PlanResult:
    trajectory: planner.Trajectory
    waypoints: list            # list[strokes.PlannedWaypoint]
    reports: list              # per-chunk solver violation reports
    baseline: bool = False


def plan_strokes(
    sset: strokes.StrokeSet,
    cfg: AppConfig,
    baseline: bool = False,
    max_speed: float | None = None,
) -> PlanResult:
    """Plan a stroke set: one NLP per stroke (or the equal-speed baseline
    when `baseline` is set).  `max_speed` overrides the planner's velocity
    norm cap (speed-study knob); for the baseline it is the constant
    traversal speed."""
    surface = cfg.surface.build()
    pen = cfg.pen.build()
    params = cfg.vehicle.build()
    cp = cfg.contact.build()
    weights = cfg.planner.build()
    if max_speed is not None:
        if max_speed <= 0:
            raise ValueError("max speed must be positive")
        weights = replace(weights, v_norm_max=max_speed)
    pwps = strokes.to_waypoints(
        sset,
        surface,
        pen,
        ds=cfg.planner.waypoint_spacing,
        lift=cfg.planner.lift,
    )
    if baseline:
        speed = max_speed if max_speed is not None else weights.v_norm_max
        traj = planner.plan_baseline(
            [pw.waypoint for pw in pwps], speed, weights.dt, surface, params, cp
        )
        return PlanResult(traj, pwps, reports=[], baseline=True)
    chunks = strokes.split_chunks(pwps)
    traj, raws = planner.plan(chunks, surface, params, weights, cp=cp)
    return PlanResult(traj, pwps, reports=[r.violations for r in raws])


def target_raster(
    pwps: list,
    cfg: AppConfig,
    margin: float = 0.02,
) -> metrics.Raster:
    """Reference raster over all strokes' contact waypoints."""
    surface = cfg.surface.build()
    pen = cfg.pen.build()
    contact = [pw for pw in pwps if pw.contact]
    if not contact:
        raise ValueError("no contact waypoints in the plan")
    pts = np.array([pw.waypoint.p_c for pw in contact])
    plane = metrics.wall_coords(surface, pts)
    lo = plane.min(axis=0) - margin
    hi = plane.max(axis=0) + margin
    out = metrics.blank_raster(
        np.array([lo[0], hi[1]]),
        (hi[0] - lo[0], hi[1] - lo[1]),
        cfg.raster_resolution,
    )
    for sid in sorted({pw.stroke_id for pw in contact}):
        sel = [pw for pw in contact if pw.stroke_id == sid]
        metrics.render_target(
            np.array([pw.waypoint.p_c for pw in sel]),
            np.array([linewidth(pen, pw.waypoint.F) for pw in sel]),
            surface,
            window=out,
        )
    return out


def simulate(
    traj: planner.Trajectory,
    cfg: AppConfig,
    seed: int | None = None,
    contact_compensation: bool | None = None,
    on_record=None,
) -> sim.SimLog:
    plant = cfg.plant.build()
    if seed is not None:
        plant = replace(plant, seed=seed)
    mg, fg = cfg.gains.build()
    cc = (
        contact_compensation
        if contact_compensation is not None
        else cfg.contact_compensation
    )
    return sim.run(
        traj,
        cfg.surface.build(),
        cfg.vehicle.build(),
        cfg.contact.build(),
        cfg.pen.build(),
        plant,
        mg,
        fg,
        contact_compensation=cc,
        on_record=on_record,
    )


def evaluate(
    log: sim.SimLog,
    traj: planner.Trajectory,
    target: metrics.Raster,
    cfg: AppConfig,
) -> dict:
    """Metrics report: RMSE family, IoU family, and run bookkeeping."""
    surface = cfg.surface.build()
    pen = cfg.pen.build()
    params = cfg.vehicle.build()
    written = metrics.render(log, surface, pen, window=target)
    report = metrics.iou(written, target)
    report.update(
        {
            "rmse_ee_pos": metrics.rmse(log, traj, "ee_pos", params.t_B_E),
            "rmse_base_pos": metrics.rmse(log, traj, "base_pos", params.t_B_E),
            "rmse_force": metrics.rmse(log, traj, "force", params.t_B_E),
            "duration": traj.duration(),
            "ticks": len(log),
            "aborted": log.aborted,
            "seed": log.seed,
        }
    )
    return report
