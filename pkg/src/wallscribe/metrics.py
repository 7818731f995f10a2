"""Rasterize pen output from a simulation log and score it: IoU and the
intersection/union ratios against a target raster, plus RMSE of position
and contact force against the reference trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contact import PenModel, Surface, contact_frame, linewidth


@dataclass(frozen=True)
class Raster:
    """Binary occupancy grid over a wall-plane window.

    Pixel (row, col) covers the point origin + (col+0.5)/res horizontally
    and -(row+0.5)/res vertically (image convention: row 0 on top)."""

    grid: np.ndarray        # (h, w) bool
    resolution: float       # px per meter
    origin: np.ndarray      # wall-plane coords (horizontal, vertical) of the
                            # top-left corner, meters

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be > 0")
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=bool))
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))

    @property
    def area_px(self) -> int:
        return int(np.count_nonzero(self.grid))


def wall_coords(surface: Surface, points: np.ndarray) -> np.ndarray:
    """World points -> in-plane (horizontal, vertical) coordinates relative
    to the surface anchor point, using the same axes as the stroke mapper
    (horizontal = -t_y, vertical = t_z)."""
    frame = contact_frame(surface, np.array([0.0, 0.0, -1.0]))
    rel = np.atleast_2d(points) - surface.p0
    return np.column_stack([rel @ (-frame.t_y), rel @ frame.t_z])


def _stamp(grid: np.ndarray, cx: float, cy: float, r_px: float):
    """OR a filled disk into the grid (pixel-center coverage)."""
    h, w = grid.shape
    r = max(r_px, 0.5)
    x0, x1 = int(np.floor(cx - r)), int(np.ceil(cx + r))
    y0, y1 = int(np.floor(cy - r)), int(np.ceil(cy + r))
    x0, x1 = max(x0, 0), min(x1, w - 1)
    y0, y1 = max(y0, 0), min(y1, h - 1)
    if x0 > x1 or y0 > y1:
        return
    xs = np.arange(x0, x1 + 1) + 0.5
    ys = np.arange(y0, y1 + 1) + 0.5
    dx = xs[None, :] - cx
    dy = ys[:, None] - cy
    grid[y0 : y1 + 1, x0 : x1 + 1] |= dx**2 + dy**2 <= r * r


def blank_raster(
    origin: np.ndarray, size_m: tuple, resolution: float = 2000.0
) -> Raster:
    w = int(np.ceil(size_m[0] * resolution))
    h = int(np.ceil(size_m[1] * resolution))
    return Raster(
        grid=np.zeros((h, w), dtype=bool), resolution=resolution, origin=origin
    )


def render(
    log,
    surface: Surface,
    pen: PenModel,
    resolution: float = 2000.0,
    window: Raster | None = None,
    margin: float = 0.02,
) -> Raster:
    """Stamp-union rendering of a SimLog: one filled disk of the pen
    linewidth at the tip's wall position for every contact tick."""
    if not log.records:
        raise ValueError("cannot render an empty log")
    pts = np.array([r.meas.ee.p for r in log.records])
    plane = wall_coords(surface, pts)
    contact = np.array([r.meas.F > 0 for r in log.records])
    if window is None:
        if contact.any():
            lo = plane[contact].min(axis=0) - margin
            hi = plane[contact].max(axis=0) + margin
        else:
            lo, hi = plane.min(axis=0) - margin, plane.max(axis=0) + margin
        origin = np.array([lo[0], hi[1]])  # top-left: min horizontal, max vertical
        out = blank_raster(origin, (hi[0] - lo[0], hi[1] - lo[1]), resolution)
    else:
        out = Raster(
            grid=np.zeros_like(window.grid),
            resolution=window.resolution,
            origin=window.origin,
        )
    res = out.resolution
    for rec, (hx, vy), c in zip(log.records, plane, contact):
        if not c:
            continue
        w = linewidth(pen, rec.meas.F)
        cx = (hx - out.origin[0]) * res
        cy = (out.origin[1] - vy) * res
        _stamp(out.grid, cx, cy, 0.5 * w * res)
    return out


def render_target(
    waypoints: np.ndarray,
    widths: np.ndarray,
    surface: Surface,
    resolution: float = 2000.0,
    margin: float = 0.02,
    spacing: float | None = None,
    window: Raster | None = None,
) -> Raster:
    """Reference raster: the target strokes stamped directly (world points
    + linewidths), densified so stamps overlap.  Pass `window` to stamp
    into an existing grid (multi-stroke targets share one raster)."""
    plane = wall_coords(surface, np.asarray(waypoints))
    if window is None:
        lo = plane.min(axis=0) - margin
        hi = plane.max(axis=0) + margin
        out = blank_raster(
            np.array([lo[0], hi[1]]), (hi[0] - lo[0], hi[1] - lo[1]), resolution
        )
    else:
        out = window
    spacing = spacing if spacing is not None else 0.5 / resolution
    res = out.resolution
    for i in range(len(plane) - 1):
        a, b = plane[i], plane[i + 1]
        wa, wb = widths[i], widths[i + 1]
        n = max(2, int(np.ceil(np.linalg.norm(b - a) / spacing)) + 1)
        for lam in np.linspace(0.0, 1.0, n):
            p = (1 - lam) * a + lam * b
            w = (1 - lam) * wa + lam * wb
            _stamp(
                out.grid,
                (p[0] - out.origin[0]) * res,
                (out.origin[1] - p[1]) * res,
                0.5 * w * res,
            )
    return out


def iou(written: Raster, target: Raster) -> dict:
    """IoU plus the paper-style ratios, both relative to the target area."""
    if written.grid.shape != target.grid.shape:
        raise ValueError("raster dimensions differ")
    if written.resolution != target.resolution:
        raise ValueError("raster resolutions differ")
    T = target.area_px
    if T == 0:
        raise ValueError("empty target raster")
    inter = int(np.count_nonzero(written.grid & target.grid))
    union = int(np.count_nonzero(written.grid | target.grid))
    return {
        "iou": inter / union if union else 0.0,
        "intersection_ratio": inter / T,
        "union_ratio": union / T,
    }


def rmse(log, traj, mode: str, t_B_E: np.ndarray | None = None) -> float:
    """Root-mean-square tracking error over the log.

    mode 'ee_pos': end-effector position (m); 'base_pos': body origin
    reconstructed via t_B_E (needs traj params-free geometry: the offset is
    rotated by each sample's attitude); 'force': contact force (N) over
    ticks with reference force on."""
    if not log.records:
        raise ValueError("empty log")
    if t_B_E is None:
        from .model import UamParams

        t_B_E = UamParams().t_B_E
    refs = traj.samples
    errs = []
    for rec in log.records:
        ref = refs[rec.ref_index]
        if mode == "ee_pos":
            errs.append(rec.meas.ee.p - ref.state.ee.p)
        elif mode == "base_pos":
            # base = ee - R t_B_E in world; offset identical on both sides
            e = (rec.meas.ee.p - rec.meas.ee.R @ t_B_E) - (
                ref.state.ee.p - ref.state.ee.R @ t_B_E
            )
            errs.append(e)
        elif mode == "force":
            if ref.state.F > 0:
                errs.append([rec.meas.F - ref.state.F])
        else:
            raise ValueError(f"unknown rmse mode {mode!r}")
    if not errs:
        return 0.0
    E = np.asarray(errs, dtype=float)
    return float(np.sqrt(np.mean(np.sum(E * E, axis=1))))
