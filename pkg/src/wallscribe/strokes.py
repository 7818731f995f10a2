"""Stroke ingestion: parse stroke documents, fit smooth splines with
linewidth handling, map image coordinates onto the wall, and emit planner
waypoints with lift points between strokes.

Image convention: x to the right, y down, origin at the top-left corner.
On the wall, image x maps to the horizontal writing direction (-t_y for
the standard frame, i.e. rightward as seen by a viewer facing the wall)
and image y maps to -t_z (down).  The anchor places the image origin on
the surface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .contact import PenModel, Surface, contact_frame, force_for_width
from .planner import Waypoint


class StrokeFormatError(ValueError):
    """Document does not match the stroke schema; message names the field."""


@dataclass(frozen=True)
class StrokePoint:
    x: float  # px
    y: float  # px
    w: float  # width in px, or pressure in [0, 1]


@dataclass(frozen=True)
class StrokeSet:
    width_px: int
    height_px: int
    scale: float           # m per px
    strokes: list          # list[list[StrokePoint]]
    w_unit: str = "px"     # "px" | "pressure"
    anchor: np.ndarray = field(default_factory=lambda: np.zeros(2))
    # anchor: wall-plane coordinates (horizontal, vertical in meters) of the
    # image origin, measured in the surface tangent axes

    def __post_init__(self):
        if self.scale <= 0:
            raise StrokeFormatError("scale_m_per_px: must be > 0")
        if self.w_unit not in ("px", "pressure"):
            raise StrokeFormatError(f"w_unit: unknown unit {self.w_unit!r}")
        for i, s in enumerate(self.strokes):
            if len(s) < 2:
                raise StrokeFormatError(f"strokes[{i}]: needs at least 2 points")
            for j, pt in enumerate(s):
                if not (0 <= pt.x <= self.width_px and 0 <= pt.y <= self.height_px):
                    raise StrokeFormatError(
                        f"strokes[{i}].points[{j}]: outside image bounds"
                    )
                if self.w_unit == "pressure" and not (0.0 <= pt.w <= 1.0):
                    raise StrokeFormatError(
                        f"strokes[{i}].points[{j}]: pressure outside [0, 1]"
                    )


def parse_strokes(text: str) -> StrokeSet:
    """Parse and validate a stroke document (format 1)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise StrokeFormatError(f"document: not valid JSON ({e})") from e
    if not isinstance(doc, dict):
        raise StrokeFormatError("document: expected an object")
    if doc.get("format") != 1:
        raise StrokeFormatError("format: must be 1")
    for key in ("width_px", "height_px", "scale_m_per_px", "strokes"):
        if key not in doc:
            raise StrokeFormatError(f"{key}: missing")
    strokes = []
    for i, s in enumerate(doc["strokes"]):
        pts = s.get("points")
        if not isinstance(pts, list):
            raise StrokeFormatError(f"strokes[{i}].points: missing or not a list")
        parsed = []
        for j, pt in enumerate(pts):
            try:
                parsed.append(
                    StrokePoint(float(pt["x"]), float(pt["y"]), float(pt["w"]))
                )
            except (KeyError, TypeError, ValueError) as e:
                raise StrokeFormatError(
                    f"strokes[{i}].points[{j}]: expected x, y, w numbers"
                ) from e
        strokes.append(parsed)
    anchor = np.asarray(doc.get("anchor_m", [0.0, 0.0]), dtype=float)
    return StrokeSet(
        width_px=int(doc["width_px"]),
        height_px=int(doc["height_px"]),
        scale=float(doc["scale_m_per_px"]),
        strokes=strokes,
        w_unit=doc.get("w_unit", "px"),
        anchor=anchor,
    )


@dataclass(frozen=True)
class FittedStroke:
    points: np.ndarray          # (n, 2) image px, uniformly spaced in arc length
    widths: np.ndarray          # (n,) meters, clamped
    curvature_flags: np.ndarray  # (n,) True where curvature exceeded the cap
    length: float               # arc length, px


def _dedup(points: np.ndarray, widths: np.ndarray):
    keep = [0]
    for i in range(1, len(points)):
        if np.linalg.norm(points[i] - points[keep[-1]]) > 1e-12:
            keep.append(i)
    return points[keep], widths[keep]


def fit_stroke(
    points,
    widths,
    pen: PenModel,
    ds: float = 10.0,
    max_curvature: float | None = None,
) -> FittedStroke:
    """Natural cubic spline through the points (chord-length parameter),
    resampled at uniform arc length ds (px).  Widths are splined along and
    clamped to the pen's range; curvature violations are flagged, never
    silently smoothed away."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    ws = np.asarray(widths, dtype=float).reshape(-1)
    if len(pts) != len(ws):
        raise ValueError("points and widths must have equal length")
    pts, ws = _dedup(pts, ws)
    if len(pts) < 2:
        raise ValueError("stroke collapsed to a single point")

    chord = np.concatenate(
        [[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))]
    )
    if len(pts) == 2:
        # CubicSpline needs 3 points; a segment is exactly linear anyway
        spline = CubicSpline(chord, pts, axis=0, bc_type=((2, [0, 0]), (2, [0, 0])))
    else:
        spline = CubicSpline(chord, pts, axis=0, bc_type="natural")
    wspline = (
        CubicSpline(chord, ws, bc_type="natural")
        if len(pts) >= 3
        else CubicSpline(chord, ws, bc_type=((2, 0.0), (2, 0.0)))
    )

    # arc length by dense sampling of the chord parameter
    dense = np.linspace(0.0, chord[-1], max(200, 20 * len(pts)))
    dp = spline(dense, 1)
    speed = np.linalg.norm(dp, axis=1)
    arclen = np.concatenate(
        [[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(dense))]
    )
    L = float(arclen[-1])
    n = max(2, int(np.ceil(L / ds)) + 1)
    s_targets = np.linspace(0.0, L, n)
    u = np.interp(s_targets, arclen, dense)

    out_pts = spline(u)
    out_w = np.clip(wspline(u), pen.w_min, pen.w_max)
    d1 = spline(u, 1)
    d2 = spline(u, 2)
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    sp = np.linalg.norm(d1, axis=1)
    kappa = np.abs(cross) / np.maximum(sp**3, 1e-12)
    flags = (
        kappa > max_curvature
        if max_curvature is not None
        else np.zeros(n, dtype=bool)
    )
    return FittedStroke(
        points=out_pts, widths=out_w, curvature_flags=flags, length=L
    )


@dataclass(frozen=True)
class PlannedWaypoint:
    waypoint: Waypoint
    contact: bool
    stroke_id: int


def image_to_wall(
    sset: StrokeSet, surface: Surface, xy_px: np.ndarray
) -> np.ndarray:
    """Map image pixel coordinates to world points on the surface plane."""
    frame = contact_frame(surface, np.array([0.0, 0.0, -1.0]))
    horiz = -frame.t_y  # rightward for a viewer facing the wall
    up = frame.t_z
    xy = np.atleast_2d(np.asarray(xy_px, dtype=float))
    h = sset.anchor[0] + xy[:, 0] * sset.scale
    v = sset.anchor[1] - xy[:, 1] * sset.scale
    return surface.p0 + h[:, None] * horiz + v[:, None] * up


def widths_m(sset: StrokeSet, pen: PenModel, w_raw: np.ndarray) -> np.ndarray:
    """Raw stroke widths to meters: px scaled, or pressure mapped linearly
    onto [w_min, w_max]."""
    w = np.asarray(w_raw, dtype=float)
    if sset.w_unit == "pressure":
        return pen.w_min + w * (pen.w_max - pen.w_min)
    return w * sset.scale


def _ramp(Fa: float, Fb: float, step: float = 0.5) -> list:
    """Force values from Fa (inclusive) towards Fb (exclusive) in steps of
    at most `step`."""
    n = max(1, int(np.ceil(abs(Fb - Fa) / step)))
    return [Fa + (Fb - Fa) * k / n for k in range(n)]


def to_waypoints(
    sset: StrokeSet,
    surface: Surface,
    pen: PenModel,
    ds: float = 0.03,
    lift: float = 0.05,
    touch_offset: float = 0.005,
) -> list[PlannedWaypoint]:
    """Fit every stroke, sample contact waypoints every ds meters, convert
    widths to forces, and bracket each stroke with F=0 lift waypoints at
    distance `lift` off the wall.  A pre-touch waypoint `touch_offset` off
    the surface slows the final approach (the planner profiles speed from
    rest-to-rest hops), keeping the touch-down impact gentle."""
    out: list[PlannedWaypoint] = []
    clamped_any = False
    for sid, stroke in enumerate(sset.strokes):
        pts = np.array([[p.x, p.y] for p in stroke])
        ws = widths_m(sset, pen, np.array([p.w for p in stroke]))
        fitted = fit_stroke(pts, ws, pen, ds=ds / sset.scale)
        wall_pts = image_to_wall(sset, surface, fitted.points)
        forces = np.empty(len(wall_pts))
        for i, w in enumerate(fitted.widths):
            forces[i], c = force_for_width(pen, float(w))
            clamped_any |= c
        off = lift * surface.n_in
        near = touch_offset * surface.n_in
        out.append(
            PlannedWaypoint(
                Waypoint(wall_pts[0] - off, 0.0), contact=False, stroke_id=sid
            )
        )
        out.append(
            PlannedWaypoint(
                Waypoint(wall_pts[0] - near, 0.0), contact=False, stroke_id=sid
            )
        )
        # touch down at zero force and ramp up while dwelling on the wall
        # (and mirror that on release), so the reference never asks for
        # contact force the plant cannot produce off the surface; the ramp
        # is pinned every <= 0.5 N so its knots cannot wander off the spot
        for F in _ramp(0.0, float(forces[0])):
            out.append(
                PlannedWaypoint(Waypoint(wall_pts[0], F), contact=False, stroke_id=sid)
            )
        for p, F in zip(wall_pts, forces):
            out.append(PlannedWaypoint(Waypoint(p, float(F)), True, sid))
        for F in _ramp(float(forces[-1]), 0.0)[1:] + [0.0]:
            out.append(
                PlannedWaypoint(
                    Waypoint(wall_pts[-1], F), contact=False, stroke_id=sid
                )
            )
        out.append(
            PlannedWaypoint(
                Waypoint(wall_pts[-1] - near, 0.0), contact=False, stroke_id=sid
            )
        )
        out.append(
            PlannedWaypoint(
                Waypoint(wall_pts[-1] - off, 0.0), contact=False, stroke_id=sid
            )
        )
    if clamped_any:
        import warnings

        warnings.warn("some requested widths were outside the pen range")
    return out


def split_chunks(planned: list) -> list:
    """Group planned waypoints into per-stroke chunks for the planner, each
    prefixed with the previous stroke's final lift point so the free hop
    between strokes is covered."""
    if not planned:
        raise ValueError("no waypoints to split")
    chunks: list[list[Waypoint]] = []
    current_sid = None
    for pw in planned:
        if pw.stroke_id != current_sid:
            prev_tail = [chunks[-1][-1]] if chunks else []
            chunks.append(prev_tail + [pw.waypoint])
            current_sid = pw.stroke_id
        else:
            chunks[-1].append(pw.waypoint)
    return chunks
