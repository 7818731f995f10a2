import json

import numpy as np
import pytest

from wallscribe.contact import PenModel
from wallscribe.strokes import (
    StrokeFormatError,
    StrokePoint,
    StrokeSet,
    fit_stroke,
    image_to_wall,
    parse_strokes,
    split_chunks,
    to_waypoints,
    widths_m,
)


def doc(**overrides):
    base = {
        "format": 1,
        "width_px": 200,
        "height_px": 300,
        "scale_m_per_px": 0.001,
        "strokes": [
            {
                "points": [
                    {"x": 100, "y": 0, "w": 6},
                    {"x": 100, "y": 150, "w": 6},
                    {"x": 100, "y": 300, "w": 6},
                ]
            }
        ],
    }
    base.update(overrides)
    return json.dumps(base)


# --- parsing


def test_parse_valid_document():
    sset = parse_strokes(doc())
    assert sset.width_px == 200
    assert len(sset.strokes) == 1
    assert sset.strokes[0][0] == StrokePoint(100.0, 0.0, 6.0)


def test_parse_rejects_bad_json():
    with pytest.raises(StrokeFormatError, match="document"):
        parse_strokes("{not json")


def test_parse_rejects_wrong_format():
    with pytest.raises(StrokeFormatError, match="format"):
        parse_strokes(doc(format=2))


def test_parse_rejects_missing_key():
    d = json.loads(doc())
    del d["scale_m_per_px"]
    with pytest.raises(StrokeFormatError, match="scale_m_per_px"):
        parse_strokes(json.dumps(d))


def test_parse_names_bad_point():
    d = json.loads(doc())
    d["strokes"][0]["points"][1] = {"x": 1, "y": 2}  # missing w
    with pytest.raises(StrokeFormatError, match=r"strokes\[0\].points\[1\]"):
        parse_strokes(json.dumps(d))


def test_parse_rejects_out_of_bounds_point():
    d = json.loads(doc())
    d["strokes"][0]["points"][0]["x"] = 999
    with pytest.raises(StrokeFormatError, match="outside image bounds"):
        parse_strokes(json.dumps(d))


def test_parse_rejects_pressure_out_of_range():
    d = json.loads(doc())
    d["w_unit"] = "pressure"
    d["strokes"][0]["points"][0]["w"] = 6
    with pytest.raises(StrokeFormatError, match="pressure"):
        parse_strokes(json.dumps(d))


def test_parse_rejects_short_stroke():
    d = json.loads(doc())
    d["strokes"][0]["points"] = d["strokes"][0]["points"][:1]
    with pytest.raises(StrokeFormatError, match="at least 2"):
        parse_strokes(json.dumps(d))


def test_strokeset_rejects_bad_scale():
    with pytest.raises(StrokeFormatError, match="scale"):
        StrokeSet(width_px=10, height_px=10, scale=0.0, strokes=[])


# --- spline fitting


def test_fit_straight_stroke_stays_straight():
    pen = PenModel()
    pts = [[0.0, 0.0], [100.0, 0.0]]
    f = fit_stroke(pts, [0.006, 0.006], pen, ds=10.0)
    assert f.length == pytest.approx(100.0, rel=1e-6)
    assert np.allclose(f.points[:, 1], 0.0, atol=1e-9)
    # uniform arc-length resampling
    gaps = np.linalg.norm(np.diff(f.points, axis=0), axis=1)
    assert np.allclose(gaps, gaps[0], rtol=1e-6)


def test_fit_clamps_widths_to_pen_range():
    pen = PenModel()
    f = fit_stroke(
        [[0, 0], [50, 0], [100, 0]], [0.0, 0.05, 0.0], pen, ds=10.0
    )
    assert np.all(f.widths >= pen.w_min - 1e-12)
    assert np.all(f.widths <= pen.w_max + 1e-12)


def test_fit_semicircle_curvature():
    pen = PenModel()
    th = np.linspace(0, np.pi, 20)
    r = 100.0
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    f = fit_stroke(pts, np.full(20, 0.006), pen, ds=5.0, max_curvature=1.0)
    # curvature flags compare against the analytic circle: kappa = 1/r
    assert not f.curvature_flags.any()
    f2 = fit_stroke(pts, np.full(20, 0.006), pen, ds=5.0, max_curvature=0.5 / r)
    interior = f2.curvature_flags[2:-2]
    assert interior.any()


def test_fit_dedups_repeated_points():
    pen = PenModel()
    f = fit_stroke(
        [[0, 0], [0, 0], [100, 0]], [0.006, 0.006, 0.006], pen, ds=10.0
    )
    assert f.length == pytest.approx(100.0, rel=1e-6)


def test_fit_rejects_degenerate_stroke():
    with pytest.raises(ValueError):
        fit_stroke([[1, 1], [1, 1]], [0.006, 0.006], PenModel(), ds=10.0)


# --- image-to-wall mapping


def test_image_to_wall_anchor_and_axes(surface, frame):
    sset = parse_strokes(doc(anchor_m=[-0.1, 0.3]))
    # image origin lands at anchor: horizontal -0.1 m (leftward), 0.3 m up
    p = image_to_wall(sset, surface, np.array([[0.0, 0.0]]))[0]
    assert np.allclose(p, surface.p0 - 0.1 * (-frame.t_y) + 0.3 * frame.t_z)
    # +x in the image is rightward = -t_y; +y is down
    p2 = image_to_wall(sset, surface, np.array([[100.0, 100.0]]))[0]
    assert np.allclose(p2, surface.p0 + np.array([0.0, 0.0, 0.2]))


def test_widths_px_vs_pressure():
    pen = PenModel()
    sset = parse_strokes(doc())
    assert np.allclose(widths_m(sset, pen, np.array([6.0])), 0.006)
    pset = parse_strokes(
        doc(
            w_unit="pressure",
            strokes=[
                {
                    "points": [
                        {"x": 0, "y": 0, "w": 0.0},
                        {"x": 10, "y": 0, "w": 1.0},
                    ]
                }
            ],
        )
    )
    out = widths_m(pset, pen, np.array([0.0, 0.5, 1.0]))
    assert out[0] == pytest.approx(pen.w_min)
    assert out[2] == pytest.approx(pen.w_max)
    assert out[1] == pytest.approx(0.5 * (pen.w_min + pen.w_max))


# --- waypoint emission


def test_to_waypoints_structure(cfg, surface):
    pen = PenModel()
    sset = parse_strokes(doc())
    pwps = to_waypoints(sset, surface, pen, ds=0.05, lift=0.05)
    contact = [pw for pw in pwps if pw.contact]
    free = [pw for pw in pwps if not pw.contact]
    # 0.3 m stroke at 0.05 m spacing: 7 contact waypoints
    assert len(contact) == 7
    # constant 6 mm width with the default linear pen: F = 2 N everywhere
    assert all(pw.waypoint.F == pytest.approx(2.0) for pw in contact)
    assert all(abs(pw.waypoint.p_c[0] - 2.0) < 1e-9 for pw in contact)
    # bracketing: first two free points are the lift and pre-touch offsets
    assert pwps[0].waypoint.F == 0.0
    assert pwps[0].waypoint.p_c[0] == pytest.approx(2.0 - 0.05)
    assert pwps[1].waypoint.p_c[0] == pytest.approx(2.0 - 0.005)
    # ramp waypoints dwell on the wall while the force builds
    ramp = [pw for pw in free if abs(pw.waypoint.p_c[0] - 2.0) < 1e-9]
    assert any(0.0 < pw.waypoint.F < 2.0 for pw in ramp)
    # the sequence ends off the wall at zero force
    assert pwps[-1].waypoint.F == 0.0
    assert pwps[-1].waypoint.p_c[0] == pytest.approx(2.0 - 0.05)


def test_to_waypoints_two_strokes_has_lift_between(surface):
    pen = PenModel()
    d = json.loads(doc())
    d["strokes"].append(
        {
            "points": [
                {"x": 40, "y": 100, "w": 6},
                {"x": 160, "y": 100, "w": 6},
            ]
        }
    )
    pwps = to_waypoints(parse_strokes(json.dumps(d)), surface, pen)
    sids = [pw.stroke_id for pw in pwps]
    assert set(sids) == {0, 1}
    boundary = max(i for i, s in enumerate(sids) if s == 0)
    assert pwps[boundary].waypoint.F == 0.0
    assert pwps[boundary + 1].waypoint.F == 0.0


def test_to_waypoints_clamps_unreachable_width(surface):
    pen = PenModel()
    d = json.loads(doc())
    for pt in d["strokes"][0]["points"]:
        pt["w"] = 40  # 40 px = 40 mm >> w_max
    pwps = to_waypoints(parse_strokes(json.dumps(d)), surface, pen)
    contact = [pw for pw in pwps if pw.contact]
    assert contact
    assert all(pw.waypoint.F == pytest.approx(pen.F_max) for pw in contact)


def test_split_chunks_per_stroke(surface):
    pen = PenModel()
    d = json.loads(doc())
    d["strokes"].append(
        {
            "points": [
                {"x": 40, "y": 100, "w": 6},
                {"x": 160, "y": 100, "w": 6},
            ]
        }
    )
    pwps = to_waypoints(parse_strokes(json.dumps(d)), surface, pen)
    chunks = split_chunks(pwps)
    assert len(chunks) == 2
    # the second chunk starts where the first ended (shared boundary)
    assert np.allclose(chunks[0][-1].p_c, chunks[1][0].p_c)


def test_split_chunks_rejects_empty():
    with pytest.raises(ValueError):
        split_chunks([])
