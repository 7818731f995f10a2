"""Built-in demo glyphs as stroke documents.

Each letter is a small stroke set in image coordinates (pixels, y down)
with a metric scale and an anchor that centers the glyph on the default
surface.  The 'I' used by the demo is a single 0.30 m vertical stem of
constant width.
"""

from __future__ import annotations

import numpy as np

from .strokes import StrokePoint, StrokeSet

# 1 mm per pixel, 300 px tall working image
_SCALE = 0.001


def _stroke(points) -> list:
    return [StrokePoint(float(x), float(y), float(w)) for x, y, w in points]


def letter_strokes(name: str, width_m: float = 0.006) -> StrokeSet:
    """Stroke set for a demo letter.  `width_m` is the pen linewidth used
    for every stroke (constant-width glyphs)."""
    w_px = width_m / _SCALE
    glyphs = {
        # single stem: the canonical demo letter
        "I": [
            _stroke([(100, y, w_px) for y in np.linspace(0, 300, 8)]),
        ],
        # stem plus two horizontal bars
        "L": [
            _stroke([(40, y, w_px) for y in np.linspace(0, 300, 8)]),
            _stroke([(x, 300, w_px) for x in np.linspace(40, 160, 5)]),
        ],
        "T": [
            _stroke([(x, 0, w_px) for x in np.linspace(20, 180, 5)]),
            _stroke([(100, y, w_px) for y in np.linspace(0, 300, 8)]),
        ],
    }
    if name not in glyphs:
        raise KeyError(f"no built-in letter {name!r}: have {sorted(glyphs)}")
    strokes = glyphs[name]
    width_px = 200
    height_px = 300
    # center the glyph horizontally on the surface anchor point and place
    # its baseline at the anchor height
    anchor = np.array([-0.5 * width_px * _SCALE, height_px * _SCALE])
    return StrokeSet(
        width_px=width_px,
        height_px=height_px,
        scale=_SCALE,
        strokes=strokes,
        w_unit="px",
        anchor=anchor,
    )
