/** Stroke capture: pointer samples with pressure, undo/clear, and export
 * to the stroke-document schema the planning service accepts. */

export interface PointerSample {
  x: number;
  y: number;
  pressure: number; // 0..1; devices without pressure report 0
  t: number;        // ms timestamp
}

export interface CanvasStroke {
  samples: PointerSample[];
}

export interface StrokeDocument {
  format: 1;
  width_px: number;
  height_px: number;
  scale_m_per_px: number;
  anchor_m: [number, number];
  w_unit: "pressure";
  strokes: { points: { x: number; y: number; w: number }[] }[];
}

export const FALLBACK_PRESSURE = 0.5;

/** Collects committed strokes plus the one being drawn. */
export class StrokeCapture {
  readonly strokes: CanvasStroke[] = [];
  private current: PointerSample[] | null = null;

  begin(x: number, y: number, pressure: number, t: number): void {
    this.current = [];
    this.extend(x, y, pressure, t);
  }

  extend(x: number, y: number, pressure: number, t: number): void {
    if (this.current === null) return;
    const last = this.current[this.current.length - 1];
    // monotone timestamps even if the device repeats event times
    const tm = last !== undefined && t <= last.t ? last.t + 1 : t;
    this.current.push({
      x,
      y,
      // pointer events report 0 for devices without pressure support
      pressure: clamp01(pressure > 0 ? pressure : FALLBACK_PRESSURE),
      t: tm,
    });
  }

  /** Finish the active stroke; drops it if it has fewer than 2 samples. */
  commit(): void {
    if (this.current !== null && this.current.length >= 2) {
      this.strokes.push({ samples: this.current });
    }
    this.current = null;
  }

  undo(): void {
    this.strokes.pop();
  }

  clear(): void {
    this.strokes.length = 0;
    this.current = null;
  }

  get active(): readonly PointerSample[] | null {
    return this.current;
  }
}

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}

export function toDocument(
  strokes: readonly CanvasStroke[],
  opts: {
    widthPx: number;
    heightPx: number;
    scaleMPerPx: number;
    anchorM: [number, number];
  },
): StrokeDocument {
  if (strokes.length === 0) throw new Error("no strokes to submit");
  return {
    format: 1,
    width_px: opts.widthPx,
    height_px: opts.heightPx,
    scale_m_per_px: opts.scaleMPerPx,
    anchor_m: opts.anchorM,
    w_unit: "pressure",
    strokes: strokes.map((s) => ({
      points: s.samples.map((p) => ({ x: p.x, y: p.y, w: p.pressure })),
    })),
  };
}
