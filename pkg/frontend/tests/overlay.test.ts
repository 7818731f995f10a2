import { describe, expect, it } from "vitest";
import { overlayDots, parseTrajectory } from "../src/overlay.js";

function record(opts: {
  t: number;
  p: [number, number, number];
  v?: [number, number, number];
  F?: number;
  contact?: boolean;
}): string {
  const R = [1, 0, 0, 0, 1, 0, 0, 0, 1];
  const v = opts.v ?? [0, 0, 0];
  const omega = [0, 0, 0];
  const tau = [0, 0, 0, 0, 0, 0];
  return [
    opts.t,
    ...opts.p,
    ...R,
    ...v,
    ...omega,
    opts.F ?? 0,
    ...tau,
    ...tau,
    opts.contact ? 1 : 0,
  ].join(" ");
}

const HEADER = [
  "# wallscribe-trajectory 1",
  "# dt 0.002",
  "# frame 1 0 0 0 1 0 0 0 1",
];

describe("parseTrajectory", () => {
  it("extracts position, speed, force, and contact flag", () => {
    const text = [
      ...HEADER,
      record({ t: 0, p: [2, 0.1, 1], v: [0, 0.3, 0.4], F: 2, contact: true }),
      record({ t: 0.002, p: [2, 0.2, 1], contact: false }),
    ].join("\n");
    const pts = parseTrajectory(text);
    expect(pts).toHaveLength(2);
    expect(pts[0].p).toEqual([2, 0.1, 1]);
    expect(pts[0].speed).toBeCloseTo(0.5);
    expect(pts[0].F).toBe(2);
    expect(pts[0].inContact).toBe(true);
    expect(pts[1].inContact).toBe(false);
  });

  it("rejects files without the magic header", () => {
    expect(() => parseTrajectory("1 2 3")).toThrow(/not a trajectory/);
  });

  it("rejects records with the wrong field count", () => {
    const text = [...HEADER, "0 1 2 3"].join("\n");
    expect(() => parseTrajectory(text)).toThrow(/bad trajectory record/);
  });

  it("tolerates trailing newline and comment lines", () => {
    const text =
      [...HEADER, record({ t: 0, p: [0, 0, 0] }), "# trailer"].join("\n") +
      "\n";
    expect(parseTrajectory(text)).toHaveLength(1);
  });
});

describe("overlayDots", () => {
  it("keeps only in-contact samples so dot density tracks planned speed", () => {
    const pts = parseTrajectory(
      [
        ...HEADER,
        record({ t: 0, p: [0, 0, 0], contact: false }),
        record({ t: 0.002, p: [0, 0.1, 0], contact: true }),
        record({ t: 0.004, p: [0, 0.2, 0], contact: true }),
      ].join("\n"),
    );
    const dots = overlayDots(pts);
    expect(dots).toHaveLength(2);
    expect(dots.every((d) => d.inContact)).toBe(true);
  });
});
