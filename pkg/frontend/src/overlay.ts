/** Parse the planned trajectory text into drawable points and build the
 * velocity-density overlay (denser dots = slower planned motion). */

export interface TrajPoint {
  t: number;
  p: [number, number, number];
  speed: number;
  F: number;
  inContact: boolean;
}

const TRAJ_MAGIC = "# wallscribe-trajectory 1";

export function parseTrajectory(text: string): TrajPoint[] {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines[0] !== TRAJ_MAGIC) throw new Error("not a trajectory file");
  const out: TrajPoint[] = [];
  for (const line of lines.slice(1)) {
    if (line.startsWith("#")) continue;
    const tok = line.split(" ").map(Number);
    if (tok.length !== 33 || tok.some((v) => Number.isNaN(v))) {
      throw new Error("bad trajectory record");
    }
    // layout: t, p(3), R(9), v_lin(3), omega(3), F, tau_a(6), tau_c(6), flag
    const v = tok.slice(13, 16);
    out.push({
      t: tok[0],
      p: [tok[1], tok[2], tok[3]],
      speed: Math.hypot(v[0], v[1], v[2]),
      F: tok[19],
      inContact: tok[32] === 1,
    });
  }
  return out;
}

/** Subsample by arc length so dot density reflects planned speed: a fixed
 * time stride means slow regions naturally accumulate more dots, so the
 * overlay simply uses every sample in contact. */
export function overlayDots(points: TrajPoint[]): TrajPoint[] {
  return points.filter((p) => p.inContact);
}
