"""Plain-text record serialization for trajectories and simulation logs.

Floats are written with repr(), which round-trips binary64 exactly, so a
file read back and re-written is byte-identical — the property the
determinism checks rely on.  One record per line, space-separated fields,
'#'-prefixed header lines.
"""

from __future__ import annotations

import numpy as np

from .contact import ContactFrame
from .model import EeState, State
from .planner import Trajectory, TrajectorySample
from .se3 import Wrench
from .sim import SimLog, SimRecord

TRAJ_MAGIC = "# wallscribe-trajectory 1"
LOG_MAGIC = "# wallscribe-simlog 1"


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _floats(tokens) -> list:
    return [float(t) for t in tokens]


def dump_trajectory(traj: Trajectory) -> str:
    """Serialize a Trajectory.  Per sample: t, p(3), R(9, row-major),
    v(6), F, tau_a(6), tau_c(6), contact flag."""
    lines = [TRAJ_MAGIC]
    lines.append(f"# dt {traj.dt!r}")
    f = traj.frame
    lines.append(
        "# frame " + _fmt(np.concatenate([f.n_t, f.t_y, f.t_z]))
    )
    for s in traj.samples:
        ee = s.state.ee
        row = np.concatenate(
            [
                [s.t],
                ee.p,
                ee.R.reshape(-1),
                ee.v_lin,
                ee.omega,
                [s.state.F],
                s.tau_a.as_vector(),
                s.tau_c_pred.as_vector(),
            ]
        )
        lines.append(_fmt(row) + f" {int(s.in_contact)}")
    return "\n".join(lines) + "\n"


def load_trajectory(text: str) -> Trajectory:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != TRAJ_MAGIC:
        raise ValueError("not a trajectory file")
    dt = None
    frame = None
    samples = []
    for ln in lines[1:]:
        if ln.startswith("# dt "):
            dt = float(ln[5:])
            continue
        if ln.startswith("# frame "):
            v = _floats(ln[8:].split())
            frame = ContactFrame(
                n_t=np.array(v[0:3]), t_y=np.array(v[3:6]), t_z=np.array(v[6:9])
            )
            continue
        if ln.startswith("#"):
            continue
        tok = ln.split()
        v = _floats(tok[:-1])
        if len(v) != 32:
            raise ValueError(f"bad trajectory record: {len(v)} fields")
        R = np.array(v[4:13]).reshape(3, 3)
        samples.append(
            TrajectorySample(
                t=v[0],
                state=State(
                    ee=EeState(
                        p=np.array(v[1:4]),
                        R=R,
                        v_lin=np.array(v[13:16]),
                        omega=np.array(v[16:19]),
                    ),
                    F=max(v[19], 0.0),
                ),
                tau_a=Wrench.from_vector(v[20:26], "B"),
                tau_c_pred=Wrench.from_vector(v[26:32], "C"),
                in_contact=bool(int(tok[-1])),
            )
        )
    if dt is None or frame is None:
        raise ValueError("trajectory file missing dt/frame header")
    return Trajectory(dt=dt, samples=samples, frame=frame)


def dump_log(log: SimLog) -> str:
    """Serialize a SimLog.  Per record: t, ref_index, p(3), R(9), v(6),
    F_true, F_hat, tau_a(6), tau_c(6), pen width."""
    lines = [LOG_MAGIC]
    lines.append(f"# dt {log.dt!r}")
    lines.append(f"# seed {log.seed}")
    lines.append(f"# aborted {int(log.aborted)}")
    for r in log.records:
        ee = r.meas.ee
        row = np.concatenate(
            [
                [r.t],
                ee.p,
                ee.R.reshape(-1),
                ee.v_lin,
                ee.omega,
                [r.meas.F, r.F_hat],
                r.tau_a.as_vector(),
                r.tau_c_true.as_vector(),
                [r.pen_width],
            ]
        )
        lines.append(f"{r.ref_index} " + _fmt(row))
    return "\n".join(lines) + "\n"


def load_log(text: str) -> SimLog:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != LOG_MAGIC:
        raise ValueError("not a simulation log file")
    dt = None
    seed = 0
    aborted = False
    records = []
    for ln in lines[1:]:
        if ln.startswith("# dt "):
            dt = float(ln[5:])
            continue
        if ln.startswith("# seed "):
            seed = int(ln[7:])
            continue
        if ln.startswith("# aborted "):
            aborted = bool(int(ln[10:]))
            continue
        if ln.startswith("#"):
            continue
        tok = ln.split()
        ref_index = int(tok[0])
        v = _floats(tok[1:])
        if len(v) != 34:
            raise ValueError(f"bad log record: {len(v)} fields")
        R = np.array(v[4:13]).reshape(3, 3)
        records.append(
            SimRecord(
                t=v[0],
                ref_index=ref_index,
                meas=State(
                    ee=EeState(
                        p=np.array(v[1:4]),
                        R=R,
                        v_lin=np.array(v[13:16]),
                        omega=np.array(v[16:19]),
                    ),
                    F=max(v[19], 0.0),
                ),
                F_hat=v[20],
                tau_a=Wrench.from_vector(v[21:27], "B"),
                tau_c_true=Wrench.from_vector(v[27:33], "C"),
                pen_width=v[33],
            )
        )
    if dt is None:
        raise ValueError("log file missing dt header")
    return SimLog(dt=dt, records=records, seed=seed, aborted=aborted)
