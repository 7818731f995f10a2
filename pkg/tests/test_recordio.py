import numpy as np
import pytest

from wallscribe import recordio
from wallscribe.contact import contact_frame
from wallscribe.model import EeState, State
from wallscribe.planner import Trajectory, TrajectorySample
from wallscribe.se3 import Wrench, exp_so3
from wallscribe.sim import SimLog, SimRecord


def tiny_trajectory(frame):
    rng = np.random.default_rng(5)
    samples = []
    for k in range(4):
        ee = EeState(
            p=rng.normal(size=3),
            R=exp_so3(0.3 * rng.normal(size=3)),
            v_lin=rng.normal(size=3),
            omega=rng.normal(size=3),
        )
        samples.append(
            TrajectorySample(
                t=0.01 * k,
                state=State(ee=ee, F=float(abs(rng.normal()))),
                tau_a=Wrench(rng.normal(size=3), rng.normal(size=3), "B"),
                tau_c_pred=Wrench(rng.normal(size=3), np.zeros(3), "C"),
                in_contact=bool(k % 2),
            )
        )
    return Trajectory(dt=0.01, samples=samples, frame=frame)


def tiny_log():
    rng = np.random.default_rng(6)
    records = []
    for k in range(4):
        ee = EeState(
            p=rng.normal(size=3),
            R=exp_so3(0.3 * rng.normal(size=3)),
            v_lin=rng.normal(size=3),
            omega=rng.normal(size=3),
        )
        records.append(
            SimRecord(
                t=0.01 * k,
                ref_index=k,
                meas=State(ee=ee, F=float(abs(rng.normal()))),
                F_hat=float(rng.normal()),
                tau_a=Wrench(rng.normal(size=3), rng.normal(size=3), "B"),
                tau_c_true=Wrench(rng.normal(size=3), np.zeros(3), "C"),
                pen_width=0.004,
            )
        )
    return SimLog(dt=0.01, records=records, seed=42)


def test_trajectory_roundtrip_bit_identical(frame):
    traj = tiny_trajectory(frame)
    text = recordio.dump_trajectory(traj)
    back = recordio.load_trajectory(text)
    assert recordio.dump_trajectory(back) == text


def test_trajectory_roundtrip_values(frame):
    traj = tiny_trajectory(frame)
    back = recordio.load_trajectory(recordio.dump_trajectory(traj))
    assert back.dt == traj.dt
    assert len(back.samples) == len(traj.samples)
    for a, b in zip(traj.samples, back.samples):
        assert a.t == b.t
        assert np.array_equal(a.state.ee.p, b.state.ee.p)
        assert np.array_equal(a.state.ee.R, b.state.ee.R)
        assert a.state.F == b.state.F
        assert np.array_equal(a.tau_a.as_vector(), b.tau_a.as_vector())
        assert a.in_contact == b.in_contact
    assert np.array_equal(back.frame.n_t, traj.frame.n_t)


def test_log_roundtrip_bit_identical():
    log = tiny_log()
    text = recordio.dump_log(log)
    back = recordio.load_log(text)
    assert recordio.dump_log(back) == text
    assert back.seed == 42
    assert back.dt == 0.01
    for a, b in zip(log.records, back.records):
        assert a.F_hat == b.F_hat
        assert np.array_equal(a.meas.ee.v_lin, b.meas.ee.v_lin)
        assert a.pen_width == b.pen_width


def test_load_rejects_wrong_magic():
    with pytest.raises(ValueError):
        recordio.load_trajectory("# not a trajectory\n")
    with pytest.raises(ValueError):
        recordio.load_log("# wallscribe-trajectory 1\n")


def test_load_rejects_bad_field_count(frame):
    text = recordio.dump_trajectory(tiny_trajectory(frame))
    lines = text.splitlines()
    lines[3] = " ".join(lines[3].split()[:-5])
    with pytest.raises(ValueError, match="fields"):
        recordio.load_trajectory("\n".join(lines) + "\n")


def test_load_rejects_missing_header(frame):
    text = recordio.dump_trajectory(tiny_trajectory(frame))
    stripped = "\n".join(
        ln for ln in text.splitlines() if not ln.startswith("# dt")
    )
    with pytest.raises(ValueError, match="dt"):
        recordio.load_trajectory(stripped + "\n")


def test_float_repr_roundtrips_exactly():
    vals = [0.1, 1 / 3, np.pi, 1e-300, -2.5e17, 5.0]
    line = recordio._fmt(vals)
    assert recordio._floats(line.split()) == [float(v) for v in vals]
