import numpy as np
import pytest

from wallscribe.model import (
    EeState,
    State,
    UamParams,
    accel,
    coriolis_matrix,
    gravity_wrench_body,
    hover_wrench,
    mass_matrix,
    step_euler,
    step_rk4,
)
from wallscribe.se3 import Wrench, exp_so3, hat, is_rotation


def hover_state(p=(0.0, 0.0, 1.0)):
    return State(
        ee=EeState(
            p=np.array(p), R=np.eye(3), v_lin=np.zeros(3), omega=np.zeros(3)
        )
    )


def random_ee_state(rng):
    from wallscribe.se3 import project_so3

    return EeState(
        p=rng.normal(size=3),
        R=project_so3(rng.normal(size=(3, 3)) + 3 * np.eye(3)),
        v_lin=0.3 * rng.normal(size=3),
        omega=0.5 * rng.normal(size=3),
    )


# --- parameter validation


def test_params_reject_nonpositive_mass():
    with pytest.raises(ValueError):
        UamParams(mass=0.0)


def test_params_reject_indefinite_inertia():
    with pytest.raises(ValueError):
        UamParams(inertia=np.diag([0.05, -0.05, 0.09]))
    with pytest.raises(ValueError):
        UamParams(inertia=np.array([[0.05, 0.01, 0], [0, 0.05, 0], [0, 0, 0.09]]))


def test_params_reject_inverted_limits():
    with pytest.raises(ValueError):
        UamParams(tau_min=np.full(6, 5.0), tau_max=np.full(6, -5.0))


def test_state_rejects_negative_force():
    with pytest.raises(ValueError):
        State(ee=hover_state().ee, F=-1.0)


# --- static balances


def test_gravity_wrench_at_identity(params):
    g = gravity_wrench_body(params, np.eye(3))
    assert np.allclose(g.force, [0.0, 0.0, -params.mass * params.gravity])
    assert np.allclose(g.torque, 0.0)


def test_hover_wrench_gives_zero_accel(params):
    s = hover_state()
    a = accel(params, s, hover_wrench(params))
    assert np.allclose(a, 0.0, atol=1e-12)


def test_free_fall(params):
    s = hover_state()
    a = accel(params, s, Wrench.zero("B"))
    assert np.allclose(a[:3], [0.0, 0.0, -params.gravity], atol=1e-12)
    assert np.allclose(a[3:], 0.0, atol=1e-12)


def test_accel_requires_body_frame_wrench(params):
    with pytest.raises(ValueError):
        accel(params, hover_state(), Wrench.zero("C"))


# --- matrix structure


def test_mass_matrix_blocks(params):
    s = hover_state().ee
    M = mass_matrix(params, s)
    ht = hat(params.t_B_E)
    assert np.allclose(M[:3, :3], params.mass * s.R.T)
    assert np.allclose(M[:3, 3:], params.mass * ht)
    assert np.allclose(M[3:, :3], 0.0)
    assert np.allclose(M[3:, 3:], params.inertia - params.mass * ht @ ht)


def test_coriolis_vanishes_at_rest(params):
    assert np.allclose(coriolis_matrix(params, hover_state().ee), 0.0)


def test_coriolis_blocks_with_spin(params):
    s = EeState(
        p=np.zeros(3),
        R=np.eye(3),
        v_lin=np.zeros(3),
        omega=np.array([0.0, 0.0, 1.0]),
    )
    C = coriolis_matrix(params, s)
    assert np.allclose(C[:3, :3], 0.0)
    assert np.allclose(C[3:, :3], 0.0)
    ht = hat(params.t_B_E)
    assert np.allclose(C[:3, 3:], params.mass * hat(s.omega) @ ht)


# --- independent Newton-Euler oracle at the vehicle COM


def com_oracle(params, s: State, tau_a: Wrench):
    """Rigid-body dynamics written at the COM, then transported to the
    end-effector point: an independent derivation of `accel`."""
    m, J, t = params.mass, params.inertia, params.t_B_E
    R, w = s.ee.R, s.ee.omega
    f_world = R @ tau_a.force + np.array([0.0, 0.0, -m * params.gravity])
    tau_body = tau_a.torque  # gravity and control act at the COM
    a_com = f_world / m
    wdot = np.linalg.solve(J, tau_body - np.cross(w, J @ w))
    # EE kinematics: p_ee = p_com + R t
    a_ee = a_com + R @ (np.cross(wdot, t) + np.cross(w, np.cross(w, t)))
    return np.concatenate([a_ee, wdot])


def test_accel_matches_com_oracle(params):
    rng = np.random.default_rng(7)
    for _ in range(25):
        ee = random_ee_state(rng)
        tau = Wrench(rng.normal(size=3), rng.normal(size=3), "B")
        got = accel(params, State(ee=ee), tau)
        want = com_oracle(params, State(ee=ee), tau)
        assert np.allclose(got, want, atol=1e-6), (got, want)


# --- integrators


def test_euler_position_advance(params):
    s = State(
        ee=EeState(
            p=np.zeros(3),
            R=np.eye(3),
            v_lin=np.array([0.1, 0.0, 0.0]),
            omega=np.zeros(3),
        )
    )
    nxt = step_euler(params, s, hover_wrench(params), F_next=0.0, h=0.1)
    assert np.allclose(nxt.ee.p, [0.01, 0.0, 0.0])


def test_rotation_advances_by_exact_exponential():
    params = UamParams(
        inertia=0.05 * np.eye(3),
        t_B_E=np.zeros(3),
        t_B_S=np.zeros(3),
        gravity=0.0,
    )
    s = State(
        ee=EeState(
            p=np.zeros(3),
            R=np.eye(3),
            v_lin=np.zeros(3),
            omega=np.array([0.0, 0.0, 1.0]),
        )
    )
    nxt = step_euler(params, s, Wrench.zero("B"), F_next=0.0, h=np.pi / 2)
    Rz90 = exp_so3(np.array([0.0, 0.0, np.pi / 2]))
    assert np.allclose(nxt.ee.R, Rz90, atol=1e-12)
    assert np.allclose(nxt.ee.omega, s.ee.omega)


def test_rk4_euler_agree_on_smooth_maneuver(params):
    """Cross-integrator consistency over a gentle 1 s hover-to-offset push
    at h=1e-3; Euler's first-order error bounds the disagreement at
    (f/m) T h / 2 ~ 7e-7 for a 4 mN push."""
    base = hover_wrench(params)
    w = Wrench(base.force + np.array([0.004, 0.0, 0.0]), base.torque, "B")
    a = b = hover_state()
    h = 1e-3
    for _ in range(1000):
        a = step_euler(params, a, w, F_next=0.0, h=h)
        b = step_rk4(params, b, w, F_next=0.0, h=h)
    assert np.linalg.norm(a.ee.p - b.ee.p) < 1e-6
    assert np.linalg.norm(a.ee.v_lin - b.ee.v_lin) < 1e-6


def test_euler_first_order_convergence_to_accel(params):
    s = hover_state()
    tau = Wrench(np.array([1.0, 0.0, 0.0]), np.zeros(3), "B")
    a = accel(params, s, tau)
    for h in (1e-3, 1e-4):
        nxt = step_euler(params, s, tau, F_next=0.0, h=h)
        fd = (nxt.ee.v_lin - s.ee.v_lin) / h
        assert np.allclose(fd, a[:3], atol=10 * h)


def test_steps_preserve_rotation_invariants(params):
    s = State(
        ee=EeState(
            p=np.zeros(3),
            R=np.eye(3),
            v_lin=np.zeros(3),
            omega=np.array([2.0, -1.0, 3.0]),
        )
    )
    for _ in range(200):
        s = step_rk4(params, s, hover_wrench(params), F_next=0.0, h=0.01)
        assert is_rotation(s.ee.R, tol=1e-9)


def test_step_rejects_nonpositive_h(params):
    with pytest.raises(ValueError):
        step_euler(params, hover_state(), Wrench.zero("B"), 0.0, h=0.0)
    with pytest.raises(ValueError):
        step_rk4(params, hover_state(), Wrench.zero("B"), 0.0, h=-0.1)
