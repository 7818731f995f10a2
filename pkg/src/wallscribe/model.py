"""End-effector dynamics of the hexarotor with a rigid one-link arm.

State currency: end-effector world position p, attitude R (world <- body,
the arm is rigid so the end-effector frame shares the body orientation),
world linear velocity of the end-effector, and body angular velocity.

The equations of motion are written at the end-effector point.  The printed
block form (see `mass_matrix` / `coriolis_matrix`) drops the coupling
between linear acceleration and the torque balance about the end-effector;
`accel` solves the exact Newton-Euler system so the plant and planner share
a physically consistent model (they agree wherever the printed form is
valid: equilibrium and slow rotation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contact import ContactFrame, ContactParams, contact_force_coords
from .se3 import Wrench, exp_so3, hat, project_so3

GRAVITY = 9.81


@dataclass(frozen=True)
class UamParams:
    mass: float = 3.0
    inertia: np.ndarray = field(
        default_factory=lambda: np.diag([0.05, 0.05, 0.09])
    )
    t_B_E: np.ndarray = field(default_factory=lambda: np.array([0.4, 0.0, -0.05]))
    t_B_S: np.ndarray = field(default_factory=lambda: np.array([0.1, 0.0, -0.05]))
    gravity: float = GRAVITY
    tau_min: np.ndarray = field(
        default_factory=lambda: np.array([-20.0, -20.0, -10.0, -3.0, -3.0, -3.0])
    )
    tau_max: np.ndarray = field(
        default_factory=lambda: np.array([20.0, 20.0, 60.0, 3.0, 3.0, 3.0])
    )
    tau_rate: np.ndarray = field(
        default_factory=lambda: np.array([40.0, 40.0, 40.0, 10.0, 10.0, 10.0])
    )
    v_max: np.ndarray = field(
        default_factory=lambda: np.array([0.5, 0.5, 0.5, 0.5, 0.5, 0.5])
    )

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        J = np.asarray(self.inertia, dtype=float)
        if np.linalg.norm(J - J.T) > 1e-12 or np.any(np.linalg.eigvalsh(J) <= 0):
            raise ValueError("inertia must be symmetric positive definite")
        object.__setattr__(self, "inertia", J)
        object.__setattr__(self, "t_B_E", np.asarray(self.t_B_E, dtype=float))
        object.__setattr__(self, "t_B_S", np.asarray(self.t_B_S, dtype=float))
        for lo, hi in ((self.tau_min, self.tau_max),):
            if np.any(np.asarray(lo) >= np.asarray(hi)):
                raise ValueError("wrench limits must satisfy lower < upper")


@dataclass(frozen=True)
class EeState:
    """End-effector pose and twist."""

    p: np.ndarray
    R: np.ndarray
    v_lin: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "R", np.asarray(self.R, dtype=float))
        object.__setattr__(self, "v_lin", np.asarray(self.v_lin, dtype=float))
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))

    def twist(self) -> np.ndarray:
        return np.concatenate([self.v_lin, self.omega])


@dataclass(frozen=True)
class State:
    """Planner/controller/simulator state: end-effector state plus contact
    normal force magnitude."""

    ee: EeState
    F: float = 0.0

    def __post_init__(self):
        if self.F < 0:
            raise ValueError("contact force magnitude must be >= 0")


def gravity_wrench_body(params: UamParams, R: np.ndarray) -> Wrench:
    """Gravity wrench at the vehicle COM expressed in the body frame:
    force [0,0,-m g] rotated into body coordinates, zero torque."""
    f_w = np.array([0.0, 0.0, -params.mass * params.gravity])
    return Wrench(force=R.T @ f_w, torque=np.zeros(3), frame="B")


def hover_wrench(params: UamParams, R: np.ndarray | None = None) -> Wrench:
    """Body control wrench that exactly cancels gravity at zero twist."""
    if R is None:
        R = np.eye(3)
    g_B = gravity_wrench_body(params, R)
    return Wrench(force=-g_B.force, torque=-g_B.torque, frame="B")


def mass_matrix(params: UamParams, s: EeState) -> np.ndarray:
    """Block inertia matrix of the end-effector equations as printed:
    [[m R^T, m hat(t)], [0, J - m hat(t) hat(t)]]."""
    m, J, t = params.mass, params.inertia, params.t_B_E
    ht = hat(t)
    M = np.zeros((6, 6))
    M[:3, :3] = m * s.R.T
    M[:3, 3:] = m * ht
    M[3:, 3:] = J - m * ht @ ht
    return M


def coriolis_matrix(params: UamParams, s: EeState) -> np.ndarray:
    """Velocity-product matrix matching the printed block structure
    (both left blocks zero; every block vanishes with omega)."""
    m, J, t = params.mass, params.inertia, params.t_B_E
    ht = hat(t)
    J_ee = J - m * ht @ ht
    C = np.zeros((6, 6))
    C[:3, 3:] = m * hat(s.omega) @ ht
    C[3:, 3:] = -hat(J_ee @ s.omega)
    return C


def _ee_wrench_body(
    params: UamParams,
    s: State,
    tau_a: Wrench,
    tau_c: Wrench | None,
    contact: ContactFrame | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Total applied wrench about the end-effector point, body coordinates.

    tau_a acts at the body origin (COM); gravity acts at the COM; the
    contact wrench acts at the end-effector tip in the bookkeeping +normal
    convention, so its normal axis is negated here (physical reaction)."""
    if tau_a.frame != "B":
        raise ValueError("control wrench must be expressed in frame B")
    R, t = s.ee.R, params.t_B_E
    g_B = gravity_wrench_body(params, R)
    f = tau_a.force + g_B.force
    # transport COM-applied wrenches to the end-effector point
    torque = tau_a.torque + g_B.torque - np.cross(t, f)
    if tau_c is not None and contact is not None:
        if tau_c.frame != "C":
            raise ValueError("contact wrench must be expressed in frame C")
        f_coords = tau_c.force.copy()
        f_coords[0] = -f_coords[0]  # physical reaction pushes out of the wall
        f_c_body = R.T @ (contact.basis() @ f_coords)
        f = f + f_c_body
        # contact force acts at the end-effector point: no extra torque there
    return f, torque


def accel(
    params: UamParams,
    s: State,
    tau_a: Wrench,
    tau_c: Wrench | None = None,
    contact: ContactFrame | None = None,
) -> np.ndarray:
    """Twist derivative [p_ddot (world), omega_dot (body)] from the exact
    Newton-Euler balance about the end-effector point."""
    m, J, t = params.mass, params.inertia, params.t_B_E
    R, w = s.ee.R, s.ee.omega
    ht = hat(t)
    f_body, tau_body = _ee_wrench_body(params, s, tau_a, tau_c, contact)

    M = np.zeros((6, 6))
    M[:3, :3] = m * R.T
    M[:3, 3:] = m * ht
    M[3:, :3] = -m * ht @ R.T
    M[3:, 3:] = J - m * ht @ ht

    hw2t = hat(w) @ hat(w) @ t
    rhs = np.concatenate(
        [
            f_body + m * hw2t,
            tau_body - np.cross(w, J @ w) - m * ht @ hw2t,
        ]
    )
    return np.linalg.solve(M, rhs)


def step_euler(
    params: UamParams,
    s: State,
    tau_a: Wrench,
    F_next: float,
    h: float,
    tau_c: Wrench | None = None,
    contact: ContactFrame | None = None,
) -> State:
    """Explicit Euler step; rotation advanced on the group and re-projected."""
    if h <= 0:
        raise ValueError("step size must be positive")
    a = accel(params, s, tau_a, tau_c, contact)
    ee = s.ee
    return State(
        ee=EeState(
            p=ee.p + h * ee.v_lin,
            R=project_so3(ee.R @ exp_so3(h * ee.omega)),
            v_lin=ee.v_lin + h * a[:3],
            omega=ee.omega + h * a[3:],
        ),
        F=max(F_next, 0.0),
    )


def step_rk4(
    params: UamParams,
    s: State,
    tau_a: Wrench,
    F_next: float,
    h: float,
    tau_c: Wrench | None = None,
    contact: ContactFrame | None = None,
) -> State:
    """Classical 4-stage step with the rotation integrated as a matrix and
    projected back to SO(3) afterwards."""
    if h <= 0:
        raise ValueError("step size must be positive")

    def deriv(p, R, vl, om):
        st = State(ee=EeState(p=p, R=R, v_lin=vl, omega=om), F=s.F)
        a = accel(params, st, tau_a, tau_c, contact)
        return vl, R @ hat(om), a[:3], a[3:]

    ee = s.ee
    k1 = deriv(ee.p, ee.R, ee.v_lin, ee.omega)
    k2 = deriv(
        ee.p + 0.5 * h * k1[0],
        ee.R + 0.5 * h * k1[1],
        ee.v_lin + 0.5 * h * k1[2],
        ee.omega + 0.5 * h * k1[3],
    )
    k3 = deriv(
        ee.p + 0.5 * h * k2[0],
        ee.R + 0.5 * h * k2[1],
        ee.v_lin + 0.5 * h * k2[2],
        ee.omega + 0.5 * h * k2[3],
    )
    k4 = deriv(
        ee.p + h * k3[0],
        ee.R + h * k3[1],
        ee.v_lin + h * k3[2],
        ee.omega + h * k3[3],
    )

    def comb(i):
        return (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) / 6.0

    return State(
        ee=EeState(
            p=ee.p + h * comb(0),
            R=project_so3(ee.R + h * comb(1)),
            v_lin=ee.v_lin + h * comb(2),
            omega=ee.omega + h * comb(3),
        ),
        F=max(F_next, 0.0),
    )
