"""Contact force estimation and hybrid motion-force control.

The controller runs at a fixed rate.  Each tick it
  1. estimates the contact normal force from the F/T sensor reading,
  2. computes a motion control wrench (pose/twist PD+I with the planned
     contact wrench as feedforward),
  3. computes a direct force command along the contact normal, and
  4. blends the two through the selection matrix: the normal axis comes
     from the force law whenever the reference force is on, every other
     axis from the motion law.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contact import (
    ContactFrame,
    ContactParams,
    contact_force_coords,
    contact_wrench,
    tangential_velocity,
)
from .model import EeState, UamParams
from .se3 import FramedTransform, Wrench, ad_wrench, vee


@dataclass(frozen=True)
class MotionGains:
    """Diagonal pose / twist / integral gains of the motion law."""

    K_q: np.ndarray = field(
        default_factory=lambda: np.array([200.0, 200.0, 200.0, 20.0, 20.0, 20.0])
    )
    K_v: np.ndarray = field(
        default_factory=lambda: np.array([50.0, 50.0, 50.0, 8.0, 8.0, 8.0])
    )
    K_i: np.ndarray = field(
        default_factory=lambda: np.array([60.0, 60.0, 60.0, 6.0, 6.0, 6.0])
    )
    integral_clamp: np.ndarray = field(
        default_factory=lambda: np.array([0.3, 0.3, 0.3, 0.2, 0.2, 0.2])
    )
    # low-pass cutoff for the force estimate feeding the contact-wrench
    # compensation term (the direct force law keeps the raw estimate)
    comp_cutoff_hz: float = 0.2

    def __post_init__(self):
        if self.comp_cutoff_hz <= 0:
            raise ValueError("comp_cutoff_hz must be > 0")
        for name in ("K_q", "K_v", "K_i", "integral_clamp"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (6,) or np.any(v < 0):
                raise ValueError(f"{name} must be 6 non-negative diagonals")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class ForceGains:
    """Normalized impedance + force PI gains of the direct force law."""

    K_ep: float = 60.0   # stiffness on the normal position error
    K_ed: float = 10.0   # damping on its derivative
    K_fp: float = 0.8
    K_fi: float = 1.2
    integral_clamp: float = 2.0  # N*s
    d_cutoff_hz: float = 20.0    # low-pass on the differentiated error

    def __post_init__(self):
        vals = (self.K_ep, self.K_ed, self.K_fp, self.K_fi,
                self.integral_clamp, self.d_cutoff_hz)
        if any(v < 0 for v in vals):
            raise ValueError("force gains must be >= 0")


@dataclass
class ControllerState:
    """Mutable per-controller accumulators (single owner, not reentrant)."""

    pose_integral: np.ndarray = field(default_factory=lambda: np.zeros(6))
    force_integral: float = 0.0
    prev_e_x: float = 0.0
    e_x_rate: float = 0.0
    delta: int = 0

    def reset_integrals(self):
        self.pose_integral = np.zeros(6)
        self.force_integral = 0.0
        self.prev_e_x = 0.0
        self.e_x_rate = 0.0


def estimate_F(
    sensor: Wrench,
    ref_alpha: np.ndarray,
    T_B_S: FramedTransform,
    T_B_C: FramedTransform,
) -> float:
    """Scalar contact force from the sensor reading.

    Both the model direction a = Ad(B<-C) alpha and the measurement
    b = Ad(B<-S) tau_s live in the body frame; the estimate is the
    least-squares fit b ~ F*a, i.e. (a.b)/(a.a)."""
    if sensor.frame != "S":
        raise ValueError("sensor wrench must be expressed in frame S")
    a = ad_wrench(T_B_C, Wrench.from_vector(ref_alpha, "C")).as_vector()
    nrm = float(a @ a)
    if nrm < 1e-12:
        raise ValueError("degenerate contact direction alpha")
    b = ad_wrench(T_B_S, sensor).as_vector()
    return float(a @ b) / nrm


def estimate_F_simplified(sensor: Wrench, R_B_S: np.ndarray) -> float:
    """Fast path valid at hover with the contact normal along body x:
    the first force component of the sensor reading in body coordinates."""
    if sensor.frame != "S":
        raise ValueError("sensor wrench must be expressed in frame S")
    return float((R_B_S @ sensor.force)[0])


def estimate_contact_wrench(
    F_hat: float,
    ref_twist: np.ndarray,
    frame: ContactFrame,
    cp: ContactParams,
) -> Wrench:
    """Predicted contact wrench at the estimated force, with friction
    directions taken from the reference velocity (robust to measurement
    noise near sticking)."""
    F_hat = max(F_hat, 0.0)
    v_t = tangential_velocity(frame, np.asarray(ref_twist)[:3])
    return contact_wrench(cp, frame, F_hat, v_t, smooth=False)


def pose_error(ref: EeState, meas: EeState) -> np.ndarray:
    """Stacked [position error (world); rotation error (body)]:
    e_p = p - rp, e_R = 1/2 (rR^T R - R^T rR)^vee."""
    e_p = meas.p - ref.p
    m = ref.R.T @ meas.R - meas.R.T @ ref.R
    e_R = 0.5 * vee(m, tol=np.inf)
    return np.concatenate([e_p, e_R])


def motion_wrench(
    ref_state: EeState,
    ref_tau_a: Wrench,
    ref_tau_c: Wrench | None,
    meas: EeState,
    tau_c_hat: Wrench | None,
    frame: ContactFrame | None,
    gains: MotionGains,
    cs: ControllerState,
    dt: float,
) -> Wrench:
    """Motion law: feedforward (planned wrench plus the planned-minus-
    estimated contact wrench, mapped to the body frame in the physical
    sign) with PD+I feedback on the pose/twist error."""
    e_q = pose_error(ref_state, meas)
    e_v = meas.twist() - ref_state.twist()
    cs.pose_integral = np.clip(
        cs.pose_integral + e_q * dt, -gains.integral_clamp, gains.integral_clamp
    )
    u = (
        ref_tau_a.as_vector()
        - gains.K_q * e_q
        - gains.K_v * e_v
        - gains.K_i * cs.pose_integral
    )
    if ref_tau_c is not None and frame is not None:
        # planned minus estimated contact wrench, as a body-frame force at
        # the end-effector in the physical (reaction) sign: what the plan
        # budgeted for contact but the wall is not currently providing
        diff = ref_tau_c.force - (
            tau_c_hat.force if tau_c_hat is not None else np.zeros(3)
        )
        diff = diff.copy()
        diff[0] = -diff[0]
        f_diff = meas.R.T @ (frame.basis() @ diff)
        u[:3] += f_diff
    return Wrench.from_vector(u, "B")


def force_wrench(
    rF: float,
    F_hat: float,
    e_x: float,
    gains: ForceGains,
    cs: ControllerState,
    dt: float,
) -> Wrench:
    """Direct force law along the contact normal:
    F_f = rF - K_ep e_x - K_ed d(e_x)/dt - K_fp e_f - K_fi int(e_f)."""
    if rF < 0:
        raise ValueError("reference force must be >= 0")
    e_f = F_hat - rF
    cs.force_integral = float(
        np.clip(
            cs.force_integral + e_f * dt,
            -gains.integral_clamp,
            gains.integral_clamp,
        )
    )
    raw_rate = (e_x - cs.prev_e_x) / dt
    beta = 1.0 - np.exp(-2.0 * np.pi * gains.d_cutoff_hz * dt)
    cs.e_x_rate += beta * (raw_rate - cs.e_x_rate)
    cs.prev_e_x = e_x
    F_f = (
        rF
        - gains.K_ep * e_x
        - gains.K_ed * cs.e_x_rate
        - gains.K_fp * e_f
        - gains.K_fi * cs.force_integral
    )
    return Wrench(
        force=np.array([F_f, 0.0, 0.0]), torque=np.zeros(3), frame="C"
    )


def combine(
    tau_p: Wrench,
    tau_f: Wrench,
    delta: int,
    R_B_C: np.ndarray,
    params: UamParams | None = None,
) -> Wrench:
    """Selection-matrix blend: contact-frame normal axis from the force
    law when delta=1, everything else from the motion law; optionally
    clamped to the actuator wrench box."""
    if delta not in (0, 1):
        raise ValueError("delta must be 0 or 1")
    if tau_p.frame != "B" or tau_f.frame != "C":
        raise ValueError("expected tau_p in frame B and tau_f in frame C")
    u = tau_p.as_vector()
    if delta == 1:
        A = np.zeros((6, 6))
        A[:3, :3] = R_B_C
        A[3:, 3:] = R_B_C
        Lam = np.zeros((6, 6))
        Lam[0, 0] = 1.0
        u = A @ ((np.eye(6) - Lam) @ (A.T @ u) + Lam @ (A.T @ (A @ tau_f.as_vector())))
    if params is not None:
        u = np.clip(u, params.tau_min, params.tau_max)
    return Wrench.from_vector(u, "B")


@dataclass
class HybridController:
    """Full per-tick pipeline; owns one ControllerState."""

    params: UamParams
    cp: ContactParams
    motion_gains: MotionGains = field(default_factory=MotionGains)
    force_gains: ForceGains = field(default_factory=ForceGains)
    dt: float = 0.01
    contact_compensation: bool = True
    frame: ContactFrame | None = None
    cs: ControllerState = field(default_factory=ControllerState)
    last_F_hat: float = 0.0  # most recent estimate, for logging
    F_hat_filt: float = 0.0  # low-passed estimate for the compensation term

    def _delta(self, rF: float) -> int:
        """Force/motion switch on the reference force with hysteresis."""
        on, hys = self.cp.F_on, self.cp.F_hysteresis
        if self.cs.delta == 0 and rF > on:
            return 1
        if self.cs.delta == 1 and rF < on - hys:
            return 0
        return self.cs.delta

    def step(self, ref_sample, meas: EeState, sensor: Wrench) -> Wrench:
        """One control tick: estimate, motion law, force law, blend."""
        rF = float(ref_sample.state.F)
        R = meas.R
        basis = self.frame.basis()
        basis_p = _proper(basis)
        # unit-force contact direction (bookkeeping sign, the convention the
        # sensor pipeline reports in), re-expressed in the proper C basis
        coords = contact_force_coords(
            self.cp,
            1.0,
            tangential_velocity(self.frame, ref_sample.state.ee.v_lin),
            smooth=False,
        )
        alpha = np.zeros(6)
        alpha[:3] = basis_p.T @ (basis @ coords)
        T_B_S = FramedTransform(
            rotation=np.eye(3),
            translation=self.params.t_B_S,
            from_frame="S",
            to_frame="B",
        )
        T_B_C = FramedTransform(
            rotation=R.T @ basis_p,
            translation=self.params.t_B_E,
            from_frame="C",
            to_frame="B",
        )
        F_hat = estimate_F(sensor, alpha, T_B_S, T_B_C)
        F_hat = max(F_hat, 0.0)
        self.last_F_hat = F_hat

        delta = self._delta(rF)
        if delta != self.cs.delta:
            self.cs.reset_integrals()
            self.cs.delta = delta
            self.F_hat_filt = F_hat

        # smoothed estimate for the model-based compensation: the direct
        # force law needs the raw estimate's bandwidth, but the friction
        # model only needs the slow trend, so filtering keeps sensor noise
        # out of the tangential axes of the motion law
        beta = 1.0 - np.exp(
            -2.0 * np.pi * self.motion_gains.comp_cutoff_hz * self.dt
        )
        self.F_hat_filt += beta * (F_hat - self.F_hat_filt)

        # the contact model is only meaningful in the force-control regime:
        # compensating an unplanned impact during free flight would cancel
        # the wall's push-back and sustain the penetration
        if self.contact_compensation and delta == 1:
            tau_c_hat = estimate_contact_wrench(
                self.F_hat_filt, ref_sample.state.ee.twist(), self.frame, self.cp
            )
            # reference contact wrench rebuilt with the same friction rule as
            # the estimate (rF vs F_hat along the same direction), so the
            # compensation difference vanishes identically at matched force;
            # the planner's smooth-friction prediction would leave a spurious
            # tangential kick near zero reference speed
            ref_tau_c = estimate_contact_wrench(
                rF, ref_sample.state.ee.twist(), self.frame, self.cp
            )
        else:
            tau_c_hat = None
            ref_tau_c = None
        tau_p = motion_wrench(
            ref_sample.state.ee,
            ref_sample.tau_a,
            ref_tau_c,
            meas,
            tau_c_hat,
            self.frame,
            self.motion_gains,
            self.cs,
            self.dt,
        )
        e_q_c = basis.T @ (meas.p - ref_sample.state.ee.p)
        tau_f = force_wrench(
            rF, F_hat, float(e_q_c[0]), self.force_gains, self.cs, self.dt
        )
        return combine(tau_p, tau_f, delta, R.T @ basis, self.params)


def _proper(basis: np.ndarray) -> np.ndarray:
    """Contact basis as used in wrench transforms.  The raw basis may be
    improper (left-handed axis triple); Ad transforms only ever use it as a
    coordinate projection, which is what estimate_F needs, so pass it
    through a right-handed repair that preserves the normal and t_z."""
    if np.linalg.det(basis) > 0:
        return basis
    fixed = basis.copy()
    fixed[:, 1] = -fixed[:, 1]
    return fixed
