"""Closed-loop plant: ground-truth dynamics with penalty contact, a noisy
F/T sensor, and the hybrid controller in the loop.

Multi-rate layout (all divisors of the physics rate):
  physics   1000 Hz  rigid-body integration + penalty contact
  sensor     500 Hz  contact wrench transported to S, Gaussian noise, ZOH
  control    100 Hz  hybrid controller tick, log record emitted

The plant may run with perturbed parameters (mass, friction) to emulate
model mismatch; the controller always uses the nominal model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .contact import (
    ContactFrame,
    ContactParams,
    Surface,
    contact_force_coords,
    contact_frame,
    phi,
    tangential_velocity,
)
from .controller import ForceGains, HybridController, MotionGains
from .model import EeState, State, UamParams, step_rk4
from .se3 import FramedTransform, Wrench, ad_wrench


class SimulationDiverged(RuntimeError):
    """Plant state left the sane region; carries the partial log."""

    def __init__(self, message: str, log: "SimLog"):
        super().__init__(message)
        self.log = log


@dataclass(frozen=True)
class PlantConfig:
    k_pen: float = 2000.0     # contact stiffness, N/m
    c_pen: float = 20.0       # contact damping, N*s/m
    sigma_f: float = 0.05     # sensor force noise, N
    sigma_tau: float = 0.005  # sensor torque noise, N*m
    sensor_rate: float = 500.0
    physics_dt: float = 0.001
    control_dt: float = 0.01
    seed: int = 0
    mass_scale: float = 1.05  # plant-vs-model mismatch
    mu_scale: float = 1.25
    friction_mode: str = "stick-slip"  # or "regularized" (smooth tanh law)

    def __post_init__(self):
        if self.friction_mode not in ("stick-slip", "regularized"):
            raise ValueError("friction_mode must be 'stick-slip' or 'regularized'")
        if self.k_pen <= 0 or self.physics_dt <= 0 or self.sensor_rate <= 0:
            raise ValueError("k_pen, physics_dt and sensor_rate must be > 0")
        if self.sigma_f < 0 or self.sigma_tau < 0 or self.c_pen < 0:
            raise ValueError("noise levels and damping must be >= 0")
        if self.physics_dt > self.control_dt:
            raise ValueError("physics dt must not exceed control dt")

    def perturbed(self, params: UamParams, cp: ContactParams):
        """Plant-side parameter sets with the configured mismatch applied."""
        p = replace(params, mass=params.mass * self.mass_scale)
        c = replace(
            cp, mu_y=cp.mu_y * self.mu_scale, mu_z=cp.mu_z * self.mu_scale
        )
        return p, c


@dataclass(frozen=True)
class SimRecord:
    """One control-tick snapshot."""

    t: float
    ref_index: int
    meas: State
    F_hat: float
    tau_a: Wrench        # applied control wrench, frame B
    tau_c_true: Wrench   # plant contact wrench, frame C, bookkeeping sign
    pen_width: float


@dataclass
class SimLog:
    dt: float
    records: list
    seed: int
    aborted: bool = False

    def __len__(self):
        return len(self.records)


def plant_step(
    params: UamParams,
    state: EeState,
    tau_a: Wrench,
    cfg: PlantConfig,
    surface: Surface,
    frame: ContactFrame,
    cp: ContactParams,
) -> tuple[EeState, Wrench, float]:
    """One physics step.  Returns (next state, contact wrench in frame C
    with the bookkeeping +normal sign, true normal force)."""
    depth = max(0.0, -phi(surface, state.p))
    if depth > 0.0:
        ddot = float(surface.n_in @ state.v_lin)  # penetration rate
        F_true = max(0.0, cfg.k_pen * depth + cfg.c_pen * ddot)
    else:
        F_true = 0.0
    v_t = tangential_velocity(frame, state.v_lin)
    tau_c = Wrench(
        force=contact_force_coords(
            cp, F_true, v_t, smooth=cfg.friction_mode == "regularized"
        ),
        torque=np.zeros(3),
        frame="C",
    )
    nxt = step_rk4(
        params,
        State(ee=state, F=F_true),
        tau_a,
        F_next=F_true,
        h=cfg.physics_dt,
        tau_c=tau_c if F_true > 0 else None,
        contact=frame,
    )
    return nxt.ee, tau_c, F_true


def sensor_read(
    tau_c: Wrench,
    frame: ContactFrame,
    R: np.ndarray,
    params: UamParams,
    cfg: PlantConfig,
    rng: np.random.Generator,
) -> Wrench:
    """Contact wrench transported to the sensor frame plus Gaussian noise.

    The reading keeps the bookkeeping sign convention the estimator
    expects.  Sensor axes coincide with body axes; the contact force acts
    at the end-effector, offset t_B_E - t_B_S from the sensor origin."""
    if tau_c.frame != "C":
        raise ValueError("contact wrench must be expressed in frame C")
    f_body = R.T @ (frame.basis() @ tau_c.force)
    offset = params.t_B_E - params.t_B_S
    at_S = Wrench(
        force=f_body, torque=np.cross(offset, f_body), frame="S"
    )
    noise_f = rng.normal(0.0, cfg.sigma_f, 3) if cfg.sigma_f > 0 else np.zeros(3)
    noise_t = (
        rng.normal(0.0, cfg.sigma_tau, 3) if cfg.sigma_tau > 0 else np.zeros(3)
    )
    return Wrench(
        force=at_S.force + noise_f, torque=at_S.torque + noise_t, frame="S"
    )


def run(
    traj,
    surface: Surface,
    params: UamParams,
    cp: ContactParams,
    pen,
    cfg: PlantConfig,
    motion_gains: MotionGains | None = None,
    force_gains: ForceGains | None = None,
    contact_compensation: bool = True,
    initial: EeState | None = None,
    on_record=None,
) -> SimLog:
    """Closed-loop execution of a reference trajectory.

    Deterministic for fixed (traj, gains, cfg): all randomness flows from
    one seeded generator sampled on the fixed sensor clock."""
    from .contact import PenModel, linewidth

    pen = pen if pen is not None else PenModel()
    samples = traj.samples
    log = SimLog(dt=cfg.control_dt, records=[], seed=cfg.seed)
    if not samples:
        return log

    frame = contact_frame(surface, np.array([0.0, 0.0, -1.0]))
    plant_params, plant_cp = cfg.perturbed(params, cp)
    ctrl = HybridController(
        params=params,
        cp=cp,
        motion_gains=motion_gains or MotionGains(),
        force_gains=force_gains or ForceGains(),
        dt=cfg.control_dt,
        contact_compensation=contact_compensation,
        frame=frame,
    )
    rng = np.random.default_rng(cfg.seed)

    state = initial if initial is not None else samples[0].state.ee
    n_sub = int(round(cfg.control_dt / cfg.physics_dt))
    sensor_every = max(1, int(round(1.0 / (cfg.sensor_rate * cfg.physics_dt))))
    tau_c = Wrench.zero("C")
    F_true = 0.0
    sensor = sensor_read(tau_c, frame, state.R, params, cfg, rng)
    phys_tick = 0

    for k, ref in enumerate(samples):
        tau_a = ctrl.step(ref, state, sensor)
        # snapshot at the tick time: the state the controller acted on
        log.records.append(
            SimRecord(
                t=ref.t,
                ref_index=k,
                meas=State(ee=state, F=F_true),
                F_hat=ctrl.last_F_hat,
                tau_a=tau_a,
                tau_c_true=tau_c if F_true > 0 else Wrench.zero("C"),
                pen_width=linewidth(pen, F_true) if F_true > 0 else 0.0,
            )
        )
        if on_record is not None:
            on_record(log.records[-1])
        if not np.all(np.isfinite(state.p)) or np.linalg.norm(state.p) > 100.0:
            log.aborted = True
            raise SimulationDiverged(
                f"plant diverged at t={ref.t:.3f}s: p={state.p}", log
            )
        for _ in range(n_sub):
            state, tau_c, F_true = plant_step(
                plant_params, state, tau_a, cfg, surface, frame, plant_cp
            )
            phys_tick += 1
            if phys_tick % sensor_every == 0:
                sensor = sensor_read(tau_c, frame, state.R, params, cfg, rng)
    return log
