"""Single validated configuration for the whole pipeline.

The config file is YAML; every section maps onto one of the core parameter
dataclasses.  Unknown keys are rejected so typos fail loudly.  The path can
be overridden with the CALLI_CONFIG environment variable.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field

from .contact import ContactParams, PenModel, Surface
from .controller import ForceGains, MotionGains
from .model import UamParams
from .planner import PlannerWeights
from .sim import PlantConfig

ENV_VAR = "CALLI_CONFIG"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class VehicleConfig(_Strict):
    mass: float = 3.0
    inertia_diag: list[float] = Field(default=[0.05, 0.05, 0.09])
    t_B_E: list[float] = Field(default=[0.4, 0.0, -0.05])
    t_B_S: list[float] = Field(default=[0.1, 0.0, -0.05])
    gravity: float = 9.81
    tau_min: list[float] = Field(default=[-20.0, -20.0, -10.0, -3.0, -3.0, -3.0])
    tau_max: list[float] = Field(default=[20.0, 20.0, 60.0, 3.0, 3.0, 3.0])
    tau_rate: list[float] = Field(default=[40.0, 40.0, 40.0, 10.0, 10.0, 10.0])
    v_max: list[float] = Field(default=[0.5, 0.5, 0.5, 0.5, 0.5, 0.5])

    def build(self) -> UamParams:
        return UamParams(
            mass=self.mass,
            inertia=np.diag(self.inertia_diag),
            t_B_E=np.array(self.t_B_E),
            t_B_S=np.array(self.t_B_S),
            gravity=self.gravity,
            tau_min=np.array(self.tau_min),
            tau_max=np.array(self.tau_max),
            tau_rate=np.array(self.tau_rate),
            v_max=np.array(self.v_max),
        )


class ContactConfig(_Strict):
    mu_y: float = 0.4
    mu_z: float = 0.4
    v_eps: float = 0.01
    v_deadband: float = 1e-3
    F_on: float = 0.1
    F_hysteresis: float = 0.05

    def build(self) -> ContactParams:
        return ContactParams(**self.model_dump())


class PenConfig(_Strict):
    coeffs: list[float] = Field(default=[0.0, 0.003])
    w_min: float = 0.001
    w_max: float = 0.015
    F_max: float = 5.0

    def build(self) -> PenModel:
        return PenModel(
            coeffs=tuple(self.coeffs),
            w_min=self.w_min,
            w_max=self.w_max,
            F_max=self.F_max,
        )


class SurfaceConfig(_Strict):
    p0: list[float] = Field(default=[2.0, 0.0, 1.0])
    n_in: list[float] = Field(default=[1.0, 0.0, 0.0])

    def build(self) -> Surface:
        return Surface(p0=np.array(self.p0), n_in=np.array(self.n_in))


class PlannerConfig(_Strict):
    W_v: list[float] = Field(default=[4.0, 4.0, 4.0, 2.0, 2.0, 2.0])
    W_tau: list[float] = Field(default=[1e-4] * 6)
    W_dtau: list[float] = Field(default=[2e-3] * 6)
    gamma: float = 2.0
    h_bar: float = 0.1
    h_min: float = 1e-3
    v_norm_max: float = 0.2
    a_max: float = 0.2
    F_rate: float = 2.0
    F_max: float = 5.0
    clearance: float = 0.01
    knot_spacing: float = 0.02
    n_min: int = 20
    n_max: int = 400
    dt: float = 0.01
    waypoint_spacing: float = 0.03
    lift: float = 0.05

    def build(self) -> PlannerWeights:
        d = self.model_dump()
        d.pop("waypoint_spacing")
        d.pop("lift")
        for k in ("W_v", "W_tau", "W_dtau"):
            d[k] = np.array(d[k])
        return PlannerWeights(**d)


class GainsConfig(_Strict):
    K_q: list[float] = Field(default=[200.0, 200.0, 200.0, 20.0, 20.0, 20.0])
    K_v: list[float] = Field(default=[50.0, 50.0, 50.0, 8.0, 8.0, 8.0])
    K_i: list[float] = Field(default=[60.0, 60.0, 60.0, 6.0, 6.0, 6.0])
    pose_integral_clamp: list[float] = Field(default=[0.3, 0.3, 0.3, 0.2, 0.2, 0.2])
    comp_cutoff_hz: float = 0.2
    K_ep: float = 60.0
    K_ed: float = 10.0
    K_fp: float = 0.8
    K_fi: float = 1.2
    force_integral_clamp: float = 2.0
    d_cutoff_hz: float = 20.0

    def build(self) -> tuple[MotionGains, ForceGains]:
        motion = MotionGains(
            K_q=np.array(self.K_q),
            K_v=np.array(self.K_v),
            K_i=np.array(self.K_i),
            integral_clamp=np.array(self.pose_integral_clamp),
            comp_cutoff_hz=self.comp_cutoff_hz,
        )
        force = ForceGains(
            K_ep=self.K_ep,
            K_ed=self.K_ed,
            K_fp=self.K_fp,
            K_fi=self.K_fi,
            integral_clamp=self.force_integral_clamp,
            d_cutoff_hz=self.d_cutoff_hz,
        )
        return motion, force


class PlantSection(_Strict):
    k_pen: float = 2000.0
    c_pen: float = 20.0
    sigma_f: float = 0.05
    sigma_tau: float = 0.005
    sensor_rate: float = 500.0
    physics_dt: float = 0.001
    control_dt: float = 0.01
    seed: int = 0
    mass_scale: float = 1.05
    mu_scale: float = 1.25
    friction_mode: str = "stick-slip"

    def build(self) -> PlantConfig:
        return PlantConfig(**self.model_dump())


class AppConfig(_Strict):
    vehicle: VehicleConfig = Field(default_factory=VehicleConfig)
    contact: ContactConfig = Field(default_factory=ContactConfig)
    pen: PenConfig = Field(default_factory=PenConfig)
    surface: SurfaceConfig = Field(default_factory=SurfaceConfig)
    planner: PlannerConfig = Field(default_factory=PlannerConfig)
    gains: GainsConfig = Field(default_factory=GainsConfig)
    plant: PlantSection = Field(default_factory=PlantSection)
    contact_compensation: bool = True
    # 0.25 mm/px: the thinnest pen width (1 mm) spans 4 px, keeping the
    # IoU family well clear of binarization quantization
    raster_resolution: float = 4000.0


def load_config(path: str | Path | None = None) -> AppConfig:
    """Load the config from `path`, the CALLI_CONFIG env var, or defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        return AppConfig()
    raw = Path(path).read_text()
    data = yaml.safe_load(raw) or {}
    return AppConfig.model_validate(data)


def dump_default(path: str | Path):
    """Write the default config as YAML."""
    Path(path).write_text(
        yaml.safe_dump(AppConfig().model_dump(), sort_keys=False)
    )
