"""Planar surface model, contact frame construction, Coulomb contact wrench,
and the pen force-to-linewidth map.

Sign convention: the contact frame normal n_t points INTO the material.  The
bookkeeping wrench returned by `contact_wrench` keeps the +n_t normal
component (the form used by the planner and controller); the physical
reaction applied by the wall on the vehicle has the normal component
negated, which `physical_force_world` provides for the dynamics/plant side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .se3 import Wrench


@dataclass(frozen=True)
class Surface:
    """Plane through p0 with unit normal n_in pointing into the material.

    Signed distance phi = n_in . (p0 - p): positive in free space, zero on
    the surface, negative inside the material."""

    p0: np.ndarray
    n_in: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p0", np.asarray(self.p0, dtype=float))
        n = np.asarray(self.n_in, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            n = n / np.linalg.norm(n)
        object.__setattr__(self, "n_in", n)


def phi(surface: Surface, p) -> float:
    """Signed distance of point p to the surface (positive = free space)."""
    p = np.asarray(p, dtype=float)
    return float(surface.n_in @ (surface.p0 - p))


@dataclass(frozen=True)
class ContactFrame:
    """Orthonormal contact axes in world coordinates.

    n_t into the surface, t_y = gravity x n_t (horizontal, in-plane),
    t_z = t_y x n_t (points up for a vertical wall).  Note (n_t, t_y, t_z)
    in this order is left-handed; reassembled as [n_t, -t_y, t_z] it is a
    proper rotation.  All wrench conversions below use explicit basis
    projections, so handedness never enters."""

    n_t: np.ndarray
    t_y: np.ndarray
    t_z: np.ndarray

    def basis(self) -> np.ndarray:
        """3x3 matrix with columns [n_t, t_y, t_z]; maps contact coordinates
        to world coordinates (orthonormal, possibly improper)."""
        return np.column_stack([self.n_t, self.t_y, self.t_z])


def contact_frame(surface: Surface, gravity_dir) -> ContactFrame:
    """Contact axes from the surface normal and the gravity direction.

    gravity_dir is the world direction gravity pulls (normalized internally).
    Raises for walls whose normal is parallel to gravity (horizontal
    surfaces are unsupported)."""
    g = np.asarray(gravity_dir, dtype=float)
    gn = np.linalg.norm(g)
    if gn == 0.0:
        raise ValueError("gravity direction must be nonzero")
    g = g / gn
    n_t = surface.n_in
    cross = np.cross(g, n_t)
    if np.linalg.norm(cross) < 1e-9:
        raise ValueError("surface normal parallel to gravity: not a wall")
    t_y = cross / np.linalg.norm(cross)
    t_z = np.cross(t_y, n_t)
    t_z = t_z / np.linalg.norm(t_z)
    return ContactFrame(n_t=n_t, t_y=t_y, t_z=t_z)


@dataclass(frozen=True)
class ContactParams:
    mu_y: float = 0.4
    mu_z: float = 0.4
    v_eps: float = 0.01      # tanh smoothing velocity for the planner (m/s)
    v_deadband: float = 1e-3  # sign deadband for controller/plant (m/s)
    F_on: float = 0.1        # contact-detection force threshold (N)
    F_hysteresis: float = 0.05

    def __post_init__(self):
        if self.mu_y < 0 or self.mu_z < 0:
            raise ValueError("friction coefficients must be >= 0")
        if self.v_eps <= 0:
            raise ValueError("v_eps must be > 0")
        if self.F_on < 0:
            raise ValueError("F_on must be >= 0")


def friction_scale(v: float, cp: ContactParams, smooth: bool) -> float:
    """Directional friction factor sigma(v): tanh(v/v_eps) when smooth,
    otherwise sign(v) with a deadband."""
    if smooth:
        return float(np.tanh(v / cp.v_eps))
    if abs(v) <= cp.v_deadband:
        return 0.0
    return float(np.sign(v))


def contact_force_coords(
    cp: ContactParams, F: float, v_t, smooth: bool = False
) -> np.ndarray:
    """Contact force in contact coordinates [normal, t_y, t_z] with the
    bookkeeping +normal convention: F * [1, -mu_y*sigma(vy), -mu_z*sigma(vz)]."""
    if F < 0:
        raise ValueError("normal force magnitude must be >= 0")
    vy, vz = float(v_t[0]), float(v_t[1])
    return np.array(
        [
            F,
            -cp.mu_y * friction_scale(vy, cp, smooth) * F,
            -cp.mu_z * friction_scale(vz, cp, smooth) * F,
        ]
    )


def contact_wrench(
    cp: ContactParams,
    frame: ContactFrame,
    F: float,
    v_t,
    smooth: bool = False,
) -> Wrench:
    """Bookkeeping contact wrench in frame C (pure force, zero torque).

    v_t is the tangential velocity in contact coordinates [vy, vz]."""
    f = contact_force_coords(cp, F, v_t, smooth)
    return Wrench(force=f, torque=np.zeros(3), frame="C")


def physical_force_world(
    cp: ContactParams,
    frame: ContactFrame,
    F: float,
    v_t,
    smooth: bool = False,
) -> np.ndarray:
    """World-frame force the wall applies on the vehicle: the bookkeeping
    wrench with the normal axis negated (reaction pushes out of the wall)."""
    f = contact_force_coords(cp, F, v_t, smooth)
    f[0] = -f[0]
    return frame.basis() @ f


def tangential_velocity(frame: ContactFrame, v_world) -> np.ndarray:
    """Project a world velocity onto the in-plane axes [t_y, t_z]."""
    v = np.asarray(v_world, dtype=float)
    return np.array([frame.t_y @ v, frame.t_z @ v])


@dataclass(frozen=True)
class PenModel:
    """Polynomial map from contact force (N) to stroke linewidth (m),
    monotone non-decreasing on [0, F_max].  coeffs are ascending powers."""

    coeffs: tuple = (0.0, 0.003)
    w_min: float = 0.001
    w_max: float = 0.015
    F_max: float = 5.0

    def __post_init__(self):
        F = np.linspace(0.0, self.F_max, 200)
        w = np.polynomial.polynomial.polyval(F, np.asarray(self.coeffs, float))
        if np.any(np.diff(w) < -1e-12):
            raise ValueError("pen polynomial must be non-decreasing on [0, F_max]")
        if w[0] < 0:
            raise ValueError("pen width at zero force must be >= 0")


def linewidth(pen: PenModel, F: float, clamp: bool = True) -> float:
    """Linewidth produced at contact force F, clamped to [w_min, w_max]."""
    w = float(np.polynomial.polynomial.polyval(F, np.asarray(pen.coeffs, float)))
    if clamp:
        w = min(max(w, pen.w_min), pen.w_max)
    return w


def force_for_width(pen: PenModel, w: float) -> tuple[float, bool]:
    """Invert the pen polynomial by bisection to 1e-6 m.

    Returns (force, clamped): widths outside the reachable range are clamped
    to the nearest achievable width and flagged."""
    lo, hi = 0.0, pen.F_max
    w_lo = linewidth(pen, lo, clamp=False)
    w_hi = linewidth(pen, hi, clamp=False)
    reach_lo = max(w_lo, pen.w_min)
    reach_hi = min(w_hi, pen.w_max)
    target = min(max(w, reach_lo), reach_hi)
    clamped = abs(target - w) > 1e-12
    if target <= w_lo:
        return 0.0, clamped
    if target >= w_hi:
        return pen.F_max, clamped
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if linewidth(pen, mid, clamp=False) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), clamped
