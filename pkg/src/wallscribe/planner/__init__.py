"""Contact-aware trajectory optimization: step pre-allocation, NLP build
and solve, interpolation to controller rate, feasibility reporting, and the
equal-speed baseline planner used by the ablation study."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..contact import (
    ContactFrame,
    ContactParams,
    Surface,
    contact_frame,
    contact_wrench,
    phi,
    tangential_velocity,
)
from ..model import EeState, State, UamParams, accel, hover_wrench
from ..se3 import Wrench, exp_so3, log_so3, project_so3
from . import nlp as _nlp
from .nlp import KNOT_DIM, CompiledNlp, NlpData, compile_nlp, group_slices

__all__ = [
    "Waypoint",
    "PlannerWeights",
    "Trajectory",
    "TrajectorySample",
    "PlannerInfeasible",
    "allocate_steps",
    "reference_rotation",
    "build_nlp",
    "solve",
    "interpolate",
    "check_feasibility",
    "plan",
    "plan_baseline",
]


@dataclass(frozen=True)
class Waypoint:
    """Sparse task waypoint: contact point (world) and target normal force."""

    p_c: np.ndarray
    F: float

    def __post_init__(self):
        object.__setattr__(self, "p_c", np.asarray(self.p_c, dtype=float))
        if self.F < 0:
            raise ValueError("waypoint force must be >= 0")


@dataclass(frozen=True)
class PlannerWeights:
    W_v: np.ndarray = field(
        default_factory=lambda: np.array([4.0, 4.0, 4.0, 2.0, 2.0, 2.0])
    )
    W_tau: np.ndarray = field(default_factory=lambda: np.full(6, 1e-4))
    W_dtau: np.ndarray = field(default_factory=lambda: np.full(6, 2e-3))
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

    def __post_init__(self):
        for w in (self.W_v, self.W_tau, self.W_dtau):
            if np.any(np.asarray(w) < 0):
                raise ValueError("weights must be >= 0")
        if self.gamma <= 0 or self.h_bar <= 0:
            raise ValueError("gamma and h_bar must be > 0")


class PlannerInfeasible(RuntimeError):
    """Solve failed: carries a per-family worst-violation report."""

    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


def allocate_steps(waypoints: list[Waypoint], n_total: int) -> list[int]:
    """Pre-allocate waypoint step indices (1-based) in proportion to the
    cumulative distance between adjacent waypoints, bumping ties forward so
    the sequence is strictly increasing."""
    M = len(waypoints)
    if M < 2:
        raise ValueError("need at least 2 waypoints")
    if n_total < M:
        raise ValueError(f"n_total={n_total} cannot host {M} waypoints")
    d = np.array(
        [0.0]
        + [
            float(np.linalg.norm(waypoints[i + 1].p_c - waypoints[i].p_c))
            for i in range(M - 1)
        ]
    )
    cum = np.cumsum(d)
    total = cum[-1]
    if total > 0:
        raw = [1 + int(round((n_total - 1) * c / total)) for c in cum]
    else:
        raw = [1] * M
    raw[0] = 1
    raw[-1] = n_total
    for i in range(1, M):
        if raw[i] <= raw[i - 1]:
            raw[i] = raw[i - 1] + 1
    for i in range(M - 2, -1, -1):
        if raw[i] >= raw[i + 1]:
            raw[i] = raw[i + 1] - 1
    if raw[0] < 1 or raw[-1] != n_total:
        raise ValueError("cannot allocate strictly increasing step indices")
    return raw


def reference_rotation(frame: ContactFrame) -> np.ndarray:
    """Task reference attitude: body x into the wall, body z along the
    in-plane up axis; y completes the right-handed frame."""
    x = frame.n_t
    z = frame.t_z
    y = np.cross(z, x)
    R = np.column_stack([x, y, z])
    return project_so3(R)


def classify_segments(waypoints: list[Waypoint]) -> list[str]:
    """Per-segment label: 'contact' (both endpoint forces > 0), 'free'
    (both zero), or 'mixed' (touch-down / lift-off)."""
    labels = []
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        if a.F > 0 and b.F > 0:
            labels.append("contact")
        elif a.F == 0 and b.F == 0:
            labels.append("free")
        else:
            labels.append("mixed")
    return labels


@dataclass
class BuiltNlp:
    compiled: CompiledNlp
    waypoints: list[Waypoint]
    surface: Surface
    frame: ContactFrame
    R_ref: np.ndarray
    step_indices: list[int]     # 1-based
    segment_labels: list[str]
    params: UamParams
    cp: ContactParams
    weights: PlannerWeights
    z0: np.ndarray


def _default_n_total(waypoints: list[Waypoint], w: PlannerWeights) -> int:
    L = sum(
        float(np.linalg.norm(b.p_c - a.p_c))
        for a, b in zip(waypoints[:-1], waypoints[1:])
    )
    n = int(np.ceil(L / w.knot_spacing)) if L > 0 else w.n_min
    # clustered (or coincident) waypoints still need distinct step indices
    n = max(n, 3 * len(waypoints))
    return int(np.clip(n, w.n_min, w.n_max))


def _segment_times(waypoints: list[Waypoint], weights: PlannerWeights):
    """Minimum traversal time per segment from a trapezoidal speed profile
    at half the velocity/acceleration caps (the slack keeps those caps from
    being exactly active across whole segments, which strands the solver on
    a zero-slack manifold).  Speed is pinned to zero at the trajectory ends
    and at dwell points (endpoints of zero-length segments, where the plan
    holds position while the force ramps)."""
    M = len(waypoints)
    v_eff = 0.5 * weights.v_norm_max
    a_eff = 0.5 * weights.a_max
    d = np.array(
        [
            float(np.linalg.norm(b.p_c - a.p_c))
            for a, b in zip(waypoints[:-1], waypoints[1:])
        ]
    )
    v = np.full(M, v_eff)
    v[0] = v[-1] = 0.0
    for i, di in enumerate(d):
        if di < 1e-9:
            v[i] = v[i + 1] = 0.0
    for i in range(M - 1):  # forward reachability
        v[i + 1] = min(v[i + 1], np.sqrt(v[i] ** 2 + 2 * a_eff * d[i]))
    for i in range(M - 2, -1, -1):  # backward
        v[i] = min(v[i], np.sqrt(v[i + 1] ** 2 + 2 * a_eff * d[i]))
    times = []
    for i, di in enumerate(d):
        if di < 1e-9:
            times.append(0.0)
            continue
        va, vb = v[i], v[i + 1]
        vp = min(v_eff, np.sqrt(a_eff * di + 0.5 * (va**2 + vb**2)))
        vp = max(vp, max(va, vb))
        t_acc = (2 * vp - va - vb) / a_eff
        d_acc = (vp**2 - va**2 + vp**2 - vb**2) / (2 * a_eff)
        times.append(t_acc + max(di - d_acc, 0.0) / vp)
    return times


def build_nlp(
    waypoints: list[Waypoint],
    surface: Surface,
    params: UamParams,
    weights: PlannerWeights,
    cp: ContactParams | None = None,
    n_total: int | None = None,
    rest_boundaries: bool = True,
) -> BuiltNlp:
    cp = cp or ContactParams()
    for wp in waypoints:
        if wp.F > 0 and abs(phi(surface, wp.p_c)) > 1e-6:
            raise ValueError("contact waypoints must lie on the surface")
    if n_total is None:
        n_total = _default_n_total(waypoints, weights)
    steps = allocate_steps(waypoints, n_total)
    # stretch segments that cannot be traversed within the distance-
    # proportional span: the force ramp is limited to F_rate * h_bar per
    # interval, and the traversal time must accommodate accelerating from
    # rest at trajectory ends and dwell points; without this, touch-down /
    # lift-off hops and tightly-spaced waypoints are infeasible.
    max_dF = 0.99 * weights.F_rate * weights.h_bar
    seg_T = _segment_times(waypoints, weights)
    stretched = [steps[0]]
    for a, b, T, wa, wb in zip(
        steps[:-1], steps[1:], seg_T, waypoints[:-1], waypoints[1:]
    ):
        need_F = int(np.ceil(abs(wb.F - wa.F) / max_dF - 1e-9))
        need_t = int(np.ceil(T / weights.h_bar - 1e-9))
        stretched.append(stretched[-1] + max(b - a, need_F, need_t, 1))
    steps = stretched
    n_total = steps[-1]
    labels = classify_segments(waypoints)
    frame = contact_frame(surface, np.array([0.0, 0.0, -1.0]))
    R_ref = reference_rotation(frame)

    N = n_total
    wp_idx = np.array([s - 1 for s in steps], dtype=int)
    contact_knots, free_knots, touch_knots = set(), set(), set()
    zero_F_knots = set()
    for (lab, a, b, wa, wb) in zip(
        labels, wp_idx[:-1], wp_idx[1:], waypoints[:-1], waypoints[1:]
    ):
        inner = range(int(a), int(b) + 1)
        if lab != "contact" and wa.F == 0 and wb.F == 0:
            # the force variable only models wall reaction; off-contact
            # segments must not budget phantom force
            zero_F_knots.update(range(int(a) + 1, int(b)))
        if lab == "contact":
            contact_knots.update(inner)
        elif lab == "free" and min(
            phi(surface, wa.p_c), phi(surface, wb.p_c)
        ) >= weights.clearance:
            free_knots.update(range(int(a) + 1, int(b)))
        else:
            # approach / retreat hops and touch-down ramps: no clearance
            # margin, only non-penetration
            touch_knots.update(range(int(a) + 1, int(b)))
    contact_knots -= set(int(i) for i in wp_idx)
    free_knots -= contact_knots | set(int(i) for i in wp_idx)
    touch_knots -= contact_knots | free_knots | set(int(i) for i in wp_idx)

    data = NlpData(
        N=N,
        mass=params.mass,
        inertia=params.inertia,
        t_B_E=params.t_B_E,
        gravity=params.gravity,
        R_ref=R_ref,
        contact_basis=frame.basis(),
        mu_y=cp.mu_y,
        mu_z=cp.mu_z,
        v_eps=cp.v_eps,
        wp_indices=wp_idx,
        wp_pos=np.array([wp.p_c for wp in waypoints]),
        wp_F=np.array([wp.F for wp in waypoints]),
        surface_p0=surface.p0,
        surface_n=surface.n_in,
        contact_knots=np.array(sorted(contact_knots), dtype=int),
        free_knots=np.array(sorted(free_knots), dtype=int),
        touch_knots=np.array(sorted(touch_knots), dtype=int),
        clearance=weights.clearance,
        W_v=np.asarray(weights.W_v, float),
        W_tau=np.asarray(weights.W_tau, float),
        W_dtau=np.asarray(weights.W_dtau, float),
        gamma=weights.gamma,
        # tiny margin so the stated limits hold strictly even at the
        # solver's feasibility tolerance
        v_norm_max=weights.v_norm_max * (1.0 - 1e-3),
        a_max=weights.a_max,
        tau_rate=np.asarray(params.tau_rate, float),
        F_rate=weights.F_rate * (1.0 - 1e-3),
    )

    lb = np.empty(N * KNOT_DIM + (N - 1))
    ub = np.empty_like(lb)
    blk_lo = np.concatenate(
        [
            np.full(3, -50.0),          # position
            np.full(3, -0.5),           # attitude increment
            -np.asarray(params.v_max, float),
            [0.0],                      # force magnitude
            np.asarray(params.tau_min, float),
        ]
    )
    blk_hi = np.concatenate(
        [
            np.full(3, 50.0),
            np.full(3, 0.5),
            np.asarray(params.v_max, float),
            [weights.F_max],
            np.asarray(params.tau_max, float),
        ]
    )
    lb[: N * KNOT_DIM] = np.tile(blk_lo, N)
    ub[: N * KNOT_DIM] = np.tile(blk_hi, N)
    lb[N * KNOT_DIM :] = weights.h_min
    ub[N * KNOT_DIM :] = weights.h_bar
    for k in zero_F_knots:
        ub[k * KNOT_DIM + 12] = 0.0
    if rest_boundaries:
        # start and end at rest so independently-planned chunks concatenate
        # into a dynamically consistent whole
        for k in (0, N - 1):
            lb[k * KNOT_DIM + 6 : k * KNOT_DIM + 12] = 0.0
            ub[k * KNOT_DIM + 6 : k * KNOT_DIM + 12] = 0.0

    compiled = compile_nlp(data, (lb, ub))
    z0 = initial_guess(data, params, weights)
    return BuiltNlp(
        compiled=compiled,
        waypoints=waypoints,
        surface=surface,
        frame=frame,
        R_ref=R_ref,
        step_indices=steps,
        segment_labels=labels,
        params=params,
        cp=cp,
        weights=weights,
        z0=z0,
    )


def initial_guess(
    d: NlpData, params: UamParams, weights: PlannerWeights
) -> np.ndarray:
    """Linear interpolation between waypoints, hover wrenches, 0.1 s steps."""
    N = d.N
    X = np.zeros((N, KNOT_DIM))
    h0 = min(0.1, weights.h_bar)
    h = np.full(N - 1, h0)
    idx = d.wp_indices
    for k in range(len(idx) - 1):
        a, b = int(idx[k]), int(idx[k + 1])
        span = max(b - a, 1)
        for j in range(a, b + 1):
            lam = (j - a) / span
            X[j, 0:3] = (1 - lam) * d.wp_pos[k] + lam * d.wp_pos[k + 1]
            X[j, 12] = (1 - lam) * d.wp_F[k] + lam * d.wp_F[k + 1]
    X[: int(idx[0]), 0:3] = d.wp_pos[0]
    X[int(idx[-1]) :, 0:3] = d.wp_pos[-1]
    # velocity guess from position differences
    X[:-1, 6:9] = (X[1:, 0:3] - X[:-1, 0:3]) / h[:, None]
    hov = hover_wrench(params, d.R_ref)
    X[:, 13:19] = hov.as_vector()
    return np.concatenate([X.reshape(-1), h])


@dataclass
class RawSolution:
    """Solver output at the optimization knots."""

    p: np.ndarray        # (N, 3)
    R: np.ndarray        # (N, 3, 3)
    v: np.ndarray        # (N, 6)
    F: np.ndarray        # (N,)
    tau_a: np.ndarray    # (N, 6)
    h: np.ndarray        # (N-1,)
    knot_times: np.ndarray
    objective: float
    max_violation: float
    violations: dict
    n_iter: int
    method: str


def nlp_violations(built: BuiltNlp, z: np.ndarray) -> dict:
    """Worst violation per constraint family at z (bounds included)."""
    c = built.compiled
    eqv = np.asarray(c.eq(z))
    inv = np.asarray(c.ineq(z))
    out = {}
    for name, sl in group_slices(c.eq_sizes).items():
        out[name] = float(np.max(np.abs(eqv[sl]))) if sl.stop > sl.start else 0.0
    for name, sl in group_slices(c.ineq_sizes).items():
        vals = inv[sl]
        out[name] = max(
            out.get(name, 0.0),
            float(np.max(np.maximum(-vals, 0.0))) if len(vals) else 0.0,
        )
    out["bounds"] = float(
        max(np.max(np.maximum(c.lb - z, 0.0)), np.max(np.maximum(z - c.ub, 0.0)))
    )
    return out


def _variable_scales(built: BuiltNlp) -> np.ndarray:
    """Characteristic magnitude per decision variable, used to condition the
    bound-constrained inner solves."""
    N = built.compiled.data.N
    knot = np.ones(_nlp.KNOT_DIM)
    knot[3:6] = 0.1    # attitude increment
    knot[6:12] = 0.2   # twist
    knot[12] = 2.0     # contact force
    knot[13:16] = 10.0  # control force (hover thrust ~ m g)
    knot[16:19] = 1.0  # control torque
    h = np.full(N - 1, 0.1)
    return np.concatenate([np.tile(knot, N), h])


def _solve_auglag(built: BuiltNlp, z0: np.ndarray, tol: float) -> tuple:
    """Method-of-multipliers outer loop around a bound-constrained L-BFGS-B
    inner solve, run in scaled variables.  Returns (z, n_inner_iterations)."""
    c = built.compiled
    al = _nlp.make_auglag(c)
    n_eq = len(np.asarray(c.eq(z0)))
    n_in = len(np.asarray(c.ineq(z0)))
    lam = np.zeros(n_eq)
    mu = np.zeros(n_in)
    rho = 10.0
    s = _variable_scales(built)
    z = z0.copy()
    bounds = list(zip(c.lb / s, c.ub / s))
    total_iters = 0
    prev_viol = np.inf
    for outer in range(30):
        def fun(y):
            val, grad = al(y * s, lam, mu, rho)
            return float(val), np.asarray(grad, dtype=float) * s

        # cheap inner solves while the multipliers are far off, a generous
        # budget for the refinement phase (L-BFGS-B iterations are cheap)
        res = minimize(
            fun,
            z / s,
            jac=True,
            bounds=bounds,
            method="L-BFGS-B",
            options={
                "maxiter": 1000 if prev_viol > 1e-2 else 3000,
                "ftol": 1e-16,
                "gtol": 1e-12,
            },
        )
        z = np.clip(res.x * s, c.lb, c.ub)
        total_iters += int(res.nit)
        ce = np.asarray(c.eq(z))
        gi = np.asarray(c.ineq(z))
        viol = max(
            float(np.max(np.abs(ce))) if n_eq else 0.0,
            float(np.max(np.maximum(-gi, 0.0))) if n_in else 0.0,
        )
        if viol < 0.5 * tol:
            break
        lam = lam + rho * ce
        mu = np.maximum(0.0, mu - rho * gi)
        if viol > 0.5 * prev_viol:
            rho = min(rho * 4.0, 1e7)
        prev_viol = viol
    return z, total_iters


def solve(
    built: BuiltNlp,
    z0: np.ndarray | None = None,
    tol: float = 1e-4,
    max_iter: int = 400,
) -> RawSolution:
    """Solve the transcription (augmented Lagrangian, then an SLSQP polish
    if feasibility is short of tol) and fold attitude increments back onto
    SO(3)."""
    c = built.compiled
    z0 = built.z0 if z0 is None else z0
    if len(z0) != c.n_vars:
        raise ValueError("initial guess has wrong dimension")

    def as_np(fn):
        return lambda z: np.asarray(fn(z), dtype=float)

    z, n_iter = _solve_auglag(built, z0, tol)
    method = "auglag"
    viol = nlp_violations(built, z)
    worst = max(viol.values())
    obj = float(np.asarray(c.objective(z)))
    # the dense-QP polish is only worth it on small transcriptions; above
    # ~800 variables a handful of SLSQP iterations costs minutes
    if worst > tol and c.n_vars <= 800:
        res = minimize(
            as_np(c.objective),
            z,
            jac=as_np(c.objective_grad),
            bounds=list(zip(c.lb, c.ub)),
            constraints=[
                {"type": "eq", "fun": as_np(c.eq), "jac": as_np(c.eq_jac)},
                {"type": "ineq", "fun": as_np(c.ineq), "jac": as_np(c.ineq_jac)},
            ],
            method="SLSQP",
            options={"maxiter": 60, "ftol": 1e-10},
        )
        z2 = np.clip(res.x, c.lb, c.ub)
        viol2 = nlp_violations(built, z2)
        if max(viol2.values()) < worst:
            z, viol = z2, viol2
            method = "auglag+slsqp"
            n_iter += int(res.nit)
            obj = float(res.fun)
        worst = max(viol.values())
    if worst > tol:
        ranked = sorted(viol.items(), key=lambda kv: -kv[1])
        raise PlannerInfeasible(
            "planner did not reach feasibility: "
            + ", ".join(f"{k}={v:.2e}" for k, v in ranked[:4]),
            report=viol,
        )

    X, h = _nlp.split(z, c.data.N)
    R = np.stack(
        [project_so3(built.R_ref @ exp_so3(X[n, 3:6])) for n in range(c.data.N)]
    )
    return RawSolution(
        p=X[:, 0:3].copy(),
        R=R,
        v=X[:, 6:12].copy(),
        F=np.maximum(X[:, 12], 0.0).copy(),
        tau_a=X[:, 13:19].copy(),
        h=h.copy(),
        knot_times=np.concatenate([[0.0], np.cumsum(h)]),
        objective=obj,
        max_violation=worst,
        violations=viol,
        n_iter=n_iter,
        method=method,
    )


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    state: State
    tau_a: Wrench      # frame B
    tau_c_pred: Wrench  # frame C, bookkeeping sign
    in_contact: bool = False


@dataclass
class Trajectory:
    """Uniform-rate reference: states, control wrenches, and predicted
    contact wrenches at the controller period."""

    dt: float
    samples: list[TrajectorySample]
    frame: ContactFrame | None = None

    def __len__(self):
        return len(self.samples)

    def duration(self) -> float:
        return self.samples[-1].t if self.samples else 0.0


def _contact_spans(built_labels, knot_times, step_indices):
    spans = []
    for lab, a, b in zip(built_labels, step_indices[:-1], step_indices[1:]):
        if lab == "contact":
            spans.append((knot_times[a - 1], knot_times[b - 1]))
    return spans


def interpolate(
    built: BuiltNlp, raw: RawSolution, dt: float | None = None
) -> Trajectory:
    """Linear interpolation of the non-uniform knots onto a uniform grid,
    geodesic for rotations, with the predicted contact wrench evaluated per
    sample from the smoothed Coulomb model on the reference velocity (the
    same friction model the transcription assumed, so the feedforward
    cancels exactly what the plan budgeted)."""
    dt = dt if dt is not None else built.weights.dt
    if dt <= 0:
        raise ValueError("dt must be positive")
    T = raw.knot_times[-1]
    if T < dt:
        raise ValueError("trajectory shorter than one sample period")
    n_samples = int(np.floor(T / dt)) + 1
    times = np.arange(n_samples) * dt
    spans = _contact_spans(built.segment_labels, raw.knot_times, built.step_indices)
    frame = built.frame
    cp = built.cp
    samples = []
    j = 0
    for t in times:
        while j < len(raw.h) - 1 and t > raw.knot_times[j + 1]:
            j += 1
        t0, t1 = raw.knot_times[j], raw.knot_times[j + 1]
        lam = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        lam = min(max(lam, 0.0), 1.0)
        p = (1 - lam) * raw.p[j] + lam * raw.p[j + 1]
        v = (1 - lam) * raw.v[j] + lam * raw.v[j + 1]
        F = max((1 - lam) * raw.F[j] + lam * raw.F[j + 1], 0.0)
        tau = (1 - lam) * raw.tau_a[j] + lam * raw.tau_a[j + 1]
        dR = raw.R[j].T @ raw.R[j + 1]
        R = project_so3(raw.R[j] @ exp_so3(lam * log_so3(dR)))
        v_t = tangential_velocity(frame, v[:3])
        tau_c = contact_wrench(cp, frame, F, v_t, smooth=True)
        in_contact = any(a - 1e-9 <= t <= b + 1e-9 for a, b in spans)
        samples.append(
            TrajectorySample(
                t=float(t),
                state=State(ee=EeState(p=p, R=R, v_lin=v[:3], omega=v[3:]), F=F),
                tau_a=Wrench.from_vector(tau, "B"),
                tau_c_pred=tau_c,
                in_contact=in_contact,
            )
        )
    return Trajectory(dt=dt, samples=samples, frame=frame)


def plan(
    chunks: list,
    surface: Surface,
    params: UamParams,
    weights: PlannerWeights,
    cp: ContactParams | None = None,
    dt: float | None = None,
    tol: float = 1e-4,
) -> tuple:
    """Plan a sequence of waypoint chunks (typically one per stroke, each
    bracketed by lift points) as independent NLPs with rest endpoints and
    concatenate the interpolated results on a common uniform grid.

    `chunks` is a list of waypoint lists; consecutive chunks must share
    their boundary waypoint (the previous chunk's final lift point).
    Returns (Trajectory, list[RawSolution])."""
    if not chunks:
        raise ValueError("no waypoint chunks to plan")
    for prev, nxt in zip(chunks[:-1], chunks[1:]):
        if not np.allclose(prev[-1].p_c, nxt[0].p_c):
            raise ValueError("consecutive chunks must share a boundary waypoint")
    dt = dt if dt is not None else weights.dt
    raws = []
    samples: list[TrajectorySample] = []
    frame = None
    offset = 0.0
    for i, wps in enumerate(chunks):
        built = build_nlp(wps, surface, params, weights, cp=cp)
        raw = solve(built, tol=tol)
        raws.append(raw)
        piece = interpolate(built, raw, dt=dt)
        frame = piece.frame
        start = 1 if i > 0 else 0  # drop the duplicated boundary sample
        for s in piece.samples[start:]:
            samples.append(
                TrajectorySample(
                    t=round((offset + s.t) / dt) * dt,
                    state=s.state,
                    tau_a=s.tau_a,
                    tau_c_pred=s.tau_c_pred,
                    in_contact=s.in_contact,
                )
            )
        offset = samples[-1].t
    return Trajectory(dt=dt, samples=samples, frame=frame), raws


def plan_baseline(
    waypoints: list[Waypoint],
    speed: float,
    dt: float,
    surface: Surface,
    params: UamParams,
    cp: ContactParams | None = None,
) -> Trajectory:
    """Ablation reference: equal-speed piecewise-linear sampling of the
    waypoints with linearly interpolated force and hover feedforward.  No
    dynamic feasibility: velocity is discontinuous at corners."""
    if speed <= 0:
        raise ValueError("speed must be positive")
    cp = cp or ContactParams()
    frame = contact_frame(surface, np.array([0.0, 0.0, -1.0]))
    R_ref = reference_rotation(frame)
    labels = classify_segments(waypoints)
    hov = hover_wrench(params, R_ref).as_vector()

    seg_d = [
        float(np.linalg.norm(b.p_c - a.p_c))
        for a, b in zip(waypoints[:-1], waypoints[1:])
    ]
    seg_T = [max(d / speed, dt) for d in seg_d]
    t_knots = np.concatenate([[0.0], np.cumsum(seg_T)])
    total = t_knots[-1]
    n_samples = int(np.floor(total / dt)) + 1
    samples = []
    for k in range(n_samples):
        t = k * dt
        j = int(np.searchsorted(t_knots, t, side="right") - 1)
        j = min(j, len(seg_T) - 1)
        lam = (t - t_knots[j]) / seg_T[j]
        lam = min(max(lam, 0.0), 1.0)
        a, b = waypoints[j], waypoints[j + 1]
        p = (1 - lam) * a.p_c + lam * b.p_c
        direction = (b.p_c - a.p_c) / seg_d[j] if seg_d[j] > 0 else np.zeros(3)
        v_lin = direction * (seg_d[j] / seg_T[j])
        F = max((1 - lam) * a.F + lam * b.F, 0.0)
        v_t = tangential_velocity(frame, v_lin)
        samples.append(
            TrajectorySample(
                t=float(t),
                state=State(
                    ee=EeState(p=p, R=R_ref, v_lin=v_lin, omega=np.zeros(3)), F=F
                ),
                tau_a=Wrench.from_vector(hov, "B"),
                tau_c_pred=contact_wrench(cp, frame, F, v_t, smooth=True),
                in_contact=labels[j] == "contact",
            )
        )
    return Trajectory(dt=dt, samples=samples, frame=frame)


def check_feasibility(
    traj: Trajectory,
    waypoints: list[Waypoint],
    surface: Surface,
    weights: PlannerWeights,
    params: UamParams,
    cp: ContactParams | None = None,
) -> dict:
    """Worst violation of each constraint family evaluated on an
    interpolated trajectory.  Dynamics rows carry interpolation slack; the
    solver-level residuals live in RawSolution.violations."""
    if not traj.samples:
        raise ValueError("empty trajectory")
    cp = cp or ContactParams()
    frame = traj.frame or contact_frame(surface, np.array([0.0, 0.0, -1.0]))
    R_ref = reference_rotation(frame)
    report = {
        "dynamics": 0.0,
        "waypoint_pos": 0.0,
        "waypoint_force": 0.0,
        "surface_contact": 0.0,
        "surface_clearance": 0.0,
        "task_orientation": 0.0,
        "velocity": 0.0,
        "wrench_box": 0.0,
        "force_rate": 0.0,
        "force_sign": 0.0,
    }
    dt = traj.dt
    S = traj.samples
    for k, s in enumerate(S):
        st = s.state
        report["task_orientation"] = max(
            report["task_orientation"], float(np.max(np.abs(st.ee.R - R_ref)))
        )
        report["velocity"] = max(
            report["velocity"],
            float(np.linalg.norm(st.ee.v_lin)) - weights.v_norm_max,
        )
        report["wrench_box"] = max(
            report["wrench_box"],
            float(
                np.max(
                    np.maximum(
                        s.tau_a.as_vector() - params.tau_max,
                        params.tau_min - s.tau_a.as_vector(),
                    )
                )
            ),
        )
        report["force_sign"] = max(report["force_sign"], -st.F)
        ph = phi(surface, st.ee.p)
        if s.in_contact:
            report["surface_contact"] = max(report["surface_contact"], abs(ph))
        else:
            report["surface_clearance"] = max(report["surface_clearance"], -ph)
        if k + 1 < len(S):
            nxt = S[k + 1].state
            a = accel(params, st, s.tau_a, s.tau_c_pred, frame)
            dv = (
                np.concatenate(
                    [nxt.ee.v_lin - st.ee.v_lin, nxt.ee.omega - st.ee.omega]
                )
                / dt
            )
            report["dynamics"] = max(
                report["dynamics"], float(np.max(np.abs(dv - a))) * dt
            )
            report["force_rate"] = max(
                report["force_rate"], abs(nxt.F - st.F) / dt - weights.F_rate
            )
    # waypoint residual: distance to the piecewise-linear reference path
    P = np.array([s.state.ee.p for s in S])
    Fs = np.array([s.state.F for s in S])
    for wp in waypoints:
        best_d, best_F = np.inf, np.inf
        for k in range(len(P) - 1):
            seg = P[k + 1] - P[k]
            L2 = float(seg @ seg)
            lam = 0.0 if L2 == 0 else float(np.clip((wp.p_c - P[k]) @ seg / L2, 0, 1))
            q = P[k] + lam * seg
            dd = float(np.linalg.norm(wp.p_c - q))
            if dd < best_d:
                best_d = dd
                best_F = abs((1 - lam) * Fs[k] + lam * Fs[k + 1] - wp.F)
        report["waypoint_pos"] = max(report["waypoint_pos"], best_d)
        report["waypoint_force"] = max(report["waypoint_force"], best_F)
    for key in ("velocity", "wrench_box", "force_rate", "force_sign"):
        report[key] = max(report[key], 0.0)
    return report
