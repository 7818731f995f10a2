"""Direct transcription of the contact-aware planning problem.

Decision variables per knot n (N knots): position (3), attitude increment
about the task reference rotation (3), twist (6), contact force magnitude
(1), control wrench (6); plus one timestep per interval (N-1).

All objective/constraint functions and their Jacobians are built with jax
(float64, algorithmically exact derivatives) and evaluated as plain numpy
by the scipy-based solver driver in __init__.py.

The transcription functions are module-level and take the numeric problem
data as a pytree argument, so jax's compilation cache is shared between
problem instances of identical shape (same knot count and index-set
sizes); only the first instance of a given shape pays the jit cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

import jax

jax.config.update("jax_enable_x64", True)

import jax.numpy as jnp  # noqa: E402

# per-knot variable block layout
_P = slice(0, 3)
_TH = slice(3, 6)
_VL = slice(6, 9)
_OM = slice(9, 12)
_F = 12
_TAU = slice(13, 19)
KNOT_DIM = 19


def _rodrigues(th):
    """jax-safe exp map: R = I + A hat(th) + B hat(th)^2."""
    n2 = jnp.dot(th, th)
    small = n2 < 1e-12
    n2s = jnp.where(small, 1.0, n2)
    t = jnp.sqrt(n2s)
    A = jnp.where(small, 1.0 - n2 / 6.0, jnp.sin(t) / t)
    B = jnp.where(small, 0.5 - n2 / 24.0, (1.0 - jnp.cos(t)) / n2s)
    K = jnp.array(
        [
            [0.0, -th[2], th[1]],
            [th[2], 0.0, -th[0]],
            [-th[1], th[0], 0.0],
        ]
    )
    return jnp.eye(3) + A * K + B * (K @ K)


def _hat(v):
    return jnp.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )


@dataclass
class NlpData:
    """Static problem data captured by the transcription functions."""

    N: int
    mass: float
    inertia: np.ndarray
    t_B_E: np.ndarray
    gravity: float
    R_ref: np.ndarray          # task reference rotation (world <- body)
    contact_basis: np.ndarray  # columns [n_t, t_y, t_z], world coords
    mu_y: float
    mu_z: float
    v_eps: float
    wp_indices: np.ndarray     # 0-based knot index per waypoint
    wp_pos: np.ndarray         # (M, 3)
    wp_F: np.ndarray           # (M,)
    surface_p0: np.ndarray
    surface_n: np.ndarray
    contact_knots: np.ndarray  # knots with phi(p) = 0 (excl. waypoint knots)
    free_knots: np.ndarray     # knots with phi(p) >= clearance
    touch_knots: np.ndarray    # mixed-segment interiors: phi(p) >= 0
    clearance: float
    W_v: np.ndarray            # (6,) diagonal
    W_tau: np.ndarray          # (6,)
    W_dtau: np.ndarray         # (6,)
    gamma: float
    v_norm_max: float
    a_max: float
    tau_rate: np.ndarray       # (6,)
    F_rate: float

    def dynamic(self) -> dict:
        """Numeric fields as a jax pytree (jit argument)."""
        return {
            "mass": jnp.asarray(self.mass),
            "inertia": jnp.asarray(self.inertia),
            "t_B_E": jnp.asarray(self.t_B_E),
            "gravity": jnp.asarray(self.gravity),
            "R_ref": jnp.asarray(self.R_ref),
            "contact_basis": jnp.asarray(self.contact_basis),
            "mu_y": jnp.asarray(self.mu_y),
            "mu_z": jnp.asarray(self.mu_z),
            "v_eps": jnp.asarray(self.v_eps),
            "wp_indices": jnp.asarray(self.wp_indices, dtype=jnp.int64),
            "wp_pos": jnp.asarray(self.wp_pos),
            "wp_F": jnp.asarray(self.wp_F),
            "surface_p0": jnp.asarray(self.surface_p0),
            "surface_n": jnp.asarray(self.surface_n),
            "contact_knots": jnp.asarray(self.contact_knots, dtype=jnp.int64),
            "free_knots": jnp.asarray(self.free_knots, dtype=jnp.int64),
            "touch_knots": jnp.asarray(self.touch_knots, dtype=jnp.int64),
            "clearance": jnp.asarray(self.clearance),
            "W_v": jnp.asarray(self.W_v),
            "W_tau": jnp.asarray(self.W_tau),
            "W_dtau": jnp.asarray(self.W_dtau),
            "gamma": jnp.asarray(self.gamma),
            "v_norm_max": jnp.asarray(self.v_norm_max),
            "a_max": jnp.asarray(self.a_max),
            "tau_rate": jnp.asarray(self.tau_rate),
            "F_rate": jnp.asarray(self.F_rate),
        }


def split(z, N):
    X = z[: N * KNOT_DIM].reshape(N, KNOT_DIM)
    h = z[N * KNOT_DIM :]
    return X, h


def _n_knots(z) -> int:
    # z length is N*KNOT_DIM + (N-1); shapes are static under jit
    return (z.shape[0] + 1) // (KNOT_DIM + 1)


def _accel_knot(dd: dict, x, tau):
    """Exact Newton-Euler twist derivative for one knot (jax)."""
    th = x[_TH]
    vl = x[_VL]
    om = x[_OM]
    F = x[_F]
    R = dd["R_ref"] @ _rodrigues(th)
    m = dd["mass"]
    J = dd["inertia"]
    t = dd["t_B_E"]
    ht = _hat(t)
    C = dd["contact_basis"]

    # smoothed Coulomb contact force, physical sign (normal pushes out)
    vy = C[:, 1] @ vl
    vz = C[:, 2] @ vl
    f_contact_coords = jnp.array(
        [
            -F,
            -dd["mu_y"] * jnp.tanh(vy / dd["v_eps"]) * F,
            -dd["mu_z"] * jnp.tanh(vz / dd["v_eps"]) * F,
        ]
    )
    f_c_world = C @ f_contact_coords

    f_a = tau[:3]
    m_a = tau[3:]
    g_body = R.T @ jnp.array([0.0, 0.0, -1.0]) * (m * dd["gravity"])
    f_com = f_a + g_body
    f_body = f_com + R.T @ f_c_world
    tau_body = m_a - jnp.cross(t, f_com)

    M = jnp.zeros((6, 6))
    M = M.at[:3, :3].set(m * R.T)
    M = M.at[:3, 3:].set(m * ht)
    M = M.at[3:, :3].set(-m * ht @ R.T)
    M = M.at[3:, 3:].set(J - m * ht @ ht)

    hw2t = _hat(om) @ (_hat(om) @ t)
    rhs = jnp.concatenate(
        [
            f_body + m * hw2t,
            tau_body - jnp.cross(om, J @ om) - m * ht @ hw2t,
        ]
    )
    return jnp.linalg.solve(M, rhs)


def _objective(z, dd):
    N = _n_knots(z)
    X, h = split(z, N)
    v = X[:-1, 6:12]
    tau = X[:, 13:19]
    dtau = (tau[1:] - tau[:-1]) / h[:, None]
    stage = (
        jnp.sum(v * v * dd["W_v"], axis=1)
        + jnp.sum(tau[:-1] * tau[:-1] * dd["W_tau"], axis=1)
        + jnp.sum(dtau * dtau * dd["W_dtau"], axis=1)
        + dd["gamma"]
    )
    v_end = X[-1, 6:12]
    return jnp.sum(stage * h) + jnp.sum(v_end * v_end * dd["W_v"]) * h[-1]


def _eq(z, dd):
    """Equality residuals: dynamics, waypoints, contact-surface, task."""
    N = _n_knots(z)
    X, h = split(z, N)
    p = X[:, _P]
    th = X[:, _TH]
    vl = X[:, _VL]
    om = X[:, _OM]
    acc = jax.vmap(lambda x, tau: _accel_knot(dd, x, tau))(
        X[:-1], X[:-1, 13:19]
    )
    res_p = p[1:] - p[:-1] - h[:, None] * vl[:-1]
    res_th = th[1:] - th[:-1] - h[:, None] * om[:-1]
    res_v = (
        jnp.concatenate([vl[1:] - vl[:-1], om[1:] - om[:-1]], axis=1)
        - h[:, None] * acc
    )
    wp_p = p[dd["wp_indices"]] - dd["wp_pos"]
    wp_F = X[dd["wp_indices"], _F] - dd["wp_F"]
    phi_all = (dd["surface_p0"] - p) @ dd["surface_n"]
    contact = phi_all[dd["contact_knots"]]
    task = th.reshape(-1)
    return jnp.concatenate(
        [
            res_p.reshape(-1),
            res_th.reshape(-1),
            res_v.reshape(-1),
            wp_p.reshape(-1),
            wp_F,
            contact,
            task,
        ]
    )


def _ineq(z, dd):
    """Inequality residuals, all in the g(z) >= 0 convention."""
    N = _n_knots(z)
    X, h = split(z, N)
    p = X[:, _P]
    vl = X[:, _VL]
    F = X[:, _F]
    tau = X[:, 13:19]
    phi_all = (dd["surface_p0"] - p) @ dd["surface_n"]

    free = phi_all[dd["free_knots"]] - dd["clearance"]
    touch = phi_all[dd["touch_knots"]]
    vnorm = dd["v_norm_max"] ** 2 - jnp.sum(vl * vl, axis=1)
    dv = vl[1:] - vl[:-1]
    alim = dd["a_max"] * h[:, None]
    acc_lo = (alim - dv).reshape(-1)
    acc_hi = (alim + dv).reshape(-1)
    dtau = tau[1:] - tau[:-1]
    tlim = h[:, None] * dd["tau_rate"]
    tau_lo = (tlim - dtau).reshape(-1)
    tau_hi = (tlim + dtau).reshape(-1)
    dF = F[1:] - F[:-1]
    Flim = dd["F_rate"] * h
    F_lo = Flim - dF
    F_hi = Flim + dF
    return jnp.concatenate(
        [free, touch, vnorm, acc_lo, acc_hi, tau_lo, tau_hi, F_lo, F_hi]
    )


def _auglag(z, lam, mu, rho, dd):
    """Augmented Lagrangian: equality terms lam^T c + rho/2 ||c||^2,
    inequality terms in the Rockafellar form (exact once multipliers
    converge)."""
    c = _eq(z, dd)
    g = _ineq(z, dd)
    pen_eq = jnp.dot(lam, c) + 0.5 * rho * jnp.dot(c, c)
    shifted = jnp.maximum(0.0, mu - rho * g)
    pen_in = jnp.sum(shifted**2 - mu**2) / (2.0 * rho)
    return _objective(z, dd) + pen_eq + pen_in


# single jit per transcription function; the cache is keyed on argument
# shapes, so same-shape problem instances reuse the compiled code
_JIT_OBJ = jax.jit(_objective)
_JIT_OBJ_GRAD = jax.jit(jax.grad(_objective, argnums=0))
_JIT_EQ = jax.jit(_eq)
_JIT_EQ_JAC = jax.jit(jax.jacrev(_eq, argnums=0))
_JIT_INEQ = jax.jit(_ineq)
_JIT_INEQ_JAC = jax.jit(jax.jacrev(_ineq, argnums=0))
_JIT_AUGLAG = jax.jit(jax.value_and_grad(_auglag, argnums=0))


def _bind(fn, dd):
    return lambda z, _fn=fn, _dd=dd: _fn(z, _dd)


@dataclass
class CompiledNlp:
    """Jitted callables plus bookkeeping used by the solver driver."""

    data: NlpData
    objective: object
    objective_grad: object
    eq: object
    eq_jac: object
    ineq: object
    ineq_jac: object
    eq_sizes: dict
    ineq_sizes: dict
    lb: np.ndarray
    ub: np.ndarray
    n_vars: int


def eq_group_sizes(d: NlpData) -> dict:
    return {
        "dyn_pos": 3 * (d.N - 1),
        "dyn_att": 3 * (d.N - 1),
        "dyn_twist": 6 * (d.N - 1),
        "waypoint_pos": 3 * len(d.wp_indices),
        "waypoint_force": len(d.wp_indices),
        "surface_contact": len(d.contact_knots),
        "task_orientation": 3 * d.N,
    }


def ineq_group_sizes(d: NlpData) -> dict:
    return {
        "surface_clearance": len(d.free_knots) + len(d.touch_knots),
        "velocity_norm": d.N,
        "accel_rate": 6 * (d.N - 1),
        "wrench_rate": 12 * (d.N - 1),
        "force_rate": 2 * (d.N - 1),
    }


def compile_nlp(d: NlpData, bounds: tuple[np.ndarray, np.ndarray]) -> CompiledNlp:
    dd = d.dynamic()
    lb, ub = bounds
    return CompiledNlp(
        data=d,
        objective=_bind(_JIT_OBJ, dd),
        objective_grad=_bind(_JIT_OBJ_GRAD, dd),
        eq=_bind(_JIT_EQ, dd),
        eq_jac=_bind(_JIT_EQ_JAC, dd),
        ineq=_bind(_JIT_INEQ, dd),
        ineq_jac=_bind(_JIT_INEQ_JAC, dd),
        eq_sizes=eq_group_sizes(d),
        ineq_sizes=ineq_group_sizes(d),
        lb=lb,
        ub=ub,
        n_vars=d.N * KNOT_DIM + (d.N - 1),
    )


def make_auglag(compiled: "CompiledNlp"):
    dd = compiled.data.dynamic()

    def al(z, lam, mu, rho, _dd=dd):
        return _JIT_AUGLAG(z, lam, mu, rho, _dd)

    return al


def group_slices(sizes: dict) -> dict:
    out = {}
    start = 0
    for name, n in sizes.items():
        out[name] = slice(start, start + n)
        start += n
    return out
