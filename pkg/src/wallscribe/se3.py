"""Rotation and wrench algebra: hat/vee, SO(3) exp/log, polar projection,
and wrench coordinate transforms between tagged frames.

Frame tags: W (world), B (vehicle body), E (end-effector), S (force/torque
sensor), C (contact).  Rotations are 3x3 row-major numpy arrays; a rotation
R tagged "a from b" maps coordinates of frame b into frame a.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FRAMES = ("W", "B", "E", "S", "C")

_ROT_TOL = 1e-9


class FrameError(ValueError):
    """Raised when a wrench is expressed in the wrong frame for an operation."""


class NotARotationError(ValueError):
    """Raised when a matrix fails the orthonormality / determinant checks."""


def check_rotation(R: np.ndarray, tol: float = _ROT_TOL) -> np.ndarray:
    """Validate R in SO(3): orthonormal within tol and det = +1 within tol."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise NotARotationError(f"expected 3x3 matrix, got {R.shape}")
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol:
        raise NotARotationError("matrix is not orthonormal")
    if abs(np.linalg.det(R) - 1.0) > tol:
        raise NotARotationError("determinant is not +1")
    return R


def is_rotation(R: np.ndarray, tol: float = _ROT_TOL) -> bool:
    try:
        check_rotation(R, tol)
        return True
    except NotARotationError:
        return False


def hat(v) -> np.ndarray:
    """Skew-symmetric matrix of v, so that hat(v) @ w == cross(v, w)."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Inverse of hat.  Rejects inputs that are not skew-symmetric within tol."""
    m = np.asarray(m, dtype=float)
    if np.linalg.norm(m + m.T) >= tol:
        raise ValueError("vee: input is not skew-symmetric")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def exp_so3(v) -> np.ndarray:
    """Rodrigues formula: rotation of angle ||v|| about axis v/||v||."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v)
    K = hat(v)
    if theta < 1e-12:
        # second-order series keeps the result orthonormal to machine precision
        return np.eye(3) + K + 0.5 * (K @ K)
    return (
        np.eye(3)
        + (np.sin(theta) / theta) * K
        + ((1.0 - np.cos(theta)) / theta**2) * (K @ K)
    )


def log_so3(R: np.ndarray) -> np.ndarray:
    """Rotation vector of R.  Caller must keep the angle away from pi."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr <= -1.0 + 1e-9:
        raise ValueError("log_so3: rotation angle too close to pi")
    cos_theta = np.clip((tr - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos_theta)
    w = vee((R - R.T) / 2.0, tol=np.inf)
    if theta < 1e-12:
        return w
    return w * (theta / np.sin(theta))


def project_so3(m: np.ndarray) -> np.ndarray:
    """Nearest rotation to m in Frobenius norm (polar factor via SVD)."""
    m = np.asarray(m, dtype=float)
    if abs(np.linalg.det(m)) < 1e-12:
        raise ValueError("project_so3: singular input")
    U, _, Vt = np.linalg.svd(m)
    R = U @ Vt
    if np.linalg.det(R) < 0:
        raise ValueError("project_so3: input is a reflection")
    return R


@dataclass(frozen=True)
class FramedTransform:
    """Rigid transform carrying frame tags: maps coordinates from `from_frame`
    into `to_frame`.  translation is the origin of `from_frame` expressed in
    `to_frame`."""

    rotation: np.ndarray
    translation: np.ndarray
    from_frame: str
    to_frame: str

    def __post_init__(self):
        if self.from_frame not in FRAMES or self.to_frame not in FRAMES:
            raise FrameError(
                f"frame tags must be one of {FRAMES}, "
                f"got {self.from_frame!r} -> {self.to_frame!r}"
            )
        object.__setattr__(self, "rotation", check_rotation(self.rotation))
        object.__setattr__(
            self, "translation", np.asarray(self.translation, dtype=float)
        )

    def compose(self, other: "FramedTransform") -> "FramedTransform":
        """self ∘ other: first apply other, then self."""
        if other.to_frame != self.from_frame:
            raise FrameError(
                f"cannot compose {self.from_frame}->{self.to_frame} "
                f"with {other.from_frame}->{other.to_frame}"
            )
        return FramedTransform(
            rotation=self.rotation @ other.rotation,
            translation=self.rotation @ other.translation + self.translation,
            from_frame=other.from_frame,
            to_frame=self.to_frame,
        )

    def inverse(self) -> "FramedTransform":
        return FramedTransform(
            rotation=self.rotation.T,
            translation=-self.rotation.T @ self.translation,
            from_frame=self.to_frame,
            to_frame=self.from_frame,
        )


@dataclass(frozen=True)
class Wrench:
    """Force/torque pair expressed in a tagged frame."""

    force: np.ndarray
    torque: np.ndarray
    frame: str

    def __post_init__(self):
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float))
        object.__setattr__(self, "torque", np.asarray(self.torque, dtype=float))
        if self.frame not in FRAMES:
            raise FrameError(f"unknown frame tag {self.frame!r}")
        if not (np.all(np.isfinite(self.force)) and np.all(np.isfinite(self.torque))):
            raise ValueError("wrench components must be finite")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])

    @staticmethod
    def from_vector(v, frame: str) -> "Wrench":
        v = np.asarray(v, dtype=float)
        return Wrench(force=v[:3], torque=v[3:6], frame=frame)

    @staticmethod
    def zero(frame: str) -> "Wrench":
        return Wrench(np.zeros(3), np.zeros(3), frame)


def ad_wrench(t: FramedTransform, w: Wrench) -> Wrench:
    """Re-express wrench w (given in t.from_frame, acting at that frame's
    origin) in t.to_frame, acting at the destination origin:
    f' = R f,  tau' = R tau + p x (R f)."""
    if w.frame != t.from_frame:
        raise FrameError(
            f"wrench is in frame {w.frame!r}, transform expects {t.from_frame!r}"
        )
    f = t.rotation @ w.force
    tau = t.rotation @ w.torque + np.cross(t.translation, f)
    return Wrench(force=f, torque=tau, frame=t.to_frame)


def ad_matrix(t: FramedTransform) -> np.ndarray:
    """6x6 wrench transform matrix of ad_wrench."""
    A = np.zeros((6, 6))
    A[:3, :3] = t.rotation
    A[3:, :3] = hat(t.translation) @ t.rotation
    A[3:, 3:] = t.rotation
    return A
