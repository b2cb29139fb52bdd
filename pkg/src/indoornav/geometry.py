"""SE(3) pose algebra and rigid point-set alignment.

Poses are stored as a unit quaternion (w, x, y, z) plus a translation vector
in meters. Quaternions are renormalized after every operation so repeated
composition does not drift off the unit sphere. Rotation matrices are only
materialized transiently (for alignment and for converting fitted rotations
back to quaternions).

All functions here are pure and stateless.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometry

_NORM_TOL = 1e-9


def _normalize_quat(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("zero quaternion")
    # idempotent: leaving already-unit quaternions untouched keeps exact
    # cancellation in compose(inverse(p), p)
    if abs(n - 1.0) > 1e-12:
        q = q / n
    # canonical sign: w >= 0 keeps composition round-trips reproducible
    if q[0] < 0.0:
        q = -q
    return q


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of two (w, x, y, z) quaternions.

    Terms are grouped so that conj(q) * q cancels to exactly zero in the
    vector part (wx - xw and yz - zy style pairs must meet before any
    rounding happens).
    """
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        (aw * bx + ax * bw) + (ay * bz - az * by),
        (aw * by + ay * bw) + (az * bx - ax * bz),
        (aw * bz + az * bw) + (ax * by - ay * bx),
    ])


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_matrix(R: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a proper rotation matrix.

    Uses the largest-pivot variant so it is stable for all rotation angles.
    """
    R = np.asarray(R, dtype=np.float64)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array([(R[2, 1] - R[1, 2]) / s,
                      0.25 * s,
                      (R[0, 1] + R[1, 0]) / s,
                      (R[0, 2] + R[2, 0]) / s])
    elif R[1, 1] >= R[2, 2]:
        s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array([(R[0, 2] - R[2, 0]) / s,
                      (R[0, 1] + R[1, 0]) / s,
                      0.25 * s,
                      (R[1, 2] + R[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array([(R[1, 0] - R[0, 1]) / s,
                      (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s,
                      0.25 * s])
    return _normalize_quat(q)


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation (unit quaternion w,x,y,z) + translation (m)."""

    rotation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", _normalize_quat(self.rotation))
        t = np.asarray(self.translation, dtype=np.float64)
        if t.shape != (3,):
            raise ValueError("translation must be a 3-vector")
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_axis_angle(axis, angle: float, translation=(0.0, 0.0, 0.0)) -> "Pose":
        axis = np.asarray(axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        half = 0.5 * angle
        q = np.concatenate(([np.cos(half)], np.sin(half) * axis))
        return Pose(q, np.asarray(translation, dtype=np.float64))

    @staticmethod
    def from_matrix(T: np.ndarray) -> "Pose":
        T = np.asarray(T, dtype=np.float64)
        return Pose(quat_from_matrix(T[:3, :3]), T[:3, 3].copy())

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix of this pose."""
        T = np.eye(4)
        T[:3, :3] = quat_to_matrix(self.rotation)
        T[:3, 3] = self.translation
        return T

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one (3,) point or an (n, 3) point array."""
        R = quat_to_matrix(self.rotation)
        pts = np.asarray(points, dtype=np.float64)
        return pts @ R.T + self.translation


def pose_compose(a: Pose, b: Pose) -> Pose:
    """a followed by b in the matrix sense A @ B."""
    q = quat_multiply(a.rotation, b.rotation)
    Ra = quat_to_matrix(a.rotation)
    t = Ra @ b.translation + a.translation
    return Pose(q, t)


def pose_inverse(a: Pose) -> Pose:
    # translation is derived from the exact quaternion the result stores, so
    # composing with the original cancels bit-for-bit
    qinv = _normalize_quat(quat_conjugate(a.rotation))
    Rinv = quat_to_matrix(qinv)
    return Pose(qinv, -(Rinv @ a.translation))


def rotation_angle(a: Pose) -> float:
    """Geodesic angle in [0, pi] of the rotation part; translation ignored."""
    w = abs(a.rotation[0])
    v = np.linalg.norm(a.rotation[1:])
    return 2.0 * float(np.arctan2(v, w))


@dataclass(frozen=True)
class AlignmentResult:
    """Rigid transform mapping source points onto reference points."""

    transform: Pose
    residual_rmse: float


def umeyama_align(reference: np.ndarray, source: np.ndarray) -> AlignmentResult:
    """Least-squares rigid transform T minimizing sum ||ref_i - T(src_i)||^2.

    No scale is estimated: the transform is a proper rotation (det = +1)
    plus a translation. Raises :class:`DegenerateGeometry` for fewer than
    three points or when the point sets are collinear/coincident (covariance
    rank below 2). Planar sets are fine.
    """
    ref = np.asarray(reference, dtype=np.float64)
    src = np.asarray(source, dtype=np.float64)
    if ref.ndim != 2 or ref.shape[1] != 3 or src.shape != ref.shape:
        raise ValueError("expected matching (n, 3) arrays")
    n = ref.shape[0]
    if n < 3:
        raise DegenerateGeometry(f"need at least 3 point pairs, got {n}")

    mu_ref = ref.mean(axis=0)
    mu_src = src.mean(axis=0)
    cov = (ref - mu_ref).T @ (src - mu_src) / n

    U, d, Vt = np.linalg.svd(cov)
    scale = max(d[0], np.finfo(np.float64).tiny)
    if d[1] <= scale * 1e-9:
        raise DegenerateGeometry("covariance rank below 2 (collinear or coincident points)")

    if np.array_equal(ref, src):
        # the optimum is exactly the identity; skip the SVD round-off
        return AlignmentResult(transform=Pose.identity(), residual_rmse=0.0)

    S = np.eye(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0.0:
        S[2, 2] = -1.0
    R = U @ S @ Vt
    t = mu_ref - R @ mu_src

    transform = Pose(quat_from_matrix(R), t)
    # residual computed through the returned Pose so the reported value is
    # exactly what applying the transform reproduces
    residual = ref - transform.apply(src)
    rmse = float(np.sqrt(np.mean(np.sum(residual * residual, axis=1))))
    return AlignmentResult(transform=transform, residual_rmse=rmse)
