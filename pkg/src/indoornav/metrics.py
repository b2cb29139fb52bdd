"""Trajectory accuracy metrics: relative pose error and absolute trajectory error.

Inputs must already be associated 1:1 (same length, matched timestamps);
pairing across streams lives in :mod:`indoornav.dataset_io`. Relative error
compares motion increments over a fixed frame interval, absolute error
compares globally aligned positions.

The relative-error discrepancy per frame is computed as

    E_i = (Q_i^-1 Q_{i+d})^-1 (P_i^-1 P_{i+d})

so identical trajectories give exactly zero error. A ``mode="product"``
variant that multiplies the two increments without inverting the first is
kept for comparison but is not the default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset_io import Trajectory
from .errors import DeltaTooLarge, EmptySamples, LengthMismatch
from .geometry import (AlignmentResult, Pose, pose_compose, pose_inverse,
                       rotation_angle, umeyama_align)


@dataclass(frozen=True)
class MetricSummary:
    rmse: float
    mean: float
    median: float
    count: int

    def to_dict(self) -> dict:
        return {"rmse": self.rmse, "mean": self.mean,
                "median": self.median, "count": self.count}


@dataclass(frozen=True)
class RpeReport:
    delta: int
    translational: MetricSummary   # meters
    rotational: MetricSummary      # degrees
    per_frame: list[tuple[float, float]]  # (translation norm m, rotation deg)

    def to_dict(self) -> dict:
        return {"delta": self.delta,
                "translational": self.translational.to_dict(),
                "rotational": self.rotational.to_dict(),
                "per_frame": [list(s) for s in self.per_frame]}


@dataclass(frozen=True)
class AteReport:
    alignment: AlignmentResult
    translational: MetricSummary   # meters
    per_frame: list[float]

    def to_dict(self) -> dict:
        pose = self.alignment.transform
        qw, qx, qy, qz = pose.rotation
        tx, ty, tz = pose.translation
        return {"alignment": {"rotation_wxyz": [qw, qx, qy, qz],
                              "translation": [tx, ty, tz],
                              "residual_rmse": self.alignment.residual_rmse},
                "translational": self.translational.to_dict(),
                "per_frame": list(self.per_frame)}


def summarize(samples) -> MetricSummary:
    """RMSE, mean, and median of nonnegative samples.

    The median of an even-length list is the lower middle element, so the
    reported value is always an actual sample.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise EmptySamples("no samples to summarize")
    rmse = float(np.sqrt(np.mean(arr * arr)))
    mean = float(np.mean(arr))
    median = float(np.sort(arr)[(arr.size - 1) // 2])
    return MetricSummary(rmse=rmse, mean=mean, median=median, count=int(arr.size))


def _check_pair(gt: Trajectory, est: Trajectory):
    if len(gt) != len(est):
        raise LengthMismatch(f"ground truth has {len(gt)} poses, estimate {len(est)}")


def rpe(gt: Trajectory, est: Trajectory, delta: int = 1, mode: str = "canonical") -> RpeReport:
    """Relative pose error over a frame interval ``delta``.

    ``mode="canonical"`` inverts the true increment before composing with the
    estimated one (discrepancy form); ``mode="product"`` composes the raw
    increments as printed in some write-ups.
    """
    _check_pair(gt, est)
    if delta < 1:
        raise ValueError("delta must be at least 1")
    n = len(gt)
    if delta >= n:
        raise DeltaTooLarge(f"delta {delta} must be below trajectory length {n}")
    if mode not in ("canonical", "product"):
        raise ValueError(f"unknown mode {mode!r}")

    m = n - delta
    per_frame = []
    for i in range(m):
        q_rel = pose_compose(pose_inverse(gt.poses[i]), gt.poses[i + delta])
        p_rel = pose_compose(pose_inverse(est.poses[i]), est.poses[i + delta])
        if mode == "canonical":
            err = pose_compose(pose_inverse(q_rel), p_rel)
        else:
            err = pose_compose(q_rel, p_rel)
        per_frame.append((float(np.linalg.norm(err.translation)),
                          float(np.degrees(rotation_angle(err)))))

    trans = summarize([s[0] for s in per_frame])
    rot = summarize([s[1] for s in per_frame])
    return RpeReport(delta=delta, translational=trans, rotational=rot,
                     per_frame=per_frame)


def ate(gt: Trajectory, est: Trajectory) -> AteReport:
    """Absolute trajectory error after rigid least-squares alignment.

    The aligning transform maps estimated positions onto ground truth and is
    fitted on the translation components, the usual benchmark convention.
    """
    _check_pair(gt, est)
    alignment = umeyama_align(gt.translations(), est.translations())
    S = alignment.transform
    per_frame = []
    for q_pose, p_pose in zip(gt.poses, est.poses):
        err = pose_compose(pose_inverse(q_pose), pose_compose(S, p_pose))
        per_frame.append(float(np.linalg.norm(err.translation)))
    return AteReport(alignment=alignment,
                     translational=summarize(per_frame),
                     per_frame=per_frame)


def delta_for_one_second(timestamps: np.ndarray) -> int:
    """Frame count whose typical spacing is nearest 1 s of timestamps."""
    ts = np.asarray(timestamps, dtype=np.float64)
    if ts.size < 2:
        return 1
    dt = float(np.median(np.diff(ts)))
    if dt <= 0:
        return 1
    return max(1, int(round(1.0 / dt)))
