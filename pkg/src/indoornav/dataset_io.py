"""Readers and writers for the benchmark-style file formats.

Formats handled here:

- camera trajectories: whitespace text, one pose per line as
  ``timestamp tx ty tz qx qy qz qw`` with ``#`` comments (the common RGB-D
  benchmark layout); quaternions are reordered to internal (w, x, y, z)
- image index files: ``timestamp filename`` lines with ``#`` comments
- detector output: JSON-lines, one frame per line
- grayscale images and masks: binary PGM (P5), maxval 255

Parsers are pure; every parse failure carries a 1-based line number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, OrderError, ParseError
from .geometry import Pose

# matches the benchmark convention for pairing streams by timestamp
DEFAULT_MAX_DIFF = 0.02


@dataclass
class Trajectory:
    """Timestamp-ordered pose sequence (ground truth or estimate)."""

    timestamps: np.ndarray
    poses: list[Pose]

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        if len(self.timestamps) != len(self.poses):
            raise ValueError("timestamps and poses differ in length")
        if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise OrderError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.poses)

    def translations(self) -> np.ndarray:
        """(n, 3) array of the translation components."""
        return np.array([p.translation for p in self.poses]).reshape(-1, 3)

    def subset(self, indices) -> "Trajectory":
        return Trajectory(self.timestamps[list(indices)],
                          [self.poses[i] for i in indices])


@dataclass
class BoundingBox:
    class_label: str
    score: float
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError("box width and height must be positive")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError("score must lie in [0, 1]")

    def contains(self, px: float, py: float) -> bool:
        """Boundary-inclusive point membership."""
        return self.x <= px <= self.x + self.w and self.y <= py <= self.y + self.h


@dataclass
class FrameDetections:
    timestamp: float
    boxes: list[BoundingBox] = field(default_factory=list)


def parse_trajectory(text: str) -> Trajectory:
    """Parse ``timestamp tx ty tz qx qy qz qw`` lines into a Trajectory."""
    timestamps = []
    poses = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 8:
            raise ParseError(lineno, f"expected 8 fields, got {len(fields)}")
        try:
            vals = [float(f) for f in fields]
        except ValueError as exc:
            raise ParseError(lineno, f"non-numeric field: {exc}") from None
        t, tx, ty, tz, qx, qy, qz, qw = vals
        if timestamps and t <= timestamps[-1]:
            raise OrderError(f"line {lineno}: timestamp {t} not after {timestamps[-1]}")
        if qx == 0 and qy == 0 and qz == 0 and qw == 0:
            raise ParseError(lineno, "zero quaternion")
        timestamps.append(t)
        poses.append(Pose(np.array([qw, qx, qy, qz]), np.array([tx, ty, tz])))
    return Trajectory(np.array(timestamps), poses)


def serialize_trajectory(traj: Trajectory) -> str:
    """Canonical text form; parse(serialize(t)) reproduces t exactly."""
    lines = []
    for t, pose in zip(traj.timestamps, traj.poses):
        vals = [t, *pose.translation, *pose.rotation[1:], pose.rotation[0]]
        lines.append(" ".join(repr(float(v)) for v in vals))
    return "\n".join(lines) + "\n" if lines else ""


def parse_image_index(text: str) -> list[tuple[float, str]]:
    """Parse ``timestamp filename`` lines; returns (timestamp, path) pairs."""
    entries: list[tuple[float, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(lineno, f"expected 2 fields, got {len(fields)}")
        try:
            t = float(fields[0])
        except ValueError:
            raise ParseError(lineno, f"bad timestamp {fields[0]!r}") from None
        if entries and t <= entries[-1][0]:
            raise OrderError(f"line {lineno}: timestamp {t} not after {entries[-1][0]}")
        entries.append((t, fields[1]))
    return entries


def associate(a, b, max_diff: float = DEFAULT_MAX_DIFF) -> list[tuple[int, int]]:
    """Greedy nearest-neighbor pairing of two sorted timestamp lists.

    Candidate pairs are taken smallest |dt| first; each element is used at
    most once, pairs farther apart than ``max_diff`` are discarded, and a
    pair that would cross an accepted one is skipped so the result is
    monotone in both index sequences. Output is sorted by a-index.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        return []
    bound = max_diff + 1e-12  # keep exact-boundary pairs despite float subtraction
    candidates = []
    for i, ta in enumerate(a):
        lo = int(np.searchsorted(b, ta - bound, side="left"))
        hi = int(np.searchsorted(b, ta + bound, side="right"))
        for j in range(lo, hi):
            diff = abs(ta - b[j])
            if diff <= bound:
                candidates.append((diff, i, j))
    candidates.sort()

    used_a: set[int] = set()
    used_b: set[int] = set()
    accepted: list[tuple[int, int]] = []
    for _, i, j in candidates:
        if i in used_a or j in used_b:
            continue
        if any((i - ai) * (j - bj) < 0 for ai, bj in accepted):
            continue  # would cross an accepted pair
        used_a.add(i)
        used_b.add(j)
        accepted.append((i, j))
    accepted.sort()
    return accepted


_BOX_KEYS = ("cls", "score", "x", "y", "w", "h")


def parse_detections(text: str) -> list[FrameDetections]:
    """Parse JSON-lines detector output, one frame record per line."""
    frames: list[FrameDetections] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"bad JSON: {exc.msg}") from None
        if not isinstance(rec, dict) or "t" not in rec or "boxes" not in rec:
            raise ParseError(lineno, 'record must be an object with "t" and "boxes"')
        boxes = []
        for k, b in enumerate(rec["boxes"]):
            missing = [key for key in _BOX_KEYS if key not in b]
            if missing:
                raise ParseError(lineno, f"box {k} missing keys {missing}")
            try:
                boxes.append(BoundingBox(class_label=str(b["cls"]),
                                         score=float(b["score"]),
                                         x=float(b["x"]), y=float(b["y"]),
                                         w=float(b["w"]), h=float(b["h"])))
            except (TypeError, ValueError) as exc:
                raise ParseError(lineno, f"box {k}: {exc}") from None
        t = float(rec["t"])
        if frames and t <= frames[-1].timestamp:
            raise OrderError(f"line {lineno}: timestamp {t} not after {frames[-1].timestamp}")
        frames.append(FrameDetections(timestamp=t, boxes=boxes))
    return frames


def serialize_detections(frames: list[FrameDetections]) -> str:
    lines = []
    for fr in frames:
        rec = {"t": fr.timestamp,
               "boxes": [{"cls": b.class_label, "score": b.score,
                          "x": b.x, "y": b.y, "w": b.w, "h": b.h}
                         for b in fr.boxes]}
        lines.append(json.dumps(rec, separators=(",", ":")))
    return "\n".join(lines) + "\n" if lines else ""


def clamp_boxes(frame: FrameDetections, width: int, height: int) -> tuple[FrameDetections, int]:
    """Intersect boxes with the image rectangle.

    Returns the clamped frame plus the number of clamp events (boxes that
    had to shrink; boxes entirely outside are dropped and also counted).
    """
    clamped = []
    events = 0
    for box in frame.boxes:
        x0 = max(box.x, 0.0)
        y0 = max(box.y, 0.0)
        x1 = min(box.x + box.w, float(width))
        y1 = min(box.y + box.h, float(height))
        if x1 <= x0 or y1 <= y0:
            events += 1
            continue
        if (x0, y0, x1 - x0, y1 - y0) != (box.x, box.y, box.w, box.h):
            events += 1
        clamped.append(BoundingBox(box.class_label, box.score, x0, y0, x1 - x0, y1 - y0))
    return FrameDetections(frame.timestamp, clamped), events


# --- binary PGM (P5) images and masks -------------------------------------

def _read_pgm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Read `count` whitespace/comment-separated header integers.

    Returns the integers and the offset just past the single whitespace byte
    that terminates the last one.
    """
    tokens: list[int] = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise FormatError("truncated header")
        try:
            tokens.append(int(data[start:i]))
        except ValueError:
            raise FormatError(f"bad header token {data[start:i]!r}") from None
    if i >= n or not data[i : i + 1].isspace():
        raise FormatError("missing whitespace after header")
    return tokens, i + 1


def read_gray_image(data: bytes) -> np.ndarray:
    """Decode a binary PGM (P5, maxval 255) into a uint8 (h, w) array."""
    if data[:2] != b"P5":
        raise FormatError(f"bad magic {data[:2]!r}, expected P5")
    (width, height, maxval), offset = _read_pgm_tokens(data[2:], 3)
    offset += 2
    if width <= 0 or height <= 0:
        raise FormatError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}, expected 255")
    raster = data[offset : offset + width * height]
    if len(raster) != width * height:
        raise FormatError(f"expected {width * height} raster bytes, got {len(raster)}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_gray_image(img: np.ndarray) -> bytes:
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    img = img.astype(np.uint8, copy=False)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def read_mask(data: bytes) -> np.ndarray:
    """Decode a mask PGM; any nonzero pixel counts as masked."""
    return read_gray_image(data) != 0


def write_mask(mask: np.ndarray) -> bytes:
    """Encode a boolean (h, w) mask as P5: 0 = keep, 255 = masked."""
    mask = np.asarray(mask)
    if mask.dtype != bool:
        raise ValueError("mask must be boolean")
    return write_gray_image(np.where(mask, 255, 0).astype(np.uint8))
