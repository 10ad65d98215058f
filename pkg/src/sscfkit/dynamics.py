"""Dynamic parameters derived from SSCF tracks.

Transition angles, polar radius/angle in a feature plane, the
SSCF1/SSCF3 x SSCF2/SSCF3 ratio plane, per-utterance mean-variance
normalization and regression deltas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

MOVEMENT_EPS = 1e-9
MIN_SSCF3_HZ = 1e-6


def _to_unit(deg: np.ndarray, unit: str) -> np.ndarray:
    if unit == "degrees":
        return deg
    if unit == "radians":
        return np.deg2rad(deg)
    raise ValueError(f"unknown angle unit {unit!r}")


def _fold_half_plane(deg: np.ndarray) -> np.ndarray:
    """Map a four-quadrant angle in (-180, 180] onto the arctan range (-90, 90]."""
    out = np.where(deg > 90.0, deg - 180.0, deg)
    return np.where(out <= -90.0, out + 180.0, out)


@dataclass(frozen=True)
class AngleTrack:
    angles: np.ndarray
    held: np.ndarray  # frames whose angle was held because nothing moved

    def max_jump(self) -> float:
        if self.angles.size < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.angles))))


def direction_angle(da, db, four_quadrant: bool = False) -> np.ndarray:
    """Direction of the displacement ``(da, db)`` in degrees.

    The two-quadrant form is ``arctan(db / da)`` in (-90, 90] and cannot tell a
    movement from its reverse. The four-quadrant form keeps the direction and
    lies in (-180, 180].
    """
    deg = np.degrees(np.arctan2(db, da))
    deg = np.where(deg == -180.0, 180.0, deg)
    return deg if four_quadrant else _fold_half_plane(deg)


def transition_angle(track_a, track_b, four_quadrant: bool = False, eps: float = MOVEMENT_EPS,
                     unit: str = "degrees") -> AngleTrack:
    """Frame-to-frame movement direction in the (a, b) plane.

    Frame ``j`` uses ``a[j] - a[j-1]`` and ``b[j] - b[j-1]``; frame 0 copies
    frame 1. When neither coordinate moves by ``eps`` the previous angle is
    held and the frame is marked in ``held``.
    """
    a = np.asarray(track_a, dtype=np.float64)
    b = np.asarray(track_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ContractError("transition_angle needs two equal-length 1-D tracks of >= 2 frames")
    da, db = np.diff(a), np.diff(b)
    raw = direction_angle(da, db, four_quadrant)
    still = (np.abs(da) < eps) & (np.abs(db) < eps)
    angles = np.empty(a.size)
    held = np.zeros(a.size, dtype=bool)
    prev = 0.0
    for j in range(1, a.size):
        if still[j - 1]:
            angles[j] = prev
            held[j] = True
        else:
            angles[j] = prev = raw[j - 1]
    angles[0], held[0] = angles[1], held[1]
    return AngleTrack(_to_unit(angles, unit), held)


def net_transition_angle(track_a, track_b, four_quadrant: bool = True, edge_frames: int = 1,
                         eps: float = MOVEMENT_EPS) -> float | None:
    """Angle of the end-minus-beginning displacement over a whole transition.

    The beginning and end positions are means over ``edge_frames`` frames at
    each end. Returns ``None`` when the transition does not move.
    """
    a = np.asarray(track_a, dtype=np.float64)
    b = np.asarray(track_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ContractError("net_transition_angle needs two equal-length tracks of >= 2 frames")
    k = max(1, min(edge_frames, a.size // 2))
    da = a[-k:].mean() - a[:k].mean()
    db = b[-k:].mean() - b[:k].mean()
    if abs(da) < eps and abs(db) < eps:
        return None
    return float(direction_angle(da, db, four_quadrant))


@dataclass(frozen=True)
class PolarTrack:
    radius: np.ndarray
    angle: np.ndarray
    degenerate: np.ndarray  # frames at the origin

    def max_angle_jump(self) -> float:
        if self.angle.size < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.angle))))


def polar(track_a, track_b, unit: str = "degrees") -> PolarTrack:
    """Radius ``sqrt(a^2 + b^2)`` and angle ``arctan(b / a)`` per frame.

    Both coordinates must be nonnegative, so the angle lies in [0, 90]
    degrees. ``a == 0 < b`` gives 90; the origin gives angle 0 and is flagged.
    """
    a = np.asarray(track_a, dtype=np.float64)
    b = np.asarray(track_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 1:
        raise ContractError("polar needs two equal-length 1-D tracks")
    if np.any(a < 0) or np.any(b < 0):
        raise ContractError("polar coordinates must be nonnegative")
    radius = np.hypot(a, b)
    angle = np.degrees(np.arctan2(b, a))
    return PolarTrack(radius, _to_unit(angle, unit), radius == 0.0)


def ratio_plane(sscf_values) -> np.ndarray:
    """Per-frame ``(SSCF1/SSCF3, SSCF2/SSCF3)`` as an ``(n_frames, 2)`` array."""
    s = np.asarray(getattr(sscf_values, "values", sscf_values), dtype=np.float64)
    if s.ndim != 2 or s.shape[1] < 4:
        raise ContractError("ratio_plane needs an (n_frames, >=4) SSCF array")
    s3 = s[:, 3]
    if np.any(s3 < MIN_SSCF3_HZ):
        raise ContractError("SSCF3 is below 1e-6 Hz; check the subband configuration")
    return np.column_stack([s[:, 1] / s3, s[:, 2] / s3])


@dataclass(frozen=True)
class NormalizedTrack:
    values: np.ndarray
    constant: bool


def mvn(track) -> NormalizedTrack:
    """Zero-mean, unit-variance (population) normalization over the utterance.

    A constant track normalizes to zeros with ``constant`` set.
    """
    x = np.asarray(track, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ContractError("mvn needs a 1-D track of >= 2 frames")
    mean = x.mean()
    std = x.std()
    if std <= 1e-10 * max(1.0, abs(mean)):
        return NormalizedTrack(np.zeros_like(x), True)
    return NormalizedTrack((x - mean) / std, False)


def deltas(features, half_window: int = 2) -> np.ndarray:
    """Regression deltas over ``+-half_window`` frames with edge frames replicated."""
    x = np.asarray(features, dtype=np.float64)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x.T).T if squeeze else x
    if x.shape[0] < 1:
        raise ContractError("deltas need at least one frame")
    if half_window < 1:
        raise ValueError("half_window must be >= 1")
    n = half_window
    padded = np.pad(x, ((n, n), (0, 0)), mode="edge")
    t = x.shape[0]
    out = np.zeros_like(x)
    for k in range(1, n + 1):
        out += k * (padded[n + k:n + k + t] - padded[n - k:n - k + t])
    out /= 2.0 * sum(k * k for k in range(1, n + 1))
    return out[:, 0] if squeeze else out
