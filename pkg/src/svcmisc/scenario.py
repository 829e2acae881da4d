"""Synthetic fore-aft shuttle scenario and head-tilt conditions.

Reproduces the experimental timeline: repeated 3 m fore-aft traverses in
5-minute sets separated by short breaks, followed by a seated recovery
period. Two head conditions are generated: Static (head on the Earth
vertical, zero rotation) and Move (head pitched onto the gravitoinertial
acceleration, with an optional first-order tracking lag).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, ProfileError
from .motion_data import CSV_FLOAT_FMT, GRAVITY_DEFAULT, MotionTrace


@dataclass(frozen=True)
class ShuttleConfig:
    distance: float = 3.0          # m per traverse
    v_max: float = 1.67            # m/s
    a_peak: float = 1.0            # m/s^2
    dwell: float = 0.5             # s pause at each end
    set_duration: float = 300.0    # s
    n_sets: int = 4
    break_duration: float = 30.0   # s
    recovery_duration: float = 300.0  # s
    dt: float = 0.01               # s

    def __post_init__(self):
        for name in ("distance", "v_max", "a_peak", "dwell", "set_duration",
                     "break_duration", "recovery_duration", "dt"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ProfileError(f"{name} must be > 0")
        if self.n_sets < 1:
            raise ProfileError("n_sets must be >= 1")

    @property
    def total_duration(self) -> float:
        return (
            self.n_sets * self.set_duration
            + (self.n_sets - 1) * self.break_duration
            + self.recovery_duration
        )


class HeadTilt(enum.Enum):
    STATIC = "static"
    MOVE = "move"

    @classmethod
    def parse(cls, name: str) -> "HeadTilt":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise DataFormatError(
                f"unknown head-tilt condition {name!r} (expected static or move)"
            ) from None


@dataclass(frozen=True)
class HeadTiltCondition:
    tilt: HeadTilt
    tau_head: float = 0.0  # s, first-order tracking lag; 0 = perfect pursuit

    def __post_init__(self):
        if not (np.isfinite(self.tau_head) and self.tau_head >= 0):
            raise DataFormatError("tau_head must be >= 0")


def _traverse_segments(cfg: ShuttleConfig) -> list[tuple[float, float]]:
    """(duration, acceleration) segments of one forward traverse.

    Trapezoidal velocity when the peak speed is limited by v_max,
    triangular otherwise.
    """
    d, a, vm = cfg.distance, cfg.a_peak, cfg.v_max
    if a * d > vm * vm:
        t_acc = vm / a
        d_cruise = d - vm * vm / a
        t_cruise = d_cruise / vm
        segs = [(t_acc, a), (t_cruise, 0.0), (t_acc, -a)]
    else:
        v_pk = np.sqrt(a * d)
        if v_pk <= 0:
            raise ProfileError("degenerate traverse: zero peak velocity")
        t_acc = v_pk / a
        segs = [(t_acc, a), (t_acc, -a)]
    return segs


def traverse_duration(cfg: ShuttleConfig) -> float:
    return sum(dur for dur, _ in _traverse_segments(cfg))


def traverse_displacement(cfg: ShuttleConfig) -> float:
    """Exact displacement of one traverse from its piecewise-constant profile."""
    x = 0.0
    v = 0.0
    for dur, a in _traverse_segments(cfg):
        x += v * dur + 0.5 * a * dur * dur
        v += a * dur
    return x


@dataclass(frozen=True)
class ShuttleProfile:
    """Earth-frame fore-aft acceleration on a uniform grid, plus timeline."""

    dt: float
    t: np.ndarray
    a_x: np.ndarray
    segments: list = field(repr=False)          # (t_start, t_end, a) pieces
    phase_changes: list = field(repr=False)     # (t_start, label)

    @property
    def duration(self) -> float:
        return float(self.t[-1])


def shuttle_accel_profile(cfg: ShuttleConfig) -> ShuttleProfile:
    """Build the session-long fore-aft acceleration profile.

    Each set tiles complete traverse+dwell cycles, direction alternating
    per traverse; the remainder of a set, the breaks, and the recovery are
    at rest. Raises ProfileError when the traverse kinematics are
    unsolvable.
    """
    tr_segs = _traverse_segments(cfg)
    cycle = traverse_duration(cfg) + cfg.dwell
    if cycle > cfg.set_duration:
        raise ProfileError("one traverse does not fit inside a set")

    segments: list[tuple[float, float, float]] = []
    phase_changes: list[tuple[float, str]] = []
    t = 0.0

    def add(dur: float, a: float):
        nonlocal t
        if dur > 0:
            segments.append((t, t + dur, a))
            t += dur

    n_cycles = int(np.floor(cfg.set_duration / cycle + 1e-12))
    for s in range(cfg.n_sets):
        phase_changes.append((t, f"set_{s + 1}"))
        set_start = t
        direction = 1.0
        for _ in range(n_cycles):
            for dur, a in tr_segs:
                add(dur, direction * a)
            add(cfg.dwell, 0.0)
            direction = -direction
        add(set_start + cfg.set_duration - t, 0.0)  # pad set remainder
        if s < cfg.n_sets - 1:
            phase_changes.append((t, f"break_{s + 1}"))
            add(cfg.break_duration, 0.0)
    phase_changes.append((t, "recovery"))
    add(cfg.recovery_duration, 0.0)

    total = cfg.total_duration
    n = int(round(total / cfg.dt))
    tg = cfg.dt * np.arange(n + 1)
    a_x = np.zeros(n + 1)
    for t0, t1, a in segments:
        if a == 0.0:
            continue
        # grid points in [t0, t1): boundaries belong to the newer segment
        lo = int(np.ceil(t0 / cfg.dt - 1e-9))
        hi = int(np.ceil(t1 / cfg.dt - 1e-9))
        a_x[lo:hi] = a
    return ShuttleProfile(cfg.dt, tg, a_x, segments, phase_changes)


def head_motion(
    profile: ShuttleProfile,
    condition: HeadTiltCondition,
    g0: float = GRAVITY_DEFAULT,
) -> MotionTrace:
    """Head-frame motion trace for a shuttle profile under a tilt condition.

    Static: head frame equals the Earth frame; f = (a_x, 0, g0), omega = 0.
    Move: the head pitches about y by theta = atan2(a_x, g0) so its z-axis
    tracks the GIA (optionally through a first-order lag tau_head);
    earth-frame vectors are rotated into the head frame, and the pitch
    rate enters as omega_y. With perfect tracking the x/y components of
    the head-frame specific force vanish identically.
    """
    t = profile.t
    ax = profile.a_x
    n = t.size
    zeros = np.zeros(n)
    g_col = np.full(n, g0)

    if condition.tilt is HeadTilt.STATIC:
        f = np.column_stack([ax, zeros, g_col])
        omega = np.zeros((n, 3))
        a = np.column_stack([ax, zeros, zeros])
        return MotionTrace(profile.dt, t, f, omega, a)

    theta_target = np.arctan2(ax, g0)
    if condition.tau_head > 0:
        # exact discrete first-order lag over each dt
        alpha = 1.0 - np.exp(-profile.dt / condition.tau_head)
        theta = np.empty(n)
        theta[0] = theta_target[0]
        for k in range(1, n):
            theta[k] = theta[k - 1] + alpha * (theta_target[k] - theta[k - 1])
    else:
        theta = theta_target
    # piecewise-constant a_x: theta is constant inside pieces (gradient 0)
    # and central differences apply at piece boundaries
    dtheta = np.gradient(theta, profile.dt)

    c = np.cos(theta)
    s = np.sin(theta)
    f = np.column_stack([ax * c - g0 * s, zeros, ax * s + g0 * c])
    a = np.column_stack([ax * c, zeros, ax * s])
    omega = np.column_stack([zeros, dtheta, zeros])
    return MotionTrace(profile.dt, t, f, omega, a)


def write_timeline_csv(profile: ShuttleProfile, path) -> None:
    """Write `t,phase` rows, one per phase change."""
    with open(path, "w", newline="") as fh:
        fh.write("t,phase\n")
        for t0, label in profile.phase_changes:
            fh.write((CSV_FLOAT_FMT % t0) + "," + label + "\n")
