"""Head-motion and MISC time-series containers, CSV ingestion, resampling.

Frame convention: right-handed head frame, x forward, y left, z up.
At upright rest the specific force is f = (0, 0, +g0) m/s^2.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError

GRAVITY_DEFAULT = 9.81  # m/s^2

# One float per CSV cell, >= 9 significant digits so round trips stay
# within 1e-9 even for t up to ~1e3 s.
CSV_FLOAT_FMT = "%.12g"

_SPACING_TOL = 1e-9  # s, allowed jitter around uniform dt


def vec3(x: float, y: float, z: float) -> np.ndarray:
    """3-vector as a float64 array."""
    return np.array([x, y, z], dtype=float)


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise DataFormatError(f"{name} contains non-finite values")


@dataclass(frozen=True)
class MotionSample:
    """One head-motion sample: specific force f, angular velocity omega,
    true inertial acceleration a, all in the head frame."""

    t: float
    f: np.ndarray      # m/s^2
    omega: np.ndarray  # rad/s
    a: np.ndarray      # m/s^2

    def __post_init__(self):
        for name in ("f", "omega", "a"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise DataFormatError(f"{name} must be a 3-vector")
            _check_finite(name, v)
            object.__setattr__(self, name, v)
        if not np.isfinite(self.t) or self.t < 0:
            raise DataFormatError("t must be finite and >= 0")


@dataclass(frozen=True)
class RawMotion:
    """Motion channels on a possibly non-uniform time grid (pre-resampling)."""

    t: np.ndarray
    f: np.ndarray
    omega: np.ndarray
    a: np.ndarray
    a_inferred: bool = False

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise DataFormatError("need at least 2 samples")
        if np.any(np.diff(t) <= 0):
            raise DataFormatError("timestamps must be strictly increasing")
        object.__setattr__(self, "t", t)
        for name in ("f", "omega", "a"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (t.size, 3):
                raise DataFormatError(f"{name} must have shape (N, 3)")
            _check_finite(name, v)
            object.__setattr__(self, name, v)
        _check_finite("t", t)


@dataclass(frozen=True)
class MotionTrace:
    """Uniformly sampled head-motion input.

    Arrays are row-per-sample: t (N,), f/omega/a (N, 3).
    """

    dt: float
    t: np.ndarray
    f: np.ndarray
    omega: np.ndarray
    a: np.ndarray
    a_inferred: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise DataFormatError("dt must be positive and finite")
        raw = RawMotion(self.t, self.f, self.omega, self.a, self.a_inferred)
        spacing = np.diff(raw.t)
        if np.any(np.abs(spacing - self.dt) > _SPACING_TOL):
            raise DataFormatError(
                "non-uniform spacing: sample spacing deviates from dt "
                f"by more than {_SPACING_TOL:g} s"
            )
        for name in ("t", "f", "omega", "a"):
            object.__setattr__(self, name, getattr(raw, name))

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def span(self) -> float:
        return float(self.t[-1] - self.t[0])

    def sample(self, i: int) -> MotionSample:
        return MotionSample(float(self.t[i]), self.f[i], self.omega[i], self.a[i])

    def as_raw(self) -> RawMotion:
        return RawMotion(self.t, self.f, self.omega, self.a, self.a_inferred)


@dataclass(frozen=True)
class MiscObservation:
    """A single time-stamped MISC value (0-10 scale)."""

    t: float
    value: float

    def __post_init__(self):
        if not (np.isfinite(self.t) and np.isfinite(self.value)):
            raise DataFormatError("MISC observation must be finite")
        if self.value < 0:
            raise DataFormatError("MISC value must be >= 0")


@dataclass(frozen=True)
class MiscTrace:
    """Time-stamped MISC values.

    Observed traces hold integers in {0..10}; model-predicted traces may
    hold any non-negative reals.
    """

    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or v.shape != t.shape:
            raise DataFormatError("t and values must be 1-D with equal length")
        _check_finite("t", t)
        _check_finite("values", v)
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise DataFormatError("timestamps must be strictly increasing")
        if np.any(v < 0):
            raise DataFormatError("MISC values must be >= 0")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.t.size

    def observations(self) -> list[MiscObservation]:
        return [MiscObservation(float(ti), float(vi))
                for ti, vi in zip(self.t, self.values)]

    @classmethod
    def from_observations(cls, obs: list[MiscObservation]) -> "MiscTrace":
        return cls(np.array([o.t for o in obs]), np.array([o.value for o in obs]))


def _read_csv_rows(path) -> tuple[list[str], list[list[str]]]:
    """Read a CSV file, skipping blank and '#'-comment lines."""
    with open(path, newline="") as fh:
        rows = []
        for row in csv.reader(fh):
            if not row:
                continue
            if row[0].lstrip().startswith("#"):
                continue
            rows.append([c.strip() for c in row])
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = [c.lower() for c in rows[0]]
    return header, rows[1:]


def _parse_float(path, row_idx: int, col: str, cell: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise DataFormatError(
            f"{path}: non-numeric cell in column '{col}' at data row {row_idx + 1}: "
            f"{cell!r}"
        ) from None


def read_motion_csv(path, gravity_magnitude: float = GRAVITY_DEFAULT) -> RawMotion:
    """Parse a motion CSV without requiring uniform spacing.

    Header: t,fx,fy,fz,wx,wy,wz and optionally ax,ay,az. When the
    a-columns are absent, the true inertial acceleration is inferred as
    a = f - (0, 0, gravity_magnitude) (static upright head assumption)
    and ``a_inferred`` is set on the result.
    """
    header, data = _read_csv_rows(path)
    required = ["t", "fx", "fy", "fz", "wx", "wy", "wz"]
    optional = ["ax", "ay", "az"]
    for col in required:
        if col not in header:
            raise DataFormatError(f"{path}: missing required column '{col}'")
    has_a = all(col in header for col in optional)
    if not has_a and any(col in header for col in optional):
        raise DataFormatError(f"{path}: ax,ay,az must be given together or not at all")
    cols = required + (optional if has_a else [])
    idx = {c: header.index(c) for c in cols}

    if len(data) < 2:
        raise DataFormatError(f"{path}: fewer than 2 data rows")
    vals = np.empty((len(data), len(cols)))
    for i, row in enumerate(data):
        if len(row) < len(header):
            raise DataFormatError(f"{path}: short row at data row {i + 1}")
        for j, c in enumerate(cols):
            vals[i, j] = _parse_float(path, i, c, row[idx[c]])

    t = vals[:, 0]
    if np.any(np.diff(t) <= 0):
        raise DataFormatError(f"{path}: non-increasing timestamps")
    f = vals[:, 1:4]
    omega = vals[:, 4:7]
    if has_a:
        a = vals[:, 7:10]
        inferred = False
    else:
        a = f - np.array([0.0, 0.0, gravity_magnitude])
        inferred = True
    return RawMotion(t, f, omega, a, a_inferred=inferred)


def load_motion_csv(path, gravity_magnitude: float = GRAVITY_DEFAULT) -> MotionTrace:
    """Load and validate a uniformly sampled motion CSV.

    Raises DataFormatError on non-uniform spacing; use read_motion_csv +
    resample_linear for irregular logs.
    """
    raw = read_motion_csv(path, gravity_magnitude)
    dt = float(raw.t[1] - raw.t[0])
    return MotionTrace(dt, raw.t, raw.f, raw.omega, raw.a, raw.a_inferred)


def load_misc_csv(path) -> MiscTrace:
    """Load an observed MISC CSV (header t,misc; integer values in 0..10)."""
    header, data = _read_csv_rows(path)
    for col in ("t", "misc"):
        if col not in header:
            raise DataFormatError(f"{path}: missing required column '{col}'")
    it, im = header.index("t"), header.index("misc")
    t = np.empty(len(data))
    v = np.empty(len(data))
    for i, row in enumerate(data):
        t[i] = _parse_float(path, i, "t", row[it])
        v[i] = _parse_float(path, i, "misc", row[im])
        if not 0 <= v[i] <= 10:
            raise DataFormatError(
                f"{path}: MISC value {v[i]:g} outside [0, 10] at data row {i + 1}"
            )
        if abs(v[i] - round(v[i])) > 1e-9:
            raise DataFormatError(
                f"{path}: observed MISC must be an integer, got {v[i]:g} "
                f"at data row {i + 1}"
            )
    if np.any(np.diff(t) <= 0):
        raise DataFormatError(f"{path}: non-increasing timestamps")
    return MiscTrace(t, v)


def resample_linear(motion: RawMotion | MotionTrace, dt: float) -> MotionTrace:
    """Resample motion channels onto the uniform grid t0, t0+dt, ...

    Linear interpolation per channel; queries beyond the data are clamped
    to the nearest sample. Already-uniform traces at the same dt pass
    through with bitwise-equal values.
    """
    if not (np.isfinite(dt) and dt > 0):
        raise DataFormatError("dt must be positive")
    if isinstance(motion, MotionTrace):
        if abs(motion.dt - dt) <= 1e-15:
            return motion
        motion = motion.as_raw()
    t = motion.t
    span = t[-1] - t[0]
    if span < dt:
        raise DataFormatError("input span is shorter than dt")
    n = int(np.floor(span / dt + 1e-9)) + 1
    tq = t[0] + dt * np.arange(n)
    out = {}
    for name in ("f", "omega", "a"):
        src = getattr(motion, name)
        out[name] = np.column_stack(
            [np.interp(tq, t, src[:, k]) for k in range(3)]
        )
    return MotionTrace(dt, tq, out["f"], out["omega"], out["a"], motion.a_inferred)


def write_motion_csv(motion: MotionTrace | RawMotion, path) -> None:
    """Write a motion CSV with explicit a-columns."""
    with open(path, "w", newline="") as fh:
        fh.write("t,fx,fy,fz,wx,wy,wz,ax,ay,az\n")
        for i in range(motion.t.size):
            cells = [motion.t[i], *motion.f[i], *motion.omega[i], *motion.a[i]]
            fh.write(",".join(CSV_FLOAT_FMT % c for c in cells) + "\n")


def write_misc_csv(trace: MiscTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,misc\n")
        for ti, vi in zip(trace.t, trace.values):
            fh.write((CSV_FLOAT_FMT % ti) + "," + (CSV_FLOAT_FMT % vi) + "\n")
