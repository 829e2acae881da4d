"""End-to-end fixed-step RK4 simulation from head motion to conflict and MISC.

The observer and output filters are integrated jointly (classical RK4,
default step 0.01 s) with inputs linearly interpolated at the substep
times. The observer starts at its rest equilibrium, the output filters at
zero. Results are deterministic: identical inputs give identical bytes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DataFormatError, SimulationDivergedError
from .misc_output import (
    OutputParams,
    OutputState,
    OutputVariant,
    output_input,
)
from .motion_data import CSV_FLOAT_FMT, MotionTrace
from .svc_observer import SvcParams, SvcState, initial_state


@dataclass(frozen=True)
class SimConfig:
    dt_sim: float = 0.01
    clamp_output: bool = False
    record_stride: int = 10

    def __post_init__(self):
        if not (np.isfinite(self.dt_sim) and self.dt_sim > 0):
            raise DataFormatError("dt_sim must be > 0")
        if self.record_stride < 1 or int(self.record_stride) != self.record_stride:
            raise DataFormatError("record_stride must be an integer >= 1")


@dataclass(frozen=True)
class SimResult:
    """Recorded simulation output on the (strided) integration grid."""

    t: np.ndarray        # s
    dv_vec: np.ndarray   # (N, 3) conflict vector
    dv_norm: np.ndarray  # (N,) |delta_v|
    misc: np.ndarray     # (N,) model MISC (clamped iff requested)
    final_svc: SvcState
    final_output: OutputState
    dt_record: float
    clamped: bool


def _interp_half_grid(motion: MotionTrace, h: float, n: int):
    """Inputs at the 2n+1 RK4 substep times t0, t0+h/2, ..., t0+n*h."""
    th = motion.t[0] + (h / 2.0) * np.arange(2 * n + 1)
    out = []
    for src in (motion.f, motion.omega, motion.a):
        out.append(
            np.column_stack([np.interp(th, motion.t, src[:, k]) for k in range(3)])
        )
    return out


def _svc_pass(motion: MotionTrace, svc: SvcParams, h: float):
    """Observer-only integration; returns (n, y_final, dv_vec, dv_stage)."""
    n = int(np.floor(motion.span / h + 1e-9))
    if n < 1:
        raise DataFormatError("trace span shorter than one integration step")
    f2, om2, a2 = _interp_half_grid(motion, h, n)
    y0 = initial_state(svc).to_vector()
    y, dv_vec, dv_stage, bad_step, bad_idx = _kernels.svc_rk4(
        y0, f2, om2, a2, svc.as_array(), h, n
    )
    if bad_step >= 0:
        raise SimulationDivergedError(motion.t[0] + (bad_step + 1) * h, bad_idx)
    return n, y, dv_vec, dv_stage


def _output_pass(
    variant: OutputVariant,
    out_p: OutputParams,
    dv_stage: np.ndarray,
    h: float,
    t0: float,
    z0: np.ndarray | None = None,
):
    """Output-filter integration driven by per-stage conflict magnitudes."""
    n = dv_stage.shape[0]
    ui_stage = output_input(variant, dv_stage, out_p)
    if z0 is None:
        z0 = np.zeros(2 if variant is OutputVariant.MSIBASE else 4)
    if variant is OutputVariant.MSIBASE:
        z_hist, bad_step, bad_idx = _kernels.cascade2_rk4(
            z0, ui_stage, out_p.tau_i, h, n
        )
    else:
        z_hist, bad_step, bad_idx = _kernels.oman_rk4(
            z0, ui_stage, out_p.beta1, out_p.beta2, h, n
        )
    if bad_step >= 0:
        raise SimulationDivergedError(t0 + (bad_step + 1) * h, 15 + bad_idx)
    return z_hist


def _misc_from_states(
    variant: OutputVariant, z_hist: np.ndarray, out_p: OutputParams
) -> np.ndarray:
    if variant is OutputVariant.MSIBASE:
        return out_p.gain * z_hist[:, 1]
    u_o = z_hist[:, 1] + z_hist[:, 3]
    if np.any(u_o < 0):
        raise ArithmeticError("negative u_o encountered in output read-out")
    if variant is OutputVariant.OMAN_AP:
        return u_o ** out_p.exponent
    if variant is OutputVariant.OMAN_BP:
        return u_o
    return out_p.gain * u_o


def simulate(
    motion: MotionTrace,
    svc: SvcParams,
    variant: OutputVariant,
    out_p: OutputParams,
    cfg: SimConfig = SimConfig(),
) -> SimResult:
    """Run the full observer + output simulation over a motion trace."""
    if out_p.variant is not variant:
        raise DataFormatError("out_p.variant does not match requested variant")
    h = cfg.dt_sim
    if h > motion.dt + 1e-12:
        raise DataFormatError("dt_sim must not exceed the trace sampling interval")
    n, y_final, dv_vec, dv_stage = _svc_pass(motion, svc, h)
    z_hist = _output_pass(variant, out_p, dv_stage, h, motion.t[0])
    misc = _misc_from_states(variant, z_hist, out_p)
    if cfg.clamp_output:
        misc = np.clip(misc, 0.0, 10.0)

    s = cfg.record_stride
    idx = np.arange(0, n + 1, s)
    t_grid = motion.t[0] + h * idx
    dv_rec = dv_vec[idx]
    return SimResult(
        t=t_grid,
        dv_vec=dv_rec,
        dv_norm=np.sqrt(np.sum(dv_rec * dv_rec, axis=1)),
        misc=misc[idx],
        final_svc=SvcState.from_vector(y_final),
        final_output=OutputState(variant, z_hist[-1]),
        dt_record=h * s,
        clamped=cfg.clamp_output,
    )


def sample_at(result: SimResult, times) -> np.ndarray:
    """Nearest-grid-point MISC lookup at the given times.

    Times must lie within the recorded span (+/- half a recording step).
    Lookup error is at most dt_record / 2 in time.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    t0, t1 = result.t[0], result.t[-1]
    half = result.dt_record / 2.0
    if np.any(times < t0 - half) or np.any(times > t1 + half):
        raise DataFormatError("sample time outside simulated span")
    idx = np.clip(
        np.round((times - t0) / result.dt_record).astype(int), 0, result.t.size - 1
    )
    return result.misc[idx]


def write_result_csv(result: SimResult, path) -> None:
    """Write `t,dv_norm,misc` rows."""
    with open(path, "w", newline="") as fh:
        fh.write("t,dv_norm,misc\n")
        for ti, di, mi in zip(result.t, result.dv_norm, result.misc):
            fh.write(
                ",".join(CSV_FLOAT_FMT % v for v in (ti, di, mi)) + "\n"
            )
