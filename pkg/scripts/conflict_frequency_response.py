#!/usr/bin/env python3
"""Steady-state conflict magnitude versus fore-aft oscillation frequency.

Sweeps sinusoidal surge stimuli through the observer and tabulates the
steady-state peak conflict, illustrating the band-pass character of the
sensed-vs-expected gravity discrepancy.

Usage:
    python3 scripts/conflict_frequency_response.py
"""
import argparse

import numpy as np

from svcmisc import (
    MotionTrace,
    OutputParams,
    OutputVariant,
    SimConfig,
    SvcParams,
    simulate,
)


def surge_trace(freq, amp, duration, dt):
    n = int(round(duration / dt)) + 1
    t = dt * np.arange(n)
    ax = amp * np.sin(2 * np.pi * freq * t)
    zeros = np.zeros(n)
    f = np.column_stack([ax, zeros, np.full(n, 9.81)])
    return MotionTrace(dt, t, f, np.zeros((n, 3)),
                       np.column_stack([ax, zeros, zeros]))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--amplitude", type=float, default=1.0, help="m/s^2")
    ap.add_argument("--duration", type=float, default=600.0)
    ap.add_argument("--freqs", type=float, nargs="+",
                    default=[0.01, 0.02, 0.05, 0.1, 0.16, 0.3, 0.5, 1.0, 2.0])
    args = ap.parse_args()

    params = OutputParams.oman_hill(60.0, 600.0, 0.5, 8.0)
    print("freq_hz,peak_dv_norm")
    for fq in args.freqs:
        trace = surge_trace(fq, args.amplitude, args.duration, 0.01)
        res = simulate(trace, SvcParams(), OutputVariant.OMAN_HILL, params,
                       SimConfig())
        tail = res.dv_norm[int(0.8 * res.dv_norm.size):]
        print(f"{fq:g},{np.max(tail):.6g}")


if __name__ == "__main__":
    main()
