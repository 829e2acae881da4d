"""Subjective-vertical-conflict observer with vertical-integral feedback.

Computes the conflict between the sensed vertical and the vertical
expected by an internal model of the vestibular organs. Semicircular
canals are first-order high-pass (time constant tau_d), otoliths are
identity, and gravity is resolved from specific force by a low-pass with
rotational transport (time constant tau):

    dv/dt = (f - v)/tau - omega_s x v

The internal model receives gain-scaled copies of the physical motion
(K_a*a, K_w*omega) plus error feedback: proportional on the acceleration
and rotation conflicts (K_ac, K_wc) and integral on the vertical conflict
(K_vc). Both feedthrough loops are algebraic and solved in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .motion_data import MotionSample, vec3

N_STATES = 15


@dataclass(frozen=True)
class SvcParams:
    """Fixed observer gains and time constants."""

    K_a: float = 0.1
    K_w: float = 0.1
    K_ac: float = 0.5
    K_wc: float = 10.0
    K_vc: float = 5.0
    tau: float = 2.0     # s, vertical low-pass
    tau_d: float = 7.0   # s, canal high-pass
    g0: float = 9.81     # m/s^2

    def __post_init__(self):
        for name in ("K_a", "K_w", "K_ac", "K_wc", "K_vc", "tau", "tau_d"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DataFormatError(f"{name} must be > 0")
        # g0 = 0 is allowed as a weightless test configuration
        if not (np.isfinite(self.g0) and self.g0 >= 0):
            raise DataFormatError("g0 must be >= 0")

    def as_array(self) -> np.ndarray:
        """Packed parameter vector for the integration kernels."""
        return np.array(
            [self.K_a, self.K_w, self.K_ac, self.K_wc, self.K_vc,
             self.tau, self.tau_d],
            dtype=float,
        )


@dataclass(frozen=True)
class SvcState:
    """15 observer states.

    x_scc / x_scc_hat are the low-pass states of the canal high-pass
    realization (omega_s = omega - x_scc). I_dv integrates the vertical
    conflict.
    """

    x_scc: np.ndarray      # rad/s
    x_scc_hat: np.ndarray  # rad/s
    v_s: np.ndarray        # m/s^2, sensed vertical
    v_s_hat: np.ndarray    # m/s^2, expected vertical
    I_dv: np.ndarray       # m/s, integral of delta_v

    def __post_init__(self):
        for name in ("x_scc", "x_scc_hat", "v_s", "v_s_hat", "I_dv"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise DataFormatError(f"{name} must be a finite 3-vector")
            object.__setattr__(self, name, v)

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.x_scc, self.x_scc_hat, self.v_s, self.v_s_hat, self.I_dv]
        )

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "SvcState":
        y = np.asarray(y, dtype=float)
        if y.shape != (N_STATES,):
            raise DataFormatError(f"state vector must have length {N_STATES}")
        return cls(y[0:3], y[3:6], y[6:9], y[9:12], y[12:15])


@dataclass(frozen=True)
class FeedbackSolution:
    """Algebraic signals of one feedback resolution."""

    omega_s: np.ndarray
    omega_hat: np.ndarray
    omega_s_hat: np.ndarray
    f_hat: np.ndarray
    a_s: np.ndarray
    a_s_hat: np.ndarray
    delta_a: np.ndarray
    delta_omega: np.ndarray
    delta_v: np.ndarray


def initial_state(params: SvcParams) -> SvcState:
    """Rest equilibrium: stationary upright head, zero conflict.

    The conflict integral starts at g0/K_vc so the internal model already
    predicts the resting specific force; all derivatives are exactly zero
    under rest input.
    """
    g = params.g0
    return SvcState(
        x_scc=vec3(0, 0, 0),
        x_scc_hat=vec3(0, 0, 0),
        v_s=vec3(0, 0, g),
        v_s_hat=vec3(0, 0, g),
        I_dv=vec3(0, 0, g / params.K_vc),
    )


def resolve_feedback(
    state: SvcState, inp: MotionSample, params: SvcParams
) -> FeedbackSolution:
    """Solve the two algebraic feedthrough loops in closed form.

    The canal loop: omega_hat = K_w*omega + K_wc*(omega_s - omega_s_hat)
    with omega_s_hat = omega_hat - x_scc_hat, giving
    omega_hat = (K_w*omega + K_wc*(omega_s + x_scc_hat)) / (1 + K_wc).
    The otolith loop resolves analogously for f_hat.
    """
    p = params
    omega_s = inp.omega - state.x_scc
    omega_hat = (p.K_w * inp.omega + p.K_wc * (omega_s + state.x_scc_hat)) / (
        1.0 + p.K_wc
    )
    omega_s_hat = omega_hat - state.x_scc_hat
    a_s = inp.f - state.v_s
    f_hat = (
        p.K_a * inp.a + p.K_ac * (a_s + state.v_s_hat) + p.K_vc * state.I_dv
    ) / (1.0 + p.K_ac)
    a_s_hat = f_hat - state.v_s_hat
    return FeedbackSolution(
        omega_s=omega_s,
        omega_hat=omega_hat,
        omega_s_hat=omega_s_hat,
        f_hat=f_hat,
        a_s=a_s,
        a_s_hat=a_s_hat,
        delta_a=a_s - a_s_hat,
        delta_omega=omega_s - omega_s_hat,
        delta_v=state.v_s - state.v_s_hat,
    )


def derivatives(state: SvcState, inp: MotionSample, params: SvcParams) -> SvcState:
    """Time derivative of the observer state (returned in SvcState slots)."""
    p = params
    fb = resolve_feedback(state, inp, params)
    return SvcState(
        x_scc=(inp.omega - state.x_scc) / p.tau_d,
        x_scc_hat=(fb.omega_hat - state.x_scc_hat) / p.tau_d,
        v_s=(inp.f - state.v_s) / p.tau - np.cross(fb.omega_s, state.v_s),
        v_s_hat=(fb.f_hat - state.v_s_hat) / p.tau
        - np.cross(fb.omega_s_hat, state.v_s_hat),
        I_dv=fb.delta_v,
    )


def conflict_norm(fb: FeedbackSolution) -> float:
    """Euclidean magnitude of the vertical conflict, m/s^2."""
    return float(np.linalg.norm(fb.delta_v))
