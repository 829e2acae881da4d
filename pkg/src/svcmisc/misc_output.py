"""MISC output dynamics: four maps from conflict magnitude to symptom level.

Variants:
  MSIBASE  - Hill saturation followed by a critically damped second-order
             low-pass (1/(tau_I s + 1)^2) and output gain P.
  OMAN_AP  - fast/slow interacting pathways, power scaling after the
             dynamics: MISC = (u_o)^M.
  OMAN_BP  - power scaling before the dynamics: u_i = |dv|^M, MISC = u_o.
  OMAN_HILL- Hill saturation before the dynamics, output gain G.

The shared fast/slow dynamics are

    u_o = u_s + u_f,  u_s = u_i / (b2 s + 1)^2,  u_f = u_s*u_i / (b1 s + 1)^2

realized as two cascaded first-order states per pathway, with the slow
output multiplicatively gating the fast input.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError


class OutputVariant(enum.Enum):
    MSIBASE = "msibase"
    OMAN_AP = "omanap"
    OMAN_BP = "omanbp"
    OMAN_HILL = "omanhill"

    @classmethod
    def parse(cls, name: str) -> "OutputVariant":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(v.value for v in cls)
            raise DataFormatError(
                f"unknown output variant {name!r} (expected one of: {valid})"
            ) from None

    @property
    def is_oman(self) -> bool:
        return self is not OutputVariant.MSIBASE


def state_dim(variant: OutputVariant) -> int:
    return 2 if variant is OutputVariant.MSIBASE else 4


@dataclass(frozen=True)
class OutputParams:
    """Per-variant output-part parameters.

    Field usage by variant (unused fields stay None):
      MSIBASE:   b, tau_i, gain (P)
      OMAN_AP:   beta1, beta2, exponent (M_AP)
      OMAN_BP:   beta1, beta2, exponent (M_BP)
      OMAN_HILL: beta1, beta2, b, gain (G)
    """

    variant: OutputVariant
    beta1: float | None = None   # s, fast pathway
    beta2: float | None = None   # s, slow pathway
    exponent: float | None = None
    b: float | None = None       # m/s^2, Hill half-saturation
    tau_i: float | None = None   # s
    gain: float | None = None

    def __post_init__(self):
        required = {
            OutputVariant.MSIBASE: ("b", "tau_i", "gain"),
            OutputVariant.OMAN_AP: ("beta1", "beta2", "exponent"),
            OutputVariant.OMAN_BP: ("beta1", "beta2", "exponent"),
            OutputVariant.OMAN_HILL: ("beta1", "beta2", "b", "gain"),
        }[self.variant]
        for name in required:
            v = getattr(self, name)
            if v is None:
                raise DataFormatError(
                    f"{self.variant.value} requires parameter '{name}'"
                )
            if not (np.isfinite(v) and v > 0):
                raise DataFormatError(f"parameter '{name}' must be > 0")
        all_fields = ("beta1", "beta2", "exponent", "b", "tau_i", "gain")
        for name in all_fields:
            if name not in required and getattr(self, name) is not None:
                raise DataFormatError(
                    f"{self.variant.value} does not use parameter '{name}'"
                )
        if self.beta1 is not None and not self.beta1 < self.beta2:
            raise DataFormatError("beta1 must be < beta2")
        object.__setattr__(self, "_names", required)

    @classmethod
    def msibase(cls, b: float, tau_i: float, P: float) -> "OutputParams":
        return cls(OutputVariant.MSIBASE, b=b, tau_i=tau_i, gain=P)

    @classmethod
    def oman_ap(cls, beta1: float, beta2: float, M: float) -> "OutputParams":
        return cls(OutputVariant.OMAN_AP, beta1=beta1, beta2=beta2, exponent=M)

    @classmethod
    def oman_bp(cls, beta1: float, beta2: float, M: float) -> "OutputParams":
        return cls(OutputVariant.OMAN_BP, beta1=beta1, beta2=beta2, exponent=M)

    @classmethod
    def oman_hill(
        cls, beta1: float, beta2: float, b: float, G: float
    ) -> "OutputParams":
        return cls(OutputVariant.OMAN_HILL, beta1=beta1, beta2=beta2, b=b, gain=G)

    def names(self) -> tuple[str, ...]:
        """Parameter names used by this variant, in canonical order."""
        return self._names

    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, n) for n in self.names())

    @classmethod
    def from_mapping(cls, variant: OutputVariant, mapping: dict) -> "OutputParams":
        kwargs = {k: float(v) for k, v in mapping.items()}
        return cls(variant, **kwargs)


@dataclass(frozen=True)
class OutputState:
    """Filter state of the output part.

    MSIBASE: values = (z1, z2). Oman variants: values = (s1, s2, f1, f2)
    with s* the slow cascade (u_s = s2) and f* the fast cascade (u_f = f2).
    """

    variant: OutputVariant
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (state_dim(self.variant),):
            raise DataFormatError(
                f"{self.variant.value} state must have "
                f"{state_dim(self.variant)} entries"
            )
        if not np.all(np.isfinite(v)):
            raise DataFormatError("output state must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls, variant: OutputVariant) -> "OutputState":
        return cls(variant, np.zeros(state_dim(variant)))


def hill(x):
    """Saturating map x^2 / (1 + x^2); half-saturation at x = 1."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DataFormatError("hill input must be >= 0")
    x2 = x * x
    out = x2 / (1.0 + x2)
    return float(out) if out.ndim == 0 else out


def output_input(variant: OutputVariant, dv_norm, params: OutputParams):
    """Map conflict magnitude |dv| to the filter input u_i.

    |dv| in m/s^2 is treated as dimensionless before exponentiation.
    Accepts scalars or arrays.
    """
    dv = np.asarray(dv_norm, dtype=float)
    if np.any(dv < 0):
        raise DataFormatError("dv_norm must be >= 0")
    if variant in (OutputVariant.MSIBASE, OutputVariant.OMAN_HILL):
        out = hill(dv / params.b)
    elif variant is OutputVariant.OMAN_AP:
        out = dv
    else:  # OMAN_BP
        out = dv ** params.exponent
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def output_derivatives(
    variant: OutputVariant, state: OutputState, u_i: float, params: OutputParams
) -> np.ndarray:
    """State derivative of the output filters for input u_i."""
    z = state.values
    if variant is OutputVariant.MSIBASE:
        ti = params.tau_i
        return np.array([(u_i - z[0]) / ti, (z[0] - z[1]) / ti])
    b1, b2 = params.beta1, params.beta2
    s1, s2, f1, f2 = z
    return np.array(
        [
            (u_i - s1) / b2,
            (s1 - s2) / b2,
            (s2 * u_i - f1) / b1,  # fast input is the product u_s * u_i
            (f1 - f2) / b1,
        ]
    )


def output_misc(
    variant: OutputVariant, state: OutputState, u_i: float, params: OutputParams
) -> float:
    """Instantaneous (raw, unclamped) MISC read-out from the filter state."""
    z = state.values
    if variant is OutputVariant.MSIBASE:
        return params.gain * z[1]
    u_o = z[1] + z[3]
    if u_o < 0:
        raise ArithmeticError(
            "negative u_o: output state not reachable from zero under "
            "non-negative input"
        )
    if variant is OutputVariant.OMAN_AP:
        return u_o ** params.exponent
    if variant is OutputVariant.OMAN_BP:
        return u_o
    return params.gain * u_o  # OMAN_HILL


def steady_state_misc(
    variant: OutputVariant, dv_norm_const: float, params: OutputParams
) -> float:
    """Closed-form MISC under constant conflict magnitude.

    Each cascade has DC gain 1, so u_s -> c and u_f -> c^2 where
    c = output_input(|dv|); the variant post-map is then applied.
    """
    if dv_norm_const < 0:
        raise DataFormatError("dv_norm must be >= 0")
    c = output_input(variant, dv_norm_const, params)
    if variant is OutputVariant.MSIBASE:
        return params.gain * c
    u_o = c + c * c
    if variant is OutputVariant.OMAN_AP:
        return u_o ** params.exponent
    if variant is OutputVariant.OMAN_BP:
        return u_o
    return params.gain * u_o
