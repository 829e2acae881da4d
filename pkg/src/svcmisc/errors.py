"""Toolkit exception types, mapped to distinct CLI exit codes."""


class SvcMiscError(Exception):
    """Base class for all toolkit errors."""


class DataFormatError(SvcMiscError, ValueError):
    """Malformed or inconsistent input data (CSV parsing, validation)."""


class SimulationDivergedError(SvcMiscError, ArithmeticError):
    """Non-finite state encountered during integration."""

    def __init__(self, t: float, state_index: int):
        self.t = t
        self.state_index = state_index
        super().__init__(
            f"non-finite state at t={t:.6g} s (state index {state_index})"
        )


class ParticipantExcludedError(SvcMiscError, ValueError):
    """All observed MISC values are zero; no symptoms to fit against."""


class ProfileError(SvcMiscError, ValueError):
    """Shuttle motion profile cannot be solved with the given kinematics."""
