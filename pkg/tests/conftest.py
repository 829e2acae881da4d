import numpy as np
import pytest

from svcmisc import MotionTrace
from svcmisc._kernels import warmup


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    """Compile all kernels once so timing-sensitive tests see warm code."""
    warmup()


def make_trace(dt, duration, fx=None, omega_y=None, g0=9.81):
    """Uniform trace builder: fx(t) drives f_x and a_x, omega_y(t) drives
    the pitch rate; everything else is at rest."""
    n = int(round(duration / dt)) + 1
    t = dt * np.arange(n)
    ax = fx(t) if fx is not None else np.zeros(n)
    wy = omega_y(t) if omega_y is not None else np.zeros(n)
    zeros = np.zeros(n)
    f = np.column_stack([ax, zeros, np.full(n, g0)])
    om = np.column_stack([zeros, wy, zeros])
    a = np.column_stack([ax, zeros, zeros])
    return MotionTrace(dt, t, f, om, a)


@pytest.fixture
def rest_trace():
    return make_trace(0.1, 120.0)
