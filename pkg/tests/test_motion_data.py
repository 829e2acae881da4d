import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svcmisc import (
    MiscTrace,
    MotionTrace,
    load_misc_csv,
    load_motion_csv,
    resample_linear,
    write_misc_csv,
    write_motion_csv,
)
from svcmisc.errors import DataFormatError
from svcmisc.motion_data import RawMotion, read_motion_csv


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")


def test_load_infers_acceleration_when_columns_absent(tmp_path):
    p = tmp_path / "m.csv"
    write_lines(p, [
        "t,fx,fy,fz,wx,wy,wz",
        "0,0,0,9.81,0,0,0",
        "1,0,0,9.81,0,0,0",
    ])
    trace = load_motion_csv(p)
    assert trace.a_inferred
    # stationary upright: a = f - g = 0
    assert np.allclose(trace.a, 0.0)


def test_load_explicit_acceleration_passthrough(tmp_path):
    p = tmp_path / "m.csv"
    write_lines(p, [
        "t,fx,fy,fz,wx,wy,wz,ax,ay,az",
        "0,1,2,9.81,0,0,0,0.5,0.25,-0.125",
        "1,1,2,9.81,0,0,0,0.5,0.25,-0.125",
    ])
    trace = load_motion_csv(p)
    assert not trace.a_inferred
    assert trace.a[0, 0] == 0.5
    assert trace.a[1, 2] == -0.125


def test_load_rejects_non_uniform_spacing(tmp_path):
    p = tmp_path / "m.csv"
    write_lines(p, [
        "t,fx,fy,fz,wx,wy,wz",
        "0.0,0,0,9.81,0,0,0",
        "0.1,0,0,9.81,0,0,0",
        "0.3,0,0,9.81,0,0,0",
    ])
    with pytest.raises(DataFormatError, match="non-uniform spacing"):
        load_motion_csv(p)
    # but resampling the raw data is fine
    trace = resample_linear(read_motion_csv(p), 0.1)
    assert trace.dt == 0.1


@pytest.mark.parametrize("bad_rows,msg", [
    (["0,0,0,9.81,0,0,0", "0,0,0,9.81,0,0,0"], "non-increasing"),
    (["0,0,0,xyz,0,0,0", "1,0,0,9.81,0,0,0"], "non-numeric"),
    (["0,0,0,9.81,0,0,0"], "fewer than 2"),
])
def test_load_motion_errors(tmp_path, bad_rows, msg):
    p = tmp_path / "m.csv"
    write_lines(p, ["t,fx,fy,fz,wx,wy,wz"] + bad_rows)
    with pytest.raises(DataFormatError, match=msg):
        load_motion_csv(p)


def test_load_motion_missing_column(tmp_path):
    p = tmp_path / "m.csv"
    write_lines(p, ["t,fx,fy,fz,wx,wy", "0,0,0,9.81,0,0", "1,0,0,9.81,0,0"])
    with pytest.raises(DataFormatError, match="missing required column"):
        load_motion_csv(p)


def test_comment_lines_ignored(tmp_path):
    p = tmp_path / "m.csv"
    write_lines(p, [
        "# shuttle log",
        "t,fx,fy,fz,wx,wy,wz",
        "0,0,0,9.81,0,0,0",
        "# midway comment",
        "1,0,0,9.81,0,0,0",
    ])
    assert load_motion_csv(p).n == 2


def test_load_misc(tmp_path):
    p = tmp_path / "o.csv"
    write_lines(p, ["t,misc", "0,0", "60,1", "120,2"])
    trace = load_misc_csv(p)
    assert trace.n == 3
    assert list(trace.values) == [0, 1, 2]


@pytest.mark.parametrize("row,msg", [
    ("60,11", "outside"),
    ("60,1.5", "integer"),
])
def test_load_misc_value_errors(tmp_path, row, msg):
    p = tmp_path / "o.csv"
    write_lines(p, ["t,misc", "0,0", row])
    with pytest.raises(DataFormatError, match=msg):
        load_misc_csv(p)


def test_resample_linear_midpoint():
    raw = RawMotion(
        t=np.array([0.0, 1.0]),
        f=np.array([[0.0, 0, 9.81], [2.0, 0, 9.81]]),
        omega=np.zeros((2, 3)),
        a=np.array([[0.0, 0, 0], [2.0, 0, 0]]),
    )
    trace = resample_linear(raw, 0.5)
    assert list(trace.f[:, 0]) == [0.0, 1.0, 2.0]


def test_resample_idempotent_bitwise(rest_trace):
    again = resample_linear(rest_trace, rest_trace.dt)
    assert np.array_equal(again.f, rest_trace.f)
    assert np.array_equal(again.omega, rest_trace.omega)
    assert np.array_equal(again.a, rest_trace.a)


def test_resample_clamps_beyond_last_sample():
    raw = RawMotion(
        t=np.array([0.0, 1.0, 1.9]),
        f=np.column_stack([[0.0, 1.0, 5.0], np.zeros(3), np.full(3, 9.81)]),
        omega=np.zeros((3, 3)),
        a=np.zeros((3, 3)),
    )
    trace = resample_linear(raw, 0.5)
    # grid 0, 0.5, 1.0, 1.5 stays inside; values interpolated
    assert trace.t[-1] <= raw.t[-1] + 1e-12
    assert trace.f[1, 0] == pytest.approx(0.5)


def test_inferred_equals_explicit_when_consistent(tmp_path):
    rows = ["t,fx,fy,fz,wx,wy,wz", "0,1,0,9.81,0,0,0", "1,1,0,9.81,0,0,0"]
    p1 = tmp_path / "implicit.csv"
    write_lines(p1, rows)
    rows_a = [
        "t,fx,fy,fz,wx,wy,wz,ax,ay,az",
        "0,1,0,9.81,0,0,0,1,0,0",
        "1,1,0,9.81,0,0,0,1,0,0",
    ]
    p2 = tmp_path / "explicit.csv"
    write_lines(p2, rows_a)
    t1 = load_motion_csv(p1)
    t2 = load_motion_csv(p2)
    assert np.array_equal(t1.a, t2.a)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=6, max_size=6),
       st.floats(0.01, 10.0))
def test_motion_csv_round_trip(values, dt):
    f0 = np.array(values[:3])
    f1 = np.array(values[3:])
    trace = MotionTrace(
        dt,
        np.array([0.0, dt]),
        np.vstack([f0, f1]),
        np.vstack([f1 / 7.0, f0 / 7.0]),
        np.vstack([f0 * 0.3, f1 * 0.3]),
    )
    import tempfile, os

    fd, path = tempfile.mkstemp(suffix=".csv")
    os.close(fd)
    try:
        write_motion_csv(trace, path)
        back = load_motion_csv(path)
        for name in ("t", "f", "omega", "a"):
            assert np.allclose(
                getattr(back, name), getattr(trace, name), atol=1e-9, rtol=1e-9
            )
    finally:
        os.unlink(path)


def test_misc_csv_round_trip(tmp_path):
    trace = MiscTrace(np.array([0.0, 60.0, 120.0]), np.array([0.0, 1.0, 3.0]))
    p = tmp_path / "o.csv"
    write_misc_csv(trace, p)
    back = load_misc_csv(p)
    assert np.array_equal(back.t, trace.t)
    assert np.array_equal(back.values, trace.values)


def test_misc_trace_rejects_decreasing_time():
    with pytest.raises(DataFormatError):
        MiscTrace(np.array([0.0, 60.0, 59.0]), np.zeros(3))
