import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svcmisc import (
    SvcParams,
    SvcState,
    conflict_norm,
    derivatives,
    initial_state,
    resolve_feedback,
)
from svcmisc.motion_data import MotionSample, vec3

from oracles import fixed_point_feedback


def rest_input(params: SvcParams) -> MotionSample:
    return MotionSample(0.0, vec3(0, 0, params.g0), vec3(0, 0, 0), vec3(0, 0, 0))


class TestInitialState:
    def test_integral_preload(self):
        s = initial_state(SvcParams())
        assert np.allclose(s.I_dv, [0, 0, 9.81 / 5.0])
        assert s.I_dv[2] == pytest.approx(1.962)

    def test_weightless_config_is_all_zero(self):
        s = initial_state(SvcParams(g0=0.0))
        assert np.all(s.to_vector() == 0.0)

    def test_rest_input_gives_zero_derivatives(self):
        p = SvcParams()
        d = derivatives(initial_state(p), rest_input(p), p)
        assert np.all(d.to_vector() == 0.0)


class TestResolveFeedback:
    def test_rest_equilibrium(self):
        p = SvcParams()
        fb = resolve_feedback(initial_state(p), rest_input(p), p)
        assert np.allclose(fb.delta_v, 0.0)
        assert np.allclose(fb.delta_a, 0.0, atol=1e-15)
        assert np.allclose(fb.delta_omega, 0.0)
        assert np.allclose(fb.f_hat, [0, 0, 9.81])

    def test_omega_step_loop_value(self):
        # omega_z = 1 on the initial state: internal copy 0.1, canal loop
        # resolves to (0.1 + 10*1) / 11
        p = SvcParams()
        inp = MotionSample(0.0, vec3(0, 0, p.g0), vec3(0, 0, 1.0), vec3(0, 0, 0))
        fb = resolve_feedback(initial_state(p), inp, p)
        assert fb.omega_hat[2] == pytest.approx(10.1 / 11.0, abs=1e-12)

    def test_zero_state_zero_input(self):
        p = SvcParams()
        zero = SvcState.from_vector(np.zeros(15))
        inp = MotionSample(0.0, vec3(0, 0, 0), vec3(0, 0, 0), vec3(0, 0, 0))
        fb = resolve_feedback(zero, inp, p)
        for field in ("omega_s", "omega_hat", "f_hat", "a_s", "delta_v"):
            assert np.all(getattr(fb, field) == 0.0)


finite_vec = st.lists(st.floats(-10, 10), min_size=3, max_size=3).map(np.array)


@settings(max_examples=60, deadline=None)
@given(
    state_vals=st.lists(st.floats(-10, 10), min_size=15, max_size=15),
    f=finite_vec, om=finite_vec, a=finite_vec,
)
def test_closed_form_matches_fixed_point_oracle(state_vals, f, om, a):
    p = SvcParams()
    state = SvcState.from_vector(np.array(state_vals))
    inp = MotionSample(0.0, f, om, a)
    fb = resolve_feedback(state, inp, p)
    omega_hat, f_hat = fixed_point_feedback(state, inp, p)
    assert np.allclose(fb.omega_hat, omega_hat, atol=1e-10, rtol=0)
    assert np.allclose(fb.f_hat, f_hat, atol=1e-10, rtol=0)


@settings(max_examples=60, deadline=None)
@given(
    state_vals=st.lists(st.floats(-10, 10), min_size=15, max_size=15),
    f=finite_vec, om=finite_vec, a=finite_vec,
)
def test_loop_equations_hold_on_resubstitution(state_vals, f, om, a):
    p = SvcParams()
    state = SvcState.from_vector(np.array(state_vals))
    inp = MotionSample(0.0, f, om, a)
    fb = resolve_feedback(state, inp, p)
    lhs_w = fb.omega_hat
    rhs_w = p.K_w * inp.omega + p.K_wc * fb.delta_omega
    assert np.allclose(lhs_w, rhs_w, atol=1e-10, rtol=0)
    lhs_f = fb.f_hat
    rhs_f = p.K_a * inp.a + p.K_ac * fb.delta_a + p.K_vc * state.I_dv
    assert np.allclose(lhs_f, rhs_f, atol=1e-10, rtol=0)
    # definitional identities
    assert np.allclose(fb.omega_s_hat, fb.omega_hat - state.x_scc_hat)
    assert np.allclose(fb.a_s_hat, fb.f_hat - state.v_s_hat)
    assert np.allclose(fb.delta_v, state.v_s - state.v_s_hat)


class TestDerivatives:
    def test_mayne_leak_term_preserves_norm_when_f_equals_v(self):
        # f = v_s kills the low-pass term; rotation alone keeps |v_s| fixed
        p = SvcParams()
        v = vec3(1.0, 2.0, 3.0)
        state = SvcState(vec3(0, 0, 0), vec3(0, 0, 0), v, v, vec3(0, 0, 0))
        inp = MotionSample(0.0, v, vec3(0.3, -0.2, 0.5), vec3(0, 0, 0))
        d = derivatives(state, inp, p)
        # d|v|^2/dt = 2 v . dv
        assert float(np.dot(v, d.v_s)) == pytest.approx(0.0, abs=1e-12)

    def test_scc_state_rate(self):
        p = SvcParams()
        state = SvcState.from_vector(np.zeros(15))
        inp = MotionSample(0.0, vec3(0, 0, 0), vec3(0, 0.7, 0), vec3(0, 0, 0))
        d = derivatives(state, inp, p)
        assert d.x_scc[1] == pytest.approx(0.7 / 7.0)


def test_conflict_norm_examples():
    p = SvcParams()
    state = initial_state(p)
    fb = resolve_feedback(state, rest_input(p), p)
    assert conflict_norm(fb) == 0.0

    tilted = SvcState(
        state.x_scc, state.x_scc_hat,
        state.v_s + vec3(3, 4, 0), state.v_s_hat, state.I_dv,
    )
    fb = resolve_feedback(tilted, rest_input(p), p)
    assert conflict_norm(fb) == pytest.approx(5.0)

    neg = SvcState(
        state.x_scc, state.x_scc_hat,
        state.v_s + vec3(-1, 0, 0), state.v_s_hat, state.I_dv,
    )
    assert conflict_norm(resolve_feedback(neg, rest_input(p), p)) == pytest.approx(1.0)


def test_params_must_be_positive():
    from svcmisc.errors import DataFormatError

    with pytest.raises(DataFormatError):
        SvcParams(tau=0.0)
    with pytest.raises(DataFormatError):
        SvcParams(K_wc=-1.0)
