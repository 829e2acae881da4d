import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svcmisc import (
    OutputParams,
    OutputState,
    OutputVariant,
    hill,
    output_derivatives,
    output_input,
    output_misc,
    steady_state_misc,
)
from svcmisc.errors import DataFormatError
from svcmisc.misc_output import state_dim

from oracles import critically_damped_step


HILL_PARAMS = OutputParams.oman_hill(60.0, 600.0, 0.5, 8.0)
AP_PARAMS = OutputParams.oman_ap(60.0, 600.0, 2.0)
BP_PARAMS = OutputParams.oman_bp(60.0, 600.0, 2.0)
MSI_PARAMS = OutputParams.msibase(0.5, 600.0, 10.0)


class TestHill:
    def test_examples(self):
        assert hill(0.0) == 0.0
        assert hill(1.0) == pytest.approx(0.5)
        assert hill(3.0) == pytest.approx(0.9)

    def test_saturates_below_one(self):
        assert hill(1e6) < 1.0
        assert hill(1e6) == pytest.approx(1.0, abs=1e-10)

    def test_rejects_negative(self):
        with pytest.raises(DataFormatError):
            hill(-0.1)

    def test_array_input(self):
        out = hill(np.array([0.0, 1.0, 3.0]))
        assert np.allclose(out, [0.0, 0.5, 0.9])

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 1e6), st.floats(0, 1e6))
    def test_monotone_and_bounded(self, x, y):
        lo, hi = sorted((x, y))
        assert 0.0 <= hill(lo) <= hill(hi) < 1.0


class TestOutputInput:
    def test_hill_variants_use_half_saturation_scale(self):
        # |dv| = b gives exactly 0.5 for both Hill-shaped variants
        assert output_input(OutputVariant.OMAN_HILL, 0.5, HILL_PARAMS) == 0.5
        assert output_input(OutputVariant.MSIBASE, 0.5, MSI_PARAMS) == 0.5

    def test_ap_is_identity(self):
        assert output_input(OutputVariant.OMAN_AP, 1.7, AP_PARAMS) == 1.7

    def test_bp_is_power(self):
        assert output_input(OutputVariant.OMAN_BP, 3.0, BP_PARAMS) == pytest.approx(9.0)

    def test_rejects_negative(self):
        with pytest.raises(DataFormatError):
            output_input(OutputVariant.OMAN_AP, -1.0, AP_PARAMS)


class TestDerivatives:
    def test_msibase_shape_and_values(self):
        state = OutputState(OutputVariant.MSIBASE, np.array([0.2, 0.1]))
        d = output_derivatives(OutputVariant.MSIBASE, state, 0.5, MSI_PARAMS)
        assert np.allclose(d, [(0.5 - 0.2) / 600.0, (0.2 - 0.1) / 600.0])

    def test_oman_fast_input_is_product(self):
        state = OutputState(OutputVariant.OMAN_AP, np.array([0.0, 0.3, 0.0, 0.0]))
        d = output_derivatives(OutputVariant.OMAN_AP, state, 2.0, AP_PARAMS)
        # fast cascade is driven by u_s * u_i = 0.3 * 2.0
        assert d[2] == pytest.approx(0.6 / 60.0)

    def test_zero_state_zero_input_is_stationary(self):
        for variant, p in [
            (OutputVariant.MSIBASE, MSI_PARAMS),
            (OutputVariant.OMAN_AP, AP_PARAMS),
            (OutputVariant.OMAN_BP, BP_PARAMS),
            (OutputVariant.OMAN_HILL, HILL_PARAMS),
        ]:
            d = output_derivatives(variant, OutputState.zero(variant), 0.0, p)
            assert np.all(d == 0.0)

    def test_msibase_step_response_closed_form(self):
        # integrate the 2-state cascade with RK4 and compare against the
        # analytic critically damped step response
        tau = 25.0
        p = OutputParams.msibase(1.0, tau, 1.0)
        dt = 0.05
        n = 4000
        z = OutputState.zero(OutputVariant.MSIBASE)

        def rhs(vals):
            return output_derivatives(
                OutputVariant.MSIBASE,
                OutputState(OutputVariant.MSIBASE, vals),
                1.0,
                p,
            )

        vals = z.values
        for _ in range(n):
            k1 = rhs(vals)
            k2 = rhs(vals + 0.5 * dt * k1)
            k3 = rhs(vals + 0.5 * dt * k2)
            k4 = rhs(vals + dt * k3)
            vals = vals + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        expected = critically_damped_step(n * dt, tau)
        assert vals[1] == pytest.approx(float(expected), abs=1e-8)


class TestMiscReadout:
    def test_msibase_scales_second_stage(self):
        state = OutputState(OutputVariant.MSIBASE, np.array([0.9, 0.4]))
        assert output_misc(OutputVariant.MSIBASE, state, 0.9, MSI_PARAMS) == pytest.approx(4.0)

    def test_ap_power_after_dynamics(self):
        state = OutputState(OutputVariant.OMAN_AP, np.array([0.0, 1.0, 0.0, 2.0]))
        assert output_misc(OutputVariant.OMAN_AP, state, 0.0, AP_PARAMS) == pytest.approx(9.0)

    def test_hill_gain(self):
        state = OutputState(OutputVariant.OMAN_HILL, np.array([0.0, 0.25, 0.0, 0.25]))
        assert output_misc(OutputVariant.OMAN_HILL, state, 0.0, HILL_PARAMS) == pytest.approx(4.0)

    def test_negative_u_o_raises(self):
        state = OutputState(OutputVariant.OMAN_BP, np.array([0.0, -1.0, 0.0, 0.5]))
        with pytest.raises(ArithmeticError):
            output_misc(OutputVariant.OMAN_BP, state, 0.0, BP_PARAMS)


class TestSteadyState:
    def test_oman_at_unit_input(self):
        # c = 1 for BP at |dv| = 1 => u_o = 1 + 1 = 2, MISC = 2
        p = OutputParams.oman_bp(60.0, 600.0, 3.0)
        assert steady_state_misc(OutputVariant.OMAN_BP, 1.0, p) == pytest.approx(2.0)

    def test_ap_power_of_sum(self):
        # c = 1 => u_o = 2, MISC = 2^2 = 4
        assert steady_state_misc(OutputVariant.OMAN_AP, 1.0, AP_PARAMS) == pytest.approx(4.0)

    def test_hill_at_half_saturation(self):
        # c = 0.5 => u_o = 0.75, MISC = 8 * 0.75 = 6
        assert steady_state_misc(OutputVariant.OMAN_HILL, 0.5, HILL_PARAMS) == pytest.approx(6.0)

    def test_msibase_at_half_saturation(self):
        # P * hill(1) = 10 * 0.5 = 5
        assert steady_state_misc(OutputVariant.MSIBASE, 0.5, MSI_PARAMS) == pytest.approx(5.0)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0, 50), st.floats(0, 50))
    def test_monotone_in_conflict(self, x, y):
        lo, hi = sorted((x, y))
        for variant, p in [
            (OutputVariant.MSIBASE, MSI_PARAMS),
            (OutputVariant.OMAN_AP, AP_PARAMS),
            (OutputVariant.OMAN_BP, BP_PARAMS),
            (OutputVariant.OMAN_HILL, HILL_PARAMS),
        ]:
            m_lo = steady_state_misc(variant, lo, p)
            m_hi = steady_state_misc(variant, hi, p)
            assert 0.0 <= m_lo <= m_hi


class TestParamsValidation:
    def test_variant_parse(self):
        assert OutputVariant.parse(" OmanHill ") is OutputVariant.OMAN_HILL
        with pytest.raises(DataFormatError):
            OutputVariant.parse("bogus")

    def test_missing_required(self):
        with pytest.raises(DataFormatError, match="requires"):
            OutputParams(OutputVariant.OMAN_AP, beta1=60.0, beta2=600.0)

    def test_unused_field_rejected(self):
        with pytest.raises(DataFormatError, match="does not use"):
            OutputParams(
                OutputVariant.OMAN_AP, beta1=60.0, beta2=600.0,
                exponent=2.0, gain=1.0,
            )

    def test_beta_ordering(self):
        with pytest.raises(DataFormatError, match="beta1"):
            OutputParams.oman_ap(600.0, 60.0, 2.0)

    def test_nonpositive_rejected(self):
        with pytest.raises(DataFormatError):
            OutputParams.msibase(0.0, 600.0, 10.0)

    def test_names_values_round_trip(self):
        p = HILL_PARAMS
        rebuilt = OutputParams.from_mapping(
            p.variant, dict(zip(p.names(), p.values()))
        )
        assert rebuilt == p

    def test_state_dim(self):
        assert state_dim(OutputVariant.MSIBASE) == 2
        assert state_dim(OutputVariant.OMAN_HILL) == 4
        with pytest.raises(DataFormatError):
            OutputState(OutputVariant.MSIBASE, np.zeros(4))
