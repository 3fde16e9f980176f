"""Gain and bandwidth law tests for the medium module."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fwmsim import medium as md
from fwmsim.errors import ConfigurationError, DomainError


@pytest.fixture
def cfg():
    return md.reference_medium_config()


@pytest.fixture
def bm():
    return md.reference_bandwidth_model()


class TestGainCoefficient:
    def test_zero_at_unity_gain_pump(self, cfg):
        assert md.gain_coefficient(cfg, 130.0) == 0.0

    def test_value_at_zero_pump(self, cfg):
        assert md.gain_coefficient(cfg, 0.0) == pytest.approx(
            cfg.gain_coeff_slope * 130.0, rel=1e-15)

    def test_clamped_beyond_saturation(self, cfg):
        assert md.gain_coefficient(cfg, 200.0) == md.gain_coefficient(cfg, 180.0)
        assert md.gain_coefficient(cfg, 1000.0) == md.gain_coefficient(cfg, 180.0)

    def test_negative_pump_rejected(self, cfg):
        with pytest.raises(DomainError):
            md.gain_coefficient(cfg, -1.0)

    def test_amplification_sign_convention(self, cfg):
        # above the unity point g < 0, i.e. exp(-gL) > 1
        assert md.gain_coefficient(cfg, 150.0) < 0
        assert md.gain_coefficient(cfg, 100.0) > 0


class TestIntensityGain:
    def test_unity_at_130mW(self, cfg):
        assert md.intensity_gain(cfg, 130.0) == 1.0

    def test_high_gain_operating_point(self, cfg):
        # calibration pins the saturated gain at 300 mW to 1e7
        assert md.intensity_gain(cfg, 300.0) == pytest.approx(1e7, rel=1e-12)

    def test_monotone_in_pump(self, cfg):
        gains = [md.intensity_gain(cfg, p) for p in (140.0, 150.0, 160.0)]
        assert gains[0] < gains[1] < gains[2]

    def test_max_gain_cap(self):
        cfg = md.MediumConfig(max_gain=100.0)
        assert md.intensity_gain(cfg, 300.0) == 100.0

    def test_log_gain_affine_below_saturation(self, cfg):
        # noise-free samples of log G vs pump regress to R^2 > 0.9999
        pumps = np.linspace(0.0, 180.0, 50)
        logg = np.array([math.log(md.intensity_gain(cfg, p)) for p in pumps])
        slope, icept = np.polyfit(pumps, logg, 1)
        pred = slope * pumps + icept
        ss_res = np.sum((logg - pred) ** 2)
        ss_tot = np.sum((logg - logg.mean()) ** 2)
        assert 1.0 - ss_res / ss_tot > 0.9999


class TestBandwidthLaws:
    def test_offset_at_zero_input(self, bm):
        for mode in md.MODES:
            assert md.bandwidth_vs_input(bm, mode, 0.0) == bm.offset_MHz

    def test_reference_calibration_point(self, bm):
        # 0.7 average photons in a 587 ns pulse at 795 nm
        p07 = 0.7 * md.PLANCK_J_S * md.LIGHT_SPEED_M_S / 795e-9 / 587e-9 * 1e12
        assert md.bandwidth_vs_input(bm, "probe", p07) == pytest.approx(1.48, abs=1e-12)
        assert md.bandwidth_vs_input(bm, "conjugate", p07) == pytest.approx(1.53, abs=1e-12)

    def test_slope_ratio_matches_mode_asymmetry(self, bm):
        assert bm.s_probe / bm.s_conjugate == pytest.approx(1.373 / 1.988, rel=1e-12)

    def test_negative_input_rejected(self, bm):
        with pytest.raises(DomainError):
            md.bandwidth_vs_input(bm, "probe", -0.1)

    def test_unknown_mode_rejected(self, bm):
        with pytest.raises(DomainError):
            md.bandwidth_vs_input(bm, "idler", 1.0)

    @given(st.floats(min_value=1e-3, max_value=1e4))
    def test_sqrt_homogeneity(self, p):
        bm = md.reference_bandwidth_model()
        g1 = md.bandwidth_vs_input(bm, "conjugate", p) - bm.offset_MHz
        g4 = md.bandwidth_vs_input(bm, "conjugate", 4.0 * p) - bm.offset_MHz
        assert g4 == pytest.approx(2.0 * g1, rel=1e-12)

    def test_pump_law_proportional(self, bm):
        g0 = md.bandwidth_vs_pump(bm, 0.0)
        assert g0 == bm.offset_MHz
        d1 = md.bandwidth_vs_pump(bm, 120.0) - g0
        d2 = md.bandwidth_vs_pump(bm, 240.0) - g0
        assert d2 == pytest.approx(2.0 * d1, rel=1e-12)

    def test_pump_law_strictly_increasing(self, bm):
        pumps = np.linspace(0, 400, 30)
        vals = [md.bandwidth_vs_pump(bm, p) for p in pumps]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_pump_slope_recovered_from_noisy_sweep(self, bm):
        # synthetic sweep, 3% noise, fit with the fitting module
        from fwmsim.fitting import fit

        pumps = np.linspace(10.0, 400.0, 20)
        truth_k = bm.pump_broadening_MHz_per_mW
        vals = np.array([md.bandwidth_vs_pump(bm, p) for p in pumps])
        rng = np.random.default_rng(3)
        noisy = vals * (1.0 + 0.03 * rng.standard_normal(20))
        res = fit("linear", pumps, noisy, weights=1.0 / (0.03 * noisy) ** 2)
        assert abs(res["slope"] - truth_k) <= 2.0 * res.sigma_of("slope")


class TestDelayLaws:
    def test_known_bandwidth_delay_pairs(self):
        assert md.delay_from_bandwidth(1.48) == pytest.approx(675.6757, abs=1e-3)
        assert md.delay_from_bandwidth(1.53) == pytest.approx(653.5948, abs=1e-3)

    def test_limit_large_bandwidth(self):
        assert md.delay_from_bandwidth(1e9) < 1e-5

    def test_nonpositive_bandwidth_rejected(self):
        for g in (0.0, -1.0):
            with pytest.raises(DomainError):
                md.delay_from_bandwidth(g)

    @given(st.floats(min_value=1e-6, max_value=1e9))
    def test_delay_bandwidth_product_is_unity(self, gamma):
        tau = md.delay_from_bandwidth(gamma)
        assert tau * gamma == pytest.approx(1000.0, rel=1e-12)

    def test_delay_vs_input_maximum_at_zero(self, bm):
        for mode in md.MODES:
            assert md.delay_vs_input(bm, mode, 0.0) == pytest.approx(
                1000.0 / bm.offset_MHz, rel=1e-12)

    @given(st.floats(min_value=1e-3, max_value=1e3))
    def test_delay_vs_input_strictly_decreasing(self, p):
        bm = md.reference_bandwidth_model()
        assert (md.delay_vs_input(bm, "probe", 4.0 * p)
                < md.delay_vs_input(bm, "probe", p))

    def test_sweep_recovery_through_fitting(self, bm):
        from fwmsim.fitting import fit

        powers = np.geomspace(0.5, 400.0, 30)
        delays_us = np.array([md.delay_vs_input(bm, "conjugate", p)
                              for p in powers]) / 1000.0
        rng = np.random.default_rng(9)
        noisy = delays_us * (1.0 + 0.05 * rng.standard_normal(30))
        res = fit("inv_sqrt_law", powers, noisy,
                  weights=1.0 / (0.05 * noisy) ** 2)
        assert abs(res["s"] - bm.s_conjugate) <= 2.0 * res.sigma_of("s")
        assert abs(res["z"] - bm.offset_MHz) <= 2.0 * res.sigma_of("z")


class TestSaturation:
    def test_linear_regime_untouched(self):
        g = md.saturated_gain(1e7, 1.0, 3.5e11)
        assert g == pytest.approx(1e7, rel=1e-4)

    def test_output_capped_at_budget(self):
        budget = 3.5e11
        n = 1e9
        assert md.saturated_gain(1e7, n, budget) * n < budget

    def test_compression_monotone(self):
        budget = 3.5e11
        gains = [md.saturated_gain(1e7, n, budget) for n in (10, 100, 1e3, 1e4)]
        assert all(b < a for a, b in zip(gains, gains[1:]))

    def test_budget_scale(self, cfg):
        budget = md.pump_photon_budget(cfg, 587.0, 795.0)
        # 300 mW for 587 ns at 795 nm, two pump photons per cycle
        e_ph = md.PLANCK_J_S * md.LIGHT_SPEED_M_S / 795e-9
        assert budget == pytest.approx(0.5 * 0.3 * 587e-9 / e_ph, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            md.saturated_gain(0.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            md.saturated_gain(1.0, -1.0, 1.0)
        with pytest.raises(DomainError):
            md.pump_photon_budget(md.MediumConfig(), -5.0, 795.0)


class TestConfigValidation:
    def test_attenuation_bounds(self):
        with pytest.raises(ConfigurationError):
            md.MediumConfig(probe_attenuation=0.0)
        with pytest.raises(ConfigurationError):
            md.MediumConfig(conjugate_attenuation=1.5)

    def test_unity_below_saturation_required(self):
        with pytest.raises(ConfigurationError):
            md.MediumConfig(gain_coeff_unity_pump_mW=200.0,
                            gain_sat_pump_mW=180.0)

    def test_cell_length_positive(self):
        with pytest.raises(ConfigurationError):
            md.MediumConfig(cell_length_m=0.0)

    def test_bandwidth_model_positivity(self):
        with pytest.raises(ConfigurationError):
            md.BandwidthModel(offset_MHz=0.0)
        with pytest.raises(ConfigurationError):
            md.BandwidthModel(s_probe=-0.1)
        with pytest.raises(ConfigurationError):
            md.BandwidthModel(eta=0.0)

    def test_raman_detuning_sign(self):
        with pytest.raises(ConfigurationError):
            md.BandwidthModel(delta_raman_GHz=0.0)
        # negative detuning would make the pump law decreasing
        with pytest.raises(ConfigurationError):
            md.BandwidthModel(delta_raman_GHz=-3.0)

    def test_pure_functions_no_state(self, cfg, bm):
        before = (md.intensity_gain(cfg, 200.0),
                  md.bandwidth_vs_input(bm, "probe", 7.0))
        for _ in range(100):
            md.intensity_gain(cfg, 137.0)
            md.bandwidth_vs_input(bm, "conjugate", 123.0)
        after = (md.intensity_gain(cfg, 200.0),
                 md.bandwidth_vs_input(bm, "probe", 7.0))
        assert before == after
