"""Special functions, the correct-detection integral, and error-rate formulas."""

import math

import numpy as np
import pytest
from scipy import integrate, special

from pdnn_ssk.analysis import (
    THEORY_CURVE_COLUMNS,
    CcdpInputs,
    benchmark_fsk_ser,
    benchmark_qam_ser,
    bessel_i0,
    ccdp,
    ebn0_from_gamma,
    gamma_from_ebn0,
    log_bessel_i0,
    marcum_q1,
    rician_pdf,
    ser_asymptotic,
    ser_exact,
    theory_curve,
)

# frozen oracle values from the canonical power/Poisson series summed with
# 50-digit arithmetic (see tests for the series definitions)
I0_AT_1 = 1.2660658777520083356
I0_AT_10 = 2815.7166284662544715
Q1_AT_1_1 = 0.73287980379682021825


class TestBesselI0:
    def test_at_zero(self):
        assert bessel_i0(0.0) == 1.0

    def test_series_anchor_points(self):
        assert bessel_i0(1.0) == pytest.approx(I0_AT_1, rel=1e-10)
        assert bessel_i0(10.0) == pytest.approx(I0_AT_10, rel=1e-10)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            bessel_i0(-0.5)

    def test_vectorized(self):
        out = bessel_i0(np.array([0.0, 1.0, 10.0]))
        np.testing.assert_allclose(out, [1.0, I0_AT_1, I0_AT_10], rtol=1e-10)

    def test_log_form_tracks_large_arguments(self):
        """ln I0 stays finite far beyond the overflow point of I0 itself."""
        assert math.isinf(bessel_i0(1000.0))
        val = log_bessel_i0(1000.0)
        # leading asymptotics: I0(x) ~ e^x / sqrt(2 pi x)
        assert val == pytest.approx(1000.0 - 0.5 * math.log(2 * math.pi * 1000.0),
                                    rel=1e-4)
        assert log_bessel_i0(10.0) == pytest.approx(math.log(I0_AT_10), rel=1e-12)


class TestMarcumQ1:
    def test_zero_first_argument_is_rayleigh_tail(self):
        for b in (0.1, 0.5, 1.0, 2.0, 5.0):
            assert marcum_q1(0.0, b) == pytest.approx(math.exp(-b * b / 2), rel=1e-12)

    def test_zero_second_argument_is_one(self):
        for a in (0.0, 0.3, 2.0, 20.0):
            assert marcum_q1(a, 0.0) == 1.0

    def test_series_anchor(self):
        assert marcum_q1(1.0, 1.0) == pytest.approx(Q1_AT_1_1, abs=1e-10)

    def test_range(self):
        rng = np.random.default_rng(1)
        for a, b in rng.uniform(0, 20, size=(200, 2)):
            q = marcum_q1(a, b)
            assert 0.0 <= q <= 1.0

    def test_monotone_in_both_arguments(self):
        """Increasing in a, decreasing in b."""
        rng = np.random.default_rng(2)
        for a, b in rng.uniform(0.05, 10, size=(50, 2)):
            q = marcum_q1(a, b)
            assert marcum_q1(a + 0.1, b) > q
            assert marcum_q1(a, b + 0.1) < q

    def test_invalid_arguments_rejected(self):
        with pytest.raises(ValueError):
            marcum_q1(-1.0, 1.0)
        with pytest.raises(ValueError):
            marcum_q1(1.0, float("nan"))


class TestRicianPdf:
    def test_normalized(self):
        val, _ = integrate.quad(lambda r: rician_pdf(r, 2.0, 0.7), 0, 2.0 + 12 * 0.7)
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_zero_mean_reduces_to_rayleigh(self):
        r, sigma = 1.3, 0.8
        expected = (r / sigma**2) * math.exp(-r * r / (2 * sigma**2))
        assert rician_pdf(r, 0.0, sigma) == pytest.approx(expected, rel=1e-12)

    def test_large_argument_stays_finite(self):
        assert np.isfinite(rician_pdf(50.0, 50.0, 0.05))


class TestCcdp:
    def test_inputs_validated(self):
        with pytest.raises(ValueError):
            CcdpInputs(desired_amp=-1.0, interferer_amps=(0.0,), sigma=1.0)
        with pytest.raises(ValueError):
            CcdpInputs(desired_amp=1.0, interferer_amps=(0.0,), sigma=0.0)
        with pytest.raises(ValueError):
            ccdp(CcdpInputs(1.0, (0.0, 0.0), 1.0), m_order=2)

    def test_pure_noise_two_hypotheses_is_coin_flip(self):
        val = ccdp(CcdpInputs(desired_amp=0.0, interferer_amps=(0.0,), sigma=0.9),
                   m_order=2)
        assert val == pytest.approx(0.5, abs=1e-10)

    @pytest.mark.parametrize("m", [2, 4, 16])
    @pytest.mark.parametrize("gamma", [0.0, 1.0, 5.0, 10.0, 20.0])
    def test_zero_interference_matches_closed_form(self, m, gamma):
        """No interferers: the integral equals 1 - ser_exact(gamma, M)."""
        sigma = 0.7
        mu = sigma * math.sqrt(2.0 * gamma)
        val = ccdp(CcdpInputs(desired_amp=mu, interferer_amps=(0.0,) * (m - 1),
                              sigma=sigma), m_order=m)
        assert val == pytest.approx(1.0 - ser_exact(gamma, m), abs=1e-8)

    def test_interference_strictly_hurts(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            amps = rng.uniform(0.0, 1.5, size=3)
            base = CcdpInputs(desired_amp=2.0, interferer_amps=tuple(amps), sigma=0.5)
            p0 = ccdp(base, 4)
            i = rng.integers(0, 3)
            bumped = list(amps)
            bumped[i] += 0.5
            p1 = ccdp(CcdpInputs(2.0, tuple(bumped), 0.5), 4)
            assert p1 < p0

    def test_desired_amplitude_strictly_helps(self):
        inputs = CcdpInputs(desired_amp=1.0, interferer_amps=(0.5, 0.2, 0.8), sigma=0.5)
        lo = ccdp(inputs, 4)
        hi = ccdp(CcdpInputs(1.4, inputs.interferer_amps, 0.5), 4)
        assert hi > lo

    def test_probability_range_without_clamping(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            inputs = CcdpInputs(desired_amp=rng.uniform(0, 3),
                                interferer_amps=tuple(rng.uniform(0, 2, size=3)),
                                sigma=rng.uniform(0.2, 1.5))
            assert 0.0 <= ccdp(inputs, 4) <= 1.0


class TestSerExact:
    def test_zero_snr_anchors(self):
        assert ser_exact(0.0, 2) == pytest.approx(0.5, abs=1e-12)
        assert ser_exact(0.0, 4) == pytest.approx(0.75, abs=1e-12)
        for m in (2, 4, 16, 64):
            assert ser_exact(0.0, m) == pytest.approx(1.0 - 1.0 / m, abs=1e-12)

    def test_against_direct_quadrature(self):
        """gamma=20, M=4: integrate the correct-detection density directly."""
        gamma, m = 20.0, 4
        mu = math.sqrt(2.0 * gamma)          # sigma = 1

        def integrand(r):
            return rician_pdf(r, mu, 1.0) * (1.0 - math.exp(-r * r / 2.0)) ** (m - 1)

        val, _ = integrate.quad(integrand, 0, mu + 12, epsabs=1e-12, limit=200)
        assert ser_exact(gamma, m) == pytest.approx(1.0 - val, abs=1e-8)

    def test_strictly_decreasing_in_gamma(self):
        for m in (2, 4, 16, 64):
            vals = [ser_exact(g, m) for g in np.arange(0, 30.5, 0.5)]
            assert np.all(np.diff(vals) < 0)

    def test_strictly_increasing_in_m(self):
        for g in (0.0, 1.0, 5.0, 15.0):
            vals = [ser_exact(g, m) for m in (2, 4, 16, 64)]
            assert np.all(np.diff(vals) > 0)

    def test_range(self):
        for m in (2, 4, 16, 64):
            for g in (0.0, 0.5, 3.0, 10.0, 40.0):
                v = ser_exact(g, m)
                assert 0.0 < v <= 1.0 - 1.0 / m

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            ser_exact(-0.1, 4)
        with pytest.raises(ValueError):
            ser_exact(1.0, 3)


class TestSerAsymptotic:
    def test_formula(self):
        assert ser_asymptotic(0.0, 2) == pytest.approx(0.5)
        assert ser_asymptotic(2.0, 4) == pytest.approx(1.5 * math.exp(-1.0), rel=1e-15)

    def test_two_symbol_case_is_exact_everywhere(self):
        for g in (0.0, 1.0, 7.3, 20.0):
            assert ser_asymptotic(g, 2) == pytest.approx(ser_exact(g, 2), rel=1e-12)

    def test_upper_bound_everywhere(self):
        for m in (4, 16, 64):
            for g in np.arange(0, 40.25, 0.25):
                assert ser_asymptotic(g, m) >= ser_exact(g, m)

    def test_ratio_converges_to_one(self):
        """The bound tightens with SNR; below 1.05 from moderate gamma on."""
        for m, g_tight in ((4, 16.0), (16, 26.0), (64, 34.0)):
            ratios = [ser_asymptotic(g, m) / ser_exact(g, m)
                      for g in np.arange(g_tight, 50.0, 1.0)]
            assert max(ratios) <= 1.05
            assert min(ratios) >= 1.0
            assert ratios[-1] < 1.01

    @pytest.mark.xfail(
        strict=True,
        reason="at the first grid points past ser_exact < 1e-2 the ratio is "
               "1.13 (M=4), 1.40 (M=16), 1.78 (M=64); the 1.05 window only "
               "holds from gamma = 15.5/26/34 on (see companion test above)")
    def test_ratio_within_5_percent_once_ser_below_1e_minus_2(self):
        for m in (4, 16, 64):
            for g in np.arange(0.0, 40.25, 0.25):
                ex = ser_exact(g, m)
                if ex < 1e-2:
                    assert ser_asymptotic(g, m) / ex <= 1.05


class TestBenchmarks:
    def test_fsk_equals_exact(self):
        for m in (4, 16, 64):
            for g in (0.0, 1.0, 10.0, 25.0):
                assert benchmark_fsk_ser(g, m) == ser_exact(g, m)
        assert benchmark_fsk_ser(0.0, 16) == pytest.approx(15.0 / 16.0, abs=1e-12)

    def test_qam_limits_and_domain(self):
        assert benchmark_qam_ser(60.0, 4) == pytest.approx(0.0, abs=1e-15)
        assert 0.0 < benchmark_qam_ser(0.0, 4) < 1.0
        with pytest.raises(ValueError):
            benchmark_qam_ser(5.0, 8)
        with pytest.raises(ValueError):
            benchmark_qam_ser(5.0, 2)

    def test_qam_against_symbol_simulation(self):
        """Gray-coded square 4-QAM at 4 dB vs a direct symbol-level run."""
        ebn0_db = 4.0
        m = 4
        esn0 = math.log2(m) * 10 ** (ebn0_db / 10.0)
        rng = np.random.default_rng(5)
        trials = 10**6
        # unit-energy QPSK: per-axis levels +-1/sqrt(2), N0 = Es/esn0
        n0 = 1.0 / esn0
        sym = rng.integers(0, 2, size=(trials, 2)) * 2 - 1
        noisy = sym / math.sqrt(2.0) + rng.normal(scale=math.sqrt(n0 / 2), size=(trials, 2))
        errors = np.any(np.sign(noisy) != sym, axis=1).sum()
        p_hat = errors / trials
        p_theory = benchmark_qam_ser(ebn0_db, m)
        sigma = math.sqrt(p_theory * (1 - p_theory) / trials)
        assert abs(p_hat - p_theory) < 3 * sigma


class TestSnrConversions:
    def test_anchor(self):
        assert ebn0_from_gamma(4.0, 4) == pytest.approx(0.0, abs=1e-12)

    def test_round_trip(self):
        for m in (2, 4, 16, 64):
            for db in (-3.0, 0.0, 4.7, 12.0):
                g = gamma_from_ebn0(db, m)
                assert ebn0_from_gamma(g, m) == pytest.approx(db, abs=1e-12)

    def test_moderate_snr_value(self):
        assert ebn0_from_gamma(28.3, 4) == pytest.approx(8.5, abs=0.05)


class TestTheoryCurve:
    def test_columns_and_rows(self):
        grid = [0.0, 2.0, 4.0]
        rows = theory_curve(4, grid)
        assert len(rows) == 3
        assert len(THEORY_CURVE_COLUMNS) == 7
        m, ebn0, gamma, exact, asym, fsk, qam = rows[0]
        assert (m, ebn0) == (4, 0.0)
        assert gamma == pytest.approx(4.0)
        assert exact == pytest.approx(ser_exact(4.0, 4))
        assert fsk == exact and isinstance(qam, float)

    def test_qam_blank_for_non_square(self):
        rows = theory_curve(2, [0.0])
        assert rows[0][-1] == ""
