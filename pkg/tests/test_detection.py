"""Max-power and coherent real-part detectors."""

import numpy as np
import pytest

from pdnn_ssk.channel import NoiseSpec
from pdnn_ssk.detection import detect_ml, detect_noncoherent
from pdnn_ssk.rng import StreamKey, stream


class TestNoncoherent:
    def test_argmax(self):
        assert detect_noncoherent([0.1, 0.9, 0.05, 0.2]).m_hat == 2

    def test_tie_breaks_to_lowest_index(self):
        assert detect_noncoherent([0.5, 0.5]).m_hat == 1
        assert detect_noncoherent([0.1, 0.7, 0.7]).m_hat == 2

    def test_noiseless_diagonal_channel_always_correct(self):
        amps = np.array([0.9, 1.3, 0.4, 2.0])
        for m in range(1, 5):
            y = np.zeros(4)
            y[m - 1] = amps[m - 1] ** 2
            assert detect_noncoherent(y).m_hat == m

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            detect_noncoherent([])
        with pytest.raises(ValueError):
            detect_noncoherent(np.zeros((2, 2)))

    def test_invariant_under_increasing_transforms(self):
        """Comparing powers is the same as comparing amplitudes."""
        rng = np.random.default_rng(0)
        for _ in range(100):
            y = rng.exponential(size=8)
            base = detect_noncoherent(y).m_hat
            assert detect_noncoherent(np.sqrt(y)).m_hat == base
            assert detect_noncoherent(np.log1p(y)).m_hat == base
            assert detect_noncoherent(3.7 * y).m_hat == base

    def test_metric_echoed(self):
        res = detect_noncoherent([1.0, 2.0])
        np.testing.assert_array_equal(res.metric, [1.0, 2.0])


class TestMl:
    def test_noiseless_picks_largest_real_coefficient(self):
        gen = stream(StreamKey(root_seed=0, domain="noise"))
        res = detect_ml([0.2, 0.9, 0.5], NoiseSpec(sigma2=1e-30), gen)
        assert res.m_hat == 2

    def test_equal_coefficients_uniform_at_high_noise(self):
        """All hypotheses identical: error rate (M-1)/M within 2%."""
        m = 4
        c = np.full(m, 0.1 + 0j)
        noise = NoiseSpec(sigma2=100.0)
        gen = stream(StreamKey(root_seed=3, domain="noise"))
        trials = 100_000
        errors = sum(detect_ml(c, noise, gen).m_hat != 1 for _ in range(trials))
        assert abs(errors / trials - (m - 1) / m) < 0.02

    def test_deterministic_given_stream(self):
        key = StreamKey(root_seed=9, domain="noise")
        a = detect_ml([1.0, 2.0, 0.5], NoiseSpec(0.5), stream(key))
        b = detect_ml([1.0, 2.0, 0.5], NoiseSpec(0.5), stream(key))
        assert a.m_hat == b.m_hat
        assert np.array_equal(a.metric, b.metric)

    def test_coherent_beats_noncoherent_at_matched_snr(self):
        """Interference-free link, same gamma: ML errors <= max-power errors."""
        m, gamma, trials = 4, 4.0, 50_000
        sigma2 = 0.5
        amp = np.sqrt(2 * sigma2 * gamma)
        noise = NoiseSpec(sigma2=sigma2)
        gen_sym = stream(StreamKey(root_seed=1, domain="noise", indices=(0,)))
        gen_nc = stream(StreamKey(root_seed=1, domain="noise", indices=(1,)))
        gen_ml = stream(StreamKey(root_seed=1, domain="noise", indices=(2,)))
        err_nc = err_ml = 0
        for m_sent in gen_sym.integers(1, m + 1, size=trials):
            means = np.zeros(m, dtype=np.complex128)
            means[m_sent - 1] = amp
            n = noise.sigma * (gen_nc.standard_normal(m) + 1j * gen_nc.standard_normal(m))
            err_nc += detect_noncoherent(np.abs(means + n) ** 2).m_hat != m_sent
            err_ml += detect_ml(means, noise, gen_ml).m_hat != m_sent
        assert err_ml <= err_nc
        # the coherent advantage is material, not a tie
        assert err_ml < 0.75 * err_nc
