"""Backend parity for the training-step kernels."""

import os
import subprocess
import sys

import numpy as np
import pytest

from pdnn_ssk import _kernels
from pdnn_ssk._kernels import _fallback
from pdnn_ssk.channel import NoiseSpec, SystemState, effective_channel, sample_channel
from pdnn_ssk.pdnn import PdnnNetwork, uniform_coupler_config
from pdnn_ssk.rng import StreamKey, stream, uniform_phases

try:
    from pdnn_ssk._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled core not built")


def make_case(seed, m=4, n=8, lt=2, lr=2):
    gen = stream(StreamKey(root_seed=seed, domain="init"))
    tx = PdnnNetwork(uniform_coupler_config("tx", m, n, lt))
    rx = PdnnNetwork(uniform_coupler_config("rx", m, n, lr))
    tx.set_phases([uniform_phases(gen, p.size) for p in tx.phases])
    rx.set_phases([uniform_phases(gen, p.size) for p in rx.phases])
    h = sample_channel(n, n, seed).h
    return (tx.weights, tx.phases, rx.weights, rx.phases, h, m, 1e-3)


class TestBackendSelection:
    def test_backend_reported(self):
        assert _kernels.BACKEND in ("compiled", "python")

    def test_forced_python_backend(self):
        code = ("from pdnn_ssk import _kernels; "
                "assert _kernels.BACKEND == 'python', _kernels.BACKEND")
        env = dict(os.environ, PDNN_SSK_BACKEND="python")
        subprocess.run([sys.executable, "-c", code], check=True, env=env)

    def test_invalid_backend_rejected(self):
        env = dict(os.environ, PDNN_SSK_BACKEND="gpu")
        proc = subprocess.run([sys.executable, "-c", "import pdnn_ssk._kernels"],
                              env=env, capture_output=True, text=True)
        assert proc.returncode != 0
        assert "PDNN_SSK_BACKEND" in proc.stderr


class TestFallbackSemantics:
    def test_loss_only_matches_full_call(self):
        args = make_case(0)
        loss_a, c_a = _fallback.chain_loss(*args)
        loss_b, c_b, _, _ = _fallback.chain_loss_grads(*args)
        assert loss_a == pytest.approx(loss_b, rel=1e-14)
        np.testing.assert_allclose(c_a, c_b, atol=1e-14)

    def test_effective_channel_matches_network_composition(self):
        gen = stream(StreamKey(root_seed=4, domain="init"))
        tx = PdnnNetwork(uniform_coupler_config("tx", 4, 8, 2))
        rx = PdnnNetwork(uniform_coupler_config("rx", 4, 8, 2))
        tx.set_phases([uniform_phases(gen, p.size) for p in tx.phases])
        rx.set_phases([uniform_phases(gen, p.size) for p in rx.phases])
        state = SystemState(tx=tx, rx=rx, channel=sample_channel(8, 8, 4),
                            noise=NoiseSpec(0.5), modulation_order=4)
        _, c = _fallback.chain_loss(tx.weights, tx.phases, rx.weights, rx.phases,
                                    state.channel.h, 4, state.noise.sigma_n2)
        np.testing.assert_allclose(c, effective_channel(state).c, atol=1e-13)

    def test_gradients_match_finite_differences(self):
        ws_t, phases_t, ws_r, phases_r, h, m, sig = make_case(7, m=2, n=4, lt=1, lr=1)
        _, _, grads_t, grads_r = _fallback.chain_loss_grads(
            ws_t, phases_t, ws_r, phases_r, h, m, sig)
        step = 1e-6
        for side, phases, grads in (("t", phases_t, grads_t), ("r", phases_r, grads_r)):
            for l, p in enumerate(phases):
                for i in range(p.size):
                    hi = [q.copy() for q in phases]
                    lo = [q.copy() for q in phases]
                    hi[l][i] += step
                    lo[l][i] -= step
                    if side == "t":
                        f_hi, _ = _fallback.chain_loss(ws_t, hi, ws_r, phases_r, h, m, sig)
                        f_lo, _ = _fallback.chain_loss(ws_t, lo, ws_r, phases_r, h, m, sig)
                    else:
                        f_hi, _ = _fallback.chain_loss(ws_t, phases_t, ws_r, hi, h, m, sig)
                        f_lo, _ = _fallback.chain_loss(ws_t, phases_t, ws_r, lo, h, m, sig)
                    fd = (f_hi - f_lo) / (2 * step)
                    if abs(fd) > 1e-8:
                        assert grads[l][i] == pytest.approx(fd, rel=1e-5)


@needs_core
class TestBackendParity:
    @pytest.mark.parametrize("seed,m,n,lt,lr", [
        (0, 4, 8, 2, 2), (1, 2, 4, 1, 1), (2, 4, 16, 2, 2),
        (3, 8, 8, 1, 2), (4, 4, 12, 2, 1), (5, 16, 16, 2, 2),
    ])
    def test_losses_and_gradients_agree(self, seed, m, n, lt, lr):
        args = make_case(seed, m=m, n=n, lt=lt, lr=lr)
        loss_p, c_p, gt_p, gr_p = _fallback.chain_loss_grads(*args)
        loss_c, c_c, gt_c, gr_c = _core.chain_loss_grads(*args)
        assert loss_c == pytest.approx(loss_p, rel=1e-12)
        np.testing.assert_allclose(c_c, c_p, atol=1e-12)
        for a, b in zip(gt_p + gr_p, gt_c + gr_c):
            np.testing.assert_allclose(b, a, atol=1e-10)

    def test_loss_only_agrees(self):
        args = make_case(11)
        loss_p, c_p = _fallback.chain_loss(*args)
        loss_c, c_c = _core.chain_loss(*args)
        assert loss_c == pytest.approx(loss_p, rel=1e-12)
        np.testing.assert_allclose(c_c, c_p, atol=1e-12)

    def test_compiled_deterministic(self):
        args = make_case(12)
        a = _core.chain_loss_grads(*args)
        b = _core.chain_loss_grads(*args)
        assert a[0] == b[0]
        assert np.array_equal(a[1], b[1])
        for x, y in zip(a[2] + a[3], b[2] + b[3]):
            assert np.array_equal(x, y)

    def test_accepts_non_contiguous_inputs(self):
        """Strided views are coerced, not rejected."""
        ws_t, phases_t, ws_r, phases_r, h, m, sig = make_case(13)
        h_strided = np.asfortranarray(h)
        loss_a, _, _, _ = _core.chain_loss_grads(ws_t, phases_t, ws_r, phases_r,
                                                 h_strided, m, sig)
        loss_b, _, _, _ = _core.chain_loss_grads(ws_t, phases_t, ws_r, phases_r,
                                                 h, m, sig)
        assert loss_a == pytest.approx(loss_b, rel=1e-15)
