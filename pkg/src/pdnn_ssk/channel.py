"""Rayleigh fading, noise, and the end-to-end effective channel."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pdnn import PdnnNetwork
from .rng import StreamKey, complex_normal, stream


@dataclass(frozen=True)
class ChannelRealization:
    """One fading realization, entries i.i.d. CN(0, 1)."""

    h: np.ndarray
    seed: int


@dataclass(frozen=True)
class NoiseSpec:
    """Per-component noise variance sigma^2.

    The complex noise at each output port is CN(0, 2 sigma^2): variance
    sigma^2 per real dimension, total power sigma_n2 = 2 sigma^2. All SNR
    definitions use gamma = |c|^2 / (2 sigma^2).
    """

    sigma2: float

    def __post_init__(self):
        if not (self.sigma2 > 0):
            raise ValueError("sigma2 must be > 0")

    @property
    def sigma_n2(self) -> float:
        return 2.0 * self.sigma2

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))


def sample_channel(n_rx: int, n_tx: int, seed: int) -> ChannelRealization:
    """Deterministic CN(0,1) channel draw for (n_rx, n_tx, seed)."""
    if n_rx < 1 or n_tx < 1:
        raise ValueError("channel dimensions must be >= 1")
    gen = stream(StreamKey(root_seed=seed, domain="channel"))
    return ChannelRealization(h=complex_normal(gen, (n_rx, n_tx)), seed=seed)


def _is_power_of_two(m: int) -> bool:
    return m >= 2 and (m & (m - 1)) == 0


@dataclass
class SystemState:
    """A full link instance: TX network, channel, RX network, noise."""

    tx: PdnnNetwork
    rx: PdnnNetwork
    channel: ChannelRealization
    noise: NoiseSpec
    modulation_order: int

    def __post_init__(self):
        m = self.modulation_order
        if not _is_power_of_two(m):
            raise ValueError(f"modulation order must be 2^p with p >= 1, got {m}")
        if self.tx.config.side != "tx" or self.rx.config.side != "rx":
            raise ValueError("networks must be a (tx, rx) pair")
        if self.tx.input_size < m:
            raise ValueError(f"tx input width {self.tx.input_size} < modulation order {m}")
        if self.rx.output_size != m:
            raise ValueError(f"rx output width {self.rx.output_size} != modulation order {m}")
        n_rx, n_tx = self.channel.h.shape
        if n_tx != self.tx.output_size:
            raise ValueError(f"channel has {n_tx} tx-side ports, "
                             f"tx network outputs {self.tx.output_size}")
        if n_rx != self.rx.input_size:
            raise ValueError(f"channel has {n_rx} rx-side ports, "
                             f"rx network expects {self.rx.input_size}")


@dataclass(frozen=True)
class EffectiveChannel:
    """c[m', m] couples transmitted symbol m to receive port m'."""

    c: np.ndarray


def effective_channel(state: SystemState) -> EffectiveChannel:
    """C = F_R H F_T restricted to the one-hot symbol columns.

    With the default layout the TX input width equals M and the slice is a
    no-op; wider TX inputs correspond to zero-padded one-hot symbols, which
    select the first M columns.
    """
    full = state.rx.transfer_matrix() @ state.channel.h @ state.tx.transfer_matrix()
    return EffectiveChannel(c=np.ascontiguousarray(full[:, :state.modulation_order]))


def transmit(state: SystemState, m: int, gen: np.random.Generator) -> np.ndarray:
    """One received power vector y = |C[:, m-1] + n|^2 for symbol m (1-based)."""
    mo = state.modulation_order
    if not (1 <= m <= mo):
        raise ValueError(f"symbol index must be in 1..{mo}, got {m}")
    col = effective_channel(state).c[:, m - 1]
    noise = state.noise.sigma * (gen.standard_normal(mo) + 1j * gen.standard_normal(mo))
    return np.abs(col + noise) ** 2
