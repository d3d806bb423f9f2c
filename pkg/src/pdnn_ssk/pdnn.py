"""One planar diffractive network: fixed interconnects + trainable phases.

A network is a chain of L layers. Each layer owns a fixed coupling matrix
W (built once from its spec and cached) and a vector of trainable phases
beta forming the diagonal matrix Phi = diag(e^{j beta}).

Module order differs per side:

* transmitter: x -> Phi(W x), so the transfer matrix is
  Phi_L W_L ... Phi_1 W_1 and layer l's phases act on its OUTPUT ports;
* receiver: x -> W(Phi x), transfer matrix W_L Phi_L ... W_1 Phi_1, so
  layer l's phases act on its INPUT ports.

Phases are unconstrained reals; the exponential map keeps every diagonal
entry on the unit circle, which is why training is unconstrained.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import coupling

SIDES = ("tx", "rx")


@dataclass(frozen=True)
class PdnnConfig:
    side: str
    port_counts: tuple          # (N_0, N_1, ..., N_L)
    coupling: tuple             # one spec per layer

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")
        object.__setattr__(self, "port_counts", tuple(int(n) for n in self.port_counts))
        object.__setattr__(self, "coupling", tuple(self.coupling))
        if len(self.port_counts) < 2:
            raise ValueError("need at least one layer")
        if any(n < 1 for n in self.port_counts):
            raise ValueError("port counts must be >= 1")
        if len(self.coupling) != self.num_layers:
            raise ValueError("need exactly one coupling spec per layer")
        for l, spec in enumerate(self.coupling):
            if spec.n_in != self.port_counts[l] or spec.n_out != self.port_counts[l + 1]:
                raise ValueError(
                    f"layer {l + 1}: coupling spec is {spec.n_out}x{spec.n_in}, "
                    f"expected {self.port_counts[l + 1]}x{self.port_counts[l]}")

    @property
    def num_layers(self) -> int:
        return len(self.port_counts) - 1

    def phase_length(self, layer: int) -> int:
        """Number of phases of layer `layer` (0-based).

        Phases multiply the layer output on the transmit side and the layer
        input on the receive side; the composition order forces the sizes.
        """
        if self.side == "tx":
            return self.port_counts[layer + 1]
        return self.port_counts[layer]


class PdnnNetwork:
    """A configured network with its cached W matrices and current phases."""

    def __init__(self, config: PdnnConfig, phases=None):
        self.config = config
        self._weights = [coupling.build_matrix(spec) for spec in config.coupling]
        if phases is None:
            phases = [np.zeros(config.phase_length(l)) for l in range(config.num_layers)]
        self._phases = None
        self.set_phases(phases)

    @property
    def num_layers(self) -> int:
        return self.config.num_layers

    @property
    def input_size(self) -> int:
        return self.config.port_counts[0]

    @property
    def output_size(self) -> int:
        return self.config.port_counts[-1]

    @property
    def weights(self) -> list:
        """The fixed per-layer coupling matrices (cached, do not mutate)."""
        return self._weights

    @property
    def phases(self) -> list:
        """Copies of the per-layer phase vectors."""
        return [p.copy() for p in self._phases]

    def set_phases(self, phases):
        phases = [np.asarray(p, dtype=np.float64) for p in phases]
        if len(phases) != self.num_layers:
            raise ValueError(f"expected {self.num_layers} phase vectors, got {len(phases)}")
        for l, p in enumerate(phases):
            want = self.config.phase_length(l)
            if p.shape != (want,):
                raise ValueError(f"layer {l + 1}: expected {want} phases, got shape {p.shape}")
            if not np.all(np.isfinite(p)):
                raise ValueError(f"layer {l + 1}: phases must be finite")
        self._phases = [p.copy() for p in phases]

    def transfer_matrix(self) -> np.ndarray:
        """End-to-end matrix of shape (N_L, N_0)."""
        f = None
        for l in range(self.num_layers):
            w = self._weights[l]
            phi = np.exp(1j * self._phases[l])
            if self.config.side == "tx":
                g = w if f is None else w @ f
                f = phi[:, None] * g
            else:
                g = phi[None, :] * w          # W_l diag(phi)
                f = g if f is None else g @ f
        return f

    def forward_with_taps(self, x0) -> list:
        """Propagate x0 and return [x_0, x_1, ..., x_L]."""
        x = np.asarray(x0, dtype=np.complex128)
        if x.shape != (self.input_size,):
            raise ValueError(f"input must have shape ({self.input_size},), got {x.shape}")
        taps = [x]
        for l in range(self.num_layers):
            phi = np.exp(1j * self._phases[l])
            if self.config.side == "tx":
                x = phi * (self._weights[l] @ x)
            else:
                x = self._weights[l] @ (phi * x)
            taps.append(x)
        return taps

    # Checkpoint format: {"side": ..., "phases": [[...], ...]}.

    def phases_to_json(self) -> str:
        return json.dumps({"side": self.config.side,
                           "phases": [p.tolist() for p in self._phases]}, indent=1)

    def save_phases(self, path):
        Path(path).write_text(self.phases_to_json())

    def load_phases(self, path):
        data = json.loads(Path(path).read_text())
        if data.get("side") != self.config.side:
            raise ValueError(f"checkpoint side {data.get('side')!r} does not match "
                             f"network side {self.config.side!r}")
        self.set_phases([np.array(p, dtype=np.float64) for p in data["phases"]])


def uniform_coupler_config(side, m_order, n_ports, num_layers,
                           cascade_count=1, theta=np.pi / 4,
                           port_selection="first") -> PdnnConfig:
    """Paper-style layout: interior layers all have n_ports ports.

    The transmit side maps m_order input ports up to n_ports; the receive
    side maps n_ports down to m_order output ports.
    """
    if side == "tx":
        counts = [m_order] + [n_ports] * num_layers
    else:
        counts = [n_ports] * num_layers + [m_order]
    specs = [coupling.CouplerSpec(n_in=counts[l], n_out=counts[l + 1],
                                  cascade_count=cascade_count, theta=theta,
                                  port_selection=port_selection)
             for l in range(num_layers)]
    return PdnnConfig(side=side, port_counts=tuple(counts), coupling=tuple(specs))
