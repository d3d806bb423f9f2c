"""Fixed inter-layer transfer matrices.

Two interconnect families are supported, plus a trivial pass-through used by
the analog beamforming baseline:

* cascaded 2x2 branch-line couplers in two staggered banks, repeated M_c
  times, with direct-path phase delay theta on the boundary ports,
* free-space propagation between two parallel element lines evaluated with
  the scalar Rayleigh-Sommerfeld kernel.

All builders are pure functions of their spec and return new arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

SPEED_OF_LIGHT = 299_792_458.0

PORT_SELECTIONS = ("first", "center")


@dataclass(frozen=True)
class CouplerSpec:
    """Coupler-bank interconnect between a layer of n_in and n_out ports.

    cascade_count is the number of times the two staggered coupler banks are
    repeated; theta is the phase delay of the two direct (uncoupled) boundary
    paths in the second bank. port_selection picks which rows/columns of the
    square base matrix survive when the layer is rectangular.
    """

    n_in: int
    n_out: int
    cascade_count: int = 1
    theta: float = math.pi / 4
    port_selection: str = "first"

    def __post_init__(self):
        if self.n_in < 1 or self.n_out < 1:
            raise ValueError("port counts must be >= 1")
        if self.cascade_count < 1:
            raise ValueError("cascade_count must be >= 1")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if self.port_selection not in PORT_SELECTIONS:
            raise ValueError(f"port_selection must be one of {PORT_SELECTIONS}")

    @property
    def n_max(self) -> int:
        """Smallest even integer >= max(n_in, n_out)."""
        n = max(self.n_in, self.n_out)
        return n if n % 2 == 0 else n + 1


@dataclass(frozen=True)
class DiffractionSpec:
    """Free-space interconnect between two parallel uniform element lines."""

    n_in: int
    n_out: int
    wavelength: float
    layer_spacing: float
    element_spacing: float
    element_area: float

    def __post_init__(self):
        if self.n_in < 1 or self.n_out < 1:
            raise ValueError("port counts must be >= 1")
        for name in ("wavelength", "layer_spacing", "element_spacing", "element_area"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def from_carrier(cls, n_in, n_out, frequency_hz=28e9,
                     layer_spacing_wavelengths=2.0, element_spacing_wavelengths=0.5,
                     element_area=None):
        """Spec in carrier-frequency units; spacings given in wavelengths.

        element_area defaults to the square of the element pitch.
        """
        lam = SPEED_OF_LIGHT / frequency_hz
        pitch = element_spacing_wavelengths * lam
        if element_area is None:
            element_area = pitch * pitch
        return cls(n_in=n_in, n_out=n_out, wavelength=lam,
                   layer_spacing=layer_spacing_wavelengths * lam,
                   element_spacing=pitch, element_area=element_area)


@dataclass(frozen=True)
class IdentitySpec:
    """No interconnect: port i of the input feeds port i of the output.

    Rectangular cases use the rectangular identity (extra ports dark). Used
    by the analog beamforming baseline, which is a single phase layer with
    no coupling.
    """

    n_in: int
    n_out: int

    def __post_init__(self):
        if self.n_in < 1 or self.n_out < 1:
            raise ValueError("port counts must be >= 1")


def coupler_unit() -> np.ndarray:
    """The 2x2 transfer matrix of one branch-line coupler."""
    return np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=np.complex128) / np.sqrt(2.0)


def _check_even(n_max: int):
    if n_max < 2 or n_max % 2 != 0:
        raise ValueError(f"n_max must be a positive even integer, got {n_max}")


def build_w1(n_max: int) -> np.ndarray:
    """First coupler bank: couplers on port pairs (1,2), (3,4), ..."""
    _check_even(n_max)
    return block_diag(*([coupler_unit()] * (n_max // 2))).astype(np.complex128)


def build_w2(n_max: int, theta: float) -> np.ndarray:
    """Second coupler bank, staggered by one port.

    Ports 1 and n_max are direct paths with phase delay theta; couplers sit
    on pairs (2,3), (4,5), .... With n_max = 2 there are no interior
    couplers and the bank degenerates to diag(e^{-j theta}, e^{-j theta}).
    """
    _check_even(n_max)
    edge = np.array([[np.exp(-1j * theta)]], dtype=np.complex128)
    if n_max == 2:
        return block_diag(edge, edge).astype(np.complex128)
    blocks = [edge] + [coupler_unit()] * (n_max // 2 - 1) + [edge]
    return block_diag(*blocks).astype(np.complex128)


def _select_ports(base: np.ndarray, n_out: int, n_in: int, rule: str) -> np.ndarray:
    n_max = base.shape[0]
    if rule == "first":
        r0 = c0 = 0
    else:  # center
        r0 = (n_max - n_out) // 2
        c0 = (n_max - n_in) // 2
    return np.ascontiguousarray(base[r0:r0 + n_out, c0:c0 + n_in])


def build_coupler_matrix(spec: CouplerSpec) -> np.ndarray:
    """Layer matrix (W2 W1)^{M_c}, reduced to n_out x n_in ports."""
    n_max = spec.n_max
    base = np.linalg.matrix_power(build_w2(n_max, spec.theta) @ build_w1(n_max),
                                  spec.cascade_count)
    return _select_ports(base, spec.n_out, spec.n_in, spec.port_selection)


def build_rs_matrix(spec: DiffractionSpec) -> np.ndarray:
    """Free-space layer matrix from the scalar Rayleigh-Sommerfeld kernel.

    Elements of each layer sit on a uniform line centered at the array
    midpoint; the two lines are parallel, axially aligned, and separated by
    layer_spacing. Entry (m, mt) couples input element mt to output element
    m through

        w = (A cos(chi) / r) * (1/(2 pi r) - j/lambda) * exp(j 2 pi r / lambda)

    with r the element-to-element distance and cos(chi) = layer_spacing / r
    (axial cosine of the propagation angle).
    """
    lam = spec.wavelength
    d = spec.layer_spacing
    if d <= 0:
        raise ValueError("invalid geometry: zero distance between layers")
    pos_in = (np.arange(spec.n_in) - (spec.n_in - 1) / 2.0) * spec.element_spacing
    pos_out = (np.arange(spec.n_out) - (spec.n_out - 1) / 2.0) * spec.element_spacing
    lateral = pos_out[:, None] - pos_in[None, :]
    r = np.sqrt(d * d + lateral * lateral)
    cos_chi = d / r
    amp = spec.element_area * cos_chi / r
    return amp * (1.0 / (2.0 * np.pi * r) - 1j / lam) * np.exp(2j * np.pi * r / lam)


def build_identity_matrix(spec: IdentitySpec) -> np.ndarray:
    return np.eye(spec.n_out, spec.n_in, dtype=np.complex128)


def build_matrix(spec) -> np.ndarray:
    """Dispatch on the parameter-object type."""
    if isinstance(spec, CouplerSpec):
        return build_coupler_matrix(spec)
    if isinstance(spec, DiffractionSpec):
        return build_rs_matrix(spec)
    if isinstance(spec, IdentitySpec):
        return build_identity_matrix(spec)
    raise TypeError(f"unknown coupling spec type {type(spec).__name__}")
