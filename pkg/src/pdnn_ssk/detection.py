"""Symbol detectors: non-coherent max-power and coherent real-part ML."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import NoiseSpec


@dataclass(frozen=True)
class DetectionResult:
    m_hat: int              # 1-based symbol index
    metric: np.ndarray      # per-port decision metric


def detect_noncoherent(y) -> DetectionResult:
    """Pick the output port with maximum received power.

    Ties break toward the lowest index. Comparing powers is equivalent to
    comparing amplitudes, so the result is invariant under any strictly
    increasing transform of y.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("metric must be a nonempty 1-D vector")
    return DetectionResult(m_hat=int(np.argmax(y)) + 1, metric=y)


def detect_ml(c_diag, noise: NoiseSpec, gen: np.random.Generator) -> DetectionResult:
    """Coherent detector: argmax of Re{c_mm + n_m} over the hypotheses.

    The caller supplies the per-hypothesis diagonal coefficients; one
    independent complex noise draw per hypothesis is added here.
    """
    c_diag = np.asarray(c_diag, dtype=np.complex128)
    mo = c_diag.size
    n = noise.sigma * (gen.standard_normal(mo) + 1j * gen.standard_normal(mo))
    metric = np.real(c_diag + n)
    return DetectionResult(m_hat=int(np.argmax(metric)) + 1, metric=metric)
