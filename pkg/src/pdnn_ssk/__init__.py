"""Simulation and optimization toolkit for space-shift-keying links built
from trainable multi-layer interconnect networks ("diffractive" front ends)
at both ends of a fading channel.

Layout:

- ``coupling``: fixed interconnect matrices (branch-line coupler cascades,
  free-space diffraction, identity baseline)
- ``pdnn``: a network = interconnects + trainable phase screens
- ``channel``: fading draws, noise, the end-to-end effective channel
- ``detection``: non-coherent and coherent symbol decisions
- ``analysis``: closed-form error rates and the special functions behind them
- ``training``: surrogate loss, analytic gradients, Adam / line-search /
  random-baseline optimizers
- ``montecarlo``: seeded SER curves and structural sum-rate sweeps
- ``cli``: the ``pdnn-ssk`` command
- ``rng``: keyed, splittable random streams
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .analysis import (benchmark_fsk_ser, benchmark_qam_ser, bessel_i0, ccdp,
                       CcdpInputs, ebn0_from_gamma, gamma_from_ebn0,
                       marcum_q1, ser_asymptotic, ser_exact, theory_curve)
from .channel import (ChannelRealization, EffectiveChannel, NoiseSpec,
                      SystemState, effective_channel, sample_channel, transmit)
from .coupling import (CouplerSpec, DiffractionSpec, IdentitySpec,
                       build_matrix, coupler_unit)
from .detection import DetectionResult, detect_ml, detect_noncoherent
from .errors import NumericError
from .montecarlo import (SerCurve, SerPoint, SweepResult, make_system,
                         ser_interference_free, ser_trained_system,
                         sweep_coupling, sweep_depth_width, wilson_interval)
from .pdnn import PdnnConfig, PdnnNetwork, uniform_coupler_config
from .rng import StreamKey, complex_normal, stream, subseed, uniform_phases
from .training import (ArmijoStep, SinrReport, TrainConfig, TrainRecord,
                       armijo_ascent_step, loss_and_gradients,
                       random_phase_baseline, sinr_from_effective_channel,
                       train, train_adam, train_pga_armijo)
