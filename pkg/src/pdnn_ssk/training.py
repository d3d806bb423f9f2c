"""Phase optimization against the effective sum-rate.

The objective is built from the per-symbol SINR of the effective channel
matrix: symbol m's matched tap power over everything else arriving in its
column plus noise. Training minimizes the natural-log surrogate loss
J = -sum ln(1 + SINR_m) (whose gradients are what the kernels return) and
reports the sum-rate sum log2(1 + SINR_m) in bits, so traces match the
rate bookkeeping while the optimizer works on the numerically convenient
scale; the two differ by the constant ln 2.

Three optimizers are provided: full-batch Adam on all phases of both
networks, projected gradient ascent with Armijo backtracking (the
projection is the identity because the unit-modulus constraint is
structural in the phase parameterization), and a single random draw as a
worst-case baseline.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .channel import EffectiveChannel, NoiseSpec, SystemState
from .errors import NumericError
from .rng import StreamKey, stream, uniform_phases

OPTIMIZER_KINDS = ("adam", "pga_armijo", "random")

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SinrReport:
    """Per-symbol SINR with the derived rate/loss pair."""

    sinr: np.ndarray
    sum_rate_bits: float
    loss: float


@dataclass(frozen=True)
class TrainConfig:
    kind: str = "adam"
    epochs: int = 1000
    learning_rate: float = 0.1
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    armijo_init_step: float = 1.0
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-4
    armijo_max_backtracks: int = 30

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"kind must be one of {OPTIMIZER_KINDS}, got {self.kind!r}")
        # 0 is allowed so a no-op run can serve as a frozen-phase control
        if not (self.learning_rate >= 0):
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not (0 < self.armijo_shrink < 1):
            raise ValueError("armijo_shrink must be in (0, 1)")


@dataclass(frozen=True)
class ArmijoStep:
    """One accepted (or exhausted) line-search step.

    required_gain is slope * alpha * ||g||^2; acceptance means
    value_after >= value_before + required_gain. alpha == 0 marks an epoch
    that exhausted its backtracks and kept the old phases.
    """

    epoch: int
    alpha: float
    value_before: float
    value_after: float
    required_gain: float
    backtracks: int


@dataclass
class TrainRecord:
    kind: str
    sum_rate_trace: np.ndarray      # epochs + 1 points, index 0 = initial
    loss_trace: np.ndarray
    final_phases_tx: list
    final_phases_rx: list
    epoch_seconds: np.ndarray
    armijo_steps: list = field(default_factory=list)

    @property
    def initial_sum_rate(self) -> float:
        return float(self.sum_rate_trace[0])

    @property
    def final_sum_rate(self) -> float:
        return float(self.sum_rate_trace[-1])

    def trace_rows(self):
        """Rows (epoch, sum_rate_bits, loss) for CSV export."""
        return [(e, float(r), float(j))
                for e, (r, j) in enumerate(zip(self.sum_rate_trace, self.loss_trace))]


def sinr_from_effective_channel(c, noise: NoiseSpec) -> SinrReport:
    """Per-symbol SINR of a square effective channel matrix.

    SINR_m = |c_mm|^2 / (sum_{m' != m} |c_m'm|^2 + sigma_n2), evaluated
    column by column.
    """
    mat = c.c if isinstance(c, EffectiveChannel) else np.asarray(c)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"effective channel must be square, got {mat.shape}")
    p = np.abs(mat) ** 2
    diag = np.diagonal(p)
    interference = p.sum(axis=0) - diag
    sinr = diag / (interference + noise.sigma_n2)
    sum_rate = float(np.sum(np.log2(1.0 + sinr)))
    loss = -float(np.sum(np.log1p(sinr)))
    return SinrReport(sinr=sinr, sum_rate_bits=sum_rate, loss=loss)


def _kernel_args(state: SystemState, phases_t, phases_r):
    return (state.tx.weights, phases_t, state.rx.weights, phases_r,
            state.channel.h, state.modulation_order, state.noise.sigma_n2)


def _check_finite(grads, side: str):
    for l, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            raise NumericError("training", "loss_and_gradients",
                               f"non-finite gradient in {side} layer {l + 1}")


def loss_and_gradients(state: SystemState, phases_t=None, phases_r=None):
    """Surrogate loss and its gradient w.r.t. every phase of both networks.

    Phases default to the networks' current ones; passing explicit lists
    evaluates a candidate point without mutating the networks. Returns
    (loss, grads_tx, grads_rx) with gradient lists matching the phase
    layout layer by layer.
    """
    if phases_t is None:
        phases_t = state.tx.phases
    if phases_r is None:
        phases_r = state.rx.phases
    loss, _, grads_t, grads_r = _kernels.chain_loss_grads(
        *_kernel_args(state, phases_t, phases_r))
    if not np.isfinite(loss):
        raise NumericError("training", "loss_and_gradients", "non-finite loss")
    _check_finite(grads_t, "tx")
    _check_finite(grads_r, "rx")
    return loss, grads_t, grads_r


def _loss_only(state: SystemState, phases_t, phases_r) -> float:
    loss, _ = _kernels.chain_loss(*_kernel_args(state, phases_t, phases_r))
    return loss


def _finish(state, kind, sum_rates, losses, seconds, phases_t, phases_r, steps=None):
    state.tx.set_phases(phases_t)
    state.rx.set_phases(phases_r)
    return TrainRecord(kind=kind,
                       sum_rate_trace=np.asarray(sum_rates, dtype=np.float64),
                       loss_trace=np.asarray(losses, dtype=np.float64),
                       final_phases_tx=state.tx.phases,
                       final_phases_rx=state.rx.phases,
                       epoch_seconds=np.asarray(seconds, dtype=np.float64),
                       armijo_steps=list(steps or []))


def train_adam(state: SystemState, config: TrainConfig) -> TrainRecord:
    """Full-batch Adam on all phases, minimizing the surrogate loss.

    Bias-corrected first/second moments per phase vector; one gradient
    evaluation per epoch. Deterministic: no randomness beyond the initial
    phases already installed in the networks.
    """
    if config.kind != "adam":
        raise ValueError(f"config.kind must be 'adam', got {config.kind!r}")
    phases_t = state.tx.phases
    phases_r = state.rx.phases
    mom1 = [np.zeros_like(p) for p in phases_t + phases_r]
    mom2 = [np.zeros_like(p) for p in phases_t + phases_r]
    b1, b2, eps, eta = (config.adam_beta1, config.adam_beta2,
                        config.adam_eps, config.learning_rate)

    params = phases_t + phases_r
    sum_rates, losses, seconds = [], [], []
    loss, grads_t, grads_r = loss_and_gradients(state, phases_t, phases_r)
    sum_rates.append(-loss / LN2)
    losses.append(loss)
    for epoch in range(1, config.epochs + 1):
        tic = time.perf_counter()
        corr1 = 1.0 - b1 ** epoch
        corr2 = 1.0 - b2 ** epoch
        for p, g, m1, m2 in zip(params, grads_t + grads_r, mom1, mom2):
            m1 *= b1
            m1 += (1.0 - b1) * g
            m2 *= b2
            m2 += (1.0 - b2) * g * g
            p -= eta * (m1 / corr1) / (np.sqrt(m2 / corr2) + eps)
        # the gradient call at the stepped point doubles as the trace value
        if epoch < config.epochs:
            loss, grads_t, grads_r = loss_and_gradients(state, phases_t, phases_r)
        else:
            loss = _loss_only(state, phases_t, phases_r)
        if not np.isfinite(loss):
            raise NumericError("training", "train_adam",
                               f"non-finite loss at epoch {epoch}")
        sum_rates.append(-loss / LN2)
        losses.append(loss)
        seconds.append(time.perf_counter() - tic)
    return _finish(state, "adam", sum_rates, losses, seconds, phases_t, phases_r)


def armijo_ascent_step(value_and_point, objective, gradient, config: TrainConfig, epoch: int):
    """One backtracking ascent step on an arbitrary objective.

    value_and_point is (f(x), x) at the current point; objective maps a
    point to its value; gradient is the ascent direction evaluated at x.
    Returns ((f_new, x_new), ArmijoStep). Exposed separately so the line
    search can be exercised on closed-form objectives.
    """
    f0, x0 = value_and_point
    gnorm2 = float(np.dot(gradient, gradient))
    alpha = config.armijo_init_step
    for backtracks in range(config.armijo_max_backtracks + 1):
        required = config.armijo_slope * alpha * gnorm2
        x1 = x0 + alpha * gradient
        f1 = objective(x1)
        if f1 >= f0 + required:
            return (f1, x1), ArmijoStep(epoch=epoch, alpha=alpha,
                                        value_before=f0, value_after=f1,
                                        required_gain=required,
                                        backtracks=backtracks)
        alpha *= config.armijo_shrink
    return (f0, x0), ArmijoStep(epoch=epoch, alpha=0.0, value_before=f0,
                                value_after=f0, required_gain=0.0,
                                backtracks=config.armijo_max_backtracks)


def _pack(phase_lists):
    return np.concatenate([p.ravel() for p in phase_lists])


def _unpack(vec, like):
    out, pos = [], 0
    for p in like:
        out.append(vec[pos:pos + p.size].copy())
        pos += p.size
    return out


def train_pga_armijo(state: SystemState, config: TrainConfig) -> TrainRecord:
    """Gradient ascent on the sum-rate with Armijo backtracking.

    Each epoch restarts the step size at armijo_init_step and shrinks it
    until the Armijo sufficient-increase condition holds; an epoch that
    exhausts its backtracks keeps the previous phases (recorded as a zero
    step). The unit-modulus constraint needs no projection step since the
    phases parameterize it exactly.
    """
    if config.kind != "pga_armijo":
        raise ValueError(f"config.kind must be 'pga_armijo', got {config.kind!r}")
    phases_t = state.tx.phases
    phases_r = state.rx.phases
    x = _pack(phases_t + phases_r)

    def split(vec):
        parts = _unpack(vec, phases_t + phases_r)
        return parts[:len(phases_t)], parts[len(phases_t):]

    def objective(vec) -> float:
        pt, pr = split(vec)
        return -_loss_only(state, pt, pr) / LN2

    sum_rates, losses, seconds, steps = [], [], [], []
    f = objective(x)
    sum_rates.append(f)
    losses.append(-f * LN2)
    for epoch in range(1, config.epochs + 1):
        tic = time.perf_counter()
        pt, pr = split(x)
        _, grads_t, grads_r = loss_and_gradients(state, pt, pr)
        ascent = -_pack(grads_t + grads_r) / LN2
        (f, x), step = armijo_ascent_step((f, x), objective, ascent, config, epoch)
        steps.append(step)
        sum_rates.append(f)
        losses.append(-f * LN2)
        seconds.append(time.perf_counter() - tic)
    pt, pr = split(x)
    return _finish(state, "pga_armijo", sum_rates, losses, seconds, pt, pr, steps)


def random_phase_baseline(state: SystemState, seed: int) -> TrainRecord:
    """Draw every phase once from Uniform(-pi, pi) and evaluate. No ascent."""
    gen = stream(StreamKey(root_seed=seed, domain="baseline"))
    phases_t = [uniform_phases(gen, p.size) for p in state.tx.phases]
    phases_r = [uniform_phases(gen, p.size) for p in state.rx.phases]
    loss = _loss_only(state, phases_t, phases_r)
    return _finish(state, "random", [-loss / LN2], [loss], [],
                   phases_t, phases_r)


def train(state: SystemState, config: TrainConfig, seed: int = 0) -> TrainRecord:
    """Dispatch on config.kind; seed only matters for the random baseline."""
    if config.kind == "adam":
        return train_adam(state, config)
    if config.kind == "pga_armijo":
        return train_pga_armijo(state, config)
    return random_phase_baseline(state, seed)
