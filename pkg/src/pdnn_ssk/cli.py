"""Command-line entry point for the simulation experiments.

One invocation runs one experiment into one output directory: CSV data
files, a JSON manifest sufficient to reproduce the run, and (for training
experiments) phase checkpoints.

Configuration sources, lowest to highest precedence:

1. built-in defaults (the standard simulation setup: theta = pi/4, uniform
   phase initialization, equal interior port counts),
2. a JSON config file via --config,
3. environment variables prefixed PDNN_SSK_ (double underscore descends
   into sections, e.g. PDNN_SSK_SYSTEM__N_PORTS=32),
4. command-line flags.

Unknown config keys are rejected rather than ignored, so typos in sweep
definitions fail loudly. Exit codes: 0 success, 2 invalid configuration or
unusable output directory, 3 numeric failure inside an experiment; the
failure record is printed to stderr as one JSON object either way.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, csvio, montecarlo
from .errors import NumericError
from .rng import subseed
from .training import OPTIMIZER_KINDS, TrainConfig, train

ENV_PREFIX = "PDNN_SSK_"

EXPERIMENTS = ("theory-curves", "ser-interference-free", "train", "ser-trained",
               "sweep-depth-width", "sweep-coupling", "dump-matrices",
               "propagate-taps")

TRACE_COLUMNS = ("channel_seed", "epoch", "sum_rate_bits", "loss")
SUMMARY_COLUMNS = ("channel_seed", "optimizer", "initial_sum_rate_bits",
                   "final_sum_rate_bits")
TAP_COLUMNS = ("symbol", "stage", "port", "re", "im", "magnitude")


class ConfigError(ValueError):
    """Invalid configuration; collects field-level diagnostics."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


# --- configuration schema ---------------------------------------------------

@dataclass
class SystemSection:
    modulation_order: int = 4
    n_ports: int = 16
    layers_tx: int = 2
    layers_rx: int = 2
    interconnect: str = "coupler"        # coupler | diffractive | identity
    cascade_count: int = 1
    theta: float = math.pi / 4
    port_selection: str = "first"
    noise_sigma2: float = montecarlo.DEFAULT_TRAIN_SIGMA2
    diffraction: dict = field(default_factory=dict)


@dataclass
class TrainSection:
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

    def to_train_config(self, kind=None) -> TrainConfig:
        return TrainConfig(kind=kind or self.kind, epochs=self.epochs,
                           learning_rate=self.learning_rate,
                           adam_beta1=self.adam_beta1, adam_beta2=self.adam_beta2,
                           adam_eps=self.adam_eps,
                           armijo_init_step=self.armijo_init_step,
                           armijo_shrink=self.armijo_shrink,
                           armijo_slope=self.armijo_slope,
                           armijo_max_backtracks=self.armijo_max_backtracks)


@dataclass
class MonteCarloSection:
    trials: int = 100000
    channels: int = 100                  # number of channel realizations
    min_errors: int | None = None        # early stop per point when set
    ebn0_db_grid: tuple = tuple(float(x) for x in range(0, 15))
    gamma_grid: tuple | None = None      # overrides the Eb/N0 grid when set
    m_orders: tuple = (4, 16, 64)        # multi-M experiments
    optimizers: tuple = ("adam", "pga_armijo", "random")


@dataclass
class SweepSection:
    n_grid: tuple = (8, 12, 16, 20, 24, 28, 32)
    layer_configs: tuple = ((1, 1), (2, 2), (1, 3))
    mc_values: tuple = (1, 2, 3)
    coupler_depths: tuple = (1, 2)
    diffractive_depths: tuple = (1,)
    include_baseline: bool = True


@dataclass
class ExperimentConfig:
    experiment: str = "theory-curves"
    out: str = "out"
    seed: int = 0
    workers: int = 0                     # 0 = use available parallelism
    system: SystemSection = field(default_factory=SystemSection)
    train: TrainSection = field(default_factory=TrainSection)
    montecarlo: MonteCarloSection = field(default_factory=MonteCarloSection)
    sweep: SweepSection = field(default_factory=SweepSection)


_SECTIONS = {"system": SystemSection, "train": TrainSection,
             "montecarlo": MonteCarloSection, "sweep": SweepSection}

# tuple-valued fields and their element converters
_TUPLE_ELEMENT = {"ebn0_db_grid": float, "gamma_grid": float,
                  "m_orders": int, "optimizers": str,
                  "n_grid": int, "mc_values": int,
                  "coupler_depths": int, "diffractive_depths": int}


def _coerce(name, value, default, path):
    full = f"{path}{name}"
    if name == "layer_configs":
        try:
            out = tuple((int(a), int(b)) for a, b in value)
        except (TypeError, ValueError):
            raise ConfigError([f"{full}: expected a list of (layers_tx, layers_rx) pairs"])
        return out
    if name in _TUPLE_ELEMENT:
        if name == "gamma_grid" and value is None:
            return None
        conv = _TUPLE_ELEMENT[name]
        try:
            return tuple(conv(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError([f"{full}: expected a list of {conv.__name__} values"])
    if name == "min_errors":
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError([f"{full}: expected an integer or null"])
        return value
    if name == "diffraction":
        if not isinstance(value, dict):
            raise ConfigError([f"{full}: expected an object"])
        return dict(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError([f"{full}: expected true/false"])
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise ConfigError([f"{full}: expected an integer"])
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float, np.floating)):
            raise ConfigError([f"{full}: expected a number"])
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError([f"{full}: expected a string"])
        return value
    return value


def _section_from_dict(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError([f"{path.rstrip('.')}: expected an object"])
    defaults = cls()
    names = {f.name for f in dataclasses.fields(cls)}
    violations = []
    kwargs = {}
    for key, value in data.items():
        if key not in names:
            violations.append(f"{path}{key}: unknown key")
            continue
        try:
            kwargs[key] = _coerce(key, value, getattr(defaults, key), path)
        except ConfigError as e:
            violations.extend(e.violations)
    if violations:
        raise ConfigError(violations)
    return dataclasses.replace(defaults, **kwargs)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from a plain dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(["top level: expected an object"])
    cfg = ExperimentConfig()
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    violations = []
    kwargs = {}
    for key, value in data.items():
        if key not in names:
            violations.append(f"{key}: unknown key")
            continue
        if key in _SECTIONS:
            try:
                kwargs[key] = _section_from_dict(_SECTIONS[key], value, f"{key}.")
            except ConfigError as e:
                violations.extend(e.violations)
        else:
            try:
                kwargs[key] = _coerce(key, value, getattr(cfg, key), "")
            except ConfigError as e:
                violations.extend(e.violations)
    if violations:
        raise ConfigError(violations)
    return dataclasses.replace(cfg, **kwargs)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Plain-dict form; round-trips losslessly through config_from_dict."""
    return dataclasses.asdict(cfg)


# control variables consumed elsewhere (kernel selection, test-suite scale),
# never part of the experiment configuration
_ENV_RESERVED = frozenset({ENV_PREFIX + "BACKEND", ENV_PREFIX + "ACCEPTANCE_FULL"})


def _merge_env(data: dict, env) -> dict:
    """Overlay PDNN_SSK_* environment variables onto a config dict."""
    out = json.loads(json.dumps(data))  # deep copy with JSON-only types
    for key, raw in sorted(env.items()):
        if not key.startswith(ENV_PREFIX) or key in _ENV_RESERVED:
            continue
        dotted = key[len(ENV_PREFIX):].lower().split("__")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        for part in dotted[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError([f"{key}: cannot descend into non-object"])
        node[dotted[-1]] = value
    return out


# --- grids and flag parsing --------------------------------------------------

def parse_grid(text: str):
    """Grid syntax: either 'start:step:stop' (stop inclusive) or 'a,b,c'."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError([f"grid {text!r}: expected start:step:stop"])
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError([f"grid {text!r}: need step > 0 and stop >= start"])
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(n))
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise ConfigError([f"grid {text!r}: expected numbers"])


def _parse_int_list(text: str):
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ConfigError([f"{text!r}: expected comma-separated integers"])


def _flag_overrides(args) -> dict:
    """Map parsed flags onto a (possibly nested) config-dict overlay."""
    over: dict = {}

    def put(path, value):
        node = over
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = value

    if args.experiment:
        put(("experiment",), args.experiment)
    if args.out is not None:
        put(("out",), args.out)
    if args.seed is not None:
        put(("seed",), args.seed)
    if args.workers is not None:
        put(("workers",), args.workers)
    if args.m is not None:
        orders = _parse_int_list(args.m)
        put(("montecarlo", "m_orders"), list(orders))
        if len(orders) == 1:
            put(("system", "modulation_order"), orders[0])
    if args.n is not None:
        put(("system", "n_ports"), args.n)
    if args.layers is not None:
        pair = _parse_int_list(args.layers)
        if len(pair) != 2:
            raise ConfigError([f"--layers {args.layers!r}: expected LT,LR"])
        put(("system", "layers_tx"), pair[0])
        put(("system", "layers_rx"), pair[1])
    if args.interconnect is not None:
        put(("system", "interconnect"), args.interconnect)
    if args.cascade is not None:
        put(("system", "cascade_count"), args.cascade)
    if args.theta is not None:
        put(("system", "theta"), args.theta)
    if args.port_selection is not None:
        put(("system", "port_selection"), args.port_selection)
    if args.noise_sigma2 is not None:
        put(("system", "noise_sigma2"), args.noise_sigma2)
    if args.optimizer is not None:
        put(("train", "kind"), args.optimizer)
    if args.lr is not None:
        put(("train", "learning_rate"), args.lr)
    if args.epochs is not None:
        put(("train", "epochs"), args.epochs)
    if args.trials is not None:
        put(("montecarlo", "trials"), args.trials)
    if args.channels is not None:
        put(("montecarlo", "channels"), args.channels)
    if args.min_errors is not None:
        put(("montecarlo", "min_errors"), args.min_errors)
    if args.ebn0 is not None:
        put(("montecarlo", "ebn0_db_grid"), list(parse_grid(args.ebn0)))
    if args.gamma is not None:
        put(("montecarlo", "gamma_grid"), list(parse_grid(args.gamma)))
    if args.optimizers is not None:
        put(("montecarlo", "optimizers"), args.optimizers.split(","))
    if args.mc is not None:
        put(("sweep", "mc_values"), list(_parse_int_list(args.mc)))
    if args.n_grid is not None:
        put(("sweep", "n_grid"), [int(v) for v in parse_grid(args.n_grid)])
    if args.layer_configs is not None:
        pairs = []
        for chunk in args.layer_configs.split(";"):
            pair = _parse_int_list(chunk)
            if len(pair) != 2:
                raise ConfigError([f"--layer-configs: bad pair {chunk!r}"])
            pairs.append(list(pair))
        put(("sweep", "layer_configs"), pairs)
    return over


def _deep_merge(base: dict, overlay: dict) -> dict:
    out = dict(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(args, env=None) -> ExperimentConfig:
    """Defaults <- config file <- environment <- flags, then validate keys."""
    data = config_to_dict(ExperimentConfig())
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as e:
            raise ConfigError([f"--config {args.config}: {e}"])
        try:
            file_data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError([f"--config {args.config}: invalid JSON ({e})"])
        # file keys are validated by config_from_dict below
        data = _deep_merge(data, file_data if isinstance(file_data, dict) else {})
        if not isinstance(file_data, dict):
            raise ConfigError([f"--config {args.config}: expected a JSON object"])
    data = _merge_env(data, os.environ if env is None else env)
    data = _deep_merge(data, _flag_overrides(args))
    return config_from_dict(data)


# --- structural validation ----------------------------------------------------

def validate_config(cfg: ExperimentConfig):
    """Dry-run structural checks; returns a list of violations (no raising)."""
    from .coupling import PORT_SELECTIONS
    from .pdnn import PdnnConfig

    v = []
    if cfg.experiment not in EXPERIMENTS:
        v.append(f"experiment: unknown kind {cfg.experiment!r}, "
                 f"expected one of {', '.join(EXPERIMENTS)}")
    s = cfg.system
    m = s.modulation_order
    if not (isinstance(m, int) and m >= 2 and (m & (m - 1)) == 0):
        v.append("system.modulation_order: modulation order must be a power of two (>= 2)")
    if s.n_ports < 1:
        v.append("system.n_ports: must be >= 1")
    if s.layers_tx < 1 or s.layers_rx < 1:
        v.append("system.layers_tx/layers_rx: must be >= 1")
    if s.interconnect not in montecarlo.INTERCONNECTS:
        v.append(f"system.interconnect: expected one of {montecarlo.INTERCONNECTS}")
    if s.port_selection not in PORT_SELECTIONS:
        v.append(f"system.port_selection: expected one of {PORT_SELECTIONS}")
    if not (s.noise_sigma2 > 0):
        v.append("system.noise_sigma2: must be > 0")
    if s.interconnect == "identity" and (s.layers_tx != 1 or s.layers_rx != 1):
        v.append("system.interconnect: the no-coupling baseline is single-layer per side")

    if not v:
        # shape-chain dry run: construct layer specs and network configs
        for side, counts in (("tx", [m] + [s.n_ports] * s.layers_tx),
                             ("rx", [s.n_ports] * s.layers_rx + [m])):
            specs = []
            for l in range(len(counts) - 1):
                try:
                    specs.append(montecarlo._interconnect_specs(
                        s.interconnect, counts[l:l + 2], s.cascade_count,
                        s.theta, s.port_selection, s.diffraction)[0])
                except (ValueError, TypeError) as e:
                    v.append(f"system.{side}: layer {l + 1}: {e}")
            if len(specs) == len(counts) - 1:
                try:
                    PdnnConfig(side=side, port_counts=tuple(counts),
                               coupling=tuple(specs))
                except ValueError as e:
                    v.append(f"system.{side}: {e}")

    try:
        cfg.train.to_train_config()
    except ValueError as e:
        v.append(f"train: {e}")

    mc = cfg.montecarlo
    if mc.trials < 1:
        v.append("montecarlo.trials: must be >= 1")
    if mc.channels < 1:
        v.append("montecarlo.channels: must be >= 1")
    if mc.min_errors is not None and mc.min_errors < 1:
        v.append("montecarlo.min_errors: must be >= 1 or null")
    if len(mc.ebn0_db_grid) < 1:
        v.append("montecarlo.ebn0_db_grid: must not be empty")
    for kind in mc.optimizers:
        if kind not in OPTIMIZER_KINDS:
            v.append(f"montecarlo.optimizers: unknown optimizer {kind!r}")
    for order in mc.m_orders:
        if not (order >= 2 and (order & (order - 1)) == 0):
            v.append(f"montecarlo.m_orders: modulation order must be a power of two, got {order}")

    sw = cfg.sweep
    if len(sw.n_grid) < 1:
        v.append("sweep.n_grid: must not be empty")
    for lt, lr in sw.layer_configs:
        if lt < 1 or lr < 1:
            v.append(f"sweep.layer_configs: layers must be >= 1, got ({lt}, {lr})")
    for mc_val in sw.mc_values:
        if mc_val < 1:
            v.append(f"sweep.mc_values: cascade count must be >= 1, got {mc_val}")
    if cfg.workers < 0:
        v.append("workers: must be >= 0 (0 selects available parallelism)")
    return v


# --- experiment drivers -------------------------------------------------------

def _resolve_workers(cfg) -> int:
    return cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)


def _make_system(cfg, channel_seed) -> "montecarlo.SystemState":
    s = cfg.system
    return montecarlo.make_system(
        s.modulation_order, s.n_ports, s.layers_tx, s.layers_rx,
        channel_seed=channel_seed, noise_sigma2=s.noise_sigma2,
        interconnect=s.interconnect, cascade_count=s.cascade_count,
        theta=s.theta, port_selection=s.port_selection,
        diffraction=s.diffraction or None, root_seed=cfg.seed)


def _run_theory_curves(cfg, outdir: Path):
    rows = []
    for m in cfg.montecarlo.m_orders:
        rows.extend(analysis.theory_curve(m, cfg.montecarlo.ebn0_db_grid))
    csvio.write_rows(outdir / "theory_curves.csv", analysis.THEORY_CURVE_COLUMNS, rows)


def _run_ser_interference_free(cfg, outdir: Path):
    mc = cfg.montecarlo
    for m in mc.m_orders:
        gammas = mc.gamma_grid
        if gammas is None:
            gammas = tuple(analysis.gamma_from_ebn0(e, m) for e in mc.ebn0_db_grid)
        curve = montecarlo.ser_interference_free(
            m, gammas, mc.trials, seed=subseed(cfg.seed, "iffree", m),
            min_errors=mc.min_errors)
        montecarlo.write_ser_curve_csv(curve, outdir / f"ser_interference_free_m{m}.csv")


def _run_train(cfg, outdir: Path):
    phase_dir = outdir / "phases"
    phase_dir.mkdir(exist_ok=True)
    trace_rows, summary_rows = [], []
    kind = cfg.train.kind
    for s in range(cfg.montecarlo.channels):
        state = _make_system(cfg, channel_seed=s)
        record = train(state, cfg.train.to_train_config(),
                       seed=subseed(cfg.seed, "baseline", s))
        for epoch, rate, loss in record.trace_rows():
            trace_rows.append((s, epoch, rate, loss))
        summary_rows.append((s, kind, record.initial_sum_rate, record.final_sum_rate))
        state.tx.save_phases(phase_dir / f"seed{s}_tx.json")
        state.rx.save_phases(phase_dir / f"seed{s}_rx.json")
    csvio.write_rows(outdir / "train_traces.csv", TRACE_COLUMNS, trace_rows)
    csvio.write_rows(outdir / "train_summary.csv", SUMMARY_COLUMNS, summary_rows)


def _run_ser_trained(cfg, outdir: Path):
    mc = cfg.montecarlo
    summary_rows = []
    for kind in mc.optimizers:
        for s in range(mc.channels):
            state = _make_system(cfg, channel_seed=s)
            record = train(state, cfg.train.to_train_config(kind=kind),
                           seed=subseed(cfg.seed, "baseline", kind, s))
            curve = montecarlo.ser_trained_system(
                state, mc.ebn0_db_grid, mc.trials,
                seed=subseed(cfg.seed, "sernoise", kind, s),
                min_errors=mc.min_errors, label=f"{kind}_seed{s}")
            montecarlo.write_ser_curve_csv(
                curve, outdir / f"ser_trained_{kind}_seed{s}.csv")
            summary_rows.append((s, kind, record.initial_sum_rate,
                                 record.final_sum_rate))
    csvio.write_rows(outdir / "train_summary.csv", SUMMARY_COLUMNS, summary_rows)


def _run_sweep_depth_width(cfg, outdir: Path):
    results = montecarlo.sweep_depth_width(
        cfg.system.modulation_order, cfg.sweep.layer_configs, cfg.sweep.n_grid,
        tuple(range(cfg.montecarlo.channels)), cfg.train.to_train_config(),
        noise_sigma2=cfg.system.noise_sigma2,
        cascade_count=cfg.system.cascade_count, root_seed=cfg.seed,
        workers=_resolve_workers(cfg))
    montecarlo.write_sweep_csv(results, outdir / "sweep_depth_width.csv")


def _run_sweep_coupling(cfg, outdir: Path):
    results = montecarlo.sweep_coupling(
        cfg.system.modulation_order, cfg.sweep.mc_values, cfg.sweep.n_grid,
        tuple(range(cfg.montecarlo.channels)), cfg.train.to_train_config(),
        coupler_depths=cfg.sweep.coupler_depths,
        diffractive_depths=cfg.sweep.diffractive_depths,
        diffraction=cfg.system.diffraction or None,
        include_baseline=cfg.sweep.include_baseline,
        noise_sigma2=cfg.system.noise_sigma2, root_seed=cfg.seed,
        workers=_resolve_workers(cfg))
    montecarlo.write_sweep_csv(results, outdir / "sweep_coupling.csv")


def _run_dump_matrices(cfg, outdir: Path):
    mat_dir = outdir / "matrices"
    mat_dir.mkdir(exist_ok=True)
    state = _make_system(cfg, channel_seed=cfg.seed)
    for side, net in (("tx", state.tx), ("rx", state.rx)):
        for l, w in enumerate(net.weights):
            csvio.write_complex_matrix(mat_dir / f"{side}_layer{l + 1}_w.csv", w)
        csvio.write_complex_matrix(mat_dir / f"{side}_transfer.csv",
                                   net.transfer_matrix())
    csvio.write_complex_matrix(mat_dir / "channel.csv", state.channel.h)
    from .channel import effective_channel
    csvio.write_complex_matrix(mat_dir / "effective_channel.csv",
                               effective_channel(state).c)


def _run_propagate_taps(cfg, outdir: Path):
    state = _make_system(cfg, channel_seed=cfg.seed)
    rows = []

    def add(symbol, stage, vec):
        for port, z in enumerate(vec):
            rows.append((symbol, stage, port + 1, float(z.real), float(z.imag),
                         float(abs(z))))

    for m in range(1, state.modulation_order + 1):
        x0 = np.zeros(state.tx.input_size, dtype=np.complex128)
        x0[m - 1] = 1.0
        tx_taps = state.tx.forward_with_taps(x0)
        for l, vec in enumerate(tx_taps):
            add(m, f"tx{l}", vec)
        y0 = state.channel.h @ tx_taps[-1]
        add(m, "channel", y0)
        rx_taps = state.rx.forward_with_taps(y0)
        for l, vec in enumerate(rx_taps[1:], start=1):
            add(m, f"rx{l}", vec)
    csvio.write_rows(outdir / "taps.csv", TAP_COLUMNS, rows)


_DRIVERS = {
    "theory-curves": _run_theory_curves,
    "ser-interference-free": _run_ser_interference_free,
    "train": _run_train,
    "ser-trained": _run_ser_trained,
    "sweep-depth-width": _run_sweep_depth_width,
    "sweep-coupling": _run_sweep_coupling,
    "dump-matrices": _run_dump_matrices,
    "propagate-taps": _run_propagate_taps,
}


# --- argument parsing and entry point ------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdnn-ssk",
        description="Simulation and optimization experiments for "
                    "coupled-network space-shift-keying links.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_experiment):
        if with_experiment:
            p.add_argument("experiment", nargs="?", choices=EXPERIMENTS,
                           help="experiment kind (defaults to the config file's)")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="global root seed")
        p.add_argument("--workers", type=int,
                       help="worker processes (0 = available parallelism)")
        p.add_argument("--m", help="modulation order(s), comma separated")
        p.add_argument("--n", type=int, help="interior ports per layer")
        p.add_argument("--layers", help="LT,LR layer counts")
        p.add_argument("--interconnect", help="coupler | diffractive | identity")
        p.add_argument("--cascade", type=int, help="couplers cascaded per layer")
        p.add_argument("--theta", type=float, help="edge phase of the interconnect")
        p.add_argument("--port-selection", dest="port_selection",
                       help="first | center")
        p.add_argument("--noise-sigma2", dest="noise_sigma2", type=float,
                       help="per-component noise variance used for training")
        p.add_argument("--optimizer", help="adam | pga_armijo | random")
        p.add_argument("--optimizers", help="comma list for ser-trained")
        p.add_argument("--lr", type=float, help="learning rate")
        p.add_argument("--epochs", type=int, help="training epochs")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
        p.add_argument("--channels", type=int, help="number of channel seeds")
        p.add_argument("--min-errors", dest="min_errors", type=int,
                       help="early-stop error count per point")
        p.add_argument("--ebn0", help="Eb/N0 dB grid, start:step:stop or list")
        p.add_argument("--gamma", help="matched-tap SNR grid (overrides --ebn0)")
        p.add_argument("--mc", help="cascade counts for sweep-coupling")
        p.add_argument("--n-grid", dest="n_grid", help="port-count grid for sweeps")
        p.add_argument("--layer-configs", dest="layer_configs",
                       help="semicolon list of LT,LR pairs, e.g. 1,1;2,2")

    add_common(sub.add_parser("run", help="run an experiment"), True)
    add_common(sub.add_parser("validate", help="check a config without running"), True)
    return parser


def _fail(record: dict, code: int) -> int:
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as e:
        return _fail({"error": "invalid-config", "violations": e.violations}, 2)

    violations = validate_config(cfg)
    if args.command == "validate":
        print(json.dumps({"experiment": cfg.experiment,
                          "violations": violations}, indent=1))
        return 0
    if violations:
        return _fail({"error": "invalid-config", "violations": violations}, 2)

    outdir = Path(cfg.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        return _fail({"error": "invalid-config",
                      "violations": [f"out: cannot create {cfg.out!r} ({e})"]}, 2)
    if not os.access(outdir, os.W_OK):
        return _fail({"error": "invalid-config",
                      "violations": [f"out: directory {cfg.out!r} is not writable"]}, 2)

    tic = time.perf_counter()
    try:
        _DRIVERS[cfg.experiment](cfg, outdir)
    except NumericError as e:
        return _fail({"error": "numeric-failure", "module": e.module,
                      "op": e.op, "detail": e.detail}, 3)
    montecarlo.write_manifest(
        outdir / "manifest.json", experiment=cfg.experiment,
        config=config_to_dict(cfg), seeds=[cfg.seed],
        wall_clock_s=time.perf_counter() - tic)
    return 0


if __name__ == "__main__":
    sys.exit(main())
