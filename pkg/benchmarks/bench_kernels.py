"""Benchmark the compiled training kernel against the NumPy fallback.

Times the gradient kernel (the per-epoch hot path), the forward-only kernel
(the line-search hot path), and a short end-to-end Adam run on both
backends. Run from the repo root:

    python3 benchmarks/bench_kernels.py
"""
import time

import numpy as np

from pdnn_ssk import montecarlo, training
from pdnn_ssk._kernels import _fallback

try:
    from pdnn_ssk._kernels import _core
except ImportError:
    _core = None

CASES = [
    # (modulation_order, n_ports, layers_tx, layers_rx)
    (4, 16, 2, 2),
    (16, 32, 2, 2),
    (16, 64, 3, 3),
    (64, 64, 2, 2),
]


def _time(fn, min_seconds=0.4):
    fn()  # warm up
    reps = 0
    tic = time.perf_counter()
    while True:
        fn()
        reps += 1
        dt = time.perf_counter() - tic
        if dt >= min_seconds and reps >= 5:
            return dt / reps


def bench_kernels():
    print(f"{'case':<22}{'kernel':<14}{'fallback':>12}{'compiled':>12}{'speedup':>9}")
    for m, n, lt, lr in CASES:
        state = montecarlo.make_system(m, n, lt, lr, channel_seed=1, root_seed=1)
        args = (state.tx.weights, state.tx.phases, state.rx.weights,
                state.rx.phases, state.channel.h, m, state.noise.sigma_n2)
        case = f"M={m} N={n} L={lt}/{lr}"
        for name, attr in (("loss+grads", "chain_loss_grads"),
                           ("loss only", "chain_loss")):
            t_py = _time(lambda: getattr(_fallback, attr)(*args))
            if _core is None:
                print(f"{case:<22}{name:<14}{t_py * 1e6:>10.1f}us{'n/a':>12}")
                continue
            t_c = _time(lambda: getattr(_core, attr)(*args))
            print(f"{case:<22}{name:<14}{t_py * 1e6:>10.1f}us"
                  f"{t_c * 1e6:>10.1f}us{t_py / t_c:>8.2f}x")


def bench_training(epochs=300):
    import pdnn_ssk._kernels as kernels
    print(f"\nadam, M=4 N=16 L=2/2, {epochs} epochs:")
    for label, impl in (("fallback", _fallback), ("compiled", _core)):
        if impl is None:
            continue
        kernels.chain_loss_grads = impl.chain_loss_grads
        kernels.chain_loss = impl.chain_loss
        state = montecarlo.make_system(4, 16, 2, 2, channel_seed=2, root_seed=2)
        tic = time.perf_counter()
        record = training.train_adam(state, training.TrainConfig(epochs=epochs))
        dt = time.perf_counter() - tic
        print(f"  {label:<10}{dt * 1e3:8.1f} ms"
              f"  ({dt / epochs * 1e6:6.1f} us/epoch)"
              f"  final sum-rate {record.final_sum_rate:.6f}")
    # Final sum-rates may differ across backends: the two agree to ~1e-15
    # per step (asserted in the test suite) but an optimization trajectory
    # amplifies last-ulp rounding, so long runs can land in different local
    # optima. Each backend is bit-for-bit reproducible with itself.


if __name__ == "__main__":
    if _core is None:
        print("compiled kernel not available; benchmarking fallback only\n")
    bench_kernels()
    bench_training()
