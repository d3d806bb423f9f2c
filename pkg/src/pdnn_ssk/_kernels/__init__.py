"""Training-step kernels with a compiled core and a NumPy fallback.

The per-epoch work of the optimizer (propagate the matrix chain, evaluate
the surrogate loss, backpropagate to every phase) is the hot path of the
structural sweeps, so it exists twice: `_core` is a Cython extension doing
the chain with direct BLAS calls and fused scalings, `_fallback` is plain
NumPy with identical semantics. Import-time selection prefers the compiled
core; set PDNN_SSK_BACKEND=python or =compiled to force one (forcing
`compiled` raises if the extension is missing rather than degrading
silently).

Both backends expose:

    chain_loss_grads(ws_t, phases_t, ws_r, phases_r, h, m_order, sigma_n2)
        -> (loss, c, grads_t, grads_r)
    chain_loss(...) -> (loss, c)

with ws_* lists of C-contiguous complex128 layer matrices (n_out, n_in),
phases_* lists of float64 vectors (output-side sizes for the TX chain,
input-side for the RX chain), h the channel matrix, and sigma_n2 the total
complex noise power.
"""
import os

_requested = os.environ.get("PDNN_SSK_BACKEND", "auto").lower()
if _requested not in ("auto", "compiled", "python"):
    raise ValueError(f"PDNN_SSK_BACKEND must be auto|compiled|python, got {_requested!r}")

if _requested == "python":
    from . import _fallback as _impl
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _fallback as _impl
        BACKEND = "python"

chain_loss_grads = _impl.chain_loss_grads
chain_loss = _impl.chain_loss
