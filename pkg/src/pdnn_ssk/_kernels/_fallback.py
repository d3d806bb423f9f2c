"""Pure-NumPy backend for the training-step kernels.

Reference semantics for the compiled core; every array the compiled path
produces is compared against this module in the test suite.
"""
import numpy as np


def _forward_tx(ws, phases):
    """Propagate the transmit chain, keeping per-layer pre-activation products.

    Returns (f_t, pre) where pre[l] is W_l @ R_{l-1}, the product of
    everything below layer l's phase screen, and f_t is the full transfer
    matrix. Phase screens act on layer outputs (rows).
    """
    pre = []
    cur = None
    for w, beta in zip(ws, phases):
        p = w.copy() if cur is None else w @ cur
        pre.append(p)
        cur = np.exp(1j * beta)[:, None] * p
    return cur, pre


def _forward_rx(ws, phases):
    """Propagate the receive chain, keeping partial products below each layer.

    Returns (f_r, below) where below[l] is the product of layers 1..l
    (identity for l=0, stored as None). Phase screens act on layer inputs
    (columns of W_l).
    """
    below = [None]
    cur = None
    for w, beta in zip(ws, phases):
        phi = np.exp(1j * beta)
        cur = w * phi[None, :] if cur is None else w @ (phi[:, None] * cur)
        below.append(cur)
    return cur, below[:-1]


def _loss_terms(c, sigma_n2):
    """Per-symbol SINR pieces from the effective channel matrix.

    Returns (loss, totals, dens): totals[m] is the full received power of
    symbol m plus noise, dens[m] excludes the matched tap.
    """
    p = np.abs(c) ** 2
    totals = p.sum(axis=0) + sigma_n2
    dens = totals - np.diagonal(p)
    loss = -float(np.sum(np.log(totals) - np.log(dens)))
    return loss, totals, dens


def chain_loss(ws_t, phases_t, ws_r, phases_r, h, m_order, sigma_n2):
    """Forward pass only: surrogate loss and effective channel matrix."""
    f_t, _ = _forward_tx(ws_t, phases_t)
    f_r, _ = _forward_rx(ws_r, phases_r)
    c = f_r @ (h @ f_t[:, :m_order])
    loss, _, _ = _loss_terms(c, sigma_n2)
    return loss, c


def chain_loss_grads(ws_t, phases_t, ws_r, phases_r, h, m_order, sigma_n2):
    """Loss, effective channel, and analytic phase gradients for both chains.

    The gradient of the summed log-SINR loss with respect to phase beta is
    -2 Im{e^{j beta} k}, where k collects the sensitivity of the loss to the
    matrix entry the phase multiplies. The sensitivity matrix in
    effective-channel space has entries g[i, m] * c[i, m] with g = -1/totals
    on the diagonal and 1/dens - 1/totals off it; it is chained outward to
    each layer through prefix/suffix products of the remaining layers.
    """
    f_t, pre_t = _forward_tx(ws_t, phases_t)
    f_r, below_r = _forward_rx(ws_r, phases_r)
    t_sel = h @ f_t[:, :m_order]
    c = f_r @ t_sel
    loss, totals, dens = _loss_terms(c, sigma_n2)

    g = np.empty_like(c, dtype=np.float64)
    g[:] = 1.0 / dens[None, :] - 1.0 / totals[None, :]
    np.fill_diagonal(g, -1.0 / totals)
    a = g * c

    grads_t = [None] * len(ws_t)
    n_t0 = ws_t[0].shape[1]
    z = np.zeros((n_t0, f_t.shape[0]), dtype=np.complex128)
    z[:m_order, :] = a.conj().T @ (f_r @ h)
    u = z
    for l in range(len(ws_t) - 1, -1, -1):
        phi = np.exp(1j * phases_t[l])
        k_diag = np.einsum("ij,ji->i", pre_t[l], u)
        grads_t[l] = -2.0 * np.imag(phi * k_diag)
        if l > 0:
            u = (u * phi[None, :]) @ ws_t[l]

    grads_r = [None] * len(ws_r)
    v = t_sel @ a.conj().T
    for l in range(len(ws_r) - 1, -1, -1):
        phi = np.exp(1j * phases_r[l])
        d = v @ ws_r[l]
        if l == 0:
            k_diag = np.diagonal(d).copy()
        else:
            k_diag = np.einsum("ij,ji->i", below_r[l], d)
        grads_r[l] = -2.0 * np.imag(phi * k_diag)
        if l > 0:
            v = d * phi[None, :]

    return loss, c, grads_t, grads_r
