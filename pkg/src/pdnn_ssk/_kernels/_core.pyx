# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled backend for the training-step kernels.

Same contract as `_fallback`; matrix products go straight to BLAS zgemm and
the per-entry work (phase scalings, diagonal contractions, loss terms) runs
as C loops. Row-major arrays are fed to the column-major zgemm by swapping
the operand order, which computes (B^T A^T)^T = A B without any copies.
"""
import numpy as np

from scipy.linalg.cython_blas cimport zgemm
from libc.math cimport cos, log, sin

cdef char _TRANS_N = b"N"[0]
cdef double complex _ONE = 1.0
cdef double complex _ZERO = 0.0


cdef void _mm(double complex[:, ::1] a, double complex[:, ::1] b,
              double complex[:, ::1] out) noexcept nogil:
    """out = a @ b for C-contiguous operands."""
    cdef int m = <int> a.shape[0]
    cdef int k = <int> a.shape[1]
    cdef int n = <int> b.shape[1]
    zgemm(&_TRANS_N, &_TRANS_N, &n, &m, &k, &_ONE,
          &b[0, 0], &n, &a[0, 0], &k, &_ZERO, &out[0, 0], &n)


cdef void _rowscale(double[::1] beta, double complex[:, ::1] src,
                    double complex[:, ::1] out) noexcept nogil:
    """out[i, :] = e^{j beta_i} src[i, :]  (src and out may alias)."""
    cdef Py_ssize_t i, j
    cdef double complex phi
    for i in range(src.shape[0]):
        phi = cos(beta[i]) + 1j * sin(beta[i])
        for j in range(src.shape[1]):
            out[i, j] = phi * src[i, j]


cdef void _colscale(double[::1] beta, double complex[:, ::1] src,
                    double complex[:, ::1] out) noexcept nogil:
    """out[:, j] = src[:, j] e^{j beta_j}  (src and out may alias)."""
    cdef Py_ssize_t i, j
    cdef double complex phi
    for j in range(src.shape[1]):
        phi = cos(beta[j]) + 1j * sin(beta[j])
        for i in range(src.shape[0]):
            out[i, j] = src[i, j] * phi
    # column-major access order; these matrices are small enough not to care


cdef double _loss_and_adjoint(double complex[:, ::1] c, double sigma_n2,
                              double complex[:, ::1] a) noexcept nogil:
    """Surrogate loss from the effective channel, filling its adjoint.

    a[i, m] = g[i, m] c[i, m] with g = -1/totals on the diagonal and
    1/dens - 1/totals elsewhere; totals is the noise-augmented column power
    and dens excludes the matched tap.
    """
    cdef Py_ssize_t m = c.shape[0]
    cdef Py_ssize_t i, j
    cdef double tot, den, pij, off
    cdef double loss = 0.0
    for j in range(m):
        tot = sigma_n2
        for i in range(m):
            pij = c[i, j].real * c[i, j].real + c[i, j].imag * c[i, j].imag
            tot = tot + pij
        pij = c[j, j].real * c[j, j].real + c[j, j].imag * c[j, j].imag
        den = tot - pij
        loss = loss - (log(tot) - log(den))
        off = 1.0 / den - 1.0 / tot
        for i in range(m):
            if i == j:
                a[i, j] = -c[i, j] / tot
            else:
                a[i, j] = c[i, j] * off
    return loss


cdef void _contract_grad(double[::1] beta, double complex[:, ::1] p,
                         double complex[:, ::1] u, double[::1] grad) noexcept nogil:
    """grad[i] = -2 Im{e^{j beta_i} sum_j p[i, j] u[j, i]}."""
    cdef Py_ssize_t i, j
    cdef double complex s
    for i in range(p.shape[0]):
        s = 0.0
        for j in range(p.shape[1]):
            s = s + p[i, j] * u[j, i]
        grad[i] = -2.0 * (cos(beta[i]) * s.imag + sin(beta[i]) * s.real)


cdef void _diag_grad(double[::1] beta, double complex[:, ::1] d,
                     double[::1] grad) noexcept nogil:
    """grad[i] = -2 Im{e^{j beta_i} d[i, i]}."""
    cdef Py_ssize_t i
    for i in range(d.shape[0]):
        grad[i] = -2.0 * (cos(beta[i]) * d[i, i].imag + sin(beta[i]) * d[i, i].real)


def _as_cmat(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.complex128))


def _as_fvec(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64))


def _forward_tx(list ws, list phases, bint keep):
    pre = [] if keep else None
    cur = None
    cdef Py_ssize_t l
    for l in range(len(ws)):
        w = ws[l]
        if cur is None:
            p = w.copy()
        else:
            p = np.empty((w.shape[0], cur.shape[1]), dtype=np.complex128)
            _mm(w, cur, p)
        if keep:
            pre.append(p)
            nxt = np.empty_like(p)
            _rowscale(phases[l], p, nxt)
            cur = nxt
        else:
            _rowscale(phases[l], p, p)
            cur = p
    return cur, pre


def _forward_rx(list ws, list phases, bint keep):
    below = [None] if keep else None
    cur = None
    cdef Py_ssize_t l
    for l in range(len(ws)):
        w = ws[l]
        if cur is None:
            nxt = np.empty_like(w)
            _colscale(phases[l], w, nxt)
        else:
            scaled = np.empty_like(cur)
            _rowscale(phases[l], cur, scaled)
            nxt = np.empty((w.shape[0], scaled.shape[1]), dtype=np.complex128)
            _mm(w, scaled, nxt)
        cur = nxt
        if keep and l < len(ws) - 1:
            below.append(cur)
    return cur, below


def _normalize(ws_t, phases_t, ws_r, phases_r, h):
    wt = [_as_cmat(w) for w in ws_t]
    pt = [_as_fvec(b) for b in phases_t]
    wr = [_as_cmat(w) for w in ws_r]
    pr = [_as_fvec(b) for b in phases_r]
    return wt, pt, wr, pr, _as_cmat(h)


def chain_loss(ws_t, phases_t, ws_r, phases_r, h, m_order, sigma_n2):
    """Forward pass only: surrogate loss and effective channel matrix."""
    wt, pt, wr, pr, hc = _normalize(ws_t, phases_t, ws_r, phases_r, h)
    cdef int m = m_order
    f_t, _ = _forward_tx(wt, pt, False)
    f_r, _ = _forward_rx(wr, pr, False)
    t_sel = np.empty((hc.shape[0], m), dtype=np.complex128)
    ft_cols = np.ascontiguousarray(f_t[:, :m])
    _mm(hc, ft_cols, t_sel)
    c = np.empty((m, m), dtype=np.complex128)
    _mm(f_r, t_sel, c)
    a = np.empty_like(c)
    cdef double loss = _loss_and_adjoint(c, sigma_n2, a)
    return loss, c


def chain_loss_grads(ws_t, phases_t, ws_r, phases_r, h, m_order, sigma_n2):
    """Loss, effective channel, and analytic phase gradients for both chains."""
    wt, pt, wr, pr, hc = _normalize(ws_t, phases_t, ws_r, phases_r, h)
    cdef int m = m_order
    cdef Py_ssize_t lt = len(wt)
    cdef Py_ssize_t lr = len(wr)

    f_t, pre_t = _forward_tx(wt, pt, True)
    f_r, below_r = _forward_rx(wr, pr, True)

    t_sel = np.empty((hc.shape[0], m), dtype=np.complex128)
    ft_cols = np.ascontiguousarray(f_t[:, :m])
    _mm(hc, ft_cols, t_sel)
    c = np.empty((m, m), dtype=np.complex128)
    _mm(f_r, t_sel, c)

    a = np.empty_like(c)
    cdef double loss = _loss_and_adjoint(c, sigma_n2, a)
    a_h = np.ascontiguousarray(a.conj().T)

    # transmit chain: seed with the loss sensitivity pulled back through the
    # receiver and channel, then peel one layer per step
    grads_t = [None] * lt
    frh = np.empty((f_r.shape[0], hc.shape[1]), dtype=np.complex128)
    _mm(f_r, hc, frh)
    n_t0 = wt[0].shape[1]
    u = np.zeros((n_t0, f_t.shape[0]), dtype=np.complex128)
    block = np.empty((m, hc.shape[1]), dtype=np.complex128)
    _mm(a_h, frh, block)
    u[:m, :] = block
    cdef Py_ssize_t l
    for l in range(lt - 1, -1, -1):
        g = np.empty(pt[l].shape[0], dtype=np.float64)
        _contract_grad(pt[l], pre_t[l], u, g)
        grads_t[l] = g
        if l > 0:
            _colscale(pt[l], u, u)
            nxt = np.empty((u.shape[0], wt[l].shape[1]), dtype=np.complex128)
            _mm(u, wt[l], nxt)
            u = nxt

    # receive chain: seed with the sensitivity pushed forward through the
    # transmitter and channel
    grads_r = [None] * lr
    v = np.empty((t_sel.shape[0], m), dtype=np.complex128)
    _mm(t_sel, a_h, v)
    for l in range(lr - 1, -1, -1):
        d = np.empty((v.shape[0], wr[l].shape[1]), dtype=np.complex128)
        _mm(v, wr[l], d)
        g = np.empty(pr[l].shape[0], dtype=np.float64)
        if l == 0:
            _diag_grad(pr[l], d, g)
        else:
            _contract_grad(pr[l], below_r[l], d, g)
        grads_r[l] = g
        if l > 0:
            _colscale(pr[l], d, d)
            v = d

    return loss, c, grads_t, grads_r
