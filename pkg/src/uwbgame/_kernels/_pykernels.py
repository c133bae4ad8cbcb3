"""NumPy implementations of the hot kernels.

These are the reference fallback used when the compiled extension is not
available. Signatures and results match ``_ckernels`` to rounding.
"""
import numpy as np


def correlation_gains(alpha, beta, N, N_c):
    """Signal, self-interference and MAI gains from tap and weight vectors.

    Uses FFT-domain correlation: the MAI numerator is the energy of the full
    cross-correlation of ``beta_k`` with ``alpha_j``, which by Parseval is a
    single matrix product of the two power spectra.
    """
    alpha = np.ascontiguousarray(alpha, dtype=np.float64)
    beta = np.ascontiguousarray(beta, dtype=np.float64)
    K, L = alpha.shape
    h_sp = np.einsum("kl,kl->k", beta, alpha)
    nfft = 1 << (2 * L - 2).bit_length() if L > 1 else 1
    A = np.fft.rfft(alpha, nfft, axis=1)
    B = np.fft.rfft(beta, nfft, axis=1)

    # rfft keeps one half of the spectrum; interior bins count twice
    w = np.full(A.shape[1], 2.0)
    w[0] = 1.0
    if nfft % 2 == 0:
        w[-1] = 1.0
    energy = ((np.abs(B) ** 2) * w) @ (np.abs(A) ** 2).T / nfft
    h_mai = energy / (N * h_sp[:, None])
    np.fill_diagonal(h_mai, 0.0)

    if L > 1:
        cross = np.fft.irfft(np.conj(B) * A, nfft, axis=1)[:, 1:L]
        cross += np.fft.irfft(np.conj(A) * B, nfft, axis=1)[:, 1:L]
        lag = np.arange(1, L)
        phi2 = np.minimum(lag, N_c) / N_c
        h_si = (cross ** 2) @ phi2 / (N * h_sp)
    else:
        h_si = np.zeros(K)
    return h_sp, h_si, h_mai


def _sinrs(h_sp, h_si, h_mai, noise, p):
    return h_sp * p / (h_si * p + h_mai @ p + noise)


def brpc_iterate(h_sp, h_si, h_mai, target, noise, p_max, p, max_sweeps, tol, p_floor,
                 form, trace_p=None, trace_s=None):
    """Gauss-Seidel best-response sweeps, updating ``p`` in place.

    ``form`` 0 applies the multiplicative SINR-feedback update, 1 rebuilds
    the interference-plus-noise from the fed-back SINR and applies the
    closed-form best response. Returns ``(sweeps, converged)``.
    """
    K = h_sp.shape[0]
    g_inv = h_si / h_sp
    keep = 1.0 - target * g_inv
    if trace_p is not None:
        trace_p[0] = p
        trace_s[0] = _sinrs(h_sp, h_si, h_mai, noise, p)
    rows = [h_mai[k] for k in range(K)]
    for sweep in range(1, max_sweeps + 1):
        change = 0.0
        for k in range(K):
            pk = p[k]
            interference = float(rows[k] @ p) + noise
            sinr = h_sp[k] * pk / (h_si[k] * pk + interference)
            if form == 0:
                new = pk * (target[k] / sinr) * (1.0 - sinr * g_inv[k]) / keep[k]
            else:
                rebuilt = h_sp[k] * pk * (1.0 - sinr * g_inv[k]) / sinr
                new = target[k] * rebuilt / (h_sp[k] * keep[k])
            if new > p_max:
                new = p_max
            rel = abs(new - pk) / max(new, p_floor)
            if rel > change:
                change = rel
            p[k] = new
        if trace_p is not None:
            trace_p[sweep] = p
            trace_s[sweep] = _sinrs(h_sp, h_si, h_mai, noise, p)
        if change < tol:
            return sweep, True
    return max_sweeps, False
