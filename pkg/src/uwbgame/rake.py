"""Rake combining weights and the per-realization link gains.

For user ``k`` with taps ``alpha_k`` and weights ``beta_k`` the gains are

* ``h_sp[k]  = beta_k . alpha_k``
* ``h_si[k]  = sum_m phi_m^2 c_m^2 / (N h_sp[k])`` where ``c_m`` is the
  two-sided lag-``m`` correlation of ``beta_k`` with ``alpha_k`` and
  ``phi_m^2 = min(m, N_c) / N_c``,
* ``h_mai[k, j] = E(beta_k, alpha_j) / (N h_sp[k])`` with ``E`` the energy
  of the full cross-correlation sequence over lags ``-(L-1) .. L-1``.

The shifted-matrix formulation is only materialized by
:func:`dense_gains`, which tests use as an independent oracle.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channel import ChannelRealization
from .errors import ConfigurationError, RealizationError
from .params import GameParams


class RakeKind(str, enum.Enum):
    ARAKE = "arake"
    PRAKE = "prake"
    SRAKE = "srake"


@dataclass(frozen=True)
class RakeConfig:
    """Receiver type; ``fingers`` is ignored for the all-Rake."""

    kind: RakeKind = RakeKind.ARAKE
    fingers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RakeKind(self.kind))
        if self.kind is not RakeKind.ARAKE:
            if self.fingers is None or int(self.fingers) != self.fingers or self.fingers < 1:
                raise ConfigurationError(f"{self.kind.value} needs a positive finger count")

    def check(self, L: int) -> None:
        if self.kind is not RakeKind.ARAKE and self.fingers > L:
            raise ConfigurationError(f"{self.fingers} fingers requested but only {L} paths")

    def selection_mask(self, alpha: np.ndarray) -> np.ndarray:
        """Boolean finger mask with the same shape as ``alpha`` (1-D or 2-D)."""
        alpha = np.asarray(alpha)
        L = alpha.shape[-1]
        self.check(L)
        if self.kind is RakeKind.ARAKE:
            return np.ones(alpha.shape, dtype=bool)
        mask = np.zeros(alpha.shape, dtype=bool)
        if self.kind is RakeKind.PRAKE:
            mask[..., : self.fingers] = True
            return mask
        # stable sort on -|alpha| keeps the lower tap index first among ties
        order = np.argsort(-np.abs(alpha), axis=-1, kind="stable")[..., : self.fingers]
        np.put_along_axis(mask, order, True, axis=-1)
        return mask


ARAKE = RakeConfig()


@dataclass(frozen=True)
class GainSet:
    """Link gains of one realization.

    ``gamma_cap`` is ``inf`` exactly when ``h_si`` is zero; ``gamma_cap_inv``
    is then exactly 0 so every ``1 - gamma / gamma_cap`` term evaluates to 1.
    The diagonal of ``h_mai`` is stored as zero.
    """

    h_sp: np.ndarray
    h_si: np.ndarray
    h_mai: np.ndarray

    def __post_init__(self):
        for name in ("h_sp", "h_si", "h_mai"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def K(self) -> int:
        return self.h_sp.shape[0]

    @property
    def gamma_cap_inv(self) -> np.ndarray:
        return self.h_si / self.h_sp

    @property
    def gamma_cap(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(self.h_si > 0, self.h_sp / np.where(self.h_si > 0, self.h_si, 1.0), np.inf)

    @property
    def z_inv(self) -> np.ndarray:
        """Normalized MAI ``sum_{j != k} h_mai[k, j] / h_sp[j]``."""
        return self.h_mai @ (1.0 / self.h_sp)


def build_weights(real: ChannelRealization, cfg: RakeConfig, k: int) -> np.ndarray:
    """Combining weights of user ``k`` (taps outside the selected fingers are 0)."""
    if not 0 <= k < real.K:
        raise IndexError(f"user index {k} out of range for K={real.K}")
    alpha = real.alpha[k]
    return np.where(cfg.selection_mask(alpha), alpha, 0.0)


def all_weights(real: ChannelRealization, cfg: RakeConfig) -> np.ndarray:
    return np.where(cfg.selection_mask(real.alpha), real.alpha, 0.0)


def compute_gains(real: ChannelRealization, cfg: RakeConfig, params: GameParams) -> GainSet:
    """Gains for every user of a realization.

    Raises
    ------
    RealizationError
        If some user's weights are not positively correlated with its taps.
    """
    if real.L != params.L or real.K != params.K:
        raise ConfigurationError(
            f"realization is {real.K}x{real.L} but params expect {params.K}x{params.L}")
    alpha = np.ascontiguousarray(real.alpha, dtype=np.float64)
    beta = np.ascontiguousarray(all_weights(real, cfg), dtype=np.float64)
    h_sp = np.einsum("kl,kl->k", beta, alpha)
    if np.any(h_sp <= 0):
        bad = np.flatnonzero(h_sp <= 0).tolist()
        raise RealizationError(f"non-positive signal gain for users {bad}")
    h_sp, h_si, h_mai = _kernels.correlation_gains(alpha, beta, params.N, params.N_c)
    return GainSet(h_sp=h_sp, h_si=h_si, h_mai=h_mai)


def shift_matrix(x: np.ndarray) -> np.ndarray:
    """The ``L x (L-1)`` upper-banded matrix built from a tap vector.

    Row 1 is ``[x_L, ..., x_2]``, each following row is shifted right by one
    with zeros on the left, and the last row is all zeros.
    """
    x = np.asarray(x, dtype=float)
    L = x.shape[0]
    out = np.zeros((L, max(L - 1, 0)))
    for r in range(L):
        for c in range(r, L - 1):
            out[r, c] = x[L - 1 - (c - r)]
    return out


def dense_gains(alpha: np.ndarray, beta: np.ndarray, N: int, N_c: int) -> GainSet:
    """Gains from explicit matrix products; slow, kept as a cross-check."""
    alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    K, L = alpha.shape
    phi = np.diag(np.sqrt(np.minimum(L - np.arange(1, L), N_c) / N_c))
    A = [shift_matrix(a) for a in alpha]
    B = [shift_matrix(b) for b in beta]
    h_sp = np.array([beta[k] @ alpha[k] for k in range(K)])
    h_si = np.empty(K)
    h_mai = np.zeros((K, K))
    for k in range(K):
        v = phi @ (B[k].T @ alpha[k] + A[k].T @ beta[k])
        h_si[k] = (v @ v) / (N * h_sp[k])
        for j in range(K):
            if j == k:
                continue
            u = B[k].T @ alpha[j]
            w = A[j].T @ beta[k]
            h_mai[k, j] = (u @ u + w @ w + (beta[k] @ alpha[j]) ** 2) / (N * h_sp[k])
    return GainSet(h_sp=h_sp, h_si=h_si, h_mai=h_mai)
