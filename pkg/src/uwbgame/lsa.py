"""Large-system limits of the normalized interference terms.

When ``L`` and ``N_c`` grow with ``rho = N_c / L`` fixed, the random
quantities ``Z_k^-1`` and ``Gamma_k^-1`` concentrate around deterministic
values that depend only on the tap variance profiles. This module
evaluates those limits at finite ``L`` (replacing ``lim (1/L) Tr`` with
``(1/L) Tr``) and the equilibrium powers and utilities they imply.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import ChannelModel, ChannelRealization
from .errors import DegenerateProfileError, DomainError, UnsupportedConfigurationError
from .game import EfficiencyModel, solve_target_sinr
from .params import MIN_RELIABLE_FRAMES, GameParams
from .rake import RakeConfig, RakeKind, shift_matrix


def nu(rho: float) -> float:
    """Asymptotic self-interference coefficient of an all-Rake on a flat profile."""
    if not rho > 0:
        raise DomainError(f"load factor must be positive, got {rho!r}")
    if rho <= 1.0:
        return 2.0 / 3.0 * (3.0 - 3.0 * rho + rho * rho)
    return 2.0 / (3.0 * rho)


def _rake_mask(rake: RakeConfig, L: int) -> np.ndarray:
    if rake.kind is RakeKind.SRAKE:
        # finger choice depends on the draw, so the weights are not a fixed
        # diagonal selection of the taps
        raise UnsupportedConfigurationError("large-system limits need a channel-independent finger set")
    rake.check(L)
    mask = np.ones(L, dtype=bool)
    if rake.kind is RakeKind.PRAKE:
        mask[rake.fingers:] = False
    return mask


@dataclass(frozen=True)
class VarianceProfiles:
    """Tap standard deviations of the channels and of the Rake weights.

    Both arrays have shape ``(K, L)``.
    """

    d_path: np.ndarray
    d_rake: np.ndarray

    def __post_init__(self):
        for name in ("d_path", "d_rake"):
            arr = np.atleast_2d(np.array(getattr(self, name), dtype=float, copy=True))
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} entries must be finite and non-negative")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.d_path.shape != self.d_rake.shape:
            raise DomainError(f"profile shapes differ: {self.d_path.shape} vs {self.d_rake.shape}")

    @property
    def K(self) -> int:
        return self.d_path.shape[0]

    @property
    def L(self) -> int:
        return self.d_path.shape[1]

    @classmethod
    def from_realization(cls, real: ChannelRealization, rake: RakeConfig) -> "VarianceProfiles":
        mask = _rake_mask(rake, real.L)
        d = np.asarray(real.variance_profile, dtype=float)
        return cls(d_path=d, d_rake=d * mask)

    @classmethod
    def from_model(cls, model: ChannelModel, params: GameParams, rake: RakeConfig,
                   large_scale=None) -> "VarianceProfiles":
        """Profiles from the channel model alone.

        ``large_scale`` gives per-user variance factors; the limits do not
        depend on them, so unit factors are used by default.
        """
        mask = _rake_mask(rake, params.L)
        scale = np.ones(params.K) if large_scale is None else np.asarray(large_scale, dtype=float)
        d = np.sqrt(scale[:, None] * model.pdp_shape(params.L)[None, :])
        return cls(d_path=d, d_rake=d * mask)

    def shift_profiles(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``L x (L-1)`` standard-deviation profiles of the shifted path and weight matrices.

        Entries are ``sqrt(Var / L)``. Only used to cross-check the banded
        evaluation.
        """
        scale = 1.0 / math.sqrt(self.L)
        return shift_matrix(self.d_path[k]) * scale, shift_matrix(self.d_rake[k]) * scale


def _psi_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(1/L) Tr(diag(a) diag(b))`` row by row."""
    return np.einsum("kl,kl->k", a, b) / a.shape[1]


def _check_denominator(psi: np.ndarray) -> None:
    if np.any(psi <= 0):
        bad = np.flatnonzero(psi <= 0).tolist()
        raise DegenerateProfileError(f"channel and Rake profiles do not overlap for users {bad}")


def _tail(x: np.ndarray) -> np.ndarray:
    """``out[..., r] = sum_{s > r} x[..., s]``."""
    return np.cumsum(x[..., ::-1], axis=-1)[..., ::-1] - x


def limit_z_inv(profiles: VarianceProfiles, params: GameParams) -> np.ndarray:
    """Deterministic equivalent of ``Z_k^-1`` for every user."""
    D, Dt = profiles.d_path, profiles.d_rake
    L = profiles.L
    psi = _psi_diag(D, Dt)
    _check_denominator(psi)
    D2, Dt2 = D * D, Dt * Dt
    # [k, j]: weight-k energy against shifted path-j energy, and the mirror term
    cross = (_tail(Dt2) @ D2.T + Dt2 @ _tail(D2).T) / (L * L)
    ratio = cross / (psi[None, :] * psi[:, None])
    np.fill_diagonal(ratio, 0.0)
    return ratio.sum(axis=1) / params.N


def limit_gamma_inv(profiles: VarianceProfiles, params: GameParams) -> np.ndarray:
    """Deterministic equivalent of ``Gamma_k^-1`` for every user."""
    D, Dt = profiles.d_path, profiles.d_rake
    K, L = D.shape
    psi = _psi_diag(D, Dt)
    _check_denominator(psi)
    if L == 1:
        return np.zeros(K)
    lag = np.arange(1, L)
    phi2 = np.minimum(lag, params.N_c) / params.N_c
    out = np.empty(K)
    for k in range(K):
        d, dt = D[k], Dt[k]
        # sum_l (d_l dt_{l+m} + dt_l d_{l+m})^2 expanded into three correlations
        s = (np.correlate(dt * dt, d * d, "full") + np.correlate(d * d, dt * dt, "full")
             + 2.0 * np.correlate(d * dt, d * dt, "full"))[L:]
        out[k] = (phi2 @ s) / (L * L) / psi[k] ** 2
    return out / params.N


def flat_limits(params: GameParams) -> tuple[float, float]:
    """``(Z^-1, Gamma^-1)`` limits for an all-Rake on a flat profile."""
    return (params.K - 1) / params.N, nu(params.rho) / params.N


def min_frames(params: GameParams, f: EfficiencyModel) -> tuple[int, float]:
    """Smallest feasible ``N_f`` and the unrounded threshold it comes from."""
    g = solve_target_sinr(f)
    interior = g * (params.K - 1 + nu(params.rho)) / params.N_c
    return max(MIN_RELIABLE_FRAMES, math.ceil(interior)), interior


@dataclass(frozen=True)
class LsaPrediction:
    """Large-system equilibrium forecast.

    ``predicted_powers`` and ``predicted_utilities`` are None when the
    load leaves no room for the noise term (``feasible`` is False).
    """

    z_inv_limit: np.ndarray
    gamma_inv_limit: np.ndarray
    nu: float
    rho: float
    gamma_star: float
    predicted_powers: Optional[np.ndarray]
    predicted_utilities: Optional[np.ndarray]
    min_nf: int
    min_nf_interior: float
    feasible: bool


def predict_equilibrium(params: GameParams, f: EfficiencyModel, h_sp,
                        profiles: Optional[VarianceProfiles] = None) -> LsaPrediction:
    """Equilibrium powers and utilities implied by the large-system limits.

    Parameters
    ----------
    params : GameParams
    f : EfficiencyModel
    h_sp : array_like
        Per-user signal gains (``||alpha_k||^2`` for an all-Rake).
    profiles : VarianceProfiles, optional
        When given, the general limits replace the flat all-Rake values
        ``(K-1)/N`` and ``nu(rho)/N``.
    """
    h_sp = np.asarray(h_sp, dtype=float)
    if h_sp.shape != (params.K,):
        raise DomainError(f"h_sp must have {params.K} entries")
    if np.any(h_sp <= 0):
        raise DomainError("h_sp entries must be positive")
    g = solve_target_sinr(f)
    if profiles is None:
        z, gi = flat_limits(params)
        z_inv = np.full(params.K, z)
        gamma_inv = np.full(params.K, gi)
    else:
        z_inv = limit_z_inv(profiles, params)
        gamma_inv = limit_gamma_inv(profiles, params)
    slack = 1.0 - g * (z_inv + gamma_inv)
    feasible = bool(np.all(slack > 0))
    powers = utilities = None
    if feasible:
        powers = params.noise_var * g / (h_sp * slack)
        utilities = h_sp * (params.D / params.M) * params.R * float(f.value(g)) * slack / (params.noise_var * g)
    nf, interior = min_frames(params, f)
    return LsaPrediction(z_inv_limit=z_inv, gamma_inv_limit=gamma_inv, nu=nu(params.rho),
                         rho=params.rho, gamma_star=g, predicted_powers=powers,
                         predicted_utilities=utilities, min_nf=nf, min_nf_interior=interior,
                         feasible=feasible)
