"""Distributed best-response power control (Gauss-Seidel sweeps).

Each user in turn measures its received SINR and rescales its power so
that, given the current interference, it lands on its target SINR. The
update only needs the fed-back SINR and the user's own ``h_sp`` and
``Gamma``; interference-plus-noise is recovered from those.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .channel import make_rng
from .errors import ConfigurationError, DomainError
from .game import EfficiencyModel, EquilibriumOutcome, gains_target_sinrs, make_outcome
from .params import GameParams
from .rake import GainSet

P_FLOOR = 1e-30
EPS_SCALE = 1e-3


class InitKind(str, enum.Enum):
    ZERO_PLUS_EPS = "zero_plus_eps"
    UNIFORM_RANDOM = "uniform_random"
    GIVEN = "given"


class UpdateForm(str, enum.Enum):
    DISTRIBUTED = "distributed"  # multiplicative SINR-feedback update
    DIRECT = "direct"            # closed-form best response on rebuilt interference


@dataclass(frozen=True)
class BrpcConfig:
    max_sweeps: int = 10_000
    tol_power_rel: float = 1e-9
    init: InitKind = InitKind.ZERO_PLUS_EPS
    init_seed: Optional[int] = None
    init_powers: Optional[tuple] = None
    update_form: UpdateForm = UpdateForm.DISTRIBUTED
    record_trace: bool = False

    def __post_init__(self):
        object.__setattr__(self, "init", InitKind(self.init))
        object.__setattr__(self, "update_form", UpdateForm(self.update_form))
        if int(self.max_sweeps) != self.max_sweeps or self.max_sweeps < 1:
            raise ConfigurationError("max_sweeps must be a positive integer")
        if not self.tol_power_rel > 0:
            raise ConfigurationError("tol_power_rel must be positive")
        if self.init is InitKind.UNIFORM_RANDOM and self.init_seed is None:
            raise ConfigurationError("uniform_random initialization needs init_seed")
        if self.init is InitKind.GIVEN:
            if self.init_powers is None:
                raise ConfigurationError("given initialization needs init_powers")
            object.__setattr__(self, "init_powers", tuple(float(p) for p in self.init_powers))


@dataclass(frozen=True)
class IterationTrace:
    """Powers and SINRs after every sweep; row 0 is the starting point."""

    powers: np.ndarray
    sinrs: np.ndarray

    @property
    def sweeps(self) -> int:
        return self.powers.shape[0] - 1


def initial_powers(gains: GainSet, params: GameParams, cfg: BrpcConfig) -> np.ndarray:
    eps = EPS_SCALE * params.noise_var / float(np.max(gains.h_sp))
    if cfg.init is InitKind.ZERO_PLUS_EPS:
        return np.full(gains.K, eps)
    if cfg.init is InitKind.UNIFORM_RANDOM:
        p = make_rng(cfg.init_seed).uniform(0.0, params.p_max, size=gains.K)
    else:
        p = np.array(cfg.init_powers, dtype=float)
        if p.shape != (gains.K,):
            raise ConfigurationError(f"init_powers must have {gains.K} entries")
        if np.any(p < 0) or np.any(p > params.p_max):
            raise ConfigurationError("init_powers must lie in [0, p_max]")
    # a zero power makes the multiplicative update 0 * (target / 0)
    return np.where(p > 0, p, eps)


def run(gains: GainSet, params: GameParams, f: EfficiencyModel,
        cfg: BrpcConfig = BrpcConfig(), targets: Optional[np.ndarray] = None
        ) -> tuple[EquilibriumOutcome, Optional[IterationTrace]]:
    """Iterate best responses until the powers stop moving.

    Returns
    -------
    outcome : EquilibriumOutcome
    trace : IterationTrace or None
        Only when ``cfg.record_trace`` is set.
    """
    if gains.K != params.K:
        raise ConfigurationError(f"gains for {gains.K} users but params.K = {params.K}")
    if targets is None:
        targets = gains_target_sinrs(f, gains)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    p = np.ascontiguousarray(initial_powers(gains, params, cfg), dtype=np.float64)
    trace_p = trace_s = None
    if cfg.record_trace:
        trace_p = np.empty((cfg.max_sweeps + 1, gains.K))
        trace_s = np.empty((cfg.max_sweeps + 1, gains.K))
    form = 0 if cfg.update_form is UpdateForm.DISTRIBUTED else 1
    sweeps, converged = _kernels.brpc_iterate(
        np.ascontiguousarray(gains.h_sp), np.ascontiguousarray(gains.h_si),
        np.ascontiguousarray(gains.h_mai), targets, float(params.noise_var),
        float(params.p_max), p, int(cfg.max_sweeps), float(cfg.tol_power_rel), P_FLOOR, form,
        trace_p, trace_s)
    trace = None
    if cfg.record_trace:
        trace = IterationTrace(powers=trace_p[: sweeps + 1].copy(), sinrs=trace_s[: sweeps + 1].copy())
    return make_outcome(gains, params, f, p, targets, sweeps, converged), trace


def reconstruct_interference(gains: GainSet, power_k: float, sinr_k: float, k: int) -> float:
    """Interference-plus-noise seen by user ``k``, from its power and SINR alone."""
    if not power_k > 0 or not sinr_k > 0:
        raise DomainError("power and SINR must both be positive")
    return float(gains.h_sp[k] * power_k * (1.0 - sinr_k * gains.gamma_cap_inv[k]) / sinr_k)


def distributed_update(power_k: float, sinr_k: float, target_k: float, gamma_cap_inv_k: float,
                       p_max: float) -> float:
    """One user's SINR-feedback power update, clipped to ``p_max``."""
    new = power_k * (target_k / sinr_k) * (1.0 - sinr_k * gamma_cap_inv_k) / (1.0 - target_k * gamma_cap_inv_k)
    return min(p_max, new)
