"""Utility model, target-SINR solver, best responses and feasibility."""
from __future__ import annotations

import abc
import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, SolverError
from .params import GameParams
from .rake import GainSet

__all__ = [
    "EfficiencyModel", "PacketExp", "EquilibriumOutcome", "FeasibilityReport",
    "efficiency", "utility", "sinr", "solve_target_sinr", "target_sinrs",
    "gains_target_sinrs", "best_response", "best_response_map", "check_feasibility", "exact_min_powers",
    "make_outcome",
]

ROOT_EPS = 1e-12
ROOT_TOL = 1e-10


class EfficiencyModel(abc.ABC):
    """Increasing S-shaped map from SINR to packet success probability.

    Subclasses must satisfy ``f(0) = 0``, ``f(inf) = 1`` and ``f'(0) = 0``.
    """

    @abc.abstractmethod
    def value(self, gamma):
        ...

    @abc.abstractmethod
    def derivative(self, gamma):
        ...

    def target_residual(self, gamma, cap_inv):
        """A function with the sign of ``f'(g) g (1 - g/cap) - f(g)``."""
        return gamma * (1.0 - gamma * cap_inv) * self.derivative(gamma) - self.value(gamma)

    def target_residual_slope(self, gamma, cap_inv):
        h = 1e-7 * np.maximum(1.0, gamma)
        return (self.target_residual(gamma + h, cap_inv)
                - self.target_residual(gamma - h, cap_inv)) / (2 * h)


@dataclass(frozen=True)
class PacketExp(EfficiencyModel):
    """``f(g) = (1 - exp(-g/2)) ** M`` for ``M``-bit packets."""

    M: int = 100

    def __post_init__(self):
        if self.M < 1:
            raise DomainError(f"M must be positive, got {self.M}")

    def value(self, gamma):
        return (-np.expm1(-np.asarray(gamma, dtype=float) / 2.0)) ** self.M

    def derivative(self, gamma):
        g = np.asarray(gamma, dtype=float)
        return 0.5 * self.M * np.exp(-g / 2.0) * (-np.expm1(-g / 2.0)) ** (self.M - 1)

    # Dividing the stationarity condition by f(g) / expm1(g/2) > 0 leaves a
    # smooth residual with no underflow near 0 and no overflow for large M.
    def target_residual(self, gamma, cap_inv):
        return 0.5 * self.M * gamma * (1.0 - gamma * cap_inv) - np.expm1(gamma / 2.0)

    def target_residual_slope(self, gamma, cap_inv):
        return 0.5 * self.M * (1.0 - 2.0 * gamma * cap_inv) - 0.5 * np.exp(gamma / 2.0)


def efficiency(f: EfficiencyModel, gamma):
    """Packet success rate at SINR ``gamma`` (scalar or array)."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0) or np.any(np.isnan(g)):
        raise DomainError("SINR must be non-negative")
    out = f.value(g)
    return float(out) if np.ndim(out) == 0 else out


def utility(params: GameParams, f: EfficiencyModel, p_k, gamma_k):
    """Delivered bits per Joule, ``(D/M) R f(gamma) / p``; 0 where ``p = 0``."""
    p = np.asarray(p_k, dtype=float)
    if np.any(p < 0):
        raise DomainError("power must be non-negative")
    eff = np.asarray(efficiency(f, gamma_k), dtype=float)
    scale = params.D / params.M * params.R
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(p > 0, scale * eff / np.where(p > 0, p, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def sinr(gains: GainSet, powers, noise_var: float, k: Optional[int] = None):
    """Rake-output SINR of user ``k``, or of every user when ``k`` is None."""
    p = np.asarray(powers, dtype=float)
    if np.any(p < 0):
        raise DomainError("powers must be non-negative")
    if k is None:
        return gains.h_sp * p / (gains.h_si * p + gains.h_mai @ p + noise_var)
    interference = float(gains.h_mai[k] @ p) + noise_var
    return float(gains.h_sp[k] * p[k] / (gains.h_si[k] * p[k] + interference))


def _cap_inverse(gamma_cap):
    cap = np.asarray(gamma_cap, dtype=float)
    if np.any(np.isnan(cap)) or np.any(cap <= 0):
        raise DomainError("gamma_cap must be positive or inf")
    with np.errstate(divide="ignore"):
        return np.where(np.isinf(cap), 0.0, 1.0 / np.where(np.isinf(cap), 1.0, cap))


def _unbounded_root(f: EfficiencyModel) -> float:
    hi = 1.0
    while f.target_residual(hi, 0.0) > 0:
        hi *= 2.0
        if hi > 1e6:
            raise SolverError("cannot bracket the target SINR")
    return float(_bracketed_root(f, np.array(0.0), np.array(ROOT_EPS), np.array(hi)))


def _bracketed_root(f, cap_inv, lo, hi):
    """Vectorized bisection down to ``ROOT_TOL`` followed by guarded Newton."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    r_lo = f.target_residual(lo, cap_inv)
    r_hi = f.target_residual(hi, cap_inv)
    if np.any(r_lo <= 0) or np.any(r_hi >= 0):
        raise SolverError("target-SINR equation is not bracketed")
    width = np.max(hi - lo)
    steps = max(0, math.ceil(math.log2(width / ROOT_TOL))) if width > ROOT_TOL else 0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        positive = f.target_residual(mid, cap_inv) > 0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(3):
        step = f.target_residual(x, cap_inv) / f.target_residual_slope(x, cap_inv)
        cand = x - step
        x = np.where((cand > lo) & (cand < hi), cand, x)
    return x


@functools.lru_cache(maxsize=None)
def _gamma_inf(f: EfficiencyModel) -> float:
    return _unbounded_root(f)


@functools.lru_cache(maxsize=65536)
def _solve_scalar(f: EfficiencyModel, cap_inv: float) -> float:
    top = _gamma_inf(f)
    if cap_inv == 0.0:
        return top
    hi = min(top, (1.0 - ROOT_EPS) / cap_inv)
    return float(_bracketed_root(f, np.array(cap_inv), np.array(ROOT_EPS), np.array(hi)))


def solve_target_sinr(f: EfficiencyModel, gamma_cap=math.inf) -> float:
    """Utility-maximizing SINR for a user whose SI cap is ``gamma_cap``.

    Returns the unique positive root of ``f'(g) g (1 - g/cap) = f(g)``,
    which lies in ``(0, cap)``; ``cap = inf`` drops the SI factor. Results
    are cached per ``(f, cap)``.
    """
    cap_inv = float(_cap_inverse(gamma_cap))
    return _solve_scalar(f, cap_inv)


def target_sinrs(f: EfficiencyModel, gamma_caps) -> np.ndarray:
    """Vectorized :func:`solve_target_sinr`."""
    return _targets_from_cap_inv(f, np.atleast_1d(_cap_inverse(gamma_caps)).astype(float))


def gains_target_sinrs(f: EfficiencyModel, gains: GainSet) -> np.ndarray:
    """Per-user target SINR straight from the gains (``Gamma^-1 = h_si/h_sp``)."""
    return _targets_from_cap_inv(f, gains.gamma_cap_inv)


def _targets_from_cap_inv(f, cap_inv):
    top = _gamma_inf(f)
    out = np.full(cap_inv.shape, top)
    finite = cap_inv > 0
    if np.any(finite):
        ci = cap_inv[finite]
        hi = np.minimum(top, (1.0 - ROOT_EPS) / ci)
        out[finite] = _bracketed_root(f, ci, np.full(ci.shape, ROOT_EPS), hi)
    return out


def best_response(gains: GainSet, powers, params: GameParams, f: EfficiencyModel, k: int,
                  target: Optional[float] = None) -> float:
    """Utility-maximizing power of user ``k`` given the others' powers.

    ``powers[k]`` is ignored. The unconstrained maximizer is clipped to
    ``p_max``.
    """
    p = np.asarray(powers, dtype=float)
    g_inv = float(gains.gamma_cap_inv[k])
    if target is None:
        target = _solve_scalar(f, g_inv)
    interference = float(gains.h_mai[k] @ p) - gains.h_mai[k, k] * p[k] + params.noise_var
    p_star = target * interference / (gains.h_sp[k] * (1.0 - target * g_inv))
    return min(params.p_max, p_star)


def best_response_map(gains: GainSet, powers, params: GameParams, f: EfficiencyModel,
                      targets: Optional[np.ndarray] = None) -> np.ndarray:
    """Simultaneous best responses of all users to ``powers``."""
    p = np.asarray(powers, dtype=float)
    if targets is None:
        targets = gains_target_sinrs(f, gains)
    interference = gains.h_mai @ p + params.noise_var
    p_star = targets * interference / (gains.h_sp * (1.0 - targets * gains.gamma_cap_inv))
    return np.minimum(params.p_max, p_star)


@dataclass(frozen=True)
class FeasibilityReport:
    """Whether every user can reach its target SINR.

    ``feasible`` and ``min_powers`` use the equal-received-power closed form
    (valid when ``h_sp[k] p[k]`` is nearly common to all users);
    ``exact_min_powers`` solves the coupled linear system and is ``None``
    when no positive solution exists.
    """

    feasible: bool
    load: np.ndarray
    min_powers: Optional[np.ndarray]
    exact_min_powers: Optional[np.ndarray]
    targets: np.ndarray


def exact_min_powers(gains: GainSet, targets, noise_var: float) -> Optional[np.ndarray]:
    """Smallest powers reaching ``targets`` exactly, or None if impossible."""
    t = np.asarray(targets, dtype=float)
    system = np.diag(1.0 - t * gains.gamma_cap_inv) - (t[:, None] * gains.h_mai) / gains.h_sp[None, :]
    try:
        q = np.linalg.solve(system, t * noise_var)
    except np.linalg.LinAlgError:
        return None
    if not np.all(q > 0):
        return None
    # a positive solution is the minimal one only when the iteration matrix is stable
    iteration = (t / (1.0 - t * gains.gamma_cap_inv))[:, None] * gains.h_mai / gains.h_sp[None, :]
    if np.max(np.abs(np.linalg.eigvals(iteration))) >= 1.0:
        return None
    return q / gains.h_sp


def check_feasibility(gains: GainSet, f: EfficiencyModel, noise_var: float) -> FeasibilityReport:
    """Per-user load ``gamma*_k (1/Gamma_k + 1/Z_k)`` and minimum powers."""
    targets = gains_target_sinrs(f, gains)
    load = targets * (gains.gamma_cap_inv + gains.z_inv)
    feasible = bool(np.all(load < 1.0))
    min_powers = None
    if feasible:
        min_powers = noise_var * targets / (1.0 - load) / gains.h_sp
    return FeasibilityReport(feasible=feasible, load=load, min_powers=min_powers,
                             exact_min_powers=exact_min_powers(gains, targets, noise_var),
                             targets=targets)


@dataclass(frozen=True)
class EquilibriumOutcome:
    powers: np.ndarray
    sinrs: np.ndarray
    utilities: np.ndarray
    target_sinr: np.ndarray
    clipped: np.ndarray
    iterations: int
    converged: bool


def make_outcome(gains: GainSet, params: GameParams, f: EfficiencyModel, powers, targets,
                 iterations: int, converged: bool) -> EquilibriumOutcome:
    p = np.array(powers, dtype=float)
    s = sinr(gains, p, params.noise_var)
    clipped = (p >= params.p_max) & (s < targets)
    return EquilibriumOutcome(powers=p, sinrs=s, utilities=np.asarray(utility(params, f, p, s)),
                              target_sinr=np.asarray(targets, dtype=float), clipped=clipped,
                              iterations=int(iterations), converged=bool(converged))
