"""Cooperative benchmark: the equal-weight utility-sum maximizer.

The primary solution balances every user at a common SINR ``gamma_opt``,
the root of the target-SINR equation with the self-interference cap
replaced by the large-system effective cap ``N / (K - 1 + nu)``. A local
numerical maximization of the exact utility sum, and for small ``K`` a
coarse product-grid search, serve as cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from . import brpc
from .channel import ChannelModel, draw_realization, make_rng
from .errors import InfeasibleError
from .game import EfficiencyModel, EquilibriumOutcome, sinr, solve_target_sinr, utility
from .lsa import nu
from .params import GameParams
from .rake import ARAKE, GainSet, RakeConfig, compute_gains

GRID_MAX_USERS = 5


def effective_cap(params: GameParams) -> float:
    return params.N / (params.K - 1 + nu(params.rho))


def solve_social_sinr(params: GameParams, f: EfficiencyModel) -> float:
    """Common SINR of the balanced social optimum.

    Raises
    ------
    InfeasibleError
        If ``N <= K - 1 + nu(rho)``, i.e. even unit SINR cannot be shared.
    """
    cap = effective_cap(params)
    if not cap > 1.0:
        raise InfeasibleError(
            f"N = {params.N} does not exceed K - 1 + nu = {params.K - 1 + nu(params.rho):.4g}; "
            "raise N_f or reduce the number of users")
    return solve_target_sinr(f, cap)


def balanced_objective(params: GameParams, f: EfficiencyModel, gamma) -> np.ndarray:
    """Large-system utility sum per unit total gain at a common SINR ``gamma``.

    Proportional to ``f(g) (1 - g (K - 1 + nu) / N) / g``; the balanced
    optimum maximizes it.
    """
    g = np.asarray(gamma, dtype=float)
    load = (params.K - 1 + nu(params.rho)) / params.N
    scale = params.D / params.M * params.R / params.noise_var
    return scale * f.value(g) * (1.0 - g * load) / g


def social_powers(gains: GainSet, gamma_opt: float, noise_var: float) -> np.ndarray:
    """Powers giving every user exactly ``gamma_opt`` on this realization."""
    system = np.diag(gains.h_sp - gamma_opt * gains.h_si) - gamma_opt * gains.h_mai
    try:
        p = np.linalg.solve(system, np.full(gains.K, gamma_opt * noise_var))
    except np.linalg.LinAlgError as exc:
        raise InfeasibleError("common-SINR system is singular") from exc
    if not np.all(p > 0):
        raise InfeasibleError(f"no positive power vector reaches SINR {gamma_opt:.6g} for all users")
    return p


@dataclass(frozen=True)
class SocialOutcome:
    gamma_opt: float
    powers: np.ndarray
    sinrs: np.ndarray
    utilities: np.ndarray
    utility_sum: float
    gap_vs_ne: Optional[float]  # (social - NE) / social, summed utility


def _outcome(gains, params, f, gamma_opt, p, ne):
    s = sinr(gains, p, params.noise_var)
    u = np.asarray(utility(params, f, p, s))
    total = float(u.sum())
    gap = None if ne is None else (total - float(ne.utilities.sum())) / total
    return SocialOutcome(gamma_opt=gamma_opt, powers=p, sinrs=s, utilities=u, utility_sum=total, gap_vs_ne=gap)


def social_optimum(gains: GainSet, params: GameParams, f: EfficiencyModel,
                   ne: Optional[EquilibriumOutcome] = None) -> SocialOutcome:
    """Balanced social optimum on one realization, optionally compared with a Nash outcome."""
    g = solve_social_sinr(params, f)
    return _outcome(gains, params, f, g, social_powers(gains, g, params.noise_var), ne)


def _neg_sum(x, gains, params, f, ref):
    p = np.exp(x)
    return -float(np.sum(utility(params, f, p, sinr(gains, p, params.noise_var)))) / ref


def search_social_optimum(gains: GainSet, params: GameParams, f: EfficiencyModel,
                          starts, ne: Optional[EquilibriumOutcome] = None) -> SocialOutcome:
    """Local maximization of the exact utility sum over log-powers.

    Runs L-BFGS-B from every start in ``starts`` (positive power vectors,
    e.g. the Nash and balanced points) with powers capped at ``p_max`` and
    keeps the best. ``gamma_opt`` of the result is its mean SINR.
    """
    starts = [np.minimum(np.asarray(s, dtype=float), params.p_max) for s in starts]
    ref = max(float(np.sum(utility(params, f, s, sinr(gains, s, params.noise_var)))) for s in starts)
    if not ref > 0:
        ref = 1.0
    bounds = [(None, np.log(params.p_max))] * gains.K
    best = None
    for s in starts:
        res = minimize(_neg_sum, np.log(s), args=(gains, params, f, ref), method="L-BFGS-B",
                       bounds=bounds, options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 2000})
        if best is None or res.fun < best.fun:
            best = res
    p = np.exp(best.x)
    out = _outcome(gains, params, f, 0.0, p, ne)
    return SocialOutcome(gamma_opt=float(np.mean(out.sinrs)), powers=out.powers, sinrs=out.sinrs,
                         utilities=out.utilities, utility_sum=out.utility_sum, gap_vs_ne=out.gap_vs_ne)


def grid_search_social(gains: GainSet, params: GameParams, f: EfficiencyModel, center,
                       points: int = 11, span: float = 0.2) -> SocialOutcome:
    """Exhaustive product-grid search of the utility sum around ``center``.

    Each user's power ranges over ``points`` log-spaced values within a
    factor ``exp(+-span)`` of its center value. Cost is ``points ** K``,
    so only ``K <= 5`` is accepted.
    """
    if gains.K > GRID_MAX_USERS:
        raise ValueError(f"grid search is limited to K <= {GRID_MAX_USERS}")
    center = np.asarray(center, dtype=float)
    axis = np.exp(np.linspace(-span, span, points))
    grids = np.meshgrid(*[c * axis for c in center], indexing="ij")
    P = np.minimum(np.stack([g.ravel() for g in grids], axis=1), params.p_max)
    interference = P @ gains.h_mai.T + gains.h_si * P + params.noise_var
    S = gains.h_sp * P / interference
    total = np.sum(np.asarray(utility(params, f, P, S)), axis=1)
    i = int(np.argmax(total))
    return _outcome(gains, params, f, float(np.mean(S[i])), P[i].copy(), None)


@dataclass(frozen=True)
class NeSocialComparison:
    """Per-draw results on identical channels; arrays have one entry per trial.

    Normalized utilities are ``u_k / h_sp[k]`` averaged over users.
    """

    gamma_star: float
    gamma_opt: float
    ne_sum: np.ndarray
    social_sum: np.ndarray
    search_sum: np.ndarray
    ne_mean_sinr: np.ndarray
    ne_norm_utility: np.ndarray
    social_norm_utility: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return (self.social_sum - self.ne_sum) / self.social_sum

    @property
    def search_gap(self) -> np.ndarray:
        return (self.search_sum - self.ne_sum) / self.search_sum

    def ordering_holds(self, tol: float = 1e-9) -> np.ndarray:
        """``gamma_opt <= mean NE SINR <= gamma_star`` per draw."""
        return ((self.gamma_opt <= self.ne_mean_sinr + tol)
                & (self.ne_mean_sinr <= self.gamma_star + tol))


def compare_on_draw(gains: GainSet, params: GameParams, f: EfficiencyModel,
                    brpc_cfg: brpc.BrpcConfig = brpc.BrpcConfig(), polish: bool = True) -> dict:
    """Nash and social summaries for one realization, as a flat mapping."""
    ne, _ = brpc.run(gains, params, f, brpc_cfg)
    soc = social_optimum(gains, params, f, ne)
    search = (search_social_optimum(gains, params, f, [ne.powers, soc.powers]).utility_sum
              if polish else np.nan)
    return {"ne_sum": float(ne.utilities.sum()), "social_sum": soc.utility_sum, "search_sum": search,
            "ne_mean_sinr": float(ne.sinrs.mean()),
            "ne_norm_utility": float(np.mean(ne.utilities / gains.h_sp)),
            "social_norm_utility": float(np.mean(soc.utilities / gains.h_sp)),
            "ne_clipped": int(ne.clipped.sum()), "ne_converged": bool(ne.converged)}


def compare_ne_vs_social(params: GameParams, f: EfficiencyModel, model: ChannelModel,
                         trials: int, seed: int, rake: RakeConfig = ARAKE,
                         brpc_cfg: brpc.BrpcConfig = brpc.BrpcConfig(),
                         polish: bool = True) -> NeSocialComparison:
    """Nash equilibrium against the balanced and searched social optima.

    Trial ``t`` uses the channel substream ``(seed, t)``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    g_opt = solve_social_sinr(params, f)
    draws = [compare_on_draw(compute_gains(draw_realization(model, params, make_rng(seed, t)), rake, params),
                             params, f, brpc_cfg, polish) for t in range(trials)]
    cols = {k: np.array([d[k] for d in draws]) for k in draws[0]}
    return NeSocialComparison(gamma_star=solve_target_sinr(f), gamma_opt=g_opt,
                              ne_sum=cols["ne_sum"], social_sum=cols["social_sum"],
                              search_sum=cols["search_sum"], ne_mean_sinr=cols["ne_mean_sinr"],
                              ne_norm_utility=cols["ne_norm_utility"],
                              social_norm_utility=cols["social_norm_utility"])
