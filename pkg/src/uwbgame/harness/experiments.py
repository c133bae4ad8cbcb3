"""Monte-Carlo experiment suites.

Each experiment is a pure per-trial function returning a column table
(``dict`` of equal-length arrays) plus a summary step over the
concatenated table. Trial ``t`` draws its channels from the substream
``(seed, t, ...)``, so results do not depend on how trials are scheduled.

Column contracts (besides ``trial``, which every table carries):

``table_q``
    cell, N_c, N_f, L, K, user, h_sp, power_W, q_W, q_lsa_W, clipped
``utility_vs_gain``
    variant, N_c, N_f, user, channel_gain, h_sp, power_W, sinr,
    utility_bits_per_J, utility_lsa_bits_per_J, clipped
``gamma_star_curve``
    M, gamma_cap_db, gamma_cap, gamma_star, gamma_star_db
``outage_vs_nf``
    N_f, any_clipped, n_clipped, max_power_W, converged, sweeps,
    feasible_exact, feasible_lsa
``ne_vs_social``
    rho, N_c, N, ne_sum_bits_per_J, social_sum_bits_per_J,
    search_sum_bits_per_J, gap, search_gap, ne_mean_sinr, gamma_opt,
    gamma_star, ordering_ok, ne_norm_utility, social_norm_utility
``custom``
    user, channel_gain, h_sp, gamma_cap, z_inv, target_sinr, power_W,
    sinr, utility_bits_per_J, clipped, sweeps, converged,
    power_lsa_W, utility_lsa_bits_per_J
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import brpc, lsa, social
from ..channel import channel_gain, draw_realization, make_rng
from ..errors import InfeasibleError
from ..game import PacketExp, check_feasibility, solve_target_sinr
from ..params import GameParams
from ..rake import compute_gains
from .config import Scenario

Table = dict


@dataclass
class TrialResult:
    table: Table
    trace: Optional[Table] = None


@dataclass
class ExperimentResult:
    table: Table
    summary: dict
    trace: Optional[Table]


def _efficiency(params: GameParams) -> PacketExp:
    return PacketExp(params.M)


def _dims(params: GameParams, spec: dict) -> GameParams:
    changes = {k: v for k, v in spec.items() if getattr(params, k) != v}
    return params.replace(**changes) if changes else params


def _gains(sc: Scenario, params: GameParams, *key: int):
    real = draw_realization(sc.model, params, make_rng(sc.seed, *key))
    return real, compute_gains(real, sc.rake, params)


def _stack(rows: list) -> Table:
    return {k: np.asarray([r[k] for r in rows]) for k in rows[0]}


def _trace_table(t: int, trace: brpc.IterationTrace) -> Table:
    sweeps, K = trace.powers.shape
    return {"trial": np.full(sweeps * K, t), "sweep": np.repeat(np.arange(sweeps), K),
            "user": np.tile(np.arange(K), sweeps), "power_W": trace.powers.ravel(),
            "sinr": trace.sinrs.ravel()}


def _brpc_cfg(sc: Scenario, t: int) -> brpc.BrpcConfig:
    record = sc.trace and t < sc.trace_trials
    if record == sc.brpc.record_trace:
        return sc.brpc
    return dataclasses.replace(sc.brpc, record_trace=record)


def _lsa_q(params: GameParams, f) -> float:
    g = solve_target_sinr(f)
    slack = 1.0 - g * (params.K - 1 + lsa.nu(params.rho)) / params.N
    return params.noise_var * g / slack if slack > 0 else math.nan


# -- trials -----------------------------------------------------------------

def trial_table_q(sc: Scenario, t: int) -> TrialResult:
    parts = []
    for i, cell in enumerate(sc.experiment.options["cells"]):
        params = _dims(sc.params, cell)
        f = _efficiency(params)
        _, gains = _gains(sc, params, t, i)
        out, _ = brpc.run(gains, params, f, sc.brpc)
        K = params.K
        parts.append({
            "trial": np.full(K, t), "cell": np.full(K, i), "N_c": np.full(K, params.N_c),
            "N_f": np.full(K, params.N_f), "L": np.full(K, params.L), "K": np.full(K, K),
            "user": np.arange(K), "h_sp": gains.h_sp, "power_W": out.powers,
            "q_W": gains.h_sp * out.powers, "q_lsa_W": np.full(K, _lsa_q(params, f)),
            "clipped": out.clipped.astype(int)})
    return TrialResult(concat(parts))


def trial_utility_vs_gain(sc: Scenario, t: int) -> TrialResult:
    parts, trace = [], None
    for v, spec in enumerate(sc.experiment.options["variants"]):
        params = _dims(sc.params, spec)
        f = _efficiency(params)
        real, gains = _gains(sc, params, t, v)
        cfg = _brpc_cfg(sc, t) if v == 0 else sc.brpc
        out, tr = brpc.run(gains, params, f, cfg)
        if tr is not None:
            trace = _trace_table(t, tr)
        pred = lsa.predict_equilibrium(params, f, gains.h_sp)
        u_lsa = pred.predicted_utilities if pred.feasible else np.full(params.K, np.nan)
        K = params.K
        parts.append({
            "trial": np.full(K, t), "variant": np.full(K, v), "N_c": np.full(K, params.N_c),
            "N_f": np.full(K, params.N_f), "user": np.arange(K),
            "channel_gain": np.array([channel_gain(real, k) for k in range(K)]), "h_sp": gains.h_sp,
            "power_W": out.powers, "sinr": out.sinrs, "utility_bits_per_J": out.utilities,
            "utility_lsa_bits_per_J": u_lsa, "clipped": out.clipped.astype(int)})
    return TrialResult(concat(parts), trace)


def gamma_star_table(sc: Scenario) -> Table:
    lo, hi, n = sc.experiment.options["gamma_cap_db"]
    Ms = sc.experiment.options["M_values"] or [sc.params.M]
    cap_db = np.linspace(lo, hi, int(n))
    rows = []
    for M in Ms:
        f = PacketExp(int(M))
        for c_db in list(cap_db) + [math.inf]:
            cap = 10.0 ** (c_db / 10.0) if math.isfinite(c_db) else math.inf
            g = solve_target_sinr(f, cap)
            rows.append({"trial": 0, "M": int(M), "gamma_cap_db": c_db, "gamma_cap": cap,
                         "gamma_star": g, "gamma_star_db": 10.0 * math.log10(g)})
    return _stack(rows)


def trial_gamma_star_curve(sc: Scenario, t: int) -> TrialResult:
    return TrialResult(gamma_star_table(sc))


def trial_outage_vs_nf(sc: Scenario, t: int) -> TrialResult:
    lo, hi = sc.experiment.options["nf_range"]
    # one channel draw per trial, shared by every N_f so the curve is not noisy across N_f
    base = sc.params.replace(N_f=hi)
    real = draw_realization(sc.model, base, make_rng(sc.seed, t))
    rows = []
    for nf in range(lo, hi + 1):
        params = sc.params.replace(N_f=nf)
        f = _efficiency(params)
        gains = compute_gains(real, sc.rake, params)
        out, _ = brpc.run(gains, params, f, sc.brpc)
        rows.append({"trial": t, "N_f": nf, "any_clipped": int(out.clipped.any()),
                     "n_clipped": int(out.clipped.sum()), "max_power_W": float(out.powers.max()),
                     "converged": int(out.converged), "sweeps": out.iterations,
                     "feasible_exact": int(check_feasibility(gains, f, params.noise_var).exact_min_powers
                                           is not None),
                     "feasible_lsa": int(lsa.min_frames(params, f)[0] <= nf)})
    return TrialResult(_stack(rows))


def _n_c(rho: float, L: int) -> int:
    return max(1, int(round(rho * L)))


def trial_ne_vs_social(sc: Scenario, t: int) -> TrialResult:
    opts = sc.experiment.options
    real = draw_realization(sc.model, sc.params, make_rng(sc.seed, t))
    rows = []
    for rho in opts["rho_values"]:
        params = sc.params.replace(N_c=_n_c(rho, sc.params.L))
        f = _efficiency(params)
        gains = compute_gains(real, sc.rake, params)
        g_opt = social.solve_social_sinr(params, f)
        try:
            d = social.compare_on_draw(gains, params, f, sc.brpc, opts["polish"])
        except InfeasibleError:
            d = {k: math.nan for k in ("ne_sum", "social_sum", "search_sum", "ne_mean_sinr",
                                        "ne_norm_utility", "social_norm_utility")}
        g_star = solve_target_sinr(f)
        rows.append({
            "trial": t, "rho": float(rho), "N_c": params.N_c, "N": params.N,
            "ne_sum_bits_per_J": d["ne_sum"], "social_sum_bits_per_J": d["social_sum"],
            "search_sum_bits_per_J": d["search_sum"],
            "gap": (d["social_sum"] - d["ne_sum"]) / d["social_sum"],
            "search_gap": (d["search_sum"] - d["ne_sum"]) / d["search_sum"],
            "ne_mean_sinr": d["ne_mean_sinr"], "gamma_opt": g_opt, "gamma_star": g_star,
            "ordering_ok": int(g_opt <= d["ne_mean_sinr"] <= g_star + 1e-9),
            "ne_norm_utility": d["ne_norm_utility"], "social_norm_utility": d["social_norm_utility"]})
    return TrialResult(_stack(rows))


def trial_custom(sc: Scenario, t: int) -> TrialResult:
    params = sc.params
    f = _efficiency(params)
    real, gains = _gains(sc, params, t)
    out, tr = brpc.run(gains, params, f, _brpc_cfg(sc, t))
    pred = lsa.predict_equilibrium(params, f, gains.h_sp)
    K = params.K
    nan = np.full(K, np.nan)
    table = {
        "trial": np.full(K, t), "user": np.arange(K),
        "channel_gain": np.array([channel_gain(real, k) for k in range(K)]), "h_sp": gains.h_sp,
        "gamma_cap": gains.gamma_cap, "z_inv": gains.z_inv, "target_sinr": out.target_sinr,
        "power_W": out.powers, "sinr": out.sinrs, "utility_bits_per_J": out.utilities,
        "clipped": out.clipped.astype(int), "sweeps": np.full(K, out.iterations),
        "converged": np.full(K, int(out.converged)),
        "power_lsa_W": pred.predicted_powers if pred.feasible else nan,
        "utility_lsa_bits_per_J": pred.predicted_utilities if pred.feasible else nan}
    return TrialResult(table, None if tr is None else _trace_table(t, tr))


TRIALS = {
    "table_q": trial_table_q, "utility_vs_gain": trial_utility_vs_gain,
    "gamma_star_curve": trial_gamma_star_curve, "outage_vs_nf": trial_outage_vs_nf,
    "ne_vs_social": trial_ne_vs_social, "custom": trial_custom,
}


# -- summaries --------------------------------------------------------------

def _ratio(q: np.ndarray) -> float:
    return float(np.var(q) / np.mean(q) ** 2)


def summary_table_q(sc: Scenario, tab: Table) -> dict:
    cells = []
    for i, cell in enumerate(sc.experiment.options["cells"]):
        m = tab["cell"] == i
        q = tab["q_W"][m]
        per_trial = [_ratio(q[tab["trial"][m] == t]) for t in np.unique(tab["trial"][m])]
        cells.append({**cell, "var_over_mean_sq": _ratio(q), "per_trial_mean": float(np.mean(per_trial)),
                      "mean_q_W": float(np.mean(q)), "q_lsa_W": float(tab["q_lsa_W"][m][0]),
                      "clipped_fraction": float(np.mean(tab["clipped"][m]))})
    return {"cells": cells}


def summary_utility_vs_gain(sc: Scenario, tab: Table) -> dict:
    out = []
    for v, spec in enumerate(sc.experiment.options["variants"]):
        m = (tab["variant"] == v) & (tab["clipped"] == 0)
        params = _dims(sc.params, spec)
        u, u_lsa = tab["utility_bits_per_J"][m], tab["utility_lsa_bits_per_J"][m]
        rel = np.abs(u - u_lsa) / u_lsa
        pred = lsa.predict_equilibrium(params, _efficiency(params), np.ones(params.K))
        out.append({**spec, "N_c": params.N_c, "N_f": params.N_f, "rho": params.rho, "nu": pred.nu,
                    "median_rel_error": float(np.median(rel)) if rel.size else None,
                    "mean_utility_per_gain": float(np.mean(u / tab["h_sp"][m])) if rel.size else None,
                    "lsa_utility_per_gain": (float(pred.predicted_utilities[0]) if pred.feasible else None),
                    "clipped_fraction": float(np.mean(tab["clipped"][tab["variant"] == v]))})
    return {"variants": out}


def summary_gamma_star_curve(sc: Scenario, tab: Table) -> dict:
    out = {}
    for M in np.unique(tab["M"]):
        m = (tab["M"] == M) & np.isinf(tab["gamma_cap"])
        g = float(tab["gamma_star"][m][0])
        out[str(int(M))] = {"gamma_star_inf": g, "gamma_star_inf_db": 10.0 * math.log10(g)}
    return {"plateau": out}


def summary_outage_vs_nf(sc: Scenario, tab: Table) -> dict:
    f = _efficiency(sc.params)
    nf_min, interior = lsa.min_frames(sc.params, f)
    rows = []
    for nf in np.unique(tab["N_f"]):
        m = tab["N_f"] == nf
        rows.append({"N_f": int(nf), "outage_probability": float(np.mean(tab["any_clipped"][m])),
                     "feasible_exact_fraction": float(np.mean(tab["feasible_exact"][m])),
                     "converged_fraction": float(np.mean(tab["converged"][m])),
                     "feasible_lsa": bool(tab["feasible_lsa"][m][0])})
    return {"per_nf": rows, "lsa": {"min_nf": nf_min, "min_nf_interior": interior}}


def summary_ne_vs_social(sc: Scenario, tab: Table) -> dict:
    rows = []
    for rho in sc.experiment.options["rho_values"]:
        m = tab["rho"] == float(rho)
        gap = tab["gap"][m]
        rows.append({"rho": float(rho), "N": int(tab["N"][m][0]), "gamma_opt": float(tab["gamma_opt"][m][0]),
                     "gamma_star": float(tab["gamma_star"][m][0]),
                     "mean_ne_sinr": float(np.nanmean(tab["ne_mean_sinr"][m])),
                     "mean_gap": float(np.nanmean(gap)), "max_gap": float(np.nanmax(gap)),
                     "min_gap": float(np.nanmin(gap)),
                     "mean_search_gap": float(np.nanmean(tab["search_gap"][m])),
                     "ordering_violations": int(np.sum(tab["ordering_ok"][m] == 0)),
                     "mean_ne_norm_utility": float(np.nanmean(tab["ne_norm_utility"][m])),
                     "mean_social_norm_utility": float(np.nanmean(tab["social_norm_utility"][m]))})
    return {"per_rho": rows}


def summary_custom(sc: Scenario, tab: Table) -> dict:
    f = _efficiency(sc.params)
    nf_min, interior = lsa.min_frames(sc.params, f)
    u, u_lsa = tab["utility_bits_per_J"], tab["utility_lsa_bits_per_J"]
    ok = np.isfinite(u_lsa) & (tab["clipped"] == 0)
    return {"mean_utility_bits_per_J": float(np.mean(u)), "median_power_W": float(np.median(tab["power_W"])),
            "clipped_fraction": float(np.mean(tab["clipped"])),
            "converged_fraction": float(np.mean(tab["converged"])),
            "mean_sweeps": float(np.mean(tab["sweeps"])),
            "lsa": {"gamma_star": solve_target_sinr(f), "nu": lsa.nu(sc.params.rho), "min_nf": nf_min,
                    "min_nf_interior": interior,
                    "median_rel_utility_error": (float(np.median(np.abs(u[ok] - u_lsa[ok]) / u_lsa[ok]))
                                                 if ok.any() else None)}}


SUMMARIES = {
    "table_q": summary_table_q, "utility_vs_gain": summary_utility_vs_gain,
    "gamma_star_curve": summary_gamma_star_curve, "outage_vs_nf": summary_outage_vs_nf,
    "ne_vs_social": summary_ne_vs_social, "custom": summary_custom,
}


# -- driver -----------------------------------------------------------------

def concat(parts: list) -> Table:
    return {k: np.concatenate([np.atleast_1d(p[k]) for p in parts]) for k in parts[0]}


def run_trials(sc: Scenario, workers: Optional[int] = None) -> list:
    """Per-trial results in trial order, computed inline or in a process pool."""
    fn = functools.partial(TRIALS[sc.experiment.kind], sc)
    n = 1 if sc.experiment.kind == "gamma_star_curve" else sc.trials
    workers = sc.workers if workers is None else workers
    if workers <= 1 or n == 1:
        return [fn(t) for t in range(n)]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        # map yields in submission order regardless of completion order
        return list(pool.map(fn, range(n), chunksize=max(1, n // (4 * workers))))


def run_experiment(sc: Scenario, workers: Optional[int] = None) -> ExperimentResult:
    results = run_trials(sc, workers)
    table = concat([r.table for r in results])
    traces = [r.trace for r in results if r.trace is not None]
    summary = SUMMARIES[sc.experiment.kind](sc, table)
    return ExperimentResult(table=table, summary=summary, trace=concat(traces) if traces else None)
