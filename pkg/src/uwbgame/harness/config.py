"""Scenario files: YAML mappings with a ``schema_version`` field.

A minimal file::

    schema_version: 1
    name: fig5
    experiment:
      kind: outage_vs_nf
      nf_range: [5, 12]
    params: {K: 32, N_f: 10, N_c: 50, L: 100}

Every other section falls back to the reference defaults. Unknown keys
are rejected so that typos do not silently change an experiment.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from ..brpc import BrpcConfig
from ..channel import ChannelModel
from ..errors import ConfigurationError
from ..params import GameParams
from ..rake import RakeConfig

SCHEMA_VERSION = 1

EXPERIMENTS = ("table_q", "utility_vs_gain", "gamma_star_curve", "outage_vs_nf", "ne_vs_social", "custom")

# experiment-specific keys and their defaults
_EXPERIMENT_KEYS = {
    "table_q": {"cells": None},
    "utility_vs_gain": {"variants": [{}]},
    "gamma_star_curve": {"gamma_cap_db": [0.0, 40.0, 81], "M_values": None},
    "outage_vs_nf": {"nf_range": [5, 12]},
    "ne_vs_social": {"rho_values": [0.2, 0.5, 1.0, 2.0, 5.0], "polish": True},
    "custom": {},
}

_TOP_KEYS = {"schema_version", "name", "experiment", "seed", "trials", "output_dir", "workers",
             "trace", "trace_trials", "params", "channel", "rake", "brpc"}

_CHANNEL_DEFAULTS = {"pdp": "flat", "decay_constant": 0.1, "shadowing_sigma_db": 0.0,
                     "pathloss_exponent": 2.0, "distance_range": [3.0, 20.0], "per_user_variance": None}

_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e5`` and ``1.0e5`` as floats (YAML 1.2 style)."""


_Loader.yaml_implicit_resolvers = {k: list(v) for k, v in yaml.SafeLoader.yaml_implicit_resolvers.items()}
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*\.[0-9_]*(?:[eE][-+]?[0-9]+)?|\.[0-9_]+(?:[eE][-+]?[0-9]+)?"
               r"|[0-9][0-9_]*[eE][-+]?[0-9]+|\.(?:inf|Inf|INF)|[-+]\.(?:inf|Inf|INF)|\.(?:nan|NaN|NAN))$"),
    list("-+0123456789."))


def _check_keys(section: str, data: dict, allowed) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigurationError(f"{section}: unknown key(s) {', '.join(map(repr, unknown))}")


def _mapping(section: str, value) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigurationError(f"{section}: expected a mapping, got {type(value).__name__}")
    return dict(value)


def _build(section: str, factory, kwargs):
    try:
        return factory(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{section}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{section}: {exc}") from None


@dataclass(frozen=True)
class Experiment:
    kind: str
    options: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    """A fully resolved scenario.

    ``raw`` keeps the normalized mapping the scenario was built from; the
    scenario hash is computed from it.
    """

    name: str
    params: GameParams
    model: ChannelModel
    rake: RakeConfig
    brpc: BrpcConfig
    experiment: Experiment
    trials: int
    seed: int
    output_dir: str
    workers: int
    trace: bool
    trace_trials: int
    raw: dict = field(repr=False, compare=False)

    @property
    def scenario_hash(self) -> str:
        return scenario_hash(self.raw)


def scenario_hash(raw: dict) -> str:
    """Hash of the scenario content, ignoring seed, trial count and where output goes."""
    body = {k: v for k, v in raw.items() if k not in ("seed", "trials", "output_dir", "workers")}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _positive_int(section: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigurationError(f"{section} must be a positive integer, got {value!r}")
    return value


def _experiment_options(kind: str, opts: dict) -> dict:
    allowed = _EXPERIMENT_KEYS[kind]
    _check_keys(f"experiment ({kind})", opts, allowed)
    out = {k: opts.get(k, v) for k, v in allowed.items()}
    if kind == "table_q":
        cells = out["cells"]
        if not cells or not isinstance(cells, list):
            raise ConfigurationError("experiment.cells: need a non-empty list of {N_c, N_f, L, K}")
        for i, c in enumerate(cells):
            c = _mapping(f"experiment.cells[{i}]", c)
            _check_keys(f"experiment.cells[{i}]", c, ("N_c", "N_f", "L", "K"))
            missing = {"N_c", "N_f", "L", "K"} - set(c)
            if missing:
                raise ConfigurationError(f"experiment.cells[{i}]: missing {sorted(missing)}")
    elif kind == "utility_vs_gain":
        if not isinstance(out["variants"], list) or not out["variants"]:
            raise ConfigurationError("experiment.variants must be a non-empty list")
        for i, v in enumerate(out["variants"]):
            _check_keys(f"experiment.variants[{i}]", _mapping(f"experiment.variants[{i}]", v),
                        ("N_c", "N_f", "L", "K"))
    elif kind == "gamma_star_curve":
        g = out["gamma_cap_db"]
        if not (isinstance(g, list) and len(g) == 3 and g[0] < g[1] and int(g[2]) == g[2] and g[2] >= 2):
            raise ConfigurationError("experiment.gamma_cap_db must be [start_db, stop_db, points]")
    elif kind == "outage_vs_nf":
        r = out["nf_range"]
        if not (isinstance(r, list) and len(r) == 2 and all(isinstance(x, int) for x in r)
                and 1 <= r[0] <= r[1]):
            raise ConfigurationError("experiment.nf_range must be [first, last] with 1 <= first <= last")
    elif kind == "ne_vs_social":
        rv = out["rho_values"]
        if not rv or not all(isinstance(x, (int, float)) and x > 0 for x in rv):
            raise ConfigurationError("experiment.rho_values must be a non-empty list of positive numbers")
    return out


def parse_scenario(data: Any, overrides: Optional[dict] = None) -> Scenario:
    """Validate a decoded config mapping and apply CLI overrides."""
    data = _mapping("config", data)
    _check_keys("config", data, _TOP_KEYS)
    if "schema_version" not in data:
        raise ConfigurationError("schema_version: missing")
    if data["schema_version"] != SCHEMA_VERSION:
        raise ConfigurationError(
            f"schema_version: unsupported value {data['schema_version']!r} (expected {SCHEMA_VERSION})")
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    name = str(data.get("name", "scenario"))
    if not _NAME_RE.match(name):
        raise ConfigurationError(f"name: {name!r} may only contain letters, digits, '.', '_' and '-'")

    exp = data.get("experiment", "custom")
    exp = {"kind": exp} if isinstance(exp, str) else _mapping("experiment", exp)
    kind = overrides.get("experiment", exp.get("kind", "custom"))
    if kind not in EXPERIMENTS:
        raise ConfigurationError(f"experiment.kind: {kind!r} is not one of {', '.join(EXPERIMENTS)}")
    opts = {k: v for k, v in exp.items() if k != "kind"}
    if "experiment" in overrides and overrides["experiment"] != exp.get("kind"):
        # options written for another experiment do not carry over
        opts = {}
    options = _experiment_options(kind, opts)

    p_raw = _mapping("params", data.get("params"))
    if kind != "table_q":
        missing = {"K", "N_f", "N_c", "L"} - set(p_raw)
        if missing:
            raise ConfigurationError(f"params: missing {sorted(missing)}")
    else:
        # cells supply the dimensions; placeholders keep GameParams valid
        first = options["cells"][0]
        p_raw = {**{k: first[k] for k in ("K", "N_f", "N_c", "L")}, **p_raw}
    params = _build("params", GameParams, p_raw)

    c_raw = _mapping("channel", data.get("channel"))
    _check_keys("channel", c_raw, _CHANNEL_DEFAULTS)
    c_full = {**_CHANNEL_DEFAULTS, **c_raw}
    model = _build("channel", ChannelModel, {
        "pdp_kind": c_full["pdp"], "decay_constant": c_full["decay_constant"],
        "shadowing_sigma_db": c_full["shadowing_sigma_db"],
        "pathloss_exponent": c_full["pathloss_exponent"],
        "distance_range": tuple(c_full["distance_range"]),
        "per_user_variance": c_full["per_user_variance"]})

    r_raw = _mapping("rake", data.get("rake"))
    _check_keys("rake", r_raw, ("kind", "fingers"))
    rake = _build("rake", RakeConfig, r_raw)
    _build("rake", rake.check, {"L": params.L})

    b_raw = _mapping("brpc", data.get("brpc"))
    _check_keys("brpc", b_raw, ("max_sweeps", "tol_power_rel", "init", "init_seed", "init_powers", "update_form"))
    brpc = _build("brpc", BrpcConfig, b_raw)

    trials = _positive_int("trials", overrides.get("trials", data.get("trials", 1)))
    seed = overrides.get("seed", data.get("seed", 0))
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0 or seed >= 2 ** 64:
        raise ConfigurationError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    workers = _positive_int("workers", overrides.get("workers", data.get("workers", 1)))
    trace = bool(data.get("trace", False))
    trace_trials = _positive_int("trace_trials", data.get("trace_trials", 1))
    output_dir = str(overrides.get("out", data.get("output_dir", "out")))

    raw = {
        "schema_version": SCHEMA_VERSION, "name": name,
        "experiment": {"kind": kind, **options},
        "params": dataclasses.asdict(params), "channel": c_full,
        "rake": {"kind": rake.kind.value, "fingers": rake.fingers},
        "brpc": {k: (v.value if hasattr(v, "value") else v) for k, v in dataclasses.asdict(brpc).items()},
        "seed": seed, "trials": trials, "output_dir": output_dir,
        "workers": workers, "trace": trace, "trace_trials": trace_trials,
    }
    return Scenario(name=name, params=params, model=model, rake=rake, brpc=brpc,
                    experiment=Experiment(kind, options), trials=trials, seed=seed,
                    output_dir=output_dir, workers=workers, trace=trace, trace_trials=trace_trials, raw=raw)


def load_scenario(path, overrides: Optional[dict] = None) -> Scenario:
    """Read and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: not valid YAML ({exc})") from None
    return parse_scenario(data, overrides)

