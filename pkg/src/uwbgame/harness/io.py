"""Result files: CSV tables, JSON summaries and optional BRPC traces."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .. import __version__
from .._kernels import BACKEND
from .config import SCHEMA_VERSION, Scenario

FORMAT_VERSION = 1


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def header_line(sc: Scenario, kind: str) -> str:
    return (f"# uwbgame {kind} format={FORMAT_VERSION} schema_version={SCHEMA_VERSION} "
            f"package={__version__} experiment={sc.experiment.kind} scenario_hash={sc.scenario_hash} "
            f"seed={sc.seed}")


def write_table(path: Path, sc: Scenario, table: dict, kind: str = "results") -> None:
    """Write ``table`` with the identifying columns first.

    Every row carries the scenario hash, seed and trial index; floats are
    written with ``repr`` so a rerun produces byte-identical files.
    """
    cols = [c for c in table if c != "trial"]
    n = len(table["trial"])
    with open(path, "w", newline="") as fh:
        fh.write(header_line(sc, kind) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario_hash", "seed", "trial", *cols])
        lead = (sc.scenario_hash, str(sc.seed))
        data = [table["trial"].tolist()] + [np.asarray(table[c]).tolist() for c in cols]
        for i in range(n):
            w.writerow([*lead, *(_cell(col[i]) for col in data)])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_summary(path: Path, sc: Scenario, summary: dict) -> None:
    doc = {"format": FORMAT_VERSION, "package": __version__, "kernel_backend": BACKEND,
           "name": sc.name, "experiment": sc.experiment.kind, "scenario_hash": sc.scenario_hash,
           "seed": sc.seed, "trials": sc.trials, "scenario": sc.raw, "results": summary}
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=False)
        fh.write("\n")


def output_paths(sc: Scenario) -> dict:
    out = Path(sc.output_dir)
    return {"csv": out / f"{sc.name}.csv", "summary": out / f"{sc.name}.summary.json",
            "trace": out / f"{sc.name}.trace.csv"}


def write_outputs(sc: Scenario, result) -> dict:
    paths = output_paths(sc)
    Path(sc.output_dir).mkdir(parents=True, exist_ok=True)
    write_table(paths["csv"], sc, result.table)
    write_summary(paths["summary"], sc, result.summary)
    if result.trace is not None:
        write_table(paths["trace"], sc, result.trace, kind="trace")
    else:
        paths.pop("trace")
    return paths
