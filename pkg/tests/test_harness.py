import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from uwbgame.errors import ConfigurationError
from uwbgame.harness import load_scenario, parse_scenario, run_experiment
from uwbgame.harness.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = {
    "table_q": {"kind": "table_q", "cells": [{"N_c": 10, "N_f": 10, "L": 8, "K": 3},
                                             {"N_c": 20, "N_f": 10, "L": 8, "K": 4}]},
    "utility_vs_gain": {"kind": "utility_vs_gain", "variants": [{}, {"N_c": 5, "N_f": 20}]},
    "gamma_star_curve": {"kind": "gamma_star_curve", "gamma_cap_db": [0, 30, 7], "M_values": [50, 100]},
    "outage_vs_nf": {"kind": "outage_vs_nf", "nf_range": [5, 7]},
    "ne_vs_social": {"kind": "ne_vs_social", "rho_values": [0.5, 1.0]},
    "custom": "custom",
}


def _write(tmp_path, data, name="sc.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


def _base(kind="custom", **kw):
    data = {"schema_version": 1, "name": "t", "seed": 1, "trials": 3, "experiment": SMALL[kind],
            "params": {"K": 4, "N_f": 10, "N_c": 10, "L": 8}}
    data.update(kw)
    return data


def _read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# uwbgame")
    return lines[0], list(csv.DictReader(lines[1:]))


# -- configuration ------------------------------------------------------------------

@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_validate(path, capsys):
    assert main(["validate", str(path)]) == EXIT_OK
    assert "ok" in capsys.readouterr().out


@pytest.mark.parametrize("edit, field", [
    ({"bogus": 1}, "bogus"),
    ({"schema_version": 2}, "schema_version"),
    ({"params": {"K": 4, "N_f": 10, "N_c": 10, "L": 8, "Kx": 1}}, "Kx"),
    ({"channel": {"pdp": "triangular"}}, "channel"),
    ({"brpc": {"max_sweeps": 0}}, "brpc"),
    ({"trials": 0}, "trials"),
    ({"experiment": "nonsense"}, "experiment"),
    ({"rake": {"kind": "prake", "fingers": 99}}, "rake"),
])
def test_config_errors_name_the_field(edit, field):
    data = {**_base(), **edit}
    with pytest.raises(ConfigurationError, match=field):
        parse_scenario(data)


def test_missing_schema_version():
    data = _base()
    del data["schema_version"]
    with pytest.raises(ConfigurationError, match="schema_version"):
        parse_scenario(data)


def test_overrides_applied(tmp_path):
    sc = load_scenario(_write(tmp_path, _base()), {"seed": 9, "trials": 5, "out": str(tmp_path / "o"),
                                                   "experiment": None, "workers": 2})
    assert (sc.seed, sc.trials, sc.workers) == (9, 5, 2)
    assert Path(sc.output_dir) == tmp_path / "o"


def test_hash_tracks_content_not_run_controls():
    a = parse_scenario(_base())
    assert parse_scenario(_base(seed=2, trials=10)).scenario_hash == a.scenario_hash
    changed = _base()
    changed["params"] = {**changed["params"], "N_f": 11}
    assert parse_scenario(changed).scenario_hash != a.scenario_hash


# -- CLI exit codes -----------------------------------------------------------------

def test_cli_run_ok(tmp_path, capsys):
    path = _write(tmp_path, _base(trace=True))
    assert main(["run", str(path), "--out", str(tmp_path / "o")]) == EXIT_OK
    printed = capsys.readouterr().out.split()
    assert {Path(p).name for p in printed} == {"t.csv", "t.summary.json", "t.trace.csv"}


@pytest.mark.parametrize("argv", [
    ["run", "does-not-exist.yaml"],
    ["validate", "does-not-exist.yaml"],
    ["run"],
    ["frobnicate", "x.yaml"],
    ["run", "x.yaml", "--trials", "0"],
])
def test_cli_usage_errors(argv):
    assert main(argv) == EXIT_CONFIG


def test_cli_bad_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("schema_version: [1,\n")
    assert main(["validate", str(path)]) == EXIT_CONFIG
    assert main(["run", str(_write(tmp_path, _base(bogus=1)))]) == EXIT_CONFIG


def test_cli_runtime_error(tmp_path):
    # output directory collides with an existing file
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["run", str(_write(tmp_path, _base())), "--out", str(blocker)]) == EXIT_RUNTIME


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "uwbgame.harness", "validate", str(CONFIGS / "custom.yaml")],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "scenario_hash=" in res.stdout


# -- outputs --------------------------------------------------------------------

def test_outputs_carry_provenance(tmp_path):
    path = _write(tmp_path, _base(trace=True))
    main(["run", str(path), "--out", str(tmp_path)])
    sc = load_scenario(path)
    header, rows = _read_csv(tmp_path / "t.csv")
    assert f"scenario_hash={sc.scenario_hash}" in header and "seed=1" in header
    assert list(rows[0])[:3] == ["scenario_hash", "seed", "trial"]
    assert {r["scenario_hash"] for r in rows} == {sc.scenario_hash}
    assert {int(r["trial"]) for r in rows} == {0, 1, 2}
    _, trace = _read_csv(tmp_path / "t.trace.csv")
    assert trace and list(trace[0])[:3] == ["scenario_hash", "seed", "trial"]
    summary = json.loads((tmp_path / "t.summary.json").read_text())
    assert summary["scenario_hash"] == sc.scenario_hash and summary["seed"] == 1


def test_reruns_byte_identical(tmp_path):
    path = _write(tmp_path, _base(trace=True))
    outs = []
    for d in ("a", "b"):
        main(["run", str(path), "--out", str(tmp_path / d)])
        outs.append([(tmp_path / d / n).read_bytes() for n in ("t.csv", "t.trace.csv")])
    assert outs[0] == outs[1]


def test_seed_changes_results(tmp_path):
    path = _write(tmp_path, _base())
    main(["run", str(path), "--out", str(tmp_path / "a")])
    main(["run", str(path), "--out", str(tmp_path / "b"), "--seed", "2"])
    a = _read_csv(tmp_path / "a" / "t.csv")[1]
    b = _read_csv(tmp_path / "b" / "t.csv")[1]
    assert [r["power_W"] for r in a] != [r["power_W"] for r in b]


def test_no_trace_file_without_trace(tmp_path):
    main(["run", str(_write(tmp_path, _base())), "--out", str(tmp_path)])
    assert not (tmp_path / "t.trace.csv").exists()


@pytest.mark.parametrize("kind", list(SMALL))
def test_every_experiment_runs(kind, tmp_path):
    data = _base(kind)
    if kind == "outage_vs_nf":
        data["params"] = {"K": 6, "N_f": 7, "N_c": 5, "L": 10}
    sc = parse_scenario(data)
    res = run_experiment(sc)
    lengths = {len(v) for v in res.table.values()}
    assert len(lengths) == 1 and lengths.pop() > 0
    assert isinstance(res.summary, dict) and res.summary
    assert main(["run", str(_write(tmp_path, data)), "--out", str(tmp_path)]) == EXIT_OK


@pytest.mark.parametrize("kind", ["custom", "table_q", "ne_vs_social"])
def test_worker_count_invariance(kind):
    sc = parse_scenario(_base(kind, trials=4))
    one = run_experiment(sc, workers=1).table
    two = run_experiment(sc, workers=2).table
    assert one.keys() == two.keys()
    for key in one:
        np.testing.assert_array_equal(np.asarray(one[key]), np.asarray(two[key]), err_msg=key)


def test_unsigned_exponent_reads_as_float(tmp_path):
    path = tmp_path / "sc.yaml"
    path.write_text("schema_version: 1\nname: t\nparams: {K: 2, N_f: 10, N_c: 5, L: 4, R: 1.0e5, p_max: 2e-6}\n")
    sc = load_scenario(path)
    assert sc.params.R == 1.0e5 and sc.params.p_max == 2e-6
