import csv
import json
import os

import numpy as np
import pytest

from graphon_interference import harness
from graphon_interference.estimands import population_estimands
from graphon_interference.harness import (
    CSV_COLUMNS,
    HarnessConfigError,
    RunConfig,
    config_fingerprint,
    histogram_export,
    metadata_path,
    mse_sweep,
    run_replications,
    stream_seed,
    write_histogram,
)
from graphon_interference.presets import build_outcome


def small_config(**overrides):
    base = {
        "graphon": "figure2_constant",
        "outcome": "figure2_constant",
        "pi": 0.7,
        "estimators": ["ht_dir", "haj_dir", "unb_ind"],
        "replicates": 4,
        "n": 250,
        "seed": 7,
    }
    base.update(overrides)
    return RunConfig.from_dict(base)


def test_determinism_bit_identical():
    a = run_replications(small_config())
    b = run_replications(small_config())
    assert a.rows == b.rows
    assert a.metadata["fingerprint"] == b.metadata["fingerprint"]


def test_worker_invariance(tmp_path):
    a = run_replications(small_config())
    b = run_replications(small_config(workers=2))
    assert a.rows == b.rows
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write(str(pa))
    b.write(str(pb))
    assert pa.read_bytes() == pb.read_bytes()


def test_worker_env_override(monkeypatch):
    monkeypatch.setenv(harness.WORKERS_ENV, "2")
    a = run_replications(small_config())
    monkeypatch.delenv(harness.WORKERS_ENV)
    b = run_replications(small_config())
    assert a.rows == b.rows


def test_fingerprint_semantics():
    base = small_config()
    assert config_fingerprint(small_config()) == config_fingerprint(base)
    # execution knobs do not change the fingerprint
    assert config_fingerprint(small_config(workers=8)) == config_fingerprint(base)
    # semantic fields do
    assert config_fingerprint(small_config(seed=8)) != config_fingerprint(base)
    assert config_fingerprint(small_config(pi=0.6)) != config_fingerprint(base)
    assert config_fingerprint(small_config(replicates=5)) != config_fingerprint(base)


def test_row_schema_and_counts():
    table = run_replications(small_config())
    assert len(table.rows) == 4 * 3  # R x |estimators|
    reps = {r[0] for r in table.rows}
    names = {r[1] for r in table.rows}
    assert reps == {0, 1, 2, 3}
    assert names == {"ht_dir", "haj_dir", "unb_ind"}
    for row in table.rows:
        assert len(row) == len(CSV_COLUMNS)
        assert row[3] == 250 and row[4] == 1.0 and row[5] == 7


def test_csv_and_metadata_files(tmp_path):
    table = run_replications(small_config())
    path = str(tmp_path / "results.csv")
    table.write(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(CSV_COLUMNS)
    assert len(rows) == 1 + len(table.rows)
    meta = json.loads(open(metadata_path(path)).read())
    assert meta["fingerprint"] == table.metadata["fingerprint"]
    assert "estimands" in meta["theory"]
    assert "overlays" in meta["theory"]


def test_fixed_network_mode():
    cfg = small_config(fixed_network=True, estimators=["ht_dir"], replicates=3)
    table = run_replications(cfg)
    values = table.estimates("ht_dir")
    assert len(set(values)) == 3  # fresh W each replicate still varies


def test_invalid_configs():
    with pytest.raises(HarnessConfigError):
        small_config(estimators=["nope"]).validate()
    with pytest.raises(HarnessConfigError):
        small_config(replicates=0).validate()
    with pytest.raises(HarnessConfigError):
        RunConfig.from_dict(
            {
                "graphon": "figure2_constant",
                "outcome": "figure2_constant",
                "pi": 0.7,
                "estimators": ["ht_dir"],
                "replicates": 1,
            }
        ).validate()


def test_feasibility_checked_before_work():
    from graphon_interference.graphons import FeasibilityError

    cfg = small_config(n=200_000, replicates=1, estimators=["ht_dir"])
    with pytest.raises(FeasibilityError):
        run_replications(cfg)


def test_stream_seeds_distinct():
    seen = {
        stream_seed(1, g, r, s)
        for g in range(3)
        for r in range(3)
        for s in ("graph", "treat", "noise", "solver")
    }
    assert len(seen) == 36


def test_histogram_export_roundtrip(tmp_path):
    table = run_replications(small_config(replicates=30, estimators=["ht_dir"]))
    rows, meta = histogram_export(table, "ht_dir", bins=8)
    assert sum(r[2] for r in rows) == 30  # bin integral = R
    assert meta["overlay"] is not None
    assert meta["overlay"]["sd"] > meta["overlay"]["sd_naive"]
    path = str(tmp_path / "hist.csv")
    write_histogram(table, "ht_dir", path, bins=8)
    meta_disk = json.loads(open(metadata_path(path)).read())
    assert meta_disk["overlay"] == meta["overlay"]


def test_histogram_empty_filter_error():
    table = run_replications(small_config())
    with pytest.raises(ValueError):
        histogram_export(table, "pc_ind")


def test_overlay_matches_theory_prediction():
    from graphon_interference.theory import direct_clt
    from graphon_interference.presets import build_graphon

    cfg = small_config()
    table = run_replications(cfg)
    overlay = table.metadata["theory"]["overlays"]["ht_dir"]
    spec = build_graphon(cfg.graphon)
    model = build_outcome(cfg.outcome, pi=cfg.pi)
    pred = direct_clt(spec, model, cfg.pi)
    assert overlay["sd"] == pytest.approx(
        np.sqrt(pred.variance("ht", "population") / cfg.n), rel=1e-12
    )


def test_mse_sweep_deterministic_estimator_zero_mse(monkeypatch):
    # a fake estimator returning tau_ind exactly must have zero MSE everywhere
    cfg = RunConfig.from_dict(
        {
            "graphon": "figure2_constant",
            "outcome": "figure2_constant",
            "pi": 0.7,
            "estimators": ["vhat"],
            "replicates": 3,
            "n_grid": [100, 200],
            "seed": 1,
        }
    )
    target = population_estimands(None, build_outcome(cfg.outcome, pi=cfg.pi), cfg.pi).tau_ind

    def fake_compute(spec, net, realization, config, solver_seed):
        from graphon_interference.estimators import EstimateRecord

        return [EstimateRecord("vhat", target)]

    monkeypatch.setattr(harness, "_compute_estimates", fake_compute)
    result = mse_sweep(cfg)
    for row in result.points:
        assert row[3] == 0.0  # mse column
    assert np.isnan(result.slope("vhat"))


def test_mse_sweep_slope_of_exact_power_law(monkeypatch):
    # estimates placed exactly on tau_ind + n^{-1/2}: slope must be -1
    cfg = RunConfig.from_dict(
        {
            "graphon": "figure2_constant",
            "outcome": "figure2_constant",
            "pi": 0.7,
            "estimators": ["vhat"],
            "replicates": 2,
            "n_grid": [100, 400, 1600],
            "seed": 1,
        }
    )
    target = population_estimands(None, build_outcome(cfg.outcome, pi=cfg.pi), cfg.pi).tau_ind

    def fake_compute(spec, net, realization, config, solver_seed):
        from graphon_interference.estimators import EstimateRecord

        return [EstimateRecord("vhat", target + net.n ** (-0.5))]

    monkeypatch.setattr(harness, "_compute_estimates", fake_compute)
    result = mse_sweep(cfg)
    assert result.slope("vhat") == pytest.approx(-1.0, abs=1e-9)


def test_mse_sweep_targets_by_effect_type(monkeypatch):
    # direct estimators are scored against tau_dir, not tau_ind
    cfg = RunConfig.from_dict(
        {
            "graphon": "figure2_constant",
            "outcome": "figure2_constant",
            "pi": 0.7,
            "estimators": ["ht_dir"],
            "replicates": 2,
            "n_grid": [100, 200],
            "seed": 1,
        }
    )
    pop = population_estimands(None, build_outcome(cfg.outcome, pi=cfg.pi), cfg.pi)

    def fake_compute(spec, net, realization, config, solver_seed):
        from graphon_interference.estimators import EstimateRecord

        return [EstimateRecord("ht_dir", pop.tau_dir)]

    monkeypatch.setattr(harness, "_compute_estimates", fake_compute)
    result = mse_sweep(cfg)
    assert all(row[3] == 0.0 for row in result.points)
    assert result.metadata["targets"]["ht_dir"] == pop.tau_dir


def test_mse_sweep_files(tmp_path):
    cfg = RunConfig.from_dict(
        {
            "graphon": "appendix_a_6",
            "outcome": "appendix_a_6",
            "pi": 0.5,
            "estimators": ["unb_ind"],
            "replicates": 3,
            "n_grid": [150, 300],
            "sparsity": {"form": "power", "exponent": 0.2},
            "seed": 3,
        }
    )
    result = mse_sweep(cfg)
    path = str(tmp_path / "sweep.csv")
    result.write(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(harness.SWEEP_COLUMNS)
    assert len(rows) == 1 + len(result.points)
    assert os.path.exists(str(tmp_path / "sweep.slopes.csv"))
    meta = json.loads(open(metadata_path(path)).read())
    assert "target_tau_ind" in meta
