import numpy as np
import pytest

from mlnet.exceptions import DegenerateInputError
from mlnet.harness import (
    ExperimentSpec,
    Setting,
    accuracy,
    aggregate,
    default_spec,
    discrimination_scenarios,
    records_from_csv,
    run_accuracy_sweep,
    run_discrimination,
    run_stat_behavior,
    run_threshold_sensitivity,
    spec_from_mapping,
    write_experiment,
)


def test_accuracy_examples():
    assert accuracy([(3, 5)] * 4, (3, 5)) == 1.0
    assert accuracy([(2, 5)] * 3, (3, 5)) == 0.0
    assert accuracy([(3, 5), (3, 5), (3, 5), (3, 4)], (3, 5)) == 0.75
    with pytest.raises(DegenerateInputError):
        accuracy([], (1, 1))


def test_scenarios_drop_invalid_pairs():
    assert discrimination_scenarios((2, 3)) == [
        ("H0", (2, 3)), ("H1s", (1, 3)), ("H1r", (2, 2)), ("H1b", (1, 2))]
    assert [p for _, p in discrimination_scenarios((1, 2))] == [(1, 2), (1, 1)]


def test_spec_from_mapping():
    spec = spec_from_mapping({"id": "stat-behavior", "n": "100,200", "candidates": "3x5,2:4",
                              "reps": "4", "seed": "9"})
    assert spec.n == (100, 200) and spec.candidates == ((3, 5), (2, 4))
    assert spec.replications == 4 and spec.seed == 9 and spec.L == 20
    with pytest.raises(DegenerateInputError):
        spec_from_mapping({"n": "100"})
    with pytest.raises(DegenerateInputError):
        ExperimentSpec("nonsense")
    with pytest.raises(DegenerateInputError):
        default_spec("accuracy-sweep", rho=(1.5,))


def test_full_grids():
    spec = default_spec("accuracy-sweep", full=True)
    assert spec.replications == 200 and spec.n[-1] == 1000
    assert len(default_spec("threshold-sensitivity").settings()) == 30


def test_stat_behavior_small():
    spec = default_spec("stat-behavior", n=(200,), replications=20, seed=1)
    result = run_stat_behavior(spec)
    means = {(r["k_s0"], r["k_r0"]): r["mean_t_hat"] for r in result.table}
    assert -0.08 <= means[(3, 5)] <= 0.04
    assert 2.7 <= means[(2, 5)] <= 3.8
    # coarser underfits leave more signal
    assert means[(2, 4)] > means[(2, 5)] > means[(3, 4)] > means[(3, 5)]


def test_accuracy_sweep_small():
    spec = default_spec("accuracy-sweep", n=(200,), rho=(0.3,), structures=((1, 1), (2, 4)),
                        replications=20, seed=2)
    result = run_accuracy_sweep(spec)
    acc = {(r["K_s"], r["algorithm"]): r["accuracy"] for r in result.table}
    assert acc[(1, "mldigof")] == 1.0 and acc[(1, "mlrdigof")] == 1.0
    assert abs(acc[(2, "mldigof")] - 0.68) <= 0.15
    assert abs(acc[(2, "mlrdigof")] - 0.95) <= 0.15


def test_discrimination_table_shape():
    spec = default_spec("discrimination", n=(200,), structures=((2, 3),), replications=3)
    table = run_discrimination(spec).table
    assert [r["scenario"] for r in table] == ["H0", "H1s", "H1r", "H1b"]
    for r in table:
        assert 0 <= r["prob_correct"] <= 1
        assert r["t_n"] == pytest.approx(200 ** -0.2)


def test_threshold_settings_share_networks():
    spec = default_spec("threshold-sensitivity", n=(150,), eps=(0.2, 0.5), tau_const=(4.0,),
                        tau_scale=(8.0,), replications=2)
    result = run_threshold_sensitivity(spec)
    assert len(result.table) == 4
    for rec in result.records:
        assert set(rec.chosen) == set(spec.settings())
    with pytest.raises(DegenerateInputError):
        run_accuracy_sweep(spec)


def test_records_roundtrip_and_determinism(tmp_path):
    spec = default_spec("accuracy-sweep", n=(100,), rho=(0.3,), structures=((2, 2),),
                        replications=3, seed=4)
    r1 = run_accuracy_sweep(spec)
    r2 = run_accuracy_sweep(spec, n_jobs=2)
    p1 = write_experiment(r1, tmp_path / "a")
    p2 = write_experiment(r2, tmp_path / "b")
    for key in ("table", "statistics", "choices"):
        assert p1[key].read_bytes() == p2[key].read_bytes()
    recs = records_from_csv(p1["statistics"], p1["choices"])
    again = aggregate(spec, recs)
    for a, b in zip(again, r1.table):
        assert a.keys() == b.keys()
        assert a["accuracy"] == pytest.approx(b["accuracy"], abs=1e-12)


def test_stat_records_roundtrip(tmp_path):
    spec = default_spec("stat-behavior", n=(100,), replications=3, seed=6)
    result = run_stat_behavior(spec)
    paths = write_experiment(result, tmp_path)
    again = aggregate(spec, records_from_csv(paths["statistics"]))
    for a, b in zip(again, result.table):
        assert np.isclose(a["mean_t_hat"], b["mean_t_hat"], rtol=0, atol=1e-12)
        assert np.isclose(a["sd_t_hat"], b["sd_t_hat"], rtol=0, atol=1e-12)


def test_setting_config():
    cfg = Setting("mldigof", "eps", 0.5).config(400)
    assert cfg.t_n == pytest.approx(0.05)
    with pytest.raises(DegenerateInputError):
        Setting("mldigof", "weird", 1.0).config(400)
