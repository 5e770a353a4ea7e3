"""Monte Carlo experiments on planted networks.

Four experiments are supported:

``stat-behavior``
    mean and sd of the statistic for a fixed set of candidate pairs.
``discrimination``
    rate of correct accept/reject decisions at ``t_n`` for the true pair and
    the three one-step underfits.
``accuracy-sweep``
    exact-recovery rate of both selectors over ``(structure, n, rho)``.
``threshold-sensitivity``
    exact-recovery rate as the thresholds vary.

Every replication derives its own seed from the base seed and its grid
coordinates, so tables are reproducible bit for bit and independent of
``n_jobs``.  Both selectors see the same network and the same cached
statistics in each replication.
"""
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from mlnet._rng import derive_seed
from mlnet.exceptions import DegenerateInputError
from mlnet.gof import StatisticEvaluator
from mlnet.io import read_table_csv, write_table_csv
from mlnet.model import GeneratorConfig, simulate
from mlnet.selection import SelectionConfig, level_scan, ratio_scan

__all__ = [
    "EXPERIMENTS",
    "ExperimentSpec",
    "Setting",
    "ReplicationRecord",
    "ExperimentResult",
    "default_spec",
    "spec_from_mapping",
    "accuracy",
    "run_experiment",
    "run_stat_behavior",
    "run_discrimination",
    "run_accuracy_sweep",
    "run_threshold_sensitivity",
    "aggregate",
    "records_from_csv",
    "write_experiment",
]

EXPERIMENTS = ("stat-behavior", "discrimination", "accuracy-sweep", "threshold-sensitivity")


@dataclass(frozen=True)
class Setting:
    """One selector configuration: ``parameter`` is default/eps/tau_const/tau_scale."""

    algorithm: str
    parameter: str = "default"
    value: float = None

    def config(self, n, k_cand=None, seed=0):
        kw = {}
        if self.parameter == "eps":
            kw["t_exponent"] = self.value
        elif self.parameter == "tau_const":
            kw["tau_const"] = self.value
        elif self.parameter == "tau_scale":
            kw["tau_scale"] = self.value
        elif self.parameter != "default":
            raise DegenerateInputError(f"unknown threshold parameter {self.parameter!r}")
        return SelectionConfig.from_parameters(n, k_cand=k_cand, seed=seed, **kw)


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    n: tuple = (200, 400, 600)
    L: int = 15
    rho: tuple = (0.2,)
    structures: tuple = ((3, 5),)
    candidates: tuple = ()
    eps: tuple = ()
    tau_const: tuple = ()
    tau_scale: tuple = ()
    replications: int = 50
    seed: int = 0
    k_cand: int = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DegenerateInputError(f"unknown experiment {self.experiment!r}")
        if self.replications < 1:
            raise DegenerateInputError("replications must be at least 1")
        if self.L < 1:
            raise DegenerateInputError("L must be positive")
        for n in self.n:
            for ks, kr in self.structures:
                GeneratorConfig(n, self.L, ks, kr, min(self.rho) if self.rho else 0.5)
        for r in self.rho:
            if not 0.0 < r < 1.0:
                raise DegenerateInputError(f"rho must lie in (0, 1), got {r}")
        if any(e <= 0 for e in self.eps) or any(t <= 0 for t in self.tau_const + self.tau_scale):
            raise DegenerateInputError("threshold parameters must be positive")

    def settings(self):
        if self.experiment == "accuracy-sweep":
            return (Setting("mldigof"), Setting("mlrdigof"))
        if self.experiment == "threshold-sensitivity":
            return (
                tuple(Setting("mldigof", "eps", v) for v in self.eps)
                + tuple(Setting("mlrdigof", "tau_const", v) for v in self.tau_const)
                + tuple(Setting("mlrdigof", "tau_scale", v) for v in self.tau_scale)
            )
        return ()

    def candidates_for(self, structure):
        if self.experiment == "stat-behavior":
            return self.candidates
        if self.experiment == "discrimination":
            return tuple(pair for _, pair in discrimination_scenarios(structure))
        return ()

    def cells(self):
        return [(n, rho, tuple(s)) for s in self.structures for n in self.n for rho in self.rho]


def default_spec(experiment, full=False, **overrides):
    """Desk-scale grid for an experiment; ``full=True`` gives the full-size grid."""
    if experiment == "stat-behavior":
        spec = ExperimentSpec(
            experiment, n=(200, 400, 600, 800, 1000) if full else (200, 400, 600), L=20,
            rho=(0.2,), structures=((3, 5),), candidates=((3, 5), (2, 5), (3, 4), (2, 4)),
        )
    elif experiment == "discrimination":
        spec = ExperimentSpec(
            experiment, n=(800,) if full else (600,), L=15, rho=(0.2,),
            structures=((2, 3), (2, 4), (3, 2), (3, 4), (3, 5), (4, 3), (4, 5), (5, 4)),
            eps=(0.2,),
        )
    elif experiment == "accuracy-sweep":
        spec = ExperimentSpec(
            experiment, n=(200, 400, 600, 800, 1000) if full else (200, 400, 600), L=15,
            rho=(0.1, 0.2, 0.3, 0.4, 0.5),
            structures=((1, 1), (1, 3), (2, 2), (2, 3), (2, 4), (3, 4), (3, 5), (4, 4), (4, 5)),
        )
    elif experiment == "threshold-sensitivity":
        spec = ExperimentSpec(
            experiment, n=(800,) if full else (600,), L=15, rho=(0.2,), structures=((3, 5),),
            eps=tuple(round(0.1 * i, 1) for i in range(1, 11)),
            tau_const=tuple(range(2, 21, 2)),
            tau_scale=tuple(round(0.5 * i, 1) for i in range(1, 11)),
        )
    else:
        raise DegenerateInputError(f"unknown experiment {experiment!r}")
    if full:
        spec = replace(spec, replications=200)
    return replace(spec, **overrides) if overrides else spec


def discrimination_scenarios(structure):
    """``(scenario, candidate)`` pairs: true model and the one-step underfits."""
    ks, kr = structure
    out = [("H0", (ks, kr)), ("H1s", (ks - 1, kr)), ("H1r", (ks, kr - 1)), ("H1b", (ks - 1, kr - 1))]
    return [(name, pair) for name, pair in out if min(pair) >= 1]


def _as_list(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _parse_pair(token):
    if isinstance(token, (list, tuple)):
        a, b = token
    else:
        a, b = re.split(r"[x:/ ]", str(token).strip("() "), maxsplit=1)
    return (int(a), int(b))


def spec_from_mapping(mapping, full=False):
    """Build an :class:`ExperimentSpec` from an ``exp`` config section.

    Recognized keys: ``id``, ``n``, ``L``, ``rho``, ``structures`` (``3x5,2x4``),
    ``candidates``, ``eps``, ``tau_const``, ``tau_scale``, ``reps``, ``seed``,
    ``k_cand``.  Missing keys fall back to :func:`default_spec`.
    """
    m = dict(mapping)
    if "id" not in m:
        raise DegenerateInputError("experiment config needs exp.id")
    over = {}
    if "n" in m:
        over["n"] = tuple(int(v) for v in _as_list(m["n"]))
    if "L" in m:
        over["L"] = int(m["L"])
    if "rho" in m:
        over["rho"] = tuple(float(v) for v in _as_list(m["rho"]))
    for key in ("structures", "candidates"):
        if key in m:
            over[key] = tuple(_parse_pair(v) for v in _as_list(m[key]))
    for key in ("eps", "tau_const", "tau_scale"):
        if key in m:
            over[key] = tuple(float(v) for v in _as_list(m[key]))
    if "reps" in m:
        over["replications"] = int(m["reps"])
    if "seed" in m:
        over["seed"] = int(m["seed"])
    if "k_cand" in m:
        over["k_cand"] = int(m["k_cand"])
    return default_spec(str(m["id"]), full=full, **over)


@dataclass
class ReplicationRecord:
    n: int
    L: int
    rho: float
    K_s: int
    K_r: int
    rep: int
    seed: int
    statistics: dict = field(default_factory=dict)
    chosen: dict = field(default_factory=dict)
    wall_time: float = 0.0


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    table: list
    records: list


def accuracy(chosen_pairs, truth):
    """Fraction of chosen pairs equal to ``truth``."""
    chosen_pairs = [tuple(p) for p in chosen_pairs]
    if not chosen_pairs:
        raise DegenerateInputError("accuracy of an empty cell is undefined")
    truth = tuple(truth)
    return sum(p == truth for p in chosen_pairs) / len(chosen_pairs)


def _rho_code(rho):
    return int(round(rho * 1_000_000))


def _replicate(task):
    spec, (n, rho, structure), rep = task
    ks, kr = structure
    seed = derive_seed(spec.seed, "replicate", n, spec.L, _rho_code(rho), ks, kr, rep)
    start = time.perf_counter()
    planted = simulate(GeneratorConfig(n, spec.L, ks, kr, rho, seed))
    ev = StatisticEvaluator(planted.network, seed)
    for pair in spec.candidates_for(structure):
        ev.evaluate(*pair)
    chosen = {}
    for setting in spec.settings():
        cfg = setting.config(n, spec.k_cand, seed)
        if setting.algorithm == "mldigof":
            pair, _ = level_scan(ev, cfg.t_n, cfg.k_cand)
        else:
            pair, _ = ratio_scan(ev, cfg.t_n, cfg.tau_n, cfg.k_cand)
        chosen[setting] = tuple(pair)
    stats = {pair: stat.t_hat for pair, stat in ev.cache.items()}
    return ReplicationRecord(n, spec.L, rho, ks, kr, rep, seed, stats, chosen,
                             time.perf_counter() - start)


def _run_records(spec, n_jobs=1):
    tasks = [(spec, cell, rep) for cell in spec.cells() for rep in range(spec.replications)]
    if n_jobs and n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(_replicate, tasks, chunksize=1))
    return [_replicate(t) for t in tasks]


def _cell_records(records):
    cells = {}
    for rec in sorted(records, key=lambda r: (r.K_s, r.K_r, r.n, r.rho, r.rep)):
        cells.setdefault((rec.K_s, rec.K_r, rec.n, rec.rho), []).append(rec)
    return cells


def aggregate(spec, records):
    """Summary table for ``spec`` computed from replication records."""
    rows = []
    for (ks, kr, n, rho), recs in _cell_records(records).items():
        base = {"K_s": ks, "K_r": kr, "n": n, "L": spec.L, "rho": rho, "reps": len(recs)}
        if spec.experiment == "stat-behavior":
            for pair in spec.candidates:
                vals = np.array([r.statistics[tuple(pair)] for r in recs])
                sd = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
                rows.append({**base, "k_s0": pair[0], "k_r0": pair[1],
                             "mean_t_hat": float(vals.mean()), "sd_t_hat": sd})
        elif spec.experiment == "discrimination":
            eps = spec.eps[0] if spec.eps else 0.2
            t_n = n ** (-eps)
            for scenario, pair in discrimination_scenarios((ks, kr)):
                vals = np.array([r.statistics[tuple(pair)] for r in recs])
                correct = vals < t_n if scenario == "H0" else vals >= t_n
                p = float(correct.mean())
                rows.append({**base, "scenario": scenario, "k_s0": pair[0], "k_r0": pair[1],
                             "t_n": t_n, "prob_correct": p,
                             "std_error": math.sqrt(p * (1 - p) / len(recs))})
        else:
            for setting in spec.settings():
                acc = accuracy([r.chosen[setting] for r in recs], (ks, kr))
                rows.append({**base, "algorithm": setting.algorithm,
                             "parameter": setting.parameter, "value": setting.value,
                             "accuracy": acc})
    return rows


def run_experiment(spec, n_jobs=1):
    records = _run_records(spec, n_jobs)
    return ExperimentResult(spec, aggregate(spec, records), records)


def run_stat_behavior(spec, n_jobs=1):
    """Mean/sd of the statistic per ``(n, candidate)``."""
    return run_experiment(_expect(spec, "stat-behavior"), n_jobs)


def run_discrimination(spec, n_jobs=1):
    """Correct-decision rates at ``t_n = n**-eps`` (``eps`` defaults to 0.2)."""
    return run_experiment(_expect(spec, "discrimination"), n_jobs)


def run_accuracy_sweep(spec, n_jobs=1):
    """Accuracy of both selectors with default thresholds, paired by replication."""
    return run_experiment(_expect(spec, "accuracy-sweep"), n_jobs)


def run_threshold_sensitivity(spec, n_jobs=1):
    """Accuracy per threshold setting on shared networks."""
    return run_experiment(_expect(spec, "threshold-sensitivity"), n_jobs)


def _expect(spec, experiment):
    if spec.experiment != experiment:
        raise DegenerateInputError(f"expected a {experiment} spec, got {spec.experiment}")
    return spec


_REC_KEYS = ("n", "L", "rho", "K_s", "K_r", "rep", "seed")


def _statistic_rows(records):
    for r in records:
        for (a, b), t in sorted(r.statistics.items()):
            yield {**{k: getattr(r, k) for k in _REC_KEYS}, "k_s0": a, "k_r0": b, "t_hat": t}


def _choice_rows(records):
    for r in records:
        for s, (a, b) in r.chosen.items():
            yield {**{k: getattr(r, k) for k in _REC_KEYS}, "algorithm": s.algorithm,
                   "parameter": s.parameter, "value": s.value, "chosen_k_s": a, "chosen_k_r": b}


def write_experiment(result, out_dir):
    """Write ``<id>_table.csv``, ``<id>_statistics.csv``, ``<id>_choices.csv``
    and ``<id>_timing.csv`` into ``out_dir``; returns the paths written.

    Everything except the timing file is deterministic given the spec.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    exp = result.spec.experiment
    paths = {
        "table": out / f"{exp}_table.csv",
        "statistics": out / f"{exp}_statistics.csv",
        "choices": out / f"{exp}_choices.csv",
        "timing": out / f"{exp}_timing.csv",
    }
    write_table_csv(result.table, paths["table"])
    write_table_csv(_statistic_rows(result.records), paths["statistics"],
                    _REC_KEYS + ("k_s0", "k_r0", "t_hat"))
    write_table_csv(_choice_rows(result.records), paths["choices"],
                    _REC_KEYS + ("algorithm", "parameter", "value", "chosen_k_s", "chosen_k_r"))
    write_table_csv(({**{k: getattr(r, k) for k in _REC_KEYS}, "wall_time": r.wall_time}
                     for r in result.records), paths["timing"], _REC_KEYS + ("wall_time",))
    return paths


def records_from_csv(statistics_path, choices_path=None):
    """Rebuild :class:`ReplicationRecord` objects from persisted CSVs."""
    recs = {}

    def get(row):
        key = tuple(row[k] for k in _REC_KEYS)
        if key not in recs:
            recs[key] = ReplicationRecord(int(row["n"]), int(row["L"]), float(row["rho"]),
                                          int(row["K_s"]), int(row["K_r"]), int(row["rep"]),
                                          int(row["seed"]))
        return recs[key]

    for row in read_table_csv(statistics_path):
        get(row).statistics[(int(row["k_s0"]), int(row["k_r0"]))] = float(row["t_hat"])
    if choices_path is not None:
        for row in read_table_csv(choices_path):
            value = float(row["value"]) if row["value"] != "" else None
            setting = Setting(row["algorithm"], row["parameter"], value)
            get(row).chosen[setting] = (int(row["chosen_k_s"]), int(row["chosen_k_r"]))
    return list(recs.values())
