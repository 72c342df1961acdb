"""Seeded Monte-Carlo driver: realizations x sweep points x scheme/mode pairs.

Every (sweep point, realization) cell samples one channel realization and
runs all configured schemes on it.  Cells are independent, so they may run
in worker processes; results are sorted before aggregation or output, so
the emitted files do not depend on the worker count.
"""

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from maccfd.baselines import GridSpec, brute_force, mode_adapter, run_antenna_selection, run_apo, run_fpa
from maccfd.channel import sample_geometry
from maccfd.config import ScenarioConfig
from maccfd.ppso import cumulative_error_curve, run_ppso
from maccfd.seeding import MASK64, child_seed, mix64

log = logging.getLogger(__name__)

LONG_HEADER = ["sweep_var", "sweep_value", "scheme", "mode", "realization", "fitness",
               "si_gain_aa", "si_gain_bb", "soi_gain_ab", "soi_gain_ba", "evaluations", "seed"]
AGG_HEADER = ["sweep_var", "sweep_value", "scheme", "mode", "count",
              "fitness_mean", "fitness_stderr", "si_gain_mean", "si_gain_stderr",
              "soi_gain_mean", "soi_gain_stderr", "evaluations_mean"]
TRACE_HEADER = ["sweep_var", "sweep_value", "scheme", "mode", "iteration", "count",
                "fitness_mean", "fitness_stderr", "error_mean", "error_stderr"]

PPSO_TAG = 1
REFERENCE_TAG = 1000


def derive_seed(master_seed: int, sweep_index: int, realization_index: int) -> int:
    """64-bit channel seed of one (sweep point, realization) cell.

    Injective for indices below 2**32: the pair is packed into one 64-bit
    key and pushed through two SplitMix64 rounds keyed by the master seed,
    and each step is a bijection.  The scheme never enters the seed, so
    every scheme in a cell sees the same channel.
    """
    if sweep_index < 0 or realization_index < 0:
        raise ValueError("indices must be non-negative")
    if sweep_index >= 2 ** 32 or realization_index >= 2 ** 32:
        raise ValueError("indices must be below 2**32")
    key = (sweep_index << 32) | realization_index
    return mix64(mix64(master_seed & MASK64) ^ key)


@dataclass
class Row:
    sweep_var: str
    sweep_value: float
    scheme: str
    mode: str
    realization: int
    fitness: float
    si_gain_aa: float
    si_gain_bb: float
    soi_gain_ab: float
    soi_gain_ba: float
    evaluations: int
    seed: int
    wall_time: float = 0.0
    layout: Optional[Tuple[float, ...]] = None
    trace: Optional[List[float]] = None
    error_curve: Optional[List[float]] = None
    f_star: Optional[float] = None

    @property
    def sort_key(self):
        return (self.sweep_value, self.scheme, self.mode, self.realization)

    @property
    def si_gain(self) -> float:
        return 0.5 * (self.si_gain_aa + self.si_gain_bb)

    @property
    def soi_gain(self) -> float:
        return 0.5 * (self.soi_gain_ab + self.soi_gain_ba)


@dataclass
class Aggregate:
    sweep_var: str
    sweep_value: float
    scheme: str
    mode: str
    count: int
    fitness_mean: float
    fitness_stderr: float
    si_gain_mean: float
    si_gain_stderr: float
    soi_gain_mean: float
    soi_gain_stderr: float
    evaluations_mean: float


def mean_stderr(values) -> Tuple[float, float]:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _groups(rows: List[Row]) -> Dict[tuple, List[Row]]:
    groups: Dict[tuple, List[Row]] = {}
    for row in sorted(rows, key=lambda r: r.sort_key):
        groups.setdefault((row.sweep_var, row.sweep_value, row.scheme, row.mode), []).append(row)
    return groups


def aggregate(rows: List[Row]) -> List[Aggregate]:
    out = []
    for (var, value, scheme, mode), grp in _groups(rows).items():
        fit = mean_stderr([r.fitness for r in grp])
        si = mean_stderr([r.si_gain for r in grp])
        soi = mean_stderr([r.soi_gain for r in grp])
        evals = float(np.mean([r.evaluations for r in grp]))
        out.append(Aggregate(var, value, scheme, mode, len(grp), *fit, *si, *soi, evals))
    return out


@dataclass
class ExperimentResult:
    config: ScenarioConfig
    rows: List[Row] = field(default_factory=list)

    def sorted_rows(self) -> List[Row]:
        return sorted(self.rows, key=lambda r: r.sort_key)

    def aggregates(self) -> List[Aggregate]:
        return aggregate(self.rows)

    def select(self, scheme: str, mode: str, sweep_value: Optional[float] = None) -> List[Row]:
        return [r for r in self.sorted_rows()
                if r.scheme == scheme and r.mode == mode
                and (sweep_value is None or r.sweep_value == sweep_value)]

    def trace_aggregates(self) -> List[dict]:
        """Per-iteration mean global-best fitness (and cumulative error) of PPSO rows."""
        out = []
        for (var, value, scheme, mode), grp in _groups(self.rows).items():
            grp = [r for r in grp if r.trace is not None]
            if not grp:
                continue
            traces = np.array([r.trace for r in grp])
            errors = None
            if all(r.error_curve is not None for r in grp):
                errors = np.array([r.error_curve for r in grp])
            for k in range(traces.shape[1]):
                fm, fs = mean_stderr(traces[:, k])
                em, es = mean_stderr(errors[:, k]) if errors is not None else (math.nan, math.nan)
                out.append({"sweep_var": var, "sweep_value": value, "scheme": scheme, "mode": mode,
                            "iteration": k, "count": len(grp), "fitness_mean": fm,
                            "fitness_stderr": fs, "error_mean": em, "error_stderr": es})
        return out


# --- running -------------------------------------------------------------------

def run_scheme(scheme: str, mode: str, chan, params, cfg: ScenarioConfig, cell_seed: int):
    """Run one scheme on one realization; returns (BaselineResult-like, evaluator, extras)."""
    ev = mode_adapter(mode, chan, params)
    d = params.region_size_d
    extras = {}
    if scheme == "MA-PPSO":
        pcfg = replace(cfg.ppso, region_size_d=d, seed=child_seed(cell_seed, PPSO_TAG))
        layout, trace = run_ppso(ev, pcfg)
        extras["trace"] = trace.values
        fitness, evaluations = trace.values[-1], trace.evaluation_count
        if cfg.record_error:
            f_star = reference_optimum(chan, params, cfg, cell_seed, mode)
            extras["f_star"] = f_star
            extras["error_curve"] = cumulative_error_curve(trace, f_star).tolist()
    else:
        if scheme == "MA-APO":
            res = run_apo(ev, GridSpec(cfg.apo.spacing, d), cfg.apo.max_rounds, cfg.apo.tol)
        elif scheme == "AS":
            res = run_antenna_selection(ev, cfg.as_spacing, d, cfg.apo.max_rounds, cfg.apo.tol)
        elif scheme == "FPA":
            res = run_fpa(ev)
        elif scheme == "BRUTE":
            n = cfg.brute_points_per_axis
            spacing = d / (n - 1) if n > 1 and d > 0 else math.inf
            res = brute_force(ev, GridSpec(spacing, d))
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        layout, fitness, evaluations = res.layout, res.fitness, res.evaluations
    return layout, float(fitness), int(evaluations), ev, extras


def reference_optimum(chan, params, cfg: ScenarioConfig, cell_seed: int, mode: str) -> float:
    """Best final fitness over ``cfg.reference_runs`` independently seeded PPSO runs."""
    best = -math.inf
    for r in range(cfg.reference_runs):
        ev = mode_adapter(mode, chan, params)
        pcfg = replace(cfg.ppso, region_size_d=params.region_size_d,
                       seed=child_seed(cell_seed, REFERENCE_TAG + r))
        _, trace = run_ppso(ev, pcfg)
        best = max(best, trace.values[-1])
    return best


def run_cell(cfg: ScenarioConfig, sweep_index: int, sweep_value: float, params, realization: int) -> List[Row]:
    seed = derive_seed(cfg.master_seed, 0 if cfg.common_realizations else sweep_index, realization)
    chan = sample_geometry(seed, params)
    rows = []
    for scheme, mode in cfg.schemes:
        start = time.perf_counter()
        layout, fitness, evaluations, ev, extras = run_scheme(scheme, mode, chan, params, cfg, seed)
        g = ev.gains(layout)
        rows.append(Row(
            sweep_var=cfg.sweep, sweep_value=sweep_value, scheme=scheme, mode=mode,
            realization=realization, fitness=fitness,
            si_gain_aa=float(g[("A", "A")][0]), si_gain_bb=float(g[("B", "B")][0]),
            soi_gain_ab=float(g[("A", "B")][0]), soi_gain_ba=float(g[("B", "A")][0]),
            evaluations=evaluations, seed=seed, wall_time=time.perf_counter() - start,
            layout=tuple(layout.to_vector().tolist()),
            trace=extras.get("trace"), error_curve=extras.get("error_curve"),
            f_star=extras.get("f_star"),
        ))
    return rows


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(cfg: ScenarioConfig, workers: int = 1) -> ExperimentResult:
    """Run every cell of ``cfg``; output is identical for any ``workers``."""
    tasks = [(cfg, i, value, params, j)
             for i, value, params in cfg.sweep_points()
             for j in range(cfg.num_realizations)]
    log.info("running %d cells x %d schemes on %d worker(s)", len(tasks), len(cfg.schemes), workers)
    rows: List[Row] = []
    if workers <= 1:
        for task in tasks:
            rows.extend(run_cell(*task))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for cell_rows in pool.map(_run_cell_args, tasks, chunksize=1):
                rows.extend(cell_rows)
    rows.sort(key=lambda r: r.sort_key)
    return ExperimentResult(cfg, rows)


# --- CSV output ----------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


def _write(path: Path, header, records) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for rec in records:
                writer.writerow([fmt(rec[h]) for h in header])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def sibling(path, suffix: str) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_{suffix}{path.suffix or '.csv'}")


def emit_csv(result: ExperimentResult, path) -> Dict[str, Path]:
    """Write the long CSV, ``*_agg.csv`` and (when PPSO ran) ``*_trace.csv``."""
    path = Path(path)
    rows = result.sorted_rows()
    _write(path, LONG_HEADER, ({h: getattr(r, h) for h in LONG_HEADER} for r in rows))
    agg_path = sibling(path, "agg")
    _write(agg_path, AGG_HEADER, (vars(a) for a in aggregate(rows)))
    out = {"long": path, "agg": agg_path}
    traces = result.trace_aggregates()
    if traces:
        trace_path = sibling(path, "trace")
        _write(trace_path, TRACE_HEADER, traces)
        out["trace"] = trace_path
    return out


_INT_COLUMNS = {"realization", "evaluations", "seed", "count", "iteration"}
_STR_COLUMNS = {"sweep_var", "scheme", "mode"}


def read_csv(path) -> List[dict]:
    """Parse any of the emitted CSVs back into typed dicts."""
    with open(path, newline="", encoding="utf-8") as fh:
        records = list(csv.DictReader(fh))
    out = []
    for rec in records:
        typed = {}
        for k, v in rec.items():
            if k in _STR_COLUMNS:
                typed[k] = v
            elif k in _INT_COLUMNS:
                typed[k] = int(v)
            else:
                typed[k] = float(v)
        out.append(typed)
    return out


def rows_from_csv(path) -> List[Row]:
    return [Row(**rec) for rec in read_csv(path)]
