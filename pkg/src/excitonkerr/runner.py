"""Execute scenarios and write plot-ready tables, sidecars and discrepancy reports."""
from __future__ import annotations

import json
import os
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analytic import analytic_series
from .config import ScenarioConfig, validate_config
from .dynamics import evolve_closed, iter_lindblad
from .errors import ConfigError
from .fock import coherent_amplitudes, coherent_state, fock_state
from .series import WITNESS_COLUMNS, TimeGrid, WitnessSeries
from .witnesses import series_from_states, witness_series

COMPARE_WINDOW = 0.3
COMPARE_BUDGET = 1e-2
COMPARED_COLUMNS = tuple(c for c in WITNESS_COLUMNS if not c.startswith("g2"))


@dataclass
class JobResult:
    name: str
    files: list[Path] = field(default_factory=list)
    series: dict[str, WitnessSeries] = field(default_factory=dict)
    report: Optional[dict] = None


def with_overrides(config: ScenarioConfig, grid=None, dims=None, out=None) -> ScenarioConfig:
    """Apply the --grid / --dims / --out command-line overrides."""
    data = config.model_dump(exclude_unset=True)
    if grid is not None:
        data["grid"] = {"t_max": float(grid[0]), "n_points": int(grid[1])}
    if dims is not None:
        data["hilbert"] = {"dim_a": int(dims[0]), "dim_c": int(dims[1])}
    if out is not None:
        data["output"] = {**data.get("output", {}), "dir": str(out)}
    return validate_config(data)


def _initial_state(job: ScenarioConfig):
    hilbert = job.hilbert.build()
    init = job.initial
    if init.kind == "fock":
        return fock_state(hilbert, init.n_a, init.n_c)
    amps = init.amplitudes()
    return coherent_state(hilbert, amps.alpha, amps.beta)


def _initial_tail(job: ScenarioConfig) -> float:
    if job.initial.kind != "coherent":
        return 0.0
    amps = job.initial.amplitudes()
    _, ta = coherent_amplitudes(complex(amps.alpha), job.hilbert.dim_a)
    _, tc = coherent_amplitudes(amps.beta, job.hilbert.dim_c)
    return max(ta, tc)


def _analytic(job: ScenarioConfig, grid: TimeGrid, caught: list) -> WitnessSeries:
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        series = analytic_series(grid, job.params.build(), job.initial.amplitudes())
    caught.extend(str(x.message) for x in w)
    return series


def _closed(job: ScenarioConfig, grid: TimeGrid) -> WitnessSeries:
    traj = evolve_closed(_initial_state(job), job.params.build(), grid)
    return witness_series(traj)


def _open(job: ScenarioConfig, grid: TimeGrid) -> WitnessSeries:
    leak = []

    def states():
        for _, state, top in iter_lindblad(
            _initial_state(job), job.params.build(), grid, max_step=job.integrator.max_step
        ):
            leak.append(top)
            yield state

    series = series_from_states(grid, states(), "numeric-open")
    series.meta["max_leakage"] = float(max(leak))
    return series


def format_float(x: float) -> str:
    # shortest round-trip representation
    return repr(float(x))


def series_to_csv(series: WitnessSeries) -> str:
    names = series.column_names()
    lines = [",".join(["gt", *names])]
    cols = [series[n] for n in names]
    for i, t in enumerate(series.t):
        lines.append(",".join([format_float(t), *(format_float(c[i]) for c in cols)]))
    return "\n".join(lines) + "\n"


def read_csv(path, source: str = "analytic") -> WitnessSeries:
    """Load a table written by ``series_to_csv``.

    The default source tag is the lenient one (no variance positivity check),
    since extrapolated analytic tables may legitimately hold negative values.
    """
    path = Path(path)
    header, *rows = path.read_text().splitlines()
    names = header.split(",")
    data = np.array([[float(v) for v in r.split(",")] for r in rows])
    cols = {n: data[:, k] for k, n in enumerate(names) if n != "gt"}
    return WitnessSeries(TimeGrid(data[:, 0]), cols, source)


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def discrepancy_report(analytic: WitnessSeries, numeric: WitnessSeries, window: float = COMPARE_WINDOW,
                       budget: float = COMPARE_BUDGET) -> dict:
    """Per-column max |analytic - numeric| over gt <= window, flagging columns above budget."""
    if not np.array_equal(analytic.t, numeric.t):
        raise ValueError("analytic and numeric series must share a grid")
    mask = analytic.t <= window * (1 + 1e-12)
    t = analytic.t[mask]
    columns = {}
    for name in COMPARED_COLUMNS:
        if name not in analytic or name not in numeric:
            continue
        diff = np.abs(analytic[name][mask] - numeric[name][mask])
        entry = {
            "max_abs_diff": float(np.max(diff)),
            "at_gt": float(t[int(np.argmax(diff))]),
            "budget": budget,
            "exceeds_budget": bool(np.max(diff) > budget),
        }
        for probe in (0.05, 0.25):
            if t[-1] >= probe:
                k = int(np.argmin(np.abs(t - probe)))
                entry[f"diff_at_{probe}"] = float(diff[k])
        columns[name] = entry
    return {
        "window": [0.0, float(t[-1])],
        "columns": columns,
        "flagged": sorted(n for n, e in columns.items() if e["exceeds_budget"]),
    }


def report_summary(name: str, report: dict) -> str:
    lines = [f"{name}: analytic vs numeric-closed over gt in [0, {report['window'][1]:g}]"]
    for col, e in report["columns"].items():
        flag = "EXCEEDS" if e["exceeds_budget"] else "ok"
        lines.append(f"  {col:<10} max|diff| = {e['max_abs_diff']:.3e} at gt = {e['at_gt']:.4g}  [{flag}]")
    lines.append(f"  flagged: {', '.join(report['flagged']) or 'none'}")
    return "\n".join(lines)


def _meta(job: ScenarioConfig, series: dict, caught: list) -> dict:
    leak = {k: s.meta.get("max_leakage") for k, s in series.items() if "max_leakage" in s.meta}
    return {
        "version": __version__,
        "config": job.to_json_dict(),
        "sources": {k: s.source for k, s in series.items()},
        "diagnostics": {
            "initial_tail_probability": _initial_tail(job),
            "max_top_level_occupation": leak,
            "warnings": sorted(set(caught)),
        },
        "notes": list(job.notes),
    }


def run_job(job: ScenarioConfig, compare_only: bool = False) -> JobResult:
    """Run one sweep-free scenario and write its files into ``job.output.dir``."""
    out = Path(job.output.dir)
    grid = job.grid.build()
    caught: list[str] = []
    series: dict[str, WitnessSeries] = {}
    pipeline = "compare" if compare_only else job.pipeline
    if pipeline == "analytic":
        series["analytic"] = _analytic(job, grid, caught)
    elif pipeline == "closed":
        series["closed"] = _closed(job, grid)
    elif pipeline == "open":
        series["open"] = _open(job, grid)
    else:
        if job.initial.kind != "coherent":
            raise ConfigError("compare requires a coherent initial state")
        series["analytic"] = _analytic(job, grid, caught)
        series["closed"] = _closed(job, grid)

    result = JobResult(job.name, series=series)
    if pipeline == "compare":
        result.report = discrepancy_report(series["analytic"], series["closed"])
        path = out / f"{job.name}.report.json"
        atomic_write(path, _dump_json({"name": job.name, **result.report}))
        result.files.append(path)
    if not compare_only:
        for key, s in series.items():
            suffix = ".analytic.csv" if (pipeline == "compare" and key == "analytic") else ".csv"
            path = out / f"{job.name}{suffix}"
            atomic_write(path, series_to_csv(s))
            result.files.append(path)
        path = out / f"{job.name}.meta.json"
        atomic_write(path, _dump_json(_meta(job, series, caught)))
        result.files.append(path)
    return result


def _run_all(config: ScenarioConfig, compare_only: bool, workers: int) -> list[JobResult]:
    jobs = config.jobs()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_job, jobs, [compare_only] * len(jobs)))
    return [run_job(j, compare_only) for j in jobs]


def run(config: ScenarioConfig, workers: int = 1) -> list[JobResult]:
    """Run every job of a scenario (one per sweep entry)."""
    return _run_all(config, False, workers)


def compare(config: ScenarioConfig, workers: int = 1) -> list[JobResult]:
    """Analytic vs exact closed evolution on the config's grid; writes ``<name>.report.json``."""
    return _run_all(config, True, workers)

