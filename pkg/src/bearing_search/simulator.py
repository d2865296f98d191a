"""Closed-loop episodes, beta sweeps and trace I/O.

The harness owns the ground truth: it places the target, measures, computes
true ranges and errors, and moves the vehicle. The controller only receives
bearings plus the pose (global mode) or the heading (vehicle-frame mode).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, Iterable, List, Optional, Sequence

from . import controller as ctl
from .controller import ControllerConfig, Mode
from .errors import ControllerFault, InvalidInput
from .geometry import Point, Pose2D, as_point, distance, global_to_local
from .sensing import measure_global, measure_local
from .vehicle import dubins_step

DEFAULT_MAX_STEPS = 4000


@dataclass(frozen=True)
class Scenario:
    """Initial pose, true target, controller and stopping rule of one episode."""

    p0: Point = (0.0, 0.0)
    theta0: float = 0.0
    p_T: Point = (100.0, 100.0)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    max_steps: int = DEFAULT_MAX_STEPS
    terminal_range_factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p0", as_point(self.p0))
        object.__setattr__(self, "p_T", as_point(self.p_T))
        if not math.isfinite(self.theta0):
            raise InvalidInput(f"theta0 must be finite, got {self.theta0!r}")
        if isinstance(self.max_steps, bool) or int(self.max_steps) != self.max_steps:
            raise InvalidInput(f"max_steps must be an integer, got {self.max_steps!r}")
        if self.max_steps < 1:
            raise InvalidInput(f"max_steps must be >= 1, got {self.max_steps}")
        if not (math.isfinite(self.terminal_range_factor) and self.terminal_range_factor > 0):
            raise InvalidInput(
                f"terminal_range_factor must be > 0, got {self.terminal_range_factor!r}"
            )

    @property
    def terminal_range(self) -> float:
        return self.terminal_range_factor * self.controller.vehicle.step_length

    def with_beta(self, beta: float) -> "Scenario":
        return replace(self, controller=replace(self.controller, beta=float(beta)))

    def with_seed(self, seed: int) -> "Scenario":
        noise = replace(self.controller.noise, seed=int(seed))
        return replace(self, controller=replace(self.controller, noise=noise))


@dataclass(frozen=True)
class StepRecord:
    k: int
    t: float
    x: float
    y: float
    theta: float
    omega: float
    measurement: float
    p_hat_x: float
    p_hat_y: float
    e_est: float
    r_hat: float
    r_true: float
    v_r_star: float
    beta_used: float
    f_at_star: float


TRACE_COLUMNS = tuple(f.name for f in fields(StepRecord))


@dataclass(frozen=True)
class TraceSummary:
    terminated: bool
    search_time: float
    final_e_est: float
    final_r_true: float


@dataclass
class SimulationTrace:
    """Per-step records of one episode plus its summary.

    ``search_time`` is the time of the last record; it is the search time
    proper when ``terminated`` and the censoring time otherwise.
    """

    h: float
    records: List[StepRecord]
    summary: TraceSummary

    def column(self, name: str) -> List[float]:
        return [getattr(r, name) for r in self.records]


def _summarise(records: List[StepRecord], h: float, terminated: bool) -> TraceSummary:
    last = records[-1]
    return TraceSummary(
        terminated=terminated,
        search_time=last.k * h,
        final_e_est=last.e_est,
        final_r_true=last.r_true,
    )


def run(scenario: Scenario) -> SimulationTrace:
    """Run one closed-loop episode.

    Stops at the first step whose true range is below the terminal range, or
    after ``max_steps`` records.

    Raises:
        ControllerFault: with ``exc.trace`` holding the partial trace.
    """
    cfg = scenario.controller
    params = cfg.vehicle
    h = params.h
    p_T = scenario.p_T
    r_term = scenario.terminal_range
    local = cfg.mode is Mode.LOCAL_NO_GPS
    pose = Pose2D(scenario.p0[0], scenario.p0[1], scenario.theta0)
    records: List[StepRecord] = []
    state = None
    p_hat = (math.nan, math.nan)
    terminated = False
    nan = math.nan

    for k in range(scenario.max_steps):
        r_true = distance(pose.position, p_T)
        if r_true < r_term:
            e_est = distance(p_hat, p_T) if not math.isnan(p_hat[0]) else nan
            records.append(
                StepRecord(k, k * h, pose.x, pose.y, pose.theta, nan, nan,
                           p_hat[0], p_hat[1], e_est, nan, r_true, nan, nan, nan)
            )
            terminated = True
            break
        if local:
            m = measure_local(global_to_local(p_T, pose), cfg.noise, k)
            # compass only: the controller cannot read the position
            seen = Pose2D(nan, nan, pose.theta)
        else:
            m = measure_global(pose, p_T, cfg.noise, k)
            seen = pose
        try:
            if k == 0:
                decision, state = ctl.step_zero(cfg, m, pose)
            else:
                decision, state = ctl.step(cfg, state, seen, m)
        except ControllerFault as exc:
            partial = SimulationTrace(
                h, records, _summarise(records, h, False) if records else
                TraceSummary(False, 0.0, nan, r_true)
            )
            exc.trace = partial
            raise
        est_global = ctl.estimate_in_global(decision, pose)
        if est_global is not None:
            p_hat = est_global
        e_est = distance(p_hat, p_T) if not math.isnan(p_hat[0]) else nan
        sol = decision.solution
        records.append(
            StepRecord(
                k, k * h, pose.x, pose.y, pose.theta, decision.omega, m.value,
                p_hat[0], p_hat[1], e_est, decision.r_hat, r_true,
                decision.v_r_star, decision.beta_used,
                sol.f_at_star if sol is not None else nan,
            )
        )
        pose = dubins_step(pose, decision.omega, params)

    return SimulationTrace(h, records, _summarise(records, h, terminated))


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class RunOutcome:
    beta: float
    seed: int
    summary: Optional[TraceSummary]
    fault: Optional[str] = None


@dataclass(frozen=True)
class SweepRow:
    beta: float
    mean_search_time: float
    mean_final_e_est: float
    termination_rate: float
    runs: int
    faults: int


SWEEP_COLUMNS = ("beta", "mean_search_time", "mean_final_e_est", "termination_rate")


def _run_one(args):
    scenario, beta, seed = args
    sc = scenario.with_beta(beta).with_seed(seed)
    try:
        return RunOutcome(beta, seed, run(sc).summary)
    except ControllerFault as exc:
        return RunOutcome(beta, seed, None, str(exc))


def sweep_runs(
    scenario: Scenario, betas: Sequence[float], seeds: Sequence[int], workers: int = 1
) -> List[RunOutcome]:
    """Every ``(beta, seed)`` episode, sorted by ``(beta, seed)``.

    Faulted runs are kept as outcomes with ``summary=None``.
    """
    betas = [float(b) for b in betas]
    seeds = [int(s) for s in seeds]
    if not betas:
        raise InvalidInput("betas must be non-empty")
    if not seeds:
        raise InvalidInput("seeds must be non-empty")
    jobs = [(scenario, b, s) for b in betas for s in seeds]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    else:
        outcomes = [_run_one(j) for j in jobs]
    return sorted(outcomes, key=lambda o: (o.beta, o.seed))


def aggregate(outcomes: Iterable[RunOutcome]) -> List[SweepRow]:
    by_beta: Dict[float, List[RunOutcome]] = {}
    for o in outcomes:
        by_beta.setdefault(o.beta, []).append(o)
    rows = []
    for beta in sorted(by_beta):
        group = sorted(by_beta[beta], key=lambda o: o.seed)
        ok = [o.summary for o in group if o.summary is not None]
        rows.append(
            SweepRow(
                beta=beta,
                mean_search_time=math.fsum(s.search_time for s in ok) / len(ok) if ok else math.nan,
                mean_final_e_est=math.fsum(s.final_e_est for s in ok) / len(ok) if ok else math.nan,
                termination_rate=sum(s.terminated for s in ok) / len(group),
                runs=len(group),
                faults=len(group) - len(ok),
            )
        )
    return rows


def sweep_beta(
    scenario: Scenario, betas: Sequence[float], seeds: Sequence[int], workers: int = 1
) -> List[SweepRow]:
    """Mean search time, mean final error and termination rate per beta."""
    return aggregate(sweep_runs(scenario, betas, seeds, workers))


# -- comparison ---------------------------------------------------------------


def time_to_error_below(trace: SimulationTrace, threshold: float = 1.0) -> Optional[float]:
    """Earliest time after which ``e_est`` stays below ``threshold``; None if never."""
    t_found = None
    for rec in trace.records:
        if rec.e_est < threshold:
            if t_found is None:
                t_found = rec.t
        else:
            t_found = None
    return t_found


def metrics_compare(trace_a: SimulationTrace, trace_b: SimulationTrace) -> dict:
    """Side-by-side estimation errors over the common prefix of two traces."""
    if not math.isclose(trace_a.h, trace_b.h, rel_tol=0.0, abs_tol=1e-15):
        raise InvalidInput(f"sampling periods differ: {trace_a.h} vs {trace_b.h}")
    n = min(len(trace_a.records), len(trace_b.records))
    ea = trace_a.column("e_est")[:n]
    eb = trace_b.column("e_est")[:n]
    deltas = [b - a for a, b in zip(ea, eb) if not (math.isnan(a) or math.isnan(b))]
    ta = time_to_error_below(trace_a)
    tb = time_to_error_below(trace_b)
    return {
        "h": trace_a.h,
        "length_a": len(trace_a.records),
        "length_b": len(trace_b.records),
        "common_length": n,
        "t": [k * trace_a.h for k in range(n)],
        "e_est_a": ea,
        "e_est_b": eb,
        "max_abs_delta": max((abs(d) for d in deltas), default=0.0),
        "mean_delta": math.fsum(deltas) / len(deltas) if deltas else 0.0,
        "time_to_1m_error_a": ta,
        "time_to_1m_error_b": tb,
        "time_to_1m_error_delta": (tb - ta) if ta is not None and tb is not None else None,
    }


# -- serialization ------------------------------------------------------------


def format_float(x: float) -> str:
    """Shortest round-trip decimal (``repr``), ``nan``/``inf`` spelled out."""
    return repr(float(x))


def write_trace_csv(trace: SimulationTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for rec in trace.records:
            w.writerow([rec.k] + [format_float(getattr(rec, c)) for c in TRACE_COLUMNS[1:]])


def read_table_csv(path, required: Sequence[str]) -> Dict[str, List[float]]:
    """Read a numeric CSV into columns, checking the header carries ``required``.

    Raises:
        InvalidInput: on a missing column, an empty table or a non-numeric cell.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidInput(f"{path}: empty CSV")
    header = rows[0]
    missing = [c for c in required if c not in header]
    if missing:
        raise InvalidInput(f"{path}: missing columns {missing}")
    if len(rows) < 2:
        raise InvalidInput(f"{path}: no data rows")
    cols: Dict[str, List[float]] = {c: [] for c in header}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InvalidInput(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for name, cell in zip(header, row):
            try:
                cols[name].append(float(cell))
            except ValueError:
                raise InvalidInput(f"{path}:{lineno}: non-numeric {name}={cell!r}") from None
    return cols


def _json_float(x):
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else x


def summary_dict(trace: SimulationTrace, scenario: Optional[Scenario] = None) -> dict:
    out = {k: _json_float(v) for k, v in asdict(trace.summary).items()}
    out["steps"] = len(trace.records)
    out["h"] = trace.h
    if scenario is not None:
        out["target"] = list(scenario.p_T)
        out["mode"] = scenario.controller.mode.value
        out["beta"] = scenario.controller.beta
        out["seed"] = int(scenario.controller.noise.seed)
        out["sigma"] = scenario.controller.noise.sigma
    return out


def write_summary_json(trace: SimulationTrace, path, scenario: Optional[Scenario] = None) -> None:
    with open(path, "w") as fh:
        json.dump(summary_dict(trace, scenario), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow([format_float(getattr(row, c)) for c in SWEEP_COLUMNS])
