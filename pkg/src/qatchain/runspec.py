"""RunSpec schedule files (JSON) and the runs they describe."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .arnold import resample
from .classical import LsodeSpec
from .errors import SpecFileError
from .grid import Grid, GridState, read_snapshot
from .observables import EvolutionReport, report_row
from .oracle import OracleConfig, fidelity, oracle_evolve, oracle_trajectory
from .propagate import (DEFAULT_SAMPLES, Schedule, Segment, chain_evolve_direct,
                        chain_evolve_qat)
from .states import HGParams, hermite_gauss_free, ho_eigenstate


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridBlock(_Strict):
    x_min: float
    x_max: float
    n_points: int

    def build(self) -> Grid:
        return Grid(self.x_min, self.x_max, self.n_points)


class InitialStateBlock(_Strict):
    kind: Literal["ho_eigenstate", "hermite_gauss", "file"]
    n: Optional[int] = Field(default=None, ge=0, le=64)
    omega: Optional[float] = Field(default=None, gt=0)
    t: float = 0.0
    path: Optional[str] = None

    @model_validator(mode="after")
    def _needs(self):
        if self.kind == "file":
            if self.path is None:
                raise ValueError("kind 'file' needs 'path'")
        elif self.n is None or self.omega is None:
            raise ValueError(f"kind {self.kind!r} needs 'n' and 'omega'")
        return self


class SegmentBlock(_Strict):
    kind: Literal["free", "harmonic"]
    duration: float = Field(gt=0)
    omega: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _omega(self):
        if self.kind == "harmonic" and self.omega is None:
            raise ValueError("harmonic segment needs 'omega'")
        if self.kind == "free" and self.omega is not None:
            raise ValueError("free segment takes no 'omega'")
        return self


class OutputsBlock(_Strict):
    report: str = "report.csv"
    snapshot_times: list[float] = Field(default_factory=list)
    oracle: bool = False
    method: Literal["direct", "qat_chain", "both"] = "direct"
    samples_per_segment: int = Field(default=DEFAULT_SAMPLES, ge=0)


class RunSpec(_Strict):
    hbar: float = Field(default=1.0, gt=0)
    mass: float = Field(default=1.0, gt=0)
    t_start: float = 0.0
    grid: GridBlock
    initial_state: InitialStateBlock
    segments: list[SegmentBlock] = Field(default_factory=list)
    outputs: OutputsBlock = Field(default_factory=OutputsBlock)

    def schedule(self) -> Schedule:
        return Schedule(tuple(Segment(s.kind, s.duration, s.omega or 0.0)
                              for s in self.segments), self.t_start)


def load_runspec(path) -> tuple[RunSpec, Path]:
    """Parse and validate a RunSpec file; errors name the offending field."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise SpecFileError(f"{path}: cannot read ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise SpecFileError(f"{path}: invalid JSON at line {exc.lineno} "
                            f"column {exc.colno}: {exc.msg}") from exc
    try:
        spec = RunSpec.model_validate(raw)
        spec.grid.build()
    except ValidationError as exc:
        msgs = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "<root>"
            msgs.append(f"{loc}: {err['msg']}")
        raise SpecFileError(f"{path}: " + "; ".join(msgs)) from exc
    except ValueError as exc:
        raise SpecFileError(f"{path}: grid: {exc}") from exc
    return spec, path.parent


def initial_state(spec: RunSpec, base_dir: Path = Path(".")) -> GridState:
    grid = spec.grid.build()
    block = spec.initial_state
    if block.kind == "ho_eigenstate":
        system = LsodeSpec(spec.mass, spec.hbar, 0.0, block.omega)
        state = ho_eigenstate(block.n, system, 0.0, grid)
    elif block.kind == "hermite_gauss":
        params = HGParams.from_oscillator(block.n, block.omega, spec.mass, spec.hbar)
        state = hermite_gauss_free(params, block.t, grid)
    else:
        path = Path(block.path)
        if not path.is_absolute():
            path = base_dir / path
        try:
            state = read_snapshot(path)
        except OSError as exc:
            raise SpecFileError(f"initial_state.path: cannot read {path}") from exc
        state = resample(state, grid)
    return GridState(state.grid, state.amplitudes, spec.t_start, state.meta)


def checkpoint_times(schedule: Schedule, samples: int) -> list[float]:
    times = [schedule.t_start]
    now = schedule.t_start
    for seg in schedule.segments:
        times.extend(now + seg.duration * j / (samples + 1)
                     for j in range(1, samples + 1))
        now += seg.duration
        times.append(now)
    return times


def refined_schedule(schedule: Schedule, times: list[float]) -> Schedule:
    """Same physics, with extra switching points at ``times``."""
    segs, now = [], schedule.t_start
    cuts = sorted(set(times))
    for seg in schedule.segments:
        end = now + seg.duration
        inner = [t for t in cuts if now + 1e-12 < t < end - 1e-12]
        prev = now
        for t in inner + [end]:
            segs.append(Segment(seg.kind, t - prev, seg.omega))
            prev = t
        now = end
    return Schedule(tuple(segs), schedule.t_start)


@dataclass
class RunResult:
    final: GridState
    report: EvolutionReport
    checkpoints: list[float]
    min_fidelity: float | None = None
    snapshots: dict[float, GridState] = field(default_factory=dict)


def execute(spec: RunSpec, base_dir: Path = Path("."), *, oracle: bool | None = None,
            oracle_dt: float | None = None) -> RunResult:
    """Run the analytic chain (and optionally the oracle) for ``spec``."""
    schedule = spec.schedule()
    init = initial_state(spec, base_dir)
    out = spec.outputs
    m, hbar = spec.mass, spec.hbar
    ref_omega = spec.initial_state.omega
    samples = out.samples_per_segment
    for t in out.snapshot_times:
        if not schedule.t_start <= t <= schedule.t_end + 1e-12:
            raise SpecFileError(
                f"outputs.snapshot_times: {t} outside [{schedule.t_start}, "
                f"{schedule.t_end}]")
    states: list[GridState] = []
    if out.method == "qat_chain":
        report = EvolutionReport()
        for t in checkpoint_times(schedule, samples):
            st = chain_evolve_qat(schedule.truncated(t), init, mass=m, hbar=hbar)
            states.append(st)
            report.rows.append(report_row(st, ref_omega, m, hbar))
        final = states[-1]
    else:
        final, report = chain_evolve_direct(schedule, init, mass=m, hbar=hbar,
                                            samples_per_segment=samples,
                                            reference_omega=ref_omega,
                                            on_checkpoint=states.append)
    if out.method == "both":
        worst = 0.0
        for t in schedule.switching_times()[1:]:
            a = _analytic_at(spec, init, t, "direct")
            b = _analytic_at(spec, init, t, "qat_chain")
            worst = max(worst, float(np.max(np.abs(a.amplitudes - b.amplitudes))))
        report.footer["max_path_discrepancy"] = worst
    times = [r.time for r in report.rows]
    result = RunResult(final, report, times)
    if oracle if oracle is not None else out.oracle:
        config = OracleConfig(dt=oracle_dt)
        truth = oracle_trajectory(config, refined_schedule(schedule, times), init,
                                  mass=m, hbar=hbar)
        rows = []
        for row, analytic in zip(report.rows, states):
            match = min(truth, key=lambda s: abs(s.time - row.time))
            rows.append(row._replace(fidelity=fidelity(analytic, match)))
        report.rows = rows
        result.min_fidelity = min(r.fidelity for r in rows)
    for t in out.snapshot_times:
        result.snapshots[t] = _analytic_at(spec, init, t, out.method)
    return result


def _analytic_at(spec: RunSpec, init: GridState, t: float, method: str) -> GridState:
    schedule = spec.schedule().truncated(t)
    if method == "qat_chain":
        return chain_evolve_qat(schedule, init, mass=spec.mass, hbar=spec.hbar)
    state, _ = chain_evolve_direct(schedule, init, mass=spec.mass, hbar=spec.hbar,
                                   samples_per_segment=0)
    return state


@dataclass
class BenchRow:
    method: str
    wall_time: float
    checkpoint_error: float


def benchmark(spec: RunSpec, base_dir: Path = Path("."), *,
              oracle_dt: float | None = None, repeats: int = 1) -> list[BenchRow]:
    """Wall-clock of the analytic paths against the oracle on the final state.

    ``checkpoint_error`` is the L2 distance to the direct analytic result
    (for the direct path itself: to the QAT chain).
    """
    schedule = spec.schedule()
    init = initial_state(spec, base_dir)
    m, hbar = spec.mass, spec.hbar

    def timed(fn):
        best, value = math.inf, None
        for _ in range(repeats):
            t0 = time.perf_counter()
            value = fn()
            best = min(best, time.perf_counter() - t0)
        return best, value

    t_direct, direct = timed(lambda: chain_evolve_direct(
        schedule, init, mass=m, hbar=hbar, samples_per_segment=0)[0])
    t_qat, qat = timed(lambda: chain_evolve_qat(schedule, init, mass=m, hbar=hbar))
    t_oracle, orc = timed(lambda: oracle_evolve(OracleConfig(dt=oracle_dt), schedule,
                                                init, mass=m, hbar=hbar))
    def dist(a, b):
        return (a + (-1.0) * b).norm()

    return [
        BenchRow("direct", t_direct, dist(direct, qat)),
        BenchRow("qat_chain", t_qat, dist(qat, direct)),
        BenchRow("oracle", t_oracle, dist(orc, direct)),
    ]
