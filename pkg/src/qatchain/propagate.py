"""Exact evolution through the factorized operator and chained QATs.

For an LSODE system with anchored classical pair (u1, u2) the evolution
operator from the anchor to t' factorizes (applied right to left) as

    U'(t') = exp(+i/2 (m/hbar)(1/W)(u2'/u2) x^2)      quadratic phase
             exp(i hbar/(2m) u1 u2 d^2/dx^2)           free kinetic factor
             U_D(1/u2)                                  unitary dilation

with ``U_D(1/u2) psi(x) = psi(x/u2)/sqrt(u2)``. Steps that would come close
to a caustic (u2 -> 0) are split and re-anchored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arnold import QatContext, qat_apply, resample, zero_pad
from .classical import ClassicalSolutionPair, LsodeSpec, classical_solutions
from .errors import CausticError, PhysicsError, TruncationError
from .grid import Grid, GridState
from .observables import EvolutionReport, report_row
from .spectral import bandlimited_eval, check_bandlimited, fft, ifft, kinetic_multiplier

CAUSTIC_MARGIN = 0.1
# u2 of a harmonic step of length pi/2 - CAUSTIC_MARGIN
U2_SPLIT = math.sin(CAUSTIC_MARGIN)
NORM_LOSS_TOL = 1e-6
DEFAULT_SAMPLES = 16
# cap on the zero-padded kinetic grid
MAX_PADDED = 1 << 22


@dataclass(frozen=True)
class Segment:
    """One piece of a schedule: ``free`` or ``harmonic`` with ``omega``."""

    kind: str
    duration: float
    omega: float = 0.0

    def __post_init__(self):
        if self.kind not in ("free", "harmonic"):
            raise ValueError(f"segment kind must be free or harmonic, got {self.kind!r}")
        if not self.duration > 0:
            raise ValueError("segment duration must be positive")
        if self.kind == "harmonic" and not self.omega > 0:
            raise ValueError("harmonic segment needs omega > 0")
        if self.kind == "free" and self.omega != 0:
            raise ValueError("free segment cannot carry omega")

    @classmethod
    def free(cls, duration: float) -> Segment:
        return cls("free", duration)

    @classmethod
    def harmonic(cls, omega: float, duration: float) -> Segment:
        return cls("harmonic", duration, omega)

    def spec(self, mass: float = 1.0, hbar: float = 1.0) -> LsodeSpec:
        return LsodeSpec(mass, hbar, 0.0, self.omega)


@dataclass(frozen=True)
class Schedule:
    """Ordered segments starting at physical time ``t_start``."""

    segments: tuple[Segment, ...] = field(default_factory=tuple)
    t_start: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    def __len__(self):
        return len(self.segments)

    def switching_times(self) -> list[float]:
        times = [self.t_start]
        for seg in self.segments:
            times.append(times[-1] + seg.duration)
        return times

    @property
    def t_end(self) -> float:
        return self.switching_times()[-1]

    @property
    def omega_max(self) -> float:
        return max((s.omega for s in self.segments), default=0.0)

    def truncated(self, t: float) -> Schedule:
        """Schedule covering ``[t_start, t]`` only."""
        out, now = [], self.t_start
        for seg in self.segments:
            if t <= now + 1e-15:
                break
            out.append(Segment(seg.kind, min(seg.duration, t - now), seg.omega))
            now += seg.duration
        return Schedule(tuple(out), self.t_start)


# --- factorized evolution ---------------------------------------------------

def _eigen_tag_matches(state: GridState, spec: LsodeSpec) -> bool:
    m = state.meta or {}
    return (m.get("kind") == "ho_eigenstate" and spec.is_harmonic
            and m.get("omega") == spec.omega and m.get("mass") == spec.mass
            and m.get("hbar") == spec.hbar)


def _significant_k(amps: np.ndarray, grid: Grid) -> float:
    """Largest |k| carrying spectral power above 1e-14 of the peak."""
    power = np.abs(fft(amps)) ** 2
    return float(np.max(np.abs(grid.k[power > 1e-14 * power.max()])))


def _single_step(spec: LsodeSpec, pair: ClassicalSolutionPair, state: GridState,
                 t_prime: float, out_grid: Grid) -> GridState:
    ctx = QatContext(pair, spec)
    u2 = ctx.u2_checked(t_prime)
    u1 = float(pair.u1(t_prime))
    mass = ctx.effective_mass

    # unitary dilation: samples move to u2*x, amplitudes scale by 1/sqrt(u2)
    dil_grid = state.grid.scaled(u2)
    amps = state.amplitudes / math.sqrt(u2)

    # free kinetic factor on a zero-padded copy wide enough for the result and
    # for the spreading of the packet, so nothing wraps around the period
    coeff = spec.hbar * u1 * u2 / (2.0 * mass)
    reach = 2.0 * abs(coeff) * _significant_k(amps, dil_grid)
    lo = min(out_grid.x_min, dil_grid.x_min - reach)
    hi = max(out_grid.x_max, dil_grid.x_max + reach)
    if (hi - lo) / dil_grid.dx > MAX_PADDED:
        raise TruncationError(
            f"packet spreads over [{lo:.4g}, {hi:.4g}], beyond any practical grid")
    amps, work = zero_pad(amps, dil_grid, lo, hi)
    amps = ifft(fft(amps) * kinetic_multiplier(work.k, coeff))

    # quadratic phase, applied pointwise on the output grid
    amps = bandlimited_eval(amps, work, out_grid, check=False)
    a = 0.5 * ctx.phase_curvature(t_prime)
    amps = amps * np.exp(1j * a * out_grid.x ** 2)
    out = GridState(out_grid, amps, t_prime)

    before, after = state.norm(), out.norm()
    if abs(after - before) > NORM_LOSS_TOL * max(before, 1e-300):
        raise TruncationError(
            f"norm changed from {before:.12f} to {after:.12f}: output grid "
            f"{out_grid} does not hold the evolved state")
    return out


def _split_harmonic(omega: float, span: float) -> int:
    bound = 0.5 * math.pi - CAUSTIC_MARGIN
    return int(math.floor(omega * abs(span) / bound)) + 1


def _max_step(pair: ClassicalSolutionPair, direction: float) -> float:
    """Largest step from the anchor keeping u2 >= U2_SPLIT (by bisection)."""
    t0 = pair.anchor_time
    edge = pair.validity[1] if direction > 0 else pair.validity[0]
    if math.isinf(edge):
        edge = t0 + direction * 1e6
    a, b = 0.0, abs(edge - t0)
    if float(pair.u2(t0 + direction * b * (1 - 1e-12))) >= U2_SPLIT:
        return b * (1 - 1e-12)
    while b - a > 1e-9 * max(1.0, b):
        mid = 0.5 * (a + b)
        if float(pair.u2(t0 + direction * mid)) >= U2_SPLIT:
            a = mid
        else:
            b = mid
    return a


def factorized_evolve(spec: LsodeSpec, pair: ClassicalSolutionPair | None,
                      state: GridState, t_prime: float, *,
                      split_caustics: bool = True, substeps: int | None = None,
                      out_grid: Grid | None = None) -> GridState:
    """Evolve ``state`` (labelled with the anchor time) to ``t_prime``.

    Parameters
    ----------
    spec : LsodeSpec
    pair : ClassicalSolutionPair or None
        Pair anchored at ``state.time``; built from ``spec`` when None.
    state : GridState
    t_prime : float
        Target time on the LSODE clock.
    split_caustics : bool
        Split steps whose u2 would fall below ``sin(0.1)`` into equal,
        re-anchored substeps. When False such steps raise CausticError
        (only below the hard 1e-3 threshold).
    substeps : int, optional
        Force this many equal re-anchored substeps.
    out_grid : Grid, optional
        Grid of the result; defaults to the input grid.
    """
    out_grid = out_grid or state.grid
    if pair is None:
        pair = classical_solutions(spec, state.time)
    if abs(state.time - pair.anchor_time) > 1e-12 * max(1.0, abs(pair.anchor_time)):
        raise ValueError(f"state time {state.time} differs from the pair anchor "
                         f"{pair.anchor_time}")
    span = t_prime - state.time
    tagged = _eigen_tag_matches(state, spec)
    if span == 0:
        return state if out_grid.same_as(state.grid) else resample(state, out_grid)
    check_bandlimited(state.amplitudes, what="input state")

    if substeps is None:
        if not split_caustics or (pair.inside(t_prime)
                                  and float(pair.u2(t_prime)) >= U2_SPLIT):
            substeps = 1
        elif spec.is_harmonic:
            substeps = _split_harmonic(spec.omega, span)
        else:
            substeps = 0  # greedy, re-evaluated at each anchor

    if substeps == 1:
        out = _single_step(spec, pair, state, t_prime, out_grid)
    elif substeps > 1:
        h = span / substeps
        out = state
        for i in range(substeps):
            target = t_prime if i == substeps - 1 else state.time + (i + 1) * h
            p = pair if i == 0 else classical_solutions(spec, out.time)
            out = _single_step(spec, p, out, target,
                               out_grid if i == substeps - 1 else state.grid)
    else:
        direction = math.copysign(1.0, span)
        out, p = state, pair
        while True:
            remaining = t_prime - out.time
            step = min(abs(remaining), 0.95 * _max_step(p, direction))
            if step <= 0:
                raise CausticError(f"cannot advance past t'={out.time}")
            last = step >= abs(remaining)
            target = t_prime if last else out.time + direction * step
            out = _single_step(spec, p, out, target, out_grid if last else state.grid)
            if last:
                break
            p = classical_solutions(spec, out.time)
    if tagged:
        out = GridState(out.grid, out.amplitudes, out.time, dict(state.meta))
    return out


def eigen_phase_evolve(state: GridState, duration: float) -> GridState:
    """Advance a tagged oscillator eigenstate by a pure phase."""
    m = state.meta
    phase = np.exp(-1j * m["omega"] * (m["n"] + 0.5) * duration)
    return GridState(state.grid, state.amplitudes * phase, state.time + duration,
                     dict(m))


# --- chained evolution ------------------------------------------------------

def _annotate(exc: PhysicsError, index: int) -> PhysicsError:
    exc.args = (f"segment {index}: {exc.args[0] if exc.args else exc}",)
    exc.segment_index = index
    return exc


def chain_evolve_direct(schedule: Schedule, initial: GridState, *,
                        mass: float = 1.0, hbar: float = 1.0,
                        samples_per_segment: int = DEFAULT_SAMPLES,
                        reference_omega: float | None = None,
                        on_checkpoint=None,
                        ) -> tuple[GridState, EvolutionReport]:
    """Evolve through the schedule segment by segment with the factorized
    operator, re-anchoring at every switching time.

    The report has one row at ``t_start``, ``samples_per_segment`` rows inside
    each segment and one row at each segment end. ``reference_omega`` sets
    the squeezing reference (defaults to the initial eigenstate frequency).
    ``on_checkpoint``, if given, is called with the state of every row.
    """
    if reference_omega is None and initial.meta:
        reference_omega = initial.meta.get("omega")
    state = GridState(initial.grid, initial.amplitudes, schedule.t_start, initial.meta)
    report = EvolutionReport()

    def record(st):
        report.rows.append(report_row(st, reference_omega, mass, hbar))
        if on_checkpoint is not None:
            on_checkpoint(st)

    record(state)
    for index, seg in enumerate(schedule.segments):
        spec = seg.spec(mass, hbar)
        start = state
        try:
            pair = classical_solutions(spec, start.time)
            for j in range(1, samples_per_segment + 1):
                tj = start.time + seg.duration * j / (samples_per_segment + 1)
                record(factorized_evolve(spec, pair, start, tj))
            state = factorized_evolve(spec, pair, start, start.time + seg.duration)
        except PhysicsError as exc:
            raise _annotate(exc, index)
        record(state)
    return state, report


def _bridge_omegas(schedule: Schedule, fallback: float) -> list[float]:
    """Frequency used to route each free segment through an oscillator:
    the previous harmonic segment, else the next one, else ``fallback``."""
    segs = schedule.segments
    out = []
    for i, seg in enumerate(segs):
        if seg.kind == "harmonic":
            out.append(seg.omega)
            continue
        prev = [s.omega for s in segs[:i] if s.kind == "harmonic"]
        nxt = [s.omega for s in segs[i + 1:] if s.kind == "harmonic"]
        out.append(prev[-1] if prev else nxt[0] if nxt else fallback)
    return out


def chain_evolve_qat(schedule: Schedule, initial: GridState, *,
                     mass: float = 1.0, hbar: float = 1.0,
                     bridge_omega: float | None = None) -> GridState:
    """Evolve through the schedule using only oscillator evolutions and QATs.

    Each free lapse D is replaced by an oscillator evolution of
    ``arctan(omega D)/omega`` followed by the forward QAT anchored at the start
    of the lapse. Consecutive oscillator evolutions with the same frequency
    are merged; tagged eigenstates evolve by a phase only. The oscillator
    step feeding each QAT lands on a grid refined by a power of two close to
    ``1/u2``, so the dilated grid keeps the working spacing; after the QAT
    the state is resampled onto the grid of ``initial``.
    """
    work = initial.grid
    if bridge_omega is None:
        bridge_omega = (initial.meta or {}).get("omega", 1.0)
    bridges = _bridge_omegas(schedule, bridge_omega)
    state = GridState(work, initial.amplitudes, schedule.t_start, initial.meta)
    # oscillator evolution not yet applied: (omega, lapse)
    pending = [None, 0.0]

    def flush(out_grid: Grid = work):
        w, lapse = pending
        pending[:] = [None, 0.0]
        if w is None or lapse == 0:
            return resample(state, out_grid)
        spec = LsodeSpec(mass, hbar, 0.0, w)
        if _eigen_tag_matches(state, spec):
            return resample(eigen_phase_evolve(state, lapse), out_grid)
        return factorized_evolve(spec, None, state, state.time + lapse,
                                 out_grid=out_grid)

    for index, (seg, w) in enumerate(zip(schedule.segments, bridges)):
        try:
            if seg.kind == "harmonic":
                if pending[0] not in (None, w):
                    state = flush()
                pending[0] = w
                pending[1] += seg.duration
                continue
            # free lapse, cut so every piece keeps arctan(w D) clear of pi/2
            n_pieces = int(math.floor(w * seg.duration
                                      / math.tan(0.5 * math.pi - CAUSTIC_MARGIN))) + 1
            piece = seg.duration / n_pieces
            t_osc = math.atan(w * piece) / w
            # the state just before the QAT is compressed by u2 = cos(w t_osc);
            # a grid refined by about 1/u2 keeps it resolved
            u2 = math.cos(w * t_osc)
            fine = Grid(work.x_min, work.x_max,
                        work.n_points << max(0, math.ceil(-math.log2(u2))))
            spec = LsodeSpec(mass, hbar, 0.0, w)
            for _ in range(n_pieces):
                if pending[0] not in (None, w):
                    state = flush()
                pending[0] = w
                pending[1] += t_osc
                anchor = state.time + pending[1] - t_osc
                state = flush(fine)
                ctx = QatContext(classical_solutions(spec, anchor), spec)
                state = resample(qat_apply(ctx, state), work)
        except PhysicsError as exc:
            raise _annotate(exc, index)
    try:
        state = flush()
    except PhysicsError as exc:
        raise _annotate(exc, len(schedule.segments) - 1)
    return state
