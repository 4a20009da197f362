"""Brute-force split-step Fourier integrator used as ground truth.

Integrates ``i hbar dpsi/dt = -hbar^2/(2m) e^{-f} psi'' + 1/2 m omega^2 x^2 e^{f} psi``
with second-order Strang splitting (half potential, full kinetic, half
potential), coefficients taken at the step midpoint. Every run is repeated
with ``dt/2`` and the two results compared (Richardson check); the finer one
is returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .classical import LsodeSpec
from .errors import BoundaryEscapeError, OracleAccuracyError, PhysicsError
from .grid import Grid, GridState, edge_density, inner
from .propagate import Schedule
from .spectral import fft, ifft

EDGE_TOL = 1e-10
CHECK_EVERY = 1000


@dataclass(frozen=True)
class OracleConfig:
    """Step size and self-checks of the oracle.

    ``dt=None`` means ``1e-3/omega_max`` (or 1e-3 without any oscillator).
    ``richardson_tol`` bounds the infidelity between the ``dt`` and ``dt/2``
    runs. ``grid`` optionally moves the initial state to another grid first.
    """

    dt: float | None = None
    grid: Grid | None = None
    boundary_margin: float = 0.2
    richardson: bool = True
    richardson_tol: float = 1e-8

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 <= self.boundary_margin < 1:
            raise ValueError("boundary_margin must lie in [0, 1)")

    def step_for(self, omega_max: float) -> float:
        if self.dt is not None:
            return self.dt
        return 1e-3 / omega_max if omega_max > 0 else 1e-3


def _check_edges(psi: np.ndarray, state_like: GridState, margin: float, t: float):
    probe = GridState(state_like.grid, psi, t)
    dens = edge_density(probe, margin)
    if dens > EDGE_TOL:
        raise BoundaryEscapeError(
            f"edge density {dens:.3e} > {EDGE_TOL:.0e} at t={t:.6g}")


def _strang(spec: LsodeSpec, state: GridState, duration: float, dt: float,
            margin: float) -> GridState:
    steps = max(1, int(math.ceil(duration / dt - 1e-9)))
    h = duration / steps
    x2 = state.x ** 2
    k2 = state.grid.k ** 2
    m, hbar, gamma = spec.mass, spec.hbar, spec.damping_rate
    psi = np.array(state.amplitudes, dtype=np.complex128)
    t0 = state.time
    static = spec.constant_omega and gamma == 0
    if static:
        half_v = np.exp(-0.25j * m * spec.omega ** 2 * x2 * h / hbar)
        full_v = half_v * half_v
        kin = np.exp(-0.5j * hbar * k2 * h / m)
        has_v = spec.omega > 0
        if has_v:
            _kernels.multiply_inplace(psi, half_v)
        for i in range(steps):
            psi = ifft(fft(psi) * kin)
            if has_v:
                _kernels.multiply_inplace(psi, full_v if i < steps - 1 else half_v)
            if (i + 1) % CHECK_EVERY == 0:
                _check_edges(psi, state, margin, t0 + (i + 1) * h)
    else:
        for i in range(steps):
            tm = t0 + (i + 0.5) * h
            ef = math.exp(gamma * tm)
            w = float(spec.omega_at(tm))
            half_v = np.exp(-0.25j * m * w * w * ef * x2 * h / hbar)
            _kernels.multiply_inplace(psi, half_v)
            psi = ifft(fft(psi) * np.exp(-0.5j * hbar * k2 * h / (m * ef)))
            _kernels.multiply_inplace(psi, half_v)
            if (i + 1) % CHECK_EVERY == 0:
                _check_edges(psi, state, margin, t0 + (i + 1) * h)
    _check_edges(psi, state, margin, t0 + duration)
    return GridState(state.grid, psi, t0 + duration)


def oracle_segment(config: OracleConfig, spec: LsodeSpec, state: GridState,
                   duration: float, dt: float | None = None) -> GridState:
    """Integrate the general equation of ``spec`` from ``state.time``.

    Runs at ``dt`` and ``dt/2`` when the Richardson check is on and returns
    the finer result.
    """
    if duration == 0:
        return state
    if dt is None:
        w = float(spec.omega_at(state.time)) if not spec.constant_omega else spec.omega
        dt = config.step_for(w)
    coarse = _strang(spec, state, duration, dt, config.boundary_margin)
    if not config.richardson:
        return coarse
    fine = _strang(spec, state, duration, 0.5 * dt, config.boundary_margin)
    err = 1.0 - fidelity(coarse, fine) / (coarse.norm() * fine.norm())
    if err > config.richardson_tol:
        raise OracleAccuracyError(
            f"Richardson check failed: infidelity between dt={dt:.3e} and dt/2 "
            f"runs is {err:.3e} > {config.richardson_tol:.1e}")
    return fine


def oracle_evolve(config: OracleConfig, schedule: Schedule, initial: GridState, *,
                  mass: float = 1.0, hbar: float = 1.0) -> GridState:
    """Evolve ``initial`` through ``schedule``; potentials switch exactly at
    the segment boundaries."""
    state = initial
    if config.grid is not None and not config.grid.same_as(initial.grid):
        from .arnold import resample
        state = resample(initial, config.grid)
    state = GridState(state.grid, state.amplitudes, schedule.t_start)
    dt = config.step_for(schedule.omega_max)
    for index, seg in enumerate(schedule.segments):
        try:
            state = oracle_segment(config, seg.spec(mass, hbar), state,
                                   seg.duration, dt)
        except PhysicsError as exc:
            exc.args = (f"segment {index}: {exc.args[0]}",)
            raise
    return state


def oracle_trajectory(config: OracleConfig, schedule: Schedule, initial: GridState,
                      *, mass: float = 1.0, hbar: float = 1.0) -> list[GridState]:
    """States at every switching time, starting with ``initial``."""
    states = [GridState(initial.grid, initial.amplitudes, schedule.t_start)]
    dt = config.step_for(schedule.omega_max)
    for index, seg in enumerate(schedule.segments):
        try:
            states.append(oracle_segment(config, seg.spec(mass, hbar), states[-1],
                                         seg.duration, dt))
        except PhysicsError as exc:
            exc.args = (f"segment {index}: {exc.args[0]}",)
            raise
    return states


def fidelity(a: GridState, b: GridState) -> float:
    """|<a|b>| on a common grid (GridMismatchError otherwise)."""
    return abs(inner(a, b))
