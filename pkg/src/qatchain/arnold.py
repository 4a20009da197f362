"""Quantum Arnold transformation on grid states.

The forward transform maps a state of the LSODE system at time t' to a free
particle state at time ``t0 + u1(t')/u2(t')``:

    phi(x, t) = sqrt(u2) exp(-i/2 (m/hbar) (1/W) (u2'/u2) x'^2) phi'(x', t'),
    x = x'/u2.

The grid is rescaled exactly (``x_i -> x_i/u2``); nothing is interpolated.
:func:`resample` moves a state to another grid when a comparison needs it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .classical import (ClassicalSolutionPair, LsodeSpec, arnold_map_inverse,
                        classical_solutions)
from .errors import CausticError
from .grid import Grid, GridState
from .spectral import bandlimited_eval, check_bandlimited

CAUSTIC_EPS = 1e-3


@dataclass(frozen=True)
class QatContext:
    """Transformation data: the anchored pair, the system and a direction.

    ``direction="forward"`` maps LSODE states to free states.
    """

    pair: ClassicalSolutionPair
    spec: LsodeSpec
    direction: str = "forward"

    def __post_init__(self):
        if self.direction not in ("forward", "inverse"):
            raise ValueError("direction must be 'forward' or 'inverse'")
        if self.pair.damping_rate != self.spec.damping_rate:
            raise ValueError("pair and spec disagree on the damping rate")

    @classmethod
    def for_spec(cls, spec: LsodeSpec, anchor: float = 0.0, **kw) -> QatContext:
        return cls(classical_solutions(spec, anchor), spec, **kw)

    @property
    def effective_mass(self) -> float:
        """Mass seen from the anchor: m exp(f(t0)).

        Re-anchoring a damped system at t0 rescales the kinetic and potential
        terms by exp(-+f(t0)); absorbing that into the mass keeps the anchored
        Wronskian equal to one at t0.
        """
        return self.spec.mass * math.exp(float(self.spec.f(self.pair.anchor_time)))

    def phase_curvature(self, t_prime: float) -> float:
        """(m/hbar)(1/W)(u2'/u2) at t'; the quadratic phase is -/+ half of it."""
        p = self.pair
        return (self.effective_mass / self.spec.hbar
                * float(p.du2(t_prime)) / (float(p.wronskian(t_prime))
                                            * float(p.u2(t_prime))))

    def u2_checked(self, t_prime: float) -> float:
        if not self.pair.inside(t_prime):
            raise CausticError(
                f"t'={t_prime} outside validity interval {self.pair.validity}")
        u2 = float(self.pair.u2(t_prime))
        if u2 <= CAUSTIC_EPS:
            raise CausticError(f"u2({t_prime}) = {u2:.3e} below caustic threshold")
        return u2


def qat_apply(ctx: QatContext, state: GridState) -> GridState:
    """Forward QAT of ``state`` (labelled with its t') into the free system."""
    t_prime = state.time
    u2 = ctx.u2_checked(t_prime)
    a = -0.5 * ctx.phase_curvature(t_prime)
    amps = _kernels.quadratic_phase(state.amplitudes, state.x, a, math.sqrt(u2))
    t_free = ctx.pair.anchor_time + float(ctx.pair.u1(t_prime)) / u2
    return GridState(state.grid.scaled(1.0 / u2), amps, t_free)


def qat_inverse(ctx: QatContext, state: GridState) -> GridState:
    """Inverse QAT: free state at time t back to the LSODE system at t'."""
    pair = ctx.pair
    _, t_prime = arnold_map_inverse(pair, 0.0, state.time - pair.anchor_time)
    u2 = ctx.u2_checked(t_prime)
    grid = state.grid.scaled(u2)
    a = 0.5 * ctx.phase_curvature(t_prime)
    amps = _kernels.quadratic_phase(state.amplitudes, grid.x, a, 1.0 / math.sqrt(u2))
    return GridState(grid, amps, t_prime)


def transform(ctx: QatContext, state: GridState) -> GridState:
    """Apply the QAT in ``ctx.direction``."""
    if ctx.direction == "forward":
        return qat_apply(ctx, state)
    return qat_inverse(ctx, state)


def resample(state: GridState, target: Grid) -> GridState:
    """Band-limited (spectral) interpolation of ``state`` onto ``target``.

    Raises AliasingError when the spectral tail of the input exceeds 1e-10.
    """
    if target.same_as(state.grid):
        return state
    check_bandlimited(state.amplitudes)
    amps = bandlimited_eval(state.amplitudes, state.grid, target, check=False)
    return GridState(target, amps, state.time)


def padded_grid(grid: Grid, lo: float, hi: float) -> tuple[Grid, int]:
    """Extend ``grid`` (same spacing, power-of-two size) to cover ``[lo, hi]``.

    Returns the new grid and the index of the original first sample in it.
    """
    dx = grid.dx
    left = max(0, int(math.ceil((grid.x_min - lo) / dx)))
    right = max(0, int(math.ceil((hi - grid.x_max) / dx)))
    n = grid.n_points + left + right
    size = 1 << (n - 1).bit_length()
    left += (size - n) // 2
    if size == grid.n_points:
        return grid, 0
    x_min = grid.x_min - left * dx
    return Grid(x_min, x_min + size * dx, size), left


def zero_pad(amplitudes: np.ndarray, grid: Grid, lo: float, hi: float):
    """Zero-extend samples so the periodic box covers ``[lo, hi]``."""
    big, offset = padded_grid(grid, lo, hi)
    if big is grid:
        return np.asarray(amplitudes), grid
    out = np.zeros(big.n_points, dtype=np.complex128)
    out[offset:offset + grid.n_points] = amplitudes
    return out, big
