"""Uniform periodic grids and grid-sampled wavefunctions."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np

from .errors import GridMismatchError, SpecFileError


@dataclass(frozen=True)
class Grid:
    """Periodic grid ``x_i = x_min + i*dx``, ``dx = (x_max - x_min)/n_points``.

    The right endpoint ``x_max`` is excluded, matching the FFT convention.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if n < 16 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 16, got {n}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @classmethod
    def symmetric(cls, half_width: float, n_points: int) -> Grid:
        return cls(-float(half_width), float(half_width), int(n_points))

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n_points)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, self.dx)
        k.setflags(write=False)
        return k

    @property
    def k_nyquist(self) -> float:
        return np.pi / self.dx

    def scaled(self, factor: float) -> Grid:
        """Grid with every coordinate multiplied by ``factor > 0``."""
        return Grid(self.x_min * factor, self.x_max * factor, self.n_points)

    def same_as(self, other: Grid, rtol: float = 1e-12) -> bool:
        scale = max(abs(self.x_min), abs(self.x_max), 1.0)
        return (self.n_points == other.n_points
                and abs(self.x_min - other.x_min) <= rtol * scale
                and abs(self.x_max - other.x_max) <= rtol * scale)


def suggest_grid(n: int, L: float, delta_max: float = 1.0,
                 n_points: int = 2048) -> Grid:
    """Symmetric grid wide enough for a Hermite-Gauss state of order ``n``.

    ``delta_max`` is |delta| at the latest time the state will be sampled.
    """
    half = max(10.0, (n + 5) * np.sqrt(2.0)) * L * abs(delta_max)
    return Grid.symmetric(half, n_points)


@dataclass(frozen=True, eq=False)
class GridState:
    """Complex amplitudes on a :class:`Grid` at time ``time``.

    ``meta`` is an optional provenance tag. Constructors of oscillator
    eigenstates put ``{"kind": "ho_eigenstate", ...}`` there, which lets
    harmonic evolution take its phase-only fast path.
    """

    grid: Grid
    amplitudes: np.ndarray
    time: float = 0.0
    meta: dict[str, Any] | None = field(default=None)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if amps.shape != (self.grid.n_points,):
            raise ValueError(
                f"amplitudes shape {amps.shape} does not match grid "
                f"({self.grid.n_points},)")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "time", float(self.time))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def dx(self) -> float:
        return self.grid.dx

    def norm(self) -> float:
        """L2 norm, sqrt(sum |psi_i|^2 dx)."""
        a = self.amplitudes
        return float(np.sqrt(np.sum(a.real ** 2 + a.imag ** 2) * self.dx))

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def replace(self, **changes) -> GridState:
        """Copy with fields replaced; ``meta`` is dropped unless passed."""
        changes.setdefault("meta", None)
        return dataclasses.replace(self, **changes)

    def __add__(self, other: GridState) -> GridState:
        check_same_grid(self, other)
        return self.replace(amplitudes=self.amplitudes + other.amplitudes)

    def __mul__(self, scalar: complex) -> GridState:
        return self.replace(amplitudes=self.amplitudes * scalar)

    __rmul__ = __mul__


def check_same_grid(a: GridState, b: GridState) -> None:
    if not a.grid.same_as(b.grid):
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")


def inner(a: GridState, b: GridState) -> complex:
    """<a|b> by trapezoidal (periodic) quadrature."""
    check_same_grid(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.dx)


def edge_density(state: GridState, margin: float) -> float:
    """Largest |psi|^2 within the outer ``margin`` fraction of each side."""
    x = state.x
    centre = 0.5 * (state.grid.x_min + state.grid.x_max)
    inner_half = (1.0 - margin) * 0.5 * state.grid.length
    outer = np.abs(x - centre) > inner_half
    if not outer.any():
        return 0.0
    return float(state.density()[outer].max())


# --- snapshot files ---------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_snapshot(state: GridState, path) -> Path:
    """Write ``state`` as CSV (``x,re,im``) or ``.npz`` depending on suffix."""
    path = Path(path)
    g = state.grid
    if path.suffix == ".npz":
        np.savez(path, x_min=g.x_min, x_max=g.x_max, n_points=g.n_points,
                 time=state.time, amplitudes=state.amplitudes)
        return path
    lines = [f"# x_min={_fmt(g.x_min)},x_max={_fmt(g.x_max)},"
             f"n_points={g.n_points},time={_fmt(state.time)}",
             "x,re,im"]
    for xi, a in zip(g.x, state.amplitudes):
        lines.append(f"{_fmt(xi)},{_fmt(a.real)},{_fmt(a.imag)}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_snapshot(path) -> GridState:
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as f:
            grid = Grid(float(f["x_min"]), float(f["x_max"]), int(f["n_points"]))
            return GridState(grid, f["amplitudes"], float(f["time"]))
    header = {}
    rows = []
    try:
        for line in path.read_text().splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                for item in line[1:].split(","):
                    key, _, value = item.strip().partition("=")
                    header[key] = value
                continue
            if line.startswith("x,"):
                continue
            rows.append([float(v) for v in line.split(",")])
    except ValueError as exc:
        raise SpecFileError(f"{path}: unreadable snapshot row ({exc})") from exc
    data = np.asarray(rows)
    if data.ndim != 2 or data.shape[1] != 3:
        raise SpecFileError(f"{path}: expected columns x,re,im")
    n = data.shape[0]
    try:
        if "x_min" in header:
            grid = Grid(float(header["x_min"]), float(header["x_max"]),
                        int(header["n_points"]))
        else:
            dx = (data[-1, 0] - data[0, 0]) / (n - 1) if n > 1 else 0.0
            grid = Grid(data[0, 0], data[0, 0] + n * dx, n)
    except (ValueError, KeyError) as exc:
        raise SpecFileError(f"{path}: bad snapshot grid ({exc})") from exc
    if grid.n_points != n:
        raise SpecFileError(f"{path}: header n_points disagrees with row count")
    return GridState(grid, data[:, 1] + 1j * data[:, 2],
                     float(header.get("time", 0.0)))
