"""Closed-form oscillator eigenstates and free Hermite-Gauss packets."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .classical import LsodeSpec
from .errors import TruncationError, UnsupportedOrderError
from .grid import Grid, GridState

MAX_ORDER = 64
CAPTURE_TOL = 1e-6


def hermite_poly(n: int, y):
    """Physicists' Hermite polynomial H_n(y) by three-term recurrence.

    Accepts a scalar or an array. Orders above 64 are refused.
    """
    if n < 0 or int(n) != n:
        raise ValueError("n must be a non-negative integer")
    if n > MAX_ORDER:
        raise UnsupportedOrderError(f"Hermite order {n} > {MAX_ORDER}")
    y_arr = np.asarray(y, dtype=float)
    out = _kernels.hermite(int(n), y_arr.ravel()).reshape(y_arr.shape)
    return float(out) if y_arr.ndim == 0 else out


def log_norm_const(n: int, L: float) -> float:
    """log of N_n = (2 pi)^(-1/4) / sqrt(2^n n! L)."""
    return -0.25 * math.log(2.0 * math.pi) - 0.5 * (
        n * math.log(2.0) + math.lgamma(n + 1) + math.log(L))


def _hermite_gauss_profile(n: int, y: np.ndarray, log_prefactor: float) -> np.ndarray:
    """exp(log_prefactor - y^2/2) * H_n(y), formed in log space."""
    h = hermite_poly(n, y)
    out = np.zeros_like(y)
    nz = h != 0
    out[nz] = np.sign(h[nz]) * np.exp(
        log_prefactor + np.log(np.abs(h[nz])) - 0.5 * y[nz] ** 2)
    return out


def _check_capture(amps: np.ndarray, grid: Grid, what: str) -> None:
    captured = float(np.sum(np.abs(amps) ** 2) * grid.dx)
    if captured < 1.0 - CAPTURE_TOL:
        raise TruncationError(
            f"{what}: grid {grid} captures only {captured:.9f} of the norm")


def ho_eigenstate(n: int, spec: LsodeSpec, t_prime: float, grid: Grid) -> GridState:
    """n-th stationary state of the oscillator in ``spec`` at time ``t_prime``."""
    if not spec.is_harmonic:
        raise ValueError("ho_eigenstate needs a constant omega > 0 and no damping")
    if n > MAX_ORDER:
        raise UnsupportedOrderError(f"Hermite order {n} > {MAX_ORDER}")
    w = float(spec.omega)
    L = math.sqrt(spec.hbar / (2.0 * spec.mass * w))
    y = grid.x / (math.sqrt(2.0) * L)
    profile = _hermite_gauss_profile(n, y, log_norm_const(n, L))
    amps = profile * np.exp(-1j * w * (n + 0.5) * t_prime)
    _check_capture(amps, grid, f"eigenstate n={n}")
    meta = {"kind": "ho_eigenstate", "n": int(n), "omega": w,
            "mass": spec.mass, "hbar": spec.hbar}
    return GridState(grid, amps, t_prime, meta)


@dataclass(frozen=True)
class HGParams:
    """Hermite-Gauss packet parameters: order n, width L, dispersion time tau.

    ``tau = 2 m L^2 / hbar``; the oscillator that generates the packet has
    ``omega = 1/tau``.
    """

    n: int
    L: float
    tau: float

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not (self.L > 0 and self.tau > 0):
            raise ValueError("L and tau must be positive")

    @classmethod
    def from_oscillator(cls, n: int, omega: float, mass: float = 1.0,
                        hbar: float = 1.0) -> HGParams:
        return cls(int(n), math.sqrt(hbar / (2.0 * mass * omega)), 1.0 / omega)

    def delta(self, t: float) -> complex:
        """1 + i t/tau."""
        return complex(1.0, t / self.tau)

    def width(self, t: float) -> float:
        """L |delta(t)|."""
        return self.L * abs(self.delta(t))


def hermite_gauss_free(params: HGParams, t: float, grid: Grid) -> GridState:
    """Free Hermite-Gauss packet of order ``params.n`` at time ``t``.

    Phases are built from ``arg(delta) = arctan(t/tau)`` so no principal
    branch of a complex power is ever taken.
    """
    n, L, tau = params.n, params.L, params.tau
    if n > MAX_ORDER:
        raise UnsupportedOrderError(f"Hermite order {n} > {MAX_ORDER}")
    s = t / tau
    mod2 = 1.0 + s * s
    mod = math.sqrt(mod2)
    theta = math.atan(s)
    x = grid.x
    y = x / (math.sqrt(2.0) * L * mod)
    # |delta|^(-1/2) folded into the real profile
    profile = _hermite_gauss_profile(n, y, log_norm_const(n, L) - 0.5 * math.log(mod))
    # exp(-x^2 delta*/(4 L^2 |delta|^2)): real part is already -y^2/2
    chirp = s * x * x / (4.0 * L * L * mod2)
    amps = profile * np.exp(1j * (chirp - (n + 0.5) * theta))
    _check_capture(amps, grid, f"Hermite-Gauss n={n}")
    return GridState(grid, amps, t, {"kind": "hermite_gauss", "n": int(n),
                                     "L": L, "tau": tau})


def gaussian_packet(L: float, tau: float, t: float, x) -> np.ndarray:
    """(2 pi)^(-1/4) (L delta)^(-1/2) exp(-x^2 / (4 L^2 delta)), pointwise.

    The square root is taken on the continuous branch of arg(delta).
    """
    delta = complex(1.0, t / tau)
    root = math.sqrt(L * abs(delta)) * np.exp(0.5j * math.atan(t / tau))
    return (2.0 * math.pi) ** -0.25 / root * np.exp(
        -np.asarray(x) ** 2 / (4.0 * L * L * delta))
