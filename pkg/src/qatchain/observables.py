"""Moments, squeezing and capture-phase diagnostics for grid states."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import _kernels
from .classical import LsodeSpec
from .errors import MagnitudeMismatchError, NotApplicableError, PreconditionError
from .grid import GridState
from .spectral import fft

NORM_TOL = 1e-6
KURTOSIS_GATE = 0.1


class Moments(NamedTuple):
    mean_x: float
    var_x: float
    mean_p: float
    var_p: float


def moments(state: GridState, hbar: float = 1.0) -> Moments:
    """Position moments by quadrature, momentum moments from the FFT."""
    norm2 = state.norm() ** 2
    if abs(norm2 - 1.0) > NORM_TOL:
        raise PreconditionError(f"state is not normalized (|psi|^2 = {norm2:.9f})")
    x = state.x
    s0, s1, _ = _kernels.raw_moments(state.amplitudes, x)
    mean_x = s1 / s0
    _, c2, _ = _kernels.central_moments(state.amplitudes, x, mean_x)
    var_x = c2 / s0
    k = state.grid.k
    phat = fft(state.amplitudes)
    q0, q1, _ = _kernels.raw_moments(phat, k)
    mean_k = q1 / q0
    _, v2, _ = _kernels.central_moments(phat, k, mean_k)
    return Moments(float(mean_x), float(var_x), float(hbar * mean_k),
                   float(hbar * hbar * v2 / q0))


def excess_kurtosis(state: GridState) -> float:
    """Excess kurtosis of the position density |psi|^2."""
    x = state.x
    s0, s1, _ = _kernels.raw_moments(state.amplitudes, x)
    _, c2, c4 = _kernels.central_moments(state.amplitudes, x, s1 / s0)
    var = c2 / s0
    return float((c4 / s0) / (var * var) - 3.0)


def squeeze_parameter(state: GridState, reference_omega: float,
                      mass: float = 1.0, hbar: float = 1.0) -> float:
    """Position squeezing relative to the vacuum of ``reference_omega``.

    ``r = -1/2 log(var_x / L_ref^2)`` with ``L_ref^2 = hbar/(2 m omega_ref)``;
    negative r means the state is broader in x than the reference vacuum.
    """
    if not reference_omega > 0:
        raise ValueError("reference_omega must be positive")
    kurt = excess_kurtosis(state)
    if abs(kurt) > KURTOSIS_GATE:
        raise NotApplicableError(
            f"state is not Gaussian (excess kurtosis {kurt:.3f})")
    var_x = moments(state, hbar).var_x
    L2 = hbar / (2.0 * mass * reference_omega)
    return -0.5 * math.log(var_x / L2)


def capture_phase_residual(state: GridState, n: int, omega: float,
                           mass: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """Phase of ``psi / psi_n`` on the support of the n-th eigenstate.

    The global phase is removed at the point of maximum density. Returns an
    ``(k, 2)`` array of ``(x, phase)`` rows with the phase unwrapped along x.
    """
    from .states import ho_eigenstate

    ref = ho_eigenstate(n, LsodeSpec(mass, hbar, 0.0, omega), 0.0, state.grid)
    dist = math.sqrt(float(np.sum((np.abs(state.amplitudes)
                                   - np.abs(ref.amplitudes)) ** 2) * state.dx))
    if dist > 0.05:
        raise MagnitudeMismatchError(
            f"|psi| differs from |psi_{n}| by {dist:.3e} in L2")
    mask = np.abs(ref.amplitudes) > 1e-8
    x = state.x[mask]
    ratio = state.amplitudes[mask] / ref.amplitudes[mask]
    i0 = int(np.argmax(np.abs(state.amplitudes[mask])))
    phase = np.unwrap(np.angle(ratio * np.conj(ratio[i0]) / abs(ratio[i0])))
    phase -= phase[i0]
    return np.column_stack([x, phase])


class ReportRow(NamedTuple):
    time: float
    norm: float
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    squeeze_r: float
    fidelity: float | None = None


def report_row(state: GridState, reference_omega: float | None,
               mass: float = 1.0, hbar: float = 1.0,
               fidelity: float | None = None) -> ReportRow:
    m = moments(state, hbar)
    r = math.nan
    if reference_omega:
        try:
            r = squeeze_parameter(state, reference_omega, mass, hbar)
        except NotApplicableError:
            pass
    return ReportRow(state.time, state.norm(), m.mean_x, m.mean_p, m.var_x,
                     m.var_p, r, fidelity)


@dataclass
class EvolutionReport:
    """Checkpoint observables of one run; ``footer`` holds run-level scalars."""

    rows: list[ReportRow] = field(default_factory=list)
    footer: dict[str, float] = field(default_factory=dict)

    @property
    def has_fidelity(self) -> bool:
        return any(r.fidelity is not None for r in self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def row_at(self, time: float, tol: float = 1e-9) -> ReportRow:
        for r in self.rows:
            if abs(r.time - time) <= tol:
                return r
        raise KeyError(f"no checkpoint at t={time}")

    def to_csv(self, path) -> Path:
        path = Path(path)
        cols = list(ReportRow._fields)
        if not self.has_fidelity:
            cols.remove("fidelity")
        lines = [",".join(cols)]
        for r in self.rows:
            vals = [getattr(r, c) for c in cols]
            lines.append(",".join(
                "nan" if v is None else format(float(v), ".17g") for v in vals))
        for key, value in self.footer.items():
            lines.append(f"# {key}={format(float(value), '.17g')}")
        path.write_text("\n".join(lines) + "\n")
        return path

    @classmethod
    def from_csv(cls, path) -> EvolutionReport:
        rows, footer = [], {}
        text = Path(path).read_text().splitlines()
        header = text[0].split(",")
        for line in text[1:]:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                footer[key] = float(value)
                continue
            vals = dict(zip(header, (float(v) for v in line.split(","))))
            vals.setdefault("fidelity", None)
            rows.append(ReportRow(**vals))
        return cls(rows, footer)
