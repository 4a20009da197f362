"""FFT helpers: kinetic multipliers, spectral tails, band-limited evaluation.

Forward transform convention is ``psi_hat(k) = sum psi(x) exp(-i k x)``, so
d^2/dx^2 becomes multiplication by ``-k**2``.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.fft as sfft

from .errors import AliasingError
from .grid import Grid

TAIL_FRACTION = 0.9
TAIL_TOL = 1e-10


def fft(a):
    return sfft.fft(a)


def ifft(a):
    return sfft.ifft(a)


def kinetic_multiplier(k: np.ndarray, coeff: float) -> np.ndarray:
    """Fourier symbol of ``exp(i*coeff*d^2/dx^2)``, i.e. ``exp(-i*coeff*k^2)``."""
    return np.exp(-1j * coeff * k * k)


def apply_kinetic(amplitudes: np.ndarray, grid: Grid, coeff: float) -> np.ndarray:
    return ifft(fft(amplitudes) * kinetic_multiplier(grid.k, coeff))


def spectral_tail(amplitudes: np.ndarray, fraction: float = TAIL_FRACTION) -> float:
    """Share of spectral power with ``|k| >= fraction * k_nyquist``."""
    n = amplitudes.shape[0]
    power = np.abs(fft(amplitudes)) ** 2
    total = power.sum()
    if total == 0:
        return 0.0
    idx = np.abs(np.fft.fftfreq(n)) * 2.0  # 1.0 at Nyquist
    return float(power[idx >= fraction].sum() / total)


def check_bandlimited(amplitudes: np.ndarray, tol: float = TAIL_TOL,
                      what: str = "state") -> None:
    tail = spectral_tail(amplitudes)
    if tail > tol:
        raise AliasingError(
            f"{what} is not band-limited: spectral tail {tail:.3e} > {tol:.1e}")


def _frac_cycles(c: float, n: np.ndarray) -> np.ndarray:
    """``frac(c * n)`` for integer-valued float ``n`` < 2**33, without the
    rounding loss of forming ``c*n`` directly.

    ``c`` is split into a head with at most 20 significant bits, whose
    product with ``n`` is exact in double precision, and a small tail.
    """
    if c == 0:
        return np.zeros_like(n, dtype=float)
    e = math.frexp(c)[1]
    head = math.ldexp(round(math.ldexp(c, 20 - e)), e - 20)
    tail = c - head
    prod = head * n
    return (prod - np.floor(prod)) + tail * n


def _chirp(theta: float, j: np.ndarray) -> np.ndarray:
    """``exp(i*theta*j**2/2)`` with the phase reduced exactly."""
    jj = np.asarray(j, dtype=float) ** 2
    return np.exp(2j * np.pi * _frac_cycles(theta / (4.0 * np.pi), jj))


def zoom_sum(d: np.ndarray, theta: float, m: int) -> np.ndarray:
    """``X[q] = sum_j d[j] exp(i*theta*j*q)`` for q = 0..m-1 (Bluestein)."""
    n = d.shape[0]
    size = sfft.next_fast_len(n + m - 1)
    a = np.zeros(size, dtype=np.complex128)
    a[:n] = d * _chirp(theta, np.arange(n))
    # b[j] = exp(-i theta j^2/2) for j in -(n-1)..(m-1), wrapped
    b = np.zeros(size, dtype=np.complex128)
    b[:m] = np.conj(_chirp(theta, np.arange(m)))
    b[size - n + 1:] = np.conj(_chirp(theta, np.arange(n - 1, 0, -1)))
    conv = sfft.ifft(sfft.fft(a) * sfft.fft(b))[:m]
    return conv * _chirp(theta, np.arange(m))


def bandlimited_eval(amplitudes: np.ndarray, src: Grid, target: Grid,
                     check: bool = True) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``amplitudes`` on ``target``.

    Points of ``target`` outside the source box get zero. The Nyquist
    coefficient is dropped (it is below the tail tolerance when ``check``).
    """
    if check:
        check_bandlimited(amplitudes)
    if target.same_as(src):
        return np.array(amplitudes, dtype=np.complex128)
    n = src.n_points
    c = sfft.fftshift(fft(amplitudes))
    c[0] = 0.0  # Nyquist
    j = np.arange(n) - n // 2
    dk = 2.0 * np.pi / src.length
    offset = target.x_min - src.x_min
    # exp(i k_j offset) with k_j offset = 2 pi j offset/length
    d = c * np.exp(2j * np.pi * _frac_cycles(offset / src.length, j.astype(float)))
    m = target.n_points
    h = target.dx
    vals = zoom_sum(d, dk * h, m)
    # undo the index shift j -> j + n/2
    q = np.arange(m, dtype=float)
    shift = np.exp(-2j * np.pi * _frac_cycles((n // 2) * h / src.length, q))
    out = vals * shift / n
    x = target.x
    pad = 1e-12 * src.length
    out[(x < src.x_min - pad) | (x > src.x_max + pad)] = 0.0
    return out
