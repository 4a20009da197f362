"""Pointwise and recurrence kernels, numba-compiled when available.

Every kernel has a pure-numpy twin with identical semantics. The numba
versions are used unless ``QATCHAIN_NUMBA=0`` is set in the environment or
numba cannot be imported. FFTs always go through ``scipy.fft``; numba has
no FFT of its own.
"""
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _numpy_hermite(n, y):
    y = np.asarray(y, dtype=np.float64)
    h_prev = np.ones_like(y)
    if n == 0:
        return h_prev
    h = 2.0 * y
    for k in range(1, n):
        h_prev, h = h, 2.0 * y * h - 2.0 * k * h_prev
    return h


def _numpy_quadratic_phase(psi, x, a, scale):
    return psi * (scale * np.exp(1j * a * x * x))


def _numpy_raw_moments(psi, x):
    rho = psi.real ** 2 + psi.imag ** 2
    s0 = rho.sum()
    s1 = (rho * x).sum()
    s2 = (rho * x * x).sum()
    return s0, s1, s2


def _numpy_central_moments(psi, x, mean):
    rho = psi.real ** 2 + psi.imag ** 2
    d2 = (x - mean) ** 2
    return rho.sum(), (rho * d2).sum(), (rho * d2 * d2).sum()


def _numpy_multiply_inplace(psi, phase):
    psi *= phase


def _numpy_trig_eval(coeffs, k, x):
    out = np.empty(x.shape[0], dtype=np.complex128)
    chunk = max(1, 2 ** 22 // max(1, k.shape[0]))
    for start in range(0, x.shape[0], chunk):
        xs = x[start:start + chunk]
        out[start:start + chunk] = np.exp(1j * np.outer(xs, k)) @ coeffs
    return out


NUMPY_KERNELS = {
    "hermite": _numpy_hermite,
    "quadratic_phase": _numpy_quadratic_phase,
    "raw_moments": _numpy_raw_moments,
    "central_moments": _numpy_central_moments,
    "multiply_inplace": _numpy_multiply_inplace,
    "trig_eval": _numpy_trig_eval,
}

NUMBA_KERNELS = {}

if numba is not None:

    @numba.njit(cache=True)
    def _nb_hermite_scalar(n, y):
        h_prev = 1.0
        if n == 0:
            return h_prev
        h = 2.0 * y
        for k in range(1, n):
            h_next = 2.0 * y * h - 2.0 * k * h_prev
            h_prev = h
            h = h_next
        return h

    @numba.njit(cache=True)
    def _nb_hermite(n, y):
        out = np.empty(y.shape[0])
        for i in range(y.shape[0]):
            out[i] = _nb_hermite_scalar(n, y[i])
        return out

    @numba.njit(cache=True)
    def _nb_quadratic_phase(psi, x, a, scale):
        out = np.empty_like(psi)
        for i in range(psi.shape[0]):
            arg = a * x[i] * x[i]
            out[i] = psi[i] * scale * complex(np.cos(arg), np.sin(arg))
        return out

    @numba.njit(cache=True)
    def _nb_raw_moments(psi, x):
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        for i in range(psi.shape[0]):
            rho = psi[i].real ** 2 + psi[i].imag ** 2
            s0 += rho
            s1 += rho * x[i]
            s2 += rho * x[i] * x[i]
        return s0, s1, s2

    @numba.njit(cache=True)
    def _nb_central_moments(psi, x, mean):
        s0 = 0.0
        s2 = 0.0
        s4 = 0.0
        for i in range(psi.shape[0]):
            rho = psi[i].real ** 2 + psi[i].imag ** 2
            d2 = (x[i] - mean) ** 2
            s0 += rho
            s2 += rho * d2
            s4 += rho * d2 * d2
        return s0, s2, s4

    @numba.njit(cache=True)
    def _nb_multiply_inplace(psi, phase):
        for i in range(psi.shape[0]):
            psi[i] *= phase[i]

    @numba.njit(cache=True)
    def _nb_trig_eval(coeffs, k, x):
        out = np.empty(x.shape[0], dtype=np.complex128)
        for m in range(x.shape[0]):
            acc = 0.0 + 0.0j
            for j in range(k.shape[0]):
                arg = k[j] * x[m]
                acc += coeffs[j] * complex(np.cos(arg), np.sin(arg))
            out[m] = acc
        return out

    NUMBA_KERNELS = {
        "hermite": _nb_hermite,
        "quadratic_phase": _nb_quadratic_phase,
        "raw_moments": _nb_raw_moments,
        "central_moments": _nb_central_moments,
        "multiply_inplace": _nb_multiply_inplace,
        "trig_eval": _nb_trig_eval,
    }


def numba_enabled():
    """True when the numba kernels are active for this process."""
    return bool(NUMBA_KERNELS) and os.environ.get("QATCHAIN_NUMBA", "1") != "0"


BACKEND = "numba" if numba_enabled() else "numpy"
_ACTIVE = NUMBA_KERNELS if BACKEND == "numba" else NUMPY_KERNELS


def hermite(n, y):
    """Physicists' Hermite polynomial H_n on a 1-D float array."""
    return _ACTIVE["hermite"](int(n), np.ascontiguousarray(y, dtype=np.float64))


def quadratic_phase(psi, x, a, scale=1.0):
    """Return ``scale * exp(i a x**2) * psi``."""
    return _ACTIVE["quadratic_phase"](
        np.ascontiguousarray(psi, dtype=np.complex128),
        np.ascontiguousarray(x, dtype=np.float64), float(a), float(scale))


def raw_moments(psi, x):
    """Sums of |psi|^2, x|psi|^2 and x^2|psi|^2 (no dx factor)."""
    return _ACTIVE["raw_moments"](np.ascontiguousarray(psi, dtype=np.complex128),
                                  np.ascontiguousarray(x, dtype=np.float64))


def central_moments(psi, x, mean):
    """Sums of |psi|^2, (x-mean)^2|psi|^2 and (x-mean)^4|psi|^2."""
    return _ACTIVE["central_moments"](np.ascontiguousarray(psi, dtype=np.complex128),
                                      np.ascontiguousarray(x, dtype=np.float64),
                                      float(mean))


def multiply_inplace(psi, phase):
    _ACTIVE["multiply_inplace"](psi, phase)


def trig_eval(coeffs, k, x):
    """Direct O(N*M) evaluation of sum_j coeffs[j] exp(i k[j] x[m])."""
    return _ACTIVE["trig_eval"](np.ascontiguousarray(coeffs, dtype=np.complex128),
                                np.ascontiguousarray(k, dtype=np.float64),
                                np.ascontiguousarray(x, dtype=np.float64))
