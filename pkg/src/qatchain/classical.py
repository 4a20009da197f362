"""Classical solutions of the damped, time-dependent oscillator equation.

The equation is ``u'' + f'(t) u' + omega(t)**2 u = 0`` with ``f(t) = gamma*t``.
A :class:`ClassicalSolutionPair` holds the two solutions anchored at ``t0``::

    u1(t0) = 0, u1'(t0) = 1,    u2(t0) = 1, u2'(t0) = 0

so that the Arnold map is the identity at the anchor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CausticError, MapRangeError, UnsupportedSpecError

OmegaLike = Union[float, Callable[[float], float]]

RK_RTOL = 1e-12
RK_ATOL = 1e-14
BISECTION_TOL = 1e-12


@dataclass(frozen=True)
class LsodeSpec:
    """Target system: mass, hbar, damping rate gamma and frequency omega(t).

    ``omega`` is either a non-negative constant or a callable of time.
    """

    mass: float = 1.0
    hbar: float = 1.0
    damping_rate: float = 0.0
    omega: OmegaLike = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if not callable(self.omega) and not self.omega >= 0:
            raise ValueError("omega must be non-negative")

    @property
    def constant_omega(self) -> bool:
        return not callable(self.omega)

    def omega_at(self, t):
        if callable(self.omega):
            w = self.omega(t)
            if np.any(np.asarray(w) < 0):
                raise ValueError(f"omega({t}) is negative")
            return w
        return self.omega

    def f(self, t):
        """Damping exponent f(t) = gamma*t."""
        return self.damping_rate * np.asarray(t, dtype=float)

    @property
    def is_free(self) -> bool:
        return self.constant_omega and self.omega == 0 and self.damping_rate == 0

    @property
    def is_harmonic(self) -> bool:
        return self.constant_omega and self.omega > 0 and self.damping_rate == 0


@dataclass(frozen=True)
class ClassicalSolutionPair:
    """Anchored pair (u1, u2) with derivatives and Wronskian.

    ``validity`` is the open interval around the anchor on which u2 > 0
    (clipped to the integration horizon for numerically integrated pairs).
    ``kind`` is one of ``"free"``, ``"harmonic"``, ``"damped"`` (closed-form
    Caldirola-Kanai) or ``"numeric"``.
    """

    anchor_time: float
    u1: Callable
    u2: Callable
    du1: Callable
    du2: Callable
    validity: tuple[float, float]
    kind: str
    omega: float = 0.0
    damping_rate: float = 0.0

    def wronskian(self, t):
        return self.du1(t) * self.u2(t) - self.u1(t) * self.du2(t)

    def time_map(self, t_prime):
        """Anchor-relative Arnold time u1/u2."""
        return self.u1(t_prime) / self.u2(t_prime)

    def inside(self, t_prime) -> bool:
        lo, hi = self.validity
        return lo < t_prime < hi


def _free_pair(t0: float) -> ClassicalSolutionPair:
    return ClassicalSolutionPair(
        anchor_time=t0,
        u1=lambda t: np.asarray(t, dtype=float) - t0,
        u2=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        du1=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        du2=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        validity=(-math.inf, math.inf),
        kind="free",
    )


def _harmonic_pair(omega: float, t0: float) -> ClassicalSolutionPair:
    w = float(omega)
    half = 0.5 * math.pi / w
    return ClassicalSolutionPair(
        anchor_time=t0,
        u1=lambda t: np.sin(w * (np.asarray(t, dtype=float) - t0)) / w,
        u2=lambda t: np.cos(w * (np.asarray(t, dtype=float) - t0)),
        du1=lambda t: np.cos(w * (np.asarray(t, dtype=float) - t0)),
        du2=lambda t: -w * np.sin(w * (np.asarray(t, dtype=float) - t0)),
        validity=(t0 - half, t0 + half),
        kind="harmonic",
        omega=w,
    )


def _damped_pair(omega: float, gamma: float, t0: float) -> ClassicalSolutionPair:
    """Closed-form Caldirola-Kanai pair (under-, critically or over-damped)."""
    w, g = float(omega), float(gamma)
    disc = w * w - 0.25 * g * g
    if disc > 0:
        big = math.sqrt(disc)
        c, s = np.cos, lambda z: np.sin(z)
        sgn = -1.0
    elif disc < 0:
        big = math.sqrt(-disc)
        c, s = np.cosh, lambda z: np.sinh(z)
        sgn = 1.0
    else:
        big = 0.0

    def env(t):
        return np.exp(-0.5 * g * (np.asarray(t, dtype=float) - t0))

    if big == 0.0:
        def u1(t):
            return (np.asarray(t, dtype=float) - t0) * env(t)

        def u2(t):
            return (1.0 + 0.5 * g * (np.asarray(t, dtype=float) - t0)) * env(t)

        def du1(t):
            return (1.0 - 0.5 * g * (np.asarray(t, dtype=float) - t0)) * env(t)

        def du2(t):
            return -0.25 * g * g * (np.asarray(t, dtype=float) - t0) * env(t)
    else:
        def u1(t):
            z = big * (np.asarray(t, dtype=float) - t0)
            return env(t) * s(z) / big

        def u2(t):
            z = big * (np.asarray(t, dtype=float) - t0)
            return env(t) * (c(z) + 0.5 * g / big * s(z))

        def du1(t):
            z = big * (np.asarray(t, dtype=float) - t0)
            return env(t) * (c(z) - 0.5 * g / big * s(z))

        def du2(t):
            z = big * (np.asarray(t, dtype=float) - t0)
            # d/dt of u2; the cos/cosh branches differ only through sgn
            return env(t) * s(z) * (sgn * big - 0.25 * g * g / big)

    # zeros of u2 on either side of the anchor
    lo, hi = -math.inf, math.inf
    if disc > 0:
        phi = math.atan2(2.0 * big, g)  # in (0, pi)
        hi = t0 + (math.pi - phi) / big
        lo = t0 - phi / big
    elif g != 0:
        # single zero, on the side opposite to the sign of gamma
        if big == 0.0:
            reach = 2.0 / abs(g)
        elif 0.5 * abs(g) > big:
            reach = math.atanh(2.0 * big / abs(g)) / big
        else:
            reach = math.inf
        if g > 0:
            lo = t0 - reach
        else:
            hi = t0 + reach
    return ClassicalSolutionPair(t0, u1, u2, du1, du2, (lo, hi), "damped",
                                 omega=w, damping_rate=g)


def _numeric_pair(spec: LsodeSpec, t0: float, horizon: float) -> ClassicalSolutionPair:
    g = spec.damping_rate

    def rhs(t, y):
        w2 = spec.omega_at(t) ** 2
        return [y[1], -g * y[1] - w2 * y[0], y[3], -g * y[3] - w2 * y[2]]

    def caustic(t, y):
        return y[2]

    caustic.terminal = True
    y0 = [0.0, 1.0, 1.0, 0.0]
    branches = []
    ends = []
    for sign in (+1.0, -1.0):
        res = solve_ivp(rhs, (t0, t0 + sign * horizon), y0, method="DOP853",
                        rtol=RK_RTOL, atol=RK_ATOL, dense_output=True,
                        events=caustic)
        if res.status == -1:
            raise UnsupportedSpecError(f"integration failed: {res.message}")
        branches.append(res.sol)
        if res.t_events[0].size:
            ends.append(float(res.t_events[0][0]))
        else:
            ends.append(t0 + sign * horizon)
    fwd, bwd = branches

    def component(idx):
        def evaluate(t):
            t = np.asarray(t, dtype=float)
            flat = np.atleast_1d(t)
            out = np.empty(flat.shape)
            m = flat >= t0
            if m.any():
                out[m] = fwd(flat[m])[idx]
            if (~m).any():
                out[~m] = bwd(flat[~m])[idx]
            return out.reshape(t.shape) if t.ndim else float(out[0])
        return evaluate

    return ClassicalSolutionPair(
        anchor_time=t0, u1=component(0), du1=component(1), u2=component(2),
        du2=component(3), validity=(ends[1], ends[0]), kind="numeric",
        omega=float(spec.omega) if spec.constant_omega else math.nan,
        damping_rate=g)


def classical_solutions(spec: LsodeSpec, anchor: float = 0.0, *,
                        method: str = "auto", horizon: float | None = None
                        ) -> ClassicalSolutionPair:
    """Anchored classical pair for ``spec``.

    Parameters
    ----------
    spec : LsodeSpec
    anchor : float
        Anchor time t0.
    method : {"auto", "closed", "numeric", "none"}
        ``auto`` uses closed forms for undamped constant-frequency systems and
        adaptive Runge-Kutta (DOP853, rtol 1e-10) otherwise. ``closed`` also
        accepts the damped constant-frequency case. ``none`` forbids numeric
        integration.
    horizon : float, optional
        Integration half-width for the numeric path; defaults to
        ``4*pi/omega(anchor)`` (or 50 when omega vanishes there).
    """
    t0 = float(anchor)
    closed_ok = spec.constant_omega
    if method not in ("auto", "closed", "numeric", "none"):
        raise ValueError(f"unknown method {method!r}")
    if method != "numeric" and closed_ok:
        if spec.damping_rate == 0.0:
            if spec.omega == 0:
                return _free_pair(t0)
            return _harmonic_pair(spec.omega, t0)
        if method in ("closed", "none"):
            return _damped_pair(spec.omega, spec.damping_rate, t0)
    if method in ("closed", "none"):
        raise UnsupportedSpecError(
            "no closed form for time-dependent omega and numeric integration "
            "is disabled")
    if horizon is None:
        w0 = float(spec.omega_at(t0))
        horizon = 4.0 * math.pi / w0 if w0 > 0 else 50.0
    return _numeric_pair(spec, t0, float(horizon))


def arnold_map(pair: ClassicalSolutionPair, x_prime, t_prime: float):
    """Classical Arnold map ``(x', t') -> (x'/u2, u1/u2)``.

    The returned time is relative to the anchor (zero at ``t' = t0``).
    """
    if not pair.inside(t_prime):
        raise CausticError(f"t'={t_prime} outside validity interval {pair.validity}")
    u2 = float(pair.u2(t_prime))
    if u2 <= 0:
        raise CausticError(f"u2({t_prime}) = {u2} <= 0")
    return np.asarray(x_prime) / u2, float(pair.u1(t_prime)) / u2


def _inverse_time(pair: ClassicalSolutionPair, t: float) -> float:
    t0 = pair.anchor_time
    if pair.kind == "free":
        return t0 + t
    if pair.kind == "harmonic":
        return t0 + math.atan(pair.omega * t) / pair.omega
    if t == 0:
        return t0
    sign = math.copysign(1.0, t)
    edge = pair.validity[1] if sign > 0 else pair.validity[0]

    def reached(s):
        return sign * float(pair.time_map(s)) >= abs(t)

    if math.isinf(edge):
        b = t0 + sign
        while not reached(b):
            b = t0 + 2.0 * (b - t0)
            if abs(b - t0) > 1e12:
                raise MapRangeError(f"t={t} not reachable")
    else:
        # t(t') is monotone, so walk geometrically towards the open end
        for k in range(1, 60):
            b = edge - (edge - t0) * 2.0 ** -k
            if reached(b):
                break
        else:
            raise MapRangeError(f"t={t} outside the image of {pair.validity}")
    a = t0
    while abs(b - a) > BISECTION_TOL:
        mid = 0.5 * (a + b)
        if reached(mid):
            b = mid
        else:
            a = mid
    return 0.5 * (a + b)


def arnold_map_inverse(pair: ClassicalSolutionPair, x, t: float):
    """Inverse Arnold map: anchor-relative ``t`` back to ``(x', t')``."""
    t_prime = _inverse_time(pair, float(t))
    if not pair.inside(t_prime):
        raise MapRangeError(f"t={t} outside the image of {pair.validity}")
    return np.asarray(x) * float(pair.u2(t_prime)), t_prime
