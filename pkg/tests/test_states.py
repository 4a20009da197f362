import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qatchain import (Grid, HGParams, LsodeSpec, gaussian_packet, hermite_gauss_free,
                      hermite_poly, ho_eigenstate, inner, moments)
from qatchain.errors import TruncationError, UnsupportedOrderError
from qatchain.spectral import fft, ifft


def test_hermite_low_orders():
    y = np.linspace(-3, 3, 13)
    np.testing.assert_array_equal(hermite_poly(0, y), np.ones_like(y))
    np.testing.assert_allclose(hermite_poly(2, y), 4 * y * y - 2, rtol=1e-15)
    assert hermite_poly(1, 0.25) == 0.5


def test_hermite_10_against_exact_series():
    # explicit series evaluated in exact rationals at y = 3/2
    assert hermite_poly(10, 1.5) == pytest.approx(-85401.0, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 30), y=st.floats(-4, 4))
def test_hermite_matches_mpmath(n, y):
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    ref = float(mpmath.hermite(n, y))
    assert hermite_poly(n, y) == pytest.approx(ref, rel=1e-10, abs=1e-10 * 2.0 ** n)


def test_hermite_order_limit():
    hermite_poly(64, 0.3)
    with pytest.raises(UnsupportedOrderError):
        hermite_poly(65, 0.3)


def test_ground_state_closed_form(ho1, grid):
    s = ho_eigenstate(0, ho1, 0.0, grid)
    expected = math.pi ** -0.25 * np.exp(-grid.x ** 2 / 2)
    np.testing.assert_allclose(s.amplitudes, expected, atol=1e-15)
    assert abs(s.norm() - 1) < 1e-9


def test_eigenstate_phase(ho1, grid):
    a = ho_eigenstate(0, ho1, 0.0, grid).amplitudes
    b = ho_eigenstate(0, ho1, 2 * math.pi, grid).amplitudes
    np.testing.assert_allclose(b, -a, atol=1e-15)
    spec = LsodeSpec(omega=2.0)
    a = ho_eigenstate(3, spec, 0.0, grid).amplitudes
    b = ho_eigenstate(3, spec, 0.7, grid).amplitudes
    np.testing.assert_allclose(b, a * np.exp(-1j * 2.0 * 3.5 * 0.7), atol=1e-12)


@pytest.mark.parametrize("n", [0, 1, 5, 20, 64])
def test_eigenstate_normalized(n):
    grid = Grid.symmetric(25.0, 4096)
    s = ho_eigenstate(n, LsodeSpec(omega=1.0), 0.0, grid)
    assert abs(s.norm() - 1) < 1e-9


def test_eigenstate_truncation():
    with pytest.raises(TruncationError):
        ho_eigenstate(10, LsodeSpec(omega=1.0), 0.0, Grid.symmetric(3.0, 256))


def test_free_packet_at_zero_is_eigenstate(ho1, grid):
    for n in range(6):
        p = HGParams.from_oscillator(n, 1.0)
        a = hermite_gauss_free(p, 0.0, grid).amplitudes
        b = ho_eigenstate(n, ho1, 0.0, grid).amplitudes
        np.testing.assert_allclose(a, b, atol=1e-14)


def test_free_gaussian_closed_form(grid):
    p = HGParams.from_oscillator(0, 1.0)
    for t in (0.3, 1.0, 2.5, -1.2):
        s = hermite_gauss_free(p, t, grid)
        d = p.delta(t)
        ref = (2 * math.pi) ** -0.25 * np.sqrt(1 / (p.L * d)) * np.exp(
            -grid.x ** 2 / (4 * p.L ** 2 * d))
        np.testing.assert_allclose(s.amplitudes, ref, atol=1e-14)
        np.testing.assert_allclose(s.amplitudes, gaussian_packet(p.L, p.tau, t, grid.x),
                                   atol=1e-15)


def test_hg_params():
    p = HGParams.from_oscillator(2, omega=4.0, mass=2.0, hbar=1.0)
    assert p.L == pytest.approx(math.sqrt(1 / 16))
    assert p.tau == pytest.approx(0.25)
    assert p.delta(0.5) == pytest.approx(1 + 2j)
    assert p.width(0.5) == pytest.approx(p.L * math.sqrt(5))


def test_hg_variance_n4():
    grid = Grid.symmetric(30.0, 2048)
    p = HGParams.from_oscillator(4, 1.0)
    s = hermite_gauss_free(p, p.tau, grid)
    # eigenstate n: <x^2> = L^2 (2n+1); free spreading multiplies by |delta|^2
    expected = p.L ** 2 * abs(p.delta(p.tau)) ** 2 * (2 * 4 + 1)
    assert moments(s).var_x == pytest.approx(expected, rel=1e-10)


def test_orthonormality_over_time():
    grid = Grid.symmetric(40.0, 2048)
    for t in (0.0, 0.8, 2.0):
        states = [hermite_gauss_free(HGParams.from_oscillator(n, 1.0), t, grid)
                  for n in range(6)]
        gram = np.array([[inner(a, b) for b in states] for a in states])
        np.testing.assert_allclose(gram, np.eye(6), atol=1e-8)


@pytest.mark.parametrize("n", [0, 1, 3, 5])
def test_free_schrodinger_residual(n):
    grid = Grid.symmetric(30.0, 2048)
    p = HGParams.from_oscillator(n, 1.0)
    t, h = 0.7, 1e-4
    psi = hermite_gauss_free(p, t, grid).amplitudes
    dpsi = (hermite_gauss_free(p, t + h, grid).amplitudes
            - hermite_gauss_free(p, t - h, grid).amplitudes) / (2 * h)
    lap = ifft(-grid.k ** 2 * fft(psi))
    lhs, rhs = 1j * dpsi, -0.5 * lap
    interior = np.abs(grid.x) < 8
    rel = np.max(np.abs(lhs - rhs)[interior]) / np.max(np.abs(rhs[interior]))
    assert rel < 1e-6


def test_width_law(grid):
    p = HGParams.from_oscillator(0, 1.0)
    for t in (0.5, 1.0, 3.0):
        var = moments(hermite_gauss_free(p, t, Grid.symmetric(30, 2048))).var_x
        assert var == pytest.approx(p.L ** 2 * (1 + t * t), rel=1e-8)


def test_branch_consistent_with_free_propagator():
    # stepping the closed form by the exact free propagator must reproduce it
    # (catches sign flips of the fractional powers at large t/tau)
    grid = Grid.symmetric(300.0, 4096)
    p = HGParams.from_oscillator(3, 1.0)
    times = [0.0, 2.0, 9.0, 17.5, 30.0]
    for t0, t1 in zip(times, times[1:]):
        a = hermite_gauss_free(p, t0, grid).amplitudes
        b = hermite_gauss_free(p, t1, grid).amplitudes
        stepped = ifft(fft(a) * np.exp(-0.5j * grid.k ** 2 * (t1 - t0)))
        assert np.max(np.abs(stepped - b)) < 1e-10
