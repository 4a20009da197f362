import math

import numpy as np
import pytest

from qatchain import (Grid, GridState, HGParams, LsodeSpec, OracleConfig, Schedule,
                      Segment, chain_evolve_direct, chain_evolve_qat, classical_solutions,
                      factorized_evolve, fidelity, gaussian_packet, hermite_gauss_free,
                      ho_eigenstate, oracle_evolve)
from qatchain.errors import CausticError, TruncationError
from qatchain.spectral import fft, ifft

from conftest import smooth_random_state

L0 = 1 / math.sqrt(2)


def test_free_gaussian(free, grid):
    s = ho_eigenstate(0, LsodeSpec(omega=1.0), 0.0, grid)
    for t in (0.5, 1.0, 2.0):
        out = factorized_evolve(free, None, s, t)
        assert out.time == t
        assert np.max(np.abs(out.amplitudes - gaussian_packet(L0, 1.0, t, grid.x))) < 1e-9


@pytest.mark.parametrize("spec", [LsodeSpec(omega=1.0), LsodeSpec(omega=0.0),
                                  LsodeSpec(omega=1.0, damping_rate=0.2)])
def test_identity_at_anchor(spec, grid):
    s = GridState(grid, smooth_random_state(np.random.default_rng(1), grid), 0.0)
    out = factorized_evolve(spec, None, s, 0.0)
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)


def test_full_period_eigenstate_sign(ho1, grid):
    s = ho_eigenstate(1, ho1, 0.0, grid)
    out = factorized_evolve(ho1, None, s, 2 * math.pi, substeps=8)
    assert np.max(np.abs(out.amplitudes + s.amplitudes)) < 1e-8
    auto = factorized_evolve(ho1, None, s, 2 * math.pi)
    assert np.max(np.abs(auto.amplitudes + s.amplitudes)) < 1e-8


def test_full_period_recurrence_random(ho1, grid):
    s = GridState(grid, smooth_random_state(np.random.default_rng(4), grid), 0.0)
    out = factorized_evolve(ho1, None, s, 2 * math.pi)
    assert abs(fidelity(out, s) - 1) < 1e-8


def test_caustic_without_splitting(ho1, grid):
    s = ho_eigenstate(0, ho1, 0.0, grid)
    with pytest.raises(CausticError):
        factorized_evolve(ho1, None, s, math.pi / 2 - 1e-4, split_caustics=False)
    # allowed (if ill-conditioned) above the hard threshold
    factorized_evolve(ho1, None, s, 1.2, split_caustics=False)


def test_anchor_mismatch(ho1, grid):
    s = ho_eigenstate(0, ho1, 0.0, grid)
    with pytest.raises(ValueError):
        factorized_evolve(ho1, classical_solutions(ho1, 1.0), s, 1.5)


@pytest.mark.parametrize("spec", [LsodeSpec(omega=1.0), LsodeSpec(omega=0.0),
                                  LsodeSpec(omega=1.3, damping_rate=0.2)])
def test_composition(spec, grid):
    s = GridState(grid, smooth_random_state(np.random.default_rng(5), grid), 0.0)
    whole = factorized_evolve(spec, None, s, 0.9)
    half = factorized_evolve(spec, None, s, 0.4)
    two = factorized_evolve(spec, None, half, 0.9)
    assert np.max(np.abs(whole.amplitudes - two.amplitudes)) < 1e-10


@pytest.mark.parametrize("spec,anchor", [(LsodeSpec(omega=1.0), 0.0),
                                         (LsodeSpec(omega=0.0), 0.0),
                                         (LsodeSpec(omega=1.0, damping_rate=0.2), 0.7)])
def test_generator(spec, anchor, grid):
    rng = np.random.default_rng(6)
    psi = smooth_random_state(rng, grid)
    s = GridState(grid, psi, anchor)
    eps = 1e-5
    out = factorized_evolve(spec, None, s, anchor + eps)
    lhs = (out.amplitudes - psi) / eps
    ef = math.exp(spec.damping_rate * anchor)
    kinetic = -0.5 * ifft(-grid.k ** 2 * fft(psi)) / ef
    potential = 0.5 * spec.omega ** 2 * ef * grid.x ** 2 * psi
    rhs = -1j * (kinetic + potential)
    assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) < 1e-3


def test_output_grid_option(ho1, grid):
    s = ho_eigenstate(0, ho1, 0.0, grid)
    out = factorized_evolve(LsodeSpec(omega=0.0), None, s, 3.0,
                            out_grid=Grid.symmetric(40.0, 2048))
    ref = gaussian_packet(L0, 1.0, 3.0, out.grid.x)
    assert np.max(np.abs(out.amplitudes - ref)) < 1e-9


def test_truncation_detected(free):
    g = Grid.symmetric(8.0, 256)
    s = ho_eigenstate(0, LsodeSpec(omega=1.0), 0.0, g)
    with pytest.raises(TruncationError):
        factorized_evolve(free, None, s, 30.0)


# --- chained evolution ------------------------------------------------------

def test_empty_schedule(ho1, grid):
    s = ho_eigenstate(0, ho1, 0.0, grid)
    out, report = chain_evolve_direct(Schedule(), s)
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)
    assert len(report.rows) == 1
    out = chain_evolve_qat(Schedule(), s)
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)


def test_direct_against_oracle(ho1, grid):
    s = ho_eigenstate(0, ho1, 0.0, grid)
    sched = Schedule((Segment.harmonic(1.0, math.pi / 4), Segment.free(1.0)))
    out, report = chain_evolve_direct(sched, s)
    assert out.time == pytest.approx(math.pi / 4 + 1)
    assert abs(out.norm() - 1) < 1e-10
    truth = oracle_evolve(OracleConfig(), sched, s)
    assert fidelity(out, truth) >= 1 - 1e-6
    assert len(report.rows) == 1 + 2 * 17


@pytest.mark.parametrize("n", [0, 2])
def test_three_segment_paths_agree(n):
    grid = Grid.symmetric(30.0, 2048)
    s = ho_eigenstate(n, LsodeSpec(omega=1.0), 0.0, grid)
    sched = Schedule((Segment.free(1.0), Segment.harmonic(1.3, 0.8), Segment.free(0.7)))
    direct, _ = chain_evolve_direct(sched, s, samples_per_segment=0)
    qat = chain_evolve_qat(sched, s)
    assert qat.time == pytest.approx(direct.time)
    assert np.max(np.abs(direct.amplitudes - qat.amplitudes)) < 1e-8


def test_qat_eigen_phase_only(grid):
    s = ho_eigenstate(3, LsodeSpec(omega=2.0), 0.0, grid)
    out = chain_evolve_qat(Schedule((Segment.harmonic(2.0, 1.7),)), s)
    np.testing.assert_allclose(out.amplitudes, s.amplitudes * np.exp(-1j * 2 * 3.5 * 1.7),
                               atol=1e-15)


def test_qat_free_lapse_via_oscillator(grid):
    s = ho_eigenstate(0, LsodeSpec(omega=1.0), 0.0, grid)
    out = chain_evolve_qat(Schedule((Segment.free(1.0),)), s, bridge_omega=1.0)
    assert out.time == pytest.approx(1.0)
    assert np.max(np.abs(out.amplitudes - gaussian_packet(L0, 1.0, 1.0, grid.x))) < 1e-9


def test_qat_long_free_lapse_is_split():
    grid = Grid.symmetric(200.0, 4096)
    s = ho_eigenstate(1, LsodeSpec(omega=1.0), 0.0, grid)
    out = chain_evolve_qat(Schedule((Segment.free(25.0),)), s)
    ref = hermite_gauss_free(HGParams.from_oscillator(1, 1.0), 25.0, grid)
    assert np.max(np.abs(out.amplitudes - ref.amplitudes)) < 1e-9


def test_random_schedules_paths_agree():
    rng = np.random.default_rng(11)
    grid = Grid.symmetric(25.0, 1024)
    for _ in range(20):
        omegas = rng.uniform(0.5, 2.0, 4)
        segs = []
        for w in omegas[: rng.integers(1, 5)]:
            d = rng.uniform(0.05, math.pi / (4 * w))
            segs.append(Segment.free(d) if rng.random() < 0.5 else Segment.harmonic(w, d))
        sched = Schedule(tuple(segs))
        n = int(rng.integers(0, 4))
        s = ho_eigenstate(n, LsodeSpec(omega=float(rng.uniform(0.5, 2.0))), 0.0, grid)
        direct, _ = chain_evolve_direct(sched, s, samples_per_segment=0)
        qat = chain_evolve_qat(sched, s)
        assert abs(direct.norm() - 1) < 1e-10
        assert abs(qat.norm() - 1) < 1e-10
        assert np.max(np.abs(direct.amplitudes - qat.amplitudes)) < 1e-8


def test_segment_error_annotated():
    g = Grid.symmetric(8.0, 256)
    s = ho_eigenstate(0, LsodeSpec(omega=1.0), 0.0, g)
    sched = Schedule((Segment.harmonic(1.0, 0.5), Segment.free(40.0)))
    with pytest.raises(TruncationError) as info:
        chain_evolve_direct(sched, s)
    assert info.value.segment_index == 1
    assert "segment 1" in str(info.value)


def test_segment_validation():
    with pytest.raises(ValueError):
        Segment.free(0.0)
    with pytest.raises(ValueError):
        Segment("harmonic", 1.0)
    with pytest.raises(ValueError):
        Segment("free", 1.0, omega=2.0)
    with pytest.raises(ValueError):
        Segment("kick", 1.0)


def test_schedule_bookkeeping():
    sched = Schedule((Segment.free(1.0), Segment.harmonic(2.0, 0.5)), t_start=3.0)
    assert sched.switching_times() == [3.0, 4.0, 4.5]
    assert sched.t_end == 4.5
    assert sched.omega_max == 2.0
    cut = sched.truncated(4.2)
    assert cut.t_end == pytest.approx(4.2)
    assert len(cut) == 2
