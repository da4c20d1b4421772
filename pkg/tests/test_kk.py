import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import jv

from floqcc.gtable import GridCoverageError, TransitionProbabilityTable
from floqcc.kk import (
    DecayTrace,
    ModulationSpectrum,
    WindowTooSmallError,
    decay_trace,
    modulation_coefficients,
    predict_branching,
    spectral_function,
    spectral_overlap,
)
from floqcc.spinrotor import PulseTrain
from floqcc.units import H_EFF_O2_K_PER_G

H = H_EFF_O2_K_PER_G


def test_static_pulse_is_delta_spectrum():
    pulse = PulseTrain(b0=320.0, omega_b=7.0e-3)
    spec = modulation_coefficients(pulse, 1)
    assert list(spec.k_values) == [0]
    assert spec.lam[0] == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("amp", [10.0, 100.0, 500.0])
@pytest.mark.parametrize("charge", [1, 2])
def test_single_harmonic_matches_bessel(amp, charge):
    pulse = PulseTrain.from_mhz(b0=320.0, nu_mhz=147.46, harmonics=((1, amp),))
    spec = modulation_coefficients(pulse, charge, window=25)
    z = charge * H * amp / pulse.omega_b
    for k in range(-20, 21):
        want = jv(k, z)
        assert spec.coefficient(k).real == pytest.approx(want, abs=1e-8)
        assert abs(spec.coefficient(k).imag) < 1e-10


def test_lambda_real_for_cosine_drives():
    # B~(t) built from cosines is even, so eps(-t) = eps(t)* and every
    # lambda_K is real (multi-harmonic spectra are generally asymmetric
    # in K, but stay real).
    rng = np.random.default_rng(42)
    for _ in range(20):
        nh = rng.integers(1, 7)
        harmonics = tuple(
            (int(n), float(a))
            for n, a in zip(
                rng.choice(np.arange(1, 9), size=nh, replace=False),
                rng.uniform(-300, 300, size=nh),
            )
        )
        pulse = PulseTrain.from_mhz(b0=320.0, nu_mhz=200.0, harmonics=harmonics)
        spec = modulation_coefficients(pulse, 1)
        assert np.max(np.abs(spec.lam.imag)) < 1e-10


def test_parseval_for_random_trains():
    rng = np.random.default_rng(1)
    for _ in range(100):
        nh = rng.integers(1, 7)
        harmonics = tuple(
            (int(n), float(a))
            for n, a in zip(
                rng.choice(np.arange(1, 10), size=nh, replace=False),
                rng.uniform(-400, 400, size=nh),
            )
        )
        pulse = PulseTrain.from_mhz(
            b0=float(rng.uniform(50, 500)), nu_mhz=float(rng.uniform(80, 400)),
            harmonics=harmonics,
        )
        spec = modulation_coefficients(pulse, int(rng.integers(1, 3)))
        assert spec.weights.sum() == pytest.approx(1.0, abs=1e-10)


def test_charge_doubling_equals_amplitude_doubling():
    p1 = PulseTrain.from_mhz(b0=320.0, nu_mhz=147.46, harmonics=((1, 80.0), (2, -50.0)))
    p2 = PulseTrain.from_mhz(b0=320.0, nu_mhz=147.46, harmonics=((1, 160.0), (2, -100.0)))
    s_q2 = modulation_coefficients(p1, 2, window=20)
    s_q1 = modulation_coefficients(p2, 1, window=20)
    assert np.allclose(s_q2.lam, s_q1.lam, atol=1e-12)


def test_fft_matches_adaptive_quadrature():
    pulse = PulseTrain.from_mhz(b0=320.0, nu_mhz=147.46,
                                harmonics=((1, 120.0), (3, -70.0)))
    spec = modulation_coefficients(pulse, 1, window=15)
    zs = [(n, H * a / (n * pulse.omega_b)) for n, a in pulse.harmonics]

    def phase(tau):
        return sum(z * math.sin(n * tau) for n, z in zs)

    for k in (-7, -2, 0, 1, 4):
        re = quad(lambda u: math.cos(k * u - phase(u)), 0, 2 * math.pi,
                  limit=200)[0] / (2 * math.pi)
        im = quad(lambda u: math.sin(k * u - phase(u)), 0, 2 * math.pi,
                  limit=200)[0] / (2 * math.pi)
        got = spec.coefficient(k)
        assert got.real == pytest.approx(re, abs=1e-10)
        assert got.imag == pytest.approx(im, abs=1e-10)


def test_window_too_small_raises():
    pulse = PulseTrain.from_mhz(b0=320.0, nu_mhz=147.46, harmonics=((1, 500.0),))
    with pytest.raises(WindowTooSmallError):
        modulation_coefficients(pulse, 2, window=3)


def _uniform_table(c=2.5, channel=0):
    e = np.linspace(1e-4, 0.5, 200)
    return TransitionProbabilityTable(channel=channel, e_grid=e, g=np.full_like(e, c))


def test_overlap_static_pulse_hits_static_point():
    pulse = PulseTrain(b0=320.0, omega_b=7.0e-3)
    e = np.geomspace(1e-4, 0.5, 400)
    table = TransitionProbabilityTable(channel=0, e_grid=e, g=e**2.5)
    spec = modulation_coefficients(pulse, 1)
    want = table.interpolate(H * 320.0)
    assert spectral_overlap(spec, table) == pytest.approx(want, rel=1e-12)


def test_overlap_uniform_g_is_parseval_flat():
    # all support points must stay open and on-grid for the flat-landscape
    # identity, hence the large static offset
    table = _uniform_table(3.7)
    for harmonics in [(), ((1, 150.0),), ((1, 100.0), (2, -60.0), (3, 30.0))]:
        pulse = PulseTrain.from_mhz(b0=2000.0, nu_mhz=300.0, harmonics=harmonics)
        spec = modulation_coefficients(pulse, 1)
        assert spectral_overlap(spec, table) == pytest.approx(3.7, rel=1e-8)


def test_overlap_direct_sum_oracle_on_synthetic_valley():
    # concentrating weight at a valley reduces the overlap accordingly
    e = np.geomspace(1e-4, 0.6, 800)
    valley = 1.0 - 0.995 * np.exp(-0.5 * ((np.log(e) - np.log(0.06)) / 0.25) ** 2)
    table = TransitionProbabilityTable(channel=0, e_grid=e, g=0.01 * e**2.5 / e[-1]**2.5 + 0.02 * valley)
    pulse = PulseTrain.from_mhz(b0=320.0, nu_mhz=250.0, harmonics=((1, 230.0),))
    spec = modulation_coefficients(pulse, 1)
    # independent direct sum
    want = 0.0
    for k, w in zip(spec.k_values, spec.weights):
        ek = H * 320.0 + k * pulse.omega_b
        if ek > 0:
            want += w * table.interpolate(ek)
    assert spectral_overlap(spec, table) == pytest.approx(want, rel=1e-12)


def test_overlap_grid_error_for_heavy_offgrid_weight():
    table = TransitionProbabilityTable(
        channel=0, e_grid=np.linspace(0.03, 0.05, 10), g=np.ones(10)
    )
    pulse = PulseTrain.from_mhz(b0=320.0, nu_mhz=300.0, harmonics=((1, 200.0),))
    spec = modulation_coefficients(pulse, 1)
    with pytest.raises(GridCoverageError):
        spectral_overlap(spec, table)


def test_closed_channels_contribute_zero():
    # support points below zero energy are silently dropped even with weight
    table = _uniform_table(1.0)
    pulse = PulseTrain.from_mhz(b0=30.0, nu_mhz=200.0, harmonics=((1, 150.0),))
    spec = modulation_coefficients(pulse, 1)
    energies = spec.support_energies()
    open_mask = energies > 0
    want = spec.weights[open_mask].sum() * 1.0
    got = spectral_overlap(spec, table, weight_floor=1.0)
    assert got == pytest.approx(want, rel=1e-10)


def test_predict_branching_ratio_one_at_balanced_static_point():
    e = np.geomspace(1e-4, 0.5, 500)
    g0 = TransitionProbabilityTable(channel=0, e_grid=e, g=e**2.5)
    gm1 = TransitionProbabilityTable(channel=-1, e_grid=e, g=e**2.5)
    # choose B0 where G_0(h B0) = G_m1(2 h B0): impossible for equal tables
    # unless the tables differ; rescale gm1 so the two static points match.
    b0 = 320.0
    scale = g0.interpolate(H * b0) / g0.interpolate(2 * H * b0)
    gm1 = TransitionProbabilityTable(channel=-1, e_grid=e, g=scale * e**2.5)
    static = PulseTrain(b0=b0, omega_b=7.0e-3)
    s0, sm1, ratio = predict_branching(static, g0, gm1)
    assert ratio == pytest.approx(1.0, rel=1e-10)


def test_predict_branching_suppression_on_two_valley_tables():
    # forward-sum check: a multi-harmonic train concentrating F_0 inside the
    # G_0 valley suppresses the ratio well below the static baseline
    b0 = 320.0
    pulse = PulseTrain.from_mhz(
        b0=b0, nu_mhz=147.46,
        harmonics=((1, 184.40), (2, -165.31), (3, 132.02),
                   (4, -95.21), (5, 59.59), (6, -30.52)),
    )
    w = pulse.omega_b
    e = np.geomspace(1e-4, 1.0, 3000)
    g0_vals = np.ones_like(e)
    box = (e > H * b0 + 0.5 * w) & (e < H * b0 + 2.5 * w)
    g0_vals[box] = 1e-3
    g0 = TransitionProbabilityTable(channel=0, e_grid=e, g=g0_vals)
    gm1 = TransitionProbabilityTable(channel=-1, e_grid=e, g=np.ones_like(e))
    static = PulseTrain(b0=b0, omega_b=w)
    _, _, r_static = predict_branching(static, g0, gm1)
    _, _, r_pulse = predict_branching(pulse, g0, gm1)
    assert r_pulse < 0.2 * r_static


def test_decay_trace_zero_g_survives():
    e = np.linspace(1e-4, 0.5, 50)
    zero = TransitionProbabilityTable(channel=0, e_grid=e, g=np.zeros_like(e))
    pulse = PulseTrain.from_mhz(b0=320.0, nu_mhz=200.0, harmonics=((1, 100.0),))
    trace = decay_trace(pulse, zero, zero, np.linspace(0, 50.0, 10))
    assert np.all(trace.survival == 1.0)


def test_decay_trace_bookkeeping_and_additivity():
    e = np.geomspace(1e-4, 0.5, 300)
    g0 = TransitionProbabilityTable(channel=0, e_grid=e, g=1e-4 * e**2.5 / e[-1]**2.5)
    gm1 = TransitionProbabilityTable(channel=-1, e_grid=e, g=2e-4 * e**2.5 / e[-1]**2.5)
    zero = TransitionProbabilityTable(channel=0, e_grid=e, g=np.zeros_like(e))
    pulse = PulseTrain.from_mhz(b0=320.0, nu_mhz=200.0, harmonics=((1, 120.0),))
    t = np.linspace(0.0, 20.0, 7)
    tr = decay_trace(pulse, g0, gm1, t)
    # first-order bookkeeping: 1 - |c1|^2 matches the summed populations
    pops = np.sum(list(tr.populations.values()), axis=0)
    assert np.allclose(1.0 - tr.survival, pops, atol=(tr.rate_0 + tr.rate_m1) ** 2 * t[-1] ** 2)
    # rate additivity across channels
    tr0 = decay_trace(pulse, g0, zero, t)
    tr1 = decay_trace(pulse, zero, gm1, t)
    assert tr.rate_0 + tr.rate_m1 == pytest.approx(tr0.rate_0 + tr1.rate_m1, rel=1e-12)
    assert np.allclose(tr.survival, tr0.survival * tr1.survival, atol=1e-12)


def test_decay_trace_warns_outside_weak_coupling():
    e = np.linspace(1e-4, 0.5, 50)
    big = TransitionProbabilityTable(channel=0, e_grid=e, g=np.ones_like(e))
    pulse = PulseTrain(b0=320.0, omega_b=7.0e-3)
    with pytest.warns(RuntimeWarning):
        decay_trace(pulse, big, big, np.linspace(0, 10.0, 5))


def test_spectrum_csv_roundtrip(tmp_path):
    pulse = PulseTrain.from_mhz(b0=320.0, nu_mhz=147.46, harmonics=((1, 120.0),))
    spec = modulation_coefficients(pulse, 1)
    path = tmp_path / "spec.csv"
    spec.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape[0] == len(spec.k_values)
    assert np.allclose(data[:, 3], spec.weights, atol=1e-12)


def test_gtable_csv_roundtrip(tmp_path):
    e = np.geomspace(1e-3, 0.3, 40)
    table = TransitionProbabilityTable(channel=0, e_grid=e, g=e**2.5)
    path = tmp_path / "g.csv"
    table.to_csv(path)
    back = TransitionProbabilityTable.from_csv(path, channel=0)
    assert np.allclose(back.e_grid, table.e_grid, rtol=1e-12)
    assert np.allclose(back.g, table.g, rtol=1e-12)


def test_gtable_validation_and_threshold():
    with pytest.raises(ValueError):
        TransitionProbabilityTable(channel=0, e_grid=np.array([0.2, 0.1]),
                                   g=np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        TransitionProbabilityTable(channel=0, e_grid=np.array([0.1, 0.2]),
                                   g=np.array([-1.0, 1.0]))
    e = np.geomspace(1e-3, 0.3, 40)
    table = TransitionProbabilityTable(channel=0, e_grid=e, g=e**2.5)
    assert table.interpolate(-1.0) == 0.0
    assert table.interpolate(0.0) == 0.0


def test_gtable_loglog_interpolation_preserves_power_law():
    e = np.geomspace(1e-4, 1e-1, 25)
    table = TransitionProbabilityTable(channel=0, e_grid=e, g=3.0 * e**2.5)
    for et in np.geomspace(2e-4, 5e-2, 17):
        assert table.interpolate(et) == pytest.approx(3.0 * et**2.5, rel=1e-6)
