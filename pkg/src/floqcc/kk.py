"""Effective modulation-spectrum model of pulse-controlled inelastic decay.

A spin-flip exit channel with Zeeman charge q (1 for the first flip, 2 for
the double flip) sees the oscillating part of the pulse train through the
modulation function

    eps_q(t) = exp[-i q h_eff integral B~ dt']
             = exp[-i sum_n (q h_eff a_n / (n w_B)) sin(n w_B t)],

whose Fourier weights |lambda_K|^2 form a discrete spectral function on the
exit-energy comb  E_K = offset + K w_B.  Channel cross sections are then
proportional to the overlap of that spectral function with the channel's
transition-probability table G_f, which is what the optimizer minimizes.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .gtable import GridCoverageError, TransitionProbabilityTable
from .spinrotor import PulseTrain
from .units import H_EFF_O2_K_PER_G


class WindowTooSmallError(ValueError):
    """The requested Fourier window leaves more than the allowed tail mass."""


@dataclass
class ModulationSpectrum:
    """Fourier coefficients lambda_K of a modulation function.

    k_values and lam are aligned arrays; omega_b, b0 and h_eff fix the
    exit-energy comb E_K = q*h_eff*b0 + K*omega_b of the associated
    spectral function.
    """

    charge: int
    k_values: np.ndarray
    lam: np.ndarray
    omega_b: float
    b0: float
    h_eff: float

    @property
    def weights(self):
        return np.abs(self.lam) ** 2

    @property
    def static_offset(self):
        return self.charge * self.h_eff * self.b0

    def support_energies(self, offset=None):
        if offset is None:
            offset = self.static_offset
        return offset + self.k_values * self.omega_b

    def coefficient(self, k):
        idx = np.where(self.k_values == k)[0]
        return complex(self.lam[idx[0]]) if idx.size else 0.0

    def to_csv(self, path, offset=None):
        energies = self.support_energies(offset)
        with open(path, "w") as fh:
            fh.write("K,re_lambda,im_lambda,weight,E_support_K\n")
            for k, lam, w, e in zip(self.k_values, self.lam, self.weights, energies):
                fh.write(f"{k},{lam.real:.12g},{lam.imag:.12g},{w:.12g},{e:.12g}\n")


@dataclass
class SpectralFunction:
    """Discrete spectral measure: weights |lambda_K|^2 at energies E_K."""

    energies: np.ndarray
    weights: np.ndarray


@dataclass
class DecayTrace:
    """Initial-state survival and channel populations under weak coupling."""

    times: np.ndarray
    survival: np.ndarray
    populations: dict
    rate_0: float
    rate_m1: float


def modulation_coefficients(pulse: PulseTrain, charge: int, window=None,
                            h_eff: float = H_EFF_O2_K_PER_G,
                            n_samples: int = 4096,
                            tail_tol: float = 1.0e-6,
                            auto_tail: float = 1.0e-13) -> ModulationSpectrum:
    """Fourier spectrum lambda_K of the modulation function for one channel.

    The phase integral of the zero-mean pulse part is analytic (pure sine
    series), so eps_q(t) is sampled exactly over one period and lambda_K
    extracted by FFT.  `window` is the half-width K_max to keep; when
    omitted, the smallest window with tail mass below `auto_tail` is chosen
    (tight enough that the stored weights satisfy Parseval to 1e-10).  A
    requested window that leaves more than `tail_tol` tail mass raises
    WindowTooSmallError.
    """
    if charge not in (1, 2):
        raise ValueError("charge must be 1 or 2")
    # phase amplitudes z_n = q h a_n / (n w)
    zs = [(n, charge * h_eff * a / (n * pulse.omega_b)) for n, a in pulse.harmonics]
    tau = 2.0 * np.pi * np.arange(n_samples) / n_samples  # omega_b * t
    phase = np.zeros(n_samples)
    for n, z in zs:
        phase += z * np.sin(n * tau)
    lam_full = np.fft.ifft(np.exp(-1j * phase))

    k_half = n_samples // 2 - 1
    k_all = np.arange(-k_half, k_half + 1)
    lam_all = lam_full[k_all]  # negative indices wrap, matching negative K
    w_all = np.abs(lam_all) ** 2

    if window is None:
        order = np.abs(k_all)
        mass = np.zeros(order.max() + 1)
        np.add.at(mass, order, w_all)
        # tail_beyond[kmax] = total weight at |K| > kmax
        tail_beyond = np.append(mass[::-1].cumsum()[::-1][1:], 0.0)
        ok = np.nonzero(tail_beyond <= auto_tail)[0]
        if ok.size == 0:
            raise WindowTooSmallError(
                "modulation spectrum does not decay within the sampling window; "
                "increase n_samples"
            )
        window = int(ok[0])
    else:
        window = int(window)
        tail = w_all[np.abs(k_all) > window].sum()
        if tail > tail_tol:
            raise WindowTooSmallError(
                f"tail mass {tail:.3e} outside |K| <= {window} exceeds {tail_tol:g}; "
                "use a larger window"
            )
    keep = np.abs(k_all) <= window
    return ModulationSpectrum(
        charge=charge,
        k_values=k_all[keep],
        lam=lam_all[keep],
        omega_b=pulse.omega_b,
        b0=pulse.b0,
        h_eff=h_eff,
    )


def spectral_function(spectrum: ModulationSpectrum, offset=None) -> SpectralFunction:
    return SpectralFunction(
        energies=spectrum.support_energies(offset), weights=spectrum.weights
    )


def spectral_overlap(spectrum: ModulationSpectrum,
                     table: TransitionProbabilityTable,
                     offset=None, weight_floor: float = 1.0e-6) -> float:
    """Overlap sum_K |lambda_K|^2 G(offset + K w_B).

    Exit energies at or below zero contribute nothing (closed channels).
    Support points off the tabulated grid are an error when they carry
    more than `weight_floor` weight, otherwise dropped.
    """
    energies = spectrum.support_energies(offset)
    total = 0.0
    for e, w in zip(energies, spectrum.weights):
        if e <= 0.0:
            continue
        if not table.covers(e):
            if w > weight_floor:
                raise GridCoverageError(
                    f"support point {e:g} K (weight {w:.3e}) outside the G grid "
                    f"[{table.e_min:g}, {table.e_max:g}] K"
                )
            continue
        total += w * table.interpolate(e)
    return total


def predict_branching(pulse: PulseTrain,
                      g0: TransitionProbabilityTable,
                      gm1: TransitionProbabilityTable,
                      b0=None, h_eff: float = H_EFF_O2_K_PER_G,
                      offsets=(None, None), window=None):
    """Relative cross sections (sigma_0, sigma_m1, ratio) for one pulse.

    offsets may carry exact channel splittings (Kelvin) when available;
    by default the linear map q*h_eff*b0 is used.
    """
    if b0 is not None and b0 != pulse.b0:
        pulse = PulseTrain(b0=b0, omega_b=pulse.omega_b, harmonics=pulse.harmonics)
    s0 = spectral_overlap(
        modulation_coefficients(pulse, 1, window=window, h_eff=h_eff),
        g0, offset=offsets[0],
    )
    sm1 = spectral_overlap(
        modulation_coefficients(pulse, 2, window=window, h_eff=h_eff),
        gm1, offset=offsets[1],
    )
    ratio = s0 / sm1 if sm1 > 0 else math.inf
    return s0, sm1, ratio


def decay_trace(pulse: PulseTrain,
                g0: TransitionProbabilityTable,
                gm1: TransitionProbabilityTable,
                t_grid, h_eff: float = H_EFF_O2_K_PER_G,
                offsets=(None, None)) -> DecayTrace:
    """Weak-coupling survival |c_1(t)|^2 and channel populations.

    Rates are relative (G tables are relative), times in 1/Kelvin.  The
    exponential solution assumes R*t << 1 over the trace; a warning is
    issued otherwise.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    spec0 = modulation_coefficients(pulse, 1, h_eff=h_eff)
    spec1 = modulation_coefficients(pulse, 2, h_eff=h_eff)

    def channel_terms(spec, table, offset):
        terms = {}
        for k, w, e in zip(spec.k_values, spec.weights,
                           spec.support_energies(offset)):
            g = table.interpolate(e) if (e > 0.0 and table.covers(e)) else 0.0
            terms[int(k)] = 2.0 * np.pi * w * g
        return terms

    terms0 = channel_terms(spec0, g0, offsets[0])
    terms1 = channel_terms(spec1, gm1, offsets[1])
    rate0 = sum(terms0.values())
    rate1 = sum(terms1.values())
    total = rate0 + rate1
    if total * t_grid.max() > 0.1:
        warnings.warn(
            "decay trace leaves the weak-coupling regime (R*t > 0.1)",
            RuntimeWarning, stacklevel=2,
        )
    survival = np.exp(-total * t_grid)
    populations = {}
    for k, r in terms0.items():
        populations[(0, k)] = r * t_grid
    for k, r in terms1.items():
        populations[(-1, k)] = r * t_grid
    return DecayTrace(times=t_grid, survival=survival, populations=populations,
                      rate_0=rate0, rate_m1=rate1)
