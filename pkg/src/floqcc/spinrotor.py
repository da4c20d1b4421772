"""Asymptotic Floquet Hamiltonian of a triplet-sigma rotor in a magnetic pulse train.

Builds H_asF = H_as - i d/dt in the coupled basis |N S J M_J> x |n>, where
|n> are Fourier vectors of the drive period, and diagonalizes it into the
dressed eigenbasis used by the coupled-channel solver.  H_as contains the
rotational, spin-rotation, spin-spin and Zeeman terms; only the Zeeman term
is time dependent, through the field Fourier components B_k.

M_J is exactly conserved (z-oriented field), so the matrix is assembled and
diagonalized per M_J block.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .angular import wigner_3j, wigner_6j
from .units import H_EFF_O2_K_PER_G, MU_BOHR_K_PER_G, mhz_to_kelvin


class LadderAssignmentError(RuntimeError):
    """Raised when dressed eigenstates cannot be mapped onto channel ladders."""


@dataclass(frozen=True)
class MolecularConstants:
    """Spectroscopic constants of the triplet-sigma molecule, in Kelvin (fields in K/G).

    The bundled defaults describe an O2-like model molecule; lambda_ss is
    kept slightly below the real-molecule value so the low-field Zeeman
    map stays linear to 0.1% over 100-500 G.  These are model inputs, not
    fitted values.
    """

    b_rot: float = 2.0684        # rotational constant B_e
    gamma_sr: float = -0.01211   # spin-rotation constant
    lambda_ss: float = 2.3       # spin-spin constant
    spin: int = 1
    mu_bohr: float = MU_BOHR_K_PER_G   # Bohr magneton, K/G
    h_eff: float = H_EFF_O2_K_PER_G    # effective Zeeman slope for the KK layer, K/G

    def __post_init__(self):
        if self.b_rot <= 0:
            raise ValueError("rotational constant must be positive")
        if self.spin != 1:
            raise ValueError("only S = 1 molecules are supported")
        if self.mu_bohr <= 0:
            raise ValueError("Bohr magneton must be positive")


@dataclass(frozen=True)
class PulseTrain:
    """Magnetic pulse train B(t) = B0 + sum_n a_n cos(n omega_B t).

    b0 in Gauss, omega_b as photon energy in Kelvin, harmonics as
    (index, amplitude/G) pairs.  The oscillating part has zero time
    average by construction.
    """

    b0: float
    omega_b: float
    harmonics: tuple = ()

    def __post_init__(self):
        if self.omega_b <= 0:
            raise ValueError("fundamental frequency must be positive")
        idx = [n for n, _ in self.harmonics]
        if any(n < 1 or n != int(n) for n in idx):
            raise ValueError("harmonic indices must be positive integers")
        if len(set(idx)) != len(idx):
            raise ValueError("harmonic indices must be distinct")
        object.__setattr__(self, "harmonics", tuple((int(n), float(a)) for n, a in self.harmonics))

    @classmethod
    def from_mhz(cls, b0, nu_mhz, harmonics=()):
        """Build from a fundamental frequency given in MHz."""
        return cls(b0=b0, omega_b=mhz_to_kelvin(nu_mhz), harmonics=tuple(harmonics))

    @property
    def is_static(self):
        return all(a == 0.0 for _, a in self.harmonics)

    @property
    def max_harmonic(self):
        return max((n for n, _ in self.harmonics), default=0)

    def amplitude(self, n):
        for m, a in self.harmonics:
            if m == n:
                return a
        return 0.0

    def static_only(self):
        return PulseTrain(b0=self.b0, omega_b=self.omega_b, harmonics=())

    def field(self, t):
        """Instantaneous field (G); t in 1/Kelvin units."""
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.b0)
        for n, a in self.harmonics:
            out = out + a * np.cos(n * self.omega_b * t)
        return out


class FloquetBasisState(NamedTuple):
    """Primitive basis state |N S J M_J> x |n>."""

    N: int
    S: int
    J: int
    MJ: int
    n: int


class Channel(NamedTuple):
    """Molecular channel label (N, J, M_J); S is fixed by the molecule."""

    N: int
    J: int
    MJ: int


def fourier_field_components(pulse: PulseTrain, k: int) -> float:
    """Fourier component B_k of the pulse field, in Gauss.

    B_0 is the static offset; cos(n w t) splits as a_n/2 at k = +-n.
    """
    if k == 0:
        return pulse.b0
    return pulse.amplitude(abs(k)) / 2.0


def build_basis(n_rot_values=(0, 2, 4), spin=1, mj_values=None, n_window=(0, 0)):
    """Primitive Floquet basis, deterministic (MJ, N, J, n) ordering.

    n_window is an inclusive (n_lo, n_hi) range of Fourier indices.
    """
    n_lo, n_hi = n_window
    states = []
    if mj_values is None:
        jmax = max(n_rot_values) + spin
        mj_values = range(-jmax, jmax + 1)
    for mj in mj_values:
        for n_rot in sorted(n_rot_values):
            for j in range(abs(n_rot - spin), n_rot + spin + 1):
                if abs(mj) > j:
                    continue
                for n in range(n_lo, n_hi + 1):
                    states.append(FloquetBasisState(n_rot, spin, j, mj, n))
    return states


def _spin_rotation(bra, ket, gamma):
    if (bra.N, bra.J, bra.MJ) != (ket.N, ket.J, ket.MJ):
        return 0.0
    n_rot, s, j = bra.N, bra.S, bra.J
    if n_rot == 0:
        return 0.0
    pref = math.sqrt(n_rot * (n_rot + 1) * (2 * n_rot + 1) * s * (s + 1) * (2 * s + 1))
    return gamma * (-1.0) ** (n_rot + j + s) * pref * wigner_6j(s, n_rot, j, n_rot, s, 1)


def _spin_spin(bra, ket, lam_ss):
    if (bra.J, bra.MJ) != (ket.J, ket.MJ):
        return 0.0
    n1, n2, j, s = bra.N, ket.N, bra.J, bra.S
    pref = (2.0 * math.sqrt(30.0) / 3.0) * lam_ss
    return (
        pref
        * (-1.0) ** (j + n1 + n2 + s)
        * math.sqrt((2 * n1 + 1) * (2 * n2 + 1))
        * wigner_3j(n1, 2, n2, 0, 0, 0)
        * wigner_6j(s, n2, j, n1, s, 2)
    )


def _zeeman_spin_element(bra, ket):
    """<N S J' M_J|S_z|N S J M_J> in rank-1 spherical-tensor form."""
    if bra.N != ket.N or bra.MJ != ket.MJ:
        return 0.0
    n_rot, s, mj = bra.N, bra.S, bra.MJ
    jp, j = bra.J, ket.J
    red = (
        (-1.0) ** (n_rot + s + j + 1)
        * math.sqrt((2 * jp + 1) * (2 * j + 1) * s * (s + 1) * (2 * s + 1))
        * wigner_6j(s, jp, n_rot, j, s, 1)
    )
    return (-1.0) ** (jp - mj) * wigner_3j(jp, 1, j, -mj, 0, mj) * red


def h_as_element(bra: FloquetBasisState, ket: FloquetBasisState,
                 consts: MolecularConstants, pulse: PulseTrain) -> float:
    """Matrix element <bra|H_asF|ket> excluding the n*omega_B Floquet diagonal."""
    if bra.S != ket.S:
        raise ValueError("basis states carry different electron spins")
    val = 0.0
    if bra.n == ket.n:
        if bra == ket:
            val += consts.b_rot * bra.N * (bra.N + 1)
        val += _spin_rotation(bra, ket, consts.gamma_sr)
        val += _spin_spin(bra, ket, consts.lambda_ss)
    b_k = fourier_field_components(pulse, bra.n - ket.n)
    if b_k != 0.0:
        val += 2.0 * consts.mu_bohr * b_k * _zeeman_spin_element(bra, ket)
    return val


def build_floquet_matrix(basis, consts: MolecularConstants, pulse: PulseTrain):
    """Real symmetric Floquet matrix over the given basis, n*omega_B on the diagonal."""
    nb = len(basis)
    h = np.zeros((nb, nb))
    for i, bra in enumerate(basis):
        for k in range(i, nb):
            ket = basis[k]
            v = h_as_element(bra, ket, consts, pulse)
            h[i, k] = v
            h[k, i] = v
        h[i, i] += basis[i].n * pulse.omega_b
    return h


@dataclass
class FloquetEigenbasis:
    """Dressed eigenstates of the asymptotic Floquet Hamiltonian.

    w[i] holds the expansion of eigenstate i over `states`; `ladder[i]`
    is its (channel, K) assignment.  Ordering is deterministic: sorted by
    (channel, K).
    """

    states: list
    w: np.ndarray
    eps: np.ndarray
    ladder: list
    omega_b: float
    index: dict = field(init=False)

    def __post_init__(self):
        self.index = {lk: i for i, lk in enumerate(self.ladder)}
        if len(self.index) != len(self.ladder):
            raise LadderAssignmentError(
                "duplicate ladder assignment; increase the Fourier window n_max"
            )

    def eps_of(self, channel, k=0):
        return self.eps[self.index[(Channel(*channel), k)]]

    def w_of(self, channel, k=0):
        return self.w[self.index[(Channel(*channel), k)]]

    @property
    def channels(self):
        return sorted({ch for ch, _ in self.ladder})

    def k_range(self, channel):
        ks = sorted(k for ch, k in self.ladder if ch == Channel(*channel))
        return ks

    def splitting(self, channel_a, channel_b):
        """Quasi-energy difference eps(a, K=0) - eps(b, K=0), in Kelvin."""
        return self.eps_of(channel_a) - self.eps_of(channel_b)

    def select(self, keep):
        """Sub-basis with only ladder entries for which keep(channel, K) is true."""
        mask = [i for i, (ch, k) in enumerate(self.ladder) if keep(ch, k)]
        return FloquetEigenbasis(
            states=self.states,
            w=self.w[mask],
            eps=self.eps[mask],
            ladder=[self.ladder[i] for i in mask],
            omega_b=self.omega_b,
        )


def _assign_block(eigvals, eigvecs, block_states, omega_b, overlap_threshold=0.5):
    """Map each eigenvector of one M_J block to a (channel, K) ladder entry."""
    chan_of = [Channel(s.N, s.J, s.MJ) for s in block_states]
    n_of = np.array([s.n for s in block_states])
    families = sorted(set(chan_of))
    fam_masks = {ch: np.array([c == ch for c in chan_of]) for ch in families}

    raw = []
    for col in range(eigvecs.shape[1]):
        p = eigvecs[:, col] ** 2
        weights = {ch: p[fam_masks[ch]].sum() for ch in families}
        ch_best = max(families, key=lambda ch: weights[ch])
        if weights[ch_best] < overlap_threshold:
            raise LadderAssignmentError(
                f"eigenstate has dominant channel overlap {weights[ch_best]:.3f} < "
                f"{overlap_threshold}; increase the Fourier window n_max"
            )
        pch = p[fam_masks[ch_best]]
        centroid = float((n_of[fam_masks[ch_best]] * pch).sum() / pch.sum())
        raw.append((ch_best, centroid, eigvals[col], eigvecs[:, col]))

    # Within each family, anchor K at the state whose Fourier centroid is
    # closest to an integer near the window center, then index the sorted
    # quasi-energies relative to it.
    out = []
    for ch in families:
        members = [(cen, ev, vec) for c, cen, ev, vec in raw if c == ch]
        members.sort(key=lambda m: m[1])
        anchor = min(members, key=lambda m: abs(m[0] - round(m[0])))
        k_anchor = int(round(anchor[0]))
        eps_anchor = anchor[1]
        for cen, ev, vec in members:
            k = k_anchor + int(round((ev - eps_anchor) / omega_b))
            out.append((ch, k, ev, vec))
    return out


def diagonalize_asymptotic(matrix, basis, pulse: PulseTrain,
                           overlap_threshold=0.5) -> FloquetEigenbasis:
    """Diagonalize the Floquet matrix and assign channel-ladder labels.

    The matrix is block diagonal in M_J; each block is diagonalized
    separately so degenerate states in different blocks never mix.  For a
    static pulse the Fourier index is conserved too, and the blocks are
    split further so the eigenbasis is exactly permutation-like in n.
    Eigenstates are assigned to the channel whose summed Fourier weight
    dominates (threshold 0.5) and to the ladder index K matching their
    quasi-energy offset; ambiguous assignments raise LadderAssignmentError.
    """
    if pulse.is_static:
        blocks = sorted({(s.MJ, s.n) for s in basis})
        block_of = [(s.MJ, s.n) for s in basis]
    else:
        blocks = sorted({s.MJ for s in basis})
        block_of = [s.MJ for s in basis]
    entries = []
    for blk in blocks:
        idx = np.array([i for i, b in enumerate(block_of) if b == blk])
        block_states = [basis[i] for i in idx]
        sub = matrix[np.ix_(idx, idx)]
        if not np.array_equal(sub, sub.T):
            raise ValueError("Floquet matrix block is not symmetric")
        eigvals, eigvecs = np.linalg.eigh(sub)
        for ch, k, ev, vec in _assign_block(eigvals, eigvecs, block_states,
                                            pulse.omega_b, overlap_threshold):
            full_vec = np.zeros(len(basis))
            full_vec[idx] = vec
            entries.append((ch, k, ev, full_vec))

    entries.sort(key=lambda e: (e[0], e[1]))
    ladder = [(ch, k) for ch, k, _, _ in entries]
    eps = np.array([ev for _, _, ev, _ in entries])
    w = np.array([vec for _, _, _, vec in entries])
    return FloquetEigenbasis(states=list(basis), w=w, eps=eps, ladder=ladder,
                             omega_b=pulse.omega_b)


def solve_asymptotic(consts: MolecularConstants, pulse: PulseTrain,
                     n_rot_values=(0, 2, 4), mj_values=None, n_window=(0, 0),
                     overlap_threshold=0.5) -> FloquetEigenbasis:
    """Convenience: build the basis and matrix, diagonalize, assign ladders."""
    basis = build_basis(n_rot_values=n_rot_values, spin=consts.spin,
                        mj_values=mj_values, n_window=n_window)
    h = build_floquet_matrix(basis, consts, pulse)
    return diagonalize_asymptotic(h, basis, pulse, overlap_threshold)


def zeeman_splitting(consts: MolecularConstants, b0: float,
                     upper=(0, 1, 1), lower=(0, 1, 0),
                     n_rot_values=(0, 2, 4)) -> float:
    """Static Zeeman splitting eps(upper) - eps(lower) at field b0, in Kelvin."""
    pulse = PulseTrain(b0=b0, omega_b=1.0e-3)
    basis = solve_asymptotic(consts, pulse, n_rot_values=n_rot_values,
                             mj_values=sorted({upper[2], lower[2]}))
    return basis.splitting(upper, lower)


def zeeman_slope(consts: MolecularConstants, b0: float,
                 upper=(0, 1, 1), lower=(0, 1, 0),
                 n_rot_values=(0, 2, 4), db=1.0) -> float:
    """Differential Zeeman slope d(eps_upper - eps_lower)/dB at b0, in K/G."""
    up = zeeman_splitting(consts, b0 + db, upper, lower, n_rot_values)
    dn = zeeman_splitting(consts, b0 - db, upper, lower, n_rot_values)
    return (up - dn) / (2.0 * db)
