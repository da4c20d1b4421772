"""Model interaction surface V(R, theta) and its coupling matrices.

The surface is a Legendre expansion sum_lam V_lam(R) P_lam(cos theta) with
configurable radial terms.  The angular part couples the rotor state
|N M_N> and the partial wave |l m_l> while conserving M_N + m_l; after
expanding |N S J M_J> over |N M_N>|S M_S>, the laboratory projection
M = M_J + m_l is conserved channel by channel.

The coupling matrix over coupled-channel states (dressed Floquet state,
l, m_l) is R-independent in structure: one constant matrix per Legendre
order, scaled by V_lam(R) at every radius.  Those constant matrices are
precomputed here and consumed by the propagator's inner loop.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .angular import clebsch_gordan, legendre_p, wigner_3j
from .spinrotor import Channel, FloquetEigenbasis


@dataclass(frozen=True)
class LennardJonesTerm:
    """V(R) = c12/R^12 - c6/R^6, parameters in K*A^12 and K*A^6."""

    lam: int
    c12: float
    c6: float

    def radial_value(self, r):
        r = np.asarray(r, dtype=float)
        r6 = r**6
        return self.c12 / (r6 * r6) - self.c6 / r6


@dataclass(frozen=True)
class ExpDispTerm:
    """V(R) = a exp(-beta R) - c6/R^6; a in K, beta in 1/A, c6 in K*A^6."""

    lam: int
    a: float
    beta: float
    c6: float

    def radial_value(self, r):
        r = np.asarray(r, dtype=float)
        return self.a * np.exp(-self.beta * r) - self.c6 / r**6


@dataclass(frozen=True)
class ScaledTerm:
    """eta times the radial shape of another term, reassigned to order lam."""

    lam: int
    eta: float
    base: object

    def radial_value(self, r):
        return self.eta * self.base.radial_value(r)


class TabulatedTerm:
    """Cubic-spline interpolation of a two-column (R/A, V/K) table.

    Outside the tabulated range the value is 0 beyond the last point and
    an error below the first (the repulsive wall must be tabulated).
    """

    def __init__(self, lam, r_data, v_data):
        self.lam = lam
        self.r_data = np.asarray(r_data, dtype=float)
        self.v_data = np.asarray(v_data, dtype=float)
        if np.any(np.diff(self.r_data) <= 0):
            raise ValueError("tabulated radii must be strictly increasing")
        self._spline = CubicSpline(self.r_data, self.v_data)

    @classmethod
    def from_file(cls, lam, path):
        data = np.loadtxt(path, ndmin=2)
        return cls(lam, data[:, 0], data[:, 1])

    def radial_value(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r_data[0]):
            raise ValueError(
                f"radius below tabulated range (min {self.r_data[0]:g} A)"
            )
        out = np.where(r <= self.r_data[-1], self._spline(r), 0.0)
        return out


def potential_value(terms, r, theta):
    """V(R, theta) = sum_lam V_lam(R) P_lam(cos theta); R > 0 required."""
    if np.any(np.asarray(r) <= 0):
        raise ValueError("radius must be positive")
    x = math.cos(theta)
    return sum(t.radial_value(r) * legendre_p(t.lam, x) for t in terms)


def _gaunt(lp, mp, lam, q, l, m):
    """<l' m'|Y_{lam q}|l m>."""
    if mp != q + m:
        return 0.0
    pref = math.sqrt((2 * lp + 1) * (2 * lam + 1) * (2 * l + 1) / (4.0 * math.pi))
    return (
        (-1.0) ** mp
        * pref
        * wigner_3j(lp, lam, l, 0, 0, 0)
        * wigner_3j(lp, lam, l, -mp, q, m)
    )


def angular_coupling(lam, lp, mlp, np_rot, mnp, l, ml, n_rot, mn):
    """<N' M_N'; l' m_l'|P_lam(cos gamma)|N M_N; l m_l> for product states.

    gamma is the angle between the collision axis (partial wave) and the
    rotor axis.  Vanishes unless M_N' + m_l' = M_N + m_l and the parities
    and triangle rules allow it.
    """
    if mnp + mlp != mn + ml:
        return 0.0
    q = mnp - mn
    pref = 4.0 * math.pi / (2 * lam + 1)
    return (
        pref
        * (-1.0) ** q
        * _gaunt(lp, mlp, lam, -q, l, ml)
        * _gaunt(np_rot, mnp, lam, q, n_rot, mn)
    )


def coupled_angular_coupling(lam, spin, bra, lp, mlp, ket, l, ml):
    """Same bracket between spin-coupled rotor states |N S J M_J>.

    bra and ket are Channel labels (N, J, M_J); the electron spin is a
    spectator: the sum runs over the shared M_S.
    """
    if bra.MJ + mlp != ket.MJ + ml:
        return 0.0
    total = 0.0
    for ms in range(-spin, spin + 1):
        mnp = bra.MJ - ms
        mn = ket.MJ - ms
        if abs(mnp) > bra.N or abs(mn) > ket.N:
            continue
        cgp = clebsch_gordan(bra.N, mnp, spin, ms, bra.J, bra.MJ)
        cg = clebsch_gordan(ket.N, mn, spin, ms, ket.J, ket.MJ)
        if cgp == 0.0 or cg == 0.0:
            continue
        total += cgp * cg * angular_coupling(lam, lp, mlp, bra.N, mnp, l, ml, ket.N, mn)
    return total


@dataclass(frozen=True)
class CCChannel:
    """One coupled-channel basis state: dressed state x partial wave."""

    family: Channel
    k: int
    l: int
    ml: int
    eps: float


class CouplingMatrixProvider:
    """Coupling matrices over the retained coupled-channel basis.

    Channels combine every retained dressed eigenstate with the partial
    waves (l, m_l = M_total - M_J); only the conserved total projection
    M_total is kept.  One constant matrix per Legendre order is
    precomputed; the radial dependence is a scalar factor per order.
    """

    def __init__(self, eigenbasis: FloquetEigenbasis, terms, m_total,
                 l_values=(0, 2, 4), spin=1):
        self.eigenbasis = eigenbasis
        self.terms = list(terms)
        self.m_total = int(m_total)
        self.l_values = tuple(sorted(l_values))
        self.spin = spin

        self.channels = []
        for i, (family, k) in enumerate(eigenbasis.ladder):
            ml = self.m_total - family.MJ
            for l in self.l_values:
                if abs(ml) <= l:
                    self.channels.append(
                        CCChannel(family=family, k=k, l=l, ml=ml,
                                  eps=float(eigenbasis.eps[i]))
                    )
        if not self.channels:
            raise ValueError("no channels satisfy the M_total constraint")
        self.n_channels = len(self.channels)
        self.eps = np.array([c.eps for c in self.channels])
        self.lcent = np.array([c.l * (c.l + 1) for c in self.channels], dtype=float)
        self.lams = sorted({t.lam for t in self.terms})
        self.coupling_mats = {
            lam: self._build_coupling(lam) for lam in self.lams
        }

    def _build_coupling(self, lam):
        eig = self.eigenbasis
        ns = np.array([s.n for s in eig.states])
        nvals = sorted(set(ns))
        mat = np.zeros((self.n_channels, self.n_channels))

        # dressed-state Fourier slices: rows of W grouped by primitive n
        mol_labels = sorted({(s.N, s.J, s.MJ) for s in eig.states})
        mol_index = {lbl: i for i, lbl in enumerate(mol_labels)}
        nmol = len(mol_labels)
        u = np.zeros((len(eig.ladder), len(nvals), nmol))
        for p, s in enumerate(eig.states):
            u[:, nvals.index(s.n), mol_index[(s.N, s.J, s.MJ)]] += eig.w[:, p]

        # primitive molecular bracket, cached per (l', ml', l, ml) signature
        gcache = {}

        def g_block(lp, mlp, l, ml):
            key = (lp, mlp, l, ml)
            if key not in gcache:
                g = np.zeros((nmol, nmol))
                nonzero = False
                for pa, la in enumerate(mol_labels):
                    for pb, lb in enumerate(mol_labels):
                        val = coupled_angular_coupling(
                            lam, self.spin, Channel(*la), lp, mlp,
                            Channel(*lb), l, ml,
                        )
                        if val != 0.0:
                            g[pa, pb] = val
                            nonzero = True
                gcache[key] = g if nonzero else None
            return gcache[key]

        dressed_idx = {lk: i for i, lk in enumerate(eig.ladder)}
        for a, ca in enumerate(self.channels):
            ia = dressed_idx[(ca.family, ca.k)]
            for b in range(a, self.n_channels):
                cb = self.channels[b]
                g = g_block(ca.l, ca.ml, cb.l, cb.ml)
                if g is None:
                    continue
                ib = dressed_idx[(cb.family, cb.k)]
                val = np.einsum("na,ab,nb->", u[ia], g, u[ib])
                mat[a, b] = val
                mat[b, a] = val
        return mat

    def radial_factors(self, r):
        """V_lam(R) for each retained Legendre order, as a (len(r), nlam) array."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros((r.size, len(self.lams)))
        for j, lam in enumerate(self.lams):
            for t in self.terms:
                if t.lam == lam:
                    out[:, j] += t.radial_value(r)
        return out

    def coupling_matrix(self, r):
        """Full coupling matrix (Kelvin) at radius r (centrifugal excluded)."""
        if r <= 0:
            raise ValueError("radius must be positive")
        vals = self.radial_factors(np.array([r]))[0]
        mat = np.zeros((self.n_channels, self.n_channels))
        for v, lam in zip(vals, self.lams):
            mat += v * self.coupling_mats[lam]
        return mat

    def index_of(self, family, k, l, ml):
        for i, c in enumerate(self.channels):
            if (c.family, c.k, c.l, c.ml) == (Channel(*family), k, l, ml):
                return i
        raise KeyError(f"channel ({family}, K={k}, l={l}, ml={ml}) not retained")
