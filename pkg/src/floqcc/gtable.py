"""Tabulated relative transition-probability spectra G_f(E_out).

The table is the central exchange format between the coupled-channel
engine (which produces it), the effective-model layer (which integrates
against it) and the optimizer (which minimizes overlaps with it).
G is relative: normalized so that the value at the static reference point
equals the static cross section there.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator


class GridCoverageError(ValueError):
    """A required exit energy lies outside the tabulated grid."""


@dataclass
class TransitionProbabilityTable:
    """Relative G_f on a strictly increasing exit-energy grid (Kelvin).

    Interpolation follows the shape of near-threshold spectra: monotone
    cubic in log E below the sharp-minimum region, linear above it.
    G(E <= 0) is exactly 0 (closed exit channels).
    """

    channel: int
    e_grid: np.ndarray
    g: np.ndarray
    reference: tuple = None  # (E_ref, G_ref) at the static normalization point

    def __post_init__(self):
        self.e_grid = np.asarray(self.e_grid, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        if self.e_grid.ndim != 1 or self.e_grid.shape != self.g.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.e_grid) <= 0):
            raise ValueError("exit-energy grid must be strictly increasing")
        if np.any(self.e_grid <= 0):
            raise ValueError("exit-energy grid must be positive")
        if np.any(self.g < 0):
            raise ValueError("G values must be non-negative")
        self._build_interpolants()

    def _build_interpolants(self):
        # Monotone cubic in log E on the threshold side, linear across and
        # above the sharp-minimum region (no overshoot at the valley floor).
        # A table whose minimum sits at the first point has no interior
        # valley: the whole grid is threshold-side.
        if len(self.g) < 2:
            self._e_split = self.e_grid[0]
            self._pchip = None
            return
        i_min = int(np.argmin(self.g))
        hi = len(self.g) - 1 if i_min == 0 else max(i_min, 1)
        self._e_split = self.e_grid[hi]
        e_lo, g_lo = self.e_grid[: hi + 1], self.g[: hi + 1]
        if np.all(g_lo > 0):
            self._pchip = ("log", PchipInterpolator(np.log(e_lo), np.log(g_lo)))
        else:
            self._pchip = ("lin", PchipInterpolator(np.log(e_lo), g_lo))

    @property
    def e_min(self):
        return self.e_grid[0]

    @property
    def e_max(self):
        return self.e_grid[-1]

    def covers(self, e):
        return self.e_min <= e <= self.e_max

    def interpolate(self, e):
        """G at exit energy e; 0 for e <= 0; GridCoverageError off the grid."""
        if e <= 0.0:
            return 0.0
        if not self.covers(e):
            raise GridCoverageError(
                f"exit energy {e:g} K outside tabulated range "
                f"[{self.e_min:g}, {self.e_max:g}] K"
            )
        if e <= self._e_split and self._pchip is not None:
            kind, f = self._pchip
            val = f(np.log(e))
            return float(np.exp(val)) if kind == "log" else max(float(val), 0.0)
        return float(np.interp(e, self.e_grid, self.g))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("E_out_K,G_rel\n")
            for e, g in zip(self.e_grid, self.g):
                fh.write(f"{e:.12g},{g:.12g}\n")

    @classmethod
    def from_csv(cls, path, channel):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(channel=channel, e_grid=data[:, 0], g=data[:, 1])
