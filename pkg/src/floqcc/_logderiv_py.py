"""Pure-numpy log-derivative propagation kernel.

Johnson's multichannel log-derivative algorithm on one uniform-step
sector.  Identical contract to the compiled kernel in ``_logderiv.pyx``;
which one is used is decided in :mod:`floqcc.kernels`.
"""

import numpy as np


def logderiv_sector(y, k2, lcent, wmats, vvals, rvals, h, start_correction):
    """Propagate the log-derivative matrix across one sector.

    Parameters
    ----------
    y : (n, n) array
        Log-derivative matrix at ``rvals[0]``; not modified.
    k2 : (n,) array
        Channel wavenumbers squared, 1/A^2.
    lcent : (n,) array
        l(l+1) per channel.
    wmats : (nlam, n, n) array
        Coupling matrices scaled by 2 mu / hbar^2, i.e. in 1/(A^2 K).
    vvals : (npts, nlam) array
        Radial factors (K) at each grid point.
    rvals : (npts,) array
        Grid points; npts - 1 must be even.
    h : float
        Step size.
    start_correction : bool
        Apply the weight-1 quadrature term at the first point.  Off for a
        hard-wall start, on when continuing from a previous sector.
    """
    nsteps = len(rvals) - 1
    if nsteps % 2 != 0:
        raise ValueError("sector must have an even number of steps")
    n = y.shape[0]
    eye = np.eye(n)
    y = np.array(y, dtype=float)

    def qmat(j):
        q = -np.tensordot(vvals[j], wmats, axes=(0, 0))
        idx = np.arange(n)
        q[idx, idx] += k2 - lcent / (rvals[j] * rvals[j])
        return q

    if start_correction:
        y = y - (h / 3.0) * qmat(0)
    for j in range(1, nsteps + 1):
        if j % 2 == 1:
            q = qmat(j)
            u = np.linalg.solve(eye + (h * h / 6.0) * q, q)
            w = 4.0
        else:
            u = qmat(j)
            w = 1.0 if j == nsteps else 2.0
        y = np.linalg.solve(eye + h * y, y) - (h / 3.0) * w * u
    return y
