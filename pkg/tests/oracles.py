"""Independent reference implementations used to pin the engine down.

Everything here is written as literally as possible (nested sums, no
shared code with the package's fast paths) so that agreement between the
two is evidence, not tautology.
"""

import numpy as np

from heisenflag.fields import SampledField
from heisenflag.grids import Grid


def dft_literal(values: np.ndarray) -> np.ndarray:
    """Centered forward DFT of a 1d array by explicit summation."""
    N = values.shape[0]
    j = np.arange(N) - N // 2
    kernel = np.exp(-2j * np.pi * np.outer(j, j) / N)
    return kernel @ values


def gaussian_transform_1d(rate: float, zeta: np.ndarray) -> np.ndarray:
    """Closed form: exp(-pi a x^2) has transform a^{-1/2} exp(-pi zeta^2 / a)."""
    return np.exp(-np.pi * zeta ** 2 / rate) / np.sqrt(rate)


def direct_convolution(f: SampledField, g: SampledField) -> np.ndarray:
    """Group convolution by explicit lattice summation.

    (f*g)(h) = w sum_{h'} f(h') g(h'^{-1} h) with
    h'^{-1} h = (x-x', y-y', t-t'-x'.(y-y')). Horizontal differences land
    on the lattice (periodic wrap); the sheared central argument is
    evaluated through g's trigonometric interpolant in t.
    """
    grid: Grid = f.grid
    assert grid.n == 1, "oracle is written for n = 1"
    N = grid.axes[0].count
    Nt = grid.t_axis.count
    v = grid.axes[0].points()
    t = grid.t_axis.points()
    lam = grid.t_axis.freqs()

    # t-mode coefficients of g: g(x, y, t) = sum_m Gt[x, y, m] e^{2 pi i t lam_m}
    jt = np.arange(Nt) - Nt // 2
    fwd = np.exp(-2j * np.pi * np.outer(jt, jt) / Nt) / Nt
    Gt = np.einsum("xyk,mk->xym", g.values, fwd)

    out = np.zeros(grid.shape, dtype=complex)
    for jxp in range(N):
        for jyp in range(N):
            for jtp in range(Nt):
                fv = f.values[jxp, jyp, jtp]
                if fv == 0.0:
                    continue
                rolled = np.roll(np.roll(Gt, jxp - N // 2, axis=0),
                                 jyp - N // 2, axis=1)
                targ = (t[None, :] - t[jtp]
                        - v[jxp] * (v[:, None] - v[jyp]))  # (jy, jt)
                E = np.exp(2j * np.pi * targ[:, :, None] * lam[None, None, :])
                out += fv * np.einsum("xym,ytm->xyt", rolled, E)
    return grid.weight * out


def gauss_c_fun_closed_form(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """c_{g,g}(x, y) for the unit Gaussian g(u) = exp(-pi u^2)."""
    return (np.exp(-np.pi * (x ** 2 + y ** 2) / 2.0)
            * np.exp(-1j * np.pi * x * y) / np.sqrt(2.0))
