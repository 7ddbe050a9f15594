"""Schrodinger representations, matrix coefficients, and field compression.

For lam != 0 the representation acts on states over R^n by

    (pi_h^lam u)(s) = e^{2 pi i lam t} e^{2 pi i sqrt|lam| y.s}
                      u(s + sgn(lam) sqrt|lam| x),      h = (x, y, t).

Shifts are realized spectrally (phase ramp between FFTs), so each pi_h is
exactly unitary on the grid and the group law holds up to the spectral
leakage of the states involved.

Compressing a field f against the representation gives the fiber operator
pi_f^lam = int f(h) pi_h^lam dh. Two independent routes are kept:

* ``route="quadrature"``: the literal weighted sum of pi_h matrices over
  the group lattice. Accurate while sqrt|lam| L_state stays inside the
  field's horizontal dual band (the y-sum aliases beyond it).
* ``route="kernel"``: the integral kernel in closed form,

      omega(s, x') = |lam|^{-n/2} (F2^{-1} F3^{-1} f)(sgn(lam)(x'-s)/sqrt|lam|,
                                                      sqrt|lam| s, lam),

  evaluated by partial transforms plus band-limited interpolation, with
  out-of-footprint queries zeroed (correct for decaying spectra).

All pairings are bilinear: C(h) = int (pi_h f)(s) g(s) ds, no conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import SampledField, write_blob, read_blob
from .grids import Axis, Grid, LineGrid, centered_dft, flat_phase
from .group import GroupPoint


@dataclass
class StateVector:
    grid: LineGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ValueError(f"state shape {vals.shape} != grid shape {self.grid.shape}")
        self.values = vals

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.weight * np.sum(np.abs(self.values) ** 2)))

    def with_values(self, values: np.ndarray) -> "StateVector":
        return StateVector(self.grid, np.asarray(values, dtype=complex).reshape(self.grid.shape))


@dataclass
class FiberOperator:
    """Dense operator on states of a LineGrid, tagged with its fiber."""

    lam: float | None
    grid: LineGrid
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        size = self.grid.size
        if m.shape != (size, size):
            raise ValueError(f"matrix shape {m.shape} != ({size}, {size})")
        self.matrix = m

    @property
    def weight(self) -> float:
        """Quadrature weight folded into the matrix action."""
        return self.grid.weight

    @property
    def kernel(self) -> np.ndarray:
        """Integral kernel omega(s, x') = matrix / weight."""
        return self.matrix / self.weight

    def apply(self, u: StateVector) -> StateVector:
        return u.with_values(self.matrix @ u.flat)

    def adjoint(self) -> "FiberOperator":
        return FiberOperator(self.lam, self.grid, self.matrix.conj().T)

    def __matmul__(self, other: "FiberOperator") -> "FiberOperator":
        if self.grid != other.grid:
            raise ValueError("fiber grids differ")
        return FiberOperator(self.lam, self.grid, self.matrix @ other.matrix)

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    @classmethod
    def identity(cls, grid: LineGrid, lam: float | None = None) -> "FiberOperator":
        return cls(lam, grid, np.eye(grid.size, dtype=complex))


def hs_norm(a: FiberOperator) -> float:
    """Hilbert-Schmidt norm; equals the L2 norm of the integral kernel."""
    return float(np.linalg.norm(a.matrix))


def operator_norm(a: FiberOperator) -> float:
    return float(np.linalg.norm(a.matrix, 2))


# -- point representations ----------------------------------------------------

def _shift_phase(grid: LineGrid, shift: np.ndarray) -> np.ndarray:
    """Frequency-side multiplier of the shift u(.) -> u(. + shift)."""
    return np.exp(2j * np.pi * (grid.flat_freqs() @ shift)).reshape(grid.shape)


def pi_point(h: GroupPoint, lam: float, u: StateVector) -> StateVector:
    """Apply pi_h^lam to a state."""
    lam = float(lam)
    if lam == 0.0:
        raise ValueError("representation parameter lambda must be nonzero")
    if h.n != u.grid.dim:
        raise ValueError(f"group rank {h.n} != state dimension {u.grid.dim}")
    grid = u.grid
    root = np.sqrt(abs(lam))
    shift = np.sign(lam) * root * h.x
    axes = tuple(range(grid.dim))
    spec = centered_dft(u.values, axes) * _shift_phase(grid, shift)
    vals = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(spec, axes=axes), axes=axes),
                           axes=axes)
    ramp = np.exp(2j * np.pi * root * (grid.flat_points() @ h.y)).reshape(grid.shape)
    phase = np.exp(2j * np.pi * lam * h.t)
    return u.with_values(phase * ramp * vals)


def pi_point_matrix(h: GroupPoint, lam: float, grid: LineGrid) -> FiberOperator:
    """Dense matrix of pi_h^lam (unitary up to FFT roundoff)."""
    lam = float(lam)
    if lam == 0.0:
        raise ValueError("representation parameter lambda must be nonzero")
    root = np.sqrt(abs(lam))
    pts = grid.flat_points()
    frq = grid.flat_freqs()
    W = flat_phase(frq, pts, -1)  # forward kernel, size x size
    ramp_f = np.exp(2j * np.pi * (frq @ (np.sign(lam) * root * h.x)))
    shift_m = (W.conj().T * ramp_f[None, :]) @ W / grid.size
    ramp_y = np.exp(2j * np.pi * root * (pts @ h.y))
    mat = np.exp(2j * np.pi * lam * h.t) * (ramp_y[:, None] * shift_m)
    return FiberOperator(lam, grid, mat)


# -- matrix coefficients ------------------------------------------------------

def c_fun(f: StateVector, g: StateVector) -> SampledField:
    """Reduced matrix coefficient c(x, y) = int e^{2 pi i y.u} f(u+x) g(u) du.

    Returned on the plain 2n-axis product grid (x-axes then y-axes) of the
    states' line grid; the u-shift wraps periodically.
    """
    if f.grid != g.grid:
        raise ValueError("states must share a grid")
    grid = f.grid
    N, dim = grid.count, grid.dim
    size = grid.size
    E = flat_phase(grid.flat_points(), grid.flat_points(), +1)  # e^{2 pi i y.u}
    out = np.empty((size, size), dtype=complex)
    for flat in range(size):
        jx = np.unravel_index(flat, grid.shape)
        rolled = np.roll(f.values, shift=tuple(-(j - N // 2) for j in jx),
                         axis=tuple(range(dim)))
        out[flat, :] = E @ (rolled.ravel() * g.flat)
    out = grid.weight * out.reshape(grid.shape + grid.shape)
    cgrid = Grid((Axis(N, grid.half_width),) * (2 * dim))
    # row block = x multi-index, column block = y multi-index
    perm = out.transpose(tuple(range(dim)) + tuple(range(dim, 2 * dim)))
    return SampledField(cgrid, perm)


def big_c_fun(f: StateVector, g: StateVector, lam: float, h: GroupPoint) -> complex:
    """Full matrix coefficient C(h) = int (pi_h^lam f)(s) g(s) ds (bilinear)."""
    moved = pi_point(h, lam, f)
    return complex(f.grid.weight * np.sum(moved.values * g.values))


# -- field compression --------------------------------------------------------

def _check_lambda(field: SampledField, lam: float) -> None:
    band = field.grid.t_axis.freq_half_width
    if not (0 < abs(lam) <= band):
        raise ValueError(
            f"lambda = {lam} outside the representable central band (0, {band}]"
        )


def _lambda_slice(field: SampledField, lam: float, s_targets: np.ndarray) -> np.ndarray:
    """g2(x, s) = Dv^n Dt sum_{y,t} f(x,y,t) e^{2 pi i t lam} e^{2 pi i y.(sqrt|lam| s)}.

    Returns a (Nv^n, m) array over flattened x lattice and target rows s.
    """
    grid = field.grid
    n = grid.n
    t = grid.t_axis.points()
    g1 = grid.t_axis.spacing * np.tensordot(
        field.values, np.exp(2j * np.pi * t * lam), axes=(2 * n, 0)
    )
    Nv = grid.axes[0].count
    g1 = g1.reshape(Nv ** n, Nv ** n)  # rows x, cols y
    ys = _flat_v(grid)
    Ey = flat_phase(ys, np.sqrt(abs(lam)) * s_targets, +1)
    return grid.axes[0].spacing ** n * (g1 @ Ey)


def _flat_v(grid: Grid) -> np.ndarray:
    pts = grid.axes[0].points()
    mesh = np.meshgrid(*([pts] * grid.n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def pi_field(field: SampledField, lam: float, grid: LineGrid,
             route: str = "kernel", policy: str = "zero") -> FiberOperator:
    """Compression pi_f^lam = int f(h) pi_h^lam dh as a FiberOperator."""
    if field.side != "group" or field.grid.group_dim is None:
        raise ValueError("pi_field expects a group-side field on a group grid")
    lam = float(lam)
    _check_lambda(field, lam)
    n = field.grid.n
    if grid.dim != n:
        raise ValueError(f"state dimension {grid.dim} != group rank {n}")
    if policy not in ("zero", "wrap"):
        raise ValueError(f"unknown policy {policy!r}")
    if route == "quadrature":
        return _pi_field_quadrature(field, lam, grid)
    if route == "kernel":
        return _pi_field_kernel(field, lam, grid, policy)
    raise ValueError(f"unknown route {route!r}")


def _pi_field_quadrature(field: SampledField, lam: float, grid: LineGrid) -> FiberOperator:
    g2 = _lambda_slice(field, lam, grid.flat_points())  # (Nv^n, size)
    pts = grid.flat_points()
    frq = grid.flat_freqs()
    W = flat_phase(frq, pts, -1)
    Wb = W.conj().T / grid.size
    xs = _flat_v(field.grid)
    root = np.sign(lam) * np.sqrt(abs(lam))
    mat = np.zeros((grid.size, grid.size), dtype=complex)
    for k in range(xs.shape[0]):
        ramp = np.exp(2j * np.pi * (frq @ (root * xs[k])))
        shift_m = (Wb * ramp[None, :]) @ W
        mat += g2[k][:, None] * shift_m
    vw = field.grid.axes[0].spacing ** field.grid.n
    return FiberOperator(lam, grid, vw * mat)


def _pi_field_kernel(field: SampledField, lam: float, grid: LineGrid,
                     policy: str) -> FiberOperator:
    fgrid = field.grid
    n = fgrid.n
    Nv = fgrid.axes[0].count
    s_flat = grid.flat_points()  # (size, n)
    g2 = _lambda_slice(field, lam, s_flat)  # (Nv^n, size)
    root = np.sqrt(abs(lam))
    if policy == "zero":
        # y-side evaluation beyond the horizontal dual band aliases; the
        # true transform is negligible there for decaying fields.
        ymax = fgrid.axes[0].freq_half_width
        bad_s = np.any(np.abs(root * s_flat) > ymax, axis=1)
        g2[:, bad_s] = 0.0
    # x-side spectrum of g2, then band-limited evaluation at
    # u = sgn(lam) (x' - s) / sqrt|lam|.
    spec = centered_dft(g2.reshape((Nv,) * n + (-1,)), tuple(range(n)))
    spec = spec.reshape(Nv ** n, -1) * fgrid.axes[0].spacing ** n
    xi = _flat_v_dual(fgrid)  # (Nv^n, n) horizontal dual lattice
    L = fgrid.axes[0].half_width
    if policy == "zero":
        # separable phases: the mode sum factors over (s, x') rows/columns
        sdotxi = np.sign(lam) / root * (s_flat @ xi.T)  # (size, Nv^n)
        row_phase = np.exp(-2j * np.pi * sdotxi)
        col_phase = np.exp(+2j * np.pi * sdotxi)
        M = fgrid.axes[0].freq_spacing ** n * ((row_phase * spec.T) @ col_phase.T)
        u = np.abs(s_flat[None, :, :] - s_flat[:, None, :]) / root
    else:
        # fold the displacement into the state circle first, so wrap terms
        # land where the quadrature route puts them
        period = 2.0 * grid.half_width
        d = s_flat[None, :, :] - s_flat[:, None, :]
        d = (d + period / 2.0) % period - period / 2.0
        u_signed = np.sign(lam) / root * d  # (size, size, n)
        phase = np.exp(2j * np.pi * np.einsum("jki,xi->jkx", u_signed, xi))
        M = fgrid.axes[0].freq_spacing ** n * np.einsum("xj,jkx->jk", spec, phase)
        u = np.abs(u_signed)
    # either way the x-argument must stay on the field footprint
    M[np.any(u > L, axis=2)] = 0.0
    M *= abs(lam) ** (-n / 2)
    return FiberOperator(lam, grid, grid.weight * M)


def _flat_v_dual(grid: Grid) -> np.ndarray:
    frq = grid.axes[0].freqs()
    mesh = np.meshgrid(*([frq] * grid.n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def rank_one(g: StateVector, h: StateVector) -> FiberOperator:
    """P u = (int u g) h under the bilinear pairing; HS norm ||g|| ||h||."""
    if g.grid != h.grid:
        raise ValueError("states must share a grid")
    return FiberOperator(None, g.grid, g.grid.weight * np.outer(h.flat, g.flat))


def gramian(field: SampledField, lam: float, grid: LineGrid,
            route: str = "kernel") -> float:
    """|lam|^n ||pi_f^lam||_HS^2, the central Plancherel density."""
    a = pi_field(field, lam, grid, route=route)
    return abs(lam) ** field.grid.n * hs_norm(a) ** 2


# -- containers ---------------------------------------------------------------

def save_operator(a: FiberOperator, path) -> None:
    header = {
        "kind": "fiber_operator",
        "version": 1,
        "lam": a.lam,
        "grid": {"count": a.grid.count, "half_width": a.grid.half_width,
                 "dim": a.grid.dim},
        "shape": list(a.matrix.shape),
    }
    write_blob(path, header, a.matrix.ravel())


def load_operator(path) -> FiberOperator:
    header, payload = read_blob(path)
    if header.get("kind") != "fiber_operator":
        raise ValueError(f"container holds {header.get('kind')!r}, expected 'fiber_operator'")
    g = header["grid"]
    grid = LineGrid(g["count"], g["half_width"], g["dim"])
    lam = header["lam"]
    return FiberOperator(None if lam is None else float(lam), grid,
                         payload.reshape(tuple(header["shape"])))
