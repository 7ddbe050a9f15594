"""Kohn-Nirenberg symbols on fibers and the flag seminorm scans.

A `Spectrum` is a symbol family a(w, lam) on R^{2n} x (R \\ {0}); sampling
it along the parabolic change of variables attached to a central frequency
produces a per-fiber `SymbolGrid`, which quantizes to a `FiberOperator`
and back without loss:

    (Op(a) u)(s) = int e^{2 pi i xi.s} a(xi, s) u-hat(xi) dxi.

On the centered lattices the quantization is an exact linear bijection
between symbol tables and matrices, so composition of operators induces a
sharp twisted product of symbols and the Frobenius and symbol L2 norms
coincide identically. The seminorm scans at the bottom quantify membership
in the flag class: normalized derivatives

    |d_w^alpha d_lam^beta a| * ||w||^|alpha| * (||w||^2 + |lam|)^beta

are sampled over log-radial shells and dyadic central frequencies and
flagged when a shell blows up against the mid-range.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .fields import SampledField
from .finitediff import partial_cloud
from .grids import Grid, LineGrid, centered_dft, centered_idft, flat_phase
from .schrodinger import FiberOperator
from .transform import fourier, inverse_fourier


# -- symbol tables on one fiber ------------------------------------------------

@dataclass(frozen=True)
class SymbolGrid:
    """Sampled Kohn-Nirenberg symbol a(xi, s) on one fiber.

    values[i, j] = a(xi_i, s_j) with xi over the flat frequency lattice
    and s over the flat point lattice of `grid`.
    """

    lam: float
    grid: LineGrid
    values: np.ndarray

    def __post_init__(self):
        want = (self.grid.size, self.grid.size)
        if self.values.shape != want:
            raise ValueError(f"symbol table shape {self.values.shape} != {want}")

    def l2_norm(self) -> float:
        w = self.grid.weight * self.grid.freq_weight
        return float(np.sqrt(w * np.sum(np.abs(self.values) ** 2)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values: np.ndarray) -> "SymbolGrid":
        return SymbolGrid(self.lam, self.grid, values)


def kn_quantize(a: SymbolGrid) -> FiberOperator:
    """Matrix of Op(a) on the state lattice; exact inverse of kn_symbol_of."""
    g = a.grid
    pts, frq = g.flat_points(), g.flat_freqs()
    left = flat_phase(pts, frq, +1)            # e^{+2 pi i s.xi}, (size, modes)
    right = flat_phase(frq, pts, -1)           # e^{-2 pi i xi.x'}, (modes, size)
    mat = g.weight * g.freq_weight * ((left * a.values.T) @ right)
    return FiberOperator(a.lam, g, mat)


def kn_symbol_of(op: FiberOperator) -> SymbolGrid:
    """Symbol table of a fiber operator; exact inverse of kn_quantize."""
    g = op.grid
    pts, frq = g.flat_points(), g.flat_freqs()
    back = flat_phase(frq, pts, +1)            # e^{+2 pi i xi.x'}
    vals = np.exp(-2j * np.pi * (frq @ pts.T)) * (back @ op.matrix.T)
    lam = 0.0 if op.lam is None else op.lam
    return SymbolGrid(lam, g, vals)


def unit_symbol(lam: float, grid: LineGrid) -> SymbolGrid:
    return SymbolGrid(lam, grid, np.ones((grid.size, grid.size), dtype=complex))


def twisted_product(a: SymbolGrid, b: SymbolGrid) -> SymbolGrid:
    """Symbol of Op(a) Op(b); associative by construction."""
    if a.grid != b.grid or a.lam != b.lam:
        raise ValueError("twisted product needs matching fiber and grid")
    return kn_symbol_of(kn_quantize(a) @ kn_quantize(b))


def symbol_clip_mask(a: SymbolGrid, xi: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Rows whose coordinates leave the table footprint."""
    g = a.grid
    bad = np.any(np.abs(xi) > g.freq_half_width, axis=1)
    return bad | np.any(np.abs(s) > g.half_width, axis=1)


def evaluate_symbol(a: SymbolGrid, xi: np.ndarray, s: np.ndarray,
                    policy: str = "zero") -> np.ndarray:
    """Band-limited evaluation of a symbol table at off-lattice rows.

    Exact at lattice coincidences. `policy` decides out-of-footprint rows:
    "zero" nulls them, "edge" clamps the coordinates to the table edge.
    """
    g = a.grid
    n, N = g.dim, g.count
    xi = np.atleast_2d(np.asarray(xi, dtype=float)).copy()
    s = np.atleast_2d(np.asarray(s, dtype=float)).copy()
    if xi.shape != s.shape or xi.shape[1] != n:
        raise ValueError("coordinate blocks must both be (m, dim)")
    bad = symbol_clip_mask(a, xi, s)
    if policy == "edge":
        np.clip(xi, -g.freq_half_width, g.freq_half_width - g.freq_spacing, out=xi)
        np.clip(s, -g.half_width, g.half_width - g.spacing, out=s)
    elif policy != "zero":
        raise ValueError(f"unknown policy {policy!r}")
    coeff = a.values.reshape((N,) * (2 * n))
    coeff = centered_idft(coeff, tuple(range(n)))  # 1/N built in
    coeff = centered_dft(coeff, tuple(range(n, 2 * n))) / N ** n
    pts, frq = g.axis.points(), g.axis.freqs()
    out = coeff
    first = True
    for i in range(2 * n):
        if i < n:  # frequency slot, position modes
            ph = np.exp(-2j * np.pi * np.outer(xi[:, i], pts))
        else:      # position slot, frequency modes
            ph = np.exp(+2j * np.pi * np.outer(s[:, i - n], frq))
        out = np.einsum("pa,a...->p..." if first else "pa,pa...->p...", ph, out)
        first = False
    if policy == "zero" and np.any(bad):
        out = np.where(bad, 0.0, out)
    return out


# -- symbol families over the flag covariables ---------------------------------

class Spectrum:
    """Symbol family a(w, lam), w in R^{2n}, callable on batched rows.

    Subclasses implement `_evaluate(W, lam)`; `derivative` returns an
    analytically differentiated family when one is available, else None
    and callers fall back to finite differences.
    """

    def __init__(self, n: int, symmetric: bool = False):
        if n < 1:
            raise ValueError("group rank must be >= 1")
        self.n = n
        self.symmetric = symmetric

    def __call__(self, W: np.ndarray, lam: np.ndarray | float) -> np.ndarray:
        W = np.atleast_2d(np.asarray(W, dtype=float))
        if W.shape[1] != 2 * self.n:
            raise ValueError(f"expected {2 * self.n} covariable columns")
        lam = np.broadcast_to(np.asarray(lam, dtype=float), (W.shape[0],))
        return self._evaluate(W, lam)

    def _evaluate(self, W: np.ndarray, lam: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, alpha: Sequence[int], beta: int) -> "Spectrum | None":
        return None


class CallableSpectrum(Spectrum):
    def __init__(self, n: int, fun: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 symmetric: bool = False):
        super().__init__(n, symmetric)
        self._fun = fun

    def _evaluate(self, W, lam):
        return np.asarray(self._fun(W, lam))


class SympySpectrum(Spectrum):
    """Symbol family given by a sympy expression in w1..w_{2n} and lam."""

    def __init__(self, expr, n: int, symmetric: bool = False):
        super().__init__(n, symmetric)
        self._w = sp.symbols(f"w1:{2 * n + 1}", real=True)
        self._lam = sp.Symbol("lam", real=True)
        # rebind by name so |lam| differentiates to sign(lam), not re/im parts
        named = {s.name: s for s in (*self._w, self._lam)}
        expr = sp.sympify(expr)
        unknown = {s for s in expr.free_symbols if s.name not in named}
        if unknown:
            raise ValueError(f"unknown symbols in spectrum expression: {unknown}")
        self.expr = expr.subs({s: named[s.name] for s in expr.free_symbols})
        self._fn = sp.lambdify((*self._w, self._lam), self.expr, "numpy")
        self._dcache: dict = {}

    def _evaluate(self, W, lam):
        out = self._fn(*(W[:, i] for i in range(2 * self.n)), lam)
        return np.broadcast_to(np.asarray(out), (W.shape[0],)).astype(complex)

    def derivative(self, alpha: Sequence[int], beta: int) -> "SympySpectrum":
        key = (tuple(alpha), int(beta))
        cached = self._dcache.get(key)
        if cached is not None:
            return cached
        expr = self.expr
        for w, a in zip(self._w, alpha):
            if a:
                expr = sp.diff(expr, w, a)
        if beta:
            expr = sp.diff(expr, self._lam, beta)
            # |lam| beyond first order leaves delta terms supported on the
            # excluded lam = 0 plane; they vanish wherever we evaluate
            expr = expr.replace(
                lambda e: isinstance(e, sp.DiracDelta), lambda e: sp.S.Zero)
        out = SympySpectrum(expr, self.n, symmetric=False)
        self._dcache[key] = out
        return out


# -- fiber sampling ------------------------------------------------------------

def fiber_covariables(lam: float, grid: LineGrid) -> np.ndarray:
    """Rows w = (-sgn(lam) sqrt|lam| xi_i, -sqrt|lam| s_j) over the table."""
    root = np.sqrt(abs(lam))
    xi = grid.flat_freqs()
    s = grid.flat_points()
    wx = -np.sign(lam) * root * xi             # (modes, n)
    wy = -root * s                             # (size, n)
    m = grid.size
    rows = np.concatenate(
        [np.repeat(wx, m, axis=0), np.tile(wy, (m, 1))], axis=1
    )
    return rows


def fiber_symbol(spec: Spectrum, lam: float, grid: LineGrid) -> SymbolGrid:
    """Sample the family along the parabolic frame of the fiber at lam."""
    if lam == 0.0:
        raise ValueError("fiber symbols need a nonzero central frequency")
    if grid.dim != spec.n:
        raise ValueError(f"state dimension {grid.dim} != group rank {spec.n}")
    rows = fiber_covariables(lam, grid)
    vals = spec(rows, -lam).reshape(grid.size, grid.size)
    return SymbolGrid(lam, grid, vals)


def fiber_symbol_of_field(field: SampledField, lam: float, grid: LineGrid,
                          policy: str = "zero") -> SymbolGrid:
    """Fiber symbol read off a sampled kernel: transform, then interpolate.

    The group-side samples are pushed to the full dual lattice and the
    parabolic frame points (w, -lam) are evaluated by the band-limited
    interpolant, with `policy` deciding out-of-footprint rows.
    """
    if field.side != "group" or field.grid.group_dim is None:
        raise ValueError("expected a group-side field on a group grid")
    if grid.dim != field.grid.n:
        raise ValueError("state dimension != group rank")
    dual = fourier(field)
    rows = fiber_covariables(lam, grid)
    pts = np.concatenate([rows, np.full((rows.shape[0], 1), -lam)], axis=1)
    # chunk the interpolation: eval_at holds a (rows, lattice) intermediate
    vals = np.concatenate([
        dual.eval_at(pts[i:i + 1024], policy=policy)
        for i in range(0, len(pts), 1024)
    ])
    return SymbolGrid(lam, grid, vals.reshape(grid.size, grid.size))


def field_of_spectrum(spec: Spectrum, grid: Grid) -> SampledField:
    """Group-side kernel field whose Euclidean transform samples the family.

    Bounded multipliers give distribution kernels; on the lattice that is
    just the inverse transform of the sampled table. The family is not
    defined on the lam = 0 plane, where multipliers like the Riesz ratio
    have no limit at w = 0; non-finite samples there are zeroed, which
    picks one representative of the same bounded class.
    """
    if grid.group_dim is None:
        raise ValueError("expected a Heisenberg-layout grid")
    if grid.n != spec.n:
        raise ValueError(f"grid rank {grid.n} != group rank {spec.n}")
    mesh = np.meshgrid(*(ax.freqs() for ax in grid.axes), indexing="ij")
    W = np.stack([m.ravel() for m in mesh[:-1]], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = spec(W, mesh[-1].ravel())
    vals = np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
    dual = SampledField(grid, vals.reshape(grid.shape), (True,) * grid.ndim)
    return inverse_fourier(dual)


# -- flag seminorm scans -------------------------------------------------------

@dataclass(frozen=True)
class SeminormRow:
    alpha: tuple
    beta: int
    lam: float
    shell_radii: tuple
    shell_sup: tuple
    verdict: str

    @property
    def sup(self) -> float:
        return max(self.shell_sup)


@dataclass
class SeminormReport:
    rows: list = field(default_factory=list)
    blowup_factor: float = 8.0

    @property
    def overall_ok(self) -> bool:
        return all(r.verdict == "ok" for r in self.rows)

    def worst(self) -> "SeminormRow | None":
        bad = [r for r in self.rows if r.verdict != "ok"]
        pool = bad or self.rows
        return max(pool, key=lambda r: r.sup) if pool else None

    def to_json(self) -> str:
        payload = {
            "overall_ok": self.overall_ok,
            "blowup_factor": self.blowup_factor,
            "rows": [
                {
                    "alpha": list(r.alpha),
                    "beta": r.beta,
                    "lam": r.lam,
                    "sup": r.sup,
                    "verdict": r.verdict,
                    "shell_radii": list(r.shell_radii),
                    "shell_sup": list(r.shell_sup),
                }
                for r in self.rows
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "beta", "lam", "sup", "verdict"])
        for r in self.rows:
            w.writerow(["+".join(map(str, r.alpha)), r.beta, r.lam,
                        f"{r.sup:.6e}", r.verdict])
        return buf.getvalue()


def _shell_points(n: int, radius: float, directions: int) -> np.ndarray:
    # evenly spread directions on the (2n-1)-sphere; deterministic
    if n == 1:
        th = np.linspace(0.0, 2 * np.pi, directions, endpoint=False) + 0.39
        return radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    rng = np.random.default_rng(directions + 7 * n)
    v = rng.standard_normal((directions, 2 * n))
    return radius * v / np.linalg.norm(v, axis=1, keepdims=True)


def _normalized_derivative(spec: Spectrum, alpha, beta, lam, pts,
                           derived: "Spectrum | None" = None) -> np.ndarray:
    d = derived if derived is not None else spec.derivative(alpha, beta)
    if d is not None:
        vals = d(pts, lam)
    else:
        def joint(q):
            return spec(q[:, :-1], q[:, -1])

        r = float(np.linalg.norm(pts[0]))
        h_w = 0.02 * (r + np.sqrt(abs(lam)))
        # the lam step must stay clear of the |lam| kink at zero
        h = [h_w] * (2 * spec.n) + [0.02 * abs(lam)]
        q = np.concatenate([pts, np.full((len(pts), 1), lam)], axis=1)
        vals = partial_cloud(joint, q, (*alpha, beta), h)
    r = np.linalg.norm(pts, axis=1)
    return np.abs(vals) * r ** sum(alpha) * (r ** 2 + abs(lam)) ** beta


def default_multi_indices(n: int) -> list:
    """Derivative multi-indices (alpha, beta) scanned by default."""
    out = [((0,) * 2 * n, 1)]
    for i in range(2 * n):
        e = [0] * 2 * n
        e[i] = 1
        out.append((tuple(e), 0))
        out.append((tuple(e), 1))
        e2 = list(e)
        e2[i] = 2
        out.append((tuple(e2), 0))
    return out


def flag_estimate_report(spec: Spectrum,
                         indices: "Sequence | None" = None,
                         lam_values: "Sequence | None" = None,
                         rmin: float = 0.01, rmax: float = 100.0,
                         shells: int = 13, directions: int = 12,
                         blowup_factor: float = 8.0) -> SeminormReport:
    """Scan normalized flag derivatives over shells and dyadic fibers.

    A row fails near the flag boundary when the innermost shell exceeds
    the mid shell by `blowup_factor`, and fails at infinity when the
    outermost shell does.
    """
    if indices is None:
        indices = default_multi_indices(spec.n)
    if lam_values is None:
        lam_values = [s * 2.0 ** j for j in range(-3, 4) for s in (1, -1)]
    radii = np.geomspace(rmin, rmax, shells)
    report = SeminormReport(blowup_factor=blowup_factor)
    for alpha, beta in indices:
        derived = spec.derivative(alpha, beta)
        for lam in lam_values:
            sups = []
            for r in radii:
                pts = _shell_points(spec.n, r, directions)
                sups.append(float(np.max(_normalized_derivative(
                    spec, alpha, beta, lam, pts, derived=derived))))
            # reference over the middle third: a single zero crossing at one
            # mid radius must not trip the ratio test
            core = sups[len(sups) // 3:2 * len(sups) // 3 + 1]
            ref = max(max(core), 1e-300)
            # a bounded row may legitimately dwarf the mid shells when its
            # plateau sets in late (around ||w||^2 ~ |lam|), so a flag also
            # needs the endmost shells to still be climbing
            step = np.sqrt(radii[1] / radii[0])
            flags = []
            if (sups[0] >= blowup_factor * ref and sups[0] > 1e-12
                    and sups[0] >= step * sups[1]):
                flags.append("origin-blowup")
            if (sups[-1] >= blowup_factor * ref and sups[-1] > 1e-12
                    and sups[-1] >= step * sups[-2]):
                flags.append("growth-at-infinity")
            report.rows.append(SeminormRow(
                alpha=tuple(alpha), beta=int(beta), lam=float(lam),
                shell_radii=tuple(float(r) for r in radii),
                shell_sup=tuple(sups),
                verdict="+".join(flags) if flags else "ok",
            ))
    return report


def sym0_seminorms(spec: Spectrum, **kwargs) -> dict:
    """Best-constant table: sup of each normalized derivative over the scan."""
    rep = flag_estimate_report(spec, **kwargs)
    out: dict = {}
    for r in rep.rows:
        key = (r.alpha, r.beta)
        out[key] = max(out.get(key, 0.0), r.sup)
    return out
