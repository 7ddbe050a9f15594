"""Fiberwise inversion of flag symbols and the reconstructed inverse family.

The pipeline samples a symbol family along each requested fiber, quantizes,
inverts the matrix, and reads the inverse symbol back off. The per-fiber
diagnostics (smallest singular value, condition number, two-sided residuals)
decide whether the family is uniformly invertible: a fiber can be perfectly
invertible as a matrix while its symbol vanishes on the flag boundary, so
uniformity is judged against an absolute singular-value floor rather than
the condition limit alone.

The collected inverse tables glue to a new symbol family on covariable
space through the inverse parabolic frame map; that family supports the
same seminorm scans and derivative identities as the input, which is the
numerical content of inverse-closedness.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .finitediff import stencil
from .grids import LineGrid
from .schrodinger import FiberOperator, gramian, hs_norm, operator_norm, save_operator
from .transform import convolve
from .symbols import (
    Spectrum,
    SymbolGrid,
    evaluate_symbol,
    fiber_symbol,
    kn_quantize,
    kn_symbol_of,
    symbol_clip_mask,
)

# Elliptic catalog fibers sit at sigma_min ~ 1, while a symbol vanishing at
# a phase-space point bottoms out near the quantization scale (the ground
# level of the oscillator that osculates its zero, ~ 0.13 under this Fourier
# convention, independent of the lattice). The floor splits the two regimes.
SIGMA_FLOOR = 0.25


class FiberInversionError(RuntimeError):
    """A fiber failed the hard numerical invertibility gate."""

    def __init__(self, lam: float, sigma_min: float, cond: float, limit: float):
        self.lam, self.sigma_min, self.cond, self.limit = lam, sigma_min, cond, limit
        super().__init__(
            f"fiber at lam={lam:g}: cond={cond:.3e} exceeds limit {limit:.3e} "
            f"(sigma_min={sigma_min:.3e})")


class SymmetryError(ValueError):
    """Strict mode was asked to invert a non-Hermitian fiber."""


def fiber_table(spec, lam: float, grid: LineGrid) -> SymbolGrid:
    """Symbol table of one fiber; objects may supply their own sampler."""
    own = getattr(spec, "fiber_table", None)
    if own is not None:
        return own(lam, grid)
    return fiber_symbol(spec, lam, grid)


def invert_fiber(a: FiberOperator, cond_limit: float = 1e8,
                 mode: str = "reduce") -> tuple[FiberOperator, float, float]:
    """Invert one fiber operator; returns (inverse, sigma_min, cond).

    "direct" inverts through the SVD, "reduce" solves the Hermitian gram
    system H = A*A and recombines B = H^{-1} A* (algebraically A^{-1}),
    "strict" requires a Hermitian matrix and inverts its eigensystem.
    """
    m = a.matrix
    sv = np.linalg.svd(m, compute_uv=False)
    sigma_min = float(sv[-1])
    cond = float(sv[0] / sv[-1]) if sigma_min > 0 else np.inf
    if not np.isfinite(cond) or cond > cond_limit:
        raise FiberInversionError(a.lam, sigma_min, cond, cond_limit)
    if mode == "direct":
        inv = np.linalg.inv(m)
    elif mode == "reduce":
        gram = m.conj().T @ m
        inv = np.linalg.solve(gram, m.conj().T)
    elif mode == "strict":
        skew = np.linalg.norm(m - m.conj().T) / max(np.linalg.norm(m), 1e-300)
        if skew > 1e-10:
            raise SymmetryError(
                f"fiber at lam={a.lam:g} is not Hermitian "
                f"(relative skew {skew:.3e})")
        w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
        inv = (v / w[None, :]) @ v.conj().T
    else:
        raise ValueError(f"unknown inversion mode {mode!r}")
    return FiberOperator(a.lam, a.grid, inv), sigma_min, cond


def neumann_inverse(a: SymbolGrid, k_max: int = 20) -> tuple[SymbolGrid, float]:
    """Series inverse of a = 1 + p via sum (-1)^k Op(p)^k, with tail bound.

    Independent of the solve-based route; the bound is operator-norm
    geometric and infinite when the series cannot converge.
    """
    p = kn_quantize(a.with_values(a.values - 1.0)).matrix
    rho = float(np.linalg.norm(p, 2))
    total = np.eye(p.shape[0], dtype=complex)
    term = np.eye(p.shape[0], dtype=complex)
    for _ in range(k_max):
        term = -term @ p
        total += term
    tail = rho ** (k_max + 1) / (1.0 - rho) if rho < 1.0 else np.inf
    return kn_symbol_of(FiberOperator(a.lam, a.grid, total)), tail


@dataclass(frozen=True)
class FiberRow:
    lam: float
    sigma_min: float
    cond: float
    symbol_min: float
    inverse_op_norm: float
    inverse_hs_norm: float
    residual_right: float
    residual_left: float
    residual_sup: float
    invertible: bool


@dataclass
class InversionResult:
    grid: LineGrid
    mode: str
    cond_limit: float
    sigma_floor: float
    rows: list = field(default_factory=list)
    fibers: dict = field(default_factory=dict)
    spec: object = None

    @property
    def lam_values(self) -> list:
        return [r.lam for r in self.rows]

    @property
    def uniformly_invertible(self) -> bool:
        return all(r.invertible for r in self.rows)

    @property
    def uniform_bound(self) -> float:
        return max(r.inverse_op_norm for r in self.rows)

    @property
    def worst_residual(self) -> float:
        return max(max(r.residual_right, r.residual_left) for r in self.rows)

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "cond_limit": self.cond_limit,
            "sigma_floor": self.sigma_floor,
            "uniformly_invertible": self.uniformly_invertible,
            "uniform_bound": self.uniform_bound,
            "worst_residual": self.worst_residual,
            "fibers": [
                {
                    "lam": r.lam,
                    "sigma_min": r.sigma_min,
                    "cond": r.cond,
                    "symbol_min": r.symbol_min,
                    "inverse_op_norm": r.inverse_op_norm,
                    "inverse_hs_norm": r.inverse_hs_norm,
                    "residual_right": r.residual_right,
                    "residual_left": r.residual_left,
                    "residual_sup": r.residual_sup,
                    "invertible": r.invertible,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lam", "sigma_min", "cond", "symbol_min", "inverse_op_norm",
                    "residual_right", "residual_left", "residual_sup", "invertible"])
        for r in self.rows:
            w.writerow([r.lam, f"{r.sigma_min:.9e}", f"{r.cond:.9e}",
                        f"{r.symbol_min:.9e}", f"{r.inverse_op_norm:.9e}",
                        f"{r.residual_right:.9e}", f"{r.residual_left:.9e}",
                        f"{r.residual_sup:.9e}", int(r.invertible)])
        return buf.getvalue()

    def spectrum(self, policy: str = "edge") -> "ReconstructedSpectrum":
        if self.spec is None:
            raise ValueError("result was built without a source family")
        recon = ReconstructedSpectrum(self.spec, self.grid, mode=self.mode,
                                      cond_limit=self.cond_limit, policy=policy)
        for lam, b in self.fibers.items():
            recon._tables[lam] = kn_symbol_of(b)
        return recon

    def save(self, outdir, operators: bool = False) -> list:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        written = []
        p = outdir / "inversion.json"
        p.write_text(self.to_json() + "\n")
        written.append(p)
        p = outdir / "fibers.csv"
        p.write_text(self.to_csv())
        written.append(p)
        if operators:
            for lam, op in sorted(self.fibers.items()):
                p = outdir / f"inverse_fiber_{lam:+.6f}.hfc"
                save_operator(op, p)
                written.append(p)
        return written


def invert_flag(spec, lam_values, grid: LineGrid, mode: str = "reduce",
                cond_limit: float = 1e8,
                sigma_floor: float = SIGMA_FLOOR) -> InversionResult:
    """Invert every requested fiber and collect the diagnostics.

    A fiber counts as invertible when its smallest singular value clears
    `sigma_floor`; the condition limit only guards the arithmetic. The two
    gates differ exactly on symbols that vanish somewhere: those stay
    numerically invertible at any lattice size but have no inverse in the
    symbol class, and the floor is what detects them.
    """
    if mode == "strict" and not getattr(spec, "symmetric", False):
        raise SymmetryError(
            "strict mode needs a family declared symmetric; "
            "this one is not")
    out = InversionResult(grid=grid, mode=mode, cond_limit=cond_limit,
                          sigma_floor=sigma_floor, spec=spec)
    eye = np.eye(grid.size)
    for lam in lam_values:
        lam = float(lam)
        table = fiber_table(spec, lam, grid)
        a = kn_quantize(table)
        b, sigma_min, cond = invert_fiber(a, cond_limit, mode)
        rr = np.linalg.norm(a.matrix @ b.matrix - eye, 2)
        rl = np.linalg.norm(b.matrix @ a.matrix - eye, 2)
        prod = kn_symbol_of(FiberOperator(lam, grid, a.matrix @ b.matrix))
        out.rows.append(FiberRow(
            lam=lam, sigma_min=sigma_min, cond=cond,
            symbol_min=float(np.min(np.abs(table.values))),
            inverse_op_norm=operator_norm(b), inverse_hs_norm=hs_norm(b),
            residual_right=float(rr), residual_left=float(rl),
            residual_sup=float(np.max(np.abs(prod.values - 1.0))),
            invertible=sigma_min >= sigma_floor))
        out.fibers[lam] = b
    return out


def uniform_invertibility_report(spec, lam_values, grid: LineGrid) -> dict:
    """Per-fiber smallest singular values and the frame-constant summary.

    The minimum over fibers is the empirical lower frame constant: the
    factor c in ||K * f||_2 >= c ||f||_2 once the fibers are glued back.
    No inversion happens here, only singular values.
    """
    rows = []
    for lam in lam_values:
        lam = float(lam)
        table = fiber_table(spec, lam, grid)
        sv = np.linalg.svd(kn_quantize(table).matrix, compute_uv=False)
        rows.append({
            "lam": lam,
            "sigma_min": float(sv[-1]),
            "sigma_max": float(sv[0]),
            "inverse_norm": float(1.0 / sv[-1]) if sv[-1] > 0 else np.inf,
            "symbol_min": float(np.min(np.abs(table.values))),
        })
    sigmas = [r["sigma_min"] for r in rows]
    return {
        "rows": rows,
        "frame_constant": min(sigmas),
        "max_inverse_norm": max(r["inverse_norm"] for r in rows),
    }


def gramian_lower_bound(kernel_field, test_field, lam_values, c: float) -> dict:
    """Bin-wise check of G_{K*f}(lam) >= c^2 G_f(lam) on occupied bins.

    `c` is the frame constant from the singular-value table; bins where
    the test field carries no energy are skipped (both sides vanish).
    """
    conv = convolve(kernel_field, test_field)
    grid = LineGrid(test_field.grid.axes[0].count,
                    test_field.grid.axes[0].half_width,
                    test_field.grid.n)
    rows = []
    energies = {}
    for lam in lam_values:
        lam = float(lam)
        if lam == 0.0:
            continue
        energies[lam] = gramian(test_field, lam, grid)
    floor = 1e-12 * max(energies.values())
    for lam, gf in energies.items():
        if gf < floor:
            continue
        gkf = gramian(conv, lam, grid)
        rows.append({
            "lam": lam,
            "gram_f": gf,
            "gram_conv": gkf,
            "margin": (gkf - c * c * gf) / gf,
        })
    return {
        "rows": rows,
        "worst_margin": min(r["margin"] for r in rows),
        "ok": all(r["margin"] >= -1e-8 for r in rows),
    }


class ReconstructedSpectrum(Spectrum):
    """Inverse family glued from per-fiber inverse tables.

    Evaluation at (w, mu) looks up the fiber at -mu through the inverse
    parabolic frame map; fibers are produced on demand and cached, so the
    family supports finite differencing in the central frequency. Rows
    that leave a table footprint are clamped ("edge") and counted in
    `clipped_rows`.
    """

    def __init__(self, spec, grid: LineGrid, mode: str = "reduce",
                 cond_limit: float = 1e8, policy: str = "edge"):
        super().__init__(grid.dim, symmetric=False)
        self.base = spec
        self.grid = grid
        self.mode = mode
        self.cond_limit = cond_limit
        self.policy = policy
        self.clipped_rows = 0
        self._tables: dict[float, SymbolGrid] = {}

    def inverse_table(self, lam: float) -> SymbolGrid:
        lam = float(lam)
        tab = self._tables.get(lam)
        if tab is None:
            a = kn_quantize(fiber_table(self.base, lam, self.grid))
            b, _, _ = invert_fiber(a, self.cond_limit, self.mode)
            tab = kn_symbol_of(b)
            self._tables[lam] = tab
        return tab

    def _evaluate(self, W, lam):
        out = np.empty(W.shape[0], dtype=complex)
        for mu in np.unique(lam):
            if mu == 0.0:
                raise ValueError("reconstructed family needs nonzero lam")
            rows = lam == mu
            tab = self.inverse_table(-mu)
            root = np.sqrt(abs(mu))
            xi = np.sign(mu) * W[rows, :self.n] / root
            s = -W[rows, self.n:] / root
            self.clipped_rows += int(np.sum(symbol_clip_mask(tab, xi, s)))
            out[rows] = evaluate_symbol(tab, xi, s, policy=self.policy)
        return out


class GramSpectrum(Spectrum):
    """Hermitian surrogate of a family: each fiber becomes A*A.

    Quantization does not commute with pointwise conjugation, so real
    symbols generally give non-Hermitian fibers; squaring through the
    adjoint restores symmetry at the operator level and keeps the fiber
    invertible exactly when the original one is.
    """

    def __init__(self, base):
        n = getattr(base, "n", None)
        if n is None:
            raise ValueError("base family must expose its group rank")
        super().__init__(n, symmetric=True)
        self.base = base

    def fiber_table(self, lam: float, grid: LineGrid) -> SymbolGrid:
        a = kn_quantize(fiber_table(self.base, lam, grid))
        return kn_symbol_of(FiberOperator(lam, grid, a.matrix.conj().T @ a.matrix))

    def _evaluate(self, W, lam):
        raise NotImplementedError(
            "gram fibers exist only as tables; sample with fiber_table")


def verify_inverse(result: InversionResult, spec, recon: "ReconstructedSpectrum | None" = None) -> dict:
    """Two-sided operator residuals plus the reconstruction round trip.

    The round trip compares the fiber symbol of the glued inverse family
    against the inverse table read directly off each fiber; at lattice
    coincidences the two agree to rounding when the gluing is consistent.
    """
    if recon is None:
        recon = ReconstructedSpectrum(spec, result.grid, mode=result.mode,
                                      cond_limit=result.cond_limit)
    report = {}
    for row in result.rows:
        b = result.fibers[row.lam]
        direct = kn_symbol_of(b)
        glued = fiber_symbol(recon, row.lam, result.grid)
        scale = max(direct.sup_norm(), 1e-300)
        report[row.lam] = {
            "residual_right": row.residual_right,
            "residual_left": row.residual_left,
            "glue_error": float(np.max(np.abs(glued.values - direct.values))) / scale,
        }
    return report


def _fiber_nodes(spec, lam: float, grid: LineGrid, order: int, h: float,
                 mode: str, cond_limit: float):
    """Stencil-node (A, B) matrices for central differencing in lam."""
    off, wts = stencil(order)
    a_nodes, b_nodes = [], []
    for o in off:
        a = kn_quantize(fiber_table(spec, lam + o * h, grid))
        b, _, _ = invert_fiber(a, cond_limit, mode)
        a_nodes.append(a.matrix)
        b_nodes.append(b.matrix)
    scale = h ** order
    da = sum(w * m for w, m in zip(wts, a_nodes)) / scale
    db = sum(w * m for w, m in zip(wts, b_nodes)) / scale
    return da, db, b_nodes[len(off) // 2]


def lambda_derivative_check(spec, lam: float, grid: LineGrid,
                            mode: str = "reduce", cond_limit: float = 1e8,
                            h_rel: float = 0.02, order: int = 1) -> dict:
    """Derivative structure of the inverse fibers at one central frequency.

    At order 1 this checks d_lam B = -B (d_lam A) B, with all derivatives
    taken at fixed table coordinates (the quantization lattice does not
    move with lam); the formula is constant-free only there, so higher
    orders report just the scaled derivative |lam|^M ||d^M B|| used by
    the uniformity scan, plus the sup of the differentiated symbol table.
    """
    if lam == 0.0:
        raise ValueError("derivative check needs a nonzero central frequency")
    h = h_rel * abs(lam)
    da, db, b0 = _fiber_nodes(spec, lam, grid, order, h, mode, cond_limit)
    # reading the table off the differentiated matrix is exact: the
    # quantization is linear, so d(symbol) = symbol(d(matrix))
    table = kn_symbol_of(FiberOperator(lam, grid, db))
    out = {
        "lam": float(lam),
        "order": order,
        "step": h,
        "derivative_norm": float(np.linalg.norm(db, 2)),
        "scaled_derivative": abs(lam) ** order * float(np.linalg.norm(db, 2)),
        "scaled_table_sup": abs(lam) ** order * table.sup_norm(),
    }
    if order == 1:
        rhs = -b0 @ da @ b0
        num = float(np.linalg.norm(db - rhs, 2))
        den = max(float(np.linalg.norm(db, 2)), float(np.linalg.norm(rhs, 2)))
        out["identity_residual"] = num
        out["identity_rel"] = num / den if den > 0 else 0.0
    return out


def uniform_derivative_scan(spec, lam_values, grid: LineGrid,
                            mode: str = "reduce", cond_limit: float = 1e8,
                            m_max: int = 1) -> dict:
    """Scaled inverse derivatives across fibers, with a uniformity verdict.

    Uniformity per order means the largest scaled derivative stays within
    a factor 4 of the median over the lam grid; a family leaving the
    symbol class under inversion shows up as orders of magnitude instead.
    """
    orders = {}
    for order in range(1, m_max + 1):
        rows = [lambda_derivative_check(spec, lam, grid, mode, cond_limit,
                                        order=order)
                for lam in lam_values]
        scaled = [r["scaled_derivative"] for r in rows]
        med = float(np.median(scaled))
        orders[order] = {
            "rows": rows,
            "max_scaled": max(scaled),
            "median_scaled": med,
            "uniform": max(scaled) <= 4.0 * med if med > 0 else True,
        }
    return {
        "orders": orders,
        "uniform": all(o["uniform"] for o in orders.values()),
    }


def derivative_report(result: InversionResult, m_max: int = 2) -> dict:
    """Derivative scan over the fibers an inversion run already covered."""
    if result.spec is None:
        raise ValueError("result was built without a source family")
    return uniform_derivative_scan(result.spec, result.lam_values, result.grid,
                                   result.mode, result.cond_limit, m_max)
