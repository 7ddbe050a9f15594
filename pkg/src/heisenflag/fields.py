"""Sampled scalar fields on centered grids, plus their on-disk containers.

A SampledField couples a Grid with a complex value tensor and records, per
axis, whether that axis currently lives on the position or the frequency
lattice. Full position-side fields are "group side", full frequency-side
ones "dual side"; partial transforms produce mixed fields and every
operation keeps the bookkeeping straight.

Band-limited point evaluation treats the samples as coefficients of the
unique trigonometric interpolant. Outside the grid footprint the
interpolant is periodic, which is meaningless for decaying data, so
`eval_at` takes an explicit out-of-footprint policy:

* ``"wrap"``: raw periodic mode sum (flat spectra, spikes);
* ``"zero"``: return 0 outside the footprint (decaying fields, default);
* ``"edge"``: clamp the query onto the footprint boundary (symbol
  resampling; callers flag clamped points).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .grids import Axis, Grid, centered_dft, centered_idft

_MAGIC = b"HFC1"


@dataclass
class SampledField:
    grid: Grid
    values: np.ndarray
    transformed: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        self.values = vals
        if self.transformed == ():
            self.transformed = (False,) * self.grid.ndim
        self.transformed = tuple(bool(b) for b in self.transformed)
        if len(self.transformed) != self.grid.ndim:
            raise ValueError("one transformed flag per axis required")

    @property
    def side(self) -> str:
        if not any(self.transformed):
            return "group"
        if all(self.transformed):
            return "dual"
        return "mixed"

    @property
    def quad_weight(self) -> float:
        w = 1.0
        for ax, tr in zip(self.grid.axes, self.transformed):
            w *= ax.freq_spacing if tr else ax.spacing
        return w

    def axis_coords(self, i: int) -> np.ndarray:
        ax = self.grid.axes[i]
        return ax.freqs() if self.transformed[i] else ax.points()

    def axis_half_width(self, i: int) -> float:
        ax = self.grid.axes[i]
        return ax.freq_half_width if self.transformed[i] else ax.half_width

    def axis_spacing(self, i: int) -> float:
        ax = self.grid.axes[i]
        return ax.freq_spacing if self.transformed[i] else ax.spacing

    def with_values(self, values: np.ndarray) -> "SampledField":
        return SampledField(self.grid, values, self.transformed)

    def copy(self) -> "SampledField":
        return SampledField(self.grid, self.values.copy(), self.transformed)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.quad_weight * np.sum(np.abs(self.values) ** 2)))

    # -- band-limited evaluation --------------------------------------------

    def out_of_footprint(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of query rows falling outside [-H, H) on any axis."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mask = np.zeros(pts.shape[0], dtype=bool)
        for i in range(self.grid.ndim):
            h = self.axis_half_width(i)
            mask |= (pts[:, i] < -h) | (pts[:, i] >= h)
        return mask

    def _mode_data(self):
        """Coefficient tensor plus per-axis (modes, kernel sign)."""
        coeff = self.values
        modes, signs = [], []
        for i, ax in enumerate(self.grid.axes):
            if self.transformed[i]:
                # frequency samples: interpolate with e^{-2 pi i x q}
                coeff = centered_idft(coeff, i)
                modes.append(ax.points())
                signs.append(-1)
            else:
                coeff = centered_dft(coeff, i) / ax.count
                modes.append(ax.freqs())
                signs.append(+1)
        return coeff, modes, signs

    def eval_at(self, points: np.ndarray, policy: str = "zero") -> np.ndarray:
        """Trigonometric interpolation at arbitrary points, shape (m, ndim)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.grid.ndim:
            raise ValueError(f"points must have {self.grid.ndim} columns")
        if policy not in ("wrap", "zero", "edge"):
            raise ValueError(f"unknown policy {policy!r}")
        outside = self.out_of_footprint(pts)
        if policy == "edge" and np.any(outside):
            pts = pts.copy()
            for i in range(self.grid.ndim):
                h = self.axis_half_width(i)
                d = self.axis_spacing(i)
                pts[:, i] = np.clip(pts[:, i], -h, h - d)
        coeff, modes, signs = self._mode_data()
        out = None
        for i in range(self.grid.ndim):
            e = np.exp(signs[i] * 2j * np.pi * pts[:, i, None] * modes[i][None, :])
            if out is None:
                out = np.tensordot(e, coeff, axes=(1, 0))
            else:
                out = np.einsum("mk,mk...->m...", e, out)
        out = np.asarray(out)
        if policy == "zero":
            out = np.where(outside, 0.0, out)
        return out


@dataclass(frozen=True)
class LambdaWindow:
    """Central-frequency band eps <= |lambda| <= 1/eps."""

    eps: float

    def __post_init__(self):
        if not (0.0 < self.eps <= 1.0):
            raise ValueError(f"window parameter must lie in (0, 1], got {self.eps}")

    @property
    def lo(self) -> float:
        return self.eps

    @property
    def hi(self) -> float:
        return 1.0 / self.eps

    def contains(self, lam) -> np.ndarray:
        a = np.abs(np.asarray(lam, dtype=float))
        # half-open tolerance so bin centers on the boundary are kept
        return (a >= self.lo - 1e-12) & (a <= self.hi + 1e-12)


# -- containers ---------------------------------------------------------------

def _field_header(f: SampledField) -> dict:
    return {
        "kind": "field",
        "version": 1,
        "group_dim": f.grid.group_dim,
        "axes": [{"count": ax.count, "half_width": ax.half_width} for ax in f.grid.axes],
        "transformed": list(f.transformed),
        "shape": list(f.values.shape),
    }


def _grid_from_header(h: dict) -> Grid:
    axes = tuple(Axis(a["count"], a["half_width"]) for a in h["axes"])
    return Grid(axes, group_dim=h.get("group_dim"))


def write_blob(path, header: dict, payload: np.ndarray) -> None:
    """Binary container: magic, header length, JSON header, raw complex128."""
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    data = np.ascontiguousarray(payload, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(raw)))
        fh.write(raw)
        fh.write(data)


def read_blob(path) -> tuple[dict, np.ndarray]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not a container file (magic {magic!r})")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        payload = np.frombuffer(fh.read(), dtype="<c16").astype(complex)
    return header, payload


def save_field(f: SampledField, path, fmt: str | None = None) -> None:
    """Write a field container; fmt in {"binary", "json"} or by extension."""
    fmt = fmt or ("json" if str(path).endswith(".json") else "binary")
    if fmt == "binary":
        write_blob(path, _field_header(f), f.values.ravel())
    elif fmt == "json":
        doc = _field_header(f)
        doc["values_re"] = f.values.real.ravel().tolist()
        doc["values_im"] = f.values.imag.ravel().tolist()
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_field(path, fmt: str | None = None) -> SampledField:
    fmt = fmt or ("json" if str(path).endswith(".json") else "binary")
    if fmt == "binary":
        header, payload = read_blob(path)
    elif fmt == "json":
        with open(path) as fh:
            header = json.load(fh)
        payload = np.asarray(header["values_re"], dtype=float) + 1j * np.asarray(
            header["values_im"], dtype=float
        )
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if header.get("kind") != "field":
        raise ValueError(f"container holds {header.get('kind')!r}, expected 'field'")
    grid = _grid_from_header(header)
    values = payload.reshape(tuple(header["shape"]))
    return SampledField(grid, values, tuple(header["transformed"]))
