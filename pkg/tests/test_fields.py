import numpy as np
import pytest

from common import GROUP16, GROUP8
from oracles import dft_literal

from heisenflag.fields import LambdaWindow, SampledField, load_field, save_field
from heisenflag.grids import Axis, Grid, centered_dft, centered_idft, self_dual_line
from heisenflag.transform import gaussian_field


def test_axis_geometry():
    ax = Axis(16, 4.0)
    assert ax.spacing == 0.5
    assert ax.freq_spacing == 0.125
    assert ax.freq_half_width == 1.0
    pts = ax.points()
    assert pts[0] == -4.0 and pts[-1] == 3.5 and pts[8] == 0.0
    assert ax.dual().dual() == ax
    with pytest.raises(ValueError):
        Axis(12, 4.0)
    with pytest.raises(ValueError):
        Axis(16, 0.0)


def test_self_dual_line():
    g = self_dual_line(64)
    assert g.is_self_dual()
    assert np.allclose(g.points(), g.freqs())


def test_centered_dft_matches_literal_sum():
    rng = np.random.default_rng(11)
    for N in (8, 16):
        v = rng.normal(size=N) + 1j * rng.normal(size=N)
        assert np.allclose(centered_dft(v, 0), dft_literal(v), atol=1e-12)
        assert np.allclose(centered_idft(centered_dft(v, 0), 0), v, atol=1e-13)


def test_group_grid_layout():
    assert GROUP16.n == 1
    assert GROUP16.shape == (16, 16, 32)
    assert GROUP16.t_axis.half_width == 8.0
    assert GROUP16.weight == 0.5 * 0.5 * 0.5
    with pytest.raises(ValueError):
        Grid((Axis(8, 1.0), Axis(8, 2.0), Axis(8, 1.0)), group_dim=1)


def test_field_sides_and_norm():
    f = gaussian_field(GROUP16)
    assert f.side == "group"
    # separable Gaussian: norm is the product of 1d quadratures
    x = GROUP16.axes[0].points()
    t = GROUP16.t_axis.points()
    n1 = 0.5 * np.sum(np.exp(-2 * np.pi * x ** 2))
    nt = 0.5 * np.sum(np.exp(-2 * np.pi * t ** 2))
    assert np.isclose(f.l2_norm(), np.sqrt(n1 * n1 * nt), rtol=1e-12)


def test_eval_at_interpolates_grid_points():
    f = gaussian_field(GROUP8, v_rate=1.3, t_rate=0.9, modulation=0.25)
    mesh = GROUP8.meshes()
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    got = f.eval_at(pts, policy="wrap")
    assert np.allclose(got, f.values.ravel(), atol=1e-12)


def test_eval_at_off_grid_matches_closed_form():
    from common import GROUP32, balanced_rates

    av, at = balanced_rates(GROUP32)
    f = gaussian_field(GROUP32, v_rate=av, t_rate=at)
    pts = np.array([[0.3, -0.7, 1.1], [1.05, 0.45, -2.2]])
    truth = np.exp(-np.pi * (av * (pts[:, 0] ** 2 + pts[:, 1] ** 2)
                             + at * pts[:, 2] ** 2))
    assert np.allclose(f.eval_at(pts), truth, atol=1e-9)


def test_eval_at_policies():
    f = gaussian_field(GROUP16)
    outside = np.array([[5.0, 0.0, 0.0]])
    inside = np.array([[0.5, 0.0, 0.0]])
    assert f.out_of_footprint(outside)[0] and not f.out_of_footprint(inside)[0]
    assert f.eval_at(outside, policy="zero")[0] == 0.0
    # wrap: periodic alias of the interpolant, 5 = -3 mod 8
    wrapped = f.eval_at(np.array([[-3.0, 0.0, 0.0]]), policy="wrap")[0]
    assert np.isclose(f.eval_at(outside, policy="wrap")[0], wrapped, atol=1e-10)
    # edge: clamped onto the boundary point
    edge = f.eval_at(outside, policy="edge")[0]
    clamped = f.eval_at(np.array([[4.0 - 0.5, 0.0, 0.0]]), policy="wrap")[0]
    assert np.isclose(edge, clamped, atol=1e-12)
    with pytest.raises(ValueError):
        f.eval_at(inside, policy="nearest")


def test_lambda_window():
    w = LambdaWindow(0.25)
    assert w.lo == 0.25 and w.hi == 4.0
    got = w.contains([0.1, -0.25, 0.5, 4.0, -5.0, 0.0])
    assert list(got) == [False, True, True, True, False, False]
    with pytest.raises(ValueError):
        LambdaWindow(0.0)
    with pytest.raises(ValueError):
        LambdaWindow(1.5)


def test_field_container_roundtrip(tmp_path):
    rng = np.random.default_rng(12)
    f = gaussian_field(GROUP8, v_rate=rng.uniform(0.5, 2.0, 2))
    f = f.with_values(f.values * np.exp(1j * rng.normal(size=f.values.shape)))
    for name, fmt in (("f.hfc", "binary"), ("f.json", "json")):
        p = tmp_path / name
        save_field(f, p, fmt=fmt)
        g = load_field(p)
        assert g.grid == f.grid
        assert g.transformed == f.transformed
        np.testing.assert_array_equal(g.values, f.values) if fmt == "binary" else \
            np.testing.assert_allclose(g.values, f.values, atol=1e-15)


def test_container_rejects_wrong_kind(tmp_path):
    from heisenflag.fields import write_blob

    p = tmp_path / "x.hfc"
    write_blob(p, {"kind": "something"}, np.zeros(2, dtype=complex))
    with pytest.raises(ValueError):
        load_field(p)
    with open(p, "wb") as fh:
        fh.write(b"nope")
    with pytest.raises(ValueError):
        load_field(p)
