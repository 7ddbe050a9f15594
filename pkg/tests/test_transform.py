import numpy as np
import pytest
from scipy import integrate

from common import GROUP16, GROUP32, GROUP8, balanced_rates, random_gaussian_field
from oracles import direct_convolution, gaussian_transform_1d

from heisenflag.fields import LambdaWindow, SampledField
from heisenflag.grids import group_grid
from heisenflag.group import GroupPoint, group_inv
from heisenflag.transform import (
    central_frequencies,
    central_slice_energy,
    convolve,
    fourier,
    gaussian_field,
    group_reflect,
    inverse_fourier,
    l2_norm,
    lambda_filter,
    partial_fourier,
    partial_inverse_fourier,
    spike_field,
    star_involution,
)


def random_field(grid, rng):
    vals = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    return SampledField(grid, vals)


def test_plancherel_exact():
    rng = np.random.default_rng(21)
    for grid in (GROUP8, GROUP16):
        f = random_field(grid, rng)
        assert np.isclose(l2_norm(f), l2_norm(fourier(f)), rtol=1e-13)


def test_roundtrip_exact():
    rng = np.random.default_rng(22)
    f = random_field(GROUP16, rng)
    back = inverse_fourier(fourier(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-12
    assert back.side == "group"


def test_partial_transforms_compose_to_full():
    rng = np.random.default_rng(23)
    f = random_field(GROUP16, rng)
    step = partial_fourier(partial_fourier(f, (0, 1)), 2)
    assert step.side == "dual"
    assert np.max(np.abs(step.values - fourier(f).values)) < 1e-12
    back = partial_inverse_fourier(step, (2, 0, 1))
    assert np.max(np.abs(back.values - f.values)) < 1e-12
    with pytest.raises(ValueError):
        partial_fourier(step, 0)


def test_mixed_side_norms_preserved():
    rng = np.random.default_rng(24)
    f = random_field(GROUP16, rng)
    part = partial_fourier(f, 2)
    assert part.side == "mixed"
    assert np.isclose(part.l2_norm(), f.l2_norm(), rtol=1e-13)


def test_gaussian_transform_closed_form():
    av, at = balanced_rates(GROUP32)
    lam0 = 0.5
    f = gaussian_field(GROUP32, v_rate=av, t_rate=at, modulation=lam0)
    F = fourier(f)
    xi = GROUP32.axes[0].freqs()
    lam = GROUP32.t_axis.freqs()
    gx = gaussian_transform_1d(av, xi)
    gt = gaussian_transform_1d(at, lam - lam0)
    truth = gx[:, None, None] * gx[None, :, None] * gt[None, None, :]
    assert np.max(np.abs(F.values - truth)) < 1e-8


def test_convolution_matches_direct_oracle():
    rng = np.random.default_rng(25)
    f = random_gaussian_field(GROUP8, rng, modulation_scale=0.2)
    g = random_gaussian_field(GROUP8, rng, modulation_scale=0.2)
    got = convolve(f, g)
    want = direct_convolution(f, g)
    assert np.max(np.abs(got.values - want)) < 1e-11


def test_convolution_matches_continuum_quadrature():
    # one-point anchor against adaptive 3d quadrature of the closed form
    av, at = balanced_rates(GROUP32)
    f = gaussian_field(GROUP32, v_rate=av, t_rate=at)
    g = gaussian_field(GROUP32, v_rate=1.3 * av, t_rate=0.8 * at)

    def integrand(tp, yp, xp, h):
        x0, y0, t0 = h
        fv = np.exp(-np.pi * (av * (xp ** 2 + yp ** 2) + at * tp ** 2))
        ts = t0 - tp - xp * (y0 - yp)
        gv = np.exp(-np.pi * (1.3 * av * ((x0 - xp) ** 2 + (y0 - yp) ** 2)
                              + 0.8 * at * ts ** 2))
        return fv * gv

    conv = convolve(f, g)
    h = (0.5, -0.25, 1.0)
    want, err = integrate.tplquad(integrand, -4, 4, -4, 4, -8, 8, args=(h,),
                                  epsabs=1e-10, epsrel=1e-10)
    idx = (np.argmin(np.abs(GROUP32.axes[0].points() - h[0])),
           np.argmin(np.abs(GROUP32.axes[1].points() - h[1])),
           np.argmin(np.abs(GROUP32.t_axis.points() - h[2])))
    got = conv.values[idx]
    assert abs(got - want) < 1e-7
    assert abs(got.imag) < 1e-12


def test_spike_is_neutral():
    rng = np.random.default_rng(26)
    f = random_gaussian_field(GROUP16, rng)
    d = spike_field(GROUP16)
    for h in (convolve(f, d), convolve(d, f)):
        assert np.max(np.abs(h.values - f.values)) < 1e-10 * np.max(np.abs(f.values))


def test_central_factors_commute():
    # pure-central factor: horizontal spike times a t-profile
    grid = GROUP16
    t = grid.t_axis.points()
    vals = np.zeros(grid.shape, dtype=complex)
    vals[grid.axes[0].count // 2, grid.axes[1].count // 2, :] = (
        np.exp(-np.pi * 0.25 * t ** 2) / (grid.axes[0].spacing ** 2)
    )
    central = SampledField(grid, vals)
    rng = np.random.default_rng(27)
    f = random_gaussian_field(grid, rng)
    lhs = convolve(f, central)
    rhs = convolve(central, f)
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10 * np.max(np.abs(lhs.values))


def test_convolution_associative_on_gaussians():
    # narrow envelopes: the periodic wrap of the true-coordinate twist
    # phase is the dominant defect and decays with the y-tail squared
    rng = np.random.default_rng(28)
    fields = []
    for _ in range(3):
        f = gaussian_field(GROUP32, v_rate=rng.uniform(1.0, 1.4, 2),
                           t_rate=0.125 * rng.uniform(0.8, 1.2),
                           modulation=rng.uniform(-0.3, 0.3))
        fields.append(f)
    f, g, k = fields
    lhs = convolve(convolve(f, g), k)
    rhs = convolve(f, convolve(g, k))
    scale = np.max(np.abs(lhs.values))
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-6 * scale


def test_star_is_involutive_and_isometric():
    rng = np.random.default_rng(29)
    f = random_gaussian_field(GROUP32, rng, modulation_scale=0.25)
    ff = star_involution(star_involution(f))
    # residual is the band-limitation defect of the sheared interpolant
    assert np.max(np.abs(ff.values - f.values)) < 1e-8 * np.max(np.abs(f.values))
    assert np.isclose(l2_norm(star_involution(f)), l2_norm(f), rtol=1e-10)


def test_group_reflect_matches_interpolant_at_inverse_points():
    # at lattice points the reflected samples equal the interpolant of f
    # composed with the group inverse, exactly
    rng = np.random.default_rng(39)
    f = random_gaussian_field(GROUP32, rng, modulation_scale=0.4)
    r = group_reflect(f)
    ii = rng.integers(2, 30, 20)
    jj = rng.integers(2, 30, 20)
    kk = rng.integers(4, 60, 20)
    pts = np.column_stack([GROUP32.axes[0].points()[ii],
                           GROUP32.axes[1].points()[jj],
                           GROUP32.t_axis.points()[kk]])
    inv_pts = np.column_stack([-pts[:, 0], -pts[:, 1],
                               -pts[:, 2] + pts[:, 0] * pts[:, 1]])
    got = r.values[ii, jj, kk]
    want = f.eval_at(inv_pts, policy="wrap")
    assert np.max(np.abs(got - want)) < 1e-12


def test_star_moves_aligned_spike_to_inverse():
    grid = GROUP16
    point = GroupPoint([1.0], [1.0], 0.5)  # x.y = 1 keeps the shear on-lattice
    inv = group_inv(point)
    vals = np.zeros(grid.shape, dtype=complex)

    def index_of(p):
        return (np.argmin(np.abs(grid.axes[0].points() - p.x[0])),
                np.argmin(np.abs(grid.axes[1].points() - p.y[0])),
                np.argmin(np.abs(grid.t_axis.points() - p.t)))

    vals[index_of(point)] = 2.0 - 1.0j
    f = SampledField(grid, vals)
    r = star_involution(f)
    expect = np.zeros(grid.shape, dtype=complex)
    expect[index_of(inv)] = 2.0 + 1.0j
    assert np.max(np.abs(r.values - expect)) < 1e-10


def test_star_antihomomorphism():
    rng = np.random.default_rng(30)
    f = gaussian_field(GROUP32, v_rate=rng.uniform(1.0, 1.4, 2), t_rate=0.125,
                       modulation=0.25)
    g = gaussian_field(GROUP32, v_rate=rng.uniform(1.0, 1.4, 2), t_rate=0.15,
                       modulation=-0.125)
    lhs = star_involution(convolve(f, g))
    rhs = convolve(star_involution(g), star_involution(f))
    scale = np.max(np.abs(lhs.values))
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-6 * scale


def test_group_reflect_involutive():
    rng = np.random.default_rng(31)
    f = random_gaussian_field(GROUP32, rng, modulation_scale=0.25)
    rr = group_reflect(group_reflect(f))
    assert np.max(np.abs(rr.values - f.values)) < 1e-8 * np.max(np.abs(f.values))


def test_lambda_filter_projection():
    rng = np.random.default_rng(32)
    f = random_field(GROUP16, rng)
    win = LambdaWindow(0.5)
    pf = lambda_filter(f, win)
    pf2 = lambda_filter(pf, win)
    assert np.max(np.abs(pf2.values - pf.values)) < 1e-12
    # orthogonal projection: energies split exactly
    rest = f.with_values(f.values - pf.values)
    assert np.isclose(l2_norm(f) ** 2, l2_norm(pf) ** 2 + l2_norm(rest) ** 2,
                      rtol=1e-12)
    # surviving bins are exactly the window band
    spec = partial_fourier(pf, 2)
    lam = central_frequencies(GROUP16)
    outside = ~win.contains(lam)
    assert np.max(np.abs(spec.values[..., outside])) < 1e-12


def test_slice_energy_decomposes_norm():
    rng = np.random.default_rng(33)
    f = random_gaussian_field(GROUP16, rng, modulation_scale=0.4)
    lam = central_frequencies(GROUP16)
    dl = GROUP16.t_axis.freq_spacing
    total = dl * sum(central_slice_energy(f, float(l)) for l in lam)
    assert np.isclose(total, l2_norm(f) ** 2, rtol=1e-12)


def test_slice_energy_sign_convention():
    # the slice kernel e^{+2 pi i t lam} matches the representation's
    # central character, so e^{+2 pi i lam0 t} content sits at lam = -lam0
    grid = GROUP32
    av, at = balanced_rates(grid)
    f = gaussian_field(grid, v_rate=av, t_rate=at, modulation=0.5)
    hot = central_slice_energy(f, -0.5)
    cold = central_slice_energy(f, 0.5)
    assert hot > 1e6 * cold
