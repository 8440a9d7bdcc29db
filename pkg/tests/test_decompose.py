import numpy as np
import pytest

from ustokes.constructors import build_flow
from ustokes.decompose import recover_AB, sht_analyze, synthesize, vsh_analyze
from ustokes.errors import ExtrapolationError, GridTooCoarse, MonopoleFluxError, NotDivergenceFree
from ustokes.fields import PowerSeries, field_of, mode, sph_to_cart
from ustokes.generators import random_flow_spec
from ustokes.grid import ShellGrid
from ustokes.io import read_samples_csv, write_samples_csv
from ustokes.operators import CurlCurlR, CurlR, Sampled, Sum, evaluate
from ustokes.special import eval_ylm, lm_index, lm_pairs

C1 = np.sqrt(4 * np.pi / 3)
GRID = ShellGrid.shell(0.5, 1.5, 4, 8, 16, (0.0, 0.4))


def sphere(n_theta=8, n_phi=16):
    th, ph, _ = ShellGrid((1.0,), n_theta, n_phi).sphere()
    return th, ph


def test_sht_examples():
    th, ph = sphere()
    c = sht_analyze(np.full(th.shape, 1.7), 3)
    assert c[0] == pytest.approx(1.7 * 2 * np.sqrt(np.pi), rel=1e-14)
    assert np.abs(c[1:]).max() < 1e-13
    c = sht_analyze(eval_ylm(3, 2, th, ph), 3)
    expect = np.zeros_like(c)
    expect[lm_index(3, 2)] = 1.0
    assert np.abs(c - expect).max() < 1e-12
    c = sht_analyze(np.cos(th), 3)
    assert c[lm_index(1, 0)] == pytest.approx(C1, rel=1e-14)


def test_sht_too_coarse():
    th, ph = sphere(4, 6)
    with pytest.raises(GridTooCoarse):
        sht_analyze(np.ones(th.shape), 4)
    with pytest.raises(GridTooCoarse):
        recover_AB(CurlR(field_of(mode(1, 0))), ShellGrid.shell(0.5, 1.5, 2, 3, 8), 3)


def test_vsh_of_pure_toroidal():
    th, ph = sphere()
    B = field_of(mode(2, -1))
    V = evaluate(CurlR(B), sph_to_cart(np.ones(th.shape), th, ph).reshape(-1, 3), 0.0).reshape(th.shape + (3,))
    thhat = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], -1)
    phhat = np.stack([-np.sin(ph), np.cos(ph), 0 * ph], -1)
    D, Bt = vsh_analyze(np.sum(V * thhat, -1), np.sum(V * phhat, -1), 3)
    assert np.abs(D).max() < 1e-13
    assert Bt[lm_index(2, -1)] == pytest.approx(1.0, abs=1e-13)


def test_recover_uniform_flow():
    V = CurlCurlR(field_of(mode(1, 0, coeff=C1)))
    dec = recover_AB(V, GRID, 3)
    radii = np.array(GRID.r_nodes)
    assert np.abs(dec.coeff("A", 1, 0)[:, 0] - C1 * radii).max() < 1e-12
    assert np.abs(dec.B).max() < 1e-12
    r, th, ph = GRID.spherical_points()
    assert np.abs(synthesize(dec, (r, th, ph), 0.0) - [0, 0, 2]).max() < 1e-8


def test_recover_rigid_rotation():
    V = CurlR(field_of(mode(1, 0, coeff=-C1)))
    dec = recover_AB(V, GRID, 3)
    assert np.abs(dec.coeff("B", 1, 0)[:, 1] + C1 * np.array(GRID.r_nodes)).max() < 1e-12
    assert np.abs(dec.A).max() < 1e-12


def test_rejections():
    source = Sampled(lambda P, T: P / np.linalg.norm(P, axis=1)[:, None] ** 3)
    with pytest.raises(MonopoleFluxError):
        recover_AB(source, GRID, 3)
    stretch = Sampled(lambda P, T: np.stack([P[:, 0], 0 * P[:, 0], 0 * P[:, 0]], -1))
    with pytest.raises(NotDivergenceFree):
        recover_AB(stretch, GRID, 3)


def test_round_trip_random_specs():
    r, th, ph = GRID.spherical_points()
    X = sph_to_cart(r, th, ph)
    for seed in range(4):
        spec = random_flow_spec(seed)
        V = build_flow(spec).velocity
        dec = recover_AB(V, GRID, 3)
        for k, t in enumerate(GRID.times):
            assert np.abs(synthesize(dec, (r, th, ph), t) - evaluate(V, X, t)).max() < 1e-8
        nn = np.array([n for n, _ in lm_pairs(3)], float)
        assert np.abs(nn * (nn + 1) * dec.A - dec.flux).max() < 1e-13


def test_sampled_round_trip():
    V = build_flow(random_flow_spec(11)).velocity
    box = Sampled(lambda P, T: evaluate(V, P, T))
    dec = recover_AB(box, GRID, 3)
    r, th, ph = GRID.spherical_points()
    assert np.abs(synthesize(dec, (r, th, ph), 0.4) - evaluate(V, sph_to_cart(r, th, ph), 0.4)).max() < 1e-5


def test_off_node_synthesis_dense_radii():
    V = build_flow(random_flow_spec(2)).velocity
    grid = ShellGrid.shell(0.5, 1.5, 24, 8, 16, (0.0,))
    dec = recover_AB(V, grid, 3)
    rng = np.random.default_rng(0)
    r = rng.uniform(0.55, 1.45, 30)
    th, ph = np.arccos(rng.uniform(-1, 1, 30)), rng.uniform(0, 2 * np.pi, 30)
    ref = evaluate(V, sph_to_cart(r, th, ph), 0.0)
    assert np.abs(synthesize(dec, (r, th, ph), 0.0) - ref).max() < 1e-6
    assert np.abs(synthesize(dec, (r, th, ph), 0.0, radial="spline") - ref).max() < 1e-4


def test_synthesis_errors_and_zero():
    dec = recover_AB(CurlR(field_of(mode(1, 0))), GRID, 3)
    with pytest.raises(ExtrapolationError):
        synthesize(dec, (2.0, 0.3, 0.3), 0.0)
    with pytest.raises(ExtrapolationError):
        synthesize(dec, (1.0, 0.3, 0.3), 0.2)
    zero = recover_AB(Sum(()), GRID, 3)
    assert np.abs(synthesize(zero, (1.0, 0.3, 0.3), 0.0)).max() == 0.0


def test_gauge_is_invisible():
    A = field_of(mode(2, 1))
    gauge = field_of(mode(0, 0, PowerSeries(2, (1.0,))))
    a = recover_AB(CurlCurlR(A), GRID, 3)
    b = recover_AB(CurlCurlR(A + gauge), GRID, 3)
    assert np.abs(a.A - b.A).max() < 1e-14
    assert np.abs(b.A[:, :, 0]).max() == 0.0


def test_csv_round_trip(tmp_path):
    V = CurlR(field_of(mode(1, 0, coeff=-C1)))
    grid = ShellGrid.shell(0.5, 1.5, 4, 6, 10, (0.0,))
    path = tmp_path / "rot.csv"
    write_samples_csv(path, V, grid)
    field, g2 = read_samples_csv(path)
    assert g2.n_theta == 6 and g2.n_phi == 10 and len(g2.r_nodes) == 4
    dec = recover_AB(field, g2, 4)
    assert np.abs(dec.coeff("B", 1, 0)[:, 0] + C1 * np.array(grid.r_nodes)).max() < 1e-12
    assert np.abs(dec.A).max() < 1e-12
    assert dec.analysis_residual < 1e-12
