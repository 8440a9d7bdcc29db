import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sp

from ustokes.errors import DomainError, InvalidIndex
from ustokes.fields import (BesselJ, Constant, Exp, FluidParams, ModifiedI, ModifiedK, Poly, PowerSeries,
                            ScalarField, SolidDecaying, SolidGrowing, field_of, mode, sph_to_cart)
from ustokes.generators import heat_mode, random_field
from ustokes.grid import ShellGrid
from ustokes.operators import StencilSpec, evaluate, fd_gradient, fd_heat, fd_laplacian, Gradient
from ustokes.special import angular_table, eval_ylm, lm_count, spherical_bessel

SQ3 = np.sqrt(3 / (4 * np.pi))


def random_points(rng, n=20, lo=0.6, hi=1.4):
    return sph_to_cart(rng.uniform(lo, hi, n), np.arccos(rng.uniform(-1, 1, n)), rng.uniform(0, 2 * np.pi, n))


def test_ylm_values():
    assert eval_ylm(0, 0, 0.7, 1.1) == pytest.approx(1 / (2 * np.sqrt(np.pi)), abs=1e-10)
    assert eval_ylm(1, 0, 0.0, 0.3) == pytest.approx(0.4886025119, abs=1e-10)


def test_ylm_norm_and_gram():
    grid = ShellGrid((1.0,), 12, 24)
    th, ph, w = grid.sphere()
    assert np.sum(eval_ylm(2, 1, th, ph) ** 2 * w) == pytest.approx(1.0, abs=1e-12)
    Y, _, _ = angular_table(8, th, ph)
    gram = np.einsum("aij,bij,ij->ab", Y, Y, w)
    assert np.abs(gram - np.eye(lm_count(8))).max() < 1e-10


def test_ylm_errors():
    with pytest.raises(InvalidIndex):
        eval_ylm(1, 2, 0.1, 0.1)
    with pytest.raises(DomainError):
        eval_ylm(1, 0, 4.0, 0.1)


def test_bessel_examples():
    assert abs(spherical_bessel("j", 0, np.pi)) < 1e-14
    assert spherical_bessel("j", 1, 1e-4) == pytest.approx(3.3333333e-5, rel=1e-8)
    assert spherical_bessel("i", 0, 1.0) == pytest.approx(np.sinh(1.0), rel=1e-12)
    for kind in ("y", "k"):
        with pytest.raises(DomainError):
            spherical_bessel(kind, 1, 0.0)


@pytest.mark.parametrize("n", [0, 1, 3, 6])
def test_bessel_series_branch_matches_scipy(n):
    x = np.array([1e-3, 0.1, 0.49, 0.51, 2.0])
    assert np.allclose(spherical_bessel("j", n, x), sp.spherical_jn(n, x), rtol=1e-12, atol=0)
    assert np.allclose(spherical_bessel("i", n, x), sp.spherical_in(n, x), rtol=1e-12, atol=0)
    assert np.allclose(spherical_bessel("i", n, x, derivative=True),
                       sp.spherical_in(n, x, derivative=True), rtol=1e-10, atol=1e-300)


def test_eval_examples():
    assert ScalarField().eval(0.7, 0.2, 0.3, 1.0) == 0.0
    f = field_of(mode(1, 0))
    assert f.eval(0.8, 0.4, 1.0) == pytest.approx(0.8 * np.cos(0.4) * SQ3, abs=1e-14)
    h = field_of(mode(0, 0, BesselJ(2.0), Exp(-4.0), 2 * np.sqrt(np.pi)))
    assert h.eval(0.5, 1.0, 2.0, 0.1) == pytest.approx(np.sin(1.0) * np.exp(-0.4), rel=1e-13)
    with pytest.raises(DomainError):
        field_of(mode(1, 0, SolidDecaying())).eval(0.0, 0.1, 0.1)


def test_exact_operator_examples():
    params = FluidParams(1.0, 1.0, 1.0)
    r2 = field_of(mode(0, 0, PowerSeries(2, (1.0,)), Constant(), 2 * np.sqrt(np.pi)))
    assert r2.laplacian().eval(0.9, 0.3, 0.2) == pytest.approx(6.0, rel=1e-14)
    heat = field_of(mode(2, 1, ModifiedI(1.3), Exp(1.69)))
    assert heat.heat_op(params).is_zero
    mu, nu = 1.5, 0.5
    params = FluidParams.from_nu_mu(nu, mu)
    psi1 = field_of(mode(1, 1, SolidGrowing(), Poly(1), -mu * nu / SQ3))
    out = psi1.heat_op(params)
    X = np.array([[0.3, -0.2, 0.9]])
    assert out.eval_cart(X, 0.7) == pytest.approx(mu * 0.3, rel=1e-14)


def test_params_validation():
    with pytest.raises(ValueError):
        FluidParams(1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        FluidParams(-1.0, 1.0, -1.0)
    assert FluidParams.from_nu_mu(2.0, 3.0).rho == 1.5


def test_harmonic_modes_fd_laplacian():
    rng = np.random.default_rng(1)
    X = random_points(rng)
    for n in range(5):
        for radial in (SolidGrowing(), SolidDecaying()):
            f = field_of(mode(n, -n if n else 0, radial))
            assert f.is_harmonic
            assert np.abs(fd_laplacian(f, X, 0.0)).max() < 1e-6


def test_heat_modes_exact_and_fd():
    rng = np.random.default_rng(2)
    params = FluidParams(0.8, 1.2, 1.5)
    X = random_points(rng)
    for _ in range(6):
        f = field_of(heat_mode(rng, params))
        assert f.is_heat_type(params.nu)
        assert f.heat_op(params).is_zero
        t = rng.uniform(0, 1)
        assert np.abs(fd_heat(f, params, X, t)).max() < 1e-6
    K = field_of(mode(1, 0, ModifiedK(0.9), Exp(0.9**2 * params.nu)))
    assert K.is_heat_type(params.nu)


def test_gradient_fd_order():
    rng = np.random.default_rng(3)
    f = random_field(rng, 3)
    X = random_points(rng, 10)
    exact = evaluate(Gradient(f), X, 0.3)
    e1 = np.abs(fd_gradient(f, X, 0.3, StencilSpec(h=4e-2)) - exact).max()
    e2 = np.abs(fd_gradient(f, X, 0.3, StencilSpec(h=2e-2)) - exact).max()
    assert e1 / e2 >= 12


def test_simplify_merges_and_cancels():
    a = field_of(mode(2, 1, SolidGrowing(), Exp(0.5), 1.0), mode(2, 1, SolidGrowing(), Exp(0.5), 2.0))
    assert len(a.simplify().modes) == 1 and a.simplify().modes[0].coeff == 3.0
    assert (a - a).simplify().is_zero


def test_time_integral_vanishes_at_zero():
    f = field_of(mode(1, 0, SolidGrowing(), Exp(-0.7)), mode(2, 2, BesselJ(1.0), Poly(2)), mode(0, 0))
    F = f.time_integral()
    assert abs(F.eval(0.9, 0.4, 0.2, 0.0)) < 1e-15
    t, h = 0.6, 1e-5
    num = (F.eval(0.9, 0.4, 0.2, t + h) - F.eval(0.9, 0.4, 0.2, t - h)) / (2 * h)
    assert num == pytest.approx(f.eval(0.9, 0.4, 0.2, t), rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(-3, 3))
def test_eval_is_linear(seed, alpha):
    rng = np.random.default_rng(seed)
    f, g = random_field(rng, 2), random_field(rng, 2)
    X = random_points(rng, 5)
    lhs = (f * alpha + g).eval_cart(X, 0.4)
    rhs = alpha * f.eval_cart(X, 0.4) + g.eval_cart(X, 0.4)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)
