import numpy as np
import pytest

from ustokes.constructors import (FlowSpec, build_flow, harmonic_pressure_flow, naghdi_hsu,
                                  potential_from_pressure, solve_A_for_P, solve_B_for_T, solve_heat_poisson)
from ustokes.errors import MonopoleError, PreconditionError, ResonanceError, SpecError
from ustokes.fields import (BesselJ, Constant, Exp, FluidParams, Poly, PowerSeries, ScalarField, SolidDecaying,
                            SolidGrowing, field_of, mode, sph_to_cart)
from ustokes.generators import random_flow_spec
from ustokes.grid import ShellGrid
from ustokes.heatkernel import probe_max
from ustokes.operators import CurlR, Gradient, ZERO_VECTOR, evaluate
from ustokes.verify import verify_flow

C1 = np.sqrt(4 * np.pi / 3)
C0 = 2 * np.sqrt(np.pi)
GRID = ShellGrid.shell(0.5, 1.5, 3, 6, 12, (0.0, 0.3))
PARAMS = FluidParams.from_nu_mu(0.8, 1.3)


def pts(n=20, seed=0):
    rng = np.random.default_rng(seed)
    return sph_to_cart(rng.uniform(0.5, 1.5, n), np.arccos(rng.uniform(-1, 1, n)), rng.uniform(0, 2 * np.pi, n))


def test_zero_spec():
    sol = build_flow(FlowSpec(PARAMS, p0=7.0))
    X = pts()
    assert np.abs(evaluate(sol.velocity, X, 0.2)).max() == 0.0
    assert sol.pressure_at(1.0, 0.3, 0.2, 0.5) == 7.0


def test_A_equals_z():
    spec = FlowSpec(PARAMS, A=field_of(mode(1, 0, coeff=C1)), p0=0.5)
    sol = build_flow(spec)
    assert np.abs(evaluate(sol.velocity, pts(), 0.1) - [0, 0, 2]).max() < 1e-13
    assert sol.pressure_at(1.1, 0.4, 0.2, 0.3) == pytest.approx(0.5, abs=1e-14)
    assert verify_flow(sol, grid=GRID)["momentum"].max_abs < 1e-13


def test_toroidal_decaying_swirl():
    lam = 1.7
    B = field_of(mode(1, 0, BesselJ(lam), Exp(-PARAMS.nu * lam**2), C1 / C1))
    rep = verify_flow(build_flow(FlowSpec(PARAMS, B=B)), grid=GRID)
    assert rep["momentum"].max_abs < 1e-8 and rep["continuity"].max_abs < 1e-8
    assert rep.passed


def test_spec_validation_names_equation():
    with pytest.raises(SpecError) as exc:
        build_flow(FlowSpec(PARAMS, A=field_of(mode(1, 0, PowerSeries(5, (1.0,))))))
    assert exc.value.equation == "28"
    with pytest.raises(SpecError) as exc:
        build_flow(FlowSpec(PARAMS, T=field_of(mode(1, 0))))
    assert exc.value.equation == "29"


def test_heat_poisson_examples():
    assert solve_heat_poisson(ScalarField(), PARAMS).is_zero
    x = field_of(mode(1, 1, coeff=C1))
    F = solve_heat_poisson(x, PARAMS)
    X = pts()
    r2 = np.sum(X**2, -1)
    assert np.abs(F.eval_cart(X) - X[:, 0] * r2 / (10 * PARAMS.mu)).max() < 1e-14
    g = field_of(mode(0, 0, PowerSeries(2, (1.0,)), Exp(PARAMS.nu)))
    G = solve_heat_poisson(g, PARAMS)
    t = np.linspace(0, 1, 20)
    assert np.abs((G.heat_op(PARAMS) * PARAMS.mu - g).eval_cart(X, t)).max() < 1e-12


def test_heat_poisson_resonance():
    lam = 1.1
    g = field_of(mode(2, 0, BesselJ(lam), Exp(-PARAMS.nu * lam**2)))
    with pytest.raises(ResonanceError):
        solve_heat_poisson(g, PARAMS)


def test_solve_A_and_B_examples():
    assert solve_A_for_P(field_of(mode(2, 1)), PARAMS).is_zero
    A = solve_A_for_P(field_of(mode(0, 0, PowerSeries(2, (1.0,)))), PARAMS)
    X = pts()
    r = np.linalg.norm(X, axis=-1)
    assert np.abs(A.eval_cart(X) + r**4 / (20 * PARAMS.mu) / C0).max() < 1e-14
    T = field_of(mode(1, 0, coeff=C1))
    B = solve_B_for_T(T, PARAMS)
    assert probe_max(B.heat_op(PARAMS) * PARAMS.mu + T) < 1e-12


def test_random_specs_validate_and_pass():
    for seed in range(5):
        spec = random_flow_spec(seed)
        spec.validate()
        assert verify_flow(build_flow(spec), grid=GRID).passed


def test_gauge_functions_do_not_change_velocity():
    spec = random_flow_spec(3, forced=False)
    gauge = field_of(mode(0, 0, PowerSeries(2, (0.3, -0.1))), mode(0, 0, BesselJ(1.0), Exp(-spec.params.nu)))
    twin = FlowSpec(spec.params, spec.A + gauge, spec.B + gauge, spec.chi, spec.P, spec.T, spec.p0, spec.domain)
    X = pts()
    a = evaluate(build_flow(spec).velocity, X, 0.4)
    b = evaluate(build_flow(twin, validate=False).velocity, X, 0.4)
    assert np.abs(a - b).max() < 1e-14


def test_naghdi_hsu_examples():
    mu, nu = PARAMS.mu, PARAMS.nu
    sol = naghdi_hsu(ZERO_VECTOR, field_of(mode(1, 0, coeff=mu * C1)), PARAMS)
    assert np.abs(evaluate(sol.velocity, pts(), 0.3) - [0, 0, 1]).max() < 1e-14
    assert sol.pressure.is_zero
    sol = naghdi_hsu(ZERO_VECTOR, field_of(mode(1, 1, SolidGrowing(), Poly(1), -mu * nu * C1)), PARAMS)
    X = pts()
    assert np.abs(evaluate(sol.velocity, X, 0.7) - [-nu * 0.7, 0, 0]).max() < 1e-14
    assert np.abs(sol.pressure.eval_cart(X, 0.7) - mu * X[:, 0]).max() < 1e-14
    assert verify_flow(sol, grid=GRID).passed
    lam = 1.4
    Phi = CurlR(field_of(mode(1, 0, BesselJ(lam), Exp(-nu * lam**2))))
    sol = naghdi_hsu(Phi, ScalarField(), PARAMS)
    rep = verify_flow(sol, grid=GRID)
    assert rep["momentum"].max_abs < 1e-8 and rep.passed


def test_naghdi_hsu_preconditions():
    with pytest.raises(PreconditionError):
        naghdi_hsu(CurlR(field_of(mode(1, 0, SolidGrowing(), Exp(1.0)))), ScalarField(), PARAMS)
    lam = 1.2
    grad_heat = Gradient(field_of(mode(1, 0, BesselJ(lam), Exp(-PARAMS.nu * lam**2))))
    with pytest.raises(PreconditionError):
        naghdi_hsu(grad_heat, ScalarField(), PARAMS)
    with pytest.raises(PreconditionError):
        naghdi_hsu(ZERO_VECTOR, field_of(mode(0, 0, PowerSeries(2, (1.0,)))), PARAMS)


def test_potential_from_pressure():
    p = field_of(mode(2, 1, SolidGrowing(), Constant(), 3.0), mode(2, 1, SolidDecaying(), Constant(), 4.0))
    phi = potential_from_pressure(p)
    coeffs = {type(md.radial): md.coeff for md in phi.modes}
    assert coeffs[SolidGrowing] == 1.0 and coeffs[SolidDecaying] == -2.0
    assert probe_max(phi + phi.r_dr() - p) < 1e-14


def test_harmonic_pressure_examples():
    c = 2.5
    sol = harmonic_pressure_flow(field_of(mode(0, 0, coeff=c * C0)), PARAMS)
    X = pts()
    assert np.abs(evaluate(sol.velocity, X, 0.0)).max() < 1e-14
    assert np.abs(sol.pressure.eval_cart(X) - c).max() < 1e-14
    sol = harmonic_pressure_flow(field_of(mode(1, 1, coeff=C1)), PARAMS)
    r2 = np.sum(X**2, -1)
    rV = np.sum(X * evaluate(sol.velocity, X, 0.0), -1)
    assert np.abs(rV - X[:, 0] * r2 / (10 * PARAMS.mu)).max() < 1e-14
    rep = verify_flow(sol, grid=GRID)
    assert rep["momentum"].max_abs < 1e-8 and rep["continuity"].max_abs < 1e-8
    with pytest.raises(MonopoleError):
        harmonic_pressure_flow(field_of(mode(0, 0, SolidDecaying())), PARAMS)
