"""Seeded random generators for flows, potentials and pressures.

Used by the randomized test suites and by ``ustokes construct --random``.
Only radial kinds regular at the origin are drawn unless asked otherwise.
"""
import numpy as np

from .constructors import FlowSpec, solve_A_for_P, solve_B_for_T, solve_heat_poisson
from .fields import (BesselJ, Constant, Exp, FluidParams, ModifiedI, Poly, PowerSeries, ScalarField,
                     ScalarMode, SolidDecaying, SolidGrowing, SphIndex)
from .operators import CurlCurlR, CurlR, Gradient, Sum


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_params(rng):
    nu = float(rng.uniform(0.5, 1.5))
    mu = float(rng.uniform(0.5, 1.5))
    return FluidParams.from_nu_mu(nu, mu)


def random_index(rng, n_max=3, n_min=0):
    n = int(rng.integers(n_min, n_max + 1))
    return SphIndex(n, int(rng.integers(-n, n + 1)))


def random_time(rng, kinds=("constant", "exp", "poly")):
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "exp":
        return Exp(float(rng.uniform(-1.5, 1.5)))
    if kind == "poly":
        return Poly(int(rng.integers(1, 3)))
    return Constant()


def random_radial(rng, n, kind):
    if kind == "solid_growing":
        return SolidGrowing()
    if kind == "solid_decaying":
        return SolidDecaying()
    if kind == "bessel_j":
        return BesselJ(float(rng.uniform(0.5, 2.0)))
    if kind == "modified_i":
        return ModifiedI(float(rng.uniform(0.5, 2.0)))
    ncoef = int(rng.integers(1, 3))
    cs = tuple(float(c) for c in rng.uniform(-1, 1, ncoef))
    return PowerSeries(n + 2 * int(rng.integers(0, 2)), cs)


REGULAR_KINDS = ("solid_growing", "bessel_j", "modified_i", "power_series")


def random_mode(rng, n_max=3, kinds=REGULAR_KINDS, times=("constant", "exp", "poly"), n_min=0):
    idx = random_index(rng, n_max, n_min)
    kind = kinds[int(rng.integers(len(kinds)))]
    return ScalarMode(idx, random_radial(rng, idx.n, kind), random_time(rng, times),
                      float(rng.uniform(-1, 1)))


def random_field(rng, count, **kw):
    return ScalarField(tuple(random_mode(rng, **kw) for _ in range(count)))


def heat_mode(rng, params, n_max=3, n_min=0):
    """A mode annihilated by (lap - (1/nu) d/dt)."""
    idx = random_index(rng, n_max, n_min)
    lam = float(rng.uniform(0.5, 2.0))
    c = float(rng.uniform(-1, 1))
    pick = int(rng.integers(3))
    if pick == 0:
        return ScalarMode(idx, BesselJ(lam), Exp(-params.nu * lam**2), c)
    if pick == 1:
        return ScalarMode(idx, ModifiedI(lam), Exp(params.nu * lam**2), c)
    return ScalarMode(idx, SolidGrowing(), Constant(), c)


def heat_field(rng, params, count, n_max=3, n_min=0):
    return ScalarField(tuple(heat_mode(rng, params, n_max, n_min) for _ in range(count)))


def harmonic_field(rng, count, n_max=3, decaying=False, times=("constant", "exp", "poly"), n_min=0):
    kinds = ("solid_growing", "solid_decaying") if decaying else ("solid_growing",)
    out = []
    for _ in range(count):
        md = random_mode(rng, n_max, kinds, times, n_min)
        if isinstance(md.radial, SolidDecaying) and md.n == 0:
            md = ScalarMode(SphIndex(1, 0), md.radial, md.time, md.coeff)
        out.append(md)
    return ScalarField(tuple(out))


def random_flow_spec(seed=0, n_max=3, domain=(0.5, 1.5), forced=True):
    """A FlowSpec satisfying the A and B equations by construction."""
    rng = _rng(seed)
    params = random_params(rng)
    P = random_field(rng, int(rng.integers(1, 3)), n_max=n_max) if forced else ScalarField()
    T = random_field(rng, int(rng.integers(1, 3)), n_max=n_max) if forced else ScalarField()
    chi = random_field(rng, 1, n_max=n_max) if forced else ScalarField()
    A = solve_A_for_P(P, params)
    A = A + harmonic_field(rng, 1, n_max) + heat_field(rng, params, 1, n_max)
    A = A + solve_heat_poisson(harmonic_field(rng, 1, n_max), params)
    B = solve_B_for_T(T, params) + heat_field(rng, params, 2, n_max)
    return FlowSpec(params, A.simplify(), B.simplify(), chi, P, T,
                    float(rng.uniform(-1, 1)), tuple(domain))


def random_psi(seed, params, n_max=3):
    """psi with lap (lap - (1/nu) d/dt) psi = 0."""
    rng = _rng(seed)
    psi = harmonic_field(rng, 2, n_max) + heat_field(rng, params, 1, n_max)
    psi = psi + solve_heat_poisson(harmonic_field(rng, 1, n_max), params)
    return psi.simplify()


def random_naghdi_case(seed, params, n_max=3):
    """(Phi, psi1): Phi heat-type and solenoidal, psi1 harmonic."""
    rng = _rng(seed)
    Phi = Sum((CurlR(heat_field(rng, params, 1, n_max, 1)),
               CurlCurlR(heat_field(rng, params, 1, n_max, 1)),
               Gradient(harmonic_field(rng, 1, n_max, times=("constant",), n_min=1))))
    psi1 = harmonic_field(rng, 2, n_max, n_min=1)
    return Phi, psi1


def random_harmonic_pressure(seed, n_max=3):
    """Harmonic pressure mixing growing and decaying solid harmonics."""
    rng = _rng(seed)
    grow = harmonic_field(rng, 1, n_max, times=("constant", "exp"))
    dec = harmonic_field(rng, 1, n_max, decaying=True, times=("constant", "exp"), n_min=1)
    dec = ScalarField(tuple(ScalarMode(md.index, SolidDecaying(), md.time, md.coeff) for md in dec.modes))
    return (grow + dec).simplify()
