"""Exact unsteady Stokes flows built from scalar generating functions."""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import (MonopoleError, PreconditionError, ResonanceError, SpecError,
                     UnsupportedOperation)
from .fields import (BESSEL_KINDS, Constant, Exp, FluidParams, Poly, PowerSeries, ScalarField,
                     ScalarMode, SolidDecaying, SolidGrowing, _power_modes, _radial_q, poly_time)
from .grid import ShellGrid
from .operators import (CurlCurlR, CurlR, Gradient, Sum, VectorField, body_force, evaluate,
                        is_exact, vdivergence, vheat)

SPEC_RTOL = 1e-10
SERIES_RTOL = 1e-16
MAX_SERIES_TERMS = 2000
DEFAULT_DOMAIN = (0.5, 1.5)


def check_grid(domain=DEFAULT_DOMAIN):
    """Small fixed lattice used to sample residual fields of mode arithmetic."""
    return ShellGrid.shell(domain[0], domain[1], nr=3, n_theta=6, n_phi=12, times=(0.0, 0.25, 0.5, 1.0))


def sample_max(f, grid):
    """max |f| over a grid for a ScalarField or exact VectorField."""
    r, th, ph = grid.spherical_points()
    best = 0.0
    for t in grid.times:
        if isinstance(f, ScalarField):
            vals = np.abs(f.eval(r, th, ph, t))
        else:
            vals = np.linalg.norm(evaluate(f, grid.points(), t), axis=-1)
        if vals.size:
            best = max(best, float(vals.max()))
    return best


@dataclass(frozen=True)
class FlowSpec:
    params: FluidParams
    A: ScalarField = field(default_factory=ScalarField)
    B: ScalarField = field(default_factory=ScalarField)
    chi: ScalarField = field(default_factory=ScalarField)
    P: ScalarField = field(default_factory=ScalarField)
    T: ScalarField = field(default_factory=ScalarField)
    p0: float = 0.0
    domain: Tuple[float, float] = DEFAULT_DOMAIN

    def residuals(self):
        """Sampled magnitudes of the A and B equations with their scales."""
        mu = self.params.mu
        grid = check_grid(self.domain)
        lhsA = (self.A.heat_op(self.params).laplacian() * mu)
        lapP = self.P.laplacian()
        lhsB = self.B.heat_op(self.params) * mu
        out = {}
        for name, left, right in (("28", lhsA, lapP), ("29", lhsB, self.T)):
            res = sample_max((left + right).simplify(), grid)
            scale = max(1.0, sample_max(left, grid), sample_max(right, grid))
            out[name] = (res, scale)
        return out

    def validate(self, rtol=SPEC_RTOL):
        labels = {"28": "mu lap(lap - (1/nu) d/dt) A + lap P = 0",
                  "29": "mu (lap - (1/nu) d/dt) B + T = 0"}
        for eq, (res, scale) in self.residuals().items():
            if res > rtol * scale:
                raise SpecError(f"equation ({eq}) violated: {labels[eq]}; residual {res:.3e}",
                                equation=eq, residual=res)
        return self


@dataclass(frozen=True, eq=False)
class FlowSolution:
    velocity: VectorField
    pressure: ScalarField
    params: FluidParams
    p0: float = 0.0
    body_force: Optional[VectorField] = None
    provenance: str = ""

    def pressure_at(self, r, theta, phi, t=0.0):
        return self.p0 + self.pressure.eval(r, theta, phi, t)

    @property
    def homogeneous(self):
        return self.body_force is None


def build_flow(spec, validate=True):
    """Velocity curl curl(r A) + curl(r B) and the matching pressure.

    The pressure is p0 + chi + d/dr{ r [P + mu (lap - (1/nu) d/dt) A] },
    produced in closed mode form.
    """
    if validate:
        spec.validate()
    mu = spec.params.mu
    V = Sum((CurlCurlR(spec.A), CurlR(spec.B)))
    Q = (spec.P + spec.A.heat_op(spec.params) * mu).simplify()
    try:
        pressure = (spec.chi + Q + Q.r_dr()).simplify()
    except UnsupportedOperation as exc:
        raise SpecError("pressure potential is not harmonic; check equation (28)", equation="28") from exc
    forced = not (spec.chi.is_zero and spec.P.is_zero and spec.T.is_zero)
    f = body_force(spec.chi, spec.P, spec.T) if forced else None
    return FlowSolution(V, pressure, spec.params, spec.p0, f, "theorem")


# ------------------------------------------------------ particular solutions

def _series_exp(md, sigma, params, r_max):
    n = md.n
    g = {p: v * md.coeff for p, v in md.radial.powers(n).items()}
    base = min(g)
    last = max(g)
    s = sigma / params.nu
    cs = {}
    prev, scale, k = 0.0, 0.0, 0
    while True:
        p = base + 2 + 2 * k
        q = _radial_q(n, p)
        if q == 0:
            raise ResonanceError(f"power r^{p - 2} resonates with a harmonic of degree {n}")
        ck = (g.get(p - 2, 0.0) / params.mu + s * prev) / q
        cs[p] = ck
        size = abs(ck) * r_max ** p
        scale = max(scale, size)
        if p - 2 >= last:
            if s == 0.0:
                break
            nxt = _radial_q(n, p + 2)
            if size <= SERIES_RTOL * scale and abs(s) * r_max**2 < 0.5 * abs(nxt):
                break
        k += 1
        if k > MAX_SERIES_TERMS:
            raise ResonanceError("power series for the heat-Poisson solve did not converge")
        prev = ck
    return _power_modes(md.index, md.time, 1.0, cs)


def _series_poly(md, degree, params):
    radial_only = ScalarField((ScalarMode(md.index, md.radial, Constant(), md.coeff),))
    R = radial_only.inverse_laplacian() * (1.0 / params.mu)
    out = list(_retime(R, poly_time(degree)))
    for j in range(degree - 1, -1, -1):
        R = (R * ((j + 1) / params.nu)).inverse_laplacian()
        out.extend(_retime(R, poly_time(j)))
    return out


def _retime(f, time):
    return [ScalarMode(md.index, md.radial, time, md.coeff) for md in f.modes]


def _bessel_solve(md, params):
    kappa = md.radial.eigenvalue
    mu, nu = params.mu, params.nu
    tm = md.time
    if isinstance(tm, Poly):
        c = md.coeff / (mu * kappa)
        out = [ScalarMode(md.index, md.radial, tm, c)]
        for j in range(tm.degree - 1, -1, -1):
            c = (j + 1) * c / (nu * kappa)
            out.append(ScalarMode(md.index, md.radial, poly_time(j), c))
        return out
    sigma = tm.sigma if isinstance(tm, Exp) else 0.0
    d = mu * (kappa - sigma / nu)
    if abs(d) <= 1e-12 * mu * (abs(kappa) + abs(sigma) / nu):
        raise ResonanceError("heat-type Bessel mode lies in the kernel of the heat operator")
    return [md.scaled(1.0 / d)]


def solve_heat_poisson(g, params, r_max=None):
    """F with mu (lap - (1/nu) d/dt) F = g, built mode by mode.

    Power-law modes use an ascending series in r^2 (terminating for constant
    or polynomial time factors, truncated at relative 1e-16 at ``r_max``
    otherwise); Bessel modes are rescaled.
    """
    if r_max is None:
        r_max = g.domain_hint[1] if g.domain_hint else 2.0
    out = []
    for md in g.simplify().modes:
        if isinstance(md.radial, BESSEL_KINDS):
            out.extend(_bessel_solve(md, params))
        elif isinstance(md.time, Poly):
            out.extend(_series_poly(md, md.time.degree, params))
        else:
            sigma = md.time.sigma if isinstance(md.time, Exp) else 0.0
            out.extend(_series_exp(md, sigma, params, r_max))
    return ScalarField(tuple(out), g.domain_hint).simplify()


def solve_A_for_P(P, params, r_max=None):
    """Particular A with mu lap(lap - (1/nu) d/dt) A + lap P = 0 (zero gauge)."""
    g = P.laplacian()
    if not g.modes:
        return ScalarField((), P.domain_hint)
    return solve_heat_poisson(-g.inverse_laplacian(), params, r_max)


def solve_B_for_T(T, params, r_max=None):
    """Particular B with mu (lap - (1/nu) d/dt) B + T = 0."""
    return solve_heat_poisson(-T, params, r_max)


# ------------------------------------------------------------ special flows

def _probe_points(domain, count=50, seed=12345):
    rng = np.random.default_rng(seed)
    r = rng.uniform(domain[0], domain[1], count)
    th = np.arccos(rng.uniform(-1.0, 1.0, count))
    ph = rng.uniform(0.0, 2.0 * np.pi, count)
    st = np.sin(th)
    return np.stack([r * st * np.cos(ph), r * st * np.sin(ph), r * np.cos(th)], axis=-1)


def naghdi_hsu(Phi, psi1, params, domain=DEFAULT_DOMAIN, tol=1e-8):
    """V = Phi + (1/mu) grad psi1 - nu grad int_0^t div Phi ds,  p = -(1/nu) d(psi1)/dt.

    Phi must be a mode-based heat-type vector field that is solenoidal at
    t = 0, and psi1 harmonic.
    """
    if not is_exact(Phi):
        raise PreconditionError("Phi must be mode-based for the closed-form time integral")
    if psi1.laplacian().modes:
        raise PreconditionError("psi1 must be harmonic")
    X = _probe_points(domain)
    heat = vheat(Phi, params)
    scale = max(1.0, float(np.abs(evaluate(Phi, X, 0.0)).max()))
    for t in (0.0, 0.5, 1.0):
        res = float(np.abs(evaluate(heat, X, t)).max())
        if res > tol * scale:
            raise PreconditionError(f"Phi is not heat-type (residual {res:.3e} at t={t})")
    div = vdivergence(Phi)
    res0 = float(np.abs(div.eval_cart(X, 0.0)).max()) if div.modes else 0.0
    if res0 > tol * scale:
        raise PreconditionError(f"div Phi(., 0) != 0 (max {res0:.3e}); psi2(., 0) = 0 cannot hold")
    terms = [Phi, Gradient(psi1 * (1.0 / params.mu))]
    if div.modes:
        terms.append(Gradient(div.time_integral() * (-params.nu)))
    pressure = (psi1.dt() * (-1.0 / params.nu)).simplify()
    return FlowSolution(Sum(tuple(terms)), pressure, params, 0.0, None, "naghdi_hsu")


def potential_from_pressure(p):
    """phi with phi + r d(phi)/dr = p for harmonic p."""
    out = []
    for md in p.simplify().modes:
        if isinstance(md.radial, SolidGrowing):
            out.append(md.scaled(1.0 / (md.n + 1)))
        elif isinstance(md.radial, SolidDecaying):
            if md.n == 0:
                raise MonopoleError("a 1/r pressure mode needs log r in phi, outside the mode family")
            out.append(md.scaled(-1.0 / md.n))
        else:
            raise PreconditionError("pressure must be harmonic (solid harmonic modes only)")
    return ScalarField(tuple(out), p.domain_hint)


def harmonic_pressure_flow(p, params, r_max=None):
    """Particular flow V1 = curl curl(r A_p) carrying a given harmonic pressure."""
    phi = potential_from_pressure(p)
    A_p = solve_heat_poisson(phi, params, r_max)
    Q = (A_p.heat_op(params) * params.mu).simplify()
    pressure = (Q + Q.r_dr()).simplify()
    return FlowSolution(CurlCurlR(A_p), pressure, params, 0.0, None, "harmonic_pressure")
