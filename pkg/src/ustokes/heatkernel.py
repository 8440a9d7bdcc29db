"""Heat-kernel pressure potential psi and its harmonic / heat-type split.

psi(x, t) = -nu * int_0^t (e^{nu (t - tau) lap} p)(x, tau) dtau, using the
unit-mass Gaussian kernel (4 pi nu s)^{-3/2} exp(-|x - xi|^2 / 4 nu s), so
that (lap - (1/nu) d/dt) psi = p on all of space.  The pressure is extended
by zero outside the quadrature domain.

Quadrature: s = t - tau = u^2 (Gauss-Legendre in u), spherical coordinates
centred at x with radius sqrt(4 nu s) * eta (Gauss-Legendre in eta, cut at
the domain boundary or eta = 7), Gauss-Legendre in cos(theta) and uniform
phi.  The kernel then reduces to pi^{-3/2} eta^2 exp(-eta^2).
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, QuadratureBudgetError, SpecError
from .fields import ScalarField

ETA_MAX = 7.0
SPLIT_TOL = 1e-10


@dataclass(frozen=True)
class QuadratureDomain:
    """Ball of radius ``R`` or shell ``r1 < |x| < r2`` centred at the origin."""

    R: Optional[float] = None
    r1: Optional[float] = None
    r2: Optional[float] = None
    n_r: int = 48
    n_theta: int = 24
    n_phi: int = 48
    n_time: int = 32

    def __post_init__(self):
        if self.R is None and (self.r1 is None or self.r2 is None):
            raise ValueError("give R for a ball or r1, r2 for a shell")
        for v in (self.R, self.r1, self.r2):
            if v is not None and not v > 0:
                raise ValueError("radii must be positive")
        if self.R is None and not self.r1 < self.r2:
            raise ValueError("shell needs r1 < r2")
        if min(self.n_r, self.n_theta, self.n_phi, self.n_time) < 2:
            raise ValueError("node counts must be at least 2")

    @classmethod
    def ball(cls, R, **budget):
        return cls(R=R, **budget)

    @classmethod
    def shell(cls, r1, r2, **budget):
        return cls(r1=r1, r2=r2, **budget)

    @property
    def outer(self):
        return self.R if self.R is not None else self.r2

    @property
    def inner(self):
        return 0.0 if self.R is not None else self.r1

    def budget(self):
        return self.n_time, self.n_r, self.n_theta, self.n_phi

    def interior(self, x):
        r = float(np.linalg.norm(x))
        return r < self.outer and (self.inner == 0.0 or r > self.inner)


def _ray_sphere(x, w, radius):
    """Roots s1 <= s2 of |x + s w| = radius for unit directions w (nan if none)."""
    b = w @ x
    c = x @ x - radius**2
    disc = b * b - c
    root = np.sqrt(np.where(disc >= 0, disc, np.nan))
    return -b - root, -b + root


def _segments(x, w, dom):
    """Ray parameter intervals [a, b] (up to two per direction) inside the domain."""
    _, out = _ray_sphere(x, w, dom.outer)
    if dom.inner <= 0:
        return [(np.zeros_like(out), out)]
    h1, h2 = _ray_sphere(x, w, dom.inner)
    hits = np.isfinite(h1) & (h1 > 0)
    first_end = np.where(hits, h1, out)
    second_start = np.where(hits, h2, out)
    return [(np.zeros_like(out), first_end), (second_start, out)]


def _psi_unit(p, x, t, dom, nu, budget=None):
    n_time, n_r, n_theta, n_phi = budget or dom.budget()
    u, wu = np.polynomial.legendre.leggauss(n_time)
    u = 0.5 * np.sqrt(t) * (u + 1)
    wu = 0.5 * np.sqrt(t) * wu
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    ph = 2 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1 - ct**2)
    W = np.stack([np.outer(st, np.cos(ph)), np.outer(st, np.sin(ph)), np.outer(ct, np.ones_like(ph))], -1)
    W = W.reshape(-1, 3)
    wang = np.repeat(wt, n_phi) * (2 * np.pi / n_phi)
    g, wg = np.polynomial.legendre.leggauss(n_r)
    total = 0.0
    for uk, wk in zip(u, wu):
        if uk == 0:
            continue
        scale = np.sqrt(4 * nu) * uk
        acc = 0.0
        for a, b in _segments(x, W, dom):
            ea = np.minimum(a / scale, ETA_MAX)
            eb = np.minimum(b / scale, ETA_MAX)
            half = 0.5 * (eb - ea)
            eta = 0.5 * (ea + eb)[:, None] + half[:, None] * g[None]
            pts = x + scale * eta[..., None] * W[:, None, :]
            vals = p.eval_cart(pts.reshape(-1, 3), t - uk**2).reshape(eta.shape)
            radial = np.sum(wg * eta**2 * np.exp(-eta**2) * vals, axis=1) * half
            acc = acc + np.sum(wang * radial)
        total += wk * 2 * uk * acc
    return -nu * np.pi**-1.5 * total


def psi_integral(p, point, t, dom, params, kernel="unit", tol=None):
    """Heat-kernel potential of pressure ``p`` at a Cartesian point.

    ``kernel="literal"`` uses exp(-r^2/4 nu s) / (nu^{1/2} (4 s)^{3/2})
    without the -nu prefactor, i.e. -pi^{3/2} times the unit-mass value; it
    is provided for comparison only and does not satisfy the heat identity.
    With ``tol`` set the result is compared against a half-budget run and
    :class:`QuadratureBudgetError` is raised if they differ by more.
    """
    if not t > 0:
        raise DomainError("psi_integral needs t > 0")
    x = np.asarray(point, float).reshape(3)
    if not dom.interior(x):
        raise DomainError("evaluation point must lie strictly inside the quadrature domain")
    if kernel not in ("unit", "literal"):
        raise ValueError(f"unknown kernel {kernel!r}")
    val = _psi_unit(p, x, t, dom, params.nu)
    if tol is not None:
        coarse = _psi_unit(p, x, t, dom, params.nu, tuple(max(1, n // 2) for n in dom.budget()))
        if abs(val - coarse) > tol:
            raise QuadratureBudgetError(
                f"budget estimate {abs(val - coarse):.3e} exceeds tolerance {tol:.1e}")
    if kernel == "literal":
        val = -np.pi**1.5 * val
    return float(val)


def psi_function(p, dom, params, kernel="unit"):
    """Vectorised ``fn(xyz, t)`` wrapper, convenient for finite differences."""
    def fn(X, T):
        X = np.atleast_2d(X)
        T = np.broadcast_to(np.asarray(T, float), X.shape[:1])
        return np.array([psi_integral(p, xi, ti, dom, params, kernel) for xi, ti in zip(X, T)])
    return fn


def probe_max(field, r_max=None, count=64, seed=0):
    """max |field| over a fixed pseudo-random probe set with r < r_max, t in [0, 1]."""
    if field.is_zero:
        return 0.0
    if r_max is None:
        r_max = field.domain_hint[1] if field.domain_hint else 2.0
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.1, r_max, count)
    th = np.arccos(rng.uniform(-1, 1, count))
    ph = rng.uniform(0, 2 * np.pi, count)
    t = rng.uniform(0, 1, count)
    return float(np.abs(field.eval(r, th, ph, t)).max())


def split_psi(psi, params, r_max=None):
    """Split psi = psi1 + psi2 with lap psi1 = 0 and heat_op(psi2) = 0.

    Requires lap heat_op(psi) = 0, checked on probe points with r < r_max.
    psi1 = -nu int_0^t heat_op(psi) ds.
    """
    prime = psi.heat_op(params)
    res = probe_max(prime.laplacian(), r_max)
    if res > SPLIT_TOL:
        raise SpecError(f"lap (lap - (1/nu) d/dt) psi has residual {res:.3e}", equation="7", residual=res)
    psi1 = (prime.time_integral() * (-params.nu)).simplify()
    psi2 = (psi - psi1).simplify()
    return psi1, psi2


def pressure_from_psi1(psi1, params):
    """p = -(1/nu) d psi1 / dt."""
    return (psi1.dt() * (-1.0 / params.nu)).simplify()
