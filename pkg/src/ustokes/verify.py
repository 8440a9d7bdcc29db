"""Residual engine for the unsteady Stokes equations and the vorticity test.

Every residual is sampled on a :class:`ShellGrid` twice when possible: along
the exact path (closed-form mode derivatives) and along the finite-difference
path, which is always available and acts as the independent oracle.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import PathDependenceError, UnsupportedOperation
from .fields import ScalarField, sph_to_cart
from .operators import (Gradient, Scaled, StencilSpec, Sum, as_function, evaluate, fd_curl,
                        fd_divergence, fd_dt, fd_gradient, fd_heat, fd_laplacian, is_exact,
                        sph_frame, vcurl, vdivergence, vdt, vheat, vlaplacian)

TOL_EXACT = 1e-8
TOL_FD = 1e-4
LOOP_RTOL = 1e-6
TOL_FD_NESTED = 1e-2
NESTED_STENCIL = StencilSpec(h=1e-2)
NESTED_INNER = StencilSpec(h=2e-3)


@dataclass
class ResidualEntry:
    name: str
    max_abs: float
    rms: float
    worst_point: Tuple[float, float, float]
    worst_time: float
    tol: float
    path: str

    @property
    def passed(self):
        return bool(self.max_abs < self.tol)

    def to_dict(self):
        return {"max": self.max_abs, "rms": self.rms, "tol": self.tol, "pass": self.passed,
                "path": self.path, "worst_point": list(self.worst_point),
                "worst_time": self.worst_time}


@dataclass
class ResidualReport:
    entries: Dict[str, ResidualEntry] = field(default_factory=dict)

    @property
    def passed(self):
        return all(e.passed for e in self.entries.values())

    def __getitem__(self, name):
        return self.entries[name]

    def __contains__(self, name):
        return name in self.entries

    def merge(self, other):
        self.entries.update(other.entries)
        return self

    def to_dict(self):
        return {"residuals": {k: e.to_dict() for k, e in self.entries.items()}, "pass": self.passed}

    def summary(self):
        lines = []
        for k, e in self.entries.items():
            flag = "PASS" if e.passed else "FAIL"
            lines.append(f"{flag} {k:<22s} max={e.max_abs:.6g} rms={e.rms:.6g} tol={e.tol:.3g}")
        return "\n".join(lines)


def _sample(name, fn, grid, tol, path):
    """Reduce pointwise magnitudes of fn(xyz, t) over grid points and times."""
    r, th, ph = grid.spherical_points()
    X = sph_to_cart(r, th, ph)
    vals, keys = [], []
    for t in grid.times:
        v = np.asarray(fn(X, t), float)
        if v.ndim == 2:
            v = np.linalg.norm(v, axis=-1)
        vals.append(np.abs(v))
        keys.append(np.full(v.shape, t))
    vals = np.concatenate(vals)
    ts = np.concatenate(keys)
    rr, tt, pp = (np.tile(a, len(grid.times)) for a in (r, th, ph))
    mx = float(vals.max())
    ties = np.flatnonzero(vals == mx)
    order = np.lexsort((ts[ties], pp[ties], tt[ties], rr[ties]))
    i = ties[order[0]]
    rms = float(np.sqrt(np.mean(vals**2)))
    return ResidualEntry(name, mx, rms, (float(rr[i]), float(tt[i]), float(pp[i])), float(ts[i]), tol, path)


def _pressure_fn(p):
    if p is None:
        return None
    if isinstance(p, (int, float)):
        return None
    return as_function(p)


def _force_fn(f):
    if f is None:
        return lambda X, T: np.zeros(X.shape)
    return as_function(f)


def momentum_residual(V, p, f, grid, params, tol_exact=TOL_EXACT, tol_fd=TOL_FD):
    """rho dV/dt + grad p - mu lap V - f."""
    rep = ResidualReport()
    rho, mu = params.rho, params.mu
    p_exact = p is None or isinstance(p, (int, float, ScalarField))
    if is_exact(V) and (f is None or is_exact(f)) and p_exact:
        terms = [Scaled(rho, vdt(V)), Scaled(-mu, vlaplacian(V))]
        if isinstance(p, ScalarField):
            terms.append(Gradient(p))
        if f is not None:
            terms.append(Scaled(-1.0, f))
        tree = Sum(tuple(terms))
        rep.entries["momentum"] = _sample("momentum", lambda X, t: evaluate(tree, X, t), grid, tol_exact, "exact")
    pf = _pressure_fn(p)
    ff = _force_fn(f)

    def fd(X, t):
        out = rho * fd_dt(V, X, t) - mu * fd_laplacian(V, X, t) - ff(X, np.broadcast_to(t, X.shape[:1]))
        if pf is not None:
            out = out + fd_gradient(pf, X, t)
        return out

    rep.entries["momentum_fd"] = _sample("momentum_fd", fd, grid, tol_fd, "fd")
    return rep


def continuity_residual(V, grid, tol_exact=TOL_EXACT, tol_fd=TOL_FD):
    rep = ResidualReport()
    if is_exact(V):
        div = vdivergence(V)
        rep.entries["continuity"] = _sample("continuity", lambda X, t: div.eval_cart(X, t), grid, tol_exact, "exact")
    rep.entries["continuity_fd"] = _sample("continuity_fd", lambda X, t: fd_divergence(V, X, t), grid, tol_fd, "fd")
    return rep


def _richardson(op, h):
    """(16 D(h/2) - D(h)) / 15 for a 4th-order stencil operator D."""
    coarse = op(StencilSpec(h=h))
    fine = op(StencilSpec(h=0.5 * h))
    return (16.0 * fine - coarse) / 15.0


def biharmonic_heat_residual(V, grid, params, tol_exact=TOL_EXACT, tol_nested=TOL_FD_NESTED):
    """lap (lap - (1/nu) d/dt) V.

    The FD path nests an inner h = 2e-3 stencil inside a Richardson-extrapolated
    outer Laplacian (h = 2e-2, 1e-2).  Round-off in a nested fourth derivative
    limits it to about 1e-3, hence its own tolerance.
    """
    rep = ResidualReport()
    if is_exact(V):
        tree = vlaplacian(vheat(V, params))
        rep.entries["biharmonic_heat"] = _sample(
            "biharmonic_heat", lambda X, t: evaluate(tree, X, t), grid, tol_exact, "exact")
    inner = lambda X, T: fd_heat(V, params, X, T, NESTED_INNER)  # noqa: E731
    fd = lambda X, t: _richardson(lambda S: fd_laplacian(inner, X, t, S), 2 * NESTED_STENCIL.h)  # noqa: E731
    rep.entries["biharmonic_heat_fd"] = _sample("biharmonic_heat_fd", fd, grid, tol_nested, "fd")
    return rep


def condition_residual(V, grid, params, tol_exact=TOL_EXACT, tol_fd=TOL_FD):
    """(lap - (1/nu) d/dt) curl V: zero iff V is a possible Stokes velocity."""
    rep = ResidualReport()
    if is_exact(V):
        tree = vheat(vcurl(V), params)
        rep.entries["condition"] = _sample("condition", lambda X, t: evaluate(tree, X, t), grid, tol_exact, "exact")
    vort = lambda X, T: fd_curl(V, X, T)  # noqa: E731
    fd = lambda X, t: _richardson(lambda S: fd_heat(vort, params, X, t, S), NESTED_STENCIL.h)  # noqa: E731
    rep.entries["condition_fd"] = _sample("condition_fd", fd, grid, tol_fd, "fd")
    return rep


def verify_flow(solution, f=None, grid=None, params=None, tol_exact=TOL_EXACT, tol_fd=TOL_FD,
                tol_nested=TOL_FD_NESTED):
    """All applicable residuals for a FlowSolution (or any object with
    ``velocity``, ``pressure`` and ``params``)."""
    params = params or solution.params
    f = f if f is not None else getattr(solution, "body_force", None)
    V = solution.velocity
    rep = momentum_residual(V, solution.pressure, f, grid, params, tol_exact, tol_fd)
    rep.merge(continuity_residual(V, grid, tol_exact, tol_fd))
    if f is None:
        rep.merge(biharmonic_heat_residual(V, grid, params, tol_exact, tol_nested))
        rep.merge(condition_residual(V, grid, params, tol_exact, tol_fd))
    return rep


# ------------------------------------------------------------ pressure recovery

@dataclass
class PressureRecovery:
    """Pressure samples on the grid, normalized to zero at the base point.

    ``values[k]`` holds the samples at ``grid.times[k]`` in the order of
    ``grid.spherical_points()``.
    """
    grid: object
    base_point: Tuple[float, float, float]
    values: np.ndarray
    loop_integrals: Tuple[float, ...]
    spread: float

    def at_time(self, k):
        return self.values[k]


def _candidate_gradient(V, params):
    mu = params.mu
    if is_exact(V):
        tree = Scaled(mu, vheat(V, params))
        return lambda X, T: evaluate(tree, X, T)
    return lambda X, T: mu * fd_heat(V, params, X, T)


def _line_integral(G, t, rs, ths, phs, drs, dths, dphs, weights):
    """sum_k w_k G(c(s_k)) . c'(s_k) with c in spherical coordinates.

    Arrays are (targets, nodes).
    """
    X = sph_to_cart(rs, ths, phs)
    rh, thh, phh = sph_frame(ths, phs)
    tangent = (drs[..., None] * rh + (rs * dths)[..., None] * thh
               + (rs * np.sin(ths) * dphs)[..., None] * phh)
    g = np.asarray(G(X.reshape(-1, 3), np.full(X.size // 3, t)), float).reshape(X.shape)
    return np.sum(np.sum(g * tangent, axis=-1) * weights, axis=-1)


def _wrap(dphi):
    return (dphi + np.pi) % (2.0 * np.pi) - np.pi


def _staircase(G, t, start, end, order, s, w):
    """Legs along one spherical coordinate at a time, in the given order."""
    cur = [np.broadcast_to(np.asarray(c, float), end[0].shape).copy() for c in start]
    total = np.zeros(end[0].shape)
    for axis in order:
        delta = end[axis] - cur[axis]
        if axis == 2:
            delta = _wrap(delta)
        coords = [np.repeat(c[:, None], len(s), axis=1) for c in cur]
        coords[axis] = cur[axis][:, None] + delta[:, None] * s[None, :]
        der = [np.zeros_like(coords[0]) for _ in range(3)]
        der[axis] = np.repeat(delta[:, None], len(s), axis=1)
        total += _line_integral(G, t, *coords, *der, w[None, :])
        cur[axis] = cur[axis] + delta
    return total


def _bumped(G, t, start, end, s, w, amp_theta, amp_phi):
    r0, th0, ph0 = (np.asarray(c, float) for c in start)
    dr = (end[0] - r0)[:, None]
    dth = (end[1] - th0)[:, None]
    dph = _wrap(end[2] - ph0)[:, None]
    S = s[None, :]
    thl = th0 + dth * S
    bump = np.sin(np.pi * S)
    rs = r0 + dr * S
    ths = thl + amp_theta * bump * np.sin(thl)
    phs = ph0 + dph * S + amp_phi * bump
    drs = np.broadcast_to(dr, rs.shape)
    dths = dth + amp_theta * (np.pi * np.cos(np.pi * S) * np.sin(thl) + bump * np.cos(thl) * dth)
    dphs = dph + amp_phi * np.pi * np.cos(np.pi * S)
    return _line_integral(G, t, rs, ths, phs, drs, dths, dphs, w[None, :])


def loop_integral(G, t, radius, n=256):
    """Counter-clockwise circulation of G around a circle in the z = 0 plane."""
    s = 2.0 * np.pi * np.arange(n) / n
    X = np.stack([radius * np.cos(s), radius * np.sin(s), np.zeros(n)], axis=-1)
    dl = np.stack([-radius * np.sin(s), radius * np.cos(s), np.zeros(n)], axis=-1)
    g = np.asarray(G(X, np.full(n, t)), float)
    return float(np.sum(g * dl) * 2.0 * np.pi / n)


def recover_pressure(V, grid, params, base_point=None, n_quad=32, seed=0, loop_tol=None):
    """Integrate grad p = mu (lap - (1/nu) d/dt) V from ``base_point``.

    Three paths per target (two coordinate staircases and one smooth seeded
    path) must agree, and the circulation around a circle in the z = 0 plane
    must vanish; otherwise :class:`PathDependenceError` is raised.
    """
    G = _candidate_gradient(V, params)
    r, th, ph = grid.spherical_points()
    if base_point is None:
        base_point = (r[0], th[0], ph[0])
    base_point = tuple(float(c) for c in base_point)
    X = sph_to_cart(r, th, ph)
    scale = max(float(np.abs(evaluate(V, X, t)).max()) for t in grid.times)
    tol = loop_tol if loop_tol is not None else LOOP_RTOL * params.mu * max(scale, 1.0)
    radius = 1.0 if grid.r1 <= 1.0 <= grid.r2 else 0.5 * (grid.r1 + grid.r2)
    x, w = np.polynomial.legendre.leggauss(n_quad)
    s, w = 0.5 * (x + 1.0), 0.5 * w
    x2, w2 = np.polynomial.legendre.leggauss(2 * n_quad)
    s2, w2 = 0.5 * (x2 + 1.0), 0.5 * w2
    rng = np.random.default_rng(seed)
    amp_theta, amp_phi = rng.uniform(0.05, 0.2), rng.uniform(0.1, 0.5)
    end = (r, th, ph)
    values, loops, spread = [], [], 0.0
    for t in grid.times:
        loop = loop_integral(G, t, radius)
        loops.append(loop)
        if abs(loop) > tol:
            raise PathDependenceError(
                f"grad p candidate has circulation {loop:.10g} at t={t}; V is not a Stokes velocity",
                loop_integral=loop, time=t)
        pa = _staircase(G, t, base_point, end, (0, 1, 2), s, w)
        pb = _staircase(G, t, base_point, end, (2, 1, 0), s, w)
        pc = _bumped(G, t, base_point, end, s2, w2, amp_theta, amp_phi)
        gap = float(max(np.abs(pa - pb).max(), np.abs(pa - pc).max()))
        spread = max(spread, gap)
        if gap > tol:
            raise PathDependenceError(f"path integrals disagree by {gap:.3e} at t={t}",
                                      loop_integral=loop, time=t, spread=gap)
        values.append((pa + pb + pc) / 3.0)
    return PressureRecovery(grid, base_point, np.array(values), tuple(loops), spread)
