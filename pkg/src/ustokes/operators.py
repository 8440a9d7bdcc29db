"""Vector fields built from scalar generators, and differential operators.

Vector fields are small expression trees over :class:`ScalarField` leaves:

* ``Gradient(S)``      grad S
* ``CurlR(S)``         curl(r S)          (toroidal)
* ``CurlCurlR(S)``     curl curl(r S)     (poloidal)
* ``RadialTimes(S)``   r S                (position vector times S)
* ``GradDr(S)``        grad d/dr(r S)
* ``Sum``, ``Scaled`` and ``Sampled`` (a black-box evaluator).

Trees without ``Sampled`` leaves are *exact*: they are evaluated from
closed-form mode derivatives and support exact Laplacian, curl, time
derivative and divergence.  Finite-difference operators work on anything
evaluable, in Cartesian components, and serve as the independent oracle.
"""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DomainError, UnsupportedOperation
from .fields import ScalarField, cart_to_sph, sph_to_cart
from .special import angular_table, lm_index


class VectorField:
    def __add__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return Sum((self, other))

    def __mul__(self, a):
        return Scaled(float(a), self)

    __rmul__ = __mul__

    def __neg__(self):
        return Scaled(-1.0, self)

    def __sub__(self, other):
        return Sum((self, -other))

    def __call__(self, xyz, t=0.0):
        return evaluate(self, xyz, t)


@dataclass(frozen=True, eq=False)
class Gradient(VectorField):
    scalar: ScalarField


@dataclass(frozen=True, eq=False)
class CurlR(VectorField):
    scalar: ScalarField


@dataclass(frozen=True, eq=False)
class CurlCurlR(VectorField):
    scalar: ScalarField


@dataclass(frozen=True, eq=False)
class RadialTimes(VectorField):
    scalar: ScalarField


@dataclass(frozen=True, eq=False)
class GradDr(VectorField):
    scalar: ScalarField


@dataclass(frozen=True, eq=False)
class Sum(VectorField):
    terms: Tuple[VectorField, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True, eq=False)
class Scaled(VectorField):
    factor: float
    inner: VectorField


@dataclass(frozen=True, eq=False)
class Sampled(VectorField):
    """Black-box field: ``fn(xyz[N, 3], t[N]) -> [N, 3]`` Cartesian."""

    fn: Callable
    label: str = "sampled"
    tabulated: Optional[object] = None


ZERO_VECTOR = Sum(())
_LEAVES = (Gradient, CurlR, CurlCurlR, RadialTimes, GradDr)


def _flatten(v, scale=1.0, leaves=None, sampled=None):
    if leaves is None:
        leaves, sampled = [], []
    if isinstance(v, _LEAVES):
        if v.scalar.modes:
            leaves.append((type(v), v.scalar, scale))
    elif isinstance(v, Sum):
        for term in v.terms:
            _flatten(term, scale, leaves, sampled)
    elif isinstance(v, Scaled):
        _flatten(v.inner, scale * v.factor, leaves, sampled)
    elif isinstance(v, Sampled):
        sampled.append((v, scale))
    else:
        raise TypeError(f"not a vector field: {v!r}")
    return leaves, sampled


def is_exact(v):
    return not _flatten(v)[1]


def tabulated_source(v):
    """The tabulated sample set behind a bare Sampled field, if any."""
    return v.tabulated if isinstance(v, Sampled) else None


def _as_time(t, shape):
    return np.broadcast_to(np.asarray(t, float), shape).astype(float)


def evaluate_sph(v, r, theta, phi, t=0.0):
    """Spherical components (V_r, V_theta, V_phi) of an exact tree."""
    r, theta, phi, t = np.broadcast_arrays(*(np.asarray(a, float) for a in (r, theta, phi, t)))
    leaves, sampled = _flatten(v)
    if sampled:
        raise UnsupportedOperation("spherical evaluation of Sampled fields goes through evaluate()")
    out = np.zeros((3,) + r.shape)
    if not leaves:
        return out
    lmax = max(S.lmax for _, S, _ in leaves)
    Y, Yt, Yp = angular_table(lmax, theta, phi)
    needs_r = any(kind is not RadialTimes for kind, _, _ in leaves)
    if needs_r and np.any(r == 0):
        raise DomainError("vector fields are evaluated off the origin")
    for kind, S, scale in leaves:
        nder = 2 if kind is GradDr else 1
        for md, R, _ in S.iter_radial(r, t, nder):
            i = lm_index(md.n, md.index.m)
            y, yt, yp = Y[i], Yt[i], Yp[i]
            if kind is Gradient:
                over = R[0] / r
                comps = (R[1] * y, over * yt, over * yp)
            elif kind is CurlR:
                comps = (0.0, R[0] * yp, -R[0] * yt)
            elif kind is CurlCurlR:
                tang = R[0] / r + R[1]
                comps = (md.n * (md.n + 1.0) * R[0] / r * y, tang * yt, tang * yp)
            elif kind is RadialTimes:
                comps = (r * R[0] * y, 0.0, 0.0)
            else:
                tang = R[0] / r + R[1]
                comps = ((2.0 * R[1] + r * R[2]) * y, tang * yt, tang * yp)
            for k in range(3):
                out[k] += scale * comps[k]
    return out


def sph_frame(theta, phi):
    """Unit vectors r-hat, theta-hat, phi-hat in Cartesian components."""
    st, ct = np.sin(theta), np.cos(theta)
    sp_, cp = np.sin(phi), np.cos(phi)
    rh = np.stack([st * cp, st * sp_, ct], axis=-1)
    th = np.stack([ct * cp, ct * sp_, -st], axis=-1)
    ph = np.stack([-sp_, cp, np.zeros_like(st)], axis=-1)
    return rh, th, ph


def evaluate(v, xyz, t=0.0):
    """Cartesian components of ``v`` at Cartesian points ``xyz[..., 3]``."""
    xyz = np.asarray(xyz, float)
    shape = xyz.shape[:-1]
    t = _as_time(t, shape)
    leaves, sampled = _flatten(v)
    out = np.zeros(shape + (3,))
    if leaves:
        r, th, ph = cart_to_sph(xyz)
        Vr, Vt, Vp = evaluate_sph(Sum(tuple(_rebuild(k, S, s) for k, S, s in leaves)), r, th, ph, t)
        rh, thh, phh = sph_frame(th, ph)
        out += Vr[..., None] * rh + Vt[..., None] * thh + Vp[..., None] * phh
    for s, scale in sampled:
        flat = s.fn(xyz.reshape(-1, 3), t.reshape(-1))
        out += scale * np.asarray(flat, float).reshape(shape + (3,))
    return out


def evaluate_at(v, r, theta, phi, t=0.0):
    """Cartesian components at spherical points (works for any tree)."""
    return evaluate(v, sph_to_cart(r, theta, phi), t)


def _rebuild(kind, S, scale):
    return Scaled(scale, kind(S))


def radial_flux(v, r, theta, phi, t=0.0):
    """r . V, i.e. |r| times the radial component."""
    r, theta, phi = np.broadcast_arrays(*(np.asarray(a, float) for a in (r, theta, phi)))
    V = evaluate_at(v, r, theta, phi, t)
    rh, _, _ = sph_frame(theta, phi)
    return r * np.sum(V * rh, axis=-1)


# --------------------------------------------------------- exact tree algebra

def _map_leaves(v, fn):
    leaves, sampled = _flatten(v)
    if sampled:
        raise UnsupportedOperation("exact operators need a mode-based field")
    terms = []
    for kind, S, scale in leaves:
        res = fn(kind, S)
        if res is not None:
            terms.append(Scaled(scale, res))
    return Sum(tuple(terms))


def vdt(v):
    return _map_leaves(v, lambda kind, S: kind(S.dt()))


def vlaplacian(v):
    def lap(kind, S):
        L = S.laplacian()
        if kind is RadialTimes:
            return Sum((RadialTimes(L), Gradient(S * 2.0)))
        if kind is GradDr:
            return Sum((GradDr(L), Gradient(L * 2.0)))
        return kind(L)
    return _map_leaves(v, lap)


def vcurl(v):
    def curl(kind, S):
        if kind is CurlR:
            return CurlCurlR(S)
        if kind is CurlCurlR:
            return CurlR(-S.laplacian())
        if kind is RadialTimes:
            return CurlR(S)
        return None
    return _map_leaves(v, curl)


def vdivergence(v):
    """Exact divergence as a ScalarField."""
    leaves, sampled = _flatten(v)
    if sampled:
        raise UnsupportedOperation("exact divergence needs a mode-based field")
    out = ScalarField()
    for kind, S, scale in leaves:
        if kind is Gradient:
            out = out + S.laplacian() * scale
        elif kind is RadialTimes:
            out = out + (S * 3.0 + S.r_dr()) * scale
        elif kind is GradDr:
            L = S.laplacian()
            out = out + (L * 3.0 + L.r_dr()) * scale
    return out.simplify()


def vheat(v, params):
    """(lap - (1/nu) d/dt) v, exact."""
    return vlaplacian(v) - vdt(v) * (1.0 / params.nu)


def vtime_integral(v):
    return _map_leaves(v, lambda kind, S: kind(S.time_integral()))


def transverse_L(field):
    """Angular part of the Laplacian times r^2: eigenvalue -n(n+1)."""
    return field.transverse_L()


# ------------------------------------------------------------- body forces

def body_force(chi, P, T):
    """f = grad chi + curl curl(r P) + curl(r T)."""
    return Sum((Gradient(chi), CurlCurlR(P), CurlR(T)))


def body_force_expanded(chi, P, T):
    """Same force written as grad chi + grad(P + r dP/dr) - r lap P + curl(r T)."""
    return Sum((Gradient(chi), GradDr(P), Scaled(-1.0, RadialTimes(P.laplacian())), CurlR(T)))


# ------------------------------------------------------- finite differences

@dataclass(frozen=True)
class StencilSpec:
    h: float = 1e-3
    order: int = 4

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("stencil step must be positive")
        if self.order not in (2, 4):
            raise ValueError("stencil order must be 2 or 4")


DEFAULT_STENCIL = StencilSpec()
_D1 = {2: ((-1, -0.5), (1, 0.5)), 4: ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))}
_D2 = {2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
       4: ((-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12))}


def as_function(obj):
    """Callable ``fn(xyz, t)`` for vector fields, scalar fields and callables."""
    if isinstance(obj, VectorField):
        return lambda X, T: evaluate(obj, X, T)
    if isinstance(obj, ScalarField):
        return lambda X, T: obj.eval_cart(X, T)
    return obj


def _step(xyz, stencil):
    return stencil.h * np.maximum(1.0, np.linalg.norm(xyz, axis=-1))


def _space_diff(fn, xyz, t, axis, weights, h, power):
    """sum_k w_k f(x + o_k h e_axis) / h^power, batched in one call."""
    n = xyz.shape[0]
    offs = [o for o, _ in weights]
    pts = np.repeat(xyz[None], len(offs), axis=0)
    for k, o in enumerate(offs):
        pts[k, :, axis] += o * h
    vals = np.asarray(fn(pts.reshape(-1, 3), np.tile(t, len(offs))), float)
    vals = vals.reshape((len(offs), n) + vals.shape[1:])
    acc = sum(w * vals[k] for k, (_, w) in enumerate(weights))
    hp = h**power
    return acc / (hp[:, None] if acc.ndim == 2 else hp)


def _prep(xyz, t):
    xyz = np.atleast_2d(np.asarray(xyz, float))
    t = _as_time(t, xyz.shape[:1])
    return xyz, t


def fd_gradient(f, xyz, t=0.0, stencil=DEFAULT_STENCIL):
    fn = as_function(f)
    xyz, t = _prep(xyz, t)
    h = _step(xyz, stencil)
    return np.stack([_space_diff(fn, xyz, t, a, _D1[stencil.order], h, 1) for a in range(3)], axis=-1)


def fd_jacobian(v, xyz, t=0.0, stencil=DEFAULT_STENCIL):
    """J[..., i, j] = d v_i / d x_j."""
    fn = as_function(v)
    xyz, t = _prep(xyz, t)
    h = _step(xyz, stencil)
    cols = [_space_diff(fn, xyz, t, a, _D1[stencil.order], h, 1) for a in range(3)]
    return np.stack(cols, axis=-1)


def fd_divergence(v, xyz, t=0.0, stencil=DEFAULT_STENCIL):
    J = fd_jacobian(v, xyz, t, stencil)
    return J[:, 0, 0] + J[:, 1, 1] + J[:, 2, 2]


def fd_curl(v, xyz, t=0.0, stencil=DEFAULT_STENCIL):
    J = fd_jacobian(v, xyz, t, stencil)
    return np.stack([J[:, 2, 1] - J[:, 1, 2], J[:, 0, 2] - J[:, 2, 0], J[:, 1, 0] - J[:, 0, 1]], axis=-1)


def fd_laplacian(f, xyz, t=0.0, stencil=DEFAULT_STENCIL):
    """Laplacian of a scalar or (component-wise) vector field."""
    fn = as_function(f)
    xyz, t = _prep(xyz, t)
    h = _step(xyz, stencil)
    return sum(_space_diff(fn, xyz, t, a, _D2[stencil.order], h, 2) for a in range(3))


fd_vector_laplacian = fd_laplacian


def fd_dt(f, xyz, t=0.0, stencil=None):
    """Time derivative; default step 1e-4 * max(1, |t|)."""
    fn = as_function(f)
    xyz, t = _prep(xyz, t)
    order = stencil.order if stencil else 4
    base = stencil.h if stencil else 1e-4
    ht = base * np.maximum(1.0, np.abs(t))
    weights = _D1[order]
    n = xyz.shape[0]
    pts = np.tile(xyz, (len(weights), 1))
    ts = np.concatenate([t + o * ht for o, _ in weights])
    vals = np.asarray(fn(pts, ts), float)
    vals = vals.reshape((len(weights), n) + vals.shape[1:])
    acc = sum(w * vals[k] for k, (_, w) in enumerate(weights))
    return acc / (ht[:, None] if acc.ndim == 2 else ht)


def fd_heat(f, params, xyz, t=0.0, stencil=DEFAULT_STENCIL, time_stencil=None):
    """(lap - (1/nu) d/dt) f by finite differences."""
    return fd_laplacian(f, xyz, t, stencil) - fd_dt(f, xyz, t, time_stencil) / params.nu
