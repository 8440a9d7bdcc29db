"""Separable scalar fields with exact derivatives.

A :class:`ScalarField` is a finite sum of modes

    coeff * R(r) * Y_n^m(theta, phi) * T(t)

where the radial profile ``R`` is one of the kinds below and ``T`` is a
constant, an exponential or a monomial in time.  Laplacian, time derivative,
time integral and the transverse operator all map modes back to modes, so
residuals of the governing equations can be formed exactly.
"""
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple, Union

import numpy as np

from .errors import DomainError, InvalidIndex, ResonanceError, UnsupportedOperation
from .special import angular_table, check_index, lm_index, spherical_bessel

# Relative size below which a merged coefficient counts as exact cancellation.
CANCEL_RTOL = 1e-13


@dataclass(frozen=True)
class FluidParams:
    nu: float
    mu: float
    rho: float

    def __post_init__(self):
        for name in ("nu", "mu", "rho"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if abs(self.rho * self.nu - self.mu) > 1e-12 * self.mu:
            raise ValueError("inconsistent fluid parameters: rho * nu != mu")

    @classmethod
    def from_nu_mu(cls, nu, mu):
        return cls(nu=float(nu), mu=float(mu), rho=float(mu) / float(nu))


@dataclass(frozen=True)
class SphIndex:
    n: int
    m: int

    def __post_init__(self):
        check_index(self.n, self.m)


# ---------------------------------------------------------------- radial kinds

def _monomial(r, p, d):
    """d-th derivative of r**p."""
    c = 1.0
    for j in range(d):
        c *= p - j
    if c == 0.0:
        return np.zeros_like(r)
    return c * r ** (p - d)


@dataclass(frozen=True)
class SolidGrowing:
    singular = False

    def powers(self, n):
        return {n: 1.0}

    def values(self, n, r, nderiv):
        return [_monomial(r, n, d) for d in range(nderiv + 1)]


@dataclass(frozen=True)
class SolidDecaying:
    singular = True

    def powers(self, n):
        return {-n - 1: 1.0}

    def values(self, n, r, nderiv):
        return [_monomial(r, -n - 1, d) for d in range(nderiv + 1)]


@dataclass(frozen=True)
class _Bessel:
    lam: float
    letter = ""
    eig_sign = 0.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    @property
    def eigenvalue(self):
        """kappa in  lap(R Y) = kappa R Y."""
        return self.eig_sign * self.lam**2

    def values(self, n, r, nderiv):
        x = self.lam * r
        out = [spherical_bessel(self.letter, n, x)]
        if nderiv >= 1:
            out.append(self.lam * spherical_bessel(self.letter, n, x, derivative=True))
        if nderiv >= 2:
            R, dR = out[0], out[1]
            out.append(self.eigenvalue * R - 2.0 * dR / r + n * (n + 1) * R / r**2)
        return out


@dataclass(frozen=True)
class BesselJ(_Bessel):
    letter = "j"
    eig_sign = -1.0
    singular = False


@dataclass(frozen=True)
class BesselY(_Bessel):
    letter = "y"
    eig_sign = -1.0
    singular = True


@dataclass(frozen=True)
class ModifiedI(_Bessel):
    letter = "i"
    eig_sign = 1.0
    singular = False


@dataclass(frozen=True)
class ModifiedK(_Bessel):
    letter = "k"
    eig_sign = 1.0
    singular = True


@dataclass(frozen=True)
class PowerSeries:
    """sum_k coeffs[k] * r**(base + 2k)."""

    base: int
    coeffs: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValueError("PowerSeries needs at least one coefficient")
        if self.coeffs[-1] == 0.0:
            raise ValueError("trailing PowerSeries coefficient must be nonzero")

    @property
    def singular(self):
        return self.base < 0

    def powers(self, n):
        return {self.base + 2 * k: c for k, c in enumerate(self.coeffs) if c != 0.0}

    def values(self, n, r, nderiv):
        out = []
        for d in range(nderiv + 1):
            acc = np.zeros_like(r)
            for k, c in enumerate(self.coeffs):
                if c != 0.0:
                    acc = acc + c * _monomial(r, self.base + 2 * k, d)
            out.append(acc)
        return out


RadialKind = Union[SolidGrowing, SolidDecaying, BesselJ, BesselY, ModifiedI, ModifiedK, PowerSeries]
BESSEL_KINDS = (BesselJ, BesselY, ModifiedI, ModifiedK)
POWER_KINDS = (SolidGrowing, SolidDecaying, PowerSeries)


# ------------------------------------------------------------------ time kinds

@dataclass(frozen=True)
class Constant:
    def values(self, t):
        return np.ones_like(t)

    key = ("c",)


@dataclass(frozen=True)
class Exp:
    sigma: float

    def values(self, t):
        return np.exp(self.sigma * t)

    @property
    def key(self):
        return ("e", self.sigma)


@dataclass(frozen=True)
class Poly:
    degree: int

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError("Poly degree must be an integer >= 1")

    def values(self, t):
        return t**self.degree

    @property
    def key(self):
        return ("p", self.degree)


TimeKind = Union[Constant, Exp, Poly]


def time_kind(kind):
    """Normalize Exp(0) and Poly(0) to Constant."""
    if isinstance(kind, Exp) and kind.sigma == 0.0:
        return Constant()
    return kind


def poly_time(k):
    return Constant() if k == 0 else Poly(k)


def _time_from_key(key):
    if key[0] == "c":
        return Constant()
    if key[0] == "e":
        return Exp(key[1])
    return Poly(key[1])


# ----------------------------------------------------------------------- modes

@dataclass(frozen=True)
class ScalarMode:
    index: SphIndex
    radial: RadialKind
    time: TimeKind = field(default_factory=Constant)
    coeff: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "time", time_kind(self.time))
        object.__setattr__(self, "coeff", float(self.coeff))

    @property
    def n(self):
        return self.index.n

    @property
    def is_harmonic(self):
        return isinstance(self.radial, (SolidGrowing, SolidDecaying))

    def is_heat_type(self, nu, rtol=1e-12):
        if self.is_harmonic:
            return isinstance(self.time, Constant)
        if isinstance(self.radial, BESSEL_KINDS) and isinstance(self.time, Exp):
            target = nu * self.radial.eigenvalue
            return abs(self.time.sigma - target) <= rtol * abs(target)
        return False

    def scaled(self, a):
        return replace(self, coeff=self.coeff * a)


def mode(n, m, radial=None, time=None, coeff=1.0):
    """Shorthand constructor: ``mode(1, 0, SolidGrowing())``."""
    return ScalarMode(SphIndex(n, m), radial or SolidGrowing(), time or Constant(), coeff)


def _power_modes(idx, time, coeff, powers):
    """Rebuild power-type modes from {power: value}, split by parity."""
    out = []
    n = idx.n
    for parity in (0, 1):
        ps = sorted(p for p, v in powers.items() if p % 2 == parity and v != 0.0)
        if not ps:
            continue
        if len(ps) == 1 and ps[0] == n:
            out.append(ScalarMode(idx, SolidGrowing(), time, coeff * powers[n]))
        elif len(ps) == 1 and ps[0] == -n - 1:
            out.append(ScalarMode(idx, SolidDecaying(), time, coeff * powers[-n - 1]))
        else:
            base = ps[0]
            cs = [powers.get(p, 0.0) * coeff for p in range(base, ps[-1] + 1, 2)]
            out.append(ScalarMode(idx, PowerSeries(base, tuple(cs)), time, 1.0))
    return out


def _radial_q(n, p):
    """lap(r**p Y_n) = q * r**(p-2) Y_n."""
    return (p - n) * (p + n + 1)


# ---------------------------------------------------------------------- fields

@dataclass(frozen=True)
class ScalarField:
    modes: Tuple[ScalarMode, ...] = ()
    domain_hint: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))

    # algebra
    def _with(self, modes):
        return ScalarField(tuple(modes), self.domain_hint)

    def __add__(self, other):
        if not isinstance(other, ScalarField):
            return NotImplemented
        return ScalarField(self.modes + other.modes, self.domain_hint or other.domain_hint)

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, a):
        return self._with(md.scaled(float(a)) for md in self.modes)

    __rmul__ = __mul__

    def __len__(self):
        return len(self.modes)

    @property
    def is_zero(self):
        return not self.simplify().modes

    @property
    def lmax(self):
        return max((md.n for md in self.modes), default=0)

    @property
    def is_harmonic(self):
        return all(md.is_harmonic for md in self.simplify().modes)

    def is_heat_type(self, nu):
        return all(md.is_heat_type(nu) for md in self.simplify().modes)

    # evaluation
    def eval(self, r, theta, phi, t=0.0):
        """Field value at spherical points; all arguments broadcast."""
        r, theta, phi, t = np.broadcast_arrays(*(np.asarray(a, float) for a in (r, theta, phi, t)))
        out = np.zeros(r.shape)
        if not self.modes:
            return out
        Y, _, _ = angular_table(self.lmax, theta, phi)
        for md, R, _ in self.iter_radial(r, t, 0):
            out += R[0] * Y[lm_index(md.n, md.index.m)]
        return out

    def eval_cart(self, xyz, t=0.0):
        r, th, ph = cart_to_sph(xyz)
        return self.eval(r, th, ph, t)

    def __call__(self, r, theta, phi, t=0.0):
        return self.eval(r, theta, phi, t)

    def iter_radial(self, r, t, nderiv):
        """Yield (mode, [coeff*T*R, coeff*T*R', ...], coeff*T) per mode."""
        for md in self.modes:
            if md.radial.singular and np.any(r == 0):
                raise DomainError("singular radial kind evaluated at r = 0")
            amp = md.coeff * md.time.values(t)
            with np.errstate(divide="ignore", invalid="ignore"):
                Rs = md.radial.values(md.n, r, nderiv)
            yield md, [amp * R for R in Rs], amp

    def projection(self, n, m, r, t=0.0):
        """Angular coefficient of index (n, m) at radius r and time t."""
        r, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(t, float))
        out = np.zeros(r.shape)
        for md, R, _ in self.iter_radial(r, t, 0):
            if md.index.n == n and md.index.m == m:
                out += R[0]
        return out

    # exact operators
    def laplacian(self):
        out = []
        for md in self.modes:
            rad = md.radial
            if isinstance(rad, BESSEL_KINDS):
                out.append(md.scaled(rad.eigenvalue))
            elif isinstance(rad, POWER_KINDS):
                pw = {p - 2: v * _radial_q(md.n, p) for p, v in rad.powers(md.n).items()}
                out.extend(_power_modes(md.index, md.time, md.coeff, pw))
        return self._with(out).simplify()

    def dt(self):
        out = []
        for md in self.modes:
            tm = md.time
            if isinstance(tm, Exp):
                out.append(md.scaled(tm.sigma))
            elif isinstance(tm, Poly):
                out.append(replace(md, time=poly_time(tm.degree - 1), coeff=md.coeff * tm.degree))
        return self._with(out).simplify()

    def time_integral(self):
        """Antiderivative in t vanishing at t = 0."""
        out = []
        for md in self.modes:
            tm = md.time
            if isinstance(tm, Constant):
                out.append(replace(md, time=Poly(1)))
            elif isinstance(tm, Poly):
                out.append(replace(md, time=Poly(tm.degree + 1), coeff=md.coeff / (tm.degree + 1)))
            else:
                out.append(md.scaled(1.0 / tm.sigma))
                out.append(replace(md, time=Constant(), coeff=-md.coeff / tm.sigma))
        return self._with(out).simplify()

    def heat_op(self, params):
        """(lap - (1/nu) d/dt) applied mode by mode."""
        return (self.laplacian() - self.dt() * (1.0 / params.nu)).simplify()

    def transverse_L(self):
        return self._with(md.scaled(-md.n * (md.n + 1.0)) for md in self.modes).simplify()

    def r_dr(self):
        """r * d/dr; defined for power-type radial kinds only."""
        out = []
        for md in self.modes:
            if isinstance(md.radial, BESSEL_KINDS):
                raise UnsupportedOperation("r d/dr of a Bessel mode leaves the mode family")
            pw = {p: v * p for p, v in md.radial.powers(md.n).items()}
            out.extend(_power_modes(md.index, md.time, md.coeff, pw))
        return self._with(out).simplify()

    def inverse_laplacian(self):
        """Particular solution F of lap F = self (no homogeneous part)."""
        out = []
        for md in self.simplify().modes:
            rad = md.radial
            if isinstance(rad, BESSEL_KINDS):
                out.append(md.scaled(1.0 / rad.eigenvalue))
                continue
            pw = {}
            for p, v in rad.powers(md.n).items():
                q = _radial_q(md.n, p + 2)
                if q == 0:
                    raise ResonanceError(
                        f"r^{p} Y_{md.n} has no power-law particular solution of the Laplacian")
                pw[p + 2] = v / q
            out.extend(_power_modes(md.index, md.time, md.coeff, pw))
        return self._with(out)

    def simplify(self):
        """Merge like modes and drop exact cancellations."""
        acc = {}
        for md in self.modes:
            idx = (md.index.n, md.index.m)
            tkey = md.time.key
            if isinstance(md.radial, POWER_KINDS):
                for p, v in md.radial.powers(md.n).items():
                    key = ("pw", idx, tkey, p)
                    _accumulate(acc, key, md.coeff * v)
            else:
                key = ("bes", idx, tkey, type(md.radial), md.radial.lam)
                _accumulate(acc, key, md.coeff)
        groups = {}
        out = []
        for key, (val, mag) in acc.items():
            if val == 0.0 or abs(val) <= CANCEL_RTOL * mag:
                continue
            if key[0] == "pw":
                groups.setdefault(key[1:3], {})[key[3]] = val
            else:
                _, (n, m), tkey, kind, lam = key
                out.append(ScalarMode(SphIndex(n, m), kind(lam), _time_from_key(tkey), val))
        for ((n, m), tkey), pw in groups.items():
            out.extend(_power_modes(SphIndex(n, m), _time_from_key(tkey), 1.0, pw))
        return self._with(out)


def _accumulate(acc, key, v):
    val, mag = acc.get(key, (0.0, 0.0))
    acc[key] = (val + v, mag + abs(v))


ZERO = ScalarField()


def field_of(*modes, domain_hint=None):
    return ScalarField(tuple(modes), domain_hint)


def cart_to_sph(xyz):
    xyz = np.asarray(xyz, float)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    with np.errstate(invalid="ignore", divide="ignore"):
        th = np.where(r > 0, np.arccos(np.clip(z / np.where(r > 0, r, 1.0), -1.0, 1.0)), 0.0)
    ph = np.arctan2(y, x)
    return r, th, ph


def sph_to_cart(r, theta, phi):
    r, theta, phi = np.broadcast_arrays(r, theta, phi)
    st = np.sin(theta)
    return np.stack([r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta)], axis=-1)


# spec-level function aliases
def eval(field_, point, t=0.0):  # noqa: A001 - mirrors the documented API name
    r, th, ph = point
    return field_.eval(r, th, ph, t)


def exact_laplacian(f):
    return f.laplacian()


def exact_dt(f):
    return f.dt()


def heat_op(f, params):
    return f.heat_op(params)


def exact_gradient(f):
    from .operators import Gradient
    return Gradient(f)
