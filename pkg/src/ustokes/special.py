"""Real spherical harmonics and spherical Bessel functions.

Harmonics are real and orthonormal on the unit sphere, without the
Condon-Shortley phase::

    Y_n^m  = sqrt(2) Q_n^m(theta) cos(m phi)      m > 0
    Y_n^0  = Q_n^0(theta)
    Y_n^-m = sqrt(2) Q_n^m(theta) sin(m phi)      m > 0

with Q_n^m the normalized associated Legendre function of cos(theta).
Coefficient arrays are flattened with ``lm_index(n, m) = n*n + n + m``.
"""
import numpy as np
from scipy import special as sp

from .errors import DomainError, InvalidIndex

_SQRT2 = np.sqrt(2.0)
_SERIES_CUTOFF = 0.5
_SERIES_TERMS = 30


def lm_index(n, m):
    return n * n + n + m


def lm_count(lmax):
    return (lmax + 1) ** 2


def lm_pairs(lmax):
    """All (n, m) with n <= lmax in flattened storage order."""
    return [(n, m) for n in range(lmax + 1) for m in range(-n, n + 1)]


def check_index(n, m):
    if int(n) != n or int(m) != m:
        raise InvalidIndex(f"non-integer index ({n}, {m})")
    if n < 0 or abs(m) > n:
        raise InvalidIndex(f"index out of bounds: n={n}, m={m}")


def _legendre(lmax, theta):
    """Normalized Q_n^m, dQ/dtheta and Q_n^m / sin(theta) for m >= 0.

    Arrays are indexed [n, m, point]. The ratio Q/sin is built by its own
    recurrence so it stays finite on the polar axis.
    """
    theta = np.asarray(theta, dtype=float)
    x = np.cos(theta)
    s = np.sin(theta)
    shape = (lmax + 2, lmax + 2) + theta.shape
    Q = np.zeros(shape)
    S = np.zeros(shape)
    Q[0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, lmax + 2):
        f = np.sqrt((2.0 * m + 1.0) / (2.0 * m))
        S[m, m] = f * Q[m - 1, m - 1]
        Q[m, m] = S[m, m] * s
    for m in range(0, lmax + 1):
        if m + 1 <= lmax + 1:
            f = np.sqrt(2.0 * m + 3.0)
            Q[m + 1, m] = f * x * Q[m, m]
            S[m + 1, m] = f * x * S[m, m]
        for n in range(m + 2, lmax + 2):
            a = np.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            b = np.sqrt(((n - 1.0) ** 2 - m * m) / (4.0 * (n - 1.0) ** 2 - 1.0))
            Q[n, m] = a * (x * Q[n - 1, m] - b * Q[n - 2, m])
            S[n, m] = a * (x * S[n - 1, m] - b * S[n - 2, m])
    dQ = np.zeros(shape)
    for n in range(0, lmax + 1):
        dQ[n, 0] = -np.sqrt(n * (n + 1.0)) * Q[n, 1]
        for m in range(1, n + 1):
            up = np.sqrt((n - m) * (n + m + 1.0)) * Q[n, m + 1]
            down = np.sqrt((n + m) * (n - m + 1.0)) * Q[n, m - 1]
            dQ[n, m] = 0.5 * (down - up)
    return Q, dQ, S


def angular_table(lmax, theta, phi):
    """Y, dY/dtheta and (1/sin theta) dY/dphi for every (n, m) up to lmax.

    Returns three arrays of shape ``(lm_count(lmax),) + broadcast shape``.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    Q, dQ, S = _legendre(lmax, theta)
    shape = (lm_count(lmax),) + theta.shape
    Y = np.empty(shape)
    Yt = np.empty(shape)
    Yp = np.empty(shape)
    for n in range(lmax + 1):
        i0 = lm_index(n, 0)
        Y[i0] = Q[n, 0]
        Yt[i0] = dQ[n, 0]
        Yp[i0] = 0.0
        for m in range(1, n + 1):
            c = np.cos(m * phi)
            sn = np.sin(m * phi)
            ip, im = lm_index(n, m), lm_index(n, -m)
            Y[ip] = _SQRT2 * Q[n, m] * c
            Y[im] = _SQRT2 * Q[n, m] * sn
            Yt[ip] = _SQRT2 * dQ[n, m] * c
            Yt[im] = _SQRT2 * dQ[n, m] * sn
            Yp[ip] = -_SQRT2 * m * S[n, m] * sn
            Yp[im] = _SQRT2 * m * S[n, m] * c
    return Y, Yt, Yp


def eval_ylm(n, m, theta, phi):
    """Real orthonormal spherical harmonic Y_n^m(theta, phi)."""
    check_index(n, m)
    theta = np.asarray(theta, float)
    if np.any((theta < 0) | (theta > np.pi)):
        raise DomainError("theta must lie in [0, pi]")
    Y, _, _ = angular_table(n, theta, phi)
    out = Y[lm_index(n, m)]
    return float(out) if out.ndim == 0 else out


def _series(n, x, sign, derivative):
    # sum_k c_k x^(n+2k),  c_k = c_{k-1} * (sign/2) / (k (2n+2k+1))
    c = 1.0 / sp.factorial2(2 * n + 1, exact=False)
    out = np.zeros_like(x)
    for k in range(_SERIES_TERMS):
        if k:
            c *= sign * 0.5 / (k * (2 * n + 2 * k + 1))
        p = n + 2 * k
        if derivative:
            if p:
                out += c * p * x ** (p - 1)
        else:
            out += c * x**p
    return out


_SCIPY = {"j": sp.spherical_jn, "y": sp.spherical_yn, "i": sp.spherical_in, "k": sp.spherical_kn}


def spherical_bessel(kind, n, x, derivative=False):
    """Spherical Bessel j, y or modified spherical Bessel i, k of order n.

    Regular kinds switch to a power series below x = 0.5.
    """
    if kind not in _SCIPY:
        raise ValueError(f"unknown Bessel kind {kind!r}")
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    if kind in ("y", "k"):
        if np.any(xa <= 0):
            raise DomainError(f"spherical Bessel '{kind}' is singular at x = 0")
        out = _SCIPY[kind](n, xa, derivative=derivative)
    else:
        if np.any(xa < 0):
            raise DomainError("negative argument")
        out = np.empty_like(xa)
        small = xa < _SERIES_CUTOFF
        sign = -1.0 if kind == "j" else 1.0
        if np.any(small):
            out[small] = _series(n, xa[small], sign, derivative)
        if np.any(~small):
            out[~small] = _SCIPY[kind](n, xa[~small], derivative=derivative)
    return float(out[0]) if scalar else out
