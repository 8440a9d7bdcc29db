"""Recovery of the poloidal and toroidal scalars A, B of a solenoidal field.

On each sphere of a :class:`ShellGrid` the radial flux r.V and radial
vorticity r.(curl V) are expanded in real spherical harmonics; inverting the
transverse operator gives A_nm = (r.V)_nm / n(n+1) and
B_nm = (r.curl V)_nm / n(n+1).  The tangential part of V is analysed as
well, which yields d(r A_nm)/dr / r without differentiating in r.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (ExtrapolationError, GridTooCoarse, MonopoleFluxError, NotDivergenceFree)
from .fields import cart_to_sph, sph_to_cart
from .grid import ShellGrid
from .operators import (Sampled, evaluate, fd_curl, fd_divergence, is_exact, sph_frame,
                        tabulated_source, vcurl)
from .special import angular_table, lm_count, lm_index, lm_pairs

DIV_RTOL = 1e-6
MONOPOLE_RTOL = 1e-6
TABULATED_DIV_RTOL = 1e-4


def _check_band(n_theta, n_phi, lmax):
    if n_theta < lmax + 1 or n_phi < 2 * lmax + 1:
        raise GridTooCoarse(f"{n_theta}x{n_phi} sphere grid cannot resolve degree {lmax}")


def _degrees(lmax):
    return np.array([n for n, _ in lm_pairs(lmax)], float)


def sht_analyze(samples, lmax):
    """Coefficients of a field sampled on a Gauss-Legendre x uniform sphere.

    ``samples`` has shape (n_theta, n_phi) (or (n_theta, n_phi, ...)).
    Exact for inputs band-limited to degree lmax.
    """
    samples = np.asarray(samples, float)
    nt, npp = samples.shape[:2]
    _check_band(nt, npp, lmax)
    th, ph, w = ShellGrid((1.0,), nt, npp).sphere()
    Y, _, _ = angular_table(lmax, th, ph)
    return np.einsum("kij,ij,ij...->k...", Y, w, samples)


def vsh_analyze(v_theta, v_phi, lmax):
    """Poloidal and toroidal coefficients (D, B) of a tangential field

    v_t = sum D_nm grad1 Y_nm - B_nm rhat x grad1 Y_nm.
    The n = 0 slots are zero.
    """
    nt, npp = np.shape(v_theta)[:2]
    _check_band(nt, npp, lmax)
    th, ph, w = ShellGrid((1.0,), nt, npp).sphere()
    _, Yt, Yp = angular_table(lmax, th, ph)
    nn = _degrees(lmax)
    norm = np.where(nn > 0, nn * (nn + 1.0), 1.0)
    D = np.einsum("kij,ij->k", Yt * v_theta + Yp * v_phi, w) / norm
    B = np.einsum("kij,ij->k", Yp * v_theta - Yt * v_phi, w) / norm
    D[0] = B[0] = 0.0
    return D, B


@dataclass(frozen=True, eq=False)
class TabulatedSamples:
    """Vector samples on a shell grid: values[i_r, i_theta, i_phi, i_t, 3] (Cartesian)."""

    grid: ShellGrid
    values: np.ndarray

    def lookup(self, xyz, t):
        r, th, ph = cart_to_sph(xyz)
        rn = np.array(self.grid.r_nodes)
        tn, pn, times = self.grid.theta_nodes, self.grid.phi_nodes, np.array(self.grid.times)
        ir = np.abs(r[:, None] - rn[None]).argmin(1)
        it = np.abs(th[:, None] - tn[None]).argmin(1)
        dp = np.abs((ph[:, None] - pn[None] + np.pi) % (2 * np.pi) - np.pi)
        ip = dp.argmin(1)
        ik = np.abs(np.asarray(t)[:, None] - times[None]).argmin(1)
        off = (np.abs(r - rn[ir]) > 1e-9 * np.maximum(1, r)) | (np.abs(th - tn[it]) > 1e-9) \
            | (dp[np.arange(len(ip)), ip] > 1e-9) | (np.abs(t - times[ik]) > 1e-12)
        if np.any(off):
            raise ExtrapolationError("tabulated field queried away from its sample nodes")
        return self.values[ir, it, ip, ik]

    def as_field(self, label="tabulated"):
        return Sampled(self.lookup, label, tabulated=self)


@dataclass
class Decomposition:
    """Recovered coefficient tables, indexed [i_r, i_t, lm_index(n, m)].

    ``A`` and ``B`` are the poloidal and toroidal scalars, ``D`` the
    tangential poloidal factor d(r A)/dr / r obtained by vector analysis.
    """
    grid: ShellGrid
    lmax: int
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    flux: np.ndarray
    vorticity_flux: np.ndarray
    analysis_residual: float

    @property
    def radii(self):
        return np.array(self.grid.r_nodes)

    @property
    def times(self):
        return np.array(self.grid.times)

    def coeff(self, which, n, m):
        return getattr(self, which)[:, :, lm_index(n, m)]

    def to_dict(self):
        out = {"radii": list(self.grid.r_nodes), "times": list(self.grid.times), "lmax": self.lmax,
               "analysis_residual": self.analysis_residual, "A": {}, "B": {}}
        for n, m in lm_pairs(self.lmax):
            if n == 0:
                continue
            i = lm_index(n, m)
            out["A"][f"{n},{m}"] = self.A[:, :, i].tolist()
            out["B"][f"{n},{m}"] = self.B[:, :, i].tolist()
        return out


def _sphere_samples(v, grid, r, t):
    th, ph, _ = grid.sphere()
    X = sph_to_cart(np.full(th.shape, r), th, ph)
    return X, evaluate(v, X.reshape(-1, 3), t).reshape(th.shape + (3,)), th, ph


def _components(V, th, ph):
    rh, thh, phh = sph_frame(th, ph)
    return (np.sum(V * rh, -1), np.sum(V * thh, -1), np.sum(V * phh, -1))


def recover_AB(v, grid, lmax, params=None, div_rtol=DIV_RTOL, monopole_rtol=MONOPOLE_RTOL):
    """Decompose ``v`` into curl curl(r A) + curl(r B) on the grid's shells.

    Vorticity comes from exact mode derivatives for mode-based fields, from
    4th-order finite differences for black-box fields, and from the
    tangential analysis for tabulated samples.
    """
    _check_band(grid.n_theta, grid.n_phi, lmax)
    tab = tabulated_source(v)
    if tab is not None and tab.grid != grid:
        raise ValueError("tabulated samples must be decomposed on their own grid")
    exact = is_exact(v)
    curl_tree = vcurl(v) if exact else None
    nr, nt, nk = len(grid.r_nodes), len(grid.times), lm_count(lmax)
    A, B, D = (np.zeros((nr, nt, nk)) for _ in range(3))
    flux, vflux = np.zeros((nr, nt, nk)), np.zeros((nr, nt, nk))
    Vr_tab = np.zeros((nr, nt, nk))
    nn = _degrees(lmax)
    norm = np.where(nn > 0, nn * (nn + 1.0), 1.0)
    scale = 0.0
    for k, t in enumerate(grid.times):
        for i, r in enumerate(grid.r_nodes):
            if tab is not None:
                th, ph, _ = grid.sphere()
                X = sph_to_cart(np.full(th.shape, r), th, ph)
                Vs = tab.values[i, :, :, k]
            else:
                X, Vs, th, ph = _sphere_samples(v, grid, r, t)
                div = fd_divergence(v, X.reshape(-1, 3), t)
                vmax = float(np.abs(Vs).max())
                if np.abs(div).max() > div_rtol * max(vmax, 1.0):
                    raise NotDivergenceFree(f"max |div V| = {np.abs(div).max():.3e} at r={r}, t={t}")
            scale = max(scale, float(np.abs(Vs).max()) * r)
            vr, vth, vph = _components(Vs, th, ph)
            flux[i, k] = sht_analyze(r * vr, lmax)
            Vr_tab[i, k] = sht_analyze(vr, lmax)
            Dk, Bt = vsh_analyze(vth, vph, lmax)
            D[i, k] = Dk
            if tab is not None:
                vflux[i, k] = norm * Bt
                vflux[i, k, 0] = 0.0
            else:
                if exact:
                    W = evaluate(curl_tree, X.reshape(-1, 3), t)
                else:
                    W = fd_curl(v, X.reshape(-1, 3), t)
                W = W.reshape(th.shape + (3,))
                vflux[i, k] = sht_analyze(r * _components(W, th, ph)[0], lmax)
    floor = max(scale, np.finfo(float).tiny)
    worst = float(np.abs(flux[:, :, 0]).max())
    if worst > monopole_rtol * floor:
        raise MonopoleFluxError(f"net radial flux (r.V)_00 = {worst:.3e} is not representable", flux=worst)
    if float(np.abs(vflux[:, :, 0]).max()) > monopole_rtol * floor:
        raise MonopoleFluxError("radial vorticity has a monopole component")
    if tab is not None:
        _tabulated_divergence(grid, Vr_tab, D, nn, floor)
    A = flux / norm
    B = vflux / norm
    A[:, :, 0] = B[:, :, 0] = 0.0
    dec = Decomposition(grid, lmax, A, B, D, flux, vflux, 0.0)
    dec.analysis_residual = _analysis_residual(dec, v, tab)
    return dec


def _tabulated_divergence(grid, Vr, D, nn, scale):
    """Spectral divergence check with a spline radial derivative."""
    r = np.array(grid.r_nodes)
    if len(r) < 2:
        return
    flux = (r**2)[:, None, None] * Vr
    if len(r) >= 4:
        dflux = CubicSpline(r, flux, axis=0)(r, 1)
    else:
        dflux = np.gradient(flux, r, axis=0)
    div = dflux / (r**2)[:, None, None] - nn[None, None, :] * (nn + 1)[None, None, :] * D / r[:, None, None]
    if np.abs(div).max() > TABULATED_DIV_RTOL * max(scale, 1.0):
        raise NotDivergenceFree(f"tabulated field has divergence {np.abs(div).max():.3e}")


def _analysis_residual(dec, v, tab):
    worst = 0.0
    th, ph, _ = dec.grid.sphere()
    for k, t in enumerate(dec.grid.times):
        for i, r in enumerate(dec.grid.r_nodes):
            rr = np.full(th.shape, r)
            W = synthesize(dec, (rr, th, ph), t)
            if tab is not None:
                Vs = tab.values[i, :, :, k]
            else:
                Vs = evaluate(v, sph_to_cart(rr, th, ph).reshape(-1, 3), t).reshape(W.shape)
            worst = max(worst, float(np.abs(W - Vs).max()))
    return worst


def synthesize(dec, point, t, radial="tangential"):
    """Cartesian V = curl curl(r A) + curl(r B) from recovered tables.

    On radial nodes the tangential factor is the analysed one; between
    nodes A, B and D are interpolated with not-a-knot cubic splines.  With
    ``radial="spline"`` the tangential factor is A/r + dA/dr from the A
    spline instead.
    """
    r, th, ph = (np.asarray(c, float) for c in point)
    r, th, ph = np.broadcast_arrays(r, th, ph)
    times = dec.times
    hit = np.flatnonzero(np.abs(times - t) <= 1e-12 * max(1.0, abs(t)))
    if hit.size == 0:
        raise ExtrapolationError(f"t={t} is not a tabulated time")
    k = int(hit[0])
    radii = dec.radii
    if np.any(r < radii.min() * (1 - 1e-12)) or np.any(r > radii.max() * (1 + 1e-12)):
        raise ExtrapolationError("radius outside the tabulated shell")
    Atab, Btab, Dtab = dec.A[:, k], dec.B[:, k], dec.D[:, k]
    flat = r.ravel()
    node = np.abs(flat[:, None] - radii[None]).argmin(1)
    on = np.abs(flat - radii[node]) <= 1e-12 * np.maximum(1.0, flat)
    if radial == "spline":
        on = np.zeros_like(on)
    A = np.empty((flat.size, Atab.shape[-1]))
    B, D = np.empty_like(A), np.empty_like(A)
    A[on], B[on], D[on] = Atab[node[on]], Btab[node[on]], Dtab[node[on]]
    off = ~on
    if np.any(off):
        if len(radii) < 2:
            raise ExtrapolationError("a single radius cannot be interpolated")
        sA, sB, sD = (CubicSpline(radii, tab_, axis=0) for tab_ in (Atab, Btab, Dtab))
        ro = flat[off]
        A[off], B[off] = sA(ro), sB(ro)
        D[off] = sA(ro) / ro[:, None] + sA(ro, 1) if radial == "spline" else sD(ro)
    Y, Yt, Yp = angular_table(dec.lmax, th.ravel(), ph.ravel())
    nn = _degrees(dec.lmax)
    Vr = np.sum(nn[:, None] * (nn[:, None] + 1.0) * A.T * Y, 0) / flat
    Vt = np.sum(D.T * Yt + B.T * Yp, 0)
    Vp = np.sum(D.T * Yp - B.T * Yt, 0)
    rh, thh, phh = sph_frame(th.ravel(), ph.ravel())
    out = Vr[:, None] * rh + Vt[:, None] * thh + Vp[:, None] * phh
    return out.reshape(r.shape + (3,))
