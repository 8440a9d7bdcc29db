"""JSON and CSV formats.

Mode JSON::

    {"n": 1, "m": 0, "radial": {"kind": "solid_growing"},
     "time": {"kind": "exp", "sigma": 0.0}, "coeff": 1.0}

Radial kinds: solid_growing, solid_decaying, bessel_j, bessel_y,
modified_i, modified_k (with "lambda"), power_series (with "base",
"coeffs").  Time kinds: constant, exp ("sigma"), poly ("degree").
Spherical harmonics are real, orthonormal, without the Condon-Shortley
phase; m < 0 selects the sin(|m| phi) member.

Flow specs are ``{"nu", "mu", "rho", "p0", "A", "B", "chi", "P", "T"}``
with an optional ``"domain": [r1, r2]``.  Sample CSVs have the header
``r,theta,phi,t,vx,vy,vz`` (Cartesian velocity components).
"""
import csv
import json

import numpy as np

from .constructors import DEFAULT_DOMAIN, FlowSpec
from .decompose import TabulatedSamples
from .errors import StokesError
from .fields import (BesselJ, BesselY, Constant, Exp, FluidParams, ModifiedI, ModifiedK, PowerSeries,
                     Poly, ScalarField, ScalarMode, SolidDecaying, SolidGrowing, SphIndex, sph_to_cart)
from .grid import ShellGrid
from .operators import evaluate


class InputError(StokesError, ValueError):
    """Malformed input document."""


_BESSEL = {"bessel_j": BesselJ, "bessel_y": BesselY, "modified_i": ModifiedI, "modified_k": ModifiedK}
_BESSEL_NAMES = {v: k for k, v in _BESSEL.items()}
FIELD_KEYS = ("A", "B", "chi", "P", "T")


def radial_from_json(d):
    kind = d.get("kind")
    if kind == "solid_growing":
        return SolidGrowing()
    if kind == "solid_decaying":
        return SolidDecaying()
    if kind in _BESSEL:
        return _BESSEL[kind](float(d["lambda"]))
    if kind == "power_series":
        return PowerSeries(int(d["base"]), tuple(float(c) for c in d["coeffs"]))
    raise InputError(f"unknown radial kind {kind!r}")


def radial_to_json(rad):
    if isinstance(rad, SolidGrowing):
        return {"kind": "solid_growing"}
    if isinstance(rad, SolidDecaying):
        return {"kind": "solid_decaying"}
    if isinstance(rad, PowerSeries):
        return {"kind": "power_series", "base": rad.base, "coeffs": list(rad.coeffs)}
    return {"kind": _BESSEL_NAMES[type(rad)], "lambda": rad.lam}


def time_from_json(d):
    kind = (d or {"kind": "constant"}).get("kind")
    if kind == "constant":
        return Constant()
    if kind == "exp":
        return Exp(float(d["sigma"]))
    if kind == "poly":
        return Poly(int(d["degree"]))
    raise InputError(f"unknown time kind {kind!r}")


def time_to_json(tm):
    if isinstance(tm, Exp):
        return {"kind": "exp", "sigma": tm.sigma}
    if isinstance(tm, Poly):
        return {"kind": "poly", "degree": tm.degree}
    return {"kind": "constant"}


def mode_from_json(d):
    try:
        return ScalarMode(SphIndex(int(d["n"]), int(d["m"])), radial_from_json(d["radial"]),
                          time_from_json(d.get("time")), float(d.get("coeff", 1.0)))
    except KeyError as exc:
        raise InputError(f"mode is missing key {exc}") from exc


def mode_to_json(md):
    return {"n": md.index.n, "m": md.index.m, "radial": radial_to_json(md.radial),
            "time": time_to_json(md.time), "coeff": md.coeff}


def field_from_json(items, domain=None):
    return ScalarField(tuple(mode_from_json(d) for d in items or ()), domain)


def field_to_json(f):
    return [mode_to_json(md) for md in f.modes]


def spec_from_json(doc):
    try:
        nu, mu = float(doc["nu"]), float(doc["mu"])
    except KeyError as exc:
        raise InputError(f"flow spec is missing {exc}") from exc
    rho = float(doc.get("rho", mu / nu))
    params = FluidParams(nu, mu, rho)
    domain = tuple(float(x) for x in doc.get("domain", DEFAULT_DOMAIN))
    fields = {k: field_from_json(doc.get(k), domain) for k in FIELD_KEYS}
    return FlowSpec(params, p0=float(doc.get("p0", 0.0)), domain=domain, **fields)


def spec_to_json(spec):
    out = {"nu": spec.params.nu, "mu": spec.params.mu, "rho": spec.params.rho, "p0": spec.p0,
           "domain": list(spec.domain)}
    for k in FIELD_KEYS:
        out[k] = field_to_json(getattr(spec, k))
    return out


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _round17(obj):
    if isinstance(obj, float):
        return float(f"{obj:.17g}")
    if isinstance(obj, dict):
        return {k: _round17(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round17(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round17(obj.item())
    return obj


def dumps(obj):
    """Deterministic JSON: sorted keys, floats written with 17 significant digits."""
    return json.dumps(_round17(obj), sort_keys=True, indent=2, allow_nan=True)


# ---------------------------------------------------------------- sample CSV

CSV_HEADER = ("r", "theta", "phi", "t", "vx", "vy", "vz")


def _unique(values, tol):
    vals = np.sort(values)
    keep = np.concatenate([[True], np.diff(vals) > tol * np.maximum(1.0, np.abs(vals[1:]))])
    return vals[keep]


def read_samples_csv(path):
    """Tabulated velocity from a CSV on a shell grid; returns (field, grid).

    Colatitudes must be the Gauss-Legendre nodes and longitudes uniform,
    matching :class:`ShellGrid`; the full tensor product must be present.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(h.strip() for h in next(reader))
        if header != CSV_HEADER:
            raise InputError(f"CSV header must be {','.join(CSV_HEADER)}")
        rows = np.array([[float(x) for x in row] for row in reader if row], float)
    if rows.size == 0:
        raise InputError("CSV has no samples")
    radii, thetas, phis, times = (_unique(rows[:, k], 1e-9) for k in range(4))
    grid = ShellGrid(tuple(radii), len(thetas), len(phis), tuple(times))
    if not np.allclose(thetas, grid.theta_nodes, atol=1e-9):
        raise InputError("theta values are not Gauss-Legendre colatitudes")
    if not np.allclose(phis, grid.phi_nodes, atol=1e-9):
        raise InputError("phi values are not uniform 2 pi j / n_phi")
    idx = [np.abs(rows[:, k][:, None] - nodes[None]).argmin(1)
           for k, nodes in enumerate((radii, thetas, phis, times))]
    values = np.full((len(radii), len(thetas), len(phis), len(times), 3), np.nan)
    values[idx[0], idx[1], idx[2], idx[3]] = rows[:, 4:7]
    expected = values.size // 3
    if len(rows) != expected or np.isnan(values).any():
        raise InputError(f"CSV must hold the full grid ({expected} rows), got {len(rows)}")
    tab = TabulatedSamples(grid, values)
    return tab.as_field(label=str(path)), grid


def write_samples_csv(path, v, grid):
    """Sample a vector field on ``grid`` and write the CSV format."""
    th, ph, _ = grid.sphere()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for t in grid.times:
            for r in grid.r_nodes:
                rr = np.full(th.shape, r)
                V = evaluate(v, sph_to_cart(rr, th, ph).reshape(-1, 3), t)
                for (a, b), vec in zip(zip(th.ravel(), ph.ravel()), V):
                    w.writerow([repr(float(x)) for x in (r, a, b, t, *vec)])
