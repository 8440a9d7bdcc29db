"""Sampling lattice on a spherical shell r1 <= r <= r2 over a set of times."""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .fields import sph_to_cart


@dataclass(frozen=True)
class ShellGrid:
    """Radii x Gauss-Legendre colatitudes x uniform longitudes x times."""

    r_nodes: Tuple[float, ...]
    n_theta: int
    n_phi: int
    times: Tuple[float, ...] = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "r_nodes", tuple(float(r) for r in self.r_nodes))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if not self.r_nodes or min(self.r_nodes) <= 0:
            raise ValueError("shell radii must be positive")
        if self.n_theta < 1 or self.n_phi < 2:
            raise ValueError("need n_theta >= 1 and n_phi >= 2")
        if not self.times:
            raise ValueError("at least one sample time is required")

    @classmethod
    def shell(cls, r1, r2, nr=4, n_theta=8, n_phi=16, times=(0.0,)):
        if not 0 < r1 <= r2:
            raise ValueError("need 0 < r1 <= r2")
        radii = np.linspace(r1, r2, nr) if nr > 1 else np.array([0.5 * (r1 + r2)])
        return cls(tuple(radii), n_theta, n_phi, tuple(times))

    @property
    def r1(self):
        return min(self.r_nodes)

    @property
    def r2(self):
        return max(self.r_nodes)

    def band_limit(self):
        """Largest degree analysed exactly on this grid."""
        return min(self.n_theta - 1, (self.n_phi - 1) // 2)

    @property
    def theta_nodes(self):
        x, _ = np.polynomial.legendre.leggauss(self.n_theta)
        return np.arccos(x[::-1])

    @property
    def theta_weights(self):
        _, w = np.polynomial.legendre.leggauss(self.n_theta)
        return w[::-1]

    @property
    def phi_nodes(self):
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    def sphere(self):
        """(theta, phi, weight) arrays of shape (n_theta, n_phi)."""
        th, ph = np.meshgrid(self.theta_nodes, self.phi_nodes, indexing="ij")
        w = np.outer(self.theta_weights, np.full(self.n_phi, 2.0 * np.pi / self.n_phi))
        return th, ph, w

    def spherical_points(self):
        """(r, theta, phi) flattened over the spatial lattice."""
        r, th, ph = np.meshgrid(np.array(self.r_nodes), self.theta_nodes, self.phi_nodes, indexing="ij")
        return r.ravel(), th.ravel(), ph.ravel()

    def points(self):
        r, th, ph = self.spherical_points()
        return sph_to_cart(r, th, ph)

    def __len__(self):
        return len(self.r_nodes) * self.n_theta * self.n_phi
