"""
Classical scattering of a point charge off the impenetrable flux tube.

Units: r_c = 1, p = 1, mass = 1.  The canonical angular momentum is
``alpha = mu' - b``; the flux coupling ``mu'`` only relabels it, so every
observable depends on the impact parameter ``b`` alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import DomainError, ScatterConfig, sgn

__all__ = [
    "ClassicalOrbit",
    "trajectory",
    "incidence_angle",
    "deflection_angle",
    "impact_parameter",
    "cross_section",
    "wkb_classical_bridge",
]


def _check_b(b):
    if not abs(b) < 1.0:
        raise DomainError(f"|b| = {abs(b)} >= 1: the particle misses the tube")


@dataclass
class ClassicalOrbit:
    """Reflected orbit sampled along both branches.

    ``samples`` has columns ``(r, theta, t, z)``; incoming rows first, ordered
    in time, with the reflection at ``r = 1``, ``t = 0``.
    """

    b: float
    alpha: float
    mu_prime: float
    samples: np.ndarray
    deflection: float

    @property
    def kinetic_alpha(self) -> float:
        # -b exactly; alpha - mu_prime would round
        return -self.b

    def energy_residual(self) -> np.ndarray:
        r = self.samples[:, 0]
        ka = self.kinetic_alpha
        pr2 = 1.0 - ka * ka / (r * r)
        return np.abs(pr2 + (ka / r) ** 2 - 1.0)


def incidence_angle(b: float) -> float:
    """Angle ``theta(r_c) - theta(inf)`` swept on the way in, ``arcsin(b)``."""
    _check_b(b)
    return math.asin(b)


def deflection_angle(b: float) -> float:
    """Scattering angle ``2 sgn(b) arccos|b|`` in ``(-pi, pi]``."""
    _check_b(b)
    return 2 * sgn(b) * math.acos(abs(b))


def impact_parameter(phi: float) -> float:
    """Inverse of :func:`deflection_angle`: ``b = sgn(phi) cos(phi/2)``."""
    if not -math.pi <= phi <= math.pi:
        raise DomainError("phi must lie in [-pi, pi]")
    return sgn(phi) * math.cos(phi / 2)


def cross_section(phi):
    """Classical differential cross section ``-db/dphi = |sin(phi/2)|/2``."""
    return 0.5 * np.abs(np.sin(np.asarray(phi, dtype=float) / 2)) if np.ndim(phi) else 0.5 * abs(math.sin(phi / 2))


def trajectory(b: float, mu_prime: float = 0.0, n_samples: int = 64, r_max: float = 10.0) -> ClassicalOrbit:
    """Sample the reflected orbit with impact parameter ``b``.

    Along the incoming branch ``theta(r) = theta_inf + arcsin(b/r)`` and
    ``t(r) = -(sqrt(r^2 - b^2) - sqrt(1 - b^2))``; the outgoing branch is the
    mirror image about the reflection point.  ``theta_inf = 0``; motion is
    planar (``z = 0``).
    """
    _check_b(b)
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    alpha = mu_prime - b
    # the orbit depends on the kinetic part -b only, never on alpha itself
    ka = -b
    r = np.geomspace(r_max, 1.0, n_samples)
    r[-1] = 1.0
    theta_in = -np.arcsin(ka / r)
    t_in = -(np.sqrt(r * r - ka * ka) - math.sqrt(1 - ka * ka))
    theta_c = theta_in[-1]
    r_out = r[-2::-1]
    theta_out = 2 * theta_c - theta_in[-2::-1]
    t_out = -t_in[-2::-1]
    rows = np.column_stack([
        np.concatenate([r, r_out]),
        np.concatenate([theta_in, theta_out]),
        np.concatenate([t_in, t_out]),
        np.zeros(2 * n_samples - 1),
    ])
    return ClassicalOrbit(b=b, alpha=alpha, mu_prime=mu_prime, samples=rows, deflection=deflection_angle(b))


def wkb_classical_bridge(cfg: ScatterConfig, n: float, h: float | None = None) -> tuple[float, float]:
    """Reflection angle from the slope of the WKB phase shift, and the matching impact parameter.

    Returns ``(d delta/dn - sgn(n - mu) pi/2, -(n - mu)/s)``, the slope taken by
    finite differences with ``n`` treated as continuous, and checks the angle
    against :func:`incidence_angle` of the impact parameter.
    """
    s, mu = cfg.s, cfg.mu
    u = n - mu
    h = 1e-6 * s if h is None else h
    if abs(u) + h >= s:
        raise DomainError("finite-difference step crosses the threshold nu = s")

    def delta(nn):
        # phase shift with a continuous index; same sign convention as the channels
        nu = abs(nn - mu)
        sg = sgn(nn - mu)
        return 0.5 * mu * sg * math.pi - (math.sqrt(s * s - nu * nu) - nu * math.acos(nu / s)) - 0.25 * math.pi

    if abs(u) < h:
        # one-sided on the sgn(0) = +1 side: the slope jumps at n = mu
        slope = (delta(mu + h) - delta(mu)) / h
        ref = mu
    else:
        slope = (delta(n + h) - delta(n - h)) / (2 * h)
        ref = n
    angle = slope - 0.5 * sgn(ref - mu) * math.pi
    b = -u / s
    if abs(angle - incidence_angle(b)) > 1e-5:
        raise AssertionError(f"reflection angle {angle} disagrees with incidence angle {incidence_angle(b)}")
    return angle, b
