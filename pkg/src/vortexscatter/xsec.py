"""
Differential and integrated cross sections per unit tube length, in units of r_c.

The asymptotic cross section splits into a reflection part, ``|sin(phi/2)|/2``,
which is the classical result, and a forward diffraction peak carrying the flux
dependence.  Their interference is dropped: the diffraction amplitude is
concentrated where the reflection amplitude vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .amplitudes import f1_direct, f2_direct
from .channel import DomainError, ScatterConfig

__all__ = [
    "CrossSectionTable",
    "Figure1Curve",
    "smoothed_delta",
    "dsigma_reflection",
    "dsigma_diffraction",
    "dsigma_ab_point",
    "dsigma_total",
    "interference",
    "cross_section_table",
    "integrate_angle",
    "total_cross_sections",
    "figure1_curve",
    "central_peak_area",
    "peak_capture",
    "observability_windows",
]


def _vec(fn):
    def wrapper(*args):
        *head, phi = args
        arr = np.asarray(phi, dtype=float)
        out = fn(*head, np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_vec
def smoothed_delta(y: float, phi):
    """Fejer-type kernel ``sin^2(y phi) / (4 pi y sin^2(phi/2))``; equals ``y/pi`` at 0."""
    out = np.empty_like(phi)
    # series in phi near 0, where the squared sines underflow
    small = np.abs(phi) < 1e-6
    p = phi[small]
    out[small] = y / math.pi * (1.0 - (4 * y * y - 1.0) * p * p / 12.0)
    p = phi[~small]
    out[~small] = np.sin(y * p) ** 2 / (4 * math.pi * y * np.sin(p / 2) ** 2)
    return out


@_vec
def dsigma_reflection(cfg: ScatterConfig, phi):
    """Reflection cross section ``|sin(phi/2)|/2``; independent of s, mu and rho."""
    return 0.5 * np.abs(np.sin(phi / 2))


@_vec
def dsigma_diffraction(cfg: ScatterConfig, phi):
    """Diffraction cross section ``4 Delta_{s/2}(phi) cos^2(s phi/2 + mu pi)``."""
    frac = cfg.mu_frac
    return 4 * smoothed_delta(cfg.s / 2, phi) * np.cos(cfg.s * phi / 2 + math.pi * frac) ** 2


@_vec
def dsigma_ab_point(cfg: ScatterConfig, phi):
    """Point-vortex cross section ``sin^2(mu pi) / (2 pi s sin^2(phi/2))``."""
    if np.any(np.sin(phi / 2) == 0.0):
        raise DomainError("the point-vortex cross section diverges at phi = 0")
    return math.sin(math.pi * cfg.mu_frac) ** 2 / (2 * math.pi * cfg.s * np.sin(phi / 2) ** 2)


def dsigma_total(cfg: ScatterConfig, phi):
    return dsigma_diffraction(cfg, phi) + dsigma_reflection(cfg, phi)


def interference(cfg: ScatterConfig, phi):
    """Diagnostic ``2 Re(f1* f2)`` from the direct sums, dropped from the total."""
    f1 = f1_direct(cfg, phi)
    f2 = f2_direct(cfg, phi)
    return 2 * np.real(np.conj(f1) * f2)


@dataclass
class CrossSectionTable:
    angles: np.ndarray
    dsigma1: np.ndarray
    dsigma2: np.ndarray
    dsigma_ab: np.ndarray
    dsigma_total: np.ndarray
    cfg: ScatterConfig
    normalization: str = "r_c"
    diagnostics: dict = field(default_factory=dict)


def cross_section_table(cfg: ScatterConfig, angles, with_interference: bool = False) -> CrossSectionTable:
    """Cross sections on a grid; the point-vortex column is ``inf`` at ``phi = 0``."""
    phis = np.asarray(angles, dtype=float)
    if np.any(np.abs(phis) > math.pi):
        raise ValueError("angles must lie in [-pi, pi]")
    d1 = dsigma_diffraction(cfg, phis)
    d2 = dsigma_reflection(cfg, phis)
    ab = np.full(phis.shape, np.inf)
    nz = np.sin(phis / 2) != 0.0
    ab[nz] = dsigma_ab_point(cfg, phis[nz])
    diag = {}
    if with_interference:
        diag["interference"] = interference(cfg, phis)
    return CrossSectionTable(phis, d1, d2, ab, d1 + d2, cfg, diagnostics=diag)


def integrate_angle(f, a: float, b: float, pieces: int = 1, epsabs: float = 1e-12, epsrel: float = 1e-12):
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    The interval is split into ``pieces`` equal parts first, which keeps
    strongly oscillating integrands tractable.  Returns ``(value, error)``.
    """
    edges = np.linspace(a, b, pieces + 1)
    total = err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(f, lo, hi, epsabs=epsabs / pieces, epsrel=epsrel, limit=200)
        total += val
        err += e
    return total, err


def _pieces(s):
    # about two sub-intervals per diffraction fringe
    return max(8, int(s))


def total_cross_sections(cfg: ScatterConfig) -> dict:
    """Integrals of the diffraction and reflection parts over ``(-pi, pi)``."""
    n = _pieces(cfg.s)
    d1, e1 = integrate_angle(lambda p: dsigma_diffraction(cfg, p), -math.pi, math.pi, pieces=n)
    d2, e2 = integrate_angle(lambda p: dsigma_reflection(cfg, p), -math.pi, 0.0)
    d2b, e2b = integrate_angle(lambda p: dsigma_reflection(cfg, p), 0.0, math.pi)
    return {"sigma1": d1, "sigma2": d2 + d2b, "total": d1 + d2 + d2b, "error": e1 + e2 + e2b}


@dataclass
class Figure1Curve:
    """Diffraction pattern normalised to ``dsigma/(dz dphi) / ((s/2pi) * 4)`` against ``phi s/(2 pi)``."""

    abscissa: np.ndarray
    ordinate: np.ndarray
    cfg: ScatterConfig
    total_per_length: float = 4.0


def figure1_curve(cfg: ScatterConfig, grid) -> Figure1Curve:
    """Normalised total cross section on an abscissa grid ``phi s / (2 pi)``.

    The total cross section per unit length, ``4 r_c``, sets the ordinate scale,
    so the curve is the same for all large ``s``.
    """
    if cfg.s / (2 * math.pi) < 50:
        raise DomainError("the normalised pattern assumes s/(2 pi) >= 50")
    xs = np.asarray(grid, dtype=float)
    phis = xs * 2 * math.pi / cfg.s
    ordinate = dsigma_total(cfg, phis) / (cfg.s / (2 * math.pi) * 4.0)
    return Figure1Curve(xs, ordinate, cfg)


def central_peak_area(cfg: ScatterConfig, half_width: float | None = None) -> tuple[float, float]:
    """Area under the normalised pattern for ``|phi| < half_width``.

    Defaults to the central peak, ``pi/s``, when the flux is integer and to
    both central peaks, ``2 pi/s``, otherwise.  Returns ``(area, error)``.
    """
    if half_width is None:
        half_width = (math.pi if cfg.mu_frac == 0.0 else 2 * math.pi) / cfg.s
    f = lambda p: dsigma_total(cfg, p) / 4.0
    # split at 0 and at the fringe zeros inside the window
    knots = np.arange(0.0, half_width, math.pi / cfg.s)
    knots = np.append(knots, half_width)
    area = err = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        v, e = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
        area += 2 * v
        err += 2 * e
    return area, err


def peak_capture(cfg: ScatterConfig, half_width: float) -> float:
    """Fraction of the diffraction cross section ``2 r_c`` inside ``|phi| < half_width``."""
    val, _ = integrate_angle(lambda p: dsigma_diffraction(cfg, p), -half_width, half_width, pieces=16)
    return val / 2.0


def observability_windows(cfg: ScatterConfig) -> tuple[float, float, float]:
    """Angular windows for separating diffraction from reflection.

    Returns the smallest angle at which reflection stands out, the largest
    angle at which diffraction fringes stand out above the reflection
    background, and the tunnelling background scale ``s^{-1/3}``.
    """
    s = cfg.s
    if s <= 10 * math.pi:
        raise DomainError("the windows are meaningful for s > 10 pi only")
    return 10 * math.pi / s, 2 * math.asin((10 / (math.pi * s)) ** (1.0 / 3.0)), s ** (-1.0 / 3.0)
