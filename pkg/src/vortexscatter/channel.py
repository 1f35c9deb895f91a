"""
Per-partial-wave WKB machinery for scattering off an impenetrable magnetic vortex.

All quantities are dimensionless: lengths in units of the vortex radius r_c,
hbar = 1, and the particle momentum enters only through the size parameter
``s = p r_c / hbar``.  A partial wave ``n`` sees the effective order
``nu = |n - mu|`` where ``mu`` is the flux in units of the London quantum.

The Robin parameter rho is carried as the pair ``(sin(rho pi), cos(rho pi))``
so that the Dirichlet limit (cot -> infinity) needs no special casing: every
formula containing ``cot(rho pi)`` is multiplied through by ``sin(rho pi)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "ScatterConfig",
    "Regime",
    "Channel",
    "ReflectionCoeff",
    "sgn",
    "make_channel",
    "propagating_range",
    "radial_momentum",
    "evanescent_momentum",
    "action_xi",
    "evanescent_action",
    "omega",
    "reflection_coeff",
    "wkb_phase_shift",
    "wkb_s_matrix",
    "quasiclassical_ratio",
    "is_quasiclassical",
    "wkb_series_terms",
]

_EDGE_TOL = 1e-14


class DomainError(ValueError):
    """Raised when an operation is evaluated outside its domain of validity."""


def _sincos_pi(rho: float) -> tuple[float, float]:
    # exact at the quarter points so that rho=1/2 gives cot = 0 exactly
    exact = {0.0: (0.0, 1.0), 0.25: (math.sqrt(0.5), math.sqrt(0.5)),
             0.5: (1.0, 0.0), 0.75: (math.sqrt(0.5), -math.sqrt(0.5))}
    if rho in exact:
        return exact[rho]
    return math.sin(rho * math.pi), math.cos(rho * math.pi)


@dataclass(frozen=True)
class ScatterConfig:
    """Dimensionless definition of the scattering problem.

    Parameters
    ----------
    s : float
        Size parameter ``p r_c / hbar``; must be positive.
    mu : float
        Reduced flux ``e Phi / (2 pi hbar c)``.
    rho : float
        Robin parameter in ``[0, 1)``; 0 is Dirichlet, 1/2 is Neumann.
    """

    s: float
    mu: float = 0.0
    rho: float = 0.0
    sin_rho: float = field(init=False, repr=False)
    cos_rho: float = field(init=False, repr=False)
    mu_int: int = field(init=False, repr=False)
    mu_frac: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s > 0):
            raise ValueError(f"s must be a positive finite number, got {self.s!r}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        if not (0.0 <= self.rho < 1.0):
            raise ValueError(f"rho must lie in [0, 1), got {self.rho!r}")
        sn, cs = _sincos_pi(float(self.rho))
        m = math.floor(self.mu)
        object.__setattr__(self, "sin_rho", sn)
        object.__setattr__(self, "cos_rho", cs)
        object.__setattr__(self, "mu_int", int(m))
        object.__setattr__(self, "mu_frac", self.mu - m)

    def with_(self, **changes) -> "ScatterConfig":
        """Return a copy with some of ``s``, ``mu``, ``rho`` replaced."""
        params = {"s": self.s, "mu": self.mu, "rho": self.rho}
        params.update(changes)
        return ScatterConfig(**params)


class Regime(enum.Enum):
    PROPAGATING = "propagating"
    EVANESCENT = "evanescent"


@dataclass(frozen=True)
class Channel:
    """One partial wave: index ``n``, order ``nu = |n - mu|`` and turning point ``nu/s``."""

    n: int
    nu: float
    regime: Regime
    xt: float

    @property
    def propagating(self) -> bool:
        return self.regime is Regime.PROPAGATING


@dataclass(frozen=True)
class ReflectionCoeff:
    value: complex

    def __abs__(self):
        return abs(self.value)

    def __complex__(self):
        return complex(self.value)


def sgn(u: float) -> int:
    """Sign with the convention ``sgn(0) = +1``."""
    return -1 if u < 0 else 1


def make_channel(cfg: ScatterConfig, n: int) -> Channel:
    # (n - mu_int) - mu_frac keeps nu identical under the shift (n, mu) -> (n+1, mu+1)
    nu = abs((n - cfg.mu_int) - cfg.mu_frac)
    regime = Regime.PROPAGATING if nu <= cfg.s else Regime.EVANESCENT
    return Channel(n=int(n), nu=nu, regime=regime, xt=nu / cfg.s)


def propagating_range(cfg: ScatterConfig) -> tuple[int, int]:
    """Inclusive index range ``[n_lo, n_hi]`` of channels with ``|n - mu| <= s``."""
    n_hi = math.floor(cfg.s + cfg.mu)
    n_lo = -math.floor(cfg.s - cfg.mu)
    return n_lo, n_hi


def radial_momentum(cfg: ScatterConfig, ch: Channel, x: float) -> float:
    """Radial momentum ``P_n(x)/p`` in the classically allowed region ``x >= nu/s``."""
    if x < ch.xt - _EDGE_TOL:
        raise DomainError(f"x={x} lies inside the turning point {ch.xt}")
    q = ch.nu / (cfg.s * x)
    return math.sqrt(max(0.0, 1.0 - q * q))


def evanescent_momentum(cfg: ScatterConfig, ch: Channel, x: float) -> float:
    """Decay rate ``Pi_n(x)/p`` in the forbidden region ``0 < x <= nu/s``."""
    if x <= 0:
        raise DomainError("x must be positive")
    if ch.nu == 0 or x > ch.xt + _EDGE_TOL:
        raise DomainError(f"x={x} is outside the evanescent region (turning point {ch.xt})")
    q = ch.nu / (cfg.s * x)
    return math.sqrt(max(0.0, q * q - 1.0))


def action_xi(cfg: ScatterConfig, ch: Channel) -> float:
    """Phase integral from the turning point to the boundary, ``sqrt(s^2-nu^2) - nu arccos(nu/s)``."""
    if not ch.propagating:
        raise DomainError("action_xi requires a propagating channel")
    s, nu = cfg.s, ch.nu
    return math.sqrt(max(0.0, s * s - nu * nu)) - nu * math.acos(min(1.0, nu / s))


def evanescent_action(cfg: ScatterConfig, ch: Channel) -> float:
    """Tunnelling exponent ``sqrt(nu^2-s^2) - nu arccosh(nu/s)`` (non-positive)."""
    if ch.propagating:
        raise DomainError("evanescent_action requires an evanescent channel")
    s, nu = cfg.s, ch.nu
    return math.sqrt(nu * nu - s * s) - nu * math.acosh(nu / s)


def omega(cfg: ScatterConfig, ch: Channel) -> float:
    """Boundary phase ``omega_n(s, rho)`` of the propagating reflection coefficient.

    Evaluated as ``atan2(sin * k, cos - sin * s^2 / (2 k^2))`` with
    ``k = sqrt(s^2 - nu^2)``.  The numerator is never negative, so the result
    lies in ``[0, pi]`` and varies continuously with ``nu``.
    """
    if not ch.propagating:
        raise DomainError("omega requires a propagating channel")
    s, nu = cfg.s, ch.nu
    k2 = s * s - nu * nu
    if k2 <= 0.0:
        raise DomainError("omega is singular at the threshold nu = s")
    k = math.sqrt(k2)
    return math.atan2(cfg.sin_rho * k, cfg.cos_rho - cfg.sin_rho * 0.5 * s * s / k2)


def _threshold_coeff(cfg: ScatterConfig) -> complex:
    # limit of the evanescent formula as nu -> s+: exponent -> 0, Robin quotient -> 1
    return 1.0 / (1.0 + 0.5j)


def _evanescent_coeff(cfg: ScatterConfig, nu: float) -> complex:
    s = cfg.s
    w = nu * nu - s * s
    k = math.sqrt(w)
    g = math.exp(2.0 * (k - nu * math.acosh(nu / s)))
    sn, cs = cfg.sin_rho, cfg.cos_rho
    q = 0.5 * s * s / w
    num = cs + sn * (q - k)
    den = cs + sn * (q + k)
    # g / (num/den + i g/2), written without dividing by den
    return g * den / (num + 0.5j * g * den)


def reflection_coeff(cfg: ScatterConfig, ch: Channel) -> ReflectionCoeff:
    """WKB reflection coefficient ``C_n`` of the boundary.

    Propagating channels get the pure phase ``exp(-2i xi - 2i omega)``;
    evanescent channels the tunnelling form with exponent ``exp(2E)``.
    The measure-zero channel ``nu = s`` takes the limit from the evanescent side.
    """
    if ch.nu == cfg.s:
        return ReflectionCoeff(_threshold_coeff(cfg))
    if ch.propagating:
        phase = -2.0 * (action_xi(cfg, ch) + omega(cfg, ch))
        return ReflectionCoeff(complex(math.cos(phase), math.sin(phase)))
    return ReflectionCoeff(_evanescent_coeff(cfg, ch.nu))


def wkb_s_matrix(cfg: ScatterConfig, ch: Channel) -> complex:
    """Outgoing/incoming ratio implied by the WKB radial function.

    Normalised so that a free channel gives 1.  Propagating channels carry the
    extra ``exp(-i pi/2)`` of the reflected wave, giving ``-i C_n``; evanescent
    channels give ``1 - i C_n``.  Both have unit modulus.
    """
    c = reflection_coeff(cfg, ch).value
    if ch.propagating and ch.nu != cfg.s:
        return -1j * c
    return 1.0 - 1j * c


def wkb_phase_shift(cfg: ScatterConfig, ch: Channel) -> float:
    """WKB phase shift ``mu sgn(n-mu) pi/2 - xi_n - pi/4``."""
    if not ch.propagating:
        raise DomainError("the WKB phase shift is defined for propagating channels only")
    sg = sgn((ch.n - cfg.mu_int) - cfg.mu_frac)
    return 0.5 * cfg.mu * sg * math.pi - action_xi(cfg, ch) - 0.25 * math.pi


def quasiclassical_ratio(cfg: ScatterConfig, ch: Channel, x: float) -> float:
    """Left-hand side of the WKB validity criterion, ``s^2 x^2 / |s^2 x^2 - nu^2|^{3/2}``."""
    z2 = (cfg.s * x) ** 2
    gap = abs(z2 - ch.nu * ch.nu)
    if gap == 0.0:
        return math.inf
    return z2 / gap ** 1.5


def is_quasiclassical(cfg: ScatterConfig, ch: Channel, x: float, threshold: float = 0.1) -> bool:
    return quasiclassical_ratio(cfg, ch, x) < threshold


# -- truncated Taylor series helpers for the WKB recursion -------------------

def _smul(a, b):
    k = len(a)
    return np.array([sum(a[i] * b[j - i] for i in range(j + 1)) for j in range(k)])


def _sinv(a):
    k = len(a)
    out = np.zeros(k)
    out[0] = 1.0 / a[0]
    for j in range(1, k):
        out[j] = -sum(a[i] * out[j - i] for i in range(1, j + 1)) / a[0]
    return out


def _ssqrt(a):
    k = len(a)
    out = np.zeros(k)
    out[0] = math.sqrt(a[0])
    for j in range(1, k):
        acc = a[j] - sum(out[i] * out[j - i] for i in range(1, j))
        out[j] = acc / (2.0 * out[0])
    return out


def _sderiv(a):
    # coefficients of d/dh, dropping the last order
    k = len(a)
    out = np.zeros(k)
    out[:-1] = [(j + 1) * a[j + 1] for j in range(k - 1)]
    return out


def wkb_series_terms(cfg: ScatterConfig, ch: Channel, x: float, l_max: int = 2,
                     sign: int = 1) -> list[float]:
    """Derivatives ``d Sigma^(l)/dx`` of the WKB phase series, ``l = 0..l_max``.

    The orders follow the recursion obtained by inserting the expansion in
    powers of ``1/(i s)`` into the Riccati equation::

        2 y0 yL = -s (y_{L-1}' + y_{L-1}/x) - sum_{j=1}^{L-1} y_j y_{L-j}

    Derivatives are carried exactly with truncated Taylor arithmetic about
    ``x``; the result is diagnostic only.
    """
    if not 0 <= l_max <= 4:
        raise ValueError("l_max must lie in 0..4")
    if x <= ch.xt or abs(x - ch.xt) < 1e-3:
        raise DomainError("x must lie strictly inside the allowed region, away from the turning point")
    order = l_max + 1
    s, nu = cfg.s, ch.nu
    # series in h of x + h and of P = sqrt(s^2 - nu^2/(x+h)^2)
    xs = np.zeros(order)
    xs[0] = x
    if order > 1:
        xs[1] = 1.0
    inv_x = _sinv(xs)
    p2 = -nu * nu * _smul(inv_x, inv_x)
    p2[0] += s * s
    ys = [sign * _ssqrt(p2)]
    two_y0_inv = _sinv(2.0 * ys[0])
    for big_l in range(1, l_max + 1):
        prev = ys[big_l - 1]
        rhs = -s * (_sderiv(prev) + _smul(prev, inv_x))
        for j in range(1, big_l):
            rhs = rhs - _smul(ys[j], ys[big_l - j])
        ys.append(_smul(rhs, two_y0_inv))
    return [float(y[0]) for y in ys]
