"""
Exact partial-wave solution of the radial problem with the Robin boundary.

Each channel's radial equation ``u'' + u'/x + (s^2 - nu^2/x^2) u = 0`` is
integrated outward from the tube surface ``x = 1``, starting from data that
satisfy ``sin(rho pi) x u' + cos(rho pi) u = 0`` exactly.  Beyond the turning
point the numerical solution is projected onto incoming and outgoing Hankel
waves, giving the channel S-matrix element ``S_n`` normalised so that a free
channel (regular at the origin, no tube) has ``S_n = 1``.

This is the ground truth against which the WKB reflection phases and the
asymptotic cross sections are checked.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .amplitudes import _partial_wave_sum, f0_amplitude
from .channel import ScatterConfig, is_quasiclassical, make_channel, wkb_s_matrix

__all__ = [
    "OracleError",
    "ExactChannelSolution",
    "WkbComparison",
    "solve_channel",
    "solve_channels",
    "exact_amplitude",
    "exact_scattered_amplitude",
    "compare_wkb",
]

RTOL = 1e-12
MATCH_FACTOR = 2.0


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExactChannelSolution:
    """Exact S-matrix element of one channel.

    ``delta`` is the phase shift with ``S = exp(2 i delta)``, ``delta`` in
    ``(-pi/2, pi/2]``.  ``residual`` is the spread of ``S`` between two
    matching radii a quarter wavelength apart.
    """

    n: int
    nu: float
    S: complex
    delta: float
    nfev: int
    residual: float
    match_radius: float


def _hankel_pair(nu, z):
    return (special.hankel1(nu, z), special.hankel2(nu, z),
            special.h1vp(nu, z), special.h2vp(nu, z))


def _project(nu, s, x, u, du):
    # u = A H2(s x) + B H1(s x), u' = s (A H2' + B H1');  S = B / A
    h1, h2, d1, d2 = _hankel_pair(nu, s * x)
    det = h2 * d1 - h1 * d2
    a = (u * d1 - du / s * h1) / det
    b = (h2 * du / s - d2 * u) / det
    return b / a


def solve_channels(cfg: ScatterConfig, ns, match_radius_factor: float = MATCH_FACTOR,
                   rtol: float = RTOL) -> list[ExactChannelSolution]:
    """Solve several channels in one vectorised integration.

    All channels share the matching radius ``factor * max(1, max nu / s)``,
    which is at least the per-channel radius.  The equation is integrated for
    ``w = sqrt(x) u``, ``w'' = -(s^2 - (nu^2 - 1/4)/x^2) w``, with an embedded
    8th-order Runge-Kutta pair.
    """
    if match_radius_factor <= 1.0:
        raise ValueError("match_radius_factor must exceed 1")
    ns = [int(n) for n in ns]
    if not ns:
        return []
    s = cfg.s
    nus = np.array([make_channel(cfg, n).nu for n in ns])
    x_m = match_radius_factor * max(1.0, float(nus.max()) / s)
    x_q = x_m - 0.5 * math.pi / s
    if x_q <= max(1.0, float(nus.max()) / s):
        x_q = 0.5 * (x_m + max(1.0, float(nus.max()) / s))
    c2 = nus * nus - 0.25
    k = len(ns)

    def rhs(x, y):
        w, dw = y[:k], y[k:]
        return np.concatenate([dw, -(s * s - c2 / (x * x)) * w])

    sn, cs = cfg.sin_rho, cfg.cos_rho
    w0 = np.full(k, sn)
    dw0 = np.full(k, -cs + 0.5 * sn)
    sol = integrate.solve_ivp(rhs, (1.0, x_m), np.concatenate([w0, dw0]), method="DOP853",
                              rtol=rtol, atol=1e-30, t_eval=[x_q, x_m])
    if sol.status != 0:
        raise OracleError(f"radial integration failed: {sol.message}")

    out = []
    for j, (n, nu) in enumerate(zip(ns, nus)):
        vals = []
        for col, x in enumerate((x_q, x_m)):
            w, dw = sol.y[j, col], sol.y[k + j, col]
            rx = math.sqrt(x)
            u = w / rx
            du = dw / rx - 0.5 * w / (x * rx)
            vals.append(_project(nu, s, x, u, du))
        S = complex(vals[1])
        residual = abs(vals[1] - vals[0])
        delta = 0.5 * math.atan2(S.imag, S.real)
        out.append(ExactChannelSolution(n=n, nu=float(nu), S=S, delta=delta, nfev=int(sol.nfev),
                                        residual=float(residual), match_radius=x_m))
    return out


def solve_channel(cfg: ScatterConfig, n: int, match_radius_factor: float = MATCH_FACTOR,
                  rtol: float = RTOL) -> ExactChannelSolution:
    """Exact S-matrix element of channel ``n``; see :func:`solve_channels`."""
    return solve_channels(cfg, [n], match_radius_factor, rtol)[0]


def _channel_set(cfg, nu_max):
    lo = math.ceil(cfg.mu - nu_max)
    hi = math.floor(cfg.mu + nu_max)
    return list(range(lo, hi + 1))


def _default_nu_max(s):
    return s + 10.0 * s ** (1.0 / 3.0) + 5.0


def exact_scattered_amplitude(cfg: ScatterConfig, phi, nu_max: float | None = None,
                              solutions: list[ExactChannelSolution] | None = None):
    """Tube-induced part of the exact amplitude, ``-i/sqrt(2 pi s) sum e^{i n phi} e^{i mu pi sgn} (S_n - 1)``.

    This is the exact counterpart of ``f1 + f2 + f3``.
    """
    s = cfg.s
    nu_max = _default_nu_max(s) if nu_max is None else nu_max
    if nu_max < s + 10 * s ** (1.0 / 3.0):
        raise ValueError("nu_max must cover the transition region, nu_max >= s + 10 s^(1/3)")
    if solutions is None:
        solutions = solve_channels(cfg, _channel_set(cfg, nu_max))
    sols = sorted(solutions, key=lambda r: (r.nu, r.n))
    ns = np.array([r.n for r in sols], dtype=np.int64)
    weights = np.array([r.S - 1.0 for r in sols], dtype=complex)
    phis = np.atleast_1d(np.asarray(phi, dtype=float))
    total = _partial_wave_sum(cfg, ns, weights, phis)
    tail = _partial_wave_sum(cfg, ns[-10:], weights[-10:], phis)
    scale = np.maximum(np.abs(total), 1e-300)
    if np.any(np.abs(tail) > 1e-8 * scale):
        warnings.warn("exact amplitude may be truncated: last channels contribute > 1e-8", RuntimeWarning)
    vals = -1j / math.sqrt(2 * math.pi * s) * total
    return complex(vals[0]) if np.ndim(phi) == 0 else vals


def exact_amplitude(cfg: ScatterConfig, phi, nu_max: float | None = None,
                    solutions: list[ExactChannelSolution] | None = None):
    """Exact total amplitude ``f0 + f_tube`` relative to the distorted incident wave.

    ``phi = 0`` is excluded because of the point-vortex part.
    """
    return f0_amplitude(cfg, phi) + exact_scattered_amplitude(cfg, phi, nu_max, solutions)


@dataclass
class WkbComparison:
    """Per-channel phase error ``|arg(S_exact / S_wkb)|`` and summary statistics."""

    cfg: ScatterConfig
    ns: np.ndarray
    nus: np.ndarray
    errors: np.ndarray
    flagged: np.ndarray
    max_error: float = field(init=False)
    max_channel: int = field(init=False)
    mean_error: float = field(init=False)
    ratio: float | None = None
    order_ok: bool | None = None

    def __post_init__(self):
        i = int(np.argmax(self.errors))
        self.max_error = float(self.errors[i])
        self.max_channel = int(self.ns[i])
        self.mean_error = float(np.mean(self.errors))


def _phase_errors(cfg, ns):
    sols = solve_channels(cfg, ns)
    errs, flags, nus = [], [], []
    for r in sols:
        ch = make_channel(cfg, r.n)
        ratio = r.S / wkb_s_matrix(cfg, ch)
        errs.append(abs(math.atan2(ratio.imag, ratio.real)))
        flags.append(not is_quasiclassical(cfg, ch, 1.0))
        nus.append(ch.nu)
    return np.array(nus), np.array(errs), np.array(flags)


def _default_channels(cfg, nu_frac=0.9):
    lo = math.ceil(cfg.mu - nu_frac * cfg.s)
    hi = math.floor(cfg.mu + nu_frac * cfg.s)
    return list(range(lo, hi + 1))


def compare_wkb(cfg: ScatterConfig, channels=None, check_convergence: bool = True,
                band: tuple[float, float] = (0.3, 0.7)) -> WkbComparison:
    """Compare WKB and exact channel phases.

    With ``check_convergence`` the comparison is repeated at ``2 s`` over the
    channels with ``nu <= 0.9 s`` and the ratio of maximal errors is stored in
    ``ratio``; ``order_ok`` is true when it lies inside ``band``.
    Channels failing the quasiclassical criterion at the surface are flagged.
    """
    ns = _default_channels(cfg) if channels is None else [int(n) for n in channels]
    nus, errs, flags = _phase_errors(cfg, ns)
    rep = WkbComparison(cfg=cfg, ns=np.array(ns), nus=nus, errors=errs, flagged=flags)
    if check_convergence:
        fine = cfg.with_(s=2 * cfg.s)
        _, errs2, _ = _phase_errors(fine, _default_channels(fine))
        keep = nus <= 0.9 * cfg.s
        coarse_max = float(errs[keep].max()) if np.any(keep) else float(errs.max())
        rep.ratio = float(errs2.max()) / coarse_max
        rep.order_ok = band[0] <= rep.ratio <= band[1]
    return rep
