"""Partial-wave scattering of a charged particle off an impenetrable magnetic vortex.

Everything is dimensionless: lengths in units of the tube radius, ``hbar = 1``.
The main entry points are :class:`ScatterConfig`, the amplitude functions in
:mod:`vortexscatter.amplitudes`, the cross sections in :mod:`vortexscatter.xsec`
and the exact radial solver in :mod:`vortexscatter.oracle`.
"""

from .channel import (
    Channel,
    DomainError,
    Regime,
    ScatterConfig,
    make_channel,
    reflection_coeff,
    wkb_phase_shift,
    wkb_s_matrix,
)
from .amplitudes import amplitude_table, f0_amplitude, f1_closed, f1_direct, f2_closed, f2_direct, f3_direct
from .xsec import dsigma_diffraction, dsigma_reflection, dsigma_total, figure1_curve
from .classical import deflection_angle, trajectory
from .oracle import compare_wkb, exact_amplitude, solve_channel

__version__ = "0.1.0"

__all__ = [
    "Channel", "DomainError", "Regime", "ScatterConfig", "make_channel", "reflection_coeff",
    "wkb_phase_shift", "wkb_s_matrix", "amplitude_table", "f0_amplitude", "f1_closed", "f1_direct",
    "f2_closed", "f2_direct", "f3_direct", "dsigma_diffraction", "dsigma_reflection", "dsigma_total",
    "figure1_curve", "deflection_angle", "trajectory", "compare_wkb", "exact_amplitude", "solve_channel",
]
