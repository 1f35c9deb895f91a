import math
import warnings

import numpy as np
import pytest
from scipy import special

from vortexscatter import oracle, xsec
from vortexscatter.amplitudes import f0_amplitude
from vortexscatter.channel import ScatterConfig, make_channel, wkb_s_matrix


def hankel_s_matrix(cfg, nu):
    """Closed-form Robin S-matrix, free channel normalised to 1."""
    s, sn, cs = cfg.s, cfg.sin_rho, cfg.cos_rho
    top = sn * s * special.h2vp(nu, s) + cs * special.hankel2(nu, s)
    bot = sn * s * special.h1vp(nu, s) + cs * special.hankel1(nu, s)
    return -top / bot


@pytest.mark.parametrize("rho", [0.0, 0.25, 0.5, 0.8])
def test_matches_bessel_closed_form(rho):
    cfg = ScatterConfig(30.0, 0.3, rho)
    ns = list(range(-45, 46, 5))
    for sol in oracle.solve_channels(cfg, ns):
        assert abs(sol.S - hankel_s_matrix(cfg, sol.nu)) < 1e-8


@pytest.mark.parametrize("rho", [0.0, 0.25, 0.5])
def test_unitarity_and_residual(rho):
    cfg = ScatterConfig(80.0, 0.4, rho)
    for sol in oracle.solve_channels(cfg, range(-120, 121)):
        assert abs(abs(sol.S) - 1.0) < 1e-8
        assert sol.residual < 1e-8
        assert -math.pi / 2 < sol.delta <= math.pi / 2


def test_dirichlet_zero_order_phase():
    errs = []
    for s in (50.0, 100.0, 200.0):
        sol = oracle.solve_channel(ScatterConfig(s), 0)
        target = -2 * s - math.pi / 2
        errs.append(abs(math.remainder(math.atan2(sol.S.imag, sol.S.real) - target, 2 * math.pi)))
    assert errs[0] < 0.05
    assert errs[2] < 0.6 * errs[0]


def test_deep_evanescent_channel_is_free():
    cfg = ScatterConfig(20.0, 0.0, 0.5)
    for n in (40, 60):
        v = n / cfg.s
        bound = math.exp(2 * cfg.s * (math.sqrt(v * v - 1) - v * math.acosh(v)))
        assert abs(oracle.solve_channel(cfg, n).S - 1.0) <= 4 * bound + 1e-10


def test_tolerance_and_radius_independence():
    cfg = ScatterConfig(60.0, 0.2, 0.25)
    ns = [0, 17, 40, 58, 63, 75]
    base = oracle.solve_channels(cfg, ns)
    finer = oracle.solve_channels(cfg, ns, rtol=oracle.RTOL / 2)
    wider = oracle.solve_channels(cfg, ns, match_radius_factor=2 * oracle.MATCH_FACTOR)
    for a, b, c in zip(base, finer, wider):
        assert abs(a.delta - b.delta) < 1e-8
        assert abs(a.S - c.S) < 1e-8


def test_rejects_bad_match_radius():
    with pytest.raises(ValueError):
        oracle.solve_channel(ScatterConfig(10.0), 0, match_radius_factor=1.0)


class TestCompare:
    def test_dirichlet_order(self):
        rep = oracle.compare_wkb(ScatterConfig(100.0))
        assert rep.order_ok
        assert 0.3 <= rep.ratio <= 0.7
        assert rep.max_error == rep.errors[list(rep.ns).index(rep.max_channel)]

    def test_robin_quarter_order(self):
        rep = oracle.compare_wkb(ScatterConfig(100.0, 0.0, 0.25))
        assert 0.3 <= rep.ratio <= 0.7

    def test_neumann_near_threshold_flagged(self):
        cfg = ScatterConfig(100.0, 0.0, 0.5)
        rep = oracle.compare_wkb(cfg, channels=range(-99, 100), check_convergence=False)
        near = np.abs(rep.nus - cfg.s) < 2
        assert np.all(rep.flagged[near])
        assert not np.any(rep.flagged[rep.nus < 0.5 * cfg.s])

    def test_wkb_s_matrix_is_the_comparand(self):
        cfg = ScatterConfig(100.0)
        sol = oracle.solve_channel(cfg, 50)
        ratio = sol.S / wkb_s_matrix(cfg, make_channel(cfg, 50))
        assert abs(math.atan2(ratio.imag, ratio.real)) < 0.05


class TestAmplitude:
    def test_flux_periodicity(self):
        cfg = ScatterConfig(40.0, 0.3)
        phis = np.linspace(0.2, 3.0, 15)
        a = np.abs(oracle.exact_amplitude(cfg, phis)) ** 2
        b = np.abs(oracle.exact_amplitude(cfg.with_(mu=1.3), phis)) ** 2
        assert np.max(np.abs(a - b)) < 1e-10

    def test_reflection_window_agrees_with_asymptotics(self):
        cfg = ScatterConfig(100.0, 0.3, 0.0)
        phis = np.linspace(math.pi / 4, 3 * math.pi / 4, 33)
        exact = np.abs(oracle.exact_amplitude(cfg, phis)) ** 2
        asym = xsec.dsigma_total(cfg, phis)
        assert abs(exact.mean() - asym.mean()) / asym.mean() < 0.05

    def test_small_tube_approaches_point_vortex(self):
        phis = np.linspace(0.5, 2.5, 9)
        devs = []
        for s in (1e-1, 1e-2, 1e-3):
            cfg = ScatterConfig(s, 0.3)
            exact = np.abs(oracle.exact_amplitude(cfg, phis, nu_max=40.0)) ** 2
            point = np.abs(f0_amplitude(cfg, phis)) ** 2
            devs.append(np.max(np.abs(exact - point) / point))
        assert devs[0] > devs[1] > devs[2]
        assert devs[2] < 0.1

    def test_no_truncation_warning_by_default(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            oracle.exact_scattered_amplitude(ScatterConfig(60.0, 0.2, 0.5), np.array([0.5, 1.5]))

    def test_channel_cutoff_guard(self):
        with pytest.raises(ValueError):
            oracle.exact_scattered_amplitude(ScatterConfig(100.0), 1.0, nu_max=100.0)
