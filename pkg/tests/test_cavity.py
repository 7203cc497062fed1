import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpfgate.cavity import (FWHM_TO_SIGMA, CavityParams, EfficiencyChain, conditional_phase,
                            efficiency_budget, phase_accuracy_bandwidth, pulse_phase_statistics,
                            reflection_coefficient, solve_kappa_r)

REF = CavityParams()
SOLVED = solve_kappa_r(REF, 0.67)


def test_empty_perfect_cavity_reflects_minus_one():
    r = reflection_coefficient(CavityParams(kappa_r=2.5), 0.0, coupled=False).r
    assert r == -1


def test_coupled_phase_is_pi_on_resonance():
    dphi = (reflection_coefficient(REF, 0.0, True).phase
            - reflection_coefficient(REF, 0.0, False).phase) % (2 * np.pi)
    assert abs(dphi - np.pi) < 0.01 * np.pi
    assert abs(conditional_phase(REF, 0.0) - np.pi) < 0.01 * np.pi


def test_solved_outcoupling_reproduces_reflectivity():
    assert abs(reflection_coefficient(SOLVED, 0.0, False).reflectivity - 0.67) < 1e-12
    assert SOLVED.kappa / 2 < SOLVED.kappa_r < SOLVED.kappa
    assert abs(REF.cooperativity - 49 / 15) < 1e-12


def test_far_detuned_photon_sees_no_atom():
    ph = conditional_phase(SOLVED, 1e5)
    assert min(ph, 2 * np.pi - ph) < 1e-3


def test_deviation_grows_with_detuning():
    d = np.linspace(0, 1, 201)
    dev = np.abs(conditional_phase(SOLVED, d) - np.pi)
    assert np.all(np.diff(dev) > 0)


@settings(max_examples=60, deadline=None)
@given(g=st.floats(0.1, 20), kappa=st.floats(0.1, 10), frac=st.floats(0.01, 1.0),
       gamma=st.floats(0.1, 10), delta=st.floats(-50, 50))
def test_passive_and_symmetric(g, kappa, frac, gamma, delta):
    p = CavityParams(g, kappa, kappa * frac, gamma)
    for coupled in (True, False):
        assert reflection_coefficient(p, delta, coupled).reflectivity <= 1 + 1e-12
    s = conditional_phase(p, delta) + conditional_phase(p, -delta)
    # mod 2pi to absorb the branch cut when both phases sit at 0
    assert min(abs(s - 2 * np.pi), abs(s), abs(s - 4 * np.pi)) < 1e-9


def test_bandwidth_near_reference_value():
    bw = phase_accuracy_bandwidth(SOLVED, 0.1 * np.pi)
    assert 0.5 <= bw <= 0.9
    assert phase_accuracy_bandwidth(SOLVED, 0.05 * np.pi) < bw


def test_bandwidth_edges_sit_on_tolerance():
    tol = 0.1 * np.pi
    half = phase_accuracy_bandwidth(SOLVED, tol, resolution=1e-6) / 2
    assert abs(abs(conditional_phase(SOLVED, half) - np.pi) - tol) < 1e-4


def test_bandwidth_wide_tolerance_covers_span():
    assert phase_accuracy_bandwidth(SOLVED, np.pi - 1e-9, span=5.0) == 10.0
    with pytest.raises(ValueError):
        phase_accuracy_bandwidth(SOLVED, 0.0)


def test_pulse_statistics_limits_and_monotonic():
    mean, std = pulse_phase_statistics(SOLVED, 1e-6)
    assert abs(mean - np.pi) < 1e-9 and std < 1e-6
    s1 = pulse_phase_statistics(SOLVED, 0.7)[1]
    s2 = pulse_phase_statistics(SOLVED, 1.4)[1]
    assert s2 > s1 > 0


def test_pulse_statistics_against_monte_carlo():
    mean, std = pulse_phase_statistics(SOLVED, 0.7)
    rng = np.random.default_rng(11)
    ph = conditional_phase(SOLVED, 0.7 * FWHM_TO_SIGMA * rng.standard_normal(1_000_000))
    assert abs(ph.mean() - mean) < 1e-3
    assert abs(ph.std() - std) < 1e-3


def test_efficiency_chain():
    per, pair = efficiency_budget(EfficiencyChain())
    assert abs(per - 0.219) < 0.005 and abs(pair - 0.048) < 0.002
    assert efficiency_budget(EfficiencyChain(1, 1, 1)) == (1, 1)
    assert efficiency_budget(EfficiencyChain(t_fiber=0)) == (0, 0)
    with pytest.raises(ValueError):
        EfficiencyChain(t_fiber=1.2)


def test_parameter_validation():
    with pytest.raises(ValueError):
        CavityParams(kappa_r=3.0)
    with pytest.raises(ValueError):
        CavityParams(g=-1)
