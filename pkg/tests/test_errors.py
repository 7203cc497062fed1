import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpfgate import config as cfgmod
from cpfgate.errors import (EFFECTS, ErrorParams, average_fidelity, dark_count_channel,
                            dephase_channel, detection_error, fidelity_budget, isolate,
                            mode_mismatch_branch, modified_cz, optics_channel, prep_error_channel,
                            reflection_channel, two_photon_branch)
from cpfgate.qcore import DensityMatrix, embed, ket, partial_trace, tensor, trace_distance
from conftest import random_density

seeds = st.integers(0, 2**32 - 1)


def joint(rng):
    return random_density(rng, 8, dims=(2, 2, 2))


def test_modified_cz_entries():
    assert np.allclose(modified_cz(0, 0).matrix, np.diag([-1, 1, 1, 1]))
    assert abs(modified_cz(0.15 * np.pi, 0).matrix[0, 0] - np.exp(1.15j * np.pi)) < 1e-15


@settings(max_examples=50, deadline=None)
@given(st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi), st.sampled_from([1, 2]))
def test_modified_cz_unitary(dphi, xi, k):
    U = modified_cz(dphi, xi, k).matrix
    assert np.max(np.abs(U.conj().T @ U - np.eye(4))) < 1e-12


JOINT_CHANNELS = [
    lambda r, x: prep_error_channel(r, x),
    lambda r, x: dephase_channel(r, 1 - x),
    lambda r, x: reflection_channel(r, 1, dphi=x, xi=x),
    lambda r, x: mode_mismatch_branch(r, x, 2),
    lambda r, x: two_photon_branch(r, x, 1),
]
PHOTON_CHANNELS = [dark_count_channel, optics_channel]


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0, 1))
def test_channels_trace_preserving_and_positive(seed, x):
    rng = np.random.default_rng(seed)
    rho = joint(rng)
    for ch in JOINT_CHANNELS:
        out = ch(rho, x)
        assert abs(np.trace(out.matrix) - 1) < 1e-12
        assert np.linalg.eigvalsh(out.matrix)[0] > -1e-10
    rho2 = random_density(rng, 4, dims=(2, 2))
    for ch in PHOTON_CHANNELS:
        out = ch(rho2, x)
        assert abs(np.trace(out.matrix) - 1) < 1e-12
        assert np.linalg.eigvalsh(out.matrix)[0] > -1e-10


def test_zero_strength_is_identity():
    rng = np.random.default_rng(4)
    rho = joint(rng)
    for ch in (JOINT_CHANNELS[0], JOINT_CHANNELS[1]):
        assert np.max(np.abs(ch(rho, 0.0).matrix - rho.matrix)) < 1e-14
    rho2 = random_density(rng, 4, dims=(2, 2))
    for ch in PHOTON_CHANNELS:
        assert np.max(np.abs(ch(rho2, 0.0).matrix - rho2.matrix)) < 1e-14
    ideal = embed(modified_cz(), [0, 1], (2, 2, 2)).matrix
    ref = ideal @ rho.matrix @ ideal.conj().T
    for out in (mode_mismatch_branch(rho, 0.0), two_photon_branch(rho, 0.0), reflection_channel(rho, 1)):
        assert np.max(np.abs(out.matrix - ref)) < 1e-14


def test_prep_error_populations():
    up = tensor(ket("u").projector(), ket("D", "D").projector())
    assert abs(partial_trace(prep_error_channel(up, 1.0), [0]).matrix[1, 1] - 1) < 1e-14
    assert abs(partial_trace(prep_error_channel(up, 0.02), [0]).matrix[0, 0] - 0.98) < 1e-14


def test_dephasing_scales_coherences():
    plus = DensityMatrix(np.full((2, 2), 0.5))
    rho = tensor(plus, ket("R", "L").projector())
    assert np.allclose(partial_trace(dephase_channel(rho, 0.0), [0]).matrix, np.eye(2) / 2)
    out = dephase_channel(rho, 0.9).matrix
    assert np.allclose(out[:4, 4:], 0.9 * rho.matrix[:4, 4:])
    assert np.allclose(out[:4, :4], rho.matrix[:4, :4])


def test_dark_counts_limits():
    rho = ket("D", "D").projector()
    assert np.allclose(dark_count_channel(rho, 1.0).matrix, np.eye(4) / 4)


def test_mode_mismatch_full_is_identity():
    rng = np.random.default_rng(8)
    rho = joint(rng)
    assert trace_distance(mode_mismatch_branch(rho, 1.0), rho) < 1e-14


def test_two_photon_full_weight_cancels_phase():
    # 2(pi + 0) is a full turn, so the coupled component is left alone
    rho = joint(np.random.default_rng(9))
    assert trace_distance(two_photon_branch(rho, 1.0), rho) < 1e-14


def test_detection_error_swaps_blocks():
    a, b = np.diag([1.0, 0, 0, 0]) / 2, np.diag([0, 1.0, 0, 0]) / 2
    up, down = detection_error((a, b), 0.0)
    assert np.array_equal(up, a) and np.array_equal(down, b)
    up, down = detection_error((a, b), 0.5)
    assert np.allclose(up, down)
    with pytest.raises(ValueError):
        detection_error((a, b), 1.2)


def test_isolate_switches_only_one_effect():
    base = cfgmod.reference_config().errors
    zero = ErrorParams.ideal()
    for effect in EFFECTS:
        e = isolate(base, effect)
        changed = [k for k in ("sigma_dphi", "xi", "p_prep", "p_det", "p_dark", "p_mode", "dephase",
                               "multi_photon_weight", "p_optics") if getattr(e, k) != getattr(zero, k)]
        assert changed, effect
    with pytest.raises(ValueError):
        isolate(base, "gremlins")


GRID = {
    "sigma_dphi": [0.0, 0.05, 0.1, 0.2, 0.4],
    "xi": [0.0, 0.05, 0.1, 0.2, 0.4],
    "p_prep": [0.0, 0.02, 0.05, 0.1],
    "p_det": [0.0, 0.02, 0.05, 0.1],
    "p_dark": [0.0, 0.02, 0.05, 0.1],
    "p_mode": [0.0, 0.02, 0.05, 0.1],
    "multi_photon_weight": [0.0, 0.05, 0.1, 0.2],
    "p_optics": [0.0, 0.02, 0.05, 0.1],
    "dephase": [1.0, 0.98, 0.95, 0.9],
}


@pytest.mark.parametrize("name", sorted(GRID))
def test_budget_monotone(name):
    f = [average_fidelity(ErrorParams.ideal().replace(**{name: v}), nodes=8) for v in GRID[name]]
    assert all(b <= a + 1e-12 for a, b in zip(f, f[1:]))


def test_budget_sorted_and_empty_when_ideal():
    assert fidelity_budget(ErrorParams.ideal()) == []
    entries = fidelity_budget(cfgmod.reference_config().errors, nodes=8)
    red = [b.reduction for b in entries]
    assert red == sorted(red, reverse=True)
    assert {b.effect for b in entries} == set(EFFECTS)


def test_mode_mismatch_costs_less_than_its_share():
    red = 100 * (1 - average_fidelity(ErrorParams.ideal().replace(p_mode=0.01)))
    assert 0 < red < 1


def test_persisted_calibration_is_reproducible():
    stored = cfgmod.reference_config()
    fresh = cfgmod.build_reference_config(stored.loss_convention, stored.errors.correlated_dphi,
                                      stored.nodes)
    for k in ("sigma_dphi", "sigma_bandwidth", "xi", "p_prep", "p_det", "p_dark", "p_mode",
              "dephase", "multi_photon_weight", "p_optics"):
        assert getattr(fresh.errors, k) == pytest.approx(getattr(stored.errors, k), rel=1e-8, abs=1e-12)
    assert fresh.cavity.kappa_r == pytest.approx(stored.cavity.kappa_r, rel=1e-12)
    budget = {b.effect: b.reduction for b in fidelity_budget(stored.errors)}
    assert budget["dark counts"] == pytest.approx(2.0, abs=1e-6)
    assert budget["other optics"] == pytest.approx(2.0, abs=1e-6)


def test_parameter_validation():
    with pytest.raises(ValueError):
        ErrorParams(p_det=1.5)
    with pytest.raises(ValueError):
        ErrorParams(sigma_dphi=0.1, sigma_bandwidth=0.2)
