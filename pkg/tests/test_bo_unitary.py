import math

import numpy as np
import pytest

from optomech import (
    BODomainError,
    BOParams,
    ParameterError,
    branch_weights,
    evolve_covariance,
    log_negativity,
    make_branch,
    propagator,
    weighted_negativity,
)
from optomech.bo_unitary import negativity_curve

import oracles
from conftest import UNITARY_PARAMS


# --- make_branch


def test_branch_zero_is_decoupled(unitary_params):
    branch = make_branch(unitary_params, 0)
    assert branch.u == 1.0
    assert branch.v == 0.0
    assert branch.squeeze_ratio == 0.0
    assert branch.omega0 == pytest.approx(0.5 * unitary_params.omega, abs=1e-15)


def test_branch_fifteen_matches_arithmetic(unitary_params):
    branch = make_branch(unitary_params, 15)
    strength = 15 * (0.01 / 0.4) ** 2
    assert branch.squeeze_strength == strength
    assert branch.squeeze_strength == pytest.approx(9.375e-3, rel=1e-14)
    ratio = 2 * strength * 0.1 / (1.0 - 4 * strength * 0.1)
    assert branch.squeeze_ratio == ratio


def test_branch_negative_photon_difference(unitary_params):
    branch = make_branch(unitary_params, -15)
    assert branch.squeeze_strength == pytest.approx(-9.375e-3, rel=1e-14)
    assert branch.squeeze_ratio < 0
    assert branch.u**2 - branch.v**2 == pytest.approx(1.0, abs=1e-12)
    assert branch.v < 0  # rotation sense follows the sign of the ratio


def test_branch_domain_violation():
    # strong coupling pushes the squeeze ratio past 1/2
    params = BOParams(omega=1.0, g=1.0, lam=0.1)
    with pytest.raises(BODomainError):
        make_branch(params, 100)


def test_branch_vanishing_denominator():
    params = BOParams(omega=1.0, g=1.0, lam=0.25)  # strength = n, 4*N*lam = n
    with pytest.raises(BODomainError):
        make_branch(params, 1)


# --- propagator


def test_propagator_identity_at_t0(unitary_params):
    prop = propagator(make_branch(unitary_params, 15), unitary_params.omega, 0.0)
    assert prop.same == pytest.approx(2.0)
    assert prop.cross == pytest.approx(0.0)
    assert prop.conj_coeff == 0.0


def test_propagator_branch_zero_is_free_rotation(unitary_params):
    omega = unitary_params.omega
    for t in (0.3, 2.0, 11.0):
        prop = propagator(make_branch(unitary_params, 0), omega, t)
        assert prop.same == pytest.approx(2.0 * np.exp(-1j * omega * t), abs=1e-14)
        assert abs(prop.cross) < 1e-14
        assert prop.conj_coeff == pytest.approx(0.0, abs=1e-14)


def test_propagator_against_expm_oracle(unitary_params):
    branch = make_branch(unitary_params, 15)
    prop = propagator(branch, unitary_params.omega, 10.0)
    defect = abs(prop.same) ** 2 + abs(prop.cross) ** 2 - 2 * prop.conj_coeff**2
    assert defect == pytest.approx(4.0, abs=1e-10)
    s_oracle = oracles.transfer_by_expm(
        unitary_params.omega, unitary_params.g, unitary_params.lam, 15, 10.0
    )
    assert np.allclose(prop.transfer_matrix(), s_oracle, atol=1e-10)


def test_propagator_rejects_negative_time(unitary_params):
    with pytest.raises(ParameterError):
        propagator(make_branch(unitary_params, 1), unitary_params.omega, -1.0)


# --- evolve_covariance


def test_initial_covariance_is_thermal(unitary_params):
    branch = make_branch(unitary_params, 15)
    assert np.allclose(
        evolve_covariance(branch, unitary_params, 0.0).matrix, 0.5 * np.eye(4)
    )
    hot = BOParams(**{**UNITARY_PARAMS, "n_thermal": 2.0})
    assert np.allclose(evolve_covariance(branch, hot, 0.0).matrix, 2.5 * np.eye(4))


def test_covariance_matches_fock_space_evolution(unitary_params):
    # brute-force evolution of the branch Hamiltonian in a truncated
    # number basis; weak squeezing keeps the occupation tiny
    from scipy.linalg import expm

    fock = oracles.FockTwoMode(dim=14)
    branch = make_branch(unitary_params, 15)
    k = branch.squeeze_strength * unitary_params.lam
    c, d = fock.c, fock.d
    num = c.T @ c + d.T @ d
    ham = (
        unitary_params.omega * num
        - k * (c @ c + c.T @ c.T + 2 * c.T @ c)
        - k * (d @ d + d.T @ d.T + 2 * d.T @ d)
        + 2 * k * (c + c.T) @ (d + d.T)
    )
    for t in (2.5, 7.0):
        psi = expm(-1j * ham * t) @ fock.vacuum()
        v_fock = fock.covariance(psi)
        v_lib = evolve_covariance(branch, unitary_params, t).matrix
        assert abs(np.linalg.det(v_fock) - np.linalg.det(v_lib)) < 1e-4
        from optomech import symplectic_eigenvalues

        assert np.allclose(
            symplectic_eigenvalues(v_fock), symplectic_eigenvalues(v_lib), atol=1e-4
        )
        assert np.allclose(v_fock, v_lib, atol=1e-4)


def test_covariance_against_expm_oracle_small_branches(unitary_params):
    p = unitary_params
    for n in (-3, -1, 1, 2, 3):
        branch = make_branch(p, n)
        for t in np.linspace(0.0, 20.0, 9)[1:]:
            expected = oracles.covariance_by_expm(p.omega, p.g, p.lam, n, t, 0.0)
            got = evolve_covariance(branch, p, t).matrix
            assert np.max(np.abs(got - expected)) < 1e-8


def test_purity_preserved_for_ground_state_start(unitary_params):
    for n in (1, 15, -9, 40):
        branch = make_branch(unitary_params, n)
        for t in np.linspace(0.0, 50.0, 11):
            v = evolve_covariance(branch, unitary_params, t).matrix
            assert np.linalg.det(v) == pytest.approx(1.0 / 16.0, abs=1e-9)


def test_mirror_exchange_symmetry(unitary_params):
    swap = np.zeros((4, 4))
    swap[0, 2] = swap[1, 3] = swap[2, 0] = swap[3, 1] = 1.0
    branch = make_branch(unitary_params, 15)
    for t in (1.0, 13.7):
        v = evolve_covariance(branch, unitary_params, t).matrix
        assert np.allclose(swap @ v @ swap.T, v, atol=1e-12)


# --- branch_weights


def test_weights_trivial_for_dark_cavities():
    w = branch_weights(0.0, 0.0)
    assert w.table == {0: 1.0}
    assert w.na_max == 0 and w.nb_max == 0


def test_weights_mode_and_mass(unitary_params):
    w = branch_weights(4.0, 1.0)
    mode = max(w.table, key=w.table.get)
    assert abs(mode - 15) <= 1
    assert math.fsum(w.table.values()) == pytest.approx(1.0, abs=1e-9)


def test_weights_match_bessel_series_skellam():
    # generous cutoff makes truncation invisible at the 1e-10 scale
    for alpha_a, alpha_b in ((2.0, 1.5), (4.0, 1.0), (1.2, 0.9)):
        w = branch_weights(alpha_a, alpha_b, cutoff_sigmas=20.0)
        for n, weight in w.items():
            expected = oracles.skellam_pmf(n, alpha_a**2, alpha_b**2)
            assert weight == pytest.approx(expected, abs=1e-10)


def test_weights_reject_small_cutoff():
    with pytest.raises(ParameterError):
        branch_weights(4.0, 1.0, cutoff_sigmas=4.0)


# --- weighted negativity


def test_weighted_negativity_trivial_zeros(unitary_params):
    dark = BOParams(omega=1.0, g=1e-2, lam=1e-1, alpha_a=0.0, alpha_b=0.0)
    assert weighted_negativity(dark, 7.3) == 0.0
    uncoupled = BOParams(omega=1.0, g=0.0, lam=1e-1, alpha_a=4.0, alpha_b=1.0)
    # covariance assembly leaves ~1e-16 of roundoff in the cross block
    assert weighted_negativity(uncoupled, 7.3) == pytest.approx(0.0, abs=1e-12)


def test_curve_consistent_with_per_state_path(unitary_params):
    ts = np.array([0.5, 3.0, 9.0, 21.0])
    curve = negativity_curve(unitary_params, ts)
    weights = branch_weights(unitary_params.alpha_a, unitary_params.alpha_b)
    for k, t in enumerate(ts):
        total = 0.0
        for n, w in weights.items():
            if n == 0:
                continue
            branch = make_branch(unitary_params, n)
            total += w * log_negativity(evolve_covariance(branch, unitary_params, t))
        assert curve[k] == pytest.approx(total, abs=1e-12)
        assert curve[k] == pytest.approx(
            weighted_negativity(unitary_params, float(t)), abs=1e-15
        )


def test_negativity_degrades_with_temperature():
    ts = np.linspace(0.0, 60.0, 241)
    previous = None
    for n_thermal in (0.0, 0.5, 1.0, 2.0, 4.0):
        params = BOParams(**{**UNITARY_PARAMS, "n_thermal": n_thermal})
        curve = negativity_curve(params, ts)
        if previous is not None:
            assert np.all(curve <= previous + 1e-12)
        previous = curve


def test_averaged_state_mode(unitary_params):
    ts = np.linspace(0.0, 30.0, 61)
    curve = negativity_curve(unitary_params, ts, mixture="averaged-state")
    assert np.all(curve >= 0.0)
    assert np.all(np.isfinite(curve))
    with pytest.raises(ParameterError):
        negativity_curve(unitary_params, ts, mixture="bogus")
