"""
Test script for spectral analysis.

This script tests rational angles, periods, decay constants, horizons and
the convergence of trajectories to their limit cycles.
"""

import math

import numpy as np
import pytest

from src.channels import (
    aklt_channel, amplitude_damping, basis_state, cycle_permutation_chain, cycle_permutation_qmc,
    identity_channel, not_gate, pauli_x_channel, phase_rotation, plus_state, random_channel,
    random_density, random_distribution, random_stochastic,
)
from src.config import Tolerances
from src.errors import InputError, SpectralError
from src.numerics import devectorize, spectral_norm, vectorize
from src.spectral import (
    DecayProfile, RationalAngle, analyze, contributing_peripherals, horizon, limit_states, rational_angle,
    stability_report,
)
from src.superop import QMC, embed_classical_mc


def stable_corpus():
    """Periodically stable chains with initial states, used by the convergence tests."""
    rng = np.random.default_rng(1234)
    corpus = [
        QMC(aklt_channel(), basis_state(2, 0)),
        QMC(amplitude_damping(0.5), basis_state(2, 1)),
        QMC(amplitude_damping(0.2), plus_state()),
        QMC(not_gate(), basis_state(2, 0)),
        QMC(pauli_x_channel(), plus_state()),
        QMC(identity_channel(2), plus_state()),
    ]
    corpus += [cycle_permutation_qmc(k) for k in (2, 3)]
    for _ in range(6):
        P = random_stochastic(3, rng)
        corpus.append(embed_classical_mc(P, random_distribution(3, rng)))
    for _ in range(2):
        P = cycle_permutation_chain(3) @ random_stochastic(3, rng)
        P = 0.5 * P + 0.5 * cycle_permutation_chain(3)
        corpus.append(embed_classical_mc(P, random_distribution(3, rng)))
    for d in (2, 3):
        for n_kraus in (2, 3):
            corpus.append(QMC(random_channel(d, n_kraus, rng), random_density(d, rng)))
    return corpus


def test_rational_angle_roots_of_unity():
    assert rational_angle(1 + 0j, 4) == RationalAngle(0, 1)
    assert rational_angle(-1 + 0j, 4) == RationalAngle(1, 2)
    assert rational_angle(1j, 4) == RationalAngle(1, 4)
    assert rational_angle(-1j, 4) == RationalAngle(3, 4)
    assert str(RationalAngle(3, 4)) == "3/4"


def test_rational_angle_rejects_irrational():
    z = np.exp(2j * np.pi / math.sqrt(2))
    assert rational_angle(z, 4) is None
    assert rational_angle(np.exp(2j * np.pi / 7), 6) is None
    assert rational_angle(np.exp(2j * np.pi / 7), 7) == RationalAngle(1, 7)


def test_rational_angle_validation():
    with pytest.raises(ValueError):
        RationalAngle(2, 4)


def test_cycle_permutation_periods():
    for k in range(1, 7):
        report = stability_report(cycle_permutation_qmc(k))
        assert report.stable
        assert report.period == k


def test_phase_rotation_periods():
    for q in range(2, 13):
        g = QMC(phase_rotation(1 / q), plus_state())
        report = stability_report(g, qmax=12)
        assert report.stable
        assert report.period == q


def test_phase_rotation_irrational_is_unstable():
    g = QMC(phase_rotation(1 / math.sqrt(2)), plus_state())
    report = stability_report(g)
    assert not report.stable
    assert report.period is None
    assert len(report.offending) == 2
    for z in report.offending:
        assert np.isclose(abs(z), 1.0)


def test_non_contributing_peripherals_do_not_count():
    # a diagonal state never sees the rotating coherences
    g = QMC(phase_rotation(1 / math.sqrt(2)), basis_state(2, 0))
    report = stability_report(g)
    assert report.stable
    assert report.period == 1


def test_aklt_spectrum():
    analysis = analyze(QMC(aklt_channel()))
    assert len(analysis.peripheral) == 1
    assert np.isclose(analysis.peripheral.eigenvalues[0], 1.0)
    assert analysis.stability.period == 1
    assert np.isclose(analysis.decay.mu, 1 / 3)
    assert analysis.decay.d_mu == 1


def test_not_channel_spectrum():
    analysis = analyze(QMC(not_gate(), basis_state(2, 0)))
    angles = sorted(str(e.angle) for e in analysis.peripheral.entries)
    assert angles == ["0/1", "1/2"]
    assert analysis.stability.period == 2
    assert analysis.decay.mu == 0.0


def test_identity_channel_minimal_horizon():
    analysis = analyze(QMC(identity_channel(2), basis_state(2, 0)))
    assert analysis.decay.mu == 0.0
    assert analysis.horizon(0.01) == 1


def test_analysis_to_dict():
    data = analyze(QMC(aklt_channel())).to_dict()
    for key in ("eigenvalues", "peripheral", "mu", "d_mu", "C", "qmax", "stable", "period", "offending"):
        assert key in data
    assert data["peripheral"][0]["angle"] == "0/1"
    assert data["qmax"] == 4


def test_horizon_values():
    dp = DecayProfile(mu=0.5, d_mu=1, C=1.0, alpha_bound=1.0)
    assert horizon(dp, 1, 0.1) == 4
    assert horizon(dp, 2, 0.1) == 4
    assert horizon(dp, 3, 0.1) == 6
    assert horizon(DecayProfile(mu=0.0, d_mu=1, C=1.0, alpha_bound=1.0), 3, 0.1) == 3


def test_horizon_with_polynomial_factor():
    dp = DecayProfile(mu=0.5, d_mu=2, C=1.0, alpha_bound=1.0)
    assert horizon(dp, 1, 0.1) == 6


def test_horizon_is_monotone_in_epsilon():
    dp = DecayProfile(mu=0.9, d_mu=1, C=3.0, alpha_bound=3.0)
    values = [horizon(dp, 2, eps) for eps in (0.5, 0.25, 0.125, 0.0625)]
    assert values == sorted(values)
    assert all(k % 2 == 0 for k in values)


def test_horizon_errors():
    dp = DecayProfile(mu=0.99, d_mu=1, C=1.0, alpha_bound=1.0)
    with pytest.raises(SpectralError):
        horizon(dp, 1, 1e-3, Tolerances(max_horizon=100))
    with pytest.raises(InputError):
        horizon(dp, 1, 0.0)


def test_not_gate_limit_states():
    g = QMC(not_gate(), basis_state(2, 0))
    etas = limit_states(g, 2)
    assert np.allclose(etas[0].mat, np.diag([1, 0]), atol=1e-9)
    assert np.allclose(etas[1].mat, np.diag([0, 1]), atol=1e-9)


def test_decay_bound_holds():
    for g in stable_corpus():
        analysis = analyze(g)
        dp = analysis.decay
        for n in range(1, 201):
            diff = np.linalg.matrix_power(analysis.rep, n) - np.linalg.matrix_power(analysis.psi_rep, n)
            assert spectral_norm(diff) <= dp.bound(n) + 1e-10


def test_trajectory_converges_to_limit_cycle():
    for g in stable_corpus():
        analysis = analyze(g)
        theta = analysis.stability.period
        etas = limit_states(g, theta, analysis)
        for eps in (0.1, 0.01):
            k = analysis.horizon(eps)
            assert k % theta == 0
            v = np.linalg.matrix_power(analysis.rep, k) @ vectorize(g.initial.mat)
            for n in range(k + 1, k + 101):
                v = analysis.rep @ v
                assert np.linalg.norm(v - vectorize(etas[n % theta].mat)) < eps


def test_peripheral_projector_laws():
    for g in stable_corpus() + [QMC(aklt_channel()), QMC(not_gate())]:
        analysis = analyze(g)
        p, m = analysis.projector, analysis.rep
        assert np.allclose(p @ p, p, atol=1e-8)
        assert np.allclose(p @ m, m @ p, atol=1e-8)


def test_period_is_minimal():
    chains = [cycle_permutation_qmc(k) for k in range(1, 7)]
    chains += [QMC(phase_rotation(1 / q), plus_state()) for q in range(2, 9)]
    chains.append(QMC(not_gate(), basis_state(2, 0)))
    for g in chains:
        analysis = analyze(g, qmax=12)
        theta = analysis.stability.period
        v = analysis.projector @ vectorize(g.initial.mat)
        assert np.allclose(np.linalg.matrix_power(analysis.rep, theta) @ v, v, atol=1e-9)
        for p in range(1, theta):
            assert np.linalg.norm(np.linalg.matrix_power(analysis.rep, p) @ v - v) > 1e-3


def test_default_qmax_covers_every_period():
    for g in stable_corpus():
        analysis = analyze(g)
        cap = g.dim ** 2
        assert analysis.qmax == cap
        assert all(e.angle.q <= cap for e in analysis.stability.contributing.entries)
        assert analysis.stability.period <= cap
        assert stability_report(g, qmax=4 * cap).period == analysis.stability.period


def test_aklt_projector_maps_to_maximally_mixed_state():
    analysis = analyze(QMC(aklt_channel()))
    rng = np.random.default_rng(21)
    for _ in range(5):
        rho = random_density(2, rng)
        assert np.allclose(devectorize(analysis.projector @ vectorize(rho.mat)), np.eye(2) / 2, atol=1e-9)


def test_amplitude_damping_projector_maps_to_ground_state():
    analysis = analyze(QMC(amplitude_damping(0.3)))
    ground = np.diag([1.0, 0.0])
    rng = np.random.default_rng(22)
    for rho in [basis_state(2, 1), plus_state(), random_density(2, rng)]:
        assert np.allclose(devectorize(analysis.projector @ vectorize(rho.mat)), ground, atol=1e-9)


def test_contributing_peripherals_depend_on_initial_state():
    analysis = analyze(QMC(phase_rotation(1 / 3)), qmax=4)
    eigs, ps = analysis.eigensystem, analysis.peripheral
    assert sorted(str(e.angle) for e in ps.entries) == ["0/1", "1/3", "2/3"]

    coherent = contributing_peripherals(eigs, ps, plus_state())
    assert sorted(str(e.angle) for e in coherent.entries) == ["0/1", "1/3", "2/3"]
    diagonal = contributing_peripherals(eigs, ps, basis_state(2, 0))
    assert [str(e.angle) for e in diagonal.entries] == ["0/1"]

    assert stability_report(QMC(phase_rotation(1 / 3), plus_state())).period == 3
    assert stability_report(QMC(phase_rotation(1 / 3), basis_state(2, 0))).period == 1


def test_amplitude_damping_limit_state():
    for rho0 in (basis_state(2, 1), plus_state()):
        etas = limit_states(QMC(amplitude_damping(0.5), rho0), 1)
        assert len(etas) == 1
        assert np.allclose(etas[0].mat, np.diag([1.0, 0.0]), atol=1e-9)


def main():
    """Main function to run the spectral tests."""
    tests = [
        test_rational_angle_roots_of_unity,
        test_rational_angle_rejects_irrational,
        test_rational_angle_validation,
        test_cycle_permutation_periods,
        test_phase_rotation_periods,
        test_phase_rotation_irrational_is_unstable,
        test_non_contributing_peripherals_do_not_count,
        test_aklt_spectrum,
        test_not_channel_spectrum,
        test_identity_channel_minimal_horizon,
        test_analysis_to_dict,
        test_horizon_values,
        test_horizon_with_polynomial_factor,
        test_horizon_is_monotone_in_epsilon,
        test_horizon_errors,
        test_not_gate_limit_states,
        test_decay_bound_holds,
        test_trajectory_converges_to_limit_cycle,
        test_peripheral_projector_laws,
        test_period_is_minimal,
        test_default_qmax_covers_every_period,
        test_aklt_projector_maps_to_maximally_mixed_state,
        test_amplitude_damping_projector_maps_to_ground_state,
        test_contributing_peripherals_depend_on_initial_state,
        test_amplitude_damping_limit_state,
    ]
    print("Testing spectral analysis...")
    for test in tests:
        try:
            test()
            print(f"✅ {test.__name__}")
        except AssertionError as e:
            print(f"❌ {test.__name__}: {e}")


if __name__ == "__main__":
    main()
