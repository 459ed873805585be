import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from chansim.dv_channels import (
    KINDS,
    PAULIS,
    PHI_PLUS,
    CorrectionTable,
    correction_table,
    make_channel,
    pauli_table,
)
from chansim.linalg import is_density_matrix, projector, random_density_matrix, trace_distance
from chansim.teleport import bell_basis, bell_outcome_probabilities, simulate_and_compare, teleport


def test_bell_basis_is_orthonormal():
    vecs = np.array(bell_basis().vectors)
    assert_allclose(vecs.conj() @ vecs.T, np.eye(4), atol=1e-15)
    assert_allclose(bell_basis().vectors[0], PHI_PLUS)


def test_ideal_teleportation_is_identity():
    rng = np.random.default_rng(0)
    for _ in range(10):
        rho = random_density_matrix(2, rng)
        assert_allclose(teleport(rho, projector(PHI_PLUS), pauli_table()), rho, atol=1e-14)


def test_outcomes_uniform_over_maximally_entangled_resource():
    rho = random_density_matrix(2, 4)
    assert_allclose(bell_outcome_probabilities(rho, projector(PHI_PLUS)), 0.25, atol=1e-15)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_choi_teleportation_simulates_channel(kind, p):
    dev = simulate_and_compare(make_channel(kind, p), correction_table(kind), trials=20, seed=1)
    assert dev <= 1e-12


def test_missing_corrections_break_simulation():
    no_fix = CorrectionTable(PAULIS, (np.eye(2),) * 4)
    assert simulate_and_compare(make_channel("dephasing", 0.2), no_fix, trials=20, seed=3) > 0.1


def test_teleport_rejects_bad_shapes():
    with pytest.raises(ValueError):
        teleport(np.eye(3) / 3, projector(PHI_PLUS), pauli_table())
    with pytest.raises(ValueError):
        teleport(np.eye(2) / 2, np.eye(6) / 6, pauli_table())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_teleport_over_any_resource_is_a_channel(seed):
    rng = np.random.default_rng(seed)
    resource = random_density_matrix(4, rng)
    rho, sigma = random_density_matrix(2, rng), random_density_matrix(2, rng)
    out = teleport(rho, resource, pauli_table())
    assert is_density_matrix(out, atol=1e-10)
    # linear in the input, hence contractive in trace distance
    mix = teleport(0.3 * rho + 0.7 * sigma, resource, pauli_table())
    assert_allclose(mix, 0.3 * out + 0.7 * teleport(sigma, resource, pauli_table()), atol=1e-13)
    assert trace_distance(out, teleport(sigma, resource, pauli_table())) <= (
        trace_distance(rho, sigma) + 1e-12)
