"""Qubit teleportation over an arbitrary bipartite resource."""

from dataclasses import dataclass

import numpy as np

from .dv_channels import PAULIS, PHI_PLUS, apply_channel
from .linalg import dagger, projector, random_density_matrix, tensor, trace_distance


@dataclass(frozen=True)
class BellBasis:
    vectors: tuple
    paulis: tuple = PAULIS

    @property
    def states(self):
        return tuple(projector(v) for v in self.vectors)


def bell_basis():
    """``|Phi_a> = (I (x) sigma_a)|Phi+>`` for the four Paulis."""
    return BellBasis(tuple(tensor(np.eye(2), s) @ PHI_PLUS for s in PAULIS))


_BELL = bell_basis()


def bell_outcome_probabilities(rho, resource):
    """Probabilities of the four Bell outcomes on (input, resource ancilla)."""
    return np.array([np.trace(b).real for b in _branches(rho, resource)])


def _branches(rho, resource):
    # resource ordering: (output B, ancilla A); Bell detection acts on (a, A)
    rho = np.asarray(rho, dtype=complex)
    resource = np.asarray(resource, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("teleport() expects a qubit input state")
    d_out = resource.shape[0] // 2
    if resource.shape != (2 * d_out, 2 * d_out):
        raise ValueError("resource must be bipartite with a qubit second subsystem")
    xi = resource.reshape(d_out, 2, d_out, 2)
    for v in _BELL.vectors:
        phi = v.reshape(2, 2)  # [a, A]
        yield np.einsum("ij,ik,bjcl,kl->bc", phi.conj(), rho, xi, phi, optimize=True)


def teleport(rho, resource, corrections):
    """Deterministic output of teleporting ``rho`` over ``resource``.

    The four Bell branches are corrected by ``V_a^dag . V_a`` and summed,
    which is the CPTP map the protocol implements once outcomes are averaged.
    """
    resource = np.asarray(resource, dtype=complex)
    if corrections.out_dim * 2 != resource.shape[0]:
        raise ValueError("correction table does not match the resource output dimension")
    out = np.zeros((corrections.out_dim,) * 2, dtype=complex)
    total = 0.0
    for branch, v in zip(_branches(rho, resource), corrections.output_unitaries):
        total += np.trace(branch).real
        out += dagger(v) @ branch @ v
    if abs(total - np.trace(rho).real * np.trace(resource).real) > 1e-10:
        raise ValueError(f"Bell outcome probabilities sum to {total}, not 1")
    return out


def simulate_and_compare(ch, table, trials=100, seed=None):
    """Largest trace distance between ``ch(rho)`` and its Choi-teleportation simulation."""
    rng = np.random.default_rng(seed)
    resource = ch.choi
    worst = 0.0
    for _ in range(trials):
        rho = random_density_matrix(2, rng)
        worst = max(worst, trace_distance(apply_channel(ch, rho),
                                          teleport(rho, resource, table)))
    return worst
