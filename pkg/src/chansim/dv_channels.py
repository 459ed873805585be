"""Qubit channel families, Choi matrices and teleportation covariance."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .linalg import dagger, ket, projector, tensor, trace_norm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)

PHI_PLUS = (tensor(ket(0, 2), ket(0, 2)) + tensor(ket(1, 2), ket(1, 2))) / np.sqrt(2)

KINDS = ("erasure", "dephasing", "depolarizing")


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A trace-preserving map ``rho -> sum_i K_i rho K_i^dag``."""

    kraus: tuple
    kind: str = "custom"
    param: float = float("nan")
    in_dim: int = field(init=False)
    out_dim: int = field(init=False)

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise ValueError("Kraus operators must share a shape")
        completeness = sum(dagger(k) @ k for k in ops)
        if not np.allclose(completeness, np.eye(shape[1]), atol=1e-12, rtol=0):
            raise ValueError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ops)
        object.__setattr__(self, "out_dim", shape[0])
        object.__setattr__(self, "in_dim", shape[1])

    def __call__(self, rho):
        return apply_channel(self, rho)

    @cached_property
    def choi(self):
        return choi(self)


@dataclass(frozen=True)
class CorrectionTable:
    """Teleportation unitaries ``U_a`` on the input and matching ``V_a`` on the output."""

    input_unitaries: tuple
    output_unitaries: tuple

    def __post_init__(self):
        ins = tuple(np.asarray(u, dtype=complex) for u in self.input_unitaries)
        outs = tuple(np.asarray(v, dtype=complex) for v in self.output_unitaries)
        if len(ins) != 4 or len(outs) != 4:
            raise ValueError("a qubit correction table has exactly 4 entries")
        for u in ins + outs:
            if not np.allclose(dagger(u) @ u, np.eye(u.shape[0]), atol=1e-12, rtol=0):
                raise ValueError("correction table entries must be unitary")
        object.__setattr__(self, "input_unitaries", ins)
        object.__setattr__(self, "output_unitaries", outs)

    @property
    def out_dim(self):
        return self.output_unitaries[0].shape[0]


def pauli_table():
    return CorrectionTable(PAULIS, PAULIS)


def erasure_table():
    """Paulis on the input; ``sigma_a (+) 1`` on the output, leaving the flag alone."""
    outs = []
    for s in PAULIS:
        v = np.eye(3, dtype=complex)
        v[:2, :2] = s
        outs.append(v)
    return CorrectionTable(PAULIS, tuple(outs))


def correction_table(kind):
    return erasure_table() if kind == "erasure" else pauli_table()


def identity_channel(dim=2):
    return KrausChannel((np.eye(dim),), kind="identity", param=0.0)


def make_channel(kind, p):
    """Build one of the qubit channel families.

    ``erasure``
        ``(1-p) rho + p |e><e|`` with the flag ``|e>`` as a third basis vector.
    ``dephasing``
        ``(1-p) rho + p Z rho Z``.
    ``depolarizing``
        ``(1-p) rho + (p/3)(X rho X + Y rho Y + Z rho Z)``, i.e. a Pauli error
        with total probability ``p``. This equals ``(1-q) rho + q I/2`` with
        ``q = 4p/3``, so full depolarisation is reached at ``p = 3/4``.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if kind == "erasure":
        embed = np.zeros((3, 2), dtype=complex)
        embed[:2, :2] = I2
        flag0 = np.outer(ket(2, 3), ket(0, 2))
        flag1 = np.outer(ket(2, 3), ket(1, 2))
        ops = (np.sqrt(1 - p) * embed, np.sqrt(p) * flag0, np.sqrt(p) * flag1)
    elif kind == "dephasing":
        ops = (np.sqrt(1 - p) * I2, np.sqrt(p) * Z)
    elif kind == "depolarizing":
        ops = (np.sqrt(1 - p) * I2,) + tuple(np.sqrt(p / 3) * s for s in (X, Y, Z))
    else:
        raise ValueError(f"unknown channel kind {kind!r}; expected one of {KINDS}")
    return KrausChannel(ops, kind=kind, param=p)


def apply_channel(ch, rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.in_dim, ch.in_dim):
        raise ValueError(f"state of shape {rho.shape} does not fit channel input "
                         f"dimension {ch.in_dim}")
    return sum(k @ rho @ dagger(k) for k in ch.kraus)


def apply_to_subsystem(ch, rho, dims, index):
    """Apply ``ch`` to subsystem ``index`` of a multipartite operator."""
    dims = list(dims)
    ops = []
    for k in ch.kraus:
        factors = [np.eye(d) for d in dims]
        factors[index] = k
        ops.append(tensor(*factors))
    rho = np.asarray(rho, dtype=complex)
    return sum(op @ rho @ dagger(op) for op in ops)


def choi(ch):
    """Choi matrix ``(E (x) I)(Phi+)``: channel output first, ancilla second."""
    if ch.in_dim != 2:
        raise ValueError(f"Choi matrices are defined here for qubit input only, "
                         f"got in_dim={ch.in_dim}")
    return apply_to_subsystem(ch, projector(PHI_PLUS), [2, 2], 0)


def _operator_basis(dim):
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            yield e


class CovarianceCheck(NamedTuple):
    covariant: bool
    deviation: float


def verify_tele_covariance(ch, table, tol=1e-10):
    """Check ``E(U X U^dag) == V E(X) V^dag`` for every table entry.

    By linearity it suffices to test the matrix units ``|i><j|``, so the
    check is exhaustive. Returns the largest trace-norm violation.
    """
    if table.input_unitaries[0].shape[0] != ch.in_dim or table.out_dim != ch.out_dim:
        raise ValueError("correction table does not match channel dimensions")
    worst = 0.0
    for u, v in zip(table.input_unitaries, table.output_unitaries):
        for e in _operator_basis(ch.in_dim):
            lhs = apply_channel(ch, u @ e @ dagger(u))
            rhs = v @ apply_channel(ch, e) @ dagger(v)
            worst = max(worst, trace_norm(lhs - rhs))
    return CovarianceCheck(worst <= tol, worst)


def random_kraus_channel(dim_in, dim_out, n_kraus, rng=None):
    """Random CPTP map from a Haar-like isometry ``C^{dim_in} -> C^{n_kraus dim_out}``."""
    rng = np.random.default_rng(rng)
    rows = dim_out * n_kraus
    if rows < dim_in:
        raise ValueError("need n_kraus * dim_out >= dim_in for an isometry")
    g = rng.normal(size=(rows, dim_in)) + 1j * rng.normal(size=(rows, dim_in))
    q, _ = np.linalg.qr(g)
    return KrausChannel(tuple(q[i * dim_out:(i + 1) * dim_out] for i in range(n_kraus)))
