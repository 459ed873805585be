"""Quantum Fisher information by two routes, Cramer-Rao bounds and stretching bounds."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dv_channels import KINDS, PHI_PLUS, apply_to_subsystem, make_channel
from .linalg import dagger, projector, uhlmann_fidelity

SLD_CUTOFF = 1e-12
# relative change under step halving above which a result is flagged unconverged
CONVERGENCE_RTOL = 1e-3


@dataclass(frozen=True)
class QfiResult:
    value: float
    method: str
    step: float = 0.0
    converged: bool = True

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class ParamFamilyDV:
    """A channel family ``theta -> E_theta`` probed with a fixed input state.

    ``probe`` lives on (channel input) (x) (ancilla); the channel acts on the
    first factor. The default probe is ``Phi+``, the assisted protocol.
    """

    kind: str
    channel: Callable
    probe: np.ndarray = None
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.probe is None:
            object.__setattr__(self, "probe", projector(PHI_PLUS))

    def state(self, theta):
        ch = self.channel(theta)
        anc = self.probe.shape[0] // ch.in_dim
        return apply_to_subsystem(ch, self.probe, [ch.in_dim, anc], 0)


def dv_family(kind, probe=None):
    if kind not in KINDS:
        raise ValueError(f"unknown family {kind!r}; expected one of {KINDS}")
    return ParamFamilyDV(kind, lambda p: make_channel(kind, p), probe)


def constant_family(ch, probe=None):
    """A family that ignores ``theta``; its QFI is zero."""
    return ParamFamilyDV("constant", lambda _: ch, probe, (-np.inf, np.inf))


def sld(rho, drho, cutoff=SLD_CUTOFF):
    """Symmetric logarithmic derivative of ``rho`` in the direction ``drho``.

    Pairs of eigenvalues with ``l_j + l_k <= cutoff`` are dropped, which is
    how the sum handles the kernel of rank-deficient states.
    """
    evals, evecs = np.linalg.eigh((rho + dagger(rho)) / 2)
    d = dagger(evecs) @ drho @ evecs
    denom = evals[:, None] + evals[None, :]
    mask = denom > cutoff
    coeff = np.zeros_like(denom)
    coeff[mask] = 2.0 / denom[mask]
    lmat = evecs @ (coeff * d) @ dagger(evecs)
    return (lmat + dagger(lmat)) / 2


def _qfi_from_sld(rho, drho, cutoff):
    lmat = sld(rho, drho, cutoff)
    return max(float(np.trace(lmat @ lmat @ rho).real), 0.0)


def default_step(theta):
    return 1e-5 * max(1.0, abs(theta))


def _check_domain(domain, lo, hi):
    if lo < domain[0] or hi > domain[1]:
        raise ValueError(f"finite-difference stencil [{lo}, {hi}] leaves the "
                         f"domain {domain}; boundary points are not supported")


def _rel_change(a, b):
    return abs(a - b) / max(abs(a), 1e-300) if a != b else 0.0


def state_qfi_sld(state_fn, theta, step=None, cutoff=SLD_CUTOFF, domain=(-np.inf, np.inf)):
    """QFI of ``theta -> state_fn(theta)`` as ``Tr(L^2 rho)``, central differences."""
    h = default_step(theta) if step is None else step
    _check_domain(domain, theta - h, theta + h)
    rho = state_fn(theta)

    def value(hh):
        drho = (state_fn(theta + hh) - state_fn(theta - hh)) / (2 * hh)
        return _qfi_from_sld(rho, drho, cutoff)

    q = value(h)
    return QfiResult(q, "sld", h, _rel_change(q, value(h / 2)) <= CONVERGENCE_RTOL)


def state_qfi_fidelity(state_fn, theta, dtheta, fidelity=uhlmann_fidelity,
                       domain=(-np.inf, np.inf), extrapolate=False):
    """QFI from ``8 [1 - F] / dtheta^2``.

    The two states are taken at ``theta -+ dtheta/2`` so the odd terms of the
    expansion cancel. With ``extrapolate`` the results at ``dtheta`` and
    ``dtheta/2`` are Richardson-combined, which tolerates a coarser step when
    the fidelity itself carries noise.
    """
    if dtheta <= 0:
        raise ValueError("dtheta must be positive")
    _check_domain(domain, theta - dtheta / 2, theta + dtheta / 2)

    def raw(h):
        f = fidelity(state_fn(theta - h / 2), state_fn(theta + h / 2))
        return 8.0 * (1.0 - f) / h ** 2

    def value(h):
        if extrapolate:
            return (4.0 * raw(h / 2) - raw(h)) / 3.0
        return raw(h)

    q = value(dtheta)
    q_half = value(dtheta / 2)
    method = "fidelity"
    # a near-zero QFI cannot be judged by relative change
    converged = _rel_change(q, q_half) <= CONVERGENCE_RTOL or abs(q - q_half) < 1e-9
    return QfiResult(max(q, 0.0), method, dtheta, converged)


def qfi_sld(family, theta, step=None):
    return state_qfi_sld(family.state, theta, step, domain=family.domain)


def qfi_fidelity(family, theta, dtheta=1e-4):
    return state_qfi_fidelity(family.state, theta, dtheta, domain=family.domain)


def closed_form_dv_qfi(kind, p):
    """Choi-state QFI ``1 / [p (1 - p)]`` shared by the three qubit families."""
    if kind not in KINDS:
        raise ValueError(f"unknown family {kind!r}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"the closed form diverges at p={p}; need 0 < p < 1")
    return 1.0 / (p * (1.0 - p))


def qcrb(qfi_single, n=1):
    """Variance bound ``1 / (n QFI)`` for ``n`` independent uses."""
    if qfi_single <= 0:
        raise ValueError("QFI must be positive for a finite Cramer-Rao bound")
    if n < 1:
        raise ValueError("n must be a positive integer")
    return 1.0 / (n * qfi_single)


def stretching_bound(program_qfi, n, m=1):
    """QFI ceiling ``m n QFI(program)`` of any adaptive protocol over ``n`` uses.

    ``m`` counts program copies consumed per channel use; ``m <= n`` is
    required, since ``m = n`` already reaches the Heisenberg ceiling.
    """
    if program_qfi < 0:
        raise ValueError("program QFI must be non-negative")
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive integers")
    if m > n:
        raise ValueError(f"m={m} copies per use exceeds n={n}")
    return m * n * program_qfi
