"""Truncated Fock-space representations of Gaussian states.

This is an independent oracle for the covariance-matrix code: states are
built from number-basis amplitudes and operator exponentials, and compared
with the generic density-matrix fidelity. Two-mode operators use the
``np.kron`` ordering, first mode first.

Two-mode states only keep the sectors with total photon number below the
cutoff. The beam splitter conserves that number, so it acts exactly on every
kept sector; the discarded weight is counted in ``tail``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .linalg import _sqrt_factor, dagger

DEFAULT_CUTOFF = 40
TAIL_BUDGET = 1e-6
# extra levels used when building a state by operator exponentials, then cut
WORKING_MARGIN = 60
# factor columns with weight below this are dropped (and booked as tail)
_COLUMN_FLOOR = 1e-18


class TruncationError(ValueError):
    """The requested cutoff loses more probability than the tail budget allows."""


@dataclass(frozen=True, eq=False)
class FockState:
    """Density matrix ``factor @ factor^dag`` on ``modes`` truncated modes.

    ``tail`` estimates the probability mass lost to the cutoff. Either a
    dense ``data`` matrix or a square-root ``factor`` may be given; the
    other is derived on demand.
    """

    cutoff: int
    modes: int
    tail: float
    factor: np.ndarray = None
    dense: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.cutoff < 4:
            raise ValueError("cutoff must be at least 4")
        if self.modes not in (1, 2):
            raise ValueError("only one- and two-mode states are supported")
        dim = self.cutoff ** self.modes
        if self.factor is None and self.dense is None:
            raise ValueError("need a factor or a dense matrix")
        if self.factor is not None:
            f = np.asarray(self.factor, dtype=complex)
            if f.ndim == 1:
                f = f[:, None]
            if f.shape[0] != dim:
                raise ValueError(f"factor has {f.shape[0]} rows, expected {dim}")
            object.__setattr__(self, "factor", f)
            tr = float(np.vdot(f, f).real)
        else:
            d = np.asarray(self.dense, dtype=complex)
            if d.shape != (dim, dim):
                raise ValueError(f"matrix shape {d.shape}, expected {(dim, dim)}")
            d = (d + dagger(d)) / 2
            if np.linalg.eigvalsh(d).min() < -1e-10:
                raise ValueError("Fock density matrix is not PSD")
            object.__setattr__(self, "dense", d)
            tr = float(np.trace(d).real)
        if not 1.0 - self.tail - 1e-9 <= tr <= 1.0 + 1e-9:
            raise ValueError(f"trace {tr:.12g} inconsistent with tail {self.tail:.3g}")

    @property
    def dim(self):
        return self.cutoff ** self.modes

    @cached_property
    def data(self):
        if self.dense is not None:
            return self.dense
        return self.factor @ dagger(self.factor)

    @cached_property
    def root(self):
        """Columns ``X`` with ``data = X X^dag``."""
        if self.factor is not None:
            return self.factor
        return _sqrt_factor(self.dense, 1e-10)

    def trace(self):
        return float(np.vdot(self.root, self.root).real)


def _check_tail(tail, max_tail, what):
    if tail > max_tail:
        raise TruncationError(f"{what}: truncated probability {tail:.3g} exceeds "
                              f"{max_tail:g}; raise the cutoff")


def annihilation(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def _poisson_log(n, mean):
    if mean == 0:
        return np.where(n == 0, 0.0, -np.inf)
    return n * np.log(mean) - mean - gammaln(n + 1)


def fock_vacuum(cutoff=DEFAULT_CUTOFF):
    v = np.zeros(cutoff, dtype=complex)
    v[0] = 1.0
    return FockState(cutoff, 1, 0.0, v)


def fock_coherent(alpha, cutoff=DEFAULT_CUTOFF, max_tail=TAIL_BUDGET):
    """``|alpha>`` with amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)``."""
    n = np.arange(cutoff)
    mean = abs(alpha) ** 2
    amp = np.exp(0.5 * _poisson_log(n, mean)) * np.exp(1j * np.angle(alpha) * n)
    tail = max(1.0 - float(np.sum(np.abs(amp) ** 2)), 0.0)
    _check_tail(tail, max_tail, "coherent state")
    return FockState(cutoff, 1, tail, amp)


def thermal_probabilities(nbar, cutoff):
    n = np.arange(cutoff)
    if nbar == 0:
        return (n == 0).astype(float)
    return (nbar / (nbar + 1)) ** n / (nbar + 1)


def fock_thermal(nbar, cutoff=DEFAULT_CUTOFF, max_tail=TAIL_BUDGET):
    """Diagonal ``p_n = nbar^n / (nbar+1)^(n+1)``; the tail is ``(nbar/(nbar+1))^cutoff``."""
    if nbar < 0:
        raise ValueError("thermal number must be non-negative")
    p = thermal_probabilities(nbar, cutoff)
    tail = (nbar / (nbar + 1)) ** cutoff
    _check_tail(tail, max_tail, "thermal state")
    return FockState(cutoff, 1, tail, np.diag(np.sqrt(p)).astype(complex))


def fock_tmsv(r, cutoff=DEFAULT_CUTOFF, max_tail=TAIL_BUDGET):
    """Schmidt form ``sqrt(1 - l^2) sum_n l^n |n, n>`` with ``l = tanh r``."""
    if r < 0:
        raise ValueError("squeezing r must be non-negative")
    lam = np.tanh(r)
    amps = np.sqrt(1 - lam ** 2) * lam ** np.arange(cutoff)
    vec = np.zeros(cutoff * cutoff, dtype=complex)
    vec[np.arange(cutoff) * (cutoff + 1)] = amps
    tail = lam ** (2 * cutoff)
    _check_tail(tail, max_tail, "two-mode squeezed vacuum")
    return FockState(cutoff, 2, tail, vec)


@dataclass(frozen=True)
class ModeSpec:
    """Single-mode Gaussian ``D(alpha) R(phi) S(r) thermal(nbar)``.

    ``S(r) = exp((r a^2 - r a^dag^2) / 2)`` squeezes ``q``;
    ``R(phi) = exp(i phi n)`` rotates the quadratures by ``phi``.
    """

    nbar: float = 0.0
    r: float = 0.0
    phi: float = 0.0
    alpha: complex = 0j

    def mean(self):
        return np.sqrt(2.0) * np.array([np.real(self.alpha), np.imag(self.alpha)])

    def cm(self):
        c, s = np.cos(self.phi), np.sin(self.phi)
        rot = np.array([[c, -s], [s, c]])
        sym = rot @ np.diag([np.exp(-self.r), np.exp(self.r)])
        return (self.nbar + 0.5) * sym @ sym.T

    def mean_photons(self):
        return (self.nbar + 0.5) * np.cosh(2 * self.r) - 0.5 + abs(self.alpha) ** 2

    def fock(self, cutoff=DEFAULT_CUTOFF, max_tail=TAIL_BUDGET):
        w = cutoff + WORKING_MARGIN
        a = annihilation(w)
        ad = dagger(a)
        num = np.arange(w)
        u = expm(0.5 * self.r * (a @ a - ad @ ad))
        u = np.exp(1j * self.phi * num)[:, None] * u
        if self.alpha != 0:
            u = expm(self.alpha * ad - np.conj(self.alpha) * a) @ u
        weights = thermal_probabilities(self.nbar, w)
        keep = weights > _COLUMN_FLOOR
        cols = u[:, keep] * np.sqrt(weights[keep])
        root = cols[:cutoff]
        tail = max(1.0 - float(np.vdot(root, root).real), 0.0)
        _check_tail(tail, max_tail, f"{self}")
        return FockState(cutoff, 1, tail, root)


def _bs_symplectic(theta, phi):
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
    return np.block([[c * np.eye(2), s * rot], [-s * rot.T, c * np.eye(2)]])


@dataclass(frozen=True)
class TwoModeSpec:
    """Beam splitter ``(theta, phi)`` applied to a product of two :class:`ModeSpec`."""

    first: ModeSpec
    second: ModeSpec
    theta: float = 0.0
    phi: float = 0.0

    def mean(self):
        return _bs_symplectic(self.theta, self.phi) @ np.concatenate(
            [self.first.mean(), self.second.mean()])

    def cm(self):
        s = _bs_symplectic(self.theta, self.phi)
        z = np.zeros((2, 2))
        v = np.block([[self.first.cm(), z], [z, self.second.cm()]])
        return s @ v @ s.T

    def mean_photons(self):
        return self.first.mean_photons() + self.second.mean_photons()

    def fock(self, cutoff=DEFAULT_CUTOFF, max_tail=TAIL_BUDGET):
        a = self.first.fock(cutoff, max_tail)
        b = self.second.fock(cutoff, max_tail)
        return beam_splitter(product_state(a, b, max_tail), self.theta, self.phi, max_tail)


def _sector_blocks(cutoff):
    """Index arrays of the total-photon sectors ``N < cutoff`` (two modes)."""
    for total in range(cutoff):
        n = np.arange(total + 1)
        yield total, n * cutoff + (total - n)


def sector_mask(cutoff):
    n1, n2 = np.divmod(np.arange(cutoff * cutoff), cutoff)
    return n1 + n2 < cutoff


def product_state(a, b, max_tail=TAIL_BUDGET):
    """``a (x) b`` restricted to total photon number below the cutoff."""
    if a.modes != 1 or b.modes != 1 or a.cutoff != b.cutoff:
        raise ValueError("product_state needs two single-mode states with equal cutoffs")
    xa, xb = a.root, b.root
    wa = np.sum(np.abs(xa) ** 2, axis=0)
    wb = np.sum(np.abs(xb) ** 2, axis=0)
    ia, ib = np.nonzero(np.outer(wa, wb) > _COLUMN_FLOOR)
    cols = (xa[:, ia][:, None, :] * xb[:, ib][None, :, :]).reshape(-1, len(ia))
    cols[~sector_mask(a.cutoff)] = 0.0
    tail = max(1.0 - float(np.vdot(cols, cols).real), 0.0)
    _check_tail(tail - a.tail - b.tail, max_tail, "two-mode sector truncation")
    return FockState(a.cutoff, 2, tail, cols)


def beam_splitter_blocks(cutoff, theta, phi=0.0):
    """Per-sector unitaries of ``exp(theta (e^{i phi} a^dag b - e^{-i phi} a b^dag))``.

    In the Heisenberg picture ``a -> cos(theta) a + e^{i phi} sin(theta) b``.
    Returns ``(indices, unitary)`` pairs, one per total photon number.
    """
    blocks = []
    for total, idx in _sector_blocks(cutoff):
        n = np.arange(total)
        # <n+1, N-n-1| a^dag b |n, N-n> = sqrt(n+1) sqrt(N-n)
        hop = np.zeros((total + 1, total + 1), dtype=complex)
        hop[n + 1, n] = np.sqrt((n + 1) * (total - n))
        gen = theta * (np.exp(1j * phi) * hop - np.exp(-1j * phi) * hop.T)
        blocks.append((idx, expm(gen)))
    return blocks


def beam_splitter(state, theta, phi=0.0, max_tail=TAIL_BUDGET):
    if state.modes != 2:
        raise ValueError("beam splitter acts on two-mode states")
    x = state.root
    if np.any(np.abs(x[~sector_mask(state.cutoff)]) > 0):
        state = _project_sectors(state, max_tail)
        x = state.root
    out = np.zeros_like(x)
    for idx, u in beam_splitter_blocks(state.cutoff, theta, phi):
        out[idx] = u @ x[idx]
    return FockState(state.cutoff, 2, state.tail, out)


def _project_sectors(state, max_tail):
    x = state.root.copy()
    x[~sector_mask(state.cutoff)] = 0.0
    tail = max(1.0 - float(np.vdot(x, x).real), 0.0)
    _check_tail(tail - state.tail, max_tail, "two-mode sector truncation")
    return FockState(state.cutoff, 2, tail, x)


def fock_state(kind, cutoff=DEFAULT_CUTOFF, max_tail=TAIL_BUDGET, **params):
    """Build a Fock-basis state by name.

    ``kind`` is one of ``vacuum``, ``coherent`` (``alpha``), ``thermal``
    (``nbar``), ``tmsv`` (``r``) or ``gaussian`` (the :class:`ModeSpec`
    fields).
    """
    if cutoff < 4:
        raise ValueError("cutoff must be at least 4")
    if kind == "vacuum":
        return fock_vacuum(cutoff)
    if kind == "coherent":
        return fock_coherent(params["alpha"], cutoff, max_tail)
    if kind == "thermal":
        return fock_thermal(params["nbar"], cutoff, max_tail)
    if kind == "tmsv":
        return fock_tmsv(params["r"], cutoff, max_tail)
    if kind == "gaussian":
        return ModeSpec(**params).fock(cutoff, max_tail)
    raise ValueError(f"unknown state kind {kind!r}")


def fock_thermal_loss(eta, nbar, state, max_tail=TAIL_BUDGET):
    """Thermal-loss channel by a beam splitter of transmissivity ``eta``.

    The input is mixed with ``thermal(nbar)`` on a beam splitter with
    ``cos^2(theta) = eta`` and the environment is traced out.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    if state.modes != 1:
        raise ValueError("fock_thermal_loss takes a single-mode state")
    env = fock_thermal(nbar, state.cutoff, max_tail)
    joint = beam_splitter(product_state(state, env, max_tail),
                          np.arccos(np.sqrt(eta)), 0.0, max_tail)
    c = state.cutoff
    x = joint.root.reshape(c, c, -1)
    out = np.einsum("iek,jek->ij", x, x.conj())
    tail = max(1.0 - float(np.trace(out).real), 0.0)
    _check_tail(tail - state.tail - env.tail, max_tail, "thermal-loss output")
    return FockState(c, 1, tail, dense=out)


def oracle_fidelity(a, b):
    """Root fidelity of two truncated states, from their square-root factors."""
    if a.modes != b.modes or a.cutoff != b.cutoff:
        raise ValueError("states must share mode count and cutoff")
    xa, xb = a.root, b.root
    if xa.shape[1] == 0 or xb.shape[1] == 0:
        return 0.0
    f = np.linalg.svd(dagger(xa) @ xb, compute_uv=False).sum()
    return float(min(max(f, 0.0), 1.0))


def fock_moments(state):
    """First and second moments ``(mean, cm)`` of a truncated state.

    Quadratures ``q = (a + a^dag)/sqrt 2`` and ``p = (a - a^dag)/(i sqrt 2)``,
    ordered ``(q1, p1, q2, p2)``; the state is renormalised first.
    """
    c = state.cutoff
    a = annihilation(c)
    single = [(a + dagger(a)) / np.sqrt(2), (a - dagger(a)) / (1j * np.sqrt(2))]
    ops = []
    for mode in range(state.modes):
        for q in single:
            factors = [np.eye(c)] * state.modes
            factors[mode] = q
            ops.append(factors[0] if state.modes == 1 else np.kron(*factors))
    x = state.root
    norm = float(np.vdot(x, x).real)
    # <A> = Tr(X^dag A X); products of truncated operators are exact below the top level
    applied = [op @ x for op in ops]
    mean = np.array([np.vdot(x, ax).real for ax in applied]) / norm
    k = len(ops)
    cm = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            cm[i, j] = np.vdot(applied[i], applied[j]).real / norm
    cm -= np.outer(mean, mean)
    return mean, cm


def mean_photon_number(state):
    c = state.cutoff
    n = np.arange(c)
    if state.modes == 2:
        n = (n[:, None] + n[None, :]).reshape(-1)
    x = state.root
    return float(np.sum(n[:, None] * np.abs(x) ** 2) / np.vdot(x, x).real)


def random_mode_spec(rng, energy):
    """A random :class:`ModeSpec` with mean photon number ``energy``.

    The energy is split at random between thermal noise, squeezing and
    displacement; rotation and displacement phase are uniform.
    """
    w = rng.dirichlet([1.0, 1.0, 1.0])
    nbar = energy * w[0]
    # (nbar + 1/2) cosh 2r - 1/2 - nbar = energy * w[1]
    r = 0.5 * np.arccosh(1.0 + energy * w[1] / (nbar + 0.5))
    alpha = np.sqrt(energy * w[2]) * np.exp(2j * np.pi * rng.random())
    return ModeSpec(nbar, r, 2 * np.pi * rng.random(), alpha)


def random_two_mode_spec(rng, energy):
    split = rng.random()
    return TwoModeSpec(random_mode_spec(rng, energy * split),
                       random_mode_spec(rng, energy * (1 - split)),
                       np.pi / 2 * rng.random(), 2 * np.pi * rng.random())
