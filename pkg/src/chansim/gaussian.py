"""Covariance-matrix toolkit for bosonic Gaussian states and channels.

Conventions: quadratures ``x = (q_1, p_1, q_2, p_2, ...)`` with ``[q, p] = i``
(hbar = 1), so the vacuum has covariance ``I/2`` and a physical covariance
matrix obeys ``V + i Omega / 2 >= 0``. Two-mode squeezing is parametrised by
the squeezing ``r``; the resource variance ``mu`` corresponds to the diagonal
element ``cosh(2r)/2``.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .metrology import state_qfi_fidelity

I2 = np.eye(2)
Z2 = np.diag([1.0, -1.0])
OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])

CHANNEL_KINDS = ("thermal_loss", "amplifier", "additive")


class ConvergenceError(ArithmeticError):
    """A limiting sequence did not behave as the extrapolation assumes."""


def omega(modes):
    return np.kron(np.eye(modes), OMEGA1)


def symplectic_eigenvalues(cm):
    """Williamson spectrum of ``cm``, ascending, one value per mode.

    Computed as the positive eigenvalues of the Hermitian matrix
    ``V^(1/2) (i Omega) V^(1/2)``, which stays accurate for strongly
    squeezed states where the non-normal ``i Omega V`` does not.
    """
    cm = np.asarray(cm, dtype=float)
    evals, evecs = np.linalg.eigh((cm + cm.T) / 2)
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T
    herm = root @ (1j * omega(cm.shape[0] // 2)) @ root
    ev = np.linalg.eigvalsh((herm + herm.conj().T) / 2)
    return np.sort(ev[len(ev) // 2:])


def _physical_tol(cm, tol):
    return tol * max(1.0, float(np.linalg.norm(cm, 2)))


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    cm: np.ndarray
    modes: int = field(init=False)

    def __post_init__(self):
        cm = np.array(self.cm, dtype=float)
        mean = np.array(self.mean, dtype=float).reshape(-1)
        n = cm.shape[0]
        if cm.shape != (n, n) or n % 2 or mean.shape != (n,):
            raise ValueError(f"inconsistent shapes: mean {mean.shape}, cm {cm.shape}")
        if not np.allclose(cm, cm.T, atol=1e-12, rtol=0):
            raise ValueError("covariance matrix is not symmetric")
        cm = (cm + cm.T) / 2
        nu = symplectic_eigenvalues(cm)
        if nu.min() < 0.5 - _physical_tol(cm, 1e-10):
            raise ValueError(f"unphysical covariance matrix: symplectic eigenvalue "
                             f"{nu.min():.12g} < 1/2")
        object.__setattr__(self, "cm", cm)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "modes", n // 2)

    @property
    def purity(self):
        return float(1.0 / np.sqrt(np.linalg.det(2.0 * self.cm)))

    def is_pure(self, tol=1e-10):
        nu = symplectic_eigenvalues(self.cm)
        return bool(np.all(np.abs(nu - 0.5) < _physical_tol(self.cm, tol)))

    def mean_photon_number(self):
        """Total ``<N>`` over all modes."""
        return float((np.trace(self.cm) - self.modes + self.mean @ self.mean) / 2)

    def reduced(self, modes):
        idx = np.concatenate([[2 * k, 2 * k + 1] for k in modes])
        return GaussianState(self.mean[idx], self.cm[np.ix_(idx, idx)])


def vacuum(modes=1):
    return GaussianState(np.zeros(2 * modes), np.eye(2 * modes) / 2)


def thermal_state(nbar):
    if nbar < 0:
        raise ValueError("thermal number must be non-negative")
    return GaussianState(np.zeros(2), (nbar + 0.5) * I2)


def coherent_state(q, p=0.0):
    return GaussianState([q, p], I2 / 2)


def tmsv(r):
    """Two-mode squeezed vacuum; each mode alone is thermal with ``sinh(r)^2`` photons."""
    if r < 0:
        raise ValueError("squeezing r must be non-negative")
    c, s = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
    return GaussianState(np.zeros(4), np.block([[c * I2, s * Z2], [s * Z2, c * I2]]))


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    """Single-mode channel ``x -> T x + d``, ``V -> T V T^T + N``."""

    T: np.ndarray
    N: np.ndarray
    d: np.ndarray = field(default_factory=lambda: np.zeros(2))
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("T", "N", "d"):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=float))
        if not np.allclose(self.N, self.N.T, atol=1e-12, rtol=0):
            raise ValueError("noise matrix N must be symmetric")

    def is_physical(self, tol=1e-10):
        """``N >= 0`` and ``det N >= (det T - 1)^2 / 4``."""
        if np.linalg.eigvalsh(self.N).min() < -tol:
            return False
        return bool(np.linalg.det(self.N) >= (np.linalg.det(self.T) - 1) ** 2 / 4 - tol)


def make_gaussian_channel(kind, **params):
    """Phase-insensitive channel ``T = sqrt(eta) I``, ``N = nu I``.

    ``thermal_loss(eta, nbar)``: ``eta`` in [0, 1], ``nu = (1 - eta)(nbar + 1/2)``.
    ``amplifier(eta, nbar)``: ``eta > 1``, ``nu = (eta - 1)(nbar + 1/2)``.
    ``additive(nu)``: ``eta = 1``.
    """
    if kind == "thermal_loss":
        eta, nbar = float(params["eta"]), float(params["nbar"])
        if not 0.0 <= eta <= 1.0 or nbar < 0:
            raise ValueError(f"thermal loss needs eta in [0, 1] and nbar >= 0, got {params}")
        nu = (1 - eta) * (nbar + 0.5)
    elif kind == "amplifier":
        eta, nbar = float(params["eta"]), float(params["nbar"])
        if eta <= 1.0 or nbar < 0:
            raise ValueError(f"amplifier needs eta > 1 and nbar >= 0, got {params}")
        nu = (eta - 1) * (nbar + 0.5)
    elif kind == "additive":
        eta, nu = 1.0, float(params["nu"])
        if nu < 0:
            raise ValueError(f"additive noise needs nu >= 0, got {nu}")
    else:
        raise ValueError(f"unknown Gaussian channel kind {kind!r}")
    return GaussianChannel(np.sqrt(eta) * I2, nu * I2, np.zeros(2), kind, dict(params))


def phase_insensitive_channel(eta, nu):
    """``T = sqrt(eta) I``, ``N = nu I`` in the ``(eta, nu)`` parametrisation."""
    if eta < 0:
        raise ValueError("eta must be non-negative")
    return GaussianChannel(np.sqrt(eta) * I2, nu * I2, np.zeros(2), "phase_insensitive",
                           {"eta": eta, "nu": nu})


def identity_gaussian_channel():
    return GaussianChannel(I2, np.zeros((2, 2)), kind="identity")


def apply_gaussian(ch, state, mode=0):
    """Act with a single-mode channel on ``mode`` of ``state``, identity elsewhere."""
    if not 0 <= mode < state.modes:
        raise ValueError(f"mode {mode} out of range for a {state.modes}-mode state")
    n = 2 * state.modes
    t = np.eye(n)
    noise = np.zeros((n, n))
    shift = np.zeros(n)
    sl = slice(2 * mode, 2 * mode + 2)
    t[sl, sl] = ch.T
    noise[sl, sl] = ch.N
    shift[sl] = ch.d
    return GaussianState(t @ state.mean + shift, t @ state.cm @ t.T + noise)


def choi_cm(ch, r):
    """Finite-squeezing Choi state: ``ch`` on mode 1 of ``tmsv(r)``."""
    return apply_gaussian(ch, tmsv(r), 0)


@dataclass(frozen=True, eq=False)
class ResourceCM:
    """Zero-mean two-mode resource with blocks ``[[A, C], [C^T, B]]``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    r: float = float("nan")

    @property
    def cm(self):
        return np.block([[self.A, self.C], [np.transpose(self.C), self.B]])

    def state(self):
        return GaussianState(np.zeros(4), self.cm)


def resource_from_state(state):
    if state.modes != 2:
        raise ValueError("a teleportation resource has two modes")
    v = state.cm
    return ResourceCM(v[:2, :2], v[2:, 2:], v[:2, 2:])


def bk_teleport_channel(res, g):
    """Gaussian channel of Braunstein-Kimble teleportation with gain ``g``.

    ``V -> g^2 V + g^2 Z A Z + B - g (Z C + C^T Z)``; the mean is scaled by
    ``g``. An unphysical resource shows up as ``is_physical() == False``.
    """
    if g < 0:
        raise ValueError("gain must be non-negative")
    a, b, c = (np.asarray(x, dtype=float) for x in (res.A, res.B, res.C))
    noise = g ** 2 * Z2 @ a @ Z2 + b - g * (Z2 @ c + c.T @ Z2)
    noise = (noise + noise.T) / 2
    return GaussianChannel(g * I2, noise, np.zeros(2), "bk", {"g": g})


def finite_resource_squeezing(eta, nu):
    if eta <= 0:
        raise ValueError("eta must be positive")
    arg = (2 * nu - abs(1 - eta)) / (2 * eta)
    if arg <= 0:
        raise ValueError(f"nu={nu} is at or below |1-eta|/2={abs(1 - eta) / 2}; "
                         "the resource would need infinite squeezing")
    return -0.5 * np.log(arg)


def finite_resource(eta, nu):
    """Finite-energy resource that simulates ``(sqrt(eta) I, nu I)`` at gain ``sqrt(eta)``.

    ``a = cosh(2r)/2``, ``b = |1-eta|/2 + eta cosh(2r)/2``,
    ``c = sqrt(eta) sinh(2r)/2`` with ``r = -ln[(2 nu - |1-eta|)/(2 eta)]/2``.
    """
    r = finite_resource_squeezing(eta, nu)
    ch2, sh2 = np.cosh(2 * r), np.sinh(2 * r)
    a = ch2 / 2
    b = abs(1 - eta) / 2 + eta * ch2 / 2
    c = np.sqrt(eta) * sh2 / 2
    res = ResourceCM(a * I2, b * I2, c * Z2, r)
    res.state()  # raises if the blocks are unphysical
    return res


def _sqrt_pos(x):
    # symplectic-type eigen terms: rounding can push a zero slightly negative
    x = np.asarray(x, dtype=complex)
    return np.sqrt(np.where(np.abs(x.imag) < 1e-12, np.maximum(x.real, 0.0), x))


def gaussian_fidelity(s1, s2):
    """Uhlmann (root) fidelity of two Gaussian states.

    Uses the auxiliary-matrix closed form

        F = F_tot / det(V1 + V2)^(1/4) * exp(-d^T (V1 + V2)^-1 d / 4),
        V_aux = Omega^T (V1 + V2)^-1 (Omega/4 + V2 Omega V1),
        F_tot^4 = det[2 (sqrt(1 + (V_aux Omega)^-2 / 4) + 1) V_aux],

    with the matrix function evaluated on the eigenvalues of ``V_aux Omega``.
    If either state is pure the overlap ``F^2 = Tr(rho1 rho2)`` is used
    instead, which avoids the square-root branch point of the general form.
    """
    if s1.modes != s2.modes:
        raise ValueError("states must have the same number of modes")
    vs = s1.cm + s2.cm
    vs_inv = np.linalg.inv(vs)
    delta = s2.mean - s1.mean
    disp = np.exp(-0.25 * delta @ vs_inv @ delta)
    det_vs = np.linalg.det(vs)
    if s1.is_pure() or s2.is_pure():
        # Tr(rho1 rho2) = exp(-d^T Vs^-1 d / 2) / sqrt(det Vs)
        f = det_vs ** -0.25 * disp
        return float(min(f, 1.0))
    om = omega(s1.modes)
    vaux = om.T @ vs_inv @ (om / 4 + s2.cm @ om @ s1.cm)
    lam = np.linalg.eigvals(vaux @ om)
    g = 2.0 * (_sqrt_pos(1.0 + lam ** -2.0 / 4.0) + 1.0)
    ftot4 = (np.prod(g) * np.linalg.det(vaux)).real
    f = max(ftot4, 0.0) ** 0.25 / det_vs ** 0.25 * disp
    return float(min(max(f, 0.0), 1.0))


@dataclass(frozen=True)
class GaussianFamily:
    """A phase-insensitive channel family in one noise parameter.

    ``thermal_loss`` and ``amplifier`` are parametrised by the thermal number
    ``nbar`` at fixed ``eta``; ``additive`` by its noise ``nu``.
    """

    kind: str
    eta: float = 1.0

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown family {self.kind!r}; expected one of {CHANNEL_KINDS}")
        if self.kind == "thermal_loss" and not 0.0 <= self.eta < 1.0:
            raise ValueError("thermal-loss family needs 0 <= eta < 1")
        if self.kind == "amplifier" and self.eta <= 1.0:
            raise ValueError("amplifier family needs eta > 1")
        if self.kind == "additive" and self.eta != 1.0:
            raise ValueError("additive family has eta = 1")

    def channel(self, theta):
        if self.kind == "additive":
            return make_gaussian_channel("additive", nu=theta)
        return make_gaussian_channel(self.kind, eta=self.eta, nbar=theta)

    def noise(self, theta):
        """The channel's ``nu`` as a function of the parameter."""
        if self.kind == "additive":
            return theta
        return abs(1 - self.eta) * (theta + 0.5)


def gaussian_family(kind, eta=None):
    if eta is None:
        eta = {"thermal_loss": 0.6, "amplifier": 2.0, "additive": 1.0}.get(kind, 1.0)
    return GaussianFamily(kind, float(eta))


_POSITIVE = (0.0, np.inf)


def default_gaussian_step(theta):
    return 0.1 * max(abs(theta), 1e-3)


def qfi_gaussian(family, theta, r, dtheta=None):
    """QFI of the finite-squeezing Choi family ``theta -> choi_cm(E_theta, r)``.

    The fidelity route uses a relative step with Richardson extrapolation:
    closed-form Gaussian fidelities near a pure symplectic mode are only
    accurate to ~1e-8, which rules out tiny steps.
    """
    h = default_gaussian_step(theta) if dtheta is None else dtheta
    return state_qfi_fidelity(lambda t: choi_cm(family.channel(t), r), theta, h,
                              fidelity=gaussian_fidelity, domain=_POSITIVE,
                              extrapolate=True)


class ChoiLimit(NamedTuple):
    value: float
    r_grid: tuple
    sequence: tuple
    monotone: bool
    converged: bool


def extrapolate_geometric(r_grid, values):
    """Limit ``r -> oo`` under ``Q(r) = Q_oo + sum_k c_k exp(-2 k r)``.

    With ``m`` grid points the terms ``k = 1 .. m-1`` are fitted exactly
    (least squares if over-determined by a caller-supplied longer grid).
    """
    r = np.asarray(r_grid, dtype=float)
    q = np.asarray(values, dtype=float)
    terms = min(len(r) - 1, 2)
    design = np.column_stack([np.exp(-2 * k * r) for k in range(0, terms + 1)])
    coef, *_ = np.linalg.lstsq(design, q, rcond=None)
    return float(coef[0])


def qfi_choi_limit(family, theta, r_grid=(1.0, 2.0, 3.0), dtheta=None):
    """Asymptotic (infinite-squeezing) Choi QFI by extrapolation over ``r_grid``."""
    r_grid = tuple(float(r) for r in r_grid)
    if len(r_grid) < 3 or any(b <= a for a, b in zip(r_grid, r_grid[1:])):
        raise ValueError("r_grid must be strictly increasing with at least 3 points")
    results = [qfi_gaussian(family, theta, r, dtheta) for r in r_grid]
    seq = tuple(float(q.value) for q in results)
    steps = np.diff(seq)
    scale = max(abs(seq[-1]), 1e-300)
    monotone = bool(np.all(steps >= -1e-6 * scale) or np.all(steps <= 1e-6 * scale))
    if not monotone:
        raise ConvergenceError(f"QFI sequence over r={r_grid} is not monotone: {seq}")
    value = extrapolate_geometric(r_grid, seq)
    return ChoiLimit(value, r_grid, seq, monotone, all(q.converged for q in results))


def resource_family(family):
    """``theta -> sigma_nu(theta)``, the finite resource of the family's channel."""
    eta = family.eta

    def state(theta):
        return finite_resource(eta, family.noise(theta)).state()

    return state


def qfi_suboptimal(family, theta, dtheta=None):
    """QFI of the finite-energy resource family, the program state of the simulation."""
    h = default_gaussian_step(theta) if dtheta is None else dtheta
    finite_resource(family.eta, family.noise(theta - h / 2))  # precondition check
    return state_qfi_fidelity(resource_family(family), theta, h,
                              fidelity=gaussian_fidelity, domain=_POSITIVE,
                              extrapolate=True)


def qfi_asymptotic_closed(kind, theta):
    """Infinite-squeezing Choi QFI: ``1/[nbar(nbar+1)]`` or ``1/nu^2`` (additive)."""
    if theta <= 0:
        raise ValueError("parameter must be positive")
    if kind == "additive":
        return theta ** -2.0
    if kind in ("thermal_loss", "amplifier"):
        return 1.0 / (theta * (theta + 1.0))
    raise ValueError(f"unknown family {kind!r}")


def qfi_suboptimal_closed(kind, theta):
    """Finite-resource QFI: ``1/nbar^2`` (loss, amplifier) or ``1/nu^2`` (additive)."""
    if kind not in CHANNEL_KINDS:
        raise ValueError(f"unknown family {kind!r}")
    if theta <= 0:
        raise ValueError("parameter must be positive")
    return theta ** -2.0


class BkErrorBound(NamedTuple):
    lower: float
    witness: str
    witness_fidelity: float


def bk_error_lower_bound(r, N, g=1.0, points=21):
    """Lower bound on the energy-bounded diamond distance between BK teleportation and identity.

    The supremum over inputs with ``<N> <= N`` is replaced by a maximum over
    two Gaussian test families: coherent states on the circle ``|alpha|^2 = E``
    and TMSV inputs (with a reference mode) of total energy ``E``, for ``E``
    on a grid in ``[0, N]``. Each witness contributes ``2 (1 - F)``, a lower
    bound on the unnormalised trace norm (range [0, 2]).
    """
    if r < 0 or N < 0:
        raise ValueError("r and N must be non-negative")
    ch = bk_teleport_channel(resource_from_state(tmsv(r)), g)
    best = BkErrorBound(0.0, "none", 1.0)
    for energy in np.linspace(0.0, N, points):
        # coherent |alpha|^2 = energy, quadrature mean sqrt(2 energy)
        probe = coherent_state(np.sqrt(2 * energy), 0.0)
        f = gaussian_fidelity(probe, apply_gaussian(ch, probe))
        if 2 * (1 - f) > best.lower:
            best = BkErrorBound(2 * (1 - f), f"coherent(E={energy:g})", f)
        # two-mode input, total photon number 2 sinh^2(s) = energy
        s = np.arcsinh(np.sqrt(energy / 2))
        probe2 = tmsv(s)
        f2 = gaussian_fidelity(probe2, apply_gaussian(ch, probe2, 0))
        if 2 * (1 - f2) > best.lower:
            best = BkErrorBound(2 * (1 - f2), f"tmsv(E={energy:g})", f2)
    return best
