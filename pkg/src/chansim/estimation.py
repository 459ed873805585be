"""Monte Carlo check that the Bell-probe block protocol reaches the Cramer-Rao bound."""

from dataclasses import dataclass, field

import numpy as np

from .dv_channels import KINDS, make_channel
from .linalg import dagger, projector, tensor
from .metrology import closed_form_dv_qfi, qcrb
from .teleport import bell_basis


def _validate_povm(povm, dim, tol=1e-10):
    povm = [np.asarray(e, dtype=complex) for e in povm]
    if not povm:
        raise ValueError("empty POVM")
    for e in povm:
        if e.shape != (dim, dim):
            raise ValueError(f"POVM element of shape {e.shape} on a {dim}-dim state")
        if not np.allclose(e, dagger(e), atol=tol, rtol=0):
            raise ValueError("POVM element is not Hermitian")
        if np.linalg.eigvalsh(e).min() < -tol:
            raise ValueError("POVM element is not positive semidefinite")
    if not np.allclose(sum(povm), np.eye(dim), atol=tol, rtol=0):
        raise ValueError("POVM elements do not sum to the identity")
    return povm


def outcome_probabilities(state, povm):
    state = np.asarray(state, dtype=complex)
    povm = _validate_povm(povm, state.shape[0])
    probs = np.clip([np.trace(e @ state).real for e in povm], 0.0, None)
    return probs / probs.sum()


def sample_povm(state, povm, shots, seed=None):
    """Outcome counts of ``shots`` independent measurements, multinomial in ``Tr(E_k rho)``."""
    if shots < 0:
        raise ValueError("shots must be non-negative")
    probs = outcome_probabilities(state, povm)
    return np.random.default_rng(seed).multinomial(shots, probs)


def bell_povm(kind):
    """Measurement on the Choi state of a family and the outcomes counted by its estimator.

    Bell projectors are ordered ``Phi+, (X), (Y), (Z)``. For erasure the qubit
    Bell projectors are padded into the 3-level output and a fifth outcome
    detects the flag.
    """
    bells = list(bell_basis().states)
    if kind == "dephasing":
        return bells, [3]
    if kind == "depolarizing":
        return bells, [1, 2, 3]
    if kind == "erasure":
        embed = np.zeros((6, 4), dtype=complex)
        embed[:4, :4] = np.eye(4)
        povm = [embed @ b @ dagger(embed) for b in bells]
        flag = np.zeros(3, dtype=complex)
        flag[2] = 1.0
        povm.append(tensor(projector(flag), np.eye(2)))
        return povm, [4]
    raise ValueError(f"unknown family {kind!r}; expected one of {KINDS}")


@dataclass(frozen=True)
class ExperimentResult:
    theta_true: float
    n: int
    trials: int
    estimates: list
    empirical_var: float
    qcrb: float
    seed: int
    kind: str = "dephasing"
    extra: dict = field(default_factory=dict)

    @property
    def variance_defined(self):
        return self.trials >= 2

    @property
    def mean_estimate(self):
        return float(np.mean(self.estimates))

    @property
    def variance_se(self):
        """Standard error of ``empirical_var`` from the spread of squared errors."""
        if not self.variance_defined:
            return float("nan")
        sq = (np.asarray(self.estimates) - self.theta_true) ** 2
        return float(np.std(sq, ddof=1) / np.sqrt(self.trials))

    def to_dict(self):
        return {
            "kind": self.kind,
            "theta_true": self.theta_true,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "mean_estimate": self.mean_estimate,
            "empirical_var": self.empirical_var if self.variance_defined else None,
            "variance_se": self.variance_se if self.variance_defined else None,
            "qcrb": self.qcrb,
            "estimates": list(self.estimates),
        }


def new_seed():
    """A fresh 63-bit master seed drawn from OS entropy."""
    return int(np.random.SeedSequence().generate_state(2, np.uint32).view(np.uint64)[0] >> 1)


def run_block_experiment(kind, p_true, n, trials, seed=None):
    """Repeat the assisted estimation protocol ``trials`` times.

    Each trial sends ``n`` halves of ``Phi+`` through the channel, measures
    every output pair in the Bell basis and returns the frequency of the
    outcomes that signal an error. For all three families this frequency is
    the maximum-likelihood estimate of ``p``. Trial ``k`` draws from child
    ``k`` of ``SeedSequence(seed)``, so results depend only on the master seed.
    """
    if not 0.0 < p_true < 1.0:
        raise ValueError(f"p_true must lie in (0, 1), got {p_true}")
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be positive")
    seed = new_seed() if seed is None else int(seed)
    state = make_channel(kind, p_true).choi
    povm, signal = bell_povm(kind)
    estimates = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        counts = sample_povm(state, povm, n, child)
        estimates.append(float(counts[signal].sum()) / n)
    est = np.asarray(estimates)
    var = float(np.mean((est - p_true) ** 2))
    bound = qcrb(closed_form_dv_qfi(kind, p_true), n)
    return ExperimentResult(float(p_true), int(n), int(trials), estimates, var, bound,
                            seed, kind)


def sql_scaling_fit(results):
    """Least-squares slope of ``log(variance)`` against ``log(n)``.

    ``results`` holds :class:`ExperimentResult` objects or ``(n, variance)``
    pairs. A slope of -1 is the standard quantum limit.
    """
    pts = [(r.n, r.empirical_var) if isinstance(r, ExperimentResult) else tuple(r)
           for r in results]
    n = np.array([p[0] for p in pts], dtype=float)
    var = np.array([p[1] for p in pts], dtype=float)
    if len(np.unique(n)) < 3:
        raise ValueError("need at least 3 distinct n values")
    if np.log10(n.max() / n.min()) < 2 - 1e-12:
        raise ValueError("the n grid must span at least two decades")
    if np.any(var <= 0):
        raise ValueError("variances must be positive for a log-log fit")
    slope, _ = np.polyfit(np.log(n), np.log(var), 1)
    return float(slope)
