"""Dense matrix utilities for finite-dimensional quantum states.

States are plain complex ``numpy`` arrays. Functions that need a valid
density matrix check it with :func:`validate_density_matrix`.
"""

from functools import reduce

import numpy as np

# Eigenvalues in [-PSD_TOL, 0) are treated as rounding noise and clamped.
PSD_TOL = 1e-12


class NotPositiveError(ValueError):
    """Raised when a matrix that must be PSD has a clearly negative eigenvalue."""


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def ket(index, dim):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec):
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def is_density_matrix(rho, atol=1e-12):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if not np.allclose(rho, dagger(rho), atol=atol, rtol=0):
        return False
    if abs(np.trace(rho) - 1) > atol:
        return False
    evals = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
    return bool(evals.min() >= -atol)


def validate_density_matrix(rho, atol=1e-12):
    """Return ``rho`` as a complex array, raising ``ValueError`` if it is not a state."""
    rho = np.asarray(rho, dtype=complex)
    if not is_density_matrix(rho, atol=atol):
        raise ValueError("not a density matrix (Hermitian, PSD, unit trace) "
                         f"within tolerance {atol:g}")
    return rho


def tensor(*ops):
    """Kronecker product of any number of square matrices (or vectors)."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    return reduce(np.kron, [np.asarray(op) for op in ops])


def partial_trace(m, dims, keep):
    """Trace out every subsystem of ``m`` whose index is not in ``keep``.

    Parameters
    ----------
    m : array, shape (D, D)
        Operator on the composite space, ``D == prod(dims)``.
    dims : sequence of int
        Local dimensions, first subsystem first (``np.kron`` ordering).
    keep : iterable of int
        Zero-based indices of the subsystems to retain. The output keeps
        them in their original order.

    Returns
    -------
    array
        Reduced operator of dimension ``prod(dims[k] for k in keep)``.
    """
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    keep = sorted(set(int(k) for k in keep))
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")

    n = len(dims)
    t = m.reshape(dims + dims)
    # einsum labels: row index i_k, column index j_k; traced systems share a label
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    rows = [next(letters) for _ in range(n)]
    cols = [rows[k] if k not in keep else next(letters) for k in range(n)]
    out = [rows[k] for k in keep] + [cols[k] for k in keep]
    reduced = np.einsum("".join(rows + cols) + "->" + "".join(out), t)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return reduced.reshape(d, d)


def psd_eigh(m, tol=PSD_TOL):
    """Hermitian eigendecomposition with small negative eigenvalues clamped to 0."""
    m = np.asarray(m)
    evals, evecs = np.linalg.eigh((m + dagger(m)) / 2)
    if evals.size and evals.min() < -tol:
        raise NotPositiveError(f"matrix has eigenvalue {evals.min():.3e} < -{tol:g}")
    return np.clip(evals, 0.0, None), evecs


def psd_sqrt(m, tol=PSD_TOL):
    evals, evecs = psd_eigh(m, tol)
    return (evecs * np.sqrt(evals)) @ dagger(evecs)


def trace_norm(m):
    """Sum of singular values; valid for non-Hermitian operators as well."""
    return float(np.linalg.svd(np.asarray(m), compute_uv=False).sum())


def _sqrt_factor(rho, tol):
    # Columns span the support of rho; F = ||Xr^dag Xs||_1 with rho = Xr Xr^dag.
    evals, evecs = psd_eigh(rho, tol)
    cut = max(evals.max(initial=0.0), 1.0) * 1e-15
    keep = evals > cut
    return evecs[:, keep] * np.sqrt(evals[keep])


def uhlmann_fidelity(rho, sigma, tol=PSD_TOL):
    """Root fidelity ``Tr sqrt(sqrt(sigma) rho sqrt(sigma))``.

    Evaluated as the nuclear norm of ``sqrt(rho) sqrt(sigma)`` restricted to
    the two supports, which keeps rank-deficient inputs accurate to rounding
    level instead of the square root of it.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    xr = _sqrt_factor(rho, tol)
    xs = _sqrt_factor(sigma, tol)
    if xr.shape[1] == 0 or xs.shape[1] == 0:
        return 0.0
    f = np.linalg.svd(dagger(xr) @ xs, compute_uv=False).sum()
    return float(min(max(f, 0.0), 1.0))


def trace_distance(rho, sigma):
    """Normalised trace distance ``||rho - sigma||_1 / 2`` in [0, 1]."""
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return 0.5 * trace_norm(rho - sigma)


def bures_distance(rho, sigma):
    f = uhlmann_fidelity(rho, sigma)
    return float(np.sqrt(max(2.0 * (1.0 - f), 0.0)))


def random_density_matrix(dim, rng=None, rank=None):
    """Hilbert-Schmidt random state ``G G^dag / Tr`` (``rank`` columns of ``G``)."""
    rng = np.random.default_rng(rng)
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_unitary(dim, rng=None):
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    rng = np.random.default_rng(rng)
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
