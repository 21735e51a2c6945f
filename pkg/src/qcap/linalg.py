"""Dense complex linear algebra and probability primitives.

Everything in this module operates on plain ``numpy`` arrays (``complex128``,
row-major) and is a pure function of its inputs.  Randomness always enters
through an explicit ``numpy.random.Generator``; no function touches global
RNG state.  Logarithms are base 2 throughout, so entropies are in qubits/bits.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import CapExceededError, InvariantViolationError

# Largest dimension any dense matrix may have.  Tensor powers that would
# exceed this must go through the structured paths in `typicality` instead
# of dense Kronecker products.
DIMENSION_CAP = 1 << 16

HERMITICITY_ATOL = 1e-10
PSD_ATOL = 1e-10
TRACE_ATOL = 1e-10
DISTRIBUTION_ATOL = 1e-12


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-d complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvariantViolationError("matrix contains non-finite entries")
    return m


def check_dimension(dim: int) -> int:
    if dim > DIMENSION_CAP:
        raise CapExceededError(f"dimension {dim} exceeds cap {DIMENSION_CAP}")
    return dim


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def tensor(a, b) -> np.ndarray:
    """Kronecker product with the dimension cap enforced."""
    a, b = as_matrix(a), as_matrix(b)
    check_dimension(a.shape[0] * b.shape[0])
    check_dimension(a.shape[1] * b.shape[1])
    return np.kron(a, b)


def tensor_all(factors) -> np.ndarray:
    """Left-to-right Kronecker product of a sequence of matrices."""
    factors = list(factors)
    if not factors:
        raise ValueError("need at least one factor")
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = tensor(out, f)
    return out


def partial_trace(m, dim_a: int, dim_b: int, keep: str = "A") -> np.ndarray:
    """Partial trace of an operator on H_A (x) H_B over the discarded factor.

    ``keep`` selects the surviving factor, "A" or "B".  The full trace is
    preserved: trace(partial_trace(m)) == trace(m).
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1] or m.shape[0] != dim_a * dim_b:
        raise ValueError(
            f"operator shape {m.shape} incompatible with dims ({dim_a}, {dim_b})"
        )
    r = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    if keep == "B":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def is_hermitian(m: np.ndarray, atol: float = HERMITICITY_ATOL) -> bool:
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= atol


def eigh(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary of eigenvectors as columns) with
    h == V diag(w) V^dagger up to reconstruction error <= 1e-9 * ||h||_F.
    Rejects inputs that are not Hermitian within 1e-10.
    """
    h = as_matrix(h)
    if not is_hermitian(h):
        raise InvariantViolationError("matrix is not Hermitian within tolerance")
    return np.linalg.eigh(h)


def trace_norm(a) -> float:
    """Schatten-1 norm: sum of singular values (sum |eigenvalue| if Hermitian)."""
    a = as_matrix(a)
    if is_hermitian(a):
        return float(np.sum(np.abs(np.linalg.eigvalsh(a))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def frobenius_norm(a) -> float:
    """Schatten-2 norm sqrt(trace(A^dagger A))."""
    return float(np.linalg.norm(as_matrix(a), "fro"))


def _clamped_spectrum(w: np.ndarray) -> np.ndarray:
    """Zero out spurious negative eigenvalues in [-PSD_ATOL, 0); reject worse."""
    if w.size and w[0] < -PSD_ATOL:
        raise InvariantViolationError(
            f"operator is not positive semidefinite (min eigenvalue {w[0]:.3e})"
        )
    return np.maximum(w, 0.0)


def assert_density_operator(rho, *, normalized: bool = True) -> np.ndarray:
    """Validate Hermiticity, positivity and trace of a density operator.

    With ``normalized=False`` the trace may lie anywhere in [0, 1], which is
    what trace-decreasing channels produce.
    """
    rho = as_matrix(rho)
    if not is_hermitian(rho):
        raise InvariantViolationError("density operator is not Hermitian")
    _clamped_spectrum(np.linalg.eigvalsh(rho))
    tr = float(np.real(np.trace(rho)))
    if normalized:
        if abs(tr - 1.0) > TRACE_ATOL:
            raise InvariantViolationError(f"density operator has trace {tr}, not 1")
    elif not -TRACE_ATOL <= tr <= 1.0 + TRACE_ATOL:
        raise InvariantViolationError(f"subnormalized density has trace {tr} outside [0, 1]")
    return rho


def matrix_sqrt_psd(rho) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix."""
    w, v = eigh(rho)
    w = _clamped_spectrum(w)
    return (v * np.sqrt(w)) @ v.conj().T


def von_neumann_entropy(rho) -> float:
    """Entropy -sum(w log2 w) of a normalized density operator, in bits."""
    rho = assert_density_operator(rho, normalized=True)
    w = _clamped_spectrum(np.linalg.eigvalsh(rho))
    w = w[w > 0.0]
    return float(-np.sum(w * np.log2(w)))


def assert_distribution(weights, atol: float = DISTRIBUTION_ATOL) -> np.ndarray:
    p = np.asarray(weights, dtype=float).ravel()
    if p.size == 0:
        raise InvariantViolationError("empty probability distribution")
    if np.min(p) < 0.0:
        raise InvariantViolationError("probability weights must be nonnegative")
    if abs(float(np.sum(p)) - 1.0) > atol:
        raise InvariantViolationError(f"probability weights sum to {np.sum(p)}, not 1")
    return p


def shannon_entropy(weights) -> float:
    """Shannon entropy of a distribution in bits, with 0 log 0 = 0."""
    p = assert_distribution(weights)
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


def fidelity(rho, sigma) -> float:
    """State fidelity ||sqrt(rho) sqrt(sigma)||_1 ^ 2.

    Lies in [0, 1]; equals 1 iff the states coincide, and reduces to
    <psi|sigma|psi> when rho is the pure state |psi><psi|.
    """
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    sr = matrix_sqrt_psd(rho)
    ss = matrix_sqrt_psd(sigma)
    s = np.linalg.svd(sr @ ss, compute_uv=False)
    return min(float(np.sum(s)) ** 2, 1.0)


def purify(rho, rank_tol: float = 1e-12) -> np.ndarray:
    """Minimal purification of a density operator.

    Returns an (r, d) array Psi with r = rank(rho); the purifying vector in
    R (x) Q (reference-major layout) is ``Psi.ravel()`` and satisfies
    tr_R |psi><psi| = rho and tr_Q |psi><psi| = diag of the kept eigenvalues.
    """
    rho = as_matrix(rho)
    w, v = eigh(rho)
    w = _clamped_spectrum(w)
    keep = w > rank_tol
    if not np.any(keep):
        raise InvariantViolationError("cannot purify an (almost) zero operator")
    return (np.sqrt(w[keep])[:, None] * v[:, keep].T).astype(np.complex128)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a unitary from the Haar measure on U(dim).

    QR of a complex Ginibre matrix, with the R-diagonal phases divided out;
    without that correction the raw QR output is not Haar distributed.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    ph = d / np.abs(d)
    return q * ph


def haar_isometry(dim: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """First ``cols`` columns of a Haar unitary, drawn directly.

    Reduced QR of a (dim, cols) Ginibre matrix with the same phase fix as
    `haar_unitary`; the resulting isometry is unitarily invariant.
    """
    if not 1 <= cols <= dim:
        raise ValueError(f"need 1 <= cols <= dim, got cols={cols}, dim={dim}")
    z = (rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    ph = d / np.abs(d)
    return q * ph


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density operator from a normalized Wishart matrix of given rank."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"need 1 <= rank <= dim, got rank={rank}")
    g = (rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))) / math.sqrt(2)
    m = g @ g.conj().T
    return m / np.real(np.trace(m))


def max_mixed(dim: int) -> np.ndarray:
    """The homogeneous density 1/dim on a dim-dimensional space."""
    return np.eye(dim, dtype=np.complex128) / dim
