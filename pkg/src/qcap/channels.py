"""Quantum channels as Kraus families.

A channel is a completely positive map rho -> sum_k A_k rho A_k^dagger with
sum_k A_k^dagger A_k <= 1 (trace-decreasing families are first class; they
model transmission loss, and the trace-preserving-only quantities reject
them explicitly instead of renormalizing).

Kraus lists are not canonical: unitary recombinations represent the same
map, so channel equality is always decided extensionally, by action on a
fixed battery of pseudo-random states.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import InitVar, dataclass

import numpy as np

from . import linalg
from .errors import CapExceededError, InvariantViolationError

COMPLETENESS_ATOL = 1e-10
UNITAL_ATOL = 1e-9
UNIFORM_RTOL = 1e-9
GRAM_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class KrausChannel:
    """A (possibly trace-decreasing) CP map given by its Kraus operators.

    Each operator has shape (output_dim, input_dim).  Construction verifies
    that sum A^dagger A has no eigenvalue above 1 + 1e-10; internal callers
    that build channels from already-validated ones may skip the check.
    """

    input_dim: int
    output_dim: int
    kraus_ops: tuple[np.ndarray, ...]
    name: str = ""
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        ops = []
        for a in self.kraus_ops:
            a = np.array(a, dtype=np.complex128)
            a.setflags(write=False)
            ops.append(a)
        object.__setattr__(self, "kraus_ops", tuple(ops))
        if not ops:
            raise InvariantViolationError("channel needs at least one Kraus operator")
        for a in ops:
            if a.shape != (self.output_dim, self.input_dim):
                raise InvariantViolationError(
                    f"Kraus operator shape {a.shape} != ({self.output_dim}, {self.input_dim})"
                )
            if not np.all(np.isfinite(a)):
                raise InvariantViolationError("Kraus operator has non-finite entries")
        if validate:
            lo, hi = completeness_defect_bounds(self)
            if hi > COMPLETENESS_ATOL:
                raise InvariantViolationError(
                    f"Kraus family is not trace-nonincreasing: defect {hi:.3e}"
                )

    def __len__(self) -> int:
        return len(self.kraus_ops)


def kraus_stack(ch: KrausChannel) -> np.ndarray:
    """Kraus operators as one (N, output_dim, input_dim) array."""
    return np.stack(ch.kraus_ops)


def completeness_defect_bounds(ch: KrausChannel) -> tuple[float, float]:
    """(min, max) eigenvalue of sum A^dagger A - 1."""
    stack = kraus_stack(ch)
    total = np.einsum("kab,kac->bc", stack.conj(), stack)
    w = np.linalg.eigvalsh(total - np.eye(ch.input_dim))
    return float(w[0]), float(w[-1])


def is_trace_preserving(ch: KrausChannel, atol: float = COMPLETENESS_ATOL) -> bool:
    lo, hi = completeness_defect_bounds(ch)
    return max(abs(lo), abs(hi)) <= atol


def apply(ch: KrausChannel, rho) -> np.ndarray:
    """sum_k A_k rho A_k^dagger; positivity-preserving and trace-nonincreasing."""
    rho = linalg.as_matrix(rho)
    if rho.shape != (ch.input_dim, ch.input_dim):
        raise ValueError(f"state shape {rho.shape} != channel input dim {ch.input_dim}")
    stack = kraus_stack(ch)
    tmp = stack @ rho
    return np.einsum("kab,kcb->ac", tmp, stack.conj())


def transmission_probability(ch: KrausChannel, rho) -> float:
    """trace of the channel output; < 1 signals transmission loss."""
    return float(np.real(np.trace(apply(ch, rho))))


def stinespring_isometry(ch: KrausChannel) -> np.ndarray:
    """Block isometry V: Q -> E (x) Q' with environment-major row layout.

    Rows [k*output_dim, (k+1)*output_dim) hold A_k, so tracing out E from
    V rho V^dagger reproduces the channel and V^dagger V = sum A^dagger A
    (the identity iff the channel is trace-preserving, <= 1 otherwise).
    """
    return np.vstack(ch.kraus_ops)


def kraus_from_isometry(v, env_dim: int, *, name: str = "",
                        require_trace_preserving: bool = False) -> KrausChannel:
    """Channel with Kraus blocks read off an isometry-like map Q -> E (x) Q'."""
    v = linalg.as_matrix(v)
    rows, input_dim = v.shape
    if env_dim < 1 or rows % env_dim:
        raise ValueError(f"row count {rows} is not divisible by env_dim {env_dim}")
    output_dim = rows // env_dim
    ops = tuple(v[k * output_dim:(k + 1) * output_dim, :] for k in range(env_dim))
    ch = KrausChannel(input_dim=input_dim, output_dim=output_dim, kraus_ops=ops, name=name)
    if require_trace_preserving and not is_trace_preserving(ch):
        raise InvariantViolationError("map is not an isometry within tolerance")
    return ch


def gram_matrix(ch: KrausChannel) -> np.ndarray:
    """Hermitian N x N matrix of overlaps tr(A_i^dagger A_j)."""
    stack = kraus_stack(ch)
    return np.einsum("iab,jab->ij", stack.conj(), stack)


def diagonalize_kraus(ch: KrausChannel) -> KrausChannel:
    """Unitarily recombine the Kraus list so the Gram matrix is diagonal.

    The channel action is unchanged.  Already-diagonal inputs are returned
    as-is; otherwise operators come back ordered by decreasing weight.
    """
    h = gram_matrix(ch)
    off = h - np.diag(np.diagonal(h))
    if not len(ch) > 1 or np.max(np.abs(off)) <= COMPLETENESS_ATOL:
        return ch
    _, v = np.linalg.eigh(h)
    stack = kraus_stack(ch)
    new_ops = np.einsum("jm,jab->mab", v, stack)[::-1]
    return KrausChannel(input_dim=ch.input_dim, output_dim=ch.output_dim,
                        kraus_ops=tuple(new_ops), name=ch.name, validate=False)


def minimal_length(ch: KrausChannel) -> int:
    """Minimal number of Kraus operators: the rank of the Gram matrix.

    Eigenvalues above 1e-10 times the largest one count toward the rank,
    which makes the cutoff scale-free.
    """
    w = np.linalg.eigvalsh(gram_matrix(ch))
    top = float(w[-1])
    if top <= 0.0:
        return 0
    return int(np.sum(w > GRAM_RANK_RTOL * top))


def minimal_kraus(ch: KrausChannel) -> KrausChannel:
    """Diagonal representation with the null operators dropped."""
    diag = diagonalize_kraus(ch)
    weights = np.real(np.diagonal(gram_matrix(diag)))
    top = float(np.max(weights))
    if top <= 0.0:
        return diag
    keep = [a for a, w in zip(diag.kraus_ops, weights) if w > GRAM_RANK_RTOL * top]
    if len(keep) == len(diag.kraus_ops):
        return diag
    return KrausChannel(input_dim=ch.input_dim, output_dim=ch.output_dim,
                        kraus_ops=tuple(keep), name=ch.name, validate=False)


def tensor_power(ch: KrausChannel, n: int) -> KrausChannel:
    """n independent uses of the channel, as a dense |N|^n-operator family."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return ch
    for base in (ch.input_dim, ch.output_dim, len(ch)):
        if base ** n > linalg.DIMENSION_CAP:
            raise CapExceededError(
                f"tensor power {base}^{n} exceeds cap {linalg.DIMENSION_CAP}; "
                "use the structured constructions in qcap.typicality"
            )
    ops = tuple(
        linalg.tensor_all(combo)
        for combo in itertools.product(ch.kraus_ops, repeat=n)
    )
    return KrausChannel(input_dim=ch.input_dim ** n, output_dim=ch.output_dim ** n,
                        kraus_ops=ops, name=f"{ch.name}^{n}" if ch.name else "",
                        validate=False)


def reduce_channel(ch: KrausChannel, indices) -> KrausChannel:
    """Sub-channel keeping only the listed Kraus operators (trace-decreasing)."""
    indices = list(indices)
    if not indices:
        raise ValueError("reduction needs a nonempty index subset")
    if len(set(indices)) != len(indices):
        raise ValueError("reduction indices must be distinct")
    if not all(0 <= i < len(ch) for i in indices):
        raise ValueError(f"reduction indices out of range 0..{len(ch) - 1}")
    ops = tuple(ch.kraus_ops[i] for i in indices)
    return KrausChannel(input_dim=ch.input_dim, output_dim=ch.output_dim,
                        kraus_ops=ops, name=ch.name, validate=False)


def compose(outer: KrausChannel, inner: KrausChannel) -> KrausChannel:
    """outer after inner, with the product Kraus family."""
    if inner.output_dim != outer.input_dim:
        raise ValueError("composition dimension mismatch")
    ops = tuple(b @ a for b in outer.kraus_ops for a in inner.kraus_ops)
    return KrausChannel(input_dim=inner.input_dim, output_dim=outer.output_dim,
                        kraus_ops=ops, validate=False)


# ------------------------------------------------------------------ information

def entropy_exchange(rho, ch: KrausChannel) -> float:
    """Entropy passed to the environment, from the matrix W_ij = tr(A_i rho A_j^dagger).

    Defined here for trace-preserving channels only; trace-decreasing input
    is rejected rather than silently renormalized.
    """
    rho = linalg.assert_density_operator(rho)
    if rho.shape != (ch.input_dim, ch.input_dim):
        raise ValueError("state dimension does not match channel input")
    if not is_trace_preserving(ch):
        raise InvariantViolationError("entropy exchange needs a trace-preserving channel")
    stack = kraus_stack(ch)
    tmp = stack @ rho
    w = np.einsum("iab,jab->ij", tmp, stack.conj())
    return linalg.von_neumann_entropy(w)


def entropy_exchange_via_purification(rho, ch: KrausChannel) -> float:
    """Same quantity through an explicit minimal purification; cross-check path."""
    rho = linalg.assert_density_operator(rho)
    if not is_trace_preserving(ch):
        raise InvariantViolationError("entropy exchange needs a trace-preserving channel")
    psi = linalg.purify(rho)                      # (r, input_dim)
    r = psi.shape[0]
    dim = r * ch.output_dim
    out = np.zeros((dim, dim), dtype=np.complex128)
    for a in ch.kraus_ops:
        v = (psi @ a.T).ravel()
        out += np.outer(v, v.conj())
    return linalg.von_neumann_entropy(out)


def coherent_information(rho, ch: KrausChannel) -> float:
    """Output entropy minus entropy exchange, in bits."""
    se = entropy_exchange(rho, ch)
    return linalg.von_neumann_entropy(apply(ch, rho)) - se


@dataclass(frozen=True)
class ChannelInfoReport:
    is_trace_preserving: bool
    is_unital: bool
    is_uniform: bool
    length: int
    output_entropy: float | None
    entropy_exchange: float | None
    coherent_information: float | None


def classify(ch: KrausChannel) -> ChannelInfoReport:
    """Structural flags plus the information quantities at the uniform input.

    Unital: the maximally mixed input maps to the maximally mixed output
    (trace-norm deviation <= 1e-9).  Uniform: the nonzero weights of the
    diagonalized Gram matrix agree to relative deviation 1e-9, i.e. all
    error operators fire with the same probability.  The entropy fields are
    None for trace-decreasing channels, where they are not defined here.
    """
    tp = is_trace_preserving(ch)
    pi_in = linalg.max_mixed(ch.input_dim)
    out = apply(ch, pi_in)
    unital = linalg.trace_norm(out - linalg.max_mixed(ch.output_dim)) <= UNITAL_ATOL
    w = np.linalg.eigvalsh(gram_matrix(ch))
    top = float(w[-1])
    nz = w[w > GRAM_RANK_RTOL * top] if top > 0.0 else w[:0]
    uniform = bool(nz.size) and float((nz[-1] - nz[0]) / nz[-1]) <= UNIFORM_RTOL
    if tp:
        s_out = linalg.von_neumann_entropy(out)
        s_e = entropy_exchange(pi_in, ch)
        info = s_out - s_e
    else:
        s_out = s_e = info = None
    return ChannelInfoReport(
        is_trace_preserving=tp,
        is_unital=bool(unital),
        is_uniform=uniform,
        length=minimal_length(ch),
        output_entropy=s_out,
        entropy_exchange=s_e,
        coherent_information=info,
    )


def channels_equal(a: KrausChannel, b: KrausChannel, *, states: int = 20,
                   seed: int = 0x51A7E5, atol: float = 1e-10) -> bool:
    """Extensional equality on a fixed battery of pseudo-random densities."""
    if (a.input_dim, a.output_dim) != (b.input_dim, b.output_dim):
        return False
    battery_rng = np.random.default_rng(seed)
    for _ in range(states):
        rho = linalg.random_density(a.input_dim, battery_rng)
        if np.max(np.abs(apply(a, rho) - apply(b, rho))) > atol:
            return False
    return True


# ------------------------------------------------------------------ constructors

def identity_channel(dim: int, name: str = "identity") -> KrausChannel:
    return KrausChannel(input_dim=dim, output_dim=dim,
                        kraus_ops=(np.eye(dim, dtype=np.complex128),), name=name)


def phase_flip(p: float) -> KrausChannel:
    """Qubit channel applying Z with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    z = np.diag([1.0, -1.0]).astype(np.complex128)
    ops = (math.sqrt(1.0 - p) * np.eye(2, dtype=np.complex128), math.sqrt(p) * z)
    return KrausChannel(input_dim=2, output_dim=2, kraus_ops=ops, name=f"phase_flip({p})")


def _weyl_operators(dim: int) -> list[np.ndarray]:
    shift = np.roll(np.eye(dim, dtype=np.complex128), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))
    return [
        np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        for a in range(dim) for b in range(dim)
    ]


def depolarizing(p: float, dim: int = 2) -> KrausChannel:
    """rho -> (1-p) rho + p * tr(rho) * 1/dim, via the Weyl operator family."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    weyl = _weyl_operators(dim)
    w_id = 1.0 - p + p / dim**2
    w_err = p / dim**2
    ops = [math.sqrt(w_id) * weyl[0]]
    ops += [math.sqrt(w_err) * w for w in weyl[1:]]
    return KrausChannel(input_dim=dim, output_dim=dim, kraus_ops=tuple(ops),
                        name=f"depolarizing({p})")


def random_unitary_channel(unitaries, probs=None, name: str = "random_unitary") -> KrausChannel:
    """Mixture rho -> sum_i p_i U_i rho U_i^dagger of unitary errors."""
    unitaries = [linalg.as_matrix(u) for u in unitaries]
    if not unitaries:
        raise ValueError("need at least one unitary")
    dim = unitaries[0].shape[0]
    for u in unitaries:
        if u.shape != (dim, dim):
            raise ValueError("all unitaries must be square with equal dimension")
        if np.max(np.abs(u.conj().T @ u - np.eye(dim))) > 1e-9:
            raise InvariantViolationError("operator is not unitary within tolerance")
    if probs is None:
        probs = np.full(len(unitaries), 1.0 / len(unitaries))
    probs = linalg.assert_distribution(probs)
    if probs.size != len(unitaries):
        raise ValueError("probs length must match the number of unitaries")
    ops = tuple(math.sqrt(p) * u for p, u in zip(probs, unitaries))
    return KrausChannel(input_dim=dim, output_dim=dim, kraus_ops=ops, name=name)


def haar_random_channel(input_dim: int, output_dim: int, kraus_count: int,
                        rng: np.random.Generator, name: str = "haar_random") -> KrausChannel:
    """Trace-preserving channel from a Haar-random Stinespring isometry."""
    if output_dim * kraus_count < input_dim:
        raise ValueError("output_dim * kraus_count must be >= input_dim for an isometry")
    v = linalg.haar_isometry(output_dim * kraus_count, input_dim, rng)
    return kraus_from_isometry(v, kraus_count, name=name, require_trace_preserving=True)


_BUILDERS = {
    "identity": identity_channel,
    "phase_flip": phase_flip,
    "depolarizing": depolarizing,
    "random_unitary": random_unitary_channel,
    "haar_random": haar_random_channel,
}


def make_channel(kind: str, **params) -> KrausChannel:
    """Dispatch to the named constructor; see _BUILDERS for the accepted kinds."""
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown channel kind {kind!r}; choose from {sorted(_BUILDERS)}")
    return builder(**params)
