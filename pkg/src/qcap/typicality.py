"""Typical sequences, typical subspaces, and reduced tensor-power channels.

Counting and probability mass over length-n sequences are computed through
type classes (symbol-count compositions): a sequence's probability depends
only on its composition, so reports stay polynomial in n even when the
sequence space is exponential.  Dense enumeration and dense operators are
used only under explicit caps.

The block-channel constructions follow the two-step reduction of an n-fold
product channel: keep only the Kraus products whose weight is typical for
the per-use Kraus weight distribution, then project the output onto the
typical subspace of the single-use output state.  Reduced channels are held
in structured form (base factors, factor-index sequences, optional output
projector); dense Kraus matrices are materialized lazily.

All typicality inequalities are inclusive (<=), and count-versus-bound
checks compare exact integer counts against real bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import linalg
from .channels import (
    KrausChannel,
    apply,
    gram_matrix,
    is_trace_preserving,
    kraus_stack,
    minimal_kraus,
)
from .codes import CodeSubspace, normalized_projector
from .channels import coherent_information
from .errors import CapExceededError, InvariantViolationError

# dense-enumeration guard for explicit sequence lists
SEQUENCE_ENUM_CAP = 1 << 16
# dense-operator guard for materialized block-channel matrices (entries)
MATERIALIZE_ENTRY_CAP = 1 << 24
# dense-matrix guard for output-side operators held in memory (dimension)
DENSE_OUTPUT_CAP = 1 << 11


# ------------------------------------------------------------------ type classes

def _compositions(total: int, bins: int):
    """All tuples of nonnegative ints of length `bins` summing to `total`."""
    if bins == 1:
        yield (total,)
        return
    for dividers in itertools.combinations(range(total + bins - 1), bins - 1):
        prev = -1
        counts = []
        for d in dividers:
            counts.append(d - prev - 1)
            prev = d
        counts.append(total + bins - 1 - prev - 1)
        yield tuple(counts)


def _multinomial(counts) -> int:
    total = sum(counts)
    out = 1
    for c in counts:
        out *= math.comb(total, c)
        total -= c
    return out


def _multiset_permutations(counts):
    """Distinct arrangements of the multiset {symbol j with multiplicity counts[j]}."""
    n = sum(counts)
    remaining = list(counts)
    seq: list[int] = []

    def rec():
        if len(seq) == n:
            yield tuple(seq)
            return
        for j, c in enumerate(remaining):
            if c:
                remaining[j] -= 1
                seq.append(j)
                yield from rec()
                seq.pop()
                remaining[j] += 1

    yield from rec()


@dataclass(frozen=True)
class TypeClass:
    """One symbol-count composition: all its sequences share one probability."""

    counts: tuple[int, ...]
    log2_probability: float
    sequence_count: int


@dataclass(frozen=True)
class TypicalSetSpec:
    weights: tuple[float, ...]
    block_length: int
    epsilon: float

    def __post_init__(self):
        linalg.assert_distribution(self.weights)
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.block_length < 1:
            raise InvariantViolationError("block_length must be >= 1")
        if not self.epsilon > 0.0:
            raise InvariantViolationError("epsilon must be positive")


@dataclass(frozen=True)
class TypicalSetReport:
    typical_count: int
    count_bound: float
    mass: float
    entropy: float


def _power_of_two(exponent: float) -> float:
    try:
        return 2.0**exponent
    except OverflowError:
        return math.inf


def _typical_classes(weights, n: int, eps: float) -> tuple[float, list[TypeClass]]:
    """Entropy and the typical type classes of the product distribution.

    Symbols with zero weight never occur in a positive-probability sequence
    and are excluded from the compositions outright.
    """
    p = linalg.assert_distribution(weights)
    entropy = linalg.shannon_entropy(p)
    support = np.flatnonzero(p > 0.0)
    logp = np.log2(p[support])
    lo = -n * (entropy + eps)
    hi = -n * (entropy - eps)
    classes = []
    for comp in _compositions(n, support.size):
        log2p = float(np.dot(np.asarray(comp, dtype=float), logp))
        if lo <= log2p <= hi:
            full = [0] * p.size
            for idx, c in zip(support, comp):
                full[idx] = c
            classes.append(TypeClass(counts=tuple(full), log2_probability=log2p,
                                     sequence_count=_multinomial(comp)))
    return entropy, classes


def typical_sequences(spec: TypicalSetSpec) -> TypicalSetReport:
    """Exact count and probability mass of the typical set, via type classes."""
    entropy, classes = _typical_classes(spec.weights, spec.block_length, spec.epsilon)
    count = sum(c.sequence_count for c in classes)
    mass = math.fsum(c.sequence_count * 2.0**c.log2_probability for c in classes)
    bound = _power_of_two(spec.block_length * (entropy + spec.epsilon))
    return TypicalSetReport(typical_count=count, count_bound=bound,
                            mass=mass, entropy=entropy)


def enumerate_typical_sequences(spec: TypicalSetSpec) -> list[tuple[int, ...]]:
    """Explicit typical sequences (symbol index tuples); capped enumeration."""
    _, classes = _typical_classes(spec.weights, spec.block_length, spec.epsilon)
    total = sum(c.sequence_count for c in classes)
    if total > SEQUENCE_ENUM_CAP:
        raise CapExceededError(f"{total} typical sequences exceed the enumeration cap")
    out: list[tuple[int, ...]] = []
    for cls in classes:
        out.extend(_multiset_permutations(cls.counts))
    return out


def log_probability_variance(weights) -> float:
    """Variance of -log2 P(a) under P, the scale entering decay-rate estimates."""
    p = linalg.assert_distribution(weights)
    sup = p[p > 0.0]
    h = float(-np.sum(sup * np.log2(sup)))
    return float(np.sum(sup * (-np.log2(sup) - h) ** 2))


# ------------------------------------------------------------------ decay fits

@dataclass(frozen=True)
class DecayFit:
    """Log-linear fit of deviations-from-one against the block length.

    Only points with deviation strictly inside (0, 1) enter the fit (a
    deviation of exactly 1 means the typical set was empty, 0 means it is
    everything); fitted_rate is None with fewer than 3 usable points.
    """

    epsilon: float
    block_lengths: tuple[int, ...]
    deviations: tuple[float, ...]
    fitted_rate: float | None
    sigma_sq: float


def fit_decay(ns, deviations, epsilon: float, sigma_sq: float) -> DecayFit:
    ns = tuple(int(n) for n in ns)
    deviations = tuple(float(d) for d in deviations)
    if any(not 0.0 <= d <= 1.0 for d in deviations):
        raise ValueError("deviations must lie in [0, 1]")
    pts = [(n, d) for n, d in zip(ns, deviations) if 0.0 < d < 1.0]
    rate = None
    if len(pts) >= 3:
        xs = np.array([n for n, _ in pts], dtype=float)
        ys = np.array([math.log(d) for _, d in pts])
        slope = np.polyfit(xs, ys, 1)[0]
        rate = float(-slope)
    return DecayFit(epsilon=epsilon, block_lengths=ns, deviations=deviations,
                    fitted_rate=rate, sigma_sq=sigma_sq)


def typical_set_series(weights, eps: float, ns) -> tuple[list[TypicalSetReport], DecayFit]:
    """Per-n typical-set reports plus the decay fit of 1 - mass."""
    reports = [typical_sequences(TypicalSetSpec(weights=tuple(weights), block_length=n,
                                                epsilon=eps)) for n in ns]
    fit = fit_decay(ns, [1.0 - r.mass for r in reports], eps,
                    log_probability_variance(weights))
    return reports, fit


# ------------------------------------------------------------------ typical subspaces

@dataclass(frozen=True)
class TypicalSubspace:
    """Typical subspace of rho^(x)n in structured form.

    Stores the eigenbasis of rho and the typical eigenvalue compositions;
    the dense projector and the multi-index indicator are derived on demand
    under the dimension caps.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n: int
    epsilon: float
    entropy: float
    classes: tuple[TypeClass, ...]
    rank: int
    rank_bound: float
    mass: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def block_dim(self) -> int:
        return self.dim**self.n

    @cached_property
    def indicator(self) -> np.ndarray:
        """Boolean mask over multi-indices in the tensor eigenbasis (first factor major)."""
        linalg.check_dimension(self.block_dim)
        w = self.eigenvalues
        support = w > 0.0
        idx = np.arange(self.block_dim)
        counts = np.zeros((self.block_dim, self.dim), dtype=np.int64)
        for k in range(self.n):
            digits = (idx // self.dim ** (self.n - 1 - k)) % self.dim
            counts += np.eye(self.dim, dtype=np.int64)[digits]
        bad = counts[:, ~support].sum(axis=1) > 0
        logp = counts[:, support].astype(float) @ np.log2(w[support])
        lo = -self.n * (self.entropy + self.epsilon)
        hi = -self.n * (self.entropy - self.epsilon)
        return ~bad & (logp >= lo) & (logp <= hi)

    def projector(self) -> np.ndarray:
        """Dense projector onto the typical subspace of rho^(x)n."""
        if self.block_dim > DENSE_OUTPUT_CAP:
            raise CapExceededError(
                f"dense projector of dimension {self.block_dim} exceeds cap {DENSE_OUTPUT_CAP}"
            )
        basis = self.eigenvectors
        full = basis
        for _ in range(self.n - 1):
            full = np.kron(full, basis)
        cols = full[:, self.indicator]
        return cols @ cols.conj().T


def typical_subspace(rho, n: int, eps: float) -> TypicalSubspace:
    """Typical eigenspaces of the n-fold product of a normalized density."""
    rho = linalg.assert_density_operator(rho)
    if n < 1:
        raise InvariantViolationError("n must be >= 1")
    if not eps > 0.0:
        raise InvariantViolationError("epsilon must be positive")
    w, v = linalg.eigh(rho)
    w = np.maximum(w, 0.0)
    w = w / float(np.sum(w))
    entropy, classes = _typical_classes(w, n, eps)
    rank = sum(c.sequence_count for c in classes)
    mass = math.fsum(c.sequence_count * 2.0**c.log2_probability for c in classes)
    return TypicalSubspace(
        eigenvalues=w, eigenvectors=v, n=n, epsilon=eps, entropy=entropy,
        classes=tuple(classes), rank=rank,
        rank_bound=_power_of_two(n * (entropy + eps)), mass=mass,
    )


def typical_projector(rho, n: int, eps: float) -> np.ndarray:
    """Dense projector convenience wrapper around `typical_subspace`."""
    return typical_subspace(rho, n, eps).projector()


# ------------------------------------------------------------------ Kraus weight distribution

def kraus_distribution(ch: KrausChannel) -> np.ndarray:
    """Weight tr(A^dagger A)/|Q| of each Kraus operator, as a distribution.

    Requires a trace-preserving channel in diagonal form (run
    `minimal_kraus` first); its Shannon entropy equals the entropy exchange
    at the uniform input.
    """
    if not is_trace_preserving(ch):
        raise InvariantViolationError("Kraus weight distribution needs a trace-preserving channel")
    h = gram_matrix(ch)
    off = h - np.diag(np.diagonal(h))
    top = max(float(np.max(np.abs(np.diagonal(h)))), 1.0)
    if np.max(np.abs(off)) > 1e-10 * top:
        raise InvariantViolationError("Kraus family is not diagonal; diagonalize first")
    weights = np.real(np.diagonal(h)) / ch.input_dim
    return linalg.assert_distribution(weights, atol=1e-10)


# ------------------------------------------------------------------ block channels

@dataclass(frozen=True)
class ProductChannel:
    """n-fold product channel restricted to typical Kraus sequences.

    Kraus operators are the tensor products of base operators along each
    stored sequence, optionally left-multiplied by the output projector.
    They are materialized lazily; reports about the uniform input do not
    require materialization at all.
    """

    base: KrausChannel
    n: int
    epsilon: float
    classes: tuple[TypeClass, ...]
    kraus_count: int
    output_projector: TypicalSubspace | None = None

    @property
    def input_dim(self) -> int:
        return self.base.input_dim**self.n

    @property
    def output_dim(self) -> int:
        return self.base.output_dim**self.n

    def iter_sequences(self):
        if self.kraus_count > SEQUENCE_ENUM_CAP:
            raise CapExceededError(
                f"{self.kraus_count} Kraus sequences exceed the enumeration cap"
            )
        for cls in self.classes:
            yield from _multiset_permutations(cls.counts)

    def uniform_input_transmission(self) -> float:
        """Exact tr of the (unprojected) typical channel at the uniform input."""
        return math.fsum(c.sequence_count * 2.0**c.log2_probability for c in self.classes)

    def _check_materializable(self) -> None:
        linalg.check_dimension(self.input_dim)
        linalg.check_dimension(self.output_dim)
        entries = self.kraus_count * self.input_dim * self.output_dim
        if entries > MATERIALIZE_ENTRY_CAP:
            raise CapExceededError(
                f"materializing {entries} Kraus entries exceeds cap {MATERIALIZE_ENTRY_CAP}"
            )

    def iter_kraus(self):
        """Yield dense Kraus operators one at a time (cap-guarded)."""
        self._check_materializable()
        proj = None
        if self.output_projector is not None:
            proj = self.output_projector.projector()
        for seq in self.iter_sequences():
            op = self.base.kraus_ops[seq[0]]
            for j in seq[1:]:
                op = np.kron(op, self.base.kraus_ops[j])
            yield op if proj is None else proj @ op

    def apply(self, rho) -> np.ndarray:
        rho = linalg.as_matrix(rho)
        if rho.shape != (self.input_dim, self.input_dim):
            raise ValueError("state dimension does not match block input")
        out = np.zeros((self.output_dim, self.output_dim), dtype=np.complex128)
        for op in self.iter_kraus():
            out += op @ rho @ op.conj().T
        return out

    def to_kraus_channel(self, name: str = "") -> KrausChannel:
        """Dense KrausChannel (trace-decreasing in general); cap-guarded."""
        if self.kraus_count == 0:
            raise InvariantViolationError("empty typical set has no Kraus representation")
        ops = tuple(self.iter_kraus())
        return KrausChannel(input_dim=self.input_dim, output_dim=self.output_dim,
                            kraus_ops=ops, name=name, validate=False)


def _typical_base(ch: KrausChannel) -> tuple[KrausChannel, np.ndarray]:
    base = minimal_kraus(ch)
    weights = kraus_distribution(base)
    return base, weights


def epsilon_typical_channel(ch: KrausChannel, n: int, eps: float) -> ProductChannel:
    """Product channel reduced to its typical Kraus sequences (trace-decreasing)."""
    base, weights = _typical_base(ch)
    _, classes = _typical_classes(weights, n, eps)
    count = sum(c.sequence_count for c in classes)
    return ProductChannel(base=base, n=n, epsilon=eps, classes=tuple(classes),
                          kraus_count=count)


def epsilon_reduced_channel(ch: KrausChannel, n: int, eps: float) -> ProductChannel:
    """Typical channel followed by the projector onto the typical output subspace."""
    base, weights = _typical_base(ch)
    _, classes = _typical_classes(weights, n, eps)
    count = sum(c.sequence_count for c in classes)
    rho_out = apply(base, linalg.max_mixed(base.input_dim))
    subspace = typical_subspace(rho_out, n, eps)
    return ProductChannel(base=base, n=n, epsilon=eps, classes=tuple(classes),
                          kraus_count=count, output_projector=subspace)


# ------------------------------------------------------------------ reduced-channel reports

@dataclass(frozen=True)
class ReducedChannelReport:
    """Per-n summary of the reduced block channel at the uniform input.

    length               Kraus sequence count of the reduced representation
    length_bound         2^(n (S_e + eps))
    typical_transmission tr of the unprojected typical channel
    transmission         tr of the projected (reduced) channel
    frobenius_sq         squared 2-norm of the reduced output
    frobenius_bound      2^(-n (S - 3 eps))
    """

    n: int
    epsilon: float
    length: int
    length_bound: float
    typical_transmission: float
    transmission: float
    frobenius_sq: float
    frobenius_bound: float

    @property
    def counts_within_bound(self) -> bool:
        return self.length <= self.length_bound

    @property
    def norm_within_bound(self) -> bool:
        return self.frobenius_sq <= self.frobenius_bound


def _output_factor_matrices(base: KrausChannel, basis: np.ndarray) -> np.ndarray:
    """(N, M', M') array of A_j A_j^dagger / M in the output eigenbasis."""
    stack = kraus_stack(base)
    prods = np.einsum("jab,jcb->jac", stack, stack.conj())
    rotated = np.einsum("da,jab,be->jde", basis.conj().T, prods, basis, optimize=True)
    return rotated / base.input_dim


def reduced_channel_report(ch: KrausChannel, n: int, eps: float) -> ReducedChannelReport:
    """Transmission and output-norm summary of the reduced block channel.

    Works in the eigenbasis of the single-use output state, where the
    typical projector is diagonal; when every factor matrix is diagonal
    there too (unitary-mixture channels and friends), only vectors of
    length M'^n are ever formed.
    """
    base, weights = _typical_base(ch)
    entropy_exchange_rate, classes = _typical_classes(weights, n, eps)
    count = sum(c.sequence_count for c in classes)
    typical_transmission = math.fsum(
        c.sequence_count * 2.0**c.log2_probability for c in classes)

    rho_out = apply(base, linalg.max_mixed(base.input_dim))
    output_entropy = linalg.von_neumann_entropy(rho_out)
    subspace = typical_subspace(rho_out, n, eps)

    length_bound = _power_of_two(n * (entropy_exchange_rate + eps))
    frobenius_bound = _power_of_two(-n * (output_entropy - 3.0 * eps))

    if count == 0:
        return ReducedChannelReport(
            n=n, epsilon=eps, length=0, length_bound=length_bound,
            typical_transmission=0.0, transmission=0.0,
            frobenius_sq=0.0, frobenius_bound=frobenius_bound)

    if count > SEQUENCE_ENUM_CAP:
        raise CapExceededError(f"{count} typical sequences exceed the enumeration cap")
    factors = _output_factor_matrices(base, subspace.eigenvectors)
    offdiag = factors - np.einsum("jab,ab->jab", factors,
                                  np.eye(base.output_dim))
    ind = subspace.indicator

    if np.max(np.abs(offdiag)) <= 1e-12 * max(np.max(np.abs(factors)), 1e-300):
        diags = np.ascontiguousarray(np.real(np.einsum("jaa->ja", factors)))
        dvec = np.zeros(subspace.block_dim)
        for cls in classes:
            for seq in _multiset_permutations(cls.counts):
                vec = diags[seq[0]]
                for j in seq[1:]:
                    vec = np.kron(vec, diags[j])
                dvec += vec
        transmission = float(np.sum(dvec[ind]))
        frobenius_sq = float(np.sum(dvec[ind] ** 2))
    else:
        if subspace.block_dim > DENSE_OUTPUT_CAP:
            raise CapExceededError(
                f"dense block output dimension {subspace.block_dim} exceeds cap")
        x = np.zeros((subspace.block_dim, subspace.block_dim), dtype=np.complex128)
        for cls in classes:
            for seq in _multiset_permutations(cls.counts):
                op = factors[seq[0]]
                for j in seq[1:]:
                    op = np.kron(op, factors[j])
                x += op
        kept = x[np.ix_(ind, ind)]
        transmission = float(np.real(np.trace(kept)))
        frobenius_sq = float(np.sum(np.abs(kept) ** 2))

    return ReducedChannelReport(
        n=n, epsilon=eps, length=count, length_bound=length_bound,
        typical_transmission=typical_transmission, transmission=transmission,
        frobenius_sq=frobenius_sq, frobenius_bound=frobenius_bound)


@dataclass(frozen=True)
class ReductionVerification:
    """Reduced-channel reports over a block-length range plus decay diagnostics.

    The count and output-norm bounds are exact inequalities checked on every
    row; the two transmissions only approach 1 asymptotically, so they are
    reported as decay fits rather than pass/fail.
    """

    epsilon: float
    reports: tuple[ReducedChannelReport, ...]
    counts_within_bounds: bool
    norms_within_bounds: bool
    typical_decay: DecayFit
    reduced_decay: DecayFit


def verify_reduction_bounds(ch: KrausChannel, ns, eps: float) -> ReductionVerification:
    reports = tuple(reduced_channel_report(ch, int(n), eps) for n in ns)
    base, weights = _typical_base(ch)
    sigma_sq = log_probability_variance(weights)
    typical_fit = fit_decay([r.n for r in reports],
                            [1.0 - r.typical_transmission for r in reports], eps, sigma_sq)
    reduced_fit = fit_decay([r.n for r in reports],
                            [1.0 - r.transmission for r in reports], eps, sigma_sq)
    return ReductionVerification(
        epsilon=eps,
        reports=reports,
        counts_within_bounds=all(r.counts_within_bound for r in reports),
        norms_within_bounds=all(r.norm_within_bound for r in reports),
        typical_decay=typical_fit,
        reduced_decay=reduced_fit,
    )


# ------------------------------------------------------------------ achievable rates

@dataclass(frozen=True)
class RateRow:
    """One block length of the rate demo.

    penalty is computed from the actual reduced channel,
    sqrt(K_n * length) * ||output||_2; penalty_majorant substitutes the
    analytic bounds for every factor (K_n -> 2^(nR), length and norm ->
    their typicality bounds), giving 2^((n/2)(R + S_e - S + 4 eps)), the
    quantity whose sign of exponent decides geometric decay.
    """

    n: int
    code_dim: int
    reduced_length: int
    transmission: float
    penalty: float
    bound: float
    penalty_majorant: float


@dataclass(frozen=True)
class RateTable:
    rate: float
    epsilon: float
    coherent_information: float
    geometric_decay_expected: bool
    rows: tuple[RateRow, ...]


def achievable_rate_table(ch: KrausChannel, rate: float, eps: float, ns) -> RateTable:
    """Ensemble fidelity bound of the reduced block channel at rate R.

    The paper-level criterion R + 4 eps < I(pi, N) decides whether the
    analytic penalty majorant decays geometrically in n.
    """
    if rate < 0.0:
        raise ValueError("rate must be nonnegative")
    base, weights = _typical_base(ch)
    entropy_exchange_rate = linalg.shannon_entropy(weights)
    rho_out = apply(base, linalg.max_mixed(base.input_dim))
    output_entropy = linalg.von_neumann_entropy(rho_out)
    info = output_entropy - entropy_exchange_rate
    exponent_rate = rate + entropy_exchange_rate - output_entropy + 4.0 * eps
    rows = []
    for n in ns:
        n = int(n)
        rep = reduced_channel_report(ch, n, eps)
        code_dim = int(math.floor(2.0 ** (n * rate)))
        penalty = math.sqrt(code_dim * rep.length) * math.sqrt(rep.frobenius_sq)
        rows.append(RateRow(
            n=n, code_dim=code_dim, reduced_length=rep.length,
            transmission=rep.transmission, penalty=penalty,
            bound=rep.transmission - penalty,
            penalty_majorant=_power_of_two(0.5 * n * exponent_rate)))
    return RateTable(rate=rate, epsilon=eps, coherent_information=info,
                     geometric_decay_expected=rate + 4.0 * eps < info,
                     rows=tuple(rows))


def subspace_restricted_info(ch: KrausChannel, code: CodeSubspace) -> float:
    """Coherent information of the uniform density on a subspace."""
    return coherent_information(normalized_projector(code), ch)
