"""Haar-random code ensembles: Monte Carlo and exact averages.

Codes are drawn unitarily invariantly (a fixed subspace rotated by a Haar
unitary); the workhorse results are the closed-form ensemble average of the
squared deviation norm,

  < ||D||_F^2 >_K = (1 - K^-2) / (M^2 - 1)
                    * sum_ij ( tr(W_ij^dagger W_ij) - |tr W_ij|^2 / M ),

its upper bound ||N(pi)||_F^2, and the averaged fidelity bound

  < Fe >_K >= tr N(pi) - sqrt(K |N|) ||N(pi)||_F .

Reproducibility contract: every Monte Carlo sample draws from its own
counter-based stream keyed by (master_seed, sample_index), and aggregation
uses exact (fsum) summation, so results are bit-identical for any worker
count and any scheduling order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import codes, linalg
from .channels import KrausChannel, apply, classify, kraus_stack, minimal_kraus, minimal_length
from .errors import InvariantViolationError


def sample_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent per-sample RNG stream from a counter-based (seed, index) key."""
    key = np.array([master_seed % (1 << 64), index % (1 << 64)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_code(ambient_dim: int, code_dim: int, rng: np.random.Generator) -> codes.CodeSubspace:
    """Draw a code from the unitarily invariant ensemble of K-dim subspaces."""
    basis = linalg.haar_isometry(ambient_dim, code_dim, rng)
    return codes.CodeSubspace(ambient_dim=ambient_dim, code_dim=code_dim, basis=basis)


@dataclass(frozen=True)
class EnsembleSpec:
    ambient_dim: int
    code_dim: int
    sample_count: int
    master_seed: int

    def __post_init__(self):
        if not 1 <= self.code_dim <= self.ambient_dim:
            raise InvariantViolationError("need 1 <= code_dim <= ambient_dim")
        if self.sample_count < 1:
            raise InvariantViolationError("sample_count must be >= 1")


@dataclass(frozen=True)
class EnsembleEstimate:
    mean: float
    std_error: float
    sample_count: int
    master_seed: int


@dataclass(frozen=True)
class ComplexEnsembleEstimate:
    mean: complex
    std_error: float
    sample_count: int
    master_seed: int


def _sample_values(fn, sample_count: int, master_seed: int, threads: int = 1,
                   dtype=float) -> np.ndarray:
    """Evaluate fn(rng) on per-index streams; result is order-independent."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    values = np.empty(sample_count, dtype=dtype)

    def run(i: int) -> None:
        values[i] = fn(sample_stream(master_seed, i))

    if threads <= 1:
        for i in range(sample_count):
            run(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(sample_count)))
    return values


def _estimate(values: np.ndarray, master_seed: int) -> EnsembleEstimate:
    n = len(values)
    mean = math.fsum(values) / n
    if n > 1:
        var = math.fsum((v - mean) ** 2 for v in values.tolist()) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    return EnsembleEstimate(mean=mean, std_error=se, sample_count=n, master_seed=master_seed)


def _estimate_complex(values: np.ndarray, master_seed: int) -> ComplexEnsembleEstimate:
    n = len(values)
    mean = complex(math.fsum(values.real) / n, math.fsum(values.imag) / n)
    if n > 1:
        var = (math.fsum((v - mean.real) ** 2 for v in values.real.tolist())
               + math.fsum((v - mean.imag) ** 2 for v in values.imag.tolist())) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    return ComplexEnsembleEstimate(mean=mean, std_error=se, sample_count=n,
                                   master_seed=master_seed)


# ------------------------------------------------------------------ exact averages

def exact_average_deviation_sq(ch: KrausChannel, code_dim: int) -> float:
    """Closed-form Haar-code average of ||D||_F^2; representation independent."""
    m = ch.input_dim
    if m < 2:
        raise InvariantViolationError("closed form needs input dimension >= 2")
    if not 1 <= code_dim <= m:
        raise ValueError("need 1 <= code_dim <= input_dim")
    stack = kraus_stack(ch)
    grams = np.einsum("iab,jac->ijbc", stack.conj(), stack, optimize=True)
    sum_sq = float(np.sum(np.abs(grams) ** 2))
    traces = np.einsum("ijbb->ij", grams)
    sum_tr = float(np.sum(np.abs(traces) ** 2))
    return (1.0 - code_dim**-2) / (m**2 - 1) * (sum_sq - sum_tr / m)


def deviation_sq_upper_bound(ch: KrausChannel) -> float:
    """||N(pi)||_F^2: a simple majorant of the exact ensemble average."""
    out = apply(ch, linalg.max_mixed(ch.input_dim))
    return linalg.frobenius_norm(out) ** 2


def averaged_fidelity_bound(ch: KrausChannel, code_dim: int) -> float:
    """Analytic ensemble bound tr N(pi) - sqrt(K |N|) ||N(pi)||_F.

    The channel is Kraus-minimized first: redundant operators would inflate
    |N| and needlessly weaken the bound.  May be negative (vacuous).
    """
    minimal = minimal_kraus(ch)
    out = apply(ch, linalg.max_mixed(ch.input_dim))
    transmission = float(np.real(np.trace(out)))
    penalty = math.sqrt(code_dim * len(minimal)) * linalg.frobenius_norm(out)
    return transmission - penalty


# ------------------------------------------------------------------ Monte Carlo

def mc_deviation_sq(ch: KrausChannel, code_dim: int, sample_count: int,
                    master_seed: int, threads: int = 1) -> EnsembleEstimate:
    """Monte Carlo estimate of < ||D||_F^2 >_K over Haar codes."""
    m = ch.input_dim

    def one(rng):
        return codes.deviation_frobenius_sq(sample_code(m, code_dim, rng), ch)

    values = _sample_values(one, sample_count, master_seed, threads)
    return _estimate(values, master_seed)


def mc_average_bound(ch: KrausChannel, code_dim: int, sample_count: int,
                     master_seed: int, threads: int = 1) -> EnsembleEstimate:
    """Monte Carlo mean of the per-code Kraus-form bound p - ||D||_1."""
    m = ch.input_dim

    def one(rng):
        rep = codes.fidelity_bound_kraus(sample_code(m, code_dim, rng), ch)
        return rep.bound_kraus

    values = _sample_values(one, sample_count, master_seed, threads)
    return _estimate(values, master_seed)


@dataclass(frozen=True)
class TraceNormDiagnostic:
    """< ||D||_1 > against its analytic majorant sqrt(K |N| < ||D||_F^2 >)."""

    estimate: EnsembleEstimate
    majorant: float


def trace_norm_diagnostic(ch: KrausChannel, code_dim: int, sample_count: int,
                          master_seed: int, threads: int = 1) -> TraceNormDiagnostic:
    """Expose the rank/Jensen gap: how loose sqrt(K N <||D||^2>) is on average."""
    m = ch.input_dim

    def one(rng):
        rep = codes.fidelity_bound_kraus(sample_code(m, code_dim, rng), ch)
        return rep.deviation_trace_norm

    values = _sample_values(one, sample_count, master_seed, threads)
    majorant = math.sqrt(code_dim * minimal_length(ch)
                         * exact_average_deviation_sq(ch, code_dim))
    return TraceNormDiagnostic(estimate=_estimate(values, master_seed), majorant=majorant)


# ------------------------------------------------------------------ invariant form

@dataclass(frozen=True)
class CodeFormCoefficients:
    """Coefficients of the two-term expansion alpha tr(V^dagger W) + beta tr V^dagger tr W."""

    alpha: float
    beta: float


def code_form_coefficients(ambient_dim: int, code_dim: int) -> CodeFormCoefficients:
    """Closed-form coefficients of the ensemble-averaged code form.

    alpha = (1 - K^-2)/(M^2 - 1), beta = -alpha / M.  They satisfy
    alpha + beta = (1 - K^-2)/(M^2 + M) and alpha M + beta M^2 = 0; the
    latter is what direct evaluation of the form at V = W = 1 gives, and the
    Monte Carlo estimator `code_form_mc` arbitrates it.
    """
    m, k = ambient_dim, code_dim
    if m < 2:
        raise InvariantViolationError("closed form needs ambient dimension >= 2")
    if not 1 <= k <= m:
        raise ValueError("need 1 <= code_dim <= ambient_dim")
    alpha = (1.0 - k**-2) / (m**2 - 1)
    return CodeFormCoefficients(alpha=alpha, beta=-alpha / m)


def code_form_mc(v, w, ambient_dim: int, code_dim: int, sample_count: int,
                 master_seed: int, threads: int = 1) -> ComplexEnsembleEstimate:
    """Monte Carlo average of tr(pi_C V^dagger pi_C W) - tr(pi_C V^dagger) tr(pi_C W) / K."""
    v = linalg.as_matrix(v)
    w = linalg.as_matrix(w)
    m, k = ambient_dim, code_dim
    if v.shape != (m, m) or w.shape != (m, m):
        raise ValueError(f"operators must be {m} x {m}")

    def one(rng):
        b = linalg.haar_isometry(m, k, rng)
        vc = b.conj().T @ v @ b
        wc = b.conj().T @ w @ b
        return (np.trace(vc.conj().T @ wc) / k**2
                - np.trace(vc.conj().T) * np.trace(wc) / k**3)

    values = _sample_values(one, sample_count, master_seed, threads, dtype=complex)
    return _estimate_complex(values, master_seed)


# ------------------------------------------------------------------ Haar moments

@dataclass(frozen=True)
class MomentCheck:
    name: str
    estimate: float
    std_error: float
    target: float
    passed: bool


@dataclass(frozen=True)
class HaarMomentReport:
    dim: int
    sample_count: int
    master_seed: int
    checks: tuple[MomentCheck, ...]

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)


def haar_moment_suite(dim: int, sample_count: int, master_seed: int,
                      threads: int = 1) -> HaarMomentReport:
    """Three matrix-element moments of the Haar sampler, checked at 4 sigma.

    Targets: E|U_11|^2 = 1/M, E|U_11|^4 = 2/(M^2+M), E|U_11|^2 |U_12|^2 =
    1/(M^2+M).  The suite samples the actual unitary sampler (not a faster
    row-vector shortcut) because the sampler itself is under test.
    """
    if dim < 2:
        raise InvariantViolationError("moment suite needs dim >= 2")

    def one(rng):
        u = linalg.haar_unitary(dim, rng)
        a2 = abs(u[0, 0]) ** 2
        return (a2, a2 * a2, a2 * abs(u[0, 1]) ** 2)

    raw = np.empty((sample_count, 3))

    def run(i: int) -> None:
        raw[i] = one(sample_stream(master_seed, i))

    if threads <= 1:
        for i in range(sample_count):
            run(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(sample_count)))

    targets = {
        "abs_u11_sq": 1.0 / dim,
        "abs_u11_fourth": 2.0 / (dim**2 + dim),
        "abs_u11_sq_abs_u12_sq": 1.0 / (dim**2 + dim),
    }
    checks = []
    for col, (name, target) in enumerate(targets.items()):
        est = _estimate(raw[:, col], master_seed)
        passed = abs(est.mean - target) <= 4.0 * est.std_error
        checks.append(MomentCheck(name=name, estimate=est.mean, std_error=est.std_error,
                                  target=target, passed=passed))
    return HaarMomentReport(dim=dim, sample_count=sample_count,
                            master_seed=master_seed, checks=tuple(checks))


# ------------------------------------------------------------------ unital rate curve

@dataclass(frozen=True)
class HammingPoint:
    n: int
    bound: float


@dataclass(frozen=True)
class HammingCurve:
    """Analytic block-length curve 1 - (2^R |N| / |Q'|)^(n/2) for unital channels."""

    rate: float
    kraus_length: int
    output_dim: int
    capacity_bound: float
    converges: bool
    rows: tuple[HammingPoint, ...]


def hamming_rate_curve(ch: KrausChannel, rate: float, ns) -> HammingCurve:
    """Random-coding fidelity curve over block lengths for a unital channel.

    The bound tends to 1 exactly when the rate is below
    log2(output_dim) - log2(minimal length), the random-coding capacity
    bound that attains the quantum Hamming packing scaling.
    """
    info = classify(ch)
    if not info.is_unital:
        raise InvariantViolationError("rate curve is defined for unital channels")
    length = info.length
    base = (2.0**rate) * length / ch.output_dim
    rows = tuple(HammingPoint(n=int(n), bound=1.0 - base ** (n / 2.0)) for n in ns)
    capacity_bound = math.log2(ch.output_dim) - math.log2(length)
    return HammingCurve(rate=rate, kraus_length=length, output_dim=ch.output_dim,
                        capacity_bound=capacity_bound, converges=rate < capacity_bound,
                        rows=rows)
