"""Haar code ensembles: exact averages, Monte Carlo agreement, moment checks."""

import math

import numpy as np
import pytest

from qcap import channels as qch
from qcap import codes, linalg
from qcap import random_coding as rc
from qcap.errors import InvariantViolationError


def weyl_pair(dim):
    shift = np.roll(np.eye(dim, dtype=complex), 1, axis=0)
    return [np.eye(dim, dtype=complex), shift]


# ---------------------------------------------------------------- streams

def test_sample_streams_are_reproducible_and_distinct():
    a = rc.sample_stream(123, 0).standard_normal(4)
    b = rc.sample_stream(123, 0).standard_normal(4)
    c = rc.sample_stream(123, 1).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_mc_thread_count_does_not_change_bits():
    ch = qch.phase_flip(0.25)
    serial = rc.mc_average_bound(ch, 1, 64, master_seed=5, threads=1)
    threaded = rc.mc_average_bound(ch, 1, 64, master_seed=5, threads=4)
    assert serial == threaded


def test_ensemble_spec_validation():
    with pytest.raises(InvariantViolationError):
        rc.EnsembleSpec(ambient_dim=2, code_dim=3, sample_count=10, master_seed=0)
    with pytest.raises(InvariantViolationError):
        rc.EnsembleSpec(ambient_dim=2, code_dim=2, sample_count=0, master_seed=0)


# ---------------------------------------------------------------- sample_code

def test_sample_code_full_dimension_is_uniform():
    for i in range(5):
        code = rc.sample_code(3, 3, rc.sample_stream(2, i))
        assert np.allclose(codes.normalized_projector(code), linalg.max_mixed(3), atol=1e-10)


def test_sample_code_mean_projector_is_uniform():
    m, k, n = 3, 2, 4000
    total = np.zeros((m, m), dtype=complex)
    for i in range(n):
        total += codes.normalized_projector(rc.sample_code(m, k, rc.sample_stream(9, i)))
    assert np.max(np.abs(total / n - linalg.max_mixed(m))) <= 0.015


def test_sample_code_overlap_second_moment():
    # <(<psi| pi_C |psi>)^2> = (1 + 1/K) / (M^2 + M)
    m, k, n = 3, 2, 10000
    psi = np.zeros(m, dtype=complex)
    psi[0] = 1.0
    vals = np.empty(n)
    for i in range(n):
        pi = codes.normalized_projector(rc.sample_code(m, k, rc.sample_stream(17, i)))
        vals[i] = np.real(psi.conj() @ pi @ psi) ** 2
    target = (1 + 1 / k) / (m**2 + m)
    se = vals.std(ddof=1) / math.sqrt(n)
    assert abs(vals.mean() - target) <= 4 * se


# ---------------------------------------------------------------- exact averages

def test_exact_average_identity_channel():
    for k in (1, 2, 4):
        assert rc.exact_average_deviation_sq(qch.identity_channel(4), k) == pytest.approx(0.0, abs=1e-14)


def test_exact_average_full_code_is_deterministic(rng):
    # K = M leaves no ensemble randomness; closed form equals the direct value
    for _ in range(5):
        m = int(rng.integers(2, 5))
        ch = qch.haar_random_channel(m, m, int(rng.integers(1, 4)), rng)
        direct = codes.deviation_frobenius_sq(codes.CodeSubspace.full_space(m), ch)
        assert rc.exact_average_deviation_sq(ch, m) == pytest.approx(direct, abs=1e-12)


def test_exact_average_matches_mc_phase_flip():
    ch = qch.phase_flip(0.25)
    exact = rc.exact_average_deviation_sq(ch, 2)
    est = rc.mc_deviation_sq(ch, 2, 2000, master_seed=3)
    assert abs(est.mean - exact) <= max(4 * est.std_error, 1e-12)


def test_exact_average_representation_independent(rng):
    ch = qch.haar_random_channel(3, 3, 2, rng)
    assert rc.exact_average_deviation_sq(ch, 2) == pytest.approx(
        rc.exact_average_deviation_sq(qch.diagonalize_kraus(ch), 2), abs=1e-12)


def test_exact_average_rejects_scalar_space():
    ch = qch.identity_channel(1)
    with pytest.raises(InvariantViolationError):
        rc.exact_average_deviation_sq(ch, 1)


def test_upper_bound_values(rng):
    assert rc.deviation_sq_upper_bound(qch.identity_channel(2)) == pytest.approx(0.5)
    assert rc.deviation_sq_upper_bound(qch.phase_flip(0.3)) == pytest.approx(0.5)
    for _ in range(50):
        m = int(rng.integers(2, 6))
        ch = qch.haar_random_channel(m, m, int(rng.integers(1, 4)), rng)
        k = int(rng.integers(1, m + 1))
        assert rc.exact_average_deviation_sq(ch, k) <= rc.deviation_sq_upper_bound(ch) + 1e-12


# ---------------------------------------------------------------- averaged bound

def test_averaged_bound_identity_arithmetic():
    assert rc.averaged_fidelity_bound(qch.identity_channel(4), 1) == pytest.approx(0.5, abs=1e-12)


def test_averaged_bound_phase_flip_vacuous():
    got = rc.averaged_fidelity_bound(qch.phase_flip(0.25), 2)
    assert got == pytest.approx(1 - math.sqrt(4) / math.sqrt(2), abs=1e-12)
    assert got < 0.0


def test_averaged_bound_minimizes_kraus_first(rng):
    a = linalg.haar_unitary(2, rng)
    redundant = qch.KrausChannel(input_dim=2, output_dim=2,
                                 kraus_ops=(a / math.sqrt(2), a / math.sqrt(2)))
    plain = qch.KrausChannel(input_dim=2, output_dim=2, kraus_ops=(a,))
    assert rc.averaged_fidelity_bound(redundant, 1) == pytest.approx(
        rc.averaged_fidelity_bound(plain, 1), abs=1e-12)


def test_mc_average_bound_identity():
    est = rc.mc_average_bound(qch.identity_channel(4), 2, 50, master_seed=1)
    assert est.mean == pytest.approx(1.0, abs=1e-10)
    assert est.std_error <= 1e-10


def test_mc_average_bound_dominates_analytic_bound():
    ch = qch.phase_flip(0.25)
    est = rc.mc_average_bound(ch, 1, 1000, master_seed=2)
    assert 0.0 <= est.mean <= 1.0
    assert est.mean >= rc.averaged_fidelity_bound(ch, 1) - 4 * est.std_error


def test_trace_norm_diagnostic_majorant_holds():
    ch = qch.phase_flip(0.25)
    diag = rc.trace_norm_diagnostic(ch, 1, 500, master_seed=4)
    assert diag.estimate.mean <= diag.majorant + 4 * diag.estimate.std_error


# ---------------------------------------------------------------- code form

def test_code_form_identity_vanishes_per_sample():
    eye = np.eye(3)
    est = rc.code_form_mc(eye, eye, 3, 2, 200, master_seed=5)
    assert abs(est.mean) <= 1e-12
    assert est.std_error <= 1e-12


def test_code_form_projector_value():
    m, k = 3, 2
    psi = np.zeros((m, m), dtype=complex)
    psi[0, 0] = 1.0
    est = rc.code_form_mc(psi, psi, m, k, 10000, master_seed=6)
    target = (1 - k**-2) / (m**2 + m)
    assert abs(est.mean - target) <= 4 * est.std_error


def test_code_form_matches_two_term_expansion(rng):
    m, k = 3, 2
    v = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    w = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    est = rc.code_form_mc(v, w, m, k, 20000, master_seed=8)
    coeff = rc.code_form_coefficients(m, k)
    closed = coeff.alpha * np.trace(v.conj().T @ w) + coeff.beta * np.trace(v.conj().T) * np.trace(w)
    assert abs(est.mean - closed) <= 4 * est.std_error


def test_code_form_coefficients_closed_form():
    c = rc.code_form_coefficients(2, 2)
    assert c.alpha == pytest.approx(0.25)
    assert c.beta == pytest.approx(-0.125)
    for m in (2, 3, 5):
        for k in (1, 2):
            c = rc.code_form_coefficients(m, k)
            assert c.alpha + c.beta == pytest.approx((1 - k**-2) / (m**2 + m), abs=1e-14)
            assert c.alpha * m + c.beta * m**2 == pytest.approx(0.0, abs=1e-14)


# ---------------------------------------------------------------- Haar moments

@pytest.mark.parametrize("dim,m4,mc", [(2, 1 / 3, 1 / 6), (3, 1 / 6, 1 / 12)])
def test_haar_moment_targets(dim, m4, mc):
    rep = rc.haar_moment_suite(dim, 5000, master_seed=10)
    by_name = {c.name: c for c in rep.checks}
    assert by_name["abs_u11_fourth"].target == pytest.approx(m4)
    assert by_name["abs_u11_sq_abs_u12_sq"].target == pytest.approx(mc)
    assert rep.all_pass


def test_haar_moment_degenerate_code_consistency():
    # K = M: <psi| pi_C |psi> = 1/M deterministically, squared moment 1/M^2
    m = 4
    psi = np.zeros(m, dtype=complex)
    psi[1] = 1.0
    vals = []
    for i in range(50):
        pi = codes.normalized_projector(rc.sample_code(m, m, rc.sample_stream(12, i)))
        vals.append(np.real(psi.conj() @ pi @ psi) ** 2)
    assert np.allclose(vals, 1 / m**2, atol=1e-10)


# ---------------------------------------------------------------- unital rate curve

def test_hamming_curve_vacuous_for_tight_space():
    curve = rc.hamming_rate_curve(qch.phase_flip(0.3), rate=0.5, ns=range(1, 8))
    assert not curve.converges
    assert all(row.bound <= 0.0 for row in curve.rows)


def test_hamming_curve_converges_when_room():
    ch = qch.random_unitary_channel(weyl_pair(4))
    curve = rc.hamming_rate_curve(ch, rate=0.5, ns=range(1, 30))
    assert curve.converges and curve.capacity_bound == pytest.approx(1.0)
    bounds = [row.bound for row in curve.rows]
    assert all(b2 > b1 for b1, b2 in zip(bounds, bounds[1:]))
    assert bounds[-1] > 0.99 * (1 - (math.sqrt(2) / 2) ** 29 / (math.sqrt(2) / 2))
    assert bounds[-1] == pytest.approx(1 - (2**0.5 * 2 / 4) ** (29 / 2), abs=1e-12)


def test_hamming_curve_boundary_rate_is_zero():
    ch = qch.random_unitary_channel(weyl_pair(4))
    curve = rc.hamming_rate_curve(ch, rate=1.0, ns=[2, 4, 6])
    assert all(row.bound == pytest.approx(0.0, abs=1e-12) for row in curve.rows)
    assert not curve.converges


def test_hamming_curve_rejects_non_unital():
    a0 = np.array([[1.0, 0.0], [0.0, math.sqrt(0.5)]], dtype=complex)
    a1 = np.array([[0.0, math.sqrt(0.5)], [0.0, 0.0]], dtype=complex)
    damp = qch.KrausChannel(input_dim=2, output_dim=2, kraus_ops=(a0, a1))
    with pytest.raises(InvariantViolationError):
        rc.hamming_rate_curve(damp, rate=0.1, ns=[1, 2])
