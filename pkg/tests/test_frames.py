import math

import numpy as np
import pytest

from gradedframes.frames import (
    AnalysisResult,
    BlockFrame,
    DenseFrame,
    DiagonalFrame,
    ExtensionReport,
    FrameBounds,
    FrameFormError,
    analyze,
    analysis_norm,
    bessel_bound,
    dense_subset_extension_check,
    frame_bounds_analytic,
    frame_bounds_numeric,
    runo_demo,
)
from gradedframes.gradings import GradedVector, WeightGrading, graded_norm

SQRT2 = 1.4142135623730951


def alternating_diag(n, r):
    """Odd coordinates pass through, even ones are scaled by j**r."""
    j = np.arange(1, n + 1)
    return DiagonalFrame(np.where(j % 2 == 1, 1.0, j.astype(float) ** r))


def pair_block(n, r):
    """Pair weight 1 at odd pair indices, (2j)**r at even ones."""
    j = np.arange(1, n + 1)
    return BlockFrame(np.where(j % 2 == 1, 1.0, (2.0 * j) ** r))


def power_grading(levels, truncation):
    return WeightGrading("power", levels, truncation)


def shifted_grading(levels, truncation):
    return WeightGrading("shifted_power", levels, truncation, shift=2)


# -- construction ------------------------------------------------------------

def test_diagonal_rejects_nonpositive_weight():
    with pytest.raises(ValueError):
        DiagonalFrame(np.array([1.0, 0.0, 2.0]))


def test_block_rejects_negative_weight():
    with pytest.raises(ValueError):
        BlockFrame(np.array([1.0, -2.0]))


def test_dense_rejects_nonfinite():
    with pytest.raises(ValueError):
        DenseFrame(np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_counts():
    assert alternating_diag(8, 1).functional_count == 8
    blk = pair_block(8, 1)
    assert blk.functional_count == 16
    assert blk.truncation == 8
    assert DenseFrame(np.eye(3)).functional_count == 3


# -- analyze -----------------------------------------------------------------

def test_analyze_diagonal_single_coordinate():
    frame = DiagonalFrame(np.array([1.0, 2.0, 1.0, 4.0]))
    out = analyze(frame, GradedVector.canonical(2))
    assert out.coefficients == GradedVector.canonical(2, 2.0)
    assert out.functional_count == 4


def test_analyze_block_duplicates_pair():
    out = analyze(pair_block(4, 1), GradedVector.canonical(1))
    assert out.coefficients == GradedVector.from_pairs({1: 1.0, 2: 1.0})


def test_analyze_block_uses_pair_weight():
    out = analyze(pair_block(4, 1), GradedVector.canonical(2, 3.0))
    assert out.coefficients == GradedVector.from_pairs({3: 12.0, 4: 12.0})


def test_analyze_dense_identity_is_identity():
    f = GradedVector.from_pairs({1: 0.5, 3: -2.0})
    out = analyze(DenseFrame(np.eye(4)), f)
    assert out.coefficients == f


def test_analyze_rejects_support_beyond_truncation():
    with pytest.raises(ValueError):
        analyze(alternating_diag(4, 1), GradedVector.canonical(5))


def test_analysis_result_rejects_overlong_coefficients():
    with pytest.raises(ValueError):
        AnalysisResult(GradedVector.canonical(3), 2)


def test_analyze_linear_on_dyadic_inputs():
    frame = alternating_diag(16, 2)
    f = GradedVector.from_pairs({1: 0.25, 4: 1.5})
    g = GradedVector.from_pairs({4: 0.75, 9: -2.0})
    lhs = analyze(frame, f * 2.0 + g).coefficients
    rhs = analyze(frame, f).coefficients * 2.0 + analyze(frame, g).coefficients
    assert lhs == rhs


# -- analytic bounds -----------------------------------------------------------

def test_analytic_alternating_r2_is_tight():
    frame = alternating_diag(64, 2)
    w = power_grading(4, 64)
    got = frame_bounds_analytic(frame, w, 0, w, 0, 2)
    assert got.lower == 1.0
    assert got.upper == 1.0
    assert got.witness_lower == 1
    # the maximum is attained at j=1 and every even coordinate; smallest wins
    assert got.witness_upper == 1
    assert got.lower_certified and got.upper_certified


def test_analytic_unit_diagonal_isometry():
    frame = DiagonalFrame(np.ones(32))
    w = power_grading(3, 32)
    got = frame_bounds_analytic(frame, w, 2, w, 2, 2)
    assert got.lower == 1.0 and got.upper == 1.0


def test_analytic_block_r1_gives_sqrt2():
    frame = pair_block(16, 1)
    theta = power_grading(2, 32)
    x = shifted_grading(2, 16)
    got = frame_bounds_analytic(frame, theta, 0, x, 0, 1)
    assert abs(got.lower - SQRT2) < 1e-12
    assert abs(got.upper - SQRT2) < 1e-12
    assert got.witness_lower == 1
    assert got.witness_upper == 2
    assert got.lower_certified and got.upper_certified


def test_analytic_rejects_dense_form():
    w = power_grading(2, 4)
    with pytest.raises(FrameFormError):
        frame_bounds_analytic(DenseFrame(np.eye(4)), w, 0, w, 0, 1)


def test_analytic_rejects_dominance_violation():
    frame = alternating_diag(8, 1)
    w = power_grading(3, 8)
    with pytest.raises(ValueError):
        frame_bounds_analytic(frame, w, 0, w, 2, 0)


def test_bounds_type_rejects_inverted_pair():
    with pytest.raises(ValueError):
        FrameBounds(2.0, 1.0, 1, 1)


# -- numeric bounds ------------------------------------------------------------

def test_numeric_identity_dense():
    w = power_grading(0, 4)
    got = frame_bounds_numeric(DenseFrame(np.eye(4)), w, 0, w, 0, 0)
    assert abs(got.lower - 1.0) < 1e-12
    assert abs(got.upper - 1.0) < 1e-12


def test_numeric_golden_ratio_matrix():
    frame = DenseFrame(np.array([[1.0, 1.0], [0.0, 1.0]]))
    w = power_grading(0, 2)
    got = frame_bounds_numeric(frame, w, 0, w, 0, 0)
    assert abs(got.lower - 0.6180339887498949) < 1e-12
    assert abs(got.upper - 1.6180339887498949) < 1e-12


def test_numeric_matches_analytic_alternating_r1():
    frame = alternating_diag(256, 1)
    w = power_grading(4, 256)
    ana = frame_bounds_analytic(frame, w, 1, w, 1, 2)
    num = frame_bounds_numeric(frame, w, 1, w, 1, 2)
    assert abs(num.lower - 1.0) < 1e-9
    assert abs(num.upper - 1.0) < 1e-9
    assert abs(num.lower - ana.lower) < 1e-9
    assert abs(num.upper - ana.upper) < 1e-9


def test_numeric_matches_analytic_random_block():
    rng = np.random.default_rng(11)
    frame = BlockFrame(rng.uniform(0.5, 3.0, 24))
    theta = power_grading(3, 48)
    x = power_grading(4, 24)
    ana = frame_bounds_analytic(frame, theta, 1, x, 0, 2)
    num = frame_bounds_numeric(frame, theta, 1, x, 0, 2)
    assert abs(num.lower - ana.lower) <= 1e-9 * ana.lower
    assert abs(num.upper - ana.upper) <= 1e-9 * ana.upper


def test_numeric_witnesses_attain_the_quotients():
    rng = np.random.default_rng(3)
    frame = DiagonalFrame(rng.uniform(0.5, 2.0, 16))
    w = power_grading(3, 16)
    got = frame_bounds_numeric(frame, w, 1, w, 0, 2)
    for witness, level, bound in ((got.witness_lower, 0, got.lower),
                                  (got.witness_upper, 2, got.upper)):
        quot = analysis_norm(frame, witness, w, 1) / graded_norm(witness, w, level)
        assert abs(quot - bound) < 1e-9


def test_numeric_rejects_oversized_truncation():
    frame = DiagonalFrame(np.ones(2049))
    w = power_grading(1, 2049)
    with pytest.raises(ValueError):
        frame_bounds_numeric(frame, w, 0, w, 0, 0)


def test_scaling_covariance_spot():
    frame = alternating_diag(32, 2)
    w = power_grading(4, 32)
    base = frame_bounds_analytic(frame, w, 1, w, 0, 3)
    scaled = frame_bounds_analytic(frame.scaled(3.0), w, 1, w, 0, 3)
    assert abs(scaled.lower - 3.0 * base.lower) < 1e-12 * scaled.lower
    assert abs(scaled.upper - 3.0 * base.upper) < 1e-12 * scaled.upper
    assert scaled.witness_lower == base.witness_lower
    assert scaled.witness_upper == base.witness_upper


def test_bound_validity_on_random_samples():
    rng = np.random.default_rng(5)
    frame = pair_block(32, 2)
    theta = power_grading(3, 64)
    x = shifted_grading(5, 32)
    got = frame_bounds_analytic(frame, theta, 1, x, 1, 3)
    for _ in range(25):
        support = rng.choice(32, size=6, replace=False) + 1
        f = GradedVector(support, rng.normal(size=6))
        mid = analysis_norm(frame, f, theta, 1)
        assert got.lower * graded_norm(f, x, 1) <= mid * (1 + 1e-12)
        assert mid <= got.upper * graded_norm(f, x, 3) * (1 + 1e-12)


def test_injectivity_when_lower_bound_positive():
    frame = alternating_diag(16, 1)
    w = power_grading(2, 16)
    got = frame_bounds_analytic(frame, w, 0, w, 0, 1)
    assert got.lower > 0
    f = GradedVector.from_pairs({3: 1e-7, 11: -2.0})
    assert not analyze(frame, f).coefficients.trim().is_zero()


# -- bessel bound ----------------------------------------------------------------

def test_bessel_identity_dual_is_one():
    w = power_grading(4, 8)
    cands = [GradedVector.canonical(i) for i in range(1, 9)]
    got = bessel_bound(cands, w.dual(), 2, w.dual(), 2)
    assert abs(got - 1.0) < 1e-12


def test_bessel_reciprocal_dual_is_one():
    n, r = 16, 2
    j = np.arange(1, n + 1)
    b = np.where(j % 2 == 1, 1.0, j.astype(float) ** r)
    cands = [GradedVector.canonical(i, 1.0 / b[i - 1]) for i in range(1, n + 1)]
    w = power_grading(3, n)
    got = bessel_bound(cands, w.dual(), 1, w.dual(), 1)
    assert abs(got - 1.0) < 1e-12


def test_bessel_scaling():
    w = power_grading(2, 4)
    cands = [GradedVector.canonical(i, 2.0) for i in range(1, 5)]
    assert abs(bessel_bound(cands, w.dual(), 1, w.dual(), 1) - 2.0) < 1e-12


def test_bessel_rejects_empty_list():
    w = power_grading(1, 4)
    with pytest.raises(ValueError):
        bessel_bound([], w.dual(), 0, w.dual(), 0)


def test_bessel_all_zero_candidates():
    w = power_grading(1, 4)
    cands = [GradedVector.zero(), GradedVector.zero()]
    assert bessel_bound(cands, w.dual(), 0, w.dual(), 0) == 0.0


# -- dense subset extension --------------------------------------------------------

def test_extension_check_canonicals_pass():
    frame = alternating_diag(32, 1)
    w = power_grading(3, 32)
    got = frame_bounds_analytic(frame, w, 0, w, 0, 1)
    samples = [GradedVector.canonical(i) for i in range(1, 33)]
    report = dense_subset_extension_check(frame, w, 0, w, 0, 1,
                                          got.lower, got.upper, samples, samples)
    assert report.passed
    assert report.truncation_factor == 1.0
    assert report.failures == ()


def test_extension_check_flags_scaled_frame():
    frame = alternating_diag(16, 1)
    w = power_grading(2, 16)
    got = frame_bounds_analytic(frame, w, 0, w, 0, 1)
    shrunk = frame.scaled(0.5)
    samples = [GradedVector.canonical(1)]
    report = dense_subset_extension_check(shrunk, w, 0, w, 0, 1,
                                          got.lower, got.upper, samples, samples)
    assert not report.passed
    assert any(kind == "lower" for (_, _, kind, *_rest) in report.failures)


def test_extension_check_random_vectors_and_prefixes():
    rng = np.random.default_rng(17)
    frame = alternating_diag(64, 2)
    w = power_grading(4, 64)
    got = frame_bounds_analytic(frame, w, 1, w, 1, 3)
    full, dense = [], []
    for _ in range(500):
        support = rng.choice(64, size=8, replace=False) + 1
        v = GradedVector(support, rng.normal(size=8))
        full.append(v)
        dense.append(v.prefix(32))
    report = dense_subset_extension_check(frame, w, 1, w, 1, 3,
                                          got.lower, got.upper, dense, full)
    assert report.passed
    assert report.notes == ()


def test_extension_check_reports_non_prefix_sample():
    frame = alternating_diag(8, 1)
    w = power_grading(1, 8)
    dense = [GradedVector.canonical(2)]
    full = [GradedVector.canonical(3)]
    report = dense_subset_extension_check(frame, w, 0, w, 0, 1,
                                          1.0, 1.0, dense, full)
    assert report.notes


# -- norm chain demo -------------------------------------------------------------

def test_runo_chain_two_ones():
    c = GradedVector.from_pairs({1: 1.0, 2: 1.0})
    report = runo_demo(1.5, 3.0, [c])
    assert report.passed
    (_, nq, n2, np_, ok) = report.chain_rows[0]
    assert ok
    assert abs(nq - 1.2599210498948732) < 1e-12
    assert abs(n2 - 1.4142135623730951) < 1e-12
    assert abs(np_ - 1.5874010519681994) < 1e-12


def test_runo_chain_single_spike():
    report = runo_demo(1.5, 3.0, [GradedVector.canonical(1)])
    (_, nq, n2, np_, ok) = report.chain_rows[0]
    assert ok and nq == 1.0 and n2 == 1.0 and np_ == 1.0


def test_runo_witness_growth_table():
    report = runo_demo(1.5, 3.0, [], epsilon=0.05)
    rows = dict((n, (l2, lp)) for (n, l2, lp) in report.witness_rows)
    expected = {
        10: (1.5173156741745519, 2.0884447296716897),
        100: (1.7717387325521787, 3.1329883273966357),
        1000: (1.8917829770643275, 4.1037862657979707),
        10000: (1.9505889286042073, 5.0355230166851239),
    }
    for n, (l2, lp) in expected.items():
        assert abs(rows[n][0] - l2) < 1e-12
        assert abs(rows[n][1] - lp) < 1e-12
    # square-summable tail keeps the l2 column bounded while the l^p column climbs
    l2s = [l2 for (_, l2, _) in report.witness_rows]
    lps = [lp for (_, _, lp) in report.witness_rows]
    assert max(l2s) < 2.0
    assert all(a < b for a, b in zip(lps, lps[1:]))
    assert report.witness_exponent == 1.0 / 1.55
    assert report.p_sum_diverges
    assert report.l2_sum_converges


def test_runo_rejects_bad_exponents():
    with pytest.raises(ValueError):
        runo_demo(2.5, 3.0, [])
    with pytest.raises(ValueError):
        runo_demo(1.5, 1.9, [])
