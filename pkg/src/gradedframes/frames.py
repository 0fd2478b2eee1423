"""Functional families acting on truncated sequences and their frame bounds.

Three frame forms are supported.  Diagonal: functional i scales coordinate i
by b_i.  Block: functionals 2j-1 and 2j both scale coordinate j by a common
positive weight.  Dense: an explicit M x N matrix of functional values.

Frame bounds sandwich the analysis coefficients between two graded norms,

    lower * |f|_{s1}  <=  ||| analyze(f) |||_k  <=  upper * |f|_{s2},

and are computed two ways: analytically from per-coordinate ratio sequences
(diagonal and block forms), and numerically from extremal singular values of
the weighted coefficient matrix.  The two routes are kept independent so one
can serve as an oracle for the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .gradings import (
    DualWeighting,
    GradedVector,
    WeightGrading,
    graded_norm,
    lp_norm,
)

# Numeric bounds build a dense weighted matrix; refuse beyond this many columns.
DENSE_LIMIT = 2048
# Dense SVD is used when the smaller matrix dimension is at most this,
# otherwise a sparse Lanczos iteration with a fixed start vector.
SPARSE_CUTOVER = 1200

# Log-log slope tolerances for certifying power-like ratio tails.  Integer
# weight exponents are at least 1 apart, while the bounded block factor
# contributes at most ~0.15 of apparent slope at small truncations.
SLOPE_AGREE = 0.25
SLOPE_FLAT = 0.5


class FrameFormError(ValueError):
    """Operation not defined for this frame form."""


def _readonly(arr, dtype=float) -> np.ndarray:
    out = np.asarray(arr, dtype=dtype).copy()
    out.setflags(write=False)
    return out


class FrameSystem:
    """Base class; concrete forms implement the coefficient matrix."""

    truncation: int
    functional_count: int

    def coefficient_rows(self) -> sp.csr_matrix:
        raise NotImplementedError

    def dense_matrix(self) -> np.ndarray:
        return self.coefficient_rows().toarray()


@dataclass(frozen=True, eq=False)
class DiagonalFrame(FrameSystem):
    """Functional i acts on coordinate i with positive weight b_i."""

    b: np.ndarray

    def __post_init__(self):
        b = _readonly(self.b)
        if b.ndim != 1 or b.size < 1:
            raise ValueError("b must be a nonempty vector")
        if not np.all(b > 0) or not np.all(np.isfinite(b)):
            raise ValueError("diagonal weights must be positive and finite")
        object.__setattr__(self, "b", b)

    @property
    def truncation(self) -> int:
        return int(self.b.size)

    @property
    def functional_count(self) -> int:
        return int(self.b.size)

    def coefficient_rows(self) -> sp.csr_matrix:
        return sp.diags(self.b, format="csr")

    def scaled(self, c: float) -> "DiagonalFrame":
        return DiagonalFrame(self.b * c)


@dataclass(frozen=True, eq=False)
class BlockFrame(FrameSystem):
    """Functionals 2j-1 and 2j both act on coordinate j with weight b_pair(j)."""

    b_pair: np.ndarray

    def __post_init__(self):
        b = _readonly(self.b_pair)
        if b.ndim != 1 or b.size < 1:
            raise ValueError("b_pair must be a nonempty vector")
        if not np.all(b > 0) or not np.all(np.isfinite(b)):
            raise ValueError("pair weights must be positive and finite")
        object.__setattr__(self, "b_pair", b)

    @property
    def truncation(self) -> int:
        return int(self.b_pair.size)

    @property
    def functional_count(self) -> int:
        return 2 * int(self.b_pair.size)

    def coefficient_rows(self) -> sp.csr_matrix:
        n = self.truncation
        rows = np.arange(2 * n)
        cols = np.repeat(np.arange(n), 2)
        vals = np.repeat(self.b_pair, 2)
        return sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, n))

    def scaled(self, c: float) -> "BlockFrame":
        return BlockFrame(self.b_pair * c)


@dataclass(frozen=True, eq=False)
class DenseFrame(FrameSystem):
    """Explicit matrix of functional values, row i = functional i."""

    matrix: np.ndarray

    def __post_init__(self):
        g = _readonly(self.matrix)
        if g.ndim != 2 or 0 in g.shape:
            raise ValueError("matrix must be 2-d and nonempty")
        if not np.all(np.isfinite(g)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "matrix", g)

    @property
    def truncation(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def functional_count(self) -> int:
        return int(self.matrix.shape[0])

    def coefficient_rows(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.matrix)

    def dense_matrix(self) -> np.ndarray:
        return self.matrix

    def scaled(self, c: float) -> "DenseFrame":
        return DenseFrame(self.matrix * c)


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    """Coefficient sequence {g_i(f)} over functional indices 1..M."""

    coefficients: GradedVector
    functional_count: int

    def __post_init__(self):
        if self.coefficients.max_index > self.functional_count:
            raise ValueError("coefficient index beyond functional count")


def analyze(frame: FrameSystem, f: GradedVector) -> AnalysisResult:
    """Apply every frame functional to f."""
    if f.max_index > frame.truncation:
        raise ValueError("sample support %d exceeds frame truncation %d"
                         % (f.max_index, frame.truncation))
    if isinstance(frame, DiagonalFrame):
        vals = frame.b[f.indices - 1] * f.values
        coeff = GradedVector(f.indices, vals)
    elif isinstance(frame, BlockFrame):
        idx = np.empty(2 * f.indices.size, dtype=np.int64)
        idx[0::2] = 2 * f.indices - 1
        idx[1::2] = 2 * f.indices
        vals = np.repeat(frame.b_pair[f.indices - 1] * f.values, 2)
        coeff = GradedVector(idx, vals)
    elif isinstance(frame, DenseFrame):
        out = frame.matrix.astype(np.complex128) @ f.to_dense(frame.truncation)
        coeff = GradedVector.from_dense(out).trim()
    else:
        raise FrameFormError("unknown frame form %r" % type(frame).__name__)
    return AnalysisResult(coeff, frame.functional_count)


def analysis_norm(frame: FrameSystem, f: GradedVector, theta: WeightGrading,
                  level: int) -> float:
    return graded_norm(analyze(frame, f).coefficients, theta, level)


def coanalyze(frame: FrameSystem, c: GradedVector) -> GradedVector:
    """Apply the transposed coefficient matrix: coordinate j of the result
    collects sum_i c_i * g_i(e_j).  Structured forms stay exact."""
    if c.max_index > frame.functional_count:
        raise ValueError("coefficient support %d exceeds functional count %d"
                         % (c.max_index, frame.functional_count))
    if isinstance(frame, DiagonalFrame):
        return GradedVector(c.indices, frame.b[c.indices - 1] * c.values)
    if isinstance(frame, BlockFrame):
        pair = (c.indices + 1) // 2
        uniq, inverse = np.unique(pair, return_inverse=True)
        vals = np.zeros(uniq.size, dtype=np.complex128)
        np.add.at(vals, inverse, c.values)
        return GradedVector(uniq, frame.b_pair[uniq - 1] * vals)
    if isinstance(frame, DenseFrame):
        out = frame.matrix.T.astype(np.complex128) @ c.to_dense(frame.functional_count)
        return GradedVector.from_dense(out).trim()
    raise FrameFormError("unknown frame form %r" % type(frame).__name__)


# ---------------------------------------------------------------------------
# frame bounds


@dataclass(frozen=True, eq=False)
class FrameBounds:
    """Optimal two-sided constants at truncation with attaining witnesses.

    Witnesses are coordinate indices for the analytic route and unit vectors
    for the numeric route.  The certified flags report whether the ratio
    tails were certified eventually monotone, in which case the truncated
    extremum is trusted as the global one.
    """

    lower: float
    upper: float
    witness_lower: Union[int, GradedVector]
    witness_upper: Union[int, GradedVector]
    lower_certified: bool = False
    upper_certified: bool = False

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper * (1 + 1e-9)):
            raise ValueError("bounds must satisfy 0 <= lower <= upper, got (%r, %r)"
                             % (self.lower, self.upper))


def certified_power_profile(indices: np.ndarray, values: np.ndarray):
    """Certify that values ~ C * indices**slope on the tail of one class.

    Returns (certified, slope).  Three tail points are compared pairwise in
    log-log coordinates; agreement within SLOPE_AGREE certifies the profile.
    """
    n = indices.size
    if n < 3:
        return False, 0.0
    pos = sorted({n // 2, (3 * n) // 4, n - 1})
    if len(pos) < 3:
        pos = [n - 3, n - 2, n - 1]
    js = indices[pos].astype(float)
    vs = values[pos]
    if np.any(vs <= 0):
        return False, 0.0
    s01 = math.log(vs[1] / vs[0]) / math.log(js[1] / js[0])
    s12 = math.log(vs[2] / vs[1]) / math.log(js[2] / js[1])
    s02 = math.log(vs[2] / vs[0]) / math.log(js[2] / js[0])
    if max(s01, s12, s02) - min(s01, s12, s02) > SLOPE_AGREE:
        return False, 0.0
    return True, s02


def _parity_classes(count: int):
    j = np.arange(1, count + 1)
    return [j[0::2], j[1::2]]


def _ratio_sequences(frame: FrameSystem, theta: WeightGrading, theta_level: int,
                     x: WeightGrading, x_level: int) -> np.ndarray:
    """Per-coordinate quotient of Θ-weighted functional size by the X weight."""
    n = frame.truncation
    j = np.arange(1, n + 1)
    v = x.weight_values(x_level, j)
    if isinstance(frame, DiagonalFrame):
        w = theta.weight_values(theta_level, j)
        return frame.b * w / v
    if isinstance(frame, BlockFrame):
        w_odd = theta.weight_values(theta_level, 2 * j - 1)
        w_even = theta.weight_values(theta_level, 2 * j)
        return frame.b_pair * np.hypot(w_odd, w_even) / v
    raise FrameFormError("analytic bounds need a diagonal or block frame")


def _tail_flags(ratios: np.ndarray):
    """Certify each parity class; return (lower_ok, upper_ok)."""
    lower_ok = True
    upper_ok = True
    for cls in _parity_classes(ratios.size):
        certified, slope = certified_power_profile(cls, ratios[cls - 1])
        if not certified:
            return False, False
        if slope < -SLOPE_FLAT:
            lower_ok = False
        if slope > SLOPE_FLAT:
            upper_ok = False
    return lower_ok, upper_ok


def frame_bounds_analytic(frame: FrameSystem, theta: WeightGrading,
                          theta_level: int, x_lower: WeightGrading,
                          lower_level: int, upper_level: int,
                          x_upper: Optional[WeightGrading] = None) -> FrameBounds:
    """Optimal bounds for diagonal/block frames from per-coordinate ratios.

    The lower constant is the smallest ratio against the x_lower weights, the
    upper constant the largest against the x_upper weights; ties resolve to
    the smallest coordinate.
    """
    if x_upper is None:
        x_upper = x_lower
    n = frame.truncation
    j = np.arange(1, n + 1)
    v_lo = x_lower.weight_values(lower_level, j)
    v_hi = x_upper.weight_values(upper_level, j)
    if np.any(v_lo > v_hi):
        raise ValueError("lower X weight must be dominated by the upper one")
    ratios_lo = _ratio_sequences(frame, theta, theta_level, x_lower, lower_level)
    ratios_hi = _ratio_sequences(frame, theta, theta_level, x_upper, upper_level)
    lo = float(np.min(ratios_lo))
    hi = float(np.max(ratios_hi))
    # coordinates whose ratios agree up to rounding count as tied, so the
    # reported witness is the smallest such index, not an argmin artifact
    i_lo = int(np.flatnonzero(ratios_lo <= lo * (1 + 1e-13))[0])
    i_hi = int(np.flatnonzero(ratios_hi >= hi * (1 - 1e-13))[0])
    lo_ok, _ = _tail_flags(ratios_lo)
    _, hi_ok = _tail_flags(ratios_hi)
    return FrameBounds(lo, hi,
                       witness_lower=i_lo + 1, witness_upper=i_hi + 1,
                       lower_certified=lo_ok, upper_certified=hi_ok)


def _weighted_matrix(frame: FrameSystem, theta: WeightGrading, theta_level: int,
                     x: WeightGrading, x_level: int) -> np.ndarray:
    m = frame.functional_count
    n = frame.truncation
    w = theta.weight_values(theta_level, np.arange(1, m + 1))
    v = x.weight_values(x_level, np.arange(1, n + 1))
    g = frame.dense_matrix()
    return (w[:, None] * g) / v[None, :]


def _unit_witness(direction: np.ndarray, scale: np.ndarray) -> GradedVector:
    f = direction / scale
    f = f / np.linalg.norm(f)
    k = int(np.argmax(np.abs(f)))
    if f[k] < 0:
        f = -f
    return GradedVector.from_dense(f)


def frame_bounds_numeric(frame: FrameSystem, theta: WeightGrading,
                         theta_level: int, x_lower: WeightGrading,
                         lower_level: int, upper_level: int,
                         x_upper: Optional[WeightGrading] = None) -> FrameBounds:
    """Extremal singular values of the weighted coefficient matrix.

    Works for every frame form and serves as the numeric oracle for the
    analytic route.  Dense linear algebra; refuses truncations beyond
    DENSE_LIMIT columns.
    """
    if x_upper is None:
        x_upper = x_lower
    n = frame.truncation
    if n > DENSE_LIMIT:
        raise ValueError("truncation %d too large for dense mode (limit %d)"
                         % (n, DENSE_LIMIT))
    j = np.arange(1, n + 1)
    v_lo = x_lower.weight_values(lower_level, j)
    v_hi = x_upper.weight_values(upper_level, j)

    a_lo = _weighted_matrix(frame, theta, theta_level, x_lower, lower_level)
    if frame.functional_count < n:
        _, s_lo, vh_lo = np.linalg.svd(a_lo, full_matrices=True)
        lower = 0.0
        wit_lo = _unit_witness(vh_lo[-1], v_lo)
    else:
        _, s_lo, vh_lo = np.linalg.svd(a_lo, full_matrices=False)
        lower = float(s_lo[-1])
        wit_lo = _unit_witness(vh_lo[-1], v_lo)

    a_hi = _weighted_matrix(frame, theta, theta_level, x_upper, upper_level)
    _, s_hi, vh_hi = np.linalg.svd(a_hi, full_matrices=False)
    upper = float(s_hi[0])
    wit_hi = _unit_witness(vh_hi[0], v_hi)
    return FrameBounds(lower, upper, witness_lower=wit_lo, witness_upper=wit_hi)


def bessel_bound(dual_candidates: Sequence[GradedVector],
                 theta_dual: DualWeighting, theta_level: int,
                 x_dual: DualWeighting, x_level: int) -> float:
    """Smallest constant bounding the dual-coefficient map of the candidates.

    Computed as the largest singular value of the matrix with rows f_i,
    scaled by the reciprocal Θ weights on the left and the X weights on the
    right (the extremal quotient of the coefficient map between the two dual
    norms).
    """
    if not dual_candidates:
        raise ValueError("empty candidate list")
    m = len(dual_candidates)
    n = max((f.max_index for f in dual_candidates), default=0)
    n = max(n, 1)
    if n > x_dual.truncation:
        raise ValueError("candidate support beyond truncation")
    w = theta_dual.base.weight_values(theta_level, np.arange(1, m + 1))
    v = x_dual.base.weight_values(x_level, np.arange(1, n + 1))

    rows, cols, vals = [], [], []
    for i, f in enumerate(dual_candidates):
        if f.indices.size:
            rows.extend([i] * f.indices.size)
            cols.extend((f.indices - 1).tolist())
            vals.extend(f.values.tolist())
    if not vals:
        return 0.0
    data = np.asarray(vals, dtype=np.complex128)
    if np.all(data.imag == 0):
        data = data.real
    mat = sp.csr_matrix((data, (rows, cols)), shape=(m, n))
    mat = sp.diags(1.0 / w) @ mat @ sp.diags(v)
    if min(m, n) <= SPARSE_CUTOVER:
        return float(np.linalg.svd(mat.toarray(), compute_uv=False)[0])
    v0 = np.ones(min(m, n))
    sigma = spla.svds(mat, k=1, which="LM", v0=v0, return_singular_vectors=False)
    return float(sigma[0])


@dataclass(frozen=True, eq=False)
class ExtensionReport:
    """Outcome of the dense-subset extension check (prefix samples vs full)."""

    passed: bool
    truncation_factor: float
    failures: tuple = ()
    notes: tuple = ()


def dense_subset_extension_check(frame: FrameSystem, theta: WeightGrading,
                                 theta_level: int, x: WeightGrading,
                                 lower_level: int, upper_level: int,
                                 lower: float, upper: float,
                                 dense_samples: Sequence[GradedVector],
                                 full_samples: Sequence[GradedVector]) -> ExtensionReport:
    """Check the frame inequality on prefixes with (lower, upper) and on the
    full samples with (lower, λ·upper), λ = 1 for these norms."""
    lam = 1.0
    failures = []
    notes = []
    slack = 1 + 1e-12
    for i, (dsample, fsample) in enumerate(zip(dense_samples, full_samples)):
        if dsample != fsample.prefix(dsample.max_index):
            notes.append("sample %d: dense part is not a prefix of the full vector" % i)
        for tag, vec, cap in (("dense", dsample, upper), ("full", fsample, lam * upper)):
            if vec.trim().is_zero():
                continue
            mid = analysis_norm(frame, vec, theta, theta_level)
            lo = lower * graded_norm(vec, x, lower_level)
            hi = cap * graded_norm(vec, x, upper_level)
            if lo > mid * slack:
                failures.append((i, tag, "lower", lo, mid, vec))
            if mid > hi * slack:
                failures.append((i, tag, "upper", mid, hi, vec))
    return ExtensionReport(not failures, lam, tuple(failures), tuple(notes))


@dataclass(frozen=True, eq=False)
class RunoReport:
    """Norm-chain check plus the non-closedness witness growth table."""

    passed: bool
    chain_rows: tuple      # (sample index, |.|_q, |.|_2, |.|_p, ok)
    witness_rows: tuple    # (n, |prefix|_2, |prefix|_p)
    witness_exponent: float
    p_sum_diverges: bool
    l2_sum_converges: bool


def runo_demo(p: float, q: float, samples: Sequence[GradedVector],
              epsilon: float = 0.05,
              prefix_grid: Sequence[int] = (10, 100, 1000, 10000)) -> RunoReport:
    """Verify |c|_q <= |c|_2 <= |c|_p on the samples and grow a witness family.

    The witness prefixes come from c_j = j**(-1/(p+epsilon)), which sums to a
    convergent series in the square but a divergent one in the p-th power, so
    its prefixes stay in an l2 ball while leaving every l^p ball.
    """
    if not (1.0 < p < 2.0):
        raise ValueError("p must lie in (1, 2)")
    if not (2.0 < q < math.inf):
        raise ValueError("q must lie in (2, inf)")
    slack = 1 + 1e-12
    chain_rows = []
    ok_all = True
    for i, c in enumerate(samples):
        nq = lp_norm(c, q)
        n2 = lp_norm(c, 2.0)
        np_ = lp_norm(c, p)
        ok = nq <= n2 * slack and n2 <= np_ * slack
        ok_all = ok_all and ok
        chain_rows.append((i, nq, n2, np_, ok))

    t = 1.0 / (p + epsilon)
    witness_rows = []
    top = max(prefix_grid)
    j = np.arange(1, top + 1, dtype=float)
    terms = j ** (-t)
    sq = np.cumsum(terms ** 2)
    pp = np.cumsum(terms ** p)
    for n in sorted(prefix_grid):
        witness_rows.append((int(n), math.sqrt(sq[n - 1]), pp[n - 1] ** (1.0 / p)))
    growing = all(a[2] < b[2] for a, b in zip(witness_rows, witness_rows[1:]))
    return RunoReport(
        passed=ok_all and growing,
        chain_rows=tuple(chain_rows),
        witness_rows=tuple(witness_rows),
        witness_exponent=t,
        p_sum_diverges=p * t < 1.0,
        l2_sum_converges=2.0 * t > 1.0,
    )
