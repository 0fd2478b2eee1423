"""Level-indexed frame plans: verification, strictness, subsequence selection.

A plan assigns to each level k a lower X level s_k, an upper X level t_k and
constants bounding the analysis coefficients,

    lower_k * |f|_{s_k}  <=  ||| analyze(f) |||_k  <=  upper_k * |f|_{t_k}.

A plan is strict at level s when a single X level n_s works on both sides
with finite positive constants.  The selection procedure inflates the mid
level to n_k = max(k, p_k), with p_k the continuity level of a reconstruction
operator, and extracts the earliest strictly increasing subsequence so that
the re-indexed plan is again valid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .frames import (
    FrameFormError,
    FrameSystem,
    SLOPE_FLAT,
    _parity_classes,
    _ratio_sequences,
    analysis_norm,
    certified_power_profile,
    frame_bounds_analytic,
)
from .gradings import GradedVector, LevelError, WeightGrading, graded_norm

REL_SLACK = 1e-12


def _int_tuple(xs) -> tuple:
    out = tuple(int(x) for x in xs)
    if any(x != y for x, y in zip(out, xs)):
        raise ValueError("levels must be integers")
    return out


@dataclass(frozen=True)
class IndexPlan:
    """Per-level two-sided inequality data, index k = 0 .. budget."""

    lower_levels: tuple      # s_k
    upper_levels: tuple      # t_k, the X level on the upper side
    lower_consts: tuple
    upper_consts: tuple

    def __post_init__(self):
        s = _int_tuple(self.lower_levels)
        t = _int_tuple(self.upper_levels)
        a = tuple(float(x) for x in self.lower_consts)
        b = tuple(float(x) for x in self.upper_consts)
        if not (len(s) == len(t) == len(a) == len(b)) or not s:
            raise ValueError("plan entries must be nonempty and of equal length")
        if any(x > y for x, y in zip(s, s[1:])) or any(x > y for x, y in zip(t, t[1:])):
            raise ValueError("plan levels must be nondecreasing")
        if any(x > y for x, y in zip(s, t)):
            raise ValueError("lower level must not exceed the upper level")
        if any(not 0 < x <= y for x, y in zip(a, b)):
            raise ValueError("plan constants must satisfy 0 < lower <= upper")
        object.__setattr__(self, "lower_levels", s)
        object.__setattr__(self, "upper_levels", t)
        object.__setattr__(self, "lower_consts", a)
        object.__setattr__(self, "upper_consts", b)

    @property
    def budget(self) -> int:
        return len(self.lower_levels) - 1

    @staticmethod
    def shifted(budget: int, shift: int, lower_const: float = 1.0,
                upper_const: float = 1.0) -> "IndexPlan":
        """Plan with s_k = k and upper level k + shift, constant bounds."""
        ks = range(budget + 1)
        return IndexPlan(tuple(ks), tuple(k + shift for k in ks),
                         (lower_const,) * (budget + 1),
                         (upper_const,) * (budget + 1))


@dataclass(frozen=True)
class ContinuityData:
    """Continuity levels p_k and constants C_k of a reconstruction operator."""

    theta_levels: tuple
    consts: tuple

    def __post_init__(self):
        p = _int_tuple(self.theta_levels)
        c = tuple(float(x) for x in self.consts)
        if len(p) != len(c) or not p:
            raise ValueError("continuity entries must be nonempty and of equal length")
        if any(x < 0 for x in p):
            raise ValueError("continuity levels must be nonnegative")
        if any(x <= 0 for x in c):
            raise ValueError("continuity constants must be positive")
        object.__setattr__(self, "theta_levels", p)
        object.__setattr__(self, "consts", c)

    def __len__(self) -> int:
        return len(self.theta_levels)


@dataclass(frozen=True)
class SelectionResult:
    """Re-indexed plan produced by the subsequence selection.

    Entry j carries the lower X level, the inflated mid level and the upper
    X level together with the constants transported from the source plan.
    """

    lower_levels: tuple     # s at the chosen index
    mid_levels: tuple       # inflated level n at the chosen index
    upper_levels: tuple     # t at index n
    lower_consts: tuple
    upper_consts: tuple
    chosen_indices: tuple
    inflated_levels: tuple  # full n_k table over the continuity range

    def __post_init__(self):
        for name in ("lower_levels", "mid_levels", "upper_levels"):
            seq = getattr(self, name)
            if any(x >= y for x, y in zip(seq, seq[1:])):
                raise ValueError("%s must be strictly increasing" % name)
        if any(w > wt for w, wt in zip(self.lower_levels, self.upper_levels)):
            raise ValueError("lower level must not exceed the upper level")


# ---------------------------------------------------------------------------
# plan verification


@dataclass(frozen=True, eq=False)
class LevelCheck:
    level: int
    plan_lower: float
    plan_upper: float
    optimal_lower: Optional[float]
    optimal_upper: Optional[float]
    slack_lower: Optional[float]
    slack_upper: Optional[float]
    samples_checked: int


@dataclass(frozen=True, eq=False)
class PlanReport:
    passed: bool
    first_violation: Optional[tuple]   # (level, sample position, side, lhs, rhs)
    levels: tuple


def verify_pre_f_frame(frame: FrameSystem, x_grading: WeightGrading,
                       theta_grading: WeightGrading, plan: IndexPlan,
                       samples: Sequence[GradedVector]) -> PlanReport:
    """Check the two-sided inequality for every plan level on every sample.

    Also recomputes the optimal constants per level (diagonal/block forms
    only) and reports the slack of the plan constants against them.
    """
    if plan.budget > theta_grading.levels:
        raise LevelError("plan budget %d beyond mid-norm level budget %d"
                         % (plan.budget, theta_grading.levels))
    if max(plan.upper_levels) > x_grading.levels:
        raise LevelError("plan upper level %d beyond X level budget %d"
                         % (max(plan.upper_levels), x_grading.levels))
    first_violation = None
    checks = []
    for k in range(plan.budget + 1):
        s_k = plan.lower_levels[k]
        t_k = plan.upper_levels[k]
        a_k = plan.lower_consts[k]
        b_k = plan.upper_consts[k]
        for pos, f in enumerate(samples):
            mid = analysis_norm(frame, f, theta_grading, k)
            lo = a_k * graded_norm(f, x_grading, s_k)
            hi = b_k * graded_norm(f, x_grading, t_k)
            if lo > mid * (1 + REL_SLACK) and first_violation is None:
                first_violation = (k, pos, "lower", lo, mid)
            if mid > hi * (1 + REL_SLACK) and first_violation is None:
                first_violation = (k, pos, "upper", mid, hi)
        try:
            opt = frame_bounds_analytic(frame, theta_grading, k,
                                        x_grading, s_k, t_k)
            checks.append(LevelCheck(k, a_k, b_k, opt.lower, opt.upper,
                                     opt.lower - a_k, b_k - opt.upper,
                                     len(samples)))
        except FrameFormError:
            checks.append(LevelCheck(k, a_k, b_k, None, None, None, None,
                                     len(samples)))
    return PlanReport(first_violation is None, first_violation, tuple(checks))


# ---------------------------------------------------------------------------
# strictness classification


@dataclass(frozen=True, eq=False)
class LevelCertificate:
    """Admissible single level n with two-sided constants at one mid level."""

    level: int
    admissible_level: int
    lower: float
    upper: float


@dataclass(frozen=True, eq=False)
class RatioWitness:
    """Canonical-vector family breaking one candidate level n.

    mode 'upper_unbounded': the ratio grows without bound along the listed
    coordinate class, so no finite upper constant works.  mode
    'lower_vanishing': the ratio tends to zero, so no positive lower
    constant works.  coordinates/ratios list the first class members.
    """

    level: int
    candidate: int
    mode: str
    coordinates: tuple
    ratios: tuple
    slope: float


@dataclass(frozen=True, eq=False)
class StrictnessVerdict:
    verdict: str                       # Strict | NotStrict | Undetermined
    certificates: tuple = ()           # LevelCertificate per level when Strict
    witnesses: tuple = ()              # RatioWitness per candidate when NotStrict
    n_max: int = 0
    detail: str = ""

    def __post_init__(self):
        if self.verdict not in ("Strict", "NotStrict", "Undetermined"):
            raise ValueError("unknown verdict %r" % (self.verdict,))
        if self.verdict == "NotStrict":
            if len({w.level for w in self.witnesses}) != 1:
                raise ValueError("witnesses must target a single level")
            got = sorted(w.candidate for w in self.witnesses)
            if got != list(range(self.n_max + 1)):
                raise ValueError("witnesses must cover every candidate up to n_max")


def _certified_class_slopes(frame: FrameSystem, theta: WeightGrading, s: int,
                            x: WeightGrading, n: int):
    """Per-parity-class certified slopes of the ratio sequence, or None."""
    ratios = _ratio_sequences(frame, theta, s, x, n)
    out = []
    for cls in _parity_classes(ratios.size):
        certified, slope = certified_power_profile(cls, ratios[cls - 1])
        if not certified:
            return None, ratios
        out.append((cls, slope))
    return out, ratios


def classify_strictness(frame: FrameSystem, x_grading: WeightGrading,
                        theta_grading: WeightGrading,
                        n_max: Optional[int] = None) -> StrictnessVerdict:
    """Decide whether one level can serve both sides of the inequality.

    For every mid level s up to the theta budget, candidate X levels
    n = 0..n_max are scanned for a ratio sequence with certified finite
    positive extremes.  A level with no admissible candidate yields a
    NotStrict verdict carrying one diverging or vanishing canonical-vector
    family per candidate.  Uncertifiable tails yield Undetermined.
    """
    budget = theta_grading.levels
    if n_max is None:
        n_max = 4 * budget
    if n_max > x_grading.levels:
        raise LevelError("candidate bound %d beyond X level budget %d"
                         % (n_max, x_grading.levels))
    certificates = []
    for s in range(budget + 1):
        admissible = None
        for n in range(n_max + 1):
            slopes, ratios = _certified_class_slopes(frame, theta_grading, s,
                                                     x_grading, n)
            if slopes is None:
                return StrictnessVerdict(
                    "Undetermined", n_max=n_max,
                    detail="ratio tail not certifiable at level %d, candidate %d"
                           % (s, n))
            unbounded = any(sl > SLOPE_FLAT for _, sl in slopes)
            vanishing = any(sl < -SLOPE_FLAT for _, sl in slopes)
            if not unbounded and not vanishing:
                admissible = LevelCertificate(s, n, float(ratios.min()),
                                              float(ratios.max()))
                break
        if admissible is None:
            witnesses = _witness_family(frame, theta_grading, s, x_grading, n_max)
            if witnesses is None:
                return StrictnessVerdict(
                    "Undetermined", n_max=n_max,
                    detail="ratio tail not certifiable at level %d" % s)
            return StrictnessVerdict("NotStrict", witnesses=witnesses, n_max=n_max)
        certificates.append(admissible)
    return StrictnessVerdict("Strict", certificates=tuple(certificates),
                             n_max=n_max)


def _witness_family(frame: FrameSystem, theta: WeightGrading, s: int,
                    x: WeightGrading, n_max: int):
    """One breaking canonical family per candidate level at mid level s."""
    witnesses = []
    for n in range(n_max + 1):
        slopes, ratios = _certified_class_slopes(frame, theta, s, x, n)
        if slopes is None:
            return None
        grow = [(sl, cls) for cls, sl in slopes if sl > SLOPE_FLAT]
        fall = [(sl, cls) for cls, sl in slopes if sl < -SLOPE_FLAT]
        if n <= s and grow:
            mode, (slope, cls) = "upper_unbounded", max(grow, key=lambda t: t[0])
        elif fall:
            mode, (slope, cls) = "lower_vanishing", min(fall, key=lambda t: t[0])
        elif grow:
            mode, (slope, cls) = "upper_unbounded", max(grow, key=lambda t: t[0])
        else:
            return None
        head = cls[:4]
        witnesses.append(RatioWitness(s, n, mode, tuple(int(j) for j in head),
                                      tuple(float(ratios[j - 1]) for j in head),
                                      float(slope)))
    return tuple(witnesses)


# ---------------------------------------------------------------------------
# subsequence selection


def select_subsequence(plan: IndexPlan, continuity: ContinuityData) -> SelectionResult:
    """Inflate mid levels to n_k = max(k, p_k) and re-index the plan along
    the earliest strictly increasing subsequence of {n_k}.

    The continuity table fixes the selection range; the plan must extend far
    enough to be consulted at every inflated level.
    """
    count = len(continuity)
    inflated = tuple(max(k, continuity.theta_levels[k]) for k in range(count))
    top = max(inflated)
    if top > plan.budget:
        raise ValueError("plan covers levels up to %d but the selection needs %d"
                         % (plan.budget, top))
    chosen = [0]
    for k in range(1, count):
        if inflated[k] > inflated[chosen[-1]]:
            chosen.append(k)
    lower = tuple(plan.lower_levels[k] for k in chosen)
    mid = tuple(inflated[k] for k in chosen)
    upper = tuple(plan.upper_levels[n] for n in mid)
    lo_c = tuple(plan.lower_consts[k] for k in chosen)
    hi_c = tuple(plan.upper_consts[n] for n in mid)
    return SelectionResult(lower, mid, upper, lo_c, hi_c,
                           tuple(chosen), inflated)


def verify_selected_chain(frame: FrameSystem, x_grading: WeightGrading,
                          theta_grading: WeightGrading,
                          selection: SelectionResult,
                          samples: Sequence[GradedVector]) -> PlanReport:
    """Re-verify the re-indexed inequality chain on the samples.

    For each selected entry the mid norm is taken at the inflated level and
    the outer norms at the transported lower/upper levels.
    """
    first_violation = None
    checks = []
    for j in range(len(selection.mid_levels)):
        s_j = selection.lower_levels[j]
        n_j = selection.mid_levels[j]
        t_j = selection.upper_levels[j]
        a_j = selection.lower_consts[j]
        b_j = selection.upper_consts[j]
        for pos, f in enumerate(samples):
            mid = analysis_norm(frame, f, theta_grading, n_j)
            lo = a_j * graded_norm(f, x_grading, s_j)
            hi = b_j * graded_norm(f, x_grading, t_j)
            if lo > mid * (1 + REL_SLACK) and first_violation is None:
                first_violation = (n_j, pos, "lower", lo, mid)
            if mid > hi * (1 + REL_SLACK) and first_violation is None:
                first_violation = (n_j, pos, "upper", mid, hi)
        checks.append(LevelCheck(n_j, a_j, b_j, None, None, None, None,
                                 len(samples)))
    return PlanReport(first_violation is None, first_violation, tuple(checks))
