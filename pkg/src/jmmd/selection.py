"""Stepwise variable selection for joint mean/dispersion models.

One selection phase (the single-sub-model algorithm) holds the other
sub-model's fitted values frozen, fits every one-term extension of the
incumbent, filters by a goodness-of-fit criterion and confirms the best
extension with a nested hypothesis test: an F test on the dispersion-
scaled standardized deviances for the mean model, a Gamma deviance
chi-square test for the dispersion model.

The joint algorithm alternates phases.  Cycle 1 selects the mean under
unit dispersion; each later cycle selects the dispersion against the
current mean fit and then reselects the mean under the new dispersion
weights, stopping once the mean criterion stops improving, in which case
the previous cycle's pair is the result.

State handoff between phases: the dispersion response is the
prior-weight-scaled standardized deviance d_i/(phi_i (1 - h_i)),
dispersion GLMs run with unit prior weights, and the phi vector is
overwritten by each dispersion fit's fitted values.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import chi2 as _chi2
from scipy.stats import f as _fdist

from .criteria import (
    CriterionValue,
    Direction,
    DispCriterion,
    MeanCriterion,
    aicc_gamma,
    r2_dispersion,
)
from .data import Dataset
from .errors import (
    DegenerateResponse,
    DomainError,
    IterationCap,
    NegativeImprovement,
    NonConvergence,
    PenaltyOverflow,
    SingularDesign,
    UnknownParent,
)
from .families import Family
from .glm import FittedGlm, irls_fit
from .joint import JointFit, JointSpec, fit_joint

log = logging.getLogger(__name__)

# A candidate must beat the incumbent by more than this to count as an
# improvement; equal-criterion candidates keep pool order deterministic.
CRITERION_TIE_TOL = 1e-12

# Nested fits may degrade by at most this before the tests reject them.
NESTING_TOL = 1e-8

# Dispersion additions are confirmed at half the nominal level; the
# chi-square deviance test is anti-conservative on small-sample Gamma
# responses.
DISP_TEST_LEVEL_FACTOR = 0.5

MAX_CYCLES = 20


class ModelKind(Enum):
    MEAN = "mean"
    DISPERSION = "dispersion"


class Decision(Enum):
    ACCEPTED = "accepted"
    REJECTED_BY_TEST = "rejected-by-test"
    REJECTED_BY_CRITERION = "rejected-by-criterion"
    ACCEPTED_FINAL = "accepted-final"


@dataclass(frozen=True)
class TermSet:
    """Ordered selected terms plus the ordered remaining candidate pool."""

    terms: tuple[str, ...]
    pool: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "pool", tuple(self.pool))
        if "1" not in self.terms:
            raise DomainError("a term set always contains the intercept '1'")
        overlap = set(self.terms) & set(self.pool)
        if overlap:
            raise DomainError(f"terms and candidate pool overlap: {sorted(overlap)}")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: tuple[int, int] | int
    p_value: float


@dataclass(frozen=True)
class SelectionStep:
    model_kind: ModelKind
    candidate: str
    criterion: CriterionValue
    test_statistic: float
    test_df: tuple[int, int] | int
    p_value: float
    decision: Decision


@dataclass(frozen=True)
class CycleRecord:
    iteration_index: int
    mean_steps: tuple[SelectionStep, ...]
    disp_steps: tuple[SelectionStep, ...]
    mean_criterion_final: float
    mean_terms: tuple[str, ...]
    disp_terms: tuple[str, ...]


@dataclass(frozen=True)
class SelectionTrace:
    """Full audit log of the joint selection run."""

    iterations: tuple[CycleRecord, ...]
    final_spec: JointSpec
    final_fit: JointFit | None
    selected_mean_fit: FittedGlm
    selected_disp_fit: FittedGlm | None
    selected_phi: np.ndarray


# ---------------------------------------------------------------------------
# nested-model tests
# ---------------------------------------------------------------------------


def f_test_nested(
    dstar_over_phi_small: float,
    dstar_over_phi_big: float,
    c: int,
    d: int,
    n: int,
) -> TestResult:
    """F test for nested mean models on S = sum(d*_i / phi_i)."""
    if d <= c:
        raise DomainError("the larger model must have more parameters")
    if n <= d:
        raise DomainError("need n > d residual degrees of freedom")
    if dstar_over_phi_big > dstar_over_phi_small + NESTING_TOL:
        raise NegativeImprovement(
            "larger mean model fits worse than its sub-model "
            f"({dstar_over_phi_big:.6g} > {dstar_over_phi_small:.6g})"
        )
    stat = max(dstar_over_phi_small - dstar_over_phi_big, 0.0) / (d - c)
    stat /= dstar_over_phi_big / (n - d)
    return TestResult(stat, (d - c, n - d), float(_fdist.sf(stat, d - c, n - d)))


def chisq_test_nested(
    deviance_small: float,
    deviance_big: float,
    a: int,
    b: int,
) -> TestResult:
    """Half the Gamma deviance change, asymptotically chi-square(b - a)."""
    if b <= a:
        raise DomainError("the larger model must have more parameters")
    if deviance_big > deviance_small + NESTING_TOL:
        raise NegativeImprovement(
            "larger dispersion model fits worse than its sub-model "
            f"({deviance_big:.6g} > {deviance_small:.6g})"
        )
    stat = 0.5 * max(deviance_small - deviance_big, 0.0)
    return TestResult(stat, b - a, float(_chi2.sf(stat, b - a)))


# ---------------------------------------------------------------------------
# phase machinery
# ---------------------------------------------------------------------------


@dataclass
class _Candidate:
    terms: tuple[str, ...]
    fit: FittedGlm
    fit_measure: float  # S for mean phases, D for dispersion phases
    criterion: CriterionValue


class _MeanPhase:
    """Evaluates mean models under a frozen dispersion vector.

    The adjusted R2 here measures variation by the dispersion-weighted
    deviance (the squared weighted deviance residuals), with the total
    variation taken from the intercept-only fit under the same weights.
    For Normal-type models this coincides with the arc-length criterion
    in ``criteria.r2_mean``.
    """

    def __init__(
        self,
        data: Dataset,
        family: Family,
        phi: np.ndarray,
        criterion: MeanCriterion,
        q_context: int,
    ):
        self.data = data
        self.family = family
        self.phi = phi
        self.weights = 1.0 / phi
        self.criterion = criterion
        self.q_context = q_context
        self.n = data.n
        if criterion is MeanCriterion.EAIC:
            # the log-normalizer of Q+ is constant across candidates
            vy = family.variance_at_response(data.response)
            self._log_norm = float(np.sum(np.log(2.0 * np.pi * phi * vy)))
        else:
            null = irls_fit(data.design(("1",)), data.response, family, self.weights)
            self._total_variation = null.weighted_deviance
            if self._total_variation <= 0.0:
                raise DegenerateResponse("response carries no variation")

    kind = ModelKind.MEAN

    def evaluate(self, terms: tuple[str, ...]) -> _Candidate:
        fit = irls_fit(self.data.design(terms), self.data.response, self.family, self.weights)
        dstar_w = fit.prior_weights * fit.deviance_components / (1.0 - fit.hat_values)
        s_value = float(np.sum(dstar_w))
        p = len(terms)
        if self.criterion is MeanCriterion.EAIC:
            q_plus = -0.5 * (s_value + self._log_norm)
            kappa = p + self.q_context
            if self.n <= kappa + 1:
                raise PenaltyOverflow("EAIC penalty undefined for this model size")
            value = -2.0 * q_plus + 2.0 * kappa * self.n / (self.n - kappa - 1)
            crit = CriterionValue(self.criterion, value, self.n, p)
        else:
            lam = self.criterion.lambda_choice
            lam_n = lam.value_at(self.n)
            if self.n <= lam_n * p:
                raise PenaltyOverflow("penalised degrees of freedom exhausted")
            value = 1.0 - (fit.weighted_deviance / (self.n - lam_n * p)) / (
                self._total_variation / (self.n - 1)
            )
            crit = CriterionValue(self.criterion, value, self.n, p, lam_n)
        return _Candidate(tuple(terms), fit, s_value, crit)

    def test(self, small: _Candidate, big: _Candidate) -> TestResult:
        return f_test_nested(
            small.fit_measure, big.fit_measure, len(small.terms), len(big.terms), self.n
        )

    def test_level(self, alpha: float) -> float:
        return alpha


class _DispersionPhase:
    """Evaluates Gamma dispersion models against a frozen response."""

    def __init__(self, data: Dataset, response: np.ndarray, criterion: DispCriterion):
        self.data = data
        self.response = np.maximum(response, 1e-12)
        self.criterion = criterion
        self.family = Family.gamma_dispersion()
        self.n = data.n

    kind = ModelKind.DISPERSION

    def evaluate(self, terms: tuple[str, ...]) -> _Candidate:
        fit = irls_fit(self.data.design(terms), self.response, self.family)
        d_value = fit.total_deviance
        q = len(terms)
        if self.criterion is DispCriterion.AICC:
            value = aicc_gamma(fit, self.n, q)
            crit = CriterionValue(self.criterion, value, self.n, q)
        else:
            lam = self.criterion.lambda_choice
            value = r2_dispersion(self.response, fit.fitted_means, self.n, q, lam)
            crit = CriterionValue(self.criterion, value, self.n, q, lam.value_at(self.n))
        return _Candidate(tuple(terms), fit, d_value, crit)

    def test(self, small: _Candidate, big: _Candidate) -> TestResult:
        return chisq_test_nested(
            small.fit_measure, big.fit_measure, len(small.terms), len(big.terms)
        )

    def test_level(self, alpha: float) -> float:
        return alpha * DISP_TEST_LEVEL_FACTOR


def _better(direction: Direction, new: float, old: float) -> bool:
    if direction is Direction.MAXIMIZE:
        return new > old + CRITERION_TIE_TOL
    return new < old - CRITERION_TIE_TOL


def _forward_select(phase, initial_terms, pool, alpha):
    """One run of the single-sub-model selection loop."""
    terms = tuple(initial_terms)
    pool = [t for t in pool if t not in terms]
    incumbent = phase.evaluate(terms)
    direction = phase.criterion.direction
    level = phase.test_level(alpha)
    steps: list[SelectionStep] = []

    while pool:
        best: _Candidate | None = None
        for term in pool:
            try:
                cand = phase.evaluate((*terms, term))
            except (SingularDesign, NonConvergence, DomainError, PenaltyOverflow) as exc:
                log.debug("skipping %s candidate %r: %s", phase.kind.value, term, exc)
                continue
            if best is None or _better(direction, cand.criterion.value, best.criterion.value):
                best = cand
        if best is None:
            break
        try:
            test = phase.test(incumbent, best)
        except NegativeImprovement as exc:
            log.debug("dropping %s candidate %r: %s", phase.kind.value, best.terms[-1], exc)
            pool.remove(best.terms[-1])
            continue

        improved = _better(direction, best.criterion.value, incumbent.criterion.value)
        significant = test.p_value < level
        candidate = best.terms[-1]
        if improved and significant:
            decision = Decision.ACCEPTED
        elif improved:
            decision = Decision.REJECTED_BY_TEST
        elif significant:
            decision = Decision.ACCEPTED_FINAL
        else:
            decision = Decision.REJECTED_BY_CRITERION
        steps.append(
            SelectionStep(
                phase.kind, candidate, best.criterion,
                test.statistic, test.df, test.p_value, decision,
            )
        )
        if significant:
            terms = best.terms
            incumbent = best
            pool.remove(candidate)
        if decision is not Decision.ACCEPTED:
            break
    return terms, incumbent, tuple(steps)


def weighted_std_deviance(fit: FittedGlm) -> np.ndarray:
    """Prior-weighted standardized deviance components of a mean fit."""
    return fit.prior_weights * fit.deviance_components / (1.0 - fit.hat_values)


def _pool_labels(pool) -> tuple[str, ...]:
    if isinstance(pool, TermSet):
        if pool.pool:
            return pool.pool
        return tuple(t for t in pool.terms if t != "1")
    return tuple(pool)


# ---------------------------------------------------------------------------
# public selection operations
# ---------------------------------------------------------------------------


def select_terms_alg1(
    data: Dataset,
    fixed_other: TermSet,
    model_kind: ModelKind,
    pool: TermSet,
    criterion: MeanCriterion | DispCriterion,
    alpha: float = 0.10,
    *,
    mean_family: Family | None = None,
    frozen_phi: np.ndarray | None = None,
    frozen_response: np.ndarray | None = None,
) -> dict:
    """Select terms for one sub-model with the other sub-model fixed.

    When the frozen state is not supplied it is bootstrapped the way the
    joint algorithm does on its first pass: a mean selection under unit
    dispersion when the fixed dispersion model is the intercept (else the
    fixed dispersion model is fitted against an intercept-mean state),
    and for a dispersion selection the fixed mean model is fitted under
    unit dispersion to produce the response.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if model_kind is ModelKind.MEAN:
        if mean_family is None:
            raise DomainError("mean selection requires mean_family")
        if frozen_phi is None:
            if tuple(fixed_other.terms) == ("1",):
                frozen_phi = np.ones(data.n)
            else:
                base = irls_fit(
                    data.design(("1",)), data.response, mean_family, np.ones(data.n)
                )
                resp = weighted_std_deviance(base)
                disp = irls_fit(
                    data.design(fixed_other.terms),
                    np.maximum(resp, 1e-12),
                    Family.gamma_dispersion(),
                )
                frozen_phi = disp.fitted_means
        phase = _MeanPhase(data, mean_family, frozen_phi, criterion, len(fixed_other.terms))
    else:
        if frozen_response is None:
            if mean_family is None:
                raise DomainError("dispersion selection requires mean_family")
            base = irls_fit(
                data.design(fixed_other.terms), data.response, mean_family, np.ones(data.n)
            )
            frozen_response = weighted_std_deviance(base)
        phase = _DispersionPhase(data, frozen_response, criterion)

    labels = _pool_labels(pool)
    terms, incumbent, steps = _forward_select(phase, ("1",), labels, alpha)
    return {
        "chosen": TermSet(terms, tuple(t for t in labels if t not in terms)),
        "steps": steps,
        "fit": incumbent.fit,
        "criterion": incumbent.criterion,
    }


def select_joint_alg2(
    data: Dataset,
    mean_pool,
    disp_pool,
    mean_criterion: MeanCriterion,
    disp_criterion: DispCriterion,
    alpha: float = 0.10,
    *,
    mean_family: Family,
    max_cycles: int = MAX_CYCLES,
    refit: bool = True,
) -> SelectionTrace:
    """Run the alternating joint selection and return its full trace.

    ``refit=False`` skips the final converged joint refit of the chosen
    pair (``final_fit`` is then None); the Monte Carlo harness uses this
    because classification needs only the chosen term sets.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    mean_pool = _pool_labels(mean_pool)
    disp_pool = _pool_labels(disp_pool)
    n = data.n
    direction = mean_criterion.direction

    phi = np.ones(n)
    phase = _MeanPhase(data, mean_family, phi, mean_criterion, 1)
    mean_terms, mean_inc, mean_steps = _forward_select(phase, ("1",), mean_pool, alpha)
    crit_prev = mean_inc.criterion.value
    cycles = [CycleRecord(1, mean_steps, (), crit_prev, mean_terms, ("1",))]

    chosen_mean, chosen_disp = mean_terms, ("1",)
    chosen_mean_fit: FittedGlm = mean_inc.fit
    chosen_disp_fit: FittedGlm | None = None
    chosen_phi = phi
    prev_mean_fit = mean_inc.fit

    stopped = False
    for k in range(2, max_cycles + 1):
        response = weighted_std_deviance(prev_mean_fit)
        dphase = _DispersionPhase(data, response, disp_criterion)
        disp_terms, disp_inc, disp_steps = _forward_select(dphase, ("1",), disp_pool, alpha)
        phi = disp_inc.fit.fitted_means

        mphase = _MeanPhase(data, mean_family, phi, mean_criterion, len(disp_terms))
        mean_terms_k, mean_inc_k, mean_steps_k = _forward_select(mphase, ("1",), mean_pool, alpha)
        crit_k = mean_inc_k.criterion.value
        cycles.append(
            CycleRecord(k, mean_steps_k, disp_steps, crit_k, mean_terms_k, disp_terms)
        )
        if not _better(direction, crit_k, crit_prev):
            stopped = True
            break
        chosen_mean, chosen_disp = mean_terms_k, disp_terms
        chosen_mean_fit = mean_inc_k.fit
        chosen_disp_fit = disp_inc.fit
        chosen_phi = phi
        crit_prev = crit_k
        prev_mean_fit = mean_inc_k.fit
    if not stopped:
        raise IterationCap(f"joint selection exceeded {max_cycles} cycles")

    final_spec = JointSpec(chosen_mean, chosen_disp, mean_family)
    final_fit = None
    if refit:
        try:
            final_fit = fit_joint(data, final_spec)
        except NonConvergence as exc:
            final_fit = exc.last_fit
        except (SingularDesign, DomainError):
            final_fit = None
    return SelectionTrace(
        iterations=tuple(cycles),
        final_spec=final_spec,
        final_fit=final_fit,
        selected_mean_fit=chosen_mean_fit,
        selected_disp_fit=chosen_disp_fit,
        selected_phi=chosen_phi,
    )


def enforce_hierarchy(spec: JointSpec, factors) -> JointSpec:
    """Append missing parent main effects of mean-model interactions.

    ``factors`` is the collection of declared factor names used to
    decompose interaction labels.  The dispersion model is untouched and
    the operation is idempotent.
    """
    names = list(factors)
    mean_terms = list(spec.mean_terms)
    for term in spec.mean_terms:
        if term == "1" or term in names:
            continue
        parts = _decompose_label(term, names)
        if parts is None:
            raise UnknownParent(f"interaction {term!r} references undeclared factors")
        for parent in parts:
            if parent not in mean_terms:
                mean_terms.append(parent)
    return JointSpec(tuple(mean_terms), spec.disp_terms, spec.mean_family, spec.disp_family)


def _decompose_label(label: str, names) -> tuple[str, ...] | None:
    memo: dict[str, tuple[str, ...] | None] = {"": ()}

    def split(rest: str):
        if rest in memo:
            return memo[rest]
        memo[rest] = None
        for name in names:
            if rest.startswith(name):
                tail = split(rest[len(name):])
                if tail is not None:
                    memo[rest] = (name, *tail)
                    break
        return memo[rest]

    parts = split(label)
    if parts is None or len(parts) < 2:
        return None
    return parts


def count_candidate_models(l: int, m: int, k: int) -> dict:
    """Joint-model counts: the stepwise procedure versus exhaustion.

    With m candidate regressors per sub-model, k accepted terms per
    single-model run and l outer cycles, the procedure examines
    (2l + 1)(k(2m - k + 1)/2 + 1) joint models; checking every subset
    pair would take 2^(2m).
    """
    if k > m:
        raise DomainError("k cannot exceed the number of candidate regressors m")
    if min(l, m, k) < 0:
        raise DomainError("counts must be non-negative")
    per_run = k * (2 * m - k + 1) // 2 + 1
    return {"with_procedure": (2 * l + 1) * per_run, "exhaustive": 2 ** (2 * m)}
