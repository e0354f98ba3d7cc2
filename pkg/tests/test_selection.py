import itertools

import numpy as np
import pytest

from jmmd import (
    Decision,
    Family,
    JointSpec,
    ModelKind,
    TermSet,
    chisq_test_nested,
    count_candidate_models,
    enforce_hierarchy,
    f_test_nested,
    fit_joint,
    select_joint_alg2,
    select_terms_alg1,
)
from jmmd.criteria import CriterionValue, Direction, DispCriterion, MeanCriterion
from jmmd.errors import DomainError, NegativeImprovement, UnknownParent
from jmmd.selection import _forward_select
from jmmd.simulation import Distribution, ScenarioSpec, _replication_rng, gen_normal


def _normal_data(n, gamma, seed):
    spec = ScenarioSpec(
        Distribution.NORMAL, (4.0, 15.0, 13.0, 0.0), gamma, n, 1,
        MeanCriterion.R2_SQRT, DispCriterion.AICC, seed,
    )
    return gen_normal(spec, _replication_rng(seed, 0))


class TestNestedTests:
    def test_f_no_improvement(self):
        res = f_test_nested(10.0, 10.0, 1, 2, 30)
        assert res.statistic == pytest.approx(0.0)
        assert res.p_value == pytest.approx(1.0)

    def test_f_reference_values(self):
        res = f_test_nested(34.6839, 24.0587, 1, 2, 32)
        assert res.statistic == pytest.approx(13.2491, rel=5e-4)
        assert res.p_value == pytest.approx(0.0010, abs=1e-4)
        res = f_test_nested(52.454, 26.624, 4, 5, 32)
        assert res.statistic == pytest.approx(26.195, rel=5e-4)

    def test_f_negative_improvement(self):
        with pytest.raises(NegativeImprovement):
            f_test_nested(10.0, 10.1, 1, 2, 30)

    def test_chisq_no_improvement(self):
        res = chisq_test_nested(5.0, 5.0, 1, 2)
        assert res.statistic == pytest.approx(0.0)
        assert res.p_value == pytest.approx(1.0)

    def test_chisq_reference_values(self):
        res = chisq_test_nested(80.8899, 72.0353, 1, 2)
        assert res.statistic == pytest.approx(4.4273, rel=1e-6)
        assert res.p_value == pytest.approx(0.0354, abs=1e-4)
        res = chisq_test_nested(65.4232, 61.3397, 2, 3)
        assert res.statistic == pytest.approx(2.0417, rel=1e-4)
        assert res.p_value == pytest.approx(0.1530, abs=1e-4)

    def test_chisq_negative_improvement(self):
        with pytest.raises(NegativeImprovement):
            chisq_test_nested(5.0, 5.2, 1, 2)


class _StubPhase:
    """Deterministic phase over synthetic criterion/fit-measure tables."""

    kind = ModelKind.MEAN

    def __init__(self, crit_by_terms, measure_by_terms, direction, n=40):
        self._crit = crit_by_terms
        self._meas = measure_by_terms
        self._dir = direction
        self.n = n
        self.criterion = self

    @property
    def direction(self):
        return self._dir

    def evaluate(self, terms):
        from jmmd.selection import _Candidate

        key = tuple(sorted(terms))
        crit = CriterionValue(MeanCriterion.R2_UNIT, self._crit[key], self.n, len(terms))
        return _Candidate(tuple(terms), None, self._meas[key], crit)

    def test(self, small, big):
        return f_test_nested(
            small.fit_measure, big.fit_measure, len(small.terms), len(big.terms), self.n
        )

    def test_level(self, alpha):
        return alpha


def _affine_tables(direction):
    crit = {
        ("1",): 0.0,
        ("1", "a"): 0.60, ("1", "b"): 0.40, ("1", "c"): 0.10,
        ("1", "a", "b"): 0.70, ("1", "a", "c"): 0.62,
        ("1", "a", "b", "c"): 0.71,
        ("1", "b", "c"): 0.45,
    }
    meas = {
        ("1",): 100.0,
        ("1", "a"): 40.0, ("1", "b"): 60.0, ("1", "c"): 90.0,
        ("1", "a", "b"): 25.0, ("1", "a", "c"): 38.0,
        ("1", "a", "b", "c"): 24.4,
        ("1", "b", "c"): 55.0,
    }
    if direction is Direction.MINIMIZE:
        crit = {k: 3.0 - 2.0 * v for k, v in crit.items()}
    return crit, meas


class TestForwardSelectMachinery:
    def test_argmax_invariance_under_affine_rescale(self):
        crit_max, meas = _affine_tables(Direction.MAXIMIZE)
        crit_min, _ = _affine_tables(Direction.MINIMIZE)
        up = _StubPhase(crit_max, meas, Direction.MAXIMIZE)
        down = _StubPhase(crit_min, meas, Direction.MINIMIZE)
        t1, _, s1 = _forward_select(up, ("1",), ("a", "b", "c"), 0.10)
        t2, _, s2 = _forward_select(down, ("1",), ("a", "b", "c"), 0.10)
        assert t1 == t2
        assert [st.candidate for st in s1] == [st.candidate for st in s2]
        assert [st.decision for st in s1] == [st.decision for st in s2]

    def test_tie_break_prefers_pool_order(self):
        crit = {("1",): 0.0, ("1", "a"): 0.5, ("1", "b"): 0.5, ("1", "a", "b"): 0.5}
        meas = {("1",): 100.0, ("1", "a"): 50.0, ("1", "b"): 50.0, ("1", "a", "b"): 49.0}
        phase = _StubPhase(crit, meas, Direction.MAXIMIZE)
        _, _, steps = _forward_select(phase, ("1",), ("a", "b"), 0.10)
        assert steps[0].candidate == "a"


class TestAlg1:
    def test_immediate_stop_when_nothing_significant(self):
        data = _normal_data(30, (0.3, 0.0, 0.0, 0.0), seed=99)
        # response carries no x-signal at all: overwrite y with pure noise
        noise = np.random.default_rng(5).normal(size=30)
        data = type(data)(response=noise, factors=data.factors)
        out = select_terms_alg1(
            data,
            TermSet(("1",)),
            ModelKind.MEAN,
            TermSet(("1",), ("x1", "x2", "x3")),
            MeanCriterion.R2_SQRT,
            alpha=0.001,
            mean_family=Family.normal_type(),
        )
        assert out["chosen"].terms == ("1",)
        assert len(out["steps"]) == 1
        assert out["steps"][0].decision in (
            Decision.REJECTED_BY_TEST, Decision.REJECTED_BY_CRITERION,
        )

    def test_mean_selection_recovers_signal(self):
        data = _normal_data(150, (0.3, 0.0, 3.0, 0.0), seed=42)
        out = select_terms_alg1(
            data,
            TermSet(("1",)),
            ModelKind.MEAN,
            TermSet(("1",), ("x1", "x2", "x3")),
            MeanCriterion.R2_SQRT,
            mean_family=Family.normal_type(),
        )
        assert set(out["chosen"].terms) == {"1", "x1", "x2"}

    def test_dispersion_selection_recovers_signal(self):
        data = _normal_data(150, (0.3, 0.0, 3.0, 0.0), seed=42)
        out = select_terms_alg1(
            data,
            TermSet(("1", "x1", "x2")),
            ModelKind.DISPERSION,
            TermSet(("1",), ("z1", "z2", "z3")),
            DispCriterion.AICC,
            mean_family=Family.normal_type(),
        )
        assert "z2" in out["chosen"].terms


class TestAlg2:
    def test_injection_demo_step_properties(self, molding):
        trace = select_joint_alg2(
            molding["dataset"],
            molding["mean_pool"],
            molding["disp_pool"],
            MeanCriterion.R2_SQRT,
            DispCriterion.AICC,
            0.10,
            mean_family=Family.normal_type(),
            refit=False,
        )
        for cyc in trace.iterations:
            for step in (*cyc.mean_steps, *cyc.disp_steps):
                assert 0.0 <= step.p_value <= 1.0
                assert step.test_statistic >= 0.0
                level = 0.10 if step.model_kind is ModelKind.MEAN else 0.05
                if step.decision in (Decision.ACCEPTED, Decision.ACCEPTED_FINAL):
                    assert step.p_value < level
                elif step.decision is Decision.REJECTED_BY_TEST:
                    assert step.p_value >= level
        finals = [c.mean_criterion_final for c in trace.iterations]
        assert all(b > a for a, b in zip(finals[:-2], finals[1:-1]))
        assert finals[-1] <= finals[-2]

    def test_determinism(self, molding):
        kw = dict(
            mean_criterion=MeanCriterion.R2_SQRT,
            disp_criterion=DispCriterion.AICC,
            alpha=0.10,
            mean_family=Family.normal_type(),
            refit=False,
        )
        t1 = select_joint_alg2(
            molding["dataset"], molding["mean_pool"], molding["disp_pool"], **kw
        )
        t2 = select_joint_alg2(
            molding["dataset"], molding["mean_pool"], molding["disp_pool"], **kw
        )
        assert t1.final_spec.mean_terms == t2.final_spec.mean_terms
        assert t1.final_spec.disp_terms == t2.final_spec.disp_terms
        s1 = [(s.candidate, s.p_value) for c in t1.iterations for s in c.mean_steps]
        s2 = [(s.candidate, s.p_value) for c in t2.iterations for s in c.mean_steps]
        assert s1 == s2

    def test_no_dispersion_signal_stops_after_cycle_two(self):
        data = _normal_data(200, (0.3, 0.0, 0.0, 0.0), seed=23)
        trace = select_joint_alg2(
            data, ("x1", "x2", "x3"), ("z1", "z2", "z3"),
            MeanCriterion.R2_SQRT, DispCriterion.AICC, 0.10,
            mean_family=Family.normal_type(), refit=False,
        )
        assert len(trace.iterations) == 2
        assert trace.final_spec.disp_terms == ("1",)
        assert trace.final_spec.mean_terms == trace.iterations[0].mean_terms

    def test_empty_mean_pool(self, molding):
        trace = select_joint_alg2(
            molding["dataset"], (), molding["disp_pool"],
            MeanCriterion.R2_SQRT, DispCriterion.AICC, 0.10,
            mean_family=Family.normal_type(), refit=False,
        )
        assert trace.final_spec.mean_terms == ("1",)
        assert all(len(c.mean_steps) == 0 for c in trace.iterations)

    def test_exhaustive_toy_oracle(self):
        data = _normal_data(200, (0.3, 0.0, 3.0, 0.0), seed=23)
        trace = select_joint_alg2(
            data, ("x1", "x2", "x3"), ("z1", "z2", "z3"),
            MeanCriterion.R2_UNIT, DispCriterion.R2_UNIT, 0.10,
            mean_family=Family.normal_type(), refit=False,
        )

        def criterion_of(mean_terms, disp_terms):
            spec = JointSpec(mean_terms, disp_terms, Family.normal_type())
            jf = fit_joint(data, spec)
            num = jf.mean_fit.weighted_deviance / (200 - len(mean_terms))
            from jmmd import irls_fit

            null = irls_fit(
                data.design(("1",)), data.response, Family.normal_type(),
                jf.mean_fit.prior_weights,
            )
            return 1.0 - num / (null.weighted_deviance / 199)

        subsets = lambda names: [
            ("1", *c) for r in range(4) for c in itertools.combinations(names, r)
        ]
        values = [
            criterion_of(mt, dt)
            for mt in subsets(("x1", "x2", "x3"))
            for dt in subsets(("z1", "z2", "z3"))
        ]
        winner = criterion_of(trace.final_spec.mean_terms, trace.final_spec.disp_terms)
        cutoff = np.quantile(values, 0.9)
        assert winner >= cutoff


class TestHierarchy:
    def test_completes_interaction_parents(self):
        spec = JointSpec(("1", "A", "CN", "EN", "D"), ("1", "E"), Family.normal_type())
        out = enforce_hierarchy(spec, ("A", "B", "C", "D", "E", "F", "G", "M", "N", "O"))
        assert out.mean_terms == ("1", "A", "CN", "EN", "D", "C", "N", "E")
        assert out.disp_terms == ("1", "E")

    def test_idempotent(self):
        spec = JointSpec(("1", "CN", "C", "N"), ("1",), Family.normal_type())
        out = enforce_hierarchy(spec, ("C", "N"))
        assert out.mean_terms == ("1", "CN", "C", "N")
        again = enforce_hierarchy(out, ("C", "N"))
        assert again.mean_terms == out.mean_terms

    def test_no_interactions_unchanged(self):
        spec = JointSpec(("1", "x1", "x2"), ("1",), Family.normal_type())
        out = enforce_hierarchy(spec, ("x1", "x2", "x3"))
        assert out.mean_terms == spec.mean_terms

    def test_unknown_parent(self):
        spec = JointSpec(("1", "CQ"), ("1",), Family.normal_type())
        with pytest.raises(UnknownParent):
            enforce_hierarchy(spec, ("A", "B", "C"))


class TestModelCounts:
    def test_reference_counts(self):
        out = count_candidate_models(10, 10, 10)
        assert out["with_procedure"] == 1176
        assert out["exhaustive"] == 1_048_576

    def test_empty_selection(self):
        out = count_candidate_models(4, 6, 0)
        assert out["with_procedure"] == 2 * 4 + 1

    def test_small_case(self):
        out = count_candidate_models(1, 1, 1)
        assert out["with_procedure"] == 6
        assert out["exhaustive"] == 4

    def test_large_counts_do_not_overflow(self):
        out = count_candidate_models(10, 40, 10)
        assert out["exhaustive"] == 2**80

    def test_k_cannot_exceed_m(self):
        with pytest.raises(DomainError):
            count_candidate_models(2, 3, 4)
