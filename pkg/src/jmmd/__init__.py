"""Joint modeling of mean and dispersion with stepwise variable selection."""

from .criteria import (
    CriterionValue,
    Direction,
    DispCriterion,
    LambdaChoice,
    MeanCriterion,
    aicc_gamma,
    arc_length_distance,
    eaic,
    r2_dispersion,
    r2_hu_shao,
    r2_mean,
    r2_zhang,
    weighted_arc_length_distance,
)
from .data import Dataset
from .families import Family, Kind, Link
from .glm import DesignMatrix, FittedGlm, deviance_components, hat_values, irls_fit
from .joint import (
    JointFit,
    JointSpec,
    extended_quasi_likelihood,
    fit_joint,
    standardized_deviance,
)
from .selection import (
    Decision,
    ModelKind,
    SelectionStep,
    SelectionTrace,
    TermSet,
    chisq_test_nested,
    count_candidate_models,
    enforce_hierarchy,
    f_test_nested,
    select_joint_alg2,
    select_terms_alg1,
)
from .simulation import (
    Classification,
    Distribution,
    McReport,
    ScenarioSpec,
    classify_model,
    gen_beta_binomial,
    gen_compound_poisson,
    gen_covariates,
    gen_normal,
    parse_scenario,
    run_monte_carlo,
)

__all__ = [
    "Classification",
    "CriterionValue",
    "Dataset",
    "Decision",
    "DesignMatrix",
    "Direction",
    "DispCriterion",
    "Distribution",
    "Family",
    "FittedGlm",
    "JointFit",
    "JointSpec",
    "Kind",
    "LambdaChoice",
    "Link",
    "McReport",
    "MeanCriterion",
    "ModelKind",
    "ScenarioSpec",
    "SelectionStep",
    "SelectionTrace",
    "TermSet",
    "aicc_gamma",
    "arc_length_distance",
    "chisq_test_nested",
    "classify_model",
    "count_candidate_models",
    "deviance_components",
    "eaic",
    "enforce_hierarchy",
    "extended_quasi_likelihood",
    "f_test_nested",
    "fit_joint",
    "gen_beta_binomial",
    "gen_compound_poisson",
    "gen_covariates",
    "gen_normal",
    "hat_values",
    "irls_fit",
    "parse_scenario",
    "r2_dispersion",
    "r2_hu_shao",
    "r2_mean",
    "r2_zhang",
    "run_monte_carlo",
    "select_joint_alg2",
    "select_terms_alg1",
    "standardized_deviance",
    "weighted_arc_length_distance",
]

__version__ = "0.1.0"
