"""Overdispersed data generators and the Monte Carlo selection harness.

Three generators share the same linear-predictor layout: a four-term mean
predictor on covariates x1..x3 and a four-term log-dispersion predictor
on z1..z3, all covariates uniform on (-1, 1).  Normal responses come
straight from Normal(mu, phi); Binomial overdispersion is induced by a
Beta-distributed success probability, Poisson overdispersion by a
compound Poisson-stopped sum.

The harness repeats generate/select/classify cycles with counter-based
substreams, so results are reproducible and independent of scheduling.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .criteria import DispCriterion, MeanCriterion
from .data import Dataset
from .errors import DispersionOutOfRange, DomainError, JmmdError
from .families import Family
from .selection import select_joint_alg2

# Feasibility margin for the overdispersion domain: compound Poisson needs
# phi > 1 and the Beta-Binomial needs 1 < phi < m.
PHI_MARGIN = 1e-6

MEAN_POOL = ("x1", "x2", "x3")
DISP_POOL = ("z1", "z2", "z3")


class Distribution(Enum):
    NORMAL = "normal"
    BINOMIAL = "binomial"
    POISSON = "poisson"


class Classification(Enum):
    OPTIMAL = "optimal"
    TYPE1 = "type1"
    TYPE2 = "type2"


@dataclass(frozen=True)
class ScenarioSpec:
    """One Monte Carlo cell: generator parameters plus selection settings.

    Zero entries in ``beta``/``gamma`` mark inactive terms.  With
    ``clamp_dispersion`` on (the default) the generated dispersions are
    clipped into the generator's feasible range; switched off, any
    infeasible row raises ``DispersionOutOfRange``.
    """

    distribution: Distribution
    beta: tuple[float, float, float, float]
    gamma: tuple[float, float, float, float]
    n: int
    replications: int
    criterion_mean: MeanCriterion
    criterion_disp: DispCriterion
    seed: int
    binomial_index: int = 10
    cluster_size: int = 5
    alpha: float = 0.10
    clamp_dispersion: bool = True

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "gamma", tuple(float(v) for v in self.gamma))
        if len(self.beta) != 4 or len(self.gamma) != 4:
            raise DomainError("beta and gamma each take four entries")
        if self.n < 8:
            raise DomainError("scenario sample size is too small")

    @property
    def mean_truth(self) -> frozenset[str]:
        return frozenset(f"x{j}" for j in (1, 2, 3) if self.beta[j] != 0.0)

    @property
    def disp_truth(self) -> frozenset[str]:
        return frozenset(f"z{j}" for j in (1, 2, 3) if self.gamma[j] != 0.0)

    @property
    def mean_family(self) -> Family:
        if self.distribution is Distribution.NORMAL:
            return Family.normal_type()
        if self.distribution is Distribution.BINOMIAL:
            return Family.binomial_type(self.binomial_index)
        return Family.poisson_type()


@dataclass(frozen=True)
class McReport:
    """Classification percentages over the non-failed replications."""

    mean: dict
    dispersion: dict
    replications: int
    failed: int
    scenario: ScenarioSpec | None = None

    def to_json(self) -> str:
        payload = {
            "mean": self.mean,
            "dispersion": self.dispersion,
            "replications": self.replications,
            "failed": self.failed,
        }
        if self.scenario is not None:
            payload["scenario"] = scenario_to_dict(self.scenario)
        return json.dumps(payload, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def gen_covariates(n: int, rng: np.random.Generator):
    """Mean and dispersion covariates, each n x 3 uniform on (-1, 1)."""
    if n < 1:
        raise DomainError("need at least one observation")
    x = rng.uniform(-1.0, 1.0, size=(n, 3))
    z = rng.uniform(-1.0, 1.0, size=(n, 3))
    return x, z


def _predictor(coefs, covs) -> np.ndarray:
    return coefs[0] + covs @ np.asarray(coefs[1:])


def _dataset(x, z, y, m=None) -> Dataset:
    factors = {f"x{j + 1}": x[:, j] for j in range(3)}
    factors.update({f"z{j + 1}": z[:, j] for j in range(3)})
    return Dataset(response=np.asarray(y, dtype=np.float64), factors=factors, binomial_index=m)


def _phi_values(spec: ScenarioSpec, z, upper: float | None) -> np.ndarray:
    phi = np.exp(_predictor(spec.gamma, z))
    lo = 1.0 + PHI_MARGIN
    hi = np.inf if upper is None else upper - PHI_MARGIN
    if spec.clamp_dispersion:
        return np.clip(phi, lo, hi)
    if np.any(phi < lo) or np.any(phi > hi):
        raise DispersionOutOfRange(
            "generated dispersion falls outside the feasible range; "
            "the scenario parameters are invalid for this generator"
        )
    return phi


def gen_normal(spec: ScenarioSpec, rng: np.random.Generator) -> Dataset:
    """Normal responses with mean from the identity link, variance phi."""
    x, z = gen_covariates(spec.n, rng)
    mu = _predictor(spec.beta, x)
    phi = np.exp(_predictor(spec.gamma, z))
    y = rng.normal(mu, np.sqrt(phi))
    return _dataset(x, z, y)


def gen_beta_binomial(spec: ScenarioSpec, rng: np.random.Generator) -> Dataset:
    """Beta-Binomial counts with E(Y) = m lambda, Var = phi V(mu).

    The Beta parameters are solved from lambda = expit(eta) and
    delta = (phi - 1)/(m - 1); the response is Binomial(m, pi) with
    pi ~ Beta(a, b).
    """
    m = spec.binomial_index
    x, z = gen_covariates(spec.n, rng)
    lam = _expit(_predictor(spec.beta, x))
    phi = _phi_values(spec, z, upper=float(m))
    delta = (phi - 1.0) / (m - 1.0)
    ab = 1.0 / delta - 1.0
    pi = rng.beta(lam * ab, (1.0 - lam) * ab)
    y = rng.binomial(m, np.clip(pi, 0.0, 1.0))
    return _dataset(x, z, y, m=m)


def gen_compound_poisson(spec: ScenarioSpec, rng: np.random.Generator) -> Dataset:
    """Poisson-stopped Poisson sums with E(Y) = mu, Var = phi mu.

    Y is the sum of N i.i.d. Poisson(rho) terms with N ~ Poisson(mu/rho)
    and rho = phi - 1.
    """
    x, z = gen_covariates(spec.n, rng)
    mu = np.exp(_predictor(spec.beta, x))
    phi = _phi_values(spec, z, upper=None)
    rho = phi - 1.0
    counts = rng.poisson(mu / rho)
    y = rng.poisson(counts * rho)
    return _dataset(x, z, y)


def _expit(eta):
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


_GENERATORS = {
    Distribution.NORMAL: gen_normal,
    Distribution.BINOMIAL: gen_beta_binomial,
    Distribution.POISSON: gen_compound_poisson,
}


def generate_dataset(spec: ScenarioSpec, rng: np.random.Generator) -> Dataset:
    return _GENERATORS[spec.distribution](spec, rng)


# ---------------------------------------------------------------------------
# classification and the harness
# ---------------------------------------------------------------------------


def classify_model(selected, truth) -> Classification:
    """Compare selected terms to the true active set, intercept excluded."""
    sel = frozenset(selected) - {"1"}
    tru = frozenset(truth) - {"1"}
    if sel == tru:
        return Classification.OPTIMAL
    if sel > tru:
        return Classification.TYPE2
    return Classification.TYPE1


def _replication_rng(seed: int, rep: int) -> np.random.Generator:
    # counter-based substream: one root seed, replication index as the key
    return np.random.default_rng([seed, rep])


def _run_replication(spec: ScenarioSpec, rep: int):
    rng = _replication_rng(spec.seed, rep)
    try:
        data = generate_dataset(spec, rng)
        trace = select_joint_alg2(
            data,
            MEAN_POOL,
            DISP_POOL,
            spec.criterion_mean,
            spec.criterion_disp,
            spec.alpha,
            mean_family=spec.mean_family,
            refit=False,
        )
    except JmmdError:
        return None
    mean_cls = classify_model(trace.final_spec.mean_terms, spec.mean_truth)
    disp_cls = classify_model(trace.final_spec.disp_terms, spec.disp_truth)
    return mean_cls, disp_cls


def _run_block(args):
    spec, reps = args
    counts = {
        "mean": {c: 0 for c in Classification},
        "dispersion": {c: 0 for c in Classification},
        "failed": 0,
    }
    for rep in reps:
        out = _run_replication(spec, rep)
        if out is None:
            counts["failed"] += 1
            continue
        counts["mean"][out[0]] += 1
        counts["dispersion"][out[1]] += 1
    return counts


def run_monte_carlo(spec: ScenarioSpec, threads: int = 1) -> McReport:
    """Generate, select and classify ``spec.replications`` times.

    Replications whose generation or selection fails are excluded from
    the percentages and counted in ``failed``.  Results are identical for
    any ``threads`` value thanks to per-replication substreams.
    """
    if spec.replications < 1:
        raise DomainError("need at least one replication")
    reps = list(range(spec.replications))
    if threads > 1:
        blocks = [reps[i::threads] for i in range(threads)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_block, [(spec, b) for b in blocks]))
    else:
        results = [_run_block((spec, reps))]

    merged = {
        "mean": {c: 0 for c in Classification},
        "dispersion": {c: 0 for c in Classification},
        "failed": 0,
    }
    for res in results:
        merged["failed"] += res["failed"]
        for side in ("mean", "dispersion"):
            for c in Classification:
                merged[side][c] += res[side][c]

    used = spec.replications - merged["failed"]
    def pct(side):
        if used == 0:
            return {c.value: float("nan") for c in Classification}
        return {c.value: 100.0 * merged[side][c] / used for c in Classification}

    return McReport(
        mean=pct("mean"),
        dispersion=pct("dispersion"),
        replications=spec.replications,
        failed=merged["failed"],
        scenario=spec,
    )


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

_SCENARIO_KEYS = {
    "distribution", "beta", "gamma", "n", "reps", "mean_criterion",
    "disp_criterion", "seed", "m", "k", "alpha", "clamp",
}


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse the plain-text key = value scenario format."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"scenario line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        if key not in _SCENARIO_KEYS:
            raise DomainError(f"scenario line {lineno}: unknown key {key!r}")
        values[key] = val.strip()

    required = {"distribution", "beta", "gamma", "n", "reps", "seed"}
    missing = required - values.keys()
    if missing:
        raise DomainError(f"scenario file missing keys: {sorted(missing)}")

    def vector(key):
        return tuple(float(v) for v in values[key].replace(",", " ").split())

    return ScenarioSpec(
        distribution=Distribution(values["distribution"].lower()),
        beta=vector("beta"),
        gamma=vector("gamma"),
        n=int(values["n"]),
        replications=int(values["reps"]),
        criterion_mean=MeanCriterion(values.get("mean_criterion", "r2-sqrt")),
        criterion_disp=DispCriterion(values.get("disp_criterion", "aicc")),
        seed=int(values["seed"]),
        binomial_index=int(values.get("m", 10)),
        cluster_size=int(values.get("k", 5)),
        alpha=float(values.get("alpha", 0.10)),
        clamp_dispersion=values.get("clamp", "on").lower() in ("on", "1", "true", "yes"),
    )


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "distribution": spec.distribution.value,
        "beta": list(spec.beta),
        "gamma": list(spec.gamma),
        "n": spec.n,
        "replications": spec.replications,
        "mean_criterion": spec.criterion_mean.value,
        "disp_criterion": spec.criterion_disp.value,
        "seed": spec.seed,
        "binomial_index": spec.binomial_index,
        "cluster_size": spec.cluster_size,
        "alpha": spec.alpha,
        "clamp_dispersion": spec.clamp_dispersion,
    }


def report_text(report: McReport) -> str:
    """Fixed-width classification table, one row per sub-model."""
    lines = [f"{'model':<12}{'criterion':<10}{'optimal':>9}{'type2':>8}{'type1':>8}"]
    spec = report.scenario
    for side, label, crit in (
        (report.mean, "mean", spec.criterion_mean.value if spec else ""),
        (report.dispersion, "dispersion", spec.criterion_disp.value if spec else ""),
    ):
        lines.append(
            f"{label:<12}{crit:<10}"
            f"{side['optimal']:>9.1f}{side['type2']:>8.1f}{side['type1']:>8.1f}"
        )
    lines.append(f"replications: {report.replications}  failed: {report.failed}")
    return "\n".join(lines)
