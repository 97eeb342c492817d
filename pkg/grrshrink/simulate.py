"""Monte Carlo comparison of shrinkage estimators against OLS."""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import pandas as pd
import voluptuous as vol
from scipy import stats

from .config import validate_scenario
from .const import DEFAULT_QMAX, DEFAULT_QMIN, DEFAULT_QSTEP
from .design import Analysis, RawDataset, analyze, back_transform
from .exceptions import DataError, DesignError, GRRError, SimulationError
from .shrinkage import (
    DeltaVector,
    delta_mse_oracle,
    efficient_path_deltas,
    grr_estimate,
    ml_components,
    qm_fixed,
    qm_search,
    two_param_deltas,
)

_LOGGER = logging.getLogger(__name__)

ESTIMATORS = ["ols", "efficient_ml", "qm_ml", "uniform_ml", "oracle"]


@dataclass(frozen=True)
class Scenario:
    """A simulated design: predictor spectrum, true coefficients and noise."""

    p: int
    n: int
    spectrum: tuple[float, ...]
    sigma2: float
    orientation: str = "major_axis"
    beta: tuple[float, ...] | None = None
    target_r2: float | None = None
    beta_norm: float = 1.0
    replications: int = 1000
    seed: int = 0
    qmin: float = DEFAULT_QMIN
    qmax: float = DEFAULT_QMAX
    qstep: float = DEFAULT_QSTEP
    name: str = "scenario"

    def __post_init__(self) -> None:
        object.__setattr__(self, "spectrum", tuple(float(s) for s in self.spectrum))
        if self.beta is not None:
            object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))

        if len(self.spectrum) != self.p:
            raise DesignError("spectrum must hold p eigenvalues")
        if min(self.spectrum) <= 0:
            raise DesignError("spectrum must be positive")
        if self.p > self.n - 2:
            raise DesignError(f"p = {self.p} leaves no error degrees of freedom at n = {self.n}")
        if (self.orientation == "explicit") != (self.beta is not None):
            raise DesignError("beta is given exactly when orientation is explicit")

    @classmethod
    def from_dict(cls, data: dict) -> Scenario:
        """Validate a scenario definition and build it."""

        scenario = validate_scenario(data)
        beta = scenario.pop("beta")

        return cls(**scenario, beta=None if beta is None else tuple(beta))


@dataclass(frozen=True)
class ScenarioDesign:
    """Fixed predictors shared by every replicate of a scenario."""

    X: np.ndarray
    G: np.ndarray
    lambdas: np.ndarray
    beta: np.ndarray


@dataclass(frozen=True)
class EstimatorRisk:
    """Summed squared coefficient error of one estimator, averaged over replicates."""

    name: str
    mse: float
    mse_se: float
    ratio: float
    ratio_se: float


@dataclass(frozen=True)
class RiskReport:
    scenario: Scenario
    estimators: list[EstimatorRisk]
    ols_theory: float
    selected_q: dict[float, int] = field(default_factory=dict)
    # Raw-unit coefficients, one (replications, p) array per estimator.
    estimates: dict[str, np.ndarray] = field(default_factory=dict)

    def estimator(self, name: str) -> EstimatorRisk:
        for risk in self.estimators:
            if risk.name == name:
                return risk
        raise KeyError(name)


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario definition from a JSON file."""

    path = Path(path)
    if not path.is_file():
        raise DataError(f"scenario file {path} does not exist")

    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise DataError(f"scenario file {path} is not valid JSON: {err}") from err

    if not isinstance(data, dict):
        raise vol.MultipleInvalid([vol.Invalid("scenario must be a JSON object")])

    return Scenario.from_dict(data)


def _stream(seed: int, index: int) -> np.random.Generator:
    # Stream 0 draws the design; replicate i draws its noise from stream i + 1.
    bit_generator = np.random.Philox(key=seed)
    if index:
        bit_generator = bit_generator.jumped(index)
    return np.random.Generator(bit_generator)


@lru_cache(maxsize=16)
def _predictors(scenario: Scenario) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Predictors whose X'X has eigenvalues (n - 1) times the rescaled spectrum."""

    p, n = scenario.p, scenario.n
    rng = _stream(scenario.seed, 0)

    spectrum = np.sort(np.asarray(scenario.spectrum))[::-1]
    if not math.isclose(spectrum.sum(), p, rel_tol=1e-9):
        _LOGGER.warning(
            "Scenario %s: spectrum sums to %g, rescaling it to sum to p = %i",
            scenario.name,
            spectrum.sum(),
            p,
        )
    spectrum = spectrum * p / spectrum.sum()

    if p == 1:
        G = np.ones((1, 1))
    else:
        correlation = stats.random_correlation.rvs(spectrum, random_state=rng)
        _, vectors = np.linalg.eigh(correlation)
        G = vectors[:, ::-1].copy()

    noise = rng.standard_normal((n, p))
    H, _ = np.linalg.qr(noise - noise.mean(axis=0))

    lambdas = (n - 1) * spectrum
    X = H @ np.diag(np.sqrt(lambdas)) @ G.T

    for array in (X, G, lambdas):
        array.setflags(write=False)

    return X, G, lambdas


def true_beta(scenario: Scenario) -> np.ndarray:
    """Coefficients along the requested axis, sized by norm or target R-squared."""

    X, G, _ = _predictors(scenario)

    if scenario.orientation == "explicit":
        direction = np.asarray(scenario.beta, dtype=float)
    elif scenario.orientation == "major_axis":
        direction = G[:, 0]
    else:
        direction = G[:, -1]

    if scenario.target_r2 is None:
        if scenario.orientation == "explicit":
            return direction.copy()
        return scenario.beta_norm * direction

    fitted = X @ direction
    signal = float(fitted @ fitted)
    if signal == 0:
        raise DesignError("a zero coefficient vector cannot reach a target R-squared")

    r2 = scenario.target_r2
    wanted = r2 * (scenario.n - 1) * scenario.sigma2 / (1.0 - r2)

    return math.sqrt(wanted / signal) * direction


@lru_cache(maxsize=16)
def scenario_design(scenario: Scenario) -> ScenarioDesign:
    """Fixed predictors and true coefficients of a scenario, built once."""

    X, G, lambdas = _predictors(scenario)
    beta = true_beta(scenario)
    beta.setflags(write=False)

    _LOGGER.debug("Scenario %s: lambdas=%s beta=%s", scenario.name, lambdas, beta)

    return ScenarioDesign(X=X, G=G, lambdas=lambdas, beta=beta)


def generate(scenario: Scenario, replicate_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Predictors and one reproducible response draw for a replicate."""

    design = scenario_design(scenario)
    rng = _stream(scenario.seed, replicate_index + 1)

    noise = rng.standard_normal(scenario.n)
    y = design.X @ design.beta + math.sqrt(scenario.sigma2) * noise

    return design.X, y


def _oracle_deltas(analysis: Analysis, beta: np.ndarray, sigma: float) -> DeltaVector:
    # Components of the true coefficients in the standardized predictor units.
    gamma = analysis.decomp.G.T @ (beta * analysis.design.x_scales)

    return DeltaVector.from_deltas(
        np.array(
            [
                delta_mse_oracle(g, lam, sigma)
                for g, lam in zip(gamma, analysis.decomp.lambdas)
            ]
        )
    )


def _estimates(
    analysis: Analysis, scenario: Scenario, beta: np.ndarray
) -> tuple[dict[str, np.ndarray], float]:
    """Raw-unit coefficients of every estimator and the q-Shape picked by qm."""

    decomp, comps, n = analysis.decomp, analysis.comps, analysis.n
    qm = qm_search(comps, decomp, n, scenario.qmin, scenario.qmax, scenario.qstep)
    uniform = qm_fixed(1.0, comps, decomp, n)
    ml_fit = ml_components(comps, n)

    deltas = {
        "ols": DeltaVector.identity(analysis.p),
        "efficient_ml": efficient_path_deltas(ml_fit.m_knot, ml_fit),
        "qm_ml": two_param_deltas(qm.k_star, qm.q_star, decomp.lambdas),
        "uniform_ml": two_param_deltas(uniform.k_star, 1.0, decomp.lambdas),
        "oracle": _oracle_deltas(analysis, beta, math.sqrt(scenario.sigma2)),
    }

    estimates = {
        name: back_transform(grr_estimate(decomp, comps, delta), analysis.design)[0]
        for name, delta in deltas.items()
    }

    return estimates, qm.q_star


def _ratio_se(losses: np.ndarray, ols: np.ndarray) -> float:
    """Delta-method standard error of mean(losses) / mean(ols) for paired draws."""

    count = len(losses)
    if count < 2:
        return 0.0

    ratio = losses.mean() / ols.mean()
    covariance = np.cov(losses, ols)
    variance = (
        covariance[0, 0] - 2.0 * ratio * covariance[0, 1] + ratio**2 * covariance[1, 1]
    ) / (count * ols.mean() ** 2)

    return float(math.sqrt(max(variance, 0.0)))


def run_mc(scenario: Scenario) -> RiskReport:
    """Replicate the scenario and summarize each estimator's squared error."""

    design = scenario_design(scenario)
    count = scenario.replications
    losses = {name: np.empty(count) for name in ESTIMATORS}
    coefficients = {name: np.empty((count, scenario.p)) for name in ESTIMATORS}
    selected: Counter[float] = Counter()

    for index in range(count):
        X, y = generate(scenario, index)

        try:
            analysis = analyze(RawDataset.from_arrays(X, y))
            estimates, q_star = _estimates(analysis, scenario, design.beta)
        except GRRError as err:
            raise SimulationError(index, str(err)) from err

        for name, estimate in estimates.items():
            losses[name][index] = float(np.sum((estimate - design.beta) ** 2))
            coefficients[name][index] = estimate
        selected[q_star] += 1

    ols = losses["ols"]
    ols_mse = float(ols.mean())
    estimators = []

    for name in ESTIMATORS:
        mse = float(losses[name].mean())
        mse_se = float(losses[name].std(ddof=1) / math.sqrt(count)) if count > 1 else 0.0
        estimators.append(
            EstimatorRisk(
                name=name,
                mse=mse,
                mse_se=mse_se,
                ratio=mse / ols_mse if ols_mse > 0 else math.nan,
                ratio_se=_ratio_se(losses[name], ols) if ols_mse > 0 else math.nan,
            )
        )

    ols_theory = scenario.sigma2 * float(np.sum(1.0 / design.lambdas))

    _LOGGER.info(
        "Scenario %s: %i replicates, OLS MSE %.6g (theory %.6g)",
        scenario.name,
        count,
        ols_mse,
        ols_theory,
    )

    return RiskReport(
        scenario=scenario,
        estimators=estimators,
        ols_theory=ols_theory,
        selected_q=dict(sorted(selected.items())),
        estimates=coefficients,
    )


def report_frame(report: RiskReport) -> pd.DataFrame:
    """One row per estimator."""
    return pd.DataFrame([asdict(risk) for risk in report.estimators])


def scatter_frame(report: RiskReport) -> pd.DataFrame:
    """Every replicate's raw-unit coefficients, one row per replicate and estimator."""

    columns = [f"beta_{j + 1}" for j in range(report.scenario.p)]
    frame = pd.concat(
        [
            pd.DataFrame(report.estimates[name], columns=columns)
            .rename_axis("replicate")
            .reset_index()
            .assign(estimator=name)
            for name in ESTIMATORS
        ],
        ignore_index=True,
    )

    return frame.sort_values("replicate", kind="stable", ignore_index=True)[
        ["replicate", "estimator", *columns]
    ]


def report_dict(report: RiskReport) -> dict:
    return {
        "scenario": asdict(report.scenario),
        "estimators": [asdict(risk) for risk in report.estimators],
        "ols_theory": report.ols_theory,
        "selected_q": {f"{q:g}": count for q, count in report.selected_q.items()},
    }


def write_report(
    report: RiskReport, out_dir: str | Path, formats: tuple[str, ...] = ("csv", "json")
) -> list[Path]:
    """Write risk.csv, scatter.csv and/or risk.json into out_dir and return what was written."""

    out_dir = Path(out_dir)
    written = []

    try:
        out_dir.mkdir(parents=True, exist_ok=True)

        if "csv" in formats:
            target = out_dir / "risk.csv"
            report_frame(report).to_csv(
                target, index=False, float_format="%.12g", lineterminator="\n"
            )
            written.append(target)

            target = out_dir / "scatter.csv"
            scatter_frame(report).to_csv(
                target, index=False, float_format="%.12g", lineterminator="\n"
            )
            written.append(target)

        if "json" in formats:
            target = out_dir / "risk.json"
            target.write_text(json.dumps(report_dict(report), indent=2, sort_keys=True) + "\n")
            written.append(target)
    except OSError as err:
        raise GRRError(f"cannot write the risk report to {out_dir}: {err}") from err

    return written
