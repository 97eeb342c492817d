"""Shrinkage factors: oracle, two-parameter q-shape paths and the efficient path."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special, stats

from .const import (
    CHISQ_REFERENCE_LEVEL,
    DEFAULT_QMAX,
    DEFAULT_QMIN,
    DEFAULT_QSTEP,
    DEFAULT_STEPS_PER_UNIT,
    FIXED_Q_SHAPES,
    PERFECT_FIT_TOLERANCE,
    PathKind,
)
from .design import ComponentSummary, SpectralDecomposition
from .exceptions import NoSignalError, PerfectFitError, ShrinkageError

_LOGGER = logging.getLogger(__name__)

# Slack allowed on [0, 1] and [0, p] before an argument is rejected.
_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class DeltaVector:
    """A point on a shrinkage path: one factor per uncorrelated component."""

    deltas: np.ndarray
    m: float

    @classmethod
    def from_deltas(cls, deltas: np.ndarray) -> DeltaVector:
        m_extent(deltas)
        deltas = np.clip(np.asarray(deltas, dtype=float), 0.0, 1.0)
        deltas.setflags(write=False)
        return cls(deltas=deltas, m=m_extent(deltas))

    @classmethod
    def identity(cls, p: int) -> DeltaVector:
        """The OLS start of every path."""
        return cls.from_deltas(np.ones(p))

    @property
    def p(self) -> int:
        return len(self.deltas)


@dataclass(frozen=True)
class MLComponentFit:
    """Componentwise maximum likelihood estimate of the MSE-optimal factors."""

    delta_ml: np.ndarray
    gamma_ml: np.ndarray
    m_knot: float


@dataclass(frozen=True)
class RestrictedFit:
    """Maximum likelihood k for one q-Shape of the two-parameter family."""

    q: float
    crl: float
    nu_hat: float
    u2_min: float
    sigma2_hat: float
    k_hat: float
    m_hat: float
    chisq: float


@dataclass(frozen=True)
class QMSolution:
    """Best q-Shape and k-extent over a grid of q values."""

    q_star: float
    k_star: float
    m_star: float
    crl_star: float
    sigma2_hat: float
    nu_hat: float
    chisq: float
    df: int
    chisq_crit99: float | None
    p_value: float | None
    qgrid_evals: list[RestrictedFit]


@dataclass(frozen=True)
class PathSpec:
    """Which shrinkage path to follow and how finely to sample it in m.

    For the qm kind a q of None means the q-Shape is searched over
    qmin..qmax in steps of qstep.
    """

    kind: PathKind
    q: float | None = None
    grid_steps_per_unit_m: int = DEFAULT_STEPS_PER_UNIT
    qmin: float = DEFAULT_QMIN
    qmax: float = DEFAULT_QMAX
    qstep: float = DEFAULT_QSTEP

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PathKind(self.kind))

        if self.grid_steps_per_unit_m < 1:
            raise ShrinkageError("at least one grid step per unit of m is required")

        if self.kind in FIXED_Q_SHAPES:
            object.__setattr__(self, "q", FIXED_Q_SHAPES[self.kind])

    @property
    def name(self) -> str:
        if self.kind == PathKind.QM and self.q is not None:
            return f"qm(q={self.q:g})"
        return self.kind.name.lower()


def delta_mse_oracle(gamma_i: float, lambda_i: float, sigma: float) -> float:
    """The factor minimizing the MSE of delta * c_i for known gamma_i and sigma."""

    if lambda_i <= 0:
        raise ShrinkageError("eigenvalue must be positive")

    if sigma == 0:
        if gamma_i == 0:
            raise ShrinkageError("optimal shrinkage undefined for sigma = 0 and gamma = 0")
        return 1.0

    phi2 = gamma_i**2 * lambda_i / sigma**2
    return phi2 / (phi2 + 1.0)


def oracle_risk(delta: float, gamma_i: float, lambda_i: float, sigma: float) -> float:
    """MSE of delta * c_i for a nonstochastic delta: variance plus squared bias."""
    return delta**2 * sigma**2 / lambda_i + (1.0 - delta) ** 2 * gamma_i**2


def grr_estimate(
    decomp: SpectralDecomposition, comps: ComponentSummary, delta: DeltaVector
) -> np.ndarray:
    """Generalized ridge coefficients G diag(delta) c, in standardized units."""
    return decomp.G @ (delta.deltas * comps.c)


def m_extent(deltas: np.ndarray) -> float:
    """Multicollinearity allowance: p minus the sum of the factors."""

    deltas = np.asarray(deltas, dtype=float)

    if np.any(deltas < -_BOUND_SLACK) or np.any(deltas > 1.0 + _BOUND_SLACK):
        raise ShrinkageError(f"shrinkage factors outside [0, 1]: {deltas}")

    return float(len(deltas) - deltas.sum())


def two_param_deltas(k: float, q: float, lambdas: np.ndarray) -> DeltaVector:
    """Factors 1 / (1 + k lambda^(q - 1)) of the (q, k) path family."""

    if k < 0:
        raise ShrinkageError(f"k must be non-negative, got {k}")

    lambdas = np.asarray(lambdas, dtype=float)

    if math.isinf(k):
        return DeltaVector.from_deltas(np.zeros(len(lambdas)))

    return DeltaVector.from_deltas(1.0 / (1.0 + k * lambdas ** (q - 1.0)))


def qm_path_deltas(m: float, q: float, lambdas: np.ndarray) -> DeltaVector:
    """The point of extent m on the path of q-Shape q."""

    lambdas = np.asarray(lambdas, dtype=float)
    p = len(lambdas)
    _check_extent(m, p)

    if m <= 0:
        return DeltaVector.identity(p)
    if m >= p:
        return DeltaVector.from_deltas(np.zeros(p))
    if q == 1.0:
        return DeltaVector.from_deltas(np.full(p, (p - m) / p))

    # 1 - delta_j = expit(log k + (q - 1) log lambda_j); solve sum = m in log k.
    offsets = (q - 1.0) * np.log(lambdas)

    def excess(log_k: float) -> float:
        return float(special.expit(log_k + offsets).sum()) - m

    low = -offsets.max() - 50.0
    high = -offsets.min() + 50.0
    log_k = optimize.brentq(excess, low, high, xtol=1e-14, rtol=4 * np.finfo(float).eps)

    return DeltaVector.from_deltas(special.expit(-(log_k + offsets)))


def crl(q: float, rho: np.ndarray, lambdas: np.ndarray) -> float:
    """Cosine between |rho| and lambda^((1 - q) / 2), the curlicue function."""

    rho = np.asarray(rho, dtype=float)

    if not np.any(rho):
        raise NoSignalError("all principal correlations are zero: terminus optimal")

    exponents = 0.5 * (1.0 - q) * np.log(lambdas)
    # Rescaling L leaves the cosine unchanged and keeps the powers finite.
    L = np.exp(exponents - exponents.max())
    cosine = np.abs(rho) @ L / np.sqrt((rho @ rho) * (L @ L))

    return float(min(cosine, 1.0))


def restricted_ml(
    q: float, comps: ComponentSummary, lambdas: np.ndarray, n: int
) -> RestrictedFit:
    """Maximum likelihood shrinkage along the path of q-Shape q."""

    R2 = comps.R2
    if R2 <= 0:
        raise NoSignalError("R-squared is zero: terminus optimal")

    lambdas = np.asarray(lambdas, dtype=float)
    L = lambdas ** (0.5 * (1.0 - q))
    sum_l2 = float(L @ L)

    cosine = crl(q, comps.rho, lambdas)
    fit_share = R2 * cosine**2

    nu_hat = math.sqrt(comps.yTy) * float(np.abs(comps.rho) @ L) / sum_l2
    u2_min = comps.yTy * (1.0 - fit_share)
    k_hat = sum_l2 * (1.0 - fit_share) / (n * fit_share)
    chisq = n * math.log1p(R2 * max(0.0, 1.0 - cosine**2) / (1.0 - R2))

    return RestrictedFit(
        q=q,
        crl=cosine,
        nu_hat=nu_hat,
        u2_min=u2_min,
        sigma2_hat=u2_min / n,
        k_hat=k_hat,
        m_hat=two_param_deltas(k_hat, q, lambdas).m,
        chisq=chisq,
    )


def q_grid(qmin: float, qmax: float, qstep: float) -> np.ndarray:
    """Evenly spaced q-Shapes from qmin up to qmax, both included when on-step."""

    if not qmin < qmax:
        raise ShrinkageError(f"qmin ({qmin}) must be below qmax ({qmax})")
    if qstep <= 0:
        raise ShrinkageError(f"qstep must be positive, got {qstep}")

    count = math.floor((qmax - qmin) / qstep + 1e-9) + 1
    return np.round(qmin + qstep * np.arange(count), 10)


def _solution(evals: list[RestrictedFit], p: int) -> QMSolution:
    # Largest CRL wins; ties go to the smallest |q|, then the smaller q.
    best = min(evals, key=lambda fit: (-round(fit.crl, 12), abs(fit.q), fit.q))
    df = p - 2 if p >= 3 else 0

    return QMSolution(
        q_star=best.q,
        k_star=best.k_hat,
        m_star=best.m_hat,
        crl_star=best.crl,
        sigma2_hat=best.sigma2_hat,
        nu_hat=best.nu_hat,
        chisq=best.chisq,
        df=df,
        chisq_crit99=float(stats.chi2.ppf(CHISQ_REFERENCE_LEVEL, df)) if df else None,
        p_value=float(stats.chi2.sf(best.chisq, df)) if df else None,
        qgrid_evals=evals,
    )


def qm_search(
    comps: ComponentSummary,
    decomp: SpectralDecomposition,
    n: int,
    qmin: float = DEFAULT_QMIN,
    qmax: float = DEFAULT_QMAX,
    qstep: float = DEFAULT_QSTEP,
) -> QMSolution:
    """Maximize CRL(q), and hence the restricted likelihood, over a q grid."""

    evals = [
        restricted_ml(float(q), comps, decomp.lambdas, n)
        for q in q_grid(qmin, qmax, qstep)
    ]

    for fit in evals:
        _LOGGER.debug(
            "q=%5.1f crl=%.6f k=%.6g m=%.4f chisq=%.4f",
            fit.q, fit.crl, fit.k_hat, fit.m_hat, fit.chisq,
        )

    return _solution(evals, len(decomp.lambdas))


def qm_fixed(
    q: float, comps: ComponentSummary, decomp: SpectralDecomposition, n: int
) -> QMSolution:
    """Maximum likelihood extent along a single, given q-Shape."""
    return _solution([restricted_ml(q, comps, decomp.lambdas, n)], len(decomp.lambdas))


def ml_components(comps: ComponentSummary, n: int) -> MLComponentFit:
    """Componentwise maximum likelihood factors and shrunken components."""

    if comps.R2 >= 1.0 - PERFECT_FIT_TOLERANCE:
        raise PerfectFitError("perfect fit: R-squared is 1")

    signal = n * comps.rho**2
    delta_ml = signal / (signal + (1.0 - comps.R2))

    return MLComponentFit(
        delta_ml=delta_ml,
        gamma_ml=delta_ml * comps.c,
        m_knot=float(len(delta_ml) - delta_ml.sum()),
    )


def efficient_path_deltas(m: float, fit: MLComponentFit) -> DeltaVector:
    """Two-piece linear factors: OLS to the ML knot, then on to the terminus."""

    p = len(fit.delta_ml)
    _check_extent(m, p)
    m = min(max(m, 0.0), float(p))
    m_knot = fit.m_knot

    if m <= m_knot and m_knot > 0:
        deltas = 1.0 - (m / m_knot) * (1.0 - fit.delta_ml)
    elif m_knot < p:
        deltas = fit.delta_ml * (p - m) / (p - m_knot)
    else:
        deltas = np.zeros(p)

    return DeltaVector.from_deltas(deltas)


def _check_extent(m: float, p: int) -> None:
    if m < -_BOUND_SLACK or m > p + _BOUND_SLACK:
        raise ShrinkageError(f"m = {m} outside [0, {p}]")
