"""Relative MSE risk of shrunken components and inferior directions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .const import INFERIOR_TOLERANCE
from .design import ComponentSummary
from .exceptions import RiskUnavailableError
from .shrinkage import DeltaVector


@dataclass(frozen=True)
class RelativeRisk:
    """Unbiased estimate of MSE(delta * c) / sigma^2 in component coordinates.

    `T_hat` is kept as estimated. Only the reported diagonal is clamped below
    by the known scaled variance delta^2 / lambda.
    """

    T_hat: np.ndarray
    diag_clamped: np.ndarray
    variance_floor: np.ndarray
    clamped_flags: np.ndarray


@dataclass(frozen=True)
class InferiorDirection:
    """Direction in beta-space along which shrinkage is riskier than OLS."""

    present: bool
    direction: np.ndarray | None
    excess: float


def relative_mse(
    delta: DeltaVector, comps: ComponentSummary, lambdas: np.ndarray, n: int
) -> RelativeRisk:
    """Relative MSE matrix of the shrunken components and its correct-range diagonal."""

    lambdas = np.asarray(lambdas, dtype=float)
    p = len(lambdas)

    if p > n - 4:
        raise RiskUnavailableError(f"relative risk needs p <= n - 4 (p = {p}, n = {n})")

    d = delta.deltas
    bias = (1.0 - d) * comps.tau / np.sqrt(lambdas)

    T_hat = (n - p - 3) / (n - p - 1) * np.outer(bias, bias)
    T_hat[np.diag_indices(p)] += (2.0 * d - 1.0) / lambdas

    floor = d**2 / lambdas
    diagonal = np.diag(T_hat)

    return RelativeRisk(
        T_hat=T_hat,
        diag_clamped=np.maximum(diagonal, floor),
        variance_floor=floor,
        clamped_flags=diagonal < floor,
    )


def beta_relative_mse(risk: RelativeRisk, G: np.ndarray) -> np.ndarray:
    """Diagonal of G diag(clamped risks) G', one value per coefficient."""
    return (G**2) @ risk.diag_clamped


def inferior_direction(
    delta: DeltaVector, risk: RelativeRisk, lambdas: np.ndarray, G: np.ndarray
) -> InferiorDirection:
    """Most negative eigen-direction of (OLS risk - shrunken risk)."""

    if delta.p != risk.T_hat.shape[0]:
        raise RiskUnavailableError("risk was estimated for a different number of factors")

    difference = np.diag(1.0 / np.asarray(lambdas, dtype=float)) - risk.T_hat
    values, vectors = np.linalg.eigh(0.5 * (difference + difference.T))

    if values[0] >= -INFERIOR_TOLERANCE:
        return InferiorDirection(present=False, direction=None, excess=0.0)

    direction = G @ vectors[:, 0]
    direction /= np.linalg.norm(direction)

    if direction[np.argmax(np.abs(direction))] < 0:
        direction = -direction

    return InferiorDirection(present=True, direction=direction, excess=float(values[0]))
