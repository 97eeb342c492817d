"""Data ingestion, standardization and principal axis rotation."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .const import PERFECT_FIT_TOLERANCE, RANK_TOLERANCE
from .exceptions import DataError, DesignError, PerfectFitError

_LOGGER = logging.getLogger(__name__)


def _freeze(*arrays: np.ndarray) -> None:
    for array in arrays:
        array.setflags(write=False)


@dataclass(frozen=True)
class RawDataset:
    """Raw numeric columns, one of which is the response."""

    column_names: list[str]
    columns: list[np.ndarray]
    response_name: str

    def __post_init__(self) -> None:
        if len(self.column_names) != len(self.columns):
            raise DataError("column names and columns differ in number")

        if self.column_names.count(self.response_name) != 1:
            raise DataError(f'response column "{self.response_name}" not found')

        lengths = {len(column) for column in self.columns}
        if len(lengths) != 1:
            raise DataError("columns have different lengths")

        if lengths.pop() < 2:
            raise DataError("at least two rows are required")

        for name, column in zip(self.column_names, self.columns):
            if not np.all(np.isfinite(column)):
                raise DataError(f'column "{name}" holds non-finite values')

    @classmethod
    def from_arrays(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        predictor_names: list[str] | None = None,
        response_name: str = "y",
    ) -> RawDataset:
        """Build a dataset from a predictor matrix and a response vector."""

        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, np.newaxis]

        names = predictor_names or [f"x{j + 1}" for j in range(X.shape[1])]
        columns = [X[:, j].copy() for j in range(X.shape[1])]

        return cls(
            column_names=[*names, response_name],
            columns=[*columns, np.asarray(y, dtype=float).copy()],
            response_name=response_name,
        )

    @property
    def n(self) -> int:
        return len(self.columns[0])

    @property
    def predictor_names(self) -> list[str]:
        return [name for name in self.column_names if name != self.response_name]

    @property
    def X(self) -> np.ndarray:
        return np.column_stack(
            [
                column
                for name, column in zip(self.column_names, self.columns)
                if name != self.response_name
            ]
        )

    @property
    def y(self) -> np.ndarray:
        return self.columns[self.column_names.index(self.response_name)]


@dataclass(frozen=True)
class StandardizedDesign:
    """Centered and rescaled predictors plus the constants to undo it.

    Each column of X has sum of squares n - 1, so X'X is n - 1 times the
    sample correlation matrix of the predictors.
    """

    X: np.ndarray
    y: np.ndarray
    n: int
    p: int
    x_means: np.ndarray
    x_scales: np.ndarray
    y_mean: float
    y_scale: float
    standardize_y: bool
    predictor_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        _freeze(self.X, self.y, self.x_means, self.x_scales)


@dataclass(frozen=True)
class SpectralDecomposition:
    """X = H diag(lambdas)^(1/2) G' with non-increasing eigenvalues."""

    lambdas: np.ndarray
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self) -> None:
        _freeze(self.lambdas, self.G, self.H)


@dataclass(frozen=True)
class ComponentSummary:
    """Uncorrelated components of the OLS fit and their test statistics."""

    c: np.ndarray
    rho: np.ndarray
    R2: float
    s2: float
    F: np.ndarray
    tau: np.ndarray
    noncentrality_hat: np.ndarray
    yTy: float
    dfe: int

    def __post_init__(self) -> None:
        _freeze(self.c, self.rho, self.F, self.tau, self.noncentrality_hat)


@dataclass(frozen=True)
class Analysis:
    """A dataset taken through standardize, spectral and components."""

    design: StandardizedDesign
    decomp: SpectralDecomposition
    comps: ComponentSummary

    @property
    def n(self) -> int:
        return self.design.n

    @property
    def p(self) -> int:
        return self.design.p

    @property
    def ols(self) -> np.ndarray:
        """OLS coefficients in standardized units."""
        return self.decomp.G @ self.comps.c


def _check_row_widths(path: Path, width: int) -> None:
    """Every non-blank row must have as many fields as the header."""

    with path.open(newline="") as handle:
        rows = [row for row in csv.reader(handle, skipinitialspace=True) if row]

    for number, row in enumerate(rows[1:], start=1):
        if len(row) != width:
            raise DataError(
                f"ragged rows in {path}: row {number} has {len(row)} fields, expected {width}"
            )


def load_csv(path: str | Path, response: str | None = None) -> RawDataset:
    """Read a headered, comma separated file of numbers.

    Without a response name the last column is the response.
    """

    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file {path} does not exist")

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as err:
        raise DataError(f"ragged rows in {path}: {err}") from err
    except pd.errors.EmptyDataError as err:
        raise DataError(f"{path} is empty") from err

    _check_row_widths(path, len(frame.columns))

    if response is None:
        response = str(frame.columns[-1])

    if response not in frame.columns:
        raise DataError(f'response column "{response}" not found in {path}')

    columns = []
    for name in frame.columns:
        values = np.empty(len(frame))
        for row, cell in enumerate(frame[name]):
            if not cell.strip():
                raise DataError(f'blank cell at row {row + 1}, column "{name}"')
            try:
                values[row] = float(cell)
            except ValueError:
                raise DataError(
                    f'non-numeric cell "{cell}" at row {row + 1}, column "{name}"'
                ) from None
        columns.append(values)

    _LOGGER.debug("Loaded %s: %i rows, %i columns", path, len(frame), len(columns))

    return RawDataset(
        column_names=[str(name) for name in frame.columns],
        columns=columns,
        response_name=response,
    )


def standardize(raw: RawDataset, standardize_y: bool = True) -> StandardizedDesign:
    """Center every column and rescale predictors to sum of squares n - 1."""

    X_raw = raw.X
    y_raw = raw.y
    n, p = X_raw.shape

    if p > n - 1:
        raise DesignError(f"p = {p} predictors exceed n - 1 = {n - 1}")

    for name, column in zip(raw.predictor_names, X_raw.T):
        if np.ptp(column) == 0:
            raise DesignError(f'predictor "{name}" has zero scale')

    if np.ptp(y_raw) == 0:
        raise DesignError(f'response "{raw.response_name}" has zero scale')

    x_means = X_raw.mean(axis=0)
    X = X_raw - x_means
    x_scales = np.sqrt((X**2).sum(axis=0) / (n - 1))
    X = X / x_scales

    y_mean = float(y_raw.mean())
    y = y_raw - y_mean
    y_scale = float(np.sqrt(y @ y / (n - 1))) if standardize_y else 1.0
    y = y / y_scale

    return StandardizedDesign(
        X=X,
        y=y,
        n=n,
        p=p,
        x_means=x_means,
        x_scales=x_scales,
        y_mean=y_mean,
        y_scale=y_scale,
        standardize_y=standardize_y,
        predictor_names=raw.predictor_names,
    )


def spectral(design: StandardizedDesign) -> SpectralDecomposition:
    """Singular value decomposition of the standardized predictors."""

    H, singular, Gt = np.linalg.svd(design.X, full_matrices=False)

    if singular[-1] < RANK_TOLERANCE * singular[0]:
        raise DesignError("X not full column rank")

    G = Gt.T.copy()
    H = H.copy()

    # Singular vectors are only defined up to sign: make the largest entry
    # (first one on ties) of every principal axis positive.
    pivots = np.argmax(np.abs(G), axis=0)
    signs = np.where(G[pivots, np.arange(G.shape[1])] < 0, -1.0, 1.0)
    G *= signs
    H *= signs

    return SpectralDecomposition(lambdas=singular**2, G=G, H=H)


def components(
    decomp: SpectralDecomposition, design: StandardizedDesign
) -> ComponentSummary:
    """Principal correlations, uncorrelated components and their statistics."""

    n, p = design.n, design.p
    dfe = n - p - 1

    if dfe < 1:
        raise DesignError(f"no degrees of freedom for error (n - p - 1 = {dfe})")

    yTy = float(design.y @ design.y)
    rho = decomp.H.T @ design.y / np.sqrt(yTy)
    R2 = float(rho @ rho)

    if R2 >= 1.0 - PERFECT_FIT_TOLERANCE:
        raise PerfectFitError("perfect fit: R-squared is 1")

    c = rho * np.sqrt(yTy / decomp.lambdas)
    tau = rho * np.sqrt(dfe / (1.0 - R2))

    return ComponentSummary(
        c=c,
        rho=rho,
        R2=R2,
        s2=yTy * (1.0 - R2) / dfe,
        F=tau**2,
        tau=tau,
        noncentrality_hat=n * rho**2 / (1.0 - R2),
        yTy=yTy,
        dfe=dfe,
    )


def back_transform(
    beta_std: np.ndarray, design: StandardizedDesign
) -> tuple[np.ndarray, float]:
    """Coefficients and intercept in the units of the raw data."""

    beta_raw = np.asarray(beta_std, dtype=float) * design.y_scale / design.x_scales
    intercept = design.y_mean - float(design.x_means @ beta_raw)

    return beta_raw, intercept


def analyze(raw: RawDataset, standardize_y: bool = True) -> Analysis:
    """Standardize, decompose and summarize a dataset in one go."""

    design = standardize(raw, standardize_y)
    decomp = spectral(design)
    comps = components(decomp, design)

    _LOGGER.debug(
        "n=%i p=%i R2=%.6f lambdas=%s", design.n, design.p, comps.R2, decomp.lambdas
    )

    return Analysis(design=design, decomp=decomp, comps=comps)
