"""TRACE diagnostics along a shrinkage path, with CSV, SVG and JSON output."""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from .const import (
    CSV_SIGNIFICANT_DIGITS,
    DOMAIN,
    RISK_OK,
    RISK_UNAVAILABLE,
    TRACE_LABELS,
    PathKind,
    TraceKind,
)
from .design import (
    Analysis,
    ComponentSummary,
    SpectralDecomposition,
    StandardizedDesign,
    back_transform,
)
from .exceptions import TraceError
from .risk import beta_relative_mse, inferior_direction, relative_mse
from .shrinkage import (
    DeltaVector,
    MLComponentFit,
    PathSpec,
    QMSolution,
    efficient_path_deltas,
    grr_estimate,
    ml_components,
    qm_fixed,
    qm_path_deltas,
    qm_search,
)

_LOGGER = logging.getLogger(__name__)

PALETTE = ["black", "red", "green", "blue", "cyan", "magenta", "orange", "gray"]
LINESTYLES = ["-", "--", ":", "-."]

# Traces that are plotted per principal axis rather than per coefficient.
_COMPONENT_TRACES = (TraceKind.SPAT, TraceKind.EXEV)
RISK_TRACES = (TraceKind.RMSE, TraceKind.EXEV, TraceKind.INFD)


@dataclass(frozen=True)
class ResolvedPath:
    """A path with its maximum likelihood point located."""

    spec: PathSpec
    deltas_at: Callable[[float], DeltaVector]
    m_ml: float
    summary: QMSolution | MLComponentFit
    q: float | None


@dataclass(frozen=True)
class TraceTable:
    """Every trace series of one path, one row per m grid point."""

    path: PathSpec
    m_grid: np.ndarray
    coef: np.ndarray
    rmse: np.ndarray
    spat: np.ndarray
    exev: np.ndarray
    infd: np.ndarray
    profile: np.ndarray
    m_ml: float
    summary: QMSolution | MLComponentFit
    risk_status: str
    predictor_names: list[str]

    @property
    def p(self) -> int:
        return self.coef.shape[1]

    @property
    def ml_row(self) -> int:
        """Index of the grid row at the maximum likelihood extent."""
        return int(np.argmin(np.abs(self.m_grid - self.m_ml)))


def resolve_path(
    comps: ComponentSummary, decomp: SpectralDecomposition, n: int, path: PathSpec
) -> ResolvedPath:
    """Locate the maximum likelihood point of a path and its delta(m) function."""

    lambdas = decomp.lambdas

    if path.kind == PathKind.EFFICIENT:
        fit = ml_components(comps, n)
        return ResolvedPath(
            spec=path,
            deltas_at=lambda m: efficient_path_deltas(m, fit),
            m_ml=fit.m_knot,
            summary=fit,
            q=None,
        )

    if path.q is None:
        solution = qm_search(comps, decomp, n, path.qmin, path.qmax, path.qstep)
    else:
        solution = qm_fixed(path.q, comps, decomp, n)

    q = solution.q_star

    return ResolvedPath(
        spec=path,
        deltas_at=lambda m: qm_path_deltas(m, q, lambdas),
        m_ml=solution.m_star,
        summary=solution,
        q=q,
    )


def m_grid(p: int, steps_per_unit: int, extra: tuple[float, ...] = ()) -> np.ndarray:
    """Points j / steps_per_unit from 0 to p, plus any extra points in range."""

    grid = np.arange(p * steps_per_unit + 1) / steps_per_unit

    for point in extra:
        if 0 <= point <= p and np.min(np.abs(grid - point)) > 1e-12:
            grid = np.sort(np.append(grid, point))

    return grid


def minus2_log_lr(delta: DeltaVector, comps: ComponentSummary, n: int) -> float:
    """-2 log likelihood ratio that delta holds the MSE-optimal factors.

    Each gamma_i is taken as +-sigma sqrt(delta_i / [lambda_i (1 - delta_i)])
    with the sign of rho_i, sigma is profiled out in closed form, and the
    result is compared with the unrestricted (OLS) maximum.
    """

    d = delta.deltas
    if np.any(d >= 1.0):
        return math.inf

    odds = d / (1.0 - d)
    yTy, R2 = comps.yTy, comps.R2

    slope = math.sqrt(yTy) * float(np.abs(comps.rho) @ np.sqrt(odds))
    # t = 1 / sigma solves yTy t^2 - slope t - n = 0.
    t = (slope + math.sqrt(slope**2 + 4.0 * yTy * n)) / (2.0 * yTy)

    restricted = -2.0 * n * math.log(t) + yTy * t**2 - 2.0 * slope * t + float(odds.sum())
    unrestricted = n * math.log(yTy * (1.0 - R2) / n) + n

    return max(0.0, restricted - unrestricted)


def likelihood_profile(
    comps: ComponentSummary,
    decomp: SpectralDecomposition,
    n: int,
    path: PathSpec,
    grid: np.ndarray | None = None,
) -> list[tuple[float, float]]:
    """-2 log LR along a path; the m = 0 (OLS) end is reported as +inf."""

    resolved = resolve_path(comps, decomp, n, path)

    if grid is None:
        grid = m_grid(len(decomp.lambdas), path.grid_steps_per_unit_m, (resolved.m_ml,))

    return [(float(m), minus2_log_lr(resolved.deltas_at(m), comps, n)) for m in grid]


def build_trace(
    design: StandardizedDesign,
    decomp: SpectralDecomposition,
    comps: ComponentSummary,
    path: PathSpec,
) -> TraceTable:
    """Evaluate every trace series over the m grid of a path."""

    n, p = design.n, design.p
    resolved = resolve_path(comps, decomp, n, path)
    grid = m_grid(p, path.grid_steps_per_unit_m, (resolved.m_ml,))

    risk_status = RISK_OK if p <= n - 4 else RISK_UNAVAILABLE
    if risk_status != RISK_OK:
        _LOGGER.warning("Risk traces disabled: p = %i exceeds n - 4 = %i", p, n - 4)

    rows = len(grid)
    coef, spat = np.zeros((rows, p)), np.zeros((rows, p))
    rmse, exev, infd = (np.full((rows, p), np.nan) for _ in range(3))
    profile = np.zeros(rows)

    for row, m in enumerate(grid):
        delta = resolved.deltas_at(m)

        coef[row] = grr_estimate(decomp, comps, delta)
        spat[row] = delta.deltas
        profile[row] = minus2_log_lr(delta, comps, n)

        if risk_status != RISK_OK:
            continue

        risk = relative_mse(delta, comps, decomp.lambdas, n)
        rmse[row] = beta_relative_mse(risk, decomp.G)
        exev[row] = 1.0 / decomp.lambdas - risk.diag_clamped

        inferior = inferior_direction(delta, risk, decomp.lambdas, decomp.G)
        infd[row] = inferior.direction if inferior.present else 0.0

    _LOGGER.debug("%s trace: %i rows, m_ml=%.4f", path.name, rows, resolved.m_ml)

    return TraceTable(
        path=path,
        m_grid=grid,
        coef=coef,
        rmse=rmse,
        spat=spat,
        exev=exev,
        infd=infd,
        profile=profile,
        m_ml=resolved.m_ml,
        summary=resolved.summary,
        risk_status=risk_status,
        predictor_names=design.predictor_names or [f"x{j + 1}" for j in range(p)],
    )


def trace_frame(table: TraceTable) -> pd.DataFrame:
    """The table as columns m, coef_*, rmse_*, spat_*, exev_*, infd_*, minus2loglr."""

    columns: dict[str, np.ndarray] = {"m": table.m_grid}

    for kind in TraceKind:
        values = getattr(table, kind.value)
        for j in range(table.p):
            columns[f"{kind.value}_{j + 1}"] = values[:, j]

    columns["minus2loglr"] = table.profile

    return pd.DataFrame(columns)


def emit_csv(table: TraceTable, out: str | Path) -> None:
    """Write the trace table with 12 significant digits."""

    try:
        trace_frame(table).to_csv(
            out,
            index=False,
            float_format=f"%.{CSV_SIGNIFICANT_DIGITS}g",
            lineterminator="\n",
        )
    except OSError as err:
        raise TraceError(f"cannot write {out}: {err}") from err


def _save_svg(figure: Figure, out: str | Path) -> None:
    # A fixed hash salt and no date keep the SVG byte-identical across runs.
    with matplotlib.rc_context({"svg.hashsalt": DOMAIN, "svg.fonttype": "none"}):
        try:
            figure.savefig(out, format="svg", metadata={"Date": None})
        except OSError as err:
            raise TraceError(f"cannot write {out}: {err}") from err


def trace_figure(table: TraceTable, which: TraceKind | str) -> Figure:
    """One line per coefficient (or principal axis) against m."""

    try:
        which = TraceKind(which)
    except ValueError:
        raise TraceError(f'unknown trace kind "{which}"') from None

    if which in RISK_TRACES and table.risk_status != RISK_OK:
        raise TraceError(f"{which} trace unavailable: {table.risk_status}")

    if which in _COMPONENT_TRACES:
        labels = [f"PC{j + 1}" for j in range(table.p)]
    else:
        labels = table.predictor_names

    figure = Figure(figsize=(6.4, 4.8))
    axes = figure.subplots()
    values = getattr(table, which.value)

    for j in range(table.p):
        axes.plot(
            table.m_grid,
            values[:, j],
            color=PALETTE[j % len(PALETTE)],
            linestyle=LINESTYLES[(j // len(PALETTE)) % len(LINESTYLES)],
            linewidth=1.5,
            label=labels[j],
            gid=f"{which.value}_{j + 1}",
        )

    axes.axvline(table.m_ml, color="gray", linestyle="--", linewidth=1.0, gid="m_ml")
    axes.set_xlim(0, table.p)
    axes.set_xlabel("m")
    axes.set_ylabel(which.value)
    axes.set_title(f"{TRACE_LABELS[which]}: {table.path.name} path")
    axes.legend(loc="best", fontsize="small")

    return figure


def emit_svg(table: TraceTable, which: TraceKind | str, out: str | Path) -> None:
    """Render one trace as a static SVG file."""
    _save_svg(trace_figure(table, which), out)


def profile_figure(table: TraceTable) -> Figure:
    """-2 log LR against m, with the chi-squared reference line when defined."""

    figure = Figure(figsize=(6.4, 4.8))
    axes = figure.subplots()

    finite = np.isfinite(table.profile)
    axes.plot(
        table.m_grid[finite], table.profile[finite], color="black", linewidth=1.5, gid="profile"
    )

    reference = None
    if isinstance(table.summary, QMSolution) and table.summary.chisq_crit99 is not None:
        reference = table.summary.chisq_crit99
        axes.axhline(reference, color="blue", linestyle=":", linewidth=1.0, gid="chisq_reference")

    axes.axvline(table.m_ml, color="gray", linestyle="--", linewidth=1.0, gid="m_ml")

    # Values near m = 0 explode; keep the interesting part in view.
    floor = float(table.profile[table.ml_row])
    if not math.isfinite(floor):
        floor = 0.0
    top = 3.0 * max(floor, reference or 0.0, 1.0) + 10.0
    axes.set_ylim(0, top)
    axes.set_xlim(0, table.p)
    axes.set_xlabel("m")
    axes.set_ylabel("-2 log(LR)")
    axes.set_title(f"Likelihood ratio: {table.path.name} path")

    return figure


def emit_profile_svg(table: TraceTable, out: str | Path) -> None:
    """Render the likelihood-ratio profile as a static SVG file."""
    _save_svg(profile_figure(table), out)


def _floats(values: np.ndarray) -> list[float]:
    return [float(value) for value in values]


def summary_dict(analysis: Analysis, table: TraceTable) -> dict[str, Any]:
    """Maximum likelihood point of a traced path, in both unit systems."""

    row = table.ml_row
    beta_raw, intercept = back_transform(table.coef[row], analysis.design)

    summary: dict[str, Any] = {
        "path": table.path.name,
        "m_ml": table.m_ml,
        "posterior_precision": (analysis.p - table.m_ml) / analysis.p,
        "deltas": _floats(table.spat[row]),
        "coef_std": _floats(table.coef[row]),
        "coef_raw": _floats(beta_raw),
        "intercept": intercept,
        "minus2loglr": float(table.profile[row]),
        "risk_status": table.risk_status,
        "predictors": list(table.predictor_names),
    }

    if isinstance(table.summary, QMSolution):
        summary.update(qm_dict(table.summary))
    else:
        summary.update(ml_dict(table.summary))

    return summary


def qm_dict(solution: QMSolution) -> dict[str, Any]:
    return {
        "q_star": solution.q_star,
        "k_star": solution.k_star,
        "m_star": solution.m_star,
        "crl_star": solution.crl_star,
        "sigma2_hat": solution.sigma2_hat,
        "nu_hat": solution.nu_hat,
        "chisq": solution.chisq,
        "df": solution.df,
        "chisq_crit99": solution.chisq_crit99,
        "p_value": solution.p_value,
        "qgrid": [
            {"q": fit.q, "crl": fit.crl, "k": fit.k_hat, "m": fit.m_hat, "chisq": fit.chisq}
            for fit in solution.qgrid_evals
        ],
    }


def ml_dict(fit: MLComponentFit) -> dict[str, Any]:
    return {
        "m_knot": fit.m_knot,
        "delta_ml": _floats(fit.delta_ml),
        "gamma_ml": _floats(fit.gamma_ml),
    }


def fit_summary(analysis: Analysis, table: TraceTable) -> dict[str, Any]:
    """OLS, componentwise ML and q-Shape search results for a dataset."""

    design, decomp, comps = analysis.design, analysis.decomp, analysis.comps
    ols_raw, ols_intercept = back_transform(analysis.ols, design)

    ml = ml_components(comps, design.n)
    ml_beta = grr_estimate(decomp, comps, DeltaVector.from_deltas(ml.delta_ml))
    ml_raw, ml_intercept = back_transform(ml_beta, design)

    qm = qm_search(comps, decomp, design.n, table.path.qmin, table.path.qmax, table.path.qstep)

    return {
        "data": {
            "n": design.n,
            "p": design.p,
            "predictors": list(design.predictor_names),
            "standardize_y": design.standardize_y,
        },
        "ols": {
            "coef_std": _floats(analysis.ols),
            "coef_raw": _floats(ols_raw),
            "intercept": ols_intercept,
            "R2": comps.R2,
            "s2": comps.s2,
            "dfe": comps.dfe,
            "lambdas": _floats(decomp.lambdas),
            "rho": _floats(comps.rho),
            "c": _floats(comps.c),
            "F": _floats(comps.F),
            "tau": _floats(comps.tau),
        },
        "ml_components": {
            **ml_dict(ml),
            "coef_raw": _floats(ml_raw),
            "intercept": ml_intercept,
        },
        "qm": qm_dict(qm),
        "path": summary_dict(analysis, table),
    }


def emit_json(summary: dict[str, Any], out: str | Path) -> None:
    """Write a summary dictionary as sorted, indented JSON."""

    try:
        Path(out).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except OSError as err:
        raise TraceError(f"cannot write {out}: {err}") from err
