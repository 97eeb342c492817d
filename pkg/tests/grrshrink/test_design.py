"""Tests for data ingestion, standardization and the spectral decomposition"""

import numpy as np
import pytest

from grrshrink.design import (
    RawDataset,
    StandardizedDesign,
    analyze,
    back_transform,
    components,
    load_csv,
    spectral,
    standardize,
)
from grrshrink.exceptions import DataError, DesignError, PerfectFitError

###########################################################
### load_csv


def test_load_csv_haldport(haldport):
    """Test the bundled data loads with four predictors"""

    assert haldport.n == 13
    assert haldport.predictor_names == ["p3ca", "p3cs", "p4caf", "p2cs"]
    assert haldport.response_name == "heat"
    assert haldport.y[0] == pytest.approx(78.5)
    assert haldport.X.shape == (13, 4)


def test_load_csv_response_defaults_to_last_column(haldport_path):
    """Test that the last column is the response when none is named"""

    raw = load_csv(haldport_path)

    assert raw.response_name == "heat"


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(DataError, match="does not exist"):
        load_csv(tmp_path / "nothing.csv", "y")


def test_load_csv_missing_response(haldport_path):
    with pytest.raises(DataError, match='response column "y" not found'):
        load_csv(haldport_path, "y")


def test_load_csv_non_numeric_cell(write_csv):
    """Test the failing cell is named by row and column"""

    path = write_csv("a,b,y\n1,2,3\n4,abc,6\n7,8,9\n")

    with pytest.raises(DataError, match='non-numeric cell "abc" at row 2, column "b"'):
        load_csv(path, "y")


def test_load_csv_blank_cell(write_csv):
    path = write_csv("a,b,y\n1,2,3\n4, ,6\n7,8,9\n")

    with pytest.raises(DataError, match='blank cell at row 2, column "b"'):
        load_csv(path, "y")


def test_load_csv_ragged_rows(write_csv):
    path = write_csv("a,b,y\n1,2,3\n4,5,6,7\n7,8,9\n")

    with pytest.raises(DataError, match="ragged rows"):
        load_csv(path, "y")


def test_load_csv_short_row(write_csv):
    path = write_csv("a,b,y\n1,2,3\n4,5\n7,8,9\n")

    with pytest.raises(DataError, match="ragged rows .*row 2 has 2 fields, expected 3"):
        load_csv(path, "y")


def test_load_csv_every_row_long(write_csv):
    path = write_csv("a,b,y\n1,2,3,0\n4,5,6,0\n7,8,9,0\n")

    with pytest.raises(DataError, match="row 1 has 4 fields, expected 3"):
        load_csv(path, "y")


def test_raw_dataset_rejects_non_finite():
    with pytest.raises(DataError, match="non-finite"):
        RawDataset.from_arrays(np.array([[1.0], [np.nan], [3.0]]), np.array([1.0, 2.0, 3.0]))


###########################################################
### standardize


def test_standardize_unit_correlation_scaling(haldport):
    """Test every predictor column is centered with sum of squares n - 1"""

    design = standardize(haldport)

    np.testing.assert_allclose(design.X.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose((design.X**2).sum(axis=0), design.n - 1)
    assert design.y @ design.y == pytest.approx(design.n - 1)
    assert design.standardize_y is True


def test_standardize_keeps_response_scale():
    raw = RawDataset.from_arrays(np.array([[1.0], [2.0], [4.0], [7.0]]), np.array([2.0, 1.0, 5.0, 8.0]))

    design = standardize(raw, standardize_y=False)

    assert design.y_scale == 1.0
    assert design.y_mean == pytest.approx(4.0)
    np.testing.assert_allclose(design.y, [-2.0, -3.0, 1.0, 4.0])


def test_standardize_zero_scale_predictor():
    X = np.column_stack([np.arange(6.0), np.full(6, 2.0)])
    raw = RawDataset.from_arrays(X, np.arange(6.0) ** 2, ["x1", "flat"])

    with pytest.raises(DesignError, match='predictor "flat" has zero scale'):
        standardize(raw)


def test_standardize_too_many_predictors():
    raw = RawDataset.from_arrays(np.eye(3), np.array([1.0, 2.0, 4.0]))

    with pytest.raises(DesignError, match="exceed n - 1"):
        standardize(raw)


###########################################################
### spectral


def test_spectral_reconstructs_design(haldport):
    """Test X = H diag(lambda)^(1/2) G' with orthonormal H and G"""

    design = standardize(haldport)
    decomp = spectral(design)

    np.testing.assert_allclose(
        decomp.H @ np.diag(np.sqrt(decomp.lambdas)) @ decomp.G.T, design.X, atol=1e-10
    )
    np.testing.assert_allclose(decomp.G.T @ decomp.G, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(decomp.H.T @ decomp.H, np.eye(4), atol=1e-12)
    assert np.all(np.diff(decomp.lambdas) <= 0)
    assert decomp.lambdas.sum() == pytest.approx(4 * 12)


def test_spectral_sign_convention(haldport):
    """Test the largest entry of every principal axis is positive"""

    decomp = spectral(standardize(haldport))

    for column in decomp.G.T:
        assert column[np.argmax(np.abs(column))] > 0


def test_spectral_deterministic(haldport):
    """Test repeated decompositions give bit-identical principal axes"""

    design = standardize(haldport)

    first, second = spectral(design), spectral(design)

    np.testing.assert_array_equal(first.G, second.G)
    np.testing.assert_array_equal(first.H, second.H)
    np.testing.assert_array_equal(first.lambdas, second.lambdas)


def test_spectral_random_design():
    """Test a random 6 x 3 design is reconstructed with centered components"""

    rng = np.random.default_rng(6)
    raw = RawDataset.from_arrays(rng.standard_normal((6, 3)), rng.standard_normal(6))
    design = standardize(raw)

    decomp = spectral(design)

    np.testing.assert_allclose(
        decomp.H @ np.diag(np.sqrt(decomp.lambdas)) @ decomp.G.T, design.X, atol=1e-12
    )
    np.testing.assert_allclose(np.ones(6) @ decomp.H, 0.0, atol=1e-12)
    assert decomp.lambdas.sum() == pytest.approx(3 * 5)


def test_spectral_duplicated_column():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(10)
    raw = RawDataset.from_arrays(np.column_stack([x, 2.0 * x, rng.standard_normal(10)]), rng.standard_normal(10))

    with pytest.raises(DesignError, match="X not full column rank"):
        spectral(standardize(raw))


###########################################################
### components


def test_components_haldport(haldport_analysis):
    """Test the OLS fit statistics of the cement heat data"""

    comps = haldport_analysis.comps

    assert comps.R2 == pytest.approx(0.98238, abs=1e-5)
    assert comps.dfe == 8
    np.testing.assert_allclose(comps.F, comps.tau**2)
    np.testing.assert_allclose(comps.noncentrality_hat, 13 * comps.F / comps.dfe)
    np.testing.assert_allclose(
        comps.c, comps.rho * np.sqrt(comps.yTy / haldport_analysis.decomp.lambdas)
    )


def test_components_ols_matches_lstsq(create_analysis):
    analysis = create_analysis(seed=5)
    design = analysis.design

    expected, *_ = np.linalg.lstsq(design.X, design.y, rcond=None)

    np.testing.assert_allclose(analysis.ols, expected, atol=1e-10)


def test_components_perfect_fit():
    X = np.column_stack([np.arange(8.0), np.arange(8.0) ** 2])
    raw = RawDataset.from_arrays(X, X @ np.array([1.0, -0.5]) + 3.0)

    with pytest.raises(PerfectFitError):
        analyze(raw)


def test_components_no_error_degrees_of_freedom():
    rng = np.random.default_rng(1)
    raw = RawDataset.from_arrays(rng.standard_normal((4, 3)), rng.standard_normal(4))
    design = standardize(raw)

    with pytest.raises(DesignError, match="no degrees of freedom"):
        components(spectral(design), design)


###########################################################
### back_transform


def test_back_transform_haldport_ols(haldport_analysis):
    """Test the raw OLS coefficients of the cement heat data"""

    beta_raw, intercept = back_transform(haldport_analysis.ols, haldport_analysis.design)

    np.testing.assert_allclose(beta_raw, [1.5511, 0.5102, 0.1019, -0.1441], atol=1e-3)
    assert intercept == pytest.approx(62.405, abs=1e-2)


def test_back_transform_scale_invariance(haldport):
    """Test that multiplying y by 7 multiplies the raw coefficients by 7"""

    scaled = RawDataset.from_arrays(haldport.X, 7.0 * haldport.y, haldport.predictor_names)

    base = analyze(haldport)
    other = analyze(scaled)

    np.testing.assert_allclose(other.comps.rho, base.comps.rho, atol=1e-10)
    np.testing.assert_allclose(other.comps.c, base.comps.c, atol=1e-10)
    np.testing.assert_allclose(
        back_transform(other.ols, other.design)[0],
        7.0 * back_transform(base.ols, base.design)[0],
        rtol=1e-10,
    )


###########################################################
### small worked examples


def test_load_csv_three_rows(write_csv):
    raw = load_csv(write_csv("x1,x2,y\n1,4,2\n2,3,5\n3,8,4\n"), "y")

    assert raw.n == 3
    assert raw.predictor_names == ["x1", "x2"]
    np.testing.assert_array_equal(raw.y, [2.0, 5.0, 4.0])


def test_standardize_symmetric_columns():
    raw = RawDataset.from_arrays(np.array([1.0, 2.0, 3.0]), np.array([4.0, 5.0, 6.0]))

    design = standardize(raw)

    np.testing.assert_allclose(design.X[:, 0], [-1.0, 0.0, 1.0])
    np.testing.assert_allclose(design.y, [-1.0, 0.0, 1.0])


def orthonormal_columns(n: int, k: int, seed: int) -> np.ndarray:
    """Orthonormal columns that are also orthogonal to the constant vector"""

    noise = np.random.default_rng(seed).standard_normal((n, k))
    basis, _ = np.linalg.qr(noise - noise.mean(axis=0))
    return basis


def design_from(X: np.ndarray, y: np.ndarray) -> StandardizedDesign:
    n, p = X.shape
    return StandardizedDesign(
        X=X,
        y=y,
        n=n,
        p=p,
        x_means=np.zeros(p),
        x_scales=np.ones(p),
        y_mean=0.0,
        y_scale=1.0,
        standardize_y=False,
    )


def test_spectral_equicorrelated_pair():
    """Test the eigenpairs of a two-predictor equicorrelated design"""

    H = orthonormal_columns(6, 2, seed=1)
    G = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    X = H @ np.diag(np.sqrt([1.5, 0.5])) @ G.T

    decomp = spectral(design_from(X, H[:, 0]))

    np.testing.assert_allclose(decomp.lambdas, [1.5, 0.5])
    np.testing.assert_allclose(decomp.G[:, 0], [1.0 / np.sqrt(2.0)] * 2)


def test_components_single_predictor_f_statistic():
    basis = orthonormal_columns(100, 2, seed=2)
    X = np.sqrt(99.0) * basis[:, :1]
    y = np.sqrt(99.0) * (0.5 * basis[:, 0] + np.sqrt(0.75) * basis[:, 1])
    design = design_from(X, y)

    comps = components(spectral(design), design)

    assert abs(comps.rho[0]) == pytest.approx(0.5)
    assert comps.F[0] == pytest.approx(98 * 0.25 / 0.75)
    assert comps.noncentrality_hat[0] == pytest.approx(100 * 0.25 / 0.75)


def test_components_orthogonal_response():
    basis = orthonormal_columns(12, 3, seed=3)
    design = design_from(basis[:, :2] * 3.0, basis[:, 2])

    comps = components(spectral(design), design)

    np.testing.assert_allclose(comps.rho, 0.0, atol=1e-12)
    np.testing.assert_allclose(comps.c, 0.0, atol=1e-12)
    np.testing.assert_allclose(comps.F, 0.0, atol=1e-20)
    assert comps.R2 == pytest.approx(0.0, abs=1e-20)


def test_back_transform_null_and_identity(haldport_analysis):
    design = haldport_analysis.design

    beta_raw, intercept = back_transform(np.zeros(4), design)
    np.testing.assert_array_equal(beta_raw, np.zeros(4))
    assert intercept == pytest.approx(design.y_mean)

    identity = design_from(design.X, design.y)
    beta_raw, intercept = back_transform(np.array([1.0, -2.0, 0.5, 3.0]), identity)
    np.testing.assert_array_equal(beta_raw, [1.0, -2.0, 0.5, 3.0])
    assert intercept == 0.0


def test_back_transform_matches_raw_least_squares(create_dataset):
    """Test standardize, OLS and back_transform agree with a raw fit"""

    raw = create_dataset(seed=13)
    analysis = analyze(raw)

    beta_raw, intercept = back_transform(analysis.ols, analysis.design)
    expected, *_ = np.linalg.lstsq(
        np.column_stack([np.ones(raw.n), raw.X]), raw.y, rcond=None
    )

    np.testing.assert_allclose(beta_raw, expected[1:], rtol=1e-8)
    assert intercept == pytest.approx(expected[0], rel=1e-8)
    np.testing.assert_allclose(
        raw.X @ beta_raw + intercept,
        analysis.design.X @ analysis.ols * analysis.design.y_scale + analysis.design.y_mean,
        atol=1e-10,
    )
