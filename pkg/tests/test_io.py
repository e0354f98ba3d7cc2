import numpy as np
import pytest

from jmmd import Family, JointSpec, fit_joint
from jmmd.datasets import injection_molding_csv_path, injection_molding_dataset
from jmmd.errors import EmptyFile, MissingColumn, NonNumericCell
from jmmd.io import (
    diagnostics_bundle,
    export_diagnostics,
    load_dataset_csv,
    load_diagnostics_csv,
    write_dataset_csv,
)
from jmmd.simulation import Distribution, ScenarioSpec, _replication_rng, gen_normal
from jmmd.criteria import DispCriterion, MeanCriterion


class TestLoadCsv:
    def test_minimal_parse(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,x1\n1,0.5\n2,1.5\n3,2.5\n")
        data = load_dataset_csv(f, "y")
        assert data.n == 3
        assert list(data.factors) == ["x1"]
        assert data.response.tolist() == [1.0, 2.0, 3.0]

    def test_blank_cell_rejected_with_location(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,x1\n1,0.5\n2,\n")
        with pytest.raises(NonNumericCell) as err:
            load_dataset_csv(f, "y")
        assert err.value.row == 3
        assert err.value.col == 2

    def test_missing_response_column(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,x1\n1,0.5\n")
        with pytest.raises(MissingColumn):
            load_dataset_csv(f, "z")

    def test_empty_and_header_only(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("")
        with pytest.raises(EmptyFile):
            load_dataset_csv(f, "y")
        f.write_text("y,x1\n")
        with pytest.raises(EmptyFile):
            load_dataset_csv(f, "y")

    def test_shipped_csv_matches_builtin(self):
        loaded = load_dataset_csv(injection_molding_csv_path(), "y")
        built = injection_molding_dataset()["dataset"]
        assert np.array_equal(loaded.response, built.response)
        assert list(loaded.factors) == list(built.factors)
        for name in built.factors:
            assert np.array_equal(loaded.factors[name], built.factors[name])

    def test_roundtrip_full_precision(self, tmp_path):
        data = gen_normal(
            ScenarioSpec(
                Distribution.NORMAL, (4, 15, 13, 0), (0.3, 0, 3, 0), 40, 1,
                MeanCriterion.R2_SQRT, DispCriterion.AICC, 3,
            ),
            _replication_rng(3, 0),
        )
        f = tmp_path / "out.csv"
        write_dataset_csv(data, f)
        back = load_dataset_csv(f, "y")
        assert np.array_equal(back.response, data.response)
        for name in data.factors:
            assert np.array_equal(back.factors[name], data.factors[name])


class TestDiagnostics:
    def _fit(self):
        data = gen_normal(
            ScenarioSpec(
                Distribution.NORMAL, (4, 15, 13, 0), (0.3, 0, 3, 0), 80, 1,
                MeanCriterion.R2_SQRT, DispCriterion.AICC, 9,
            ),
            _replication_rng(9, 0),
        )
        spec = JointSpec(("1", "x1", "x2"), ("1", "z2"), Family.normal_type())
        return data, fit_joint(data, spec)

    def test_bundle_shapes(self):
        data, jf = self._fit()
        bundle = diagnostics_bundle(jf)
        for key, vec in bundle.items():
            assert vec.shape == (data.n,), key

    def test_export_and_reload(self, tmp_path):
        data, jf = self._fit()
        csv_path = tmp_path / "diag.csv"
        sidecar = export_diagnostics(jf, csv_path)
        back = load_diagnostics_csv(csv_path)
        bundle = diagnostics_bundle(jf)
        for key in bundle:
            assert np.array_equal(back[key], bundle[key]), key
        payload = sidecar.read_text()
        assert "mean_coefficients" in payload
        assert "dispersion_coefficients" in payload

    def test_perfect_fit_residuals_zero(self, tmp_path):
        # two-parameter exact interpolation through three collinear points
        from jmmd.data import Dataset

        x = np.array([0.0, 1.0, 2.0, 3.0])
        y = 1.0 + 2.0 * x
        data = Dataset(response=y, factors={"x": x})
        jf = fit_joint(data, JointSpec(("1", "x"), ("1",), Family.normal_type()))
        bundle = diagnostics_bundle(jf)
        assert np.max(np.abs(bundle["mean_std_residual"])) < 1e-5
