"""Dataset container and CSV convention."""

import io

import numpy as np
import pytest

from mfmc.dataset import (MFDataset, dataset_to_csv_text, load_dataset,
                          save_dataset)
from mfmc.errors import DataError, ParseError


class TestContainer:
    def test_basic_shape(self):
        ds = MFDataset([1, 3], [2, 4], [6, 8])
        assert ds.n == 2 and ds.m == 2
        np.testing.assert_allclose(ds.x2_all, [2, 4, 6, 8])

    def test_minimum_pairs(self):
        with pytest.raises(DataError):
            MFDataset([1.0], [2.0])

    def test_mismatched_blocks(self):
        with pytest.raises(DataError):
            MFDataset([1, 2, 3], [1, 2])

    def test_weight_normalization_and_positivity(self):
        ds = MFDataset([1, 3], [2, 4], weights=[2.0, 2.0])
        np.testing.assert_allclose(ds.weights, [0.5, 0.5])
        assert abs(ds.weights.sum() - 1.0) < 1e-12
        with pytest.raises(DataError):
            MFDataset([1, 3], [2, 4], weights=[1.0, -1.0])
        with pytest.raises(DataError):
            MFDataset([1, 3], [2, 4], weights=[1.0, 0.0])

    def test_all_low_weights_cover_both_blocks(self):
        ds = MFDataset([1, 3], [2, 4], [6, 8])
        w = ds.all_low_weights()
        assert w.shape == (4,)
        assert abs(w.sum() - 1.0) < 1e-12


class TestCsvConvention:
    def test_documented_example(self):
        text = "x1,x2\n1,2\n3,4\n,6\n,8\n"
        ds = load_dataset(io.StringIO(text))
        assert ds.n == 2 and ds.m == 2
        np.testing.assert_allclose(ds.x1, [1, 3])
        np.testing.assert_allclose(ds.x2_extra, [6, 8])

    def test_parse_error_names_line(self):
        with pytest.raises(ParseError) as err:
            load_dataset(io.StringIO("x1,x2\nabc,2\n1,2\n"))
        assert "line 2" in str(err.value)
        assert err.value.line == 2

    def test_weight_column_normalized_per_block(self):
        text = "x1,x2,w\n1,2,2\n3,4,2\n,6,1\n,8,3\n"
        ds = load_dataset(io.StringIO(text))
        np.testing.assert_allclose(ds.weights, [0.5, 0.5])
        np.testing.assert_allclose(ds.weights_extra, [0.25, 0.75])

    def test_negative_weight_rejected(self):
        with pytest.raises(DataError):
            load_dataset(io.StringIO("x1,x2,w\n1,2,1\n3,4,-1\n"))

    def test_bad_header(self):
        with pytest.raises(DataError):
            load_dataset(io.StringIO("a,b\n1,2\n"))

    def test_missing_file(self):
        with pytest.raises(DataError):
            load_dataset("/nonexistent/file.csv")

    def test_too_few_pairs(self):
        with pytest.raises(DataError):
            load_dataset(io.StringIO("x1,x2\n1,2\n,6\n"))

    def test_roundtrip_is_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        ds = MFDataset(rng.normal(size=9), rng.normal(size=9),
                       rng.normal(size=5))
        path = tmp_path / "data.csv"
        save_dataset(ds, str(path))
        back = load_dataset(str(path))
        assert np.array_equal(back.x1, ds.x1)
        assert np.array_equal(back.x2, ds.x2)
        assert np.array_equal(back.x2_extra, ds.x2_extra)

    def test_roundtrip_with_weights_exact(self):
        rng = np.random.default_rng(8)
        ds = MFDataset(rng.normal(size=4), rng.normal(size=4),
                       rng.normal(size=3), weights=rng.uniform(0.5, 2.0, 4),
                       weights_extra=rng.uniform(0.5, 2.0, 3))
        back = load_dataset(io.StringIO(dataset_to_csv_text(ds)))
        assert np.array_equal(back.x1, ds.x1)
        assert np.array_equal(back.weights, ds.weights)
        assert np.array_equal(back.weights_extra, ds.weights_extra)
