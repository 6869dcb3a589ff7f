"""
Unit Tests for File Formats

Time-series parsing, model documents, reports and frequency responses.
"""

import pytest
import numpy as np
import sys
from pathlib import Path

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from ssicert.core.errors import DimensionMismatch, ParseError
from ssicert.core.models import TimeSeries
from ssicert.utils.io import (
    load_model, load_report, model_from_dict, read_timeseries, save_model,
    save_report, write_frequency_response, write_timeseries,
)
from ssicert.utils.paths import (
    confidence_qualifier, get_models_dir, make_output_filename, order_qualifier,
    run_qualifier,
)


class TestTimeSeriesFiles:
    """Test delimited text input"""

    def test_comma_with_header(self, tmp_path):
        path = tmp_path / "y.csv"
        path.write_text("y1,y2\n1.0,2.0\n-3.5,4e-3\n")
        ts = read_timeseries(path)
        assert ts.N == 2 and ts.n_y == 2
        assert ts.samples[1, 1] == pytest.approx(4e-3)

    @pytest.mark.parametrize("sep", [";", "\t", " ", ", "])
    def test_separators(self, tmp_path, sep):
        path = tmp_path / "y.txt"
        path.write_text(f"1{sep}2\n3{sep}4\n")
        assert np.array_equal(read_timeseries(path).samples, [[1, 2], [3, 4]])

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "y.csv"
        path.write_text("# recorded output\n\n0.5\n# mid-file note\n1.5\n\n")
        assert np.array_equal(read_timeseries(path).samples[:, 0], [0.5, 1.5])

    def test_bad_value_reports_position(self, tmp_path):
        """Test a non-numeric entry names its line and column"""
        path = tmp_path / "y.csv"
        path.write_text("y1,y2\n1.0,2.0\n3.0,abc\n")
        with pytest.raises(ParseError) as info:
            read_timeseries(path)
        assert info.value.line == 3
        assert info.value.column == 5
        assert info.value.exit_code == 2

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "y.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(ParseError) as info:
            read_timeseries(path)
        assert info.value.line == 2

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "y.csv"
        path.write_text("1.0\nnan\n")
        with pytest.raises(ParseError):
            read_timeseries(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "y.csv"
        path.write_text("y1\n# nothing\n")
        with pytest.raises(ParseError):
            read_timeseries(path)

    def test_write_then_read_is_exact(self, tmp_path):
        """Test repr formatting keeps every double"""
        samples = np.random.default_rng(0).standard_normal((50, 2)) * 1e-3
        path = write_timeseries(TimeSeries(samples), tmp_path / "out" / "y.csv")
        assert path.read_text().splitlines()[0] == "y1,y2"
        assert np.array_equal(read_timeseries(path).samples, samples)


class TestModelFiles:
    """Test innovations model documents"""

    def test_round_trip_is_bit_identical(self, certification, tmp_path):
        path = save_model(certification, tmp_path / "model.json")
        loaded = load_model(path)
        for attr in "A K Q C".split():
            assert np.array_equal(getattr(loaded, attr), getattr(certification, attr)), attr
        assert loaded.name == certification.name

    def test_shipped_reference_models(self, certification, slow_pole, scalar):
        """Test the JSON files under data/models match the built-in systems"""
        for name, model in [("certification", certification), ("slow_pole", slow_pole),
                            ("scalar", scalar)]:
            loaded = load_model(get_models_dir() / f"{name}.json")
            assert np.allclose(loaded.A, model.A) and np.allclose(loaded.K, model.K), name
            assert np.allclose(loaded.Q, model.Q) and np.allclose(loaded.C, model.C), name

    def test_wrong_shape(self):
        doc = {"n_x": 2, "n_y": 1, "A": [[0.5]], "K": [[0.1], [0.2]], "Q": [[1.0]],
               "C": [[1.0, 0.0]]}
        with pytest.raises(DimensionMismatch):
            model_from_dict(doc)

    def test_missing_field(self):
        with pytest.raises(ParseError):
            model_from_dict({"n_x": 1, "n_y": 1, "A": [[0.5]], "K": [[0.1]], "Q": [[1.0]]})

    def test_wrong_kind(self):
        with pytest.raises(ParseError):
            model_from_dict({"kind": "transfer_function", "n_x": 1, "n_y": 1})

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n_x": 1,\n "A": [[0.5]\n}')
        with pytest.raises(ParseError) as info:
            load_model(path)
        assert info.value.line is not None


class TestReports:
    """Test report and response files"""

    def test_report_with_numpy_values(self, tmp_path):
        report = {"bound": np.float64(0.1), "ok": np.bool_(True), "dof": np.int64(68),
                  "P": np.eye(2), "missing": float("nan")}
        doc = load_report(save_report(report, tmp_path / "r.json"))
        assert doc == {"bound": 0.1, "ok": True, "dof": 68, "P": [[1.0, 0.0], [0.0, 1.0]],
                       "missing": None}

    def test_frequency_response(self, tmp_path):
        path = write_frequency_response(tmp_path / "g.txt", [0.0, 1.0], [0.5, 1 / 3])
        lines = path.read_text().splitlines()
        assert lines[0] == "# omega value"
        assert float(lines[2].split()[1]) == 1 / 3

    def test_frequency_response_lengths(self, tmp_path):
        with pytest.raises(DimensionMismatch):
            write_frequency_response(tmp_path / "g.txt", [0.0, 1.0], [0.5])


class TestOutputNames:
    """Test output filename conventions"""

    def test_qualifiers(self):
        assert run_qualifier(100000, 7) == "n100000_s7"
        assert run_qualifier(2500) == "n2500"
        assert order_qualifier(2, 4) == "nx2_m4"
        assert confidence_qualifier(0.9518) == "c0.9518"

    def test_filenames(self):
        assert make_output_filename("certification", "model", "json",
                                    qualifier="nx2_m4") == "certification_model_nx2_m4.json"
        assert make_output_filename("slow_pole", "", ".json", prefix="montecarlo",
                                    qualifier="r200_s0") == "montecarlo_slow_pole_r200_s0.json"


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
