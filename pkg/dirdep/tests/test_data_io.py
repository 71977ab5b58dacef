"""Tests for delimited-text ingestion"""

import numpy as np
import pytest

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from shared.errors import ConfigurationError, InputError
from shared.models import SampleKind
from src.data_io import ColumnType, DataFile, parse_columns, read_paired_sample, to_sample
from src.geometry import sample_to_angles


def _write(tmp_path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestDataFile:
    """Test suite for DataFile construction"""

    def test_column_lists_are_split(self):
        data = DataFile("x.csv", "a, b ,c", "d")
        assert data.x_cols == ["a", "b", "c"]
        assert data.y_cols == ["d"]

    def test_types_from_strings(self):
        data = DataFile("x.csv", "0", "1", x_type="sphere", y_type="linear")
        assert data.x_type == ColumnType.SPHERE
        assert data.y_type == ColumnType.LINEAR

    def test_unknown_type(self):
        with pytest.raises(ConfigurationError, match="--y-type"):
            DataFile("x.csv", "0", "1", y_type="toroidal")

    def test_empty_column_list(self):
        with pytest.raises(ConfigurationError, match="empty"):
            parse_columns(" , ")


class TestReadPairedSample:
    """Test suite for read_paired_sample"""

    def test_degrees_by_name(self, tmp_path):
        path = _write(tmp_path, "bp.csv", "theta,phi\n30,25\n15,5\n90,180\n")
        pair = read_paired_sample(DataFile(path, "theta", "phi"))
        assert pair.n == 3
        assert sample_to_angles(pair.x).angles[2] == pytest.approx(np.pi / 2)
        assert sample_to_angles(pair.y).angles[2] == pytest.approx(np.pi)

    def test_radians_by_position_with_semicolons(self, tmp_path):
        path = _write(tmp_path, "r.csv", "a;b\n0.5;1.0\n1.5;2.0\n")
        pair = read_paired_sample(DataFile(path, "1", "0", x_type="circular-rad", y_type="circular-rad"))
        assert sample_to_angles(pair.x).angles == pytest.approx([1.0, 2.0])

    def test_sphere_and_linear(self, tmp_path):
        path = _write(tmp_path, "s.csv", "x,y,z,w\n1,0,0,2.5\n0,1,0,-1\n0,0,1,0\n")
        pair = read_paired_sample(DataFile(path, "x,y,z", "w", x_type="sphere", y_type="linear"))
        assert pair.x.points.shape == (3, 3)
        assert pair.y.kind == SampleKind.LINEAR
        assert pair.y.points[:, 0].tolist() == [2.5, -1.0, 0.0]

    def test_non_unit_row_is_named(self, tmp_path):
        path = _write(tmp_path, "s.csv", "x,y,a\n1,0,10\n0,2,20\n")
        with pytest.raises(InputError, match=r"Row 3 \(x\).*--renormalize"):
            read_paired_sample(DataFile(path, "x,y", "a", x_type="sphere"))

    def test_renormalize(self, tmp_path):
        path = _write(tmp_path, "s.csv", "x,y,a\n1,0,10\n0,2,20\n")
        pair = read_paired_sample(DataFile(path, "x,y", "a", x_type="sphere", renormalize=True))
        assert np.allclose(pair.x.points, [[1.0, 0.0], [0.0, 1.0]])

    def test_non_numeric_row_is_named(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "theta,phi\n30,25\n15,oops\n")
        with pytest.raises(InputError, match=r"Row 3 \(y\)"):
            read_paired_sample(DataFile(path, "theta", "phi"))

    def test_unknown_column(self, tmp_path):
        path = _write(tmp_path, "bp.csv", "theta,phi\n30,25\n15,5\n")
        with pytest.raises(ConfigurationError, match="column 'psi' not found"):
            read_paired_sample(DataFile(path, "theta", "psi"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="not found"):
            read_paired_sample(DataFile(str(tmp_path / "nope.csv"), "0", "1"))

    def test_too_few_rows(self, tmp_path):
        path = _write(tmp_path, "one.csv", "theta,phi\n30,25\n")
        with pytest.raises(InputError, match="at least two data rows"):
            read_paired_sample(DataFile(path, "0", "1"))


class TestToSample:
    """Test suite for column-block conversion"""

    def test_circular_needs_one_column(self):
        with pytest.raises(ConfigurationError, match="exactly one column"):
            to_sample(np.ones((3, 2)), ColumnType.CIRCULAR_DEG, "x")

    def test_sphere_needs_two_columns(self):
        with pytest.raises(ConfigurationError, match="at least two columns"):
            to_sample(np.ones((3, 1)), ColumnType.SPHERE, "y")
