"""CSV ingestion and emission."""

import numpy as np
import pytest

from mvlrt.dataio import load_matrix, save_matrix, write_rows
from mvlrt.errors import DataFormatError
from mvlrt.rng import stream


def test_load_basic(tmp_path):
    path = tmp_path / "mat.csv"
    path.write_text("a,b\n1,2\n3,4\n")
    assert np.array_equal(load_matrix(path), [[1.0, 2.0], [3.0, 4.0]])


def test_load_errors_carry_line_numbers(tmp_path):
    cases = [
        ("a,b\n1,2\n3\n", "3"),            # ragged
        ("a,b\n1,2\nx,4\n", "3"),          # non-numeric
        ("a,b\n1,2\nnan,4\n", "3"),        # non-finite
        ("a,b\n1,inf\n", "2"),
    ]
    for body, lineno in cases:
        path = tmp_path / "bad.csv"
        path.write_text(body)
        with pytest.raises(DataFormatError, match=f"bad.csv:{lineno}"):
            load_matrix(path)


def test_load_empty_body(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("a,b\n")
    with pytest.raises(DataFormatError):
        load_matrix(path)
    path.write_text("")
    with pytest.raises(DataFormatError):
        load_matrix(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(DataFormatError, match="no such file"):
        load_matrix(tmp_path / "nope.csv")


def test_round_trip_is_bit_identical(tmp_path):
    """A large random matrix survives save -> load -> save unchanged."""
    a = stream(900).standard_normal((1000, 100)) * 10.0 ** stream(901).integers(
        -12, 12, size=(1000, 100))
    first = tmp_path / "first.csv"
    save_matrix(first, a)
    b = load_matrix(first)
    assert np.array_equal(a, b)  # 17 significant digits reproduce doubles exactly
    second = tmp_path / "second.csv"
    save_matrix(second, b)
    assert first.read_bytes() == second.read_bytes()


def test_save_header_shape(tmp_path):
    path = tmp_path / "small.csv"
    save_matrix(path, np.array([[1.5, -2.0]]))
    lines = path.read_text().splitlines()
    assert lines[0] == "c0,c1"
    assert lines[1] == "1.5,-2"
    assert len(lines) == 2


def test_write_rows(tmp_path):
    path = tmp_path / "rows.csv"
    write_rows(path, ["j", "p"], [[0, 0.5], [1, "x,y"]])
    text = path.read_text()
    assert text.splitlines()[0] == "j,p"
    assert '"x,y"' in text  # embedded commas stay quoted
    assert len(text.splitlines()) == 3
