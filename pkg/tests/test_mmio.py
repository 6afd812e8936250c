import numpy as np
import pytest

from hodlrkit import DimensionMismatchError, GridSpec, ParseError, grid_operator
from hodlrkit.graph import SparsePattern
from hodlrkit.mmio import (
    read_matrix_market,
    read_ordering,
    write_matrix_market_dense,
    write_matrix_market_sparse,
    write_ordering,
)


def test_read_minimal_symmetric_coordinate(tmp_path):
    path = tmp_path / "one.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    "% comment line\n"
                    "1 1 1\n"
                    "1 1 2.0\n")
    p = read_matrix_market(path)
    assert isinstance(p, SparsePattern)
    assert p.n == 1 and p.diagonal[0] == 2.0


def test_read_array_column_major(tmp_path):
    path = tmp_path / "a.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n"
                    "2 2\n1\n3\n2\n4\n")
    a = read_matrix_market(path)
    assert np.array_equal(a, [[1.0, 2.0], [3.0, 4.0]])


def test_read_general_coordinate_symmetrizes_union(tmp_path):
    path = tmp_path / "g.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n"
                    "3 3 2\n1 2 5.0\n3 1 -2.0\n")
    p = read_matrix_market(path)
    assert list(p.neighbors(0)) == [1, 2]
    assert list(p.neighbors(1)) == [0]


def test_read_pattern_coordinate(tmp_path):
    path = tmp_path / "p.mtx"
    path.write_text("%%MatrixMarket matrix coordinate pattern symmetric\n"
                    "3 3 2\n2 1\n3 2\n")
    p = read_matrix_market(path)
    assert not p.has_values
    assert list(p.neighbors(1)) == [0, 2]


def test_parse_error_names_line(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    "2 2 2\n1 1 1.0\n2 oops 1.0\n")
    with pytest.raises(ParseError) as err:
        read_matrix_market(path)
    assert err.value.line == 4


def test_wrong_entry_count_is_parse_error(tmp_path):
    path = tmp_path / "short.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    "2 2 3\n1 1 1.0\n")
    with pytest.raises(ParseError):
        read_matrix_market(path)


def test_out_of_range_entry_is_dimension_mismatch(tmp_path):
    path = tmp_path / "oob.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    "2 2 1\n3 1 1.0\n")
    with pytest.raises(DimensionMismatchError):
        read_matrix_market(path)


def test_duplicate_entry_is_parse_error(tmp_path):
    path = tmp_path / "dup.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    "2 2 2\n2 1 1.0\n2 1 1.0\n")
    with pytest.raises(ParseError):
        read_matrix_market(path)


def test_bad_header_is_parse_error(tmp_path):
    path = tmp_path / "h.mtx"
    path.write_text("%%MatrixMarket matrix coordinate complex hermitian\n0 0 0\n")
    with pytest.raises(ParseError):
        read_matrix_market(path)


def test_header_only_file_is_parse_error(tmp_path):
    path = tmp_path / "empty.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n")
    with pytest.raises(ParseError):
        read_matrix_market(path)


def test_dense_round_trip_is_exact(tmp_path, rng):
    a = rng.standard_normal((7, 5)) * np.exp(rng.standard_normal((7, 5)) * 8)
    path = tmp_path / "rt.mtx"
    write_matrix_market_dense(path, a)
    b = read_matrix_market(path)
    assert np.array_equal(a, b)


def test_sparse_round_trip_is_exact(tmp_path, rng):
    op = grid_operator(GridSpec((5, 4)))
    path = tmp_path / "op.mtx"
    write_matrix_market_sparse(path, op)
    back = read_matrix_market(path)
    n = op.n
    assert np.array_equal(op.submatrix_dense(np.arange(n), np.arange(n)),
                          back.submatrix_dense(np.arange(n), np.arange(n)))


def test_pattern_round_trip(tmp_path):
    p = SparsePattern.from_edges(5, [0, 1, 3], [1, 2, 4])
    path = tmp_path / "pat.mtx"
    write_matrix_market_sparse(path, p)
    back = read_matrix_market(path)
    assert np.array_equal(p.indptr, back.indptr)
    assert np.array_equal(p.indices, back.indices)


def test_ordering_round_trip(tmp_path):
    path = tmp_path / "ord.txt"
    write_ordering(path, [4, 9, 1, 0])
    assert list(read_ordering(path)) == [4, 9, 1, 0]
