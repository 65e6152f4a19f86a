import numpy as np
import pytest

from mpsylv.mmio import read_matrix, write_matrix

from conftest import cmat


def test_hexfloat_roundtrip_bit_exact(tmp_path, rng):
    M = cmat(rng, 5, 3) * np.exp(rng.uniform(-300, 300, (5, 3)))
    path = tmp_path / "m.mtx"
    write_matrix(path, M)
    R = read_matrix(path)
    assert R.shape == M.shape
    assert (R == M).all()


def test_decimal_roundtrip_bit_exact(tmp_path, rng):
    # repr() decimals parse back to the same double
    M = cmat(rng, 4, 4)
    path = tmp_path / "m.mtx"
    write_matrix(path, M, hexfloat=False)
    assert (read_matrix(path) == M).all()


def test_read_coordinate_real(tmp_path):
    path = tmp_path / "c.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n"
                    "% a comment\n"
                    "2 3 2\n"
                    "1 2 0.5\n"
                    "2 3 -1.25\n")
    M = read_matrix(path)
    ref = np.zeros((2, 3), dtype=complex)
    ref[0, 1] = 0.5
    ref[1, 2] = -1.25
    assert (M == ref).all()


def test_read_array_symmetric(tmp_path):
    path = tmp_path / "s.mtx"
    path.write_text("%%MatrixMarket matrix array real symmetric\n"
                    "2 2\n1\n2\n3\n")
    M = read_matrix(path)
    assert (M == np.array([[1, 2], [2, 3]])).all()


def test_read_coordinate_hermitian(tmp_path):
    path = tmp_path / "h.mtx"
    path.write_text("%%MatrixMarket matrix coordinate complex hermitian\n"
                    "2 2 2\n"
                    "1 1 2 0\n"
                    "2 1 1 -3\n")
    M = read_matrix(path)
    assert M[0, 1] == complex(1, 3) and M[1, 0] == complex(1, -3)


def test_read_hexfloat_tokens(tmp_path):
    path = tmp_path / "x.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n"
                    "1 1\n0x1.8p+1\n")
    assert read_matrix(path)[0, 0] == 3.0


def test_rejects_garbage_header(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("hello\n1 1\n0\n")
    with pytest.raises(ValueError):
        read_matrix(path)
