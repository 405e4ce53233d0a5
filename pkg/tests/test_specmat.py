"""Labelled symmetric matrices and the spectral-norm contract."""

import json
import math

import numpy as np
import pytest

from advbound.specmat import (
    RESIDUAL_TOL,
    EigensolverError,
    SymMatrix,
    difference_mask,
    hadamard,
    matrix_from_dict,
    matrix_to_dict,
    principal_eigenvector,
    spectral_norm,
)

LABELS4 = ("00", "01", "10", "11")


def gadget_entries(b1, b2):
    """4x4 hub-and-spokes pattern used throughout: (01,11)=b1, (10,11)=b2."""
    a = np.zeros((4, 4))
    a[1, 3] = a[3, 1] = b1
    a[2, 3] = a[3, 2] = b2
    return a


def test_symmatrix_validation():
    with pytest.raises(ValueError):
        SymMatrix(("0", "1"), np.array([[0.0, 1.0], [1.0 + 1e-15, 0.0]]))
    with pytest.raises(ValueError):
        SymMatrix(("0", "1"), np.array([[0.0, np.inf], [np.inf, 0.0]]))
    with pytest.raises(ValueError):
        SymMatrix(("0", "0"), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        SymMatrix(("0", "11"), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        SymMatrix(("0", "1"), np.zeros((3, 3)))


def test_symmatrix_entries_are_frozen():
    m = SymMatrix(("0", "1"), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        m.entries[0, 0] = 1.0


def test_symmatrix_copies_input():
    raw = np.zeros((2, 2))
    m = SymMatrix(("0", "1"), raw)
    raw[0, 1] = raw[1, 0] = 5.0
    assert m.entries[0, 1] == 0.0


def test_index_lookup():
    m = SymMatrix(LABELS4, np.zeros((4, 4)))
    assert m.index("10") == 2


def test_difference_mask_two_bits():
    d1 = difference_mask(LABELS4, 1)
    expected = np.array(
        [
            [0, 0, 1, 1],
            [0, 0, 1, 1],
            [1, 1, 0, 0],
            [1, 1, 0, 0],
        ],
        dtype=float,
    )
    assert np.array_equal(d1.entries, expected)
    d2 = difference_mask(LABELS4, 2)
    assert d2.entries[0, 1] == 1.0 and d2.entries[0, 2] == 0.0
    with pytest.raises(ValueError):
        difference_mask(LABELS4, 3)
    with pytest.raises(ValueError):
        difference_mask(LABELS4, 0)


def test_hadamard():
    a = SymMatrix(("0", "1"), np.array([[1.0, 2.0], [2.0, 3.0]]))
    b = SymMatrix(("0", "1"), np.array([[0.0, 4.0], [4.0, 1.0]]))
    assert np.array_equal(hadamard(a, b).entries, [[0.0, 8.0], [8.0, 3.0]])
    with pytest.raises(ValueError):
        hadamard(a, SymMatrix(("a", "b"), np.zeros((2, 2))))


def test_gadget_spectrum_three_four():
    m = SymMatrix(LABELS4, gadget_entries(3.0, 4.0))
    res = spectral_norm(m)
    assert res.norm == pytest.approx(5.0, abs=1e-12)
    assert res.residual <= RESIDUAL_TOL * 5.0
    # masking by either input keeps exactly one spoke
    assert spectral_norm(hadamard(m, difference_mask(LABELS4, 1))).norm == pytest.approx(3.0, abs=1e-12)
    assert spectral_norm(hadamard(m, difference_mask(LABELS4, 2))).norm == pytest.approx(4.0, abs=1e-12)


def test_gadget_unit_eigenvector():
    res = spectral_norm(SymMatrix(LABELS4, gadget_entries(1.0, 1.0)))
    assert res.norm == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert np.allclose(res.vector, [0.0, 0.5, 0.5, math.sqrt(0.5)], atol=1e-12)


def test_negative_dominant_eigenvalue():
    res = spectral_norm(SymMatrix(("0", "1"), np.array([[-2.0, 0.0], [0.0, 1.0]])))
    assert res.norm == 2.0
    assert np.allclose(res.vector, [1.0, 0.0])


def test_magnitude_tie_prefers_algebraic_max():
    # eigenvalues are -1 and +1; the +1 eigenvector should come back,
    # oriented so its first largest-magnitude entry is positive
    res = spectral_norm(SymMatrix(("0", "1"), np.array([[0.0, -1.0], [-1.0, 0.0]])))
    assert res.norm == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(res.vector, [math.sqrt(0.5), -math.sqrt(0.5)], atol=1e-12)


def test_zero_and_empty_matrices():
    z = spectral_norm(SymMatrix(LABELS4, np.zeros((4, 4))))
    assert z.norm == 0.0
    empty = spectral_norm(SymMatrix((), np.zeros((0, 0))))
    assert empty.norm == 0.0 and empty.vector.shape == (0,)


def test_principal_eigenvector_requires_nonnegative():
    with pytest.raises(ValueError):
        principal_eigenvector(SymMatrix(("0", "1"), np.array([[0.0, -1.0], [-1.0, 0.0]])))
    res = principal_eigenvector(SymMatrix(LABELS4, gadget_entries(3.0, 4.0)))
    assert res.norm == pytest.approx(5.0, abs=1e-12)
    assert np.all(res.vector >= -1e-12)


def test_residual_contract_enforced():
    rng = np.random.default_rng(3)
    a = rng.uniform(0.0, 1.0, (6, 6))
    m = SymMatrix(tuple(f"{i:03b}" for i in range(6)), (a + a.T) / 2)
    with pytest.raises(EigensolverError) as err:
        spectral_norm(m, tol=0.0)
    assert err.value.residual > 0.0


def test_random_eigenpairs_satisfy_contract():
    rng = np.random.default_rng(42)
    for _ in range(50):
        d = int(rng.integers(1, 9))
        a = rng.normal(size=(d, d))
        m = SymMatrix(tuple(f"{i:04b}" for i in range(d)), (a + a.T) / 2)
        res = spectral_norm(m)
        assert res.residual <= RESIDUAL_TOL * max(1.0, res.norm)
        assert np.linalg.norm(res.vector) == pytest.approx(1.0, abs=1e-12)
        # |lambda| matches the full spectrum
        assert res.norm == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(m.entries))), abs=1e-10)


def test_norm_monotone_in_nonnegative_entries():
    rng = np.random.default_rng(5)
    labels = tuple(f"{i:03b}" for i in range(6))
    for _ in range(25):
        a = rng.uniform(0.0, 1.0, (6, 6))
        a = (a + a.T) / 2
        bump = rng.uniform(0.0, 0.5, (6, 6))
        b = a + (bump + bump.T) / 2
        na = spectral_norm(SymMatrix(labels, a)).norm
        nb = spectral_norm(SymMatrix(labels, b)).norm
        assert nb >= na - 1e-10


def test_masking_never_grows_nonnegative_norm():
    rng = np.random.default_rng(6)
    labels = LABELS4
    for _ in range(25):
        a = rng.uniform(0.0, 1.0, (4, 4))
        m = SymMatrix(labels, (a + a.T) / 2)
        whole = spectral_norm(m).norm
        for i in (1, 2):
            masked = spectral_norm(hadamard(m, difference_mask(labels, i))).norm
            assert masked <= whole + 1e-10


def test_tensor_product_norm_law():
    rng = np.random.default_rng(8)
    for _ in range(20):
        a = rng.normal(size=(3, 3))
        b = rng.normal(size=(4, 4))
        a, b = (a + a.T) / 2, (b + b.T) / 2
        la = ("00", "01", "10")
        lb = LABELS4
        ma = SymMatrix(la, a)
        mb = SymMatrix(lb, b)
        big = SymMatrix(tuple(x + y for x in la for y in lb), np.kron(a, b))
        lhs = spectral_norm(big).norm
        rhs = spectral_norm(ma).norm * spectral_norm(mb).norm
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_matrix_json_roundtrip():
    m = SymMatrix(LABELS4, gadget_entries(3.0, 4.0))
    again = matrix_from_dict(json.loads(json.dumps(matrix_to_dict(m))))
    assert again.labels == m.labels
    assert np.array_equal(again.entries, m.entries)


def test_matrix_json_rejects_asymmetry_and_garbage():
    with pytest.raises(ValueError):
        matrix_from_dict({"labels": ["0", "1"], "entries": [[0.0, 1.0], [0.9, 0.0]]})
    with pytest.raises(ValueError):
        matrix_from_dict({"labels": ["0", "1"]})
    with pytest.raises(ValueError):
        matrix_from_dict({"labels": ["0", "1"], "entries": "nope"})
