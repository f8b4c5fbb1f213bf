import numpy as np
import pytest

from parfid import linalg
from parfid.errors import (
    LocalInvertibilityError,
    NotHermitianError,
    NotPSDError,
    ValidationError,
)
from parfid.rand import ginibre, haar_unitary, random_hermitian, random_psd, rng_from


def test_as_complex_rejects_bad_shapes():
    with pytest.raises(ValidationError):
        linalg.as_complex(np.zeros(3))
    with pytest.raises(ValidationError):
        linalg.as_complex(np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        linalg.as_complex(np.array([[np.nan, 0], [0, 1]]))


def test_check_hermitian_raises_beyond_tolerance():
    a = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(NotHermitianError):
        linalg.check_hermitian(a)
    # symmetrizes within tolerance
    b = np.eye(2) + 1e-15 * np.array([[0, 1], [0, 0]])
    out = linalg.check_hermitian(b)
    assert np.allclose(out, out.conj().T)


def test_eigh_reconstructs_and_is_deterministic():
    rng = rng_from(1)
    a = random_hermitian(5, rng)
    dec = linalg.eigh(a)
    assert np.allclose(dec.reconstruct(), a, atol=1e-12)
    assert np.all(np.diff(dec.eigenvalues) >= -1e-14)
    dec2 = linalg.eigh(a.copy())
    assert np.array_equal(dec.vectors, dec2.vectors)


def test_sqrt_psd_squares_back():
    rng = rng_from(2)
    for n in (2, 3, 5):
        a = random_psd(n, rng)
        r = linalg.sqrt_psd(a)
        assert np.allclose(r @ r, a, atol=1e-10)


def test_sqrt_psd_rejects_indefinite():
    with pytest.raises(NotPSDError):
        linalg.sqrt_psd(np.diag([1.0, -0.5]))


def test_modulus_matches_singular_values():
    rng = rng_from(3)
    x = ginibre(4, 4, rng)
    m = linalg.modulus(x)
    s = np.sort(np.linalg.svd(x, compute_uv=False))
    assert np.allclose(np.linalg.eigvalsh(m), s, atol=1e-10)


def test_ortho_projection_validation():
    with pytest.raises(ValidationError):
        linalg.OrthoProjection(np.diag([0.5, 0.5]), 1, 1e-10)
    p = linalg.OrthoProjection(np.diag([1.0, 0.0]), 1, 1e-10)
    assert p.corank == 1
    assert np.allclose(p.complement().matrix, np.diag([0.0, 1.0]))
    with pytest.raises(ValidationError):
        linalg.OrthoProjection(np.diag([1.0, 0.0]), 2, 1e-10)


def test_support_and_local_inverse():
    rng = rng_from(4)
    a = random_psd(5, rng, rank=3)
    s = linalg.support(a)
    assert s.rank == 3
    inv = linalg.local_inverse(a)
    assert np.allclose(inv @ a, s.matrix, atol=1e-8)


def test_local_inverse_straddling_eigenvalue_raises():
    # eigenvalue exactly at the default tolerance floor is ambiguous
    with pytest.raises(LocalInvertibilityError):
        linalg.local_inverse(np.diag([1.0, 1e-10]))


def test_polar_reconstructs():
    rng = rng_from(5)
    x = ginibre(4, 4, rng)
    pd = linalg.polar(x)
    assert np.allclose(pd.partial_isometry @ pd.modulus, x, atol=1e-10)
    w = pd.partial_isometry
    assert np.allclose(w @ w.conj().T @ w, w, atol=1e-10)


def test_norms_and_numerical_range():
    d = np.diag([3.0, -1.0, 0.5])
    assert linalg.trace_norm(d) == pytest.approx(4.5)
    assert linalg.op_norm(d) == pytest.approx(3.0)
    assert linalg.numerical_range_interval(d) == pytest.approx((-1.0, 3.0))


def test_unitary_conjugation_preserves_spectrum():
    rng = rng_from(6)
    a = random_hermitian(4, rng)
    u = haar_unitary(4, rng)
    b = u @ a @ u.conj().T
    assert np.allclose(
        np.linalg.eigvalsh(linalg.herm(b)), np.linalg.eigvalsh(a), atol=1e-10
    )
