"""Dense complex-matrix kernel.

Hermitian eigendecompositions, PSD square roots, operator moduli, polar
decompositions, support projections and support-restricted (local) inverses.
Everything works on plain complex numpy arrays; all functions are pure and
deterministic for a fixed input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    LocalInvertibilityError,
    NotHermitianError,
    NotPSDError,
    ValidationError,
)

EPS = np.finfo(float).eps


def as_complex(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def dagger(a) -> np.ndarray:
    return np.conjugate(np.transpose(a))


def herm(a) -> np.ndarray:
    """Canonical symmetrization (a + a*)/2."""
    a = as_complex(a)
    return 0.5 * (a + dagger(a))


def hermiticity_defect(a) -> float:
    a = np.asarray(a, dtype=complex)
    return float(np.max(np.abs(a - dagger(a)), initial=0.0))


def check_hermitian(a, rtol: float = 1e-12, floor: float = 1e-14) -> np.ndarray:
    """Validate Hermiticity and return the symmetrized matrix."""
    a = as_complex(a)
    scale = float(np.max(np.abs(a), initial=0.0))
    tol = max(rtol * scale, floor)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitianError(
            f"max |A - A*| entry {defect:.3e} exceeds tolerance {tol:.3e}"
        )
    return herm(a)


def default_rank_tol(dim: int, max_eig: float) -> float:
    """Relative rank threshold with an absolute floor."""
    return max(dim * EPS * abs(max_eig), 1e-10)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues ascending, eigenvectors as unitary columns."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.vectors
        return (u * self.eigenvalues) @ dagger(u)


def eigh(a) -> SpectralDecomposition:
    """Hermitian eigendecomposition, eigenvalues ascending.

    The eigenvector phases are fixed deterministically (largest-magnitude
    component of each column made real positive) so repeated calls on equal
    inputs agree bit for bit.
    """
    a = check_hermitian(a)
    vals, vecs = np.linalg.eigh(a)
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        i = int(np.argmax(np.abs(col)))
        phase = col[i] / abs(col[i]) if abs(col[i]) > 0 else 1.0
        vecs[:, j] = col / phase
    return SpectralDecomposition(eigenvalues=vals, vectors=vecs)


def sqrt_psd(a, psd_tol: float = 1e-10) -> np.ndarray:
    """PSD square root; eigenvalues below -psd_tol raise NotPSDError.

    Eigenvalues at round-off level (below dim * eps * lambda_max) are
    flattened to zero first: the square root would amplify that noise from
    ~1e-16 to ~1e-8 and leak it into downstream singular values.
    """
    dec = eigh(a)
    lo = float(dec.eigenvalues[0]) if dec.eigenvalues.size else 0.0
    if lo < -psd_tol:
        raise NotPSDError(lo)
    vals = np.clip(dec.eigenvalues, 0.0, None)
    if vals.size:
        vals[vals < a.shape[0] * EPS * float(vals[-1])] = 0.0
    u = dec.vectors
    return herm((u * np.sqrt(vals)) @ dagger(u))


def modulus(x) -> np.ndarray:
    """|x| = sqrt(x* x)."""
    x = as_complex(x)
    return sqrt_psd(herm(dagger(x) @ x))


@dataclass(frozen=True)
class OrthoProjection:
    """Hermitian idempotent with cached rank."""

    matrix: np.ndarray
    rank: int
    tol: float

    def __post_init__(self):
        p = self.matrix
        if np.max(np.abs(p @ p - p), initial=0.0) > 1e-10:
            raise ValidationError("matrix is not idempotent to 1e-10")
        if hermiticity_defect(p) > 1e-10:
            raise ValidationError("matrix is not Hermitian to 1e-10")
        vals = np.linalg.eigvalsh(herm(p))
        if np.max(np.minimum(np.abs(vals), np.abs(vals - 1.0)), initial=0.0) > 1e-8:
            raise ValidationError("eigenvalues not within 1e-8 of {0, 1}")
        if int(np.sum(vals > 0.5)) != self.rank:
            raise ValidationError("cached rank disagrees with the spectrum")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def corank(self) -> int:
        return self.dim - self.rank

    def complement(self) -> "OrthoProjection":
        n = self.dim
        return OrthoProjection(np.eye(n, dtype=complex) - self.matrix, n - self.rank, self.tol)


def projection_from_columns(cols: np.ndarray, tol: float = 1e-10) -> OrthoProjection:
    """Orthoprojection onto the span of orthonormal columns."""
    p = cols @ dagger(cols)
    return OrthoProjection(herm(p), cols.shape[1], tol)


def support(x, tol: float | None = None) -> OrthoProjection:
    """Support projection s(x) of a PSD matrix."""
    dec = eigh(x)
    lo = float(dec.eigenvalues[0]) if dec.eigenvalues.size else 0.0
    if lo < -1e-10:
        raise NotPSDError(lo)
    if tol is None:
        tol = default_rank_tol(x.shape[0], float(dec.eigenvalues[-1]))
    keep = dec.eigenvalues > tol
    rank = int(np.sum(keep))
    p = herm(dec.vectors[:, keep] @ dagger(dec.vectors[:, keep]))
    return OrthoProjection(p, rank, tol)


def local_inverse(x, tol: float | None = None) -> np.ndarray:
    """Inverse of PSD x on its support, zero on the orthocomplement.

    An eigenvalue within a factor of 10 of the rank tolerance makes the
    support rank numerically ambiguous and raises LocalInvertibilityError.
    """
    dec = eigh(x)
    lo = float(dec.eigenvalues[0]) if dec.eigenvalues.size else 0.0
    if lo < -1e-10:
        raise NotPSDError(lo)
    if tol is None:
        tol = default_rank_tol(x.shape[0], float(dec.eigenvalues[-1]))
    vals = np.clip(dec.eigenvalues, 0.0, None)
    straddling = (vals >= tol / 10.0) & (vals <= 10.0 * tol)
    if np.any(straddling):
        bad = float(vals[straddling][0])
        raise LocalInvertibilityError(bad, tol)
    inv = np.where(vals > tol, 1.0 / np.where(vals > tol, vals, 1.0), 0.0)
    u = dec.vectors
    return herm((u * inv) @ dagger(u))


@dataclass(frozen=True)
class PolarDecomposition:
    """x = w |x| with partial isometry w; supports cached."""

    partial_isometry: np.ndarray
    modulus: np.ndarray
    right_support: OrthoProjection
    left_support: OrthoProjection


def polar(x, tol: float | None = None) -> PolarDecomposition:
    """Polar decomposition via SVD; w acts as zero on the kernel of |x|."""
    x = as_complex(x)
    u, s, vh = np.linalg.svd(x)
    if tol is None:
        tol = default_rank_tol(x.shape[0], float(s[0]) if s.size else 0.0)
    keep = s > tol
    rank = int(np.sum(keep))
    w = u[:, keep] @ vh[keep, :]
    mod = herm(dagger(vh) @ (s[:, None] * vh))
    right = OrthoProjection(herm(dagger(vh[keep, :]) @ vh[keep, :]), rank, tol)
    left = OrthoProjection(herm(u[:, keep] @ dagger(u[:, keep])), rank, tol)
    return PolarDecomposition(w, mod, right, left)


def numerical_range_interval(a) -> tuple[float, float]:
    """(lambda_min, lambda_max) of a Hermitian matrix; the open interval
    between them is the interior of the numerical range."""
    vals = np.linalg.eigvalsh(check_hermitian(a))
    return float(vals[0]), float(vals[-1])


def trace_norm(x) -> float:
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(as_complex(x), compute_uv=False)))


def op_norm(x) -> float:
    s = np.linalg.svd(np.atleast_2d(np.asarray(x, dtype=complex)), compute_uv=False)
    return float(s[0]) if s.size else 0.0
