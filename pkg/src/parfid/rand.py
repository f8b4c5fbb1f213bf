"""Seeded random generators: Haar unitaries, projections, PSD matrices, forms."""

from __future__ import annotations

import numpy as np

from .linalg import OrthoProjection, dagger, herm, projection_from_columns


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def haar_unitary(n: int, rng) -> np.ndarray:
    """Haar-distributed unitary via QR with phase fixing."""
    rng = rng_from(rng)
    q, r = np.linalg.qr(ginibre(n, n, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_isometry(n: int, k: int, rng) -> np.ndarray:
    """n x k matrix with orthonormal columns, Haar on the Stiefel manifold."""
    rng = rng_from(rng)
    if k == 0:
        return np.zeros((n, 0), dtype=complex)
    q, r = np.linalg.qr(ginibre(n, k, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_projection(n: int, k: int, rng) -> OrthoProjection:
    """Haar-random rank-k orthoprojection in dimension n."""
    if k == 0:
        return OrthoProjection(np.zeros((n, n), dtype=complex), 0, 1e-10)
    if k == n:
        return OrthoProjection(np.eye(n, dtype=complex), n, 1e-10)
    return projection_from_columns(haar_isometry(n, k, rng_from(rng)))


def random_hermitian(n: int, rng) -> np.ndarray:
    return herm(ginibre(n, n, rng_from(rng)))


def random_psd(n: int, rng, rank: int | None = None) -> np.ndarray:
    """Random PSD matrix (Wishart); optionally rank deficient."""
    rng = rng_from(rng)
    r = n if rank is None else rank
    if r == 0:
        return np.zeros((n, n), dtype=complex)
    g = ginibre(n, r, rng)
    return herm(g @ dagger(g))


def random_density(n: int, rng, rank: int | None = None) -> np.ndarray:
    """Random density matrix (trace one)."""
    w = random_psd(n, rng_from(rng), rank=rank)
    tr = np.trace(w).real
    if tr <= 0:
        w = np.eye(n, dtype=complex)
        tr = float(n)
    return w / tr


def random_invertible(n: int, rng, max_cond: float = 1e4) -> np.ndarray:
    """Random invertible matrix with bounded condition number."""
    rng = rng_from(rng)
    while True:
        x = ginibre(n, n, rng)
        s = np.linalg.svd(x, compute_uv=False)
        if s[0] / s[-1] < max_cond:
            return x


def random_unit_vector(n: int, rng) -> np.ndarray:
    rng = rng_from(rng)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)
