"""Minimal pairs of orthoprojections and PAIRS elements on block algebras.

A PAIRS element is a pair (a, b) of locally invertible PSD block matrices
with aba = a and bab = b; its supports {p, q} form a minimal pair of
orthoprojections, and b is recovered from a through the completion formula
b = q |qp|^-2 a^-1 |qp|^-2 q.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import PremiseError, ShapeMismatchError, ValidationError
from .forms import BlockAlgebra
from .linalg import dagger, herm, op_norm
from .rand import haar_projection, rng_from


@dataclass(frozen=True)
class BlockProjection:
    """Orthoprojection in a block algebra; class data = per-block ranks."""

    algebra: BlockAlgebra
    blocks: list = field(compare=False)
    ranks: tuple

    def __post_init__(self):
        blocks = self.algebra.check_blocks(self.blocks)
        ranks = tuple(int(r) for r in self.ranks)
        if len(ranks) != self.algebra.n_blocks:
            raise ShapeMismatchError("one rank per block required")
        for b, r, n in zip(blocks, ranks, self.algebra.block_dims):
            if not (0 <= r <= n):
                raise ValidationError(f"rank {r} out of range for block dim {n}")
            linalg.OrthoProjection(herm(b), r, 1e-10)  # validates
        object.__setattr__(self, "blocks", [herm(b) for b in blocks])
        object.__setattr__(self, "ranks", ranks)

    @classmethod
    def from_ranks(cls, algebra: BlockAlgebra, ranks) -> "BlockProjection":
        """Diagonal projections onto the first rank_k coordinates."""
        blocks = []
        for n, r in zip(algebra.block_dims, ranks):
            p = np.zeros((n, n), dtype=complex)
            p[np.arange(r), np.arange(r)] = 1.0
            blocks.append(p)
        return cls(algebra, blocks, tuple(int(r) for r in ranks))

    @classmethod
    def identity(cls, algebra: BlockAlgebra) -> "BlockProjection":
        return cls(algebra, algebra.identity(), tuple(algebra.block_dims))

    @property
    def total_rank(self) -> int:
        return sum(self.ranks)

    @property
    def coranks(self) -> tuple:
        return tuple(n - r for n, r in zip(self.algebra.block_dims, self.ranks))


def block_support(algebra: BlockAlgebra, blocks, tol=None) -> BlockProjection:
    sups = [linalg.support(b, tol) for b in blocks]
    return BlockProjection(algebra, [s.matrix for s in sups], tuple(s.rank for s in sups))


def unitarily_equivalent(p: BlockProjection, q: BlockProjection) -> bool:
    """p ~ q per block by rank; coranks checked redundantly."""
    if p.algebra != q.algebra:
        raise ShapeMismatchError("projections live on different algebras")
    return p.ranks == q.ranks and p.coranks == q.coranks


def rank_k_pseudo_inverse(x: np.ndarray, k: int, power: float = 1.0):
    """Inverse k-th power on the span of the k largest eigenvalues of PSD x.

    Returns (matrix, smallest kept eigenvalue) so callers can report
    conditioning. Rank is prescribed, not detected.
    """
    dec = linalg.eigh(x)
    n = x.shape[0]
    vals = np.clip(dec.eigenvalues, 0.0, None)
    out = np.zeros(n)
    if k > 0:
        kept = vals[n - k :]
        out[n - k :] = 1.0 / np.maximum(kept, 1e-300) ** power
    u = dec.vectors
    m = herm((u * out) @ dagger(u))
    smallest = float(vals[n - k]) if k > 0 else np.inf
    return m, smallest


@dataclass(frozen=True)
class MinimalPair:
    """Pair {p, q} with s(pqp) = p, s(qpq) = q and |qp| locally invertible.

    Caches, per block: |qp|, |qp|^-2 and the partial isometry v = qp |qp|^-1
    with v* v = p, v v* = q.
    """

    p: BlockProjection
    q: BlockProjection
    qp_modulus: list = field(compare=False)
    qp_inv_sq: list = field(compare=False)
    isometry: list = field(compare=False)

    @classmethod
    def build(cls, p: BlockProjection, q: BlockProjection, tol: float = 1e-9) -> "MinimalPair":
        if p.algebra != q.algebra:
            raise ShapeMismatchError("projections live on different algebras")
        if p.ranks != q.ranks:
            raise PremiseError(f"ranks differ per block: {p.ranks} vs {q.ranks}")
        mods, invs, isos = [], [], []
        for pb, qb, r in zip(p.blocks, q.blocks, p.ranks):
            qp = qb @ pb
            pqp = herm(pb @ qb @ pb)
            inv_sq, smallest = rank_k_pseudo_inverse(pqp, r)
            if r > 0 and smallest <= 1e-12:
                raise ValidationError(
                    f"|qp| not locally invertible: smallest kept eigenvalue {smallest:.3e}"
                )
            inv_mod, _ = rank_k_pseudo_inverse(pqp, r, power=0.5)
            v = qp @ inv_mod
            mods.append(linalg.sqrt_psd(pqp))
            invs.append(inv_sq)
            isos.append(v)
        pair = cls(p=p, q=q, qp_modulus=mods, qp_inv_sq=invs, isometry=isos)
        pair.validate(tol)
        return pair

    def validate(self, tol: float = 1e-9):
        for pb, qb, v, mod, r in zip(
            self.p.blocks, self.q.blocks, self.isometry, self.qp_modulus, self.p.ranks
        ):
            if r == 0:
                continue
            if op_norm(dagger(v) @ v - pb) > tol:
                raise ValidationError("v* v differs from p beyond tolerance")
            if op_norm(v @ dagger(v) - qb) > tol:
                raise ValidationError("v v* differs from q beyond tolerance")
            inv_mod, _ = rank_k_pseudo_inverse(herm(mod @ mod), r, power=0.5)
            if op_norm(v - qb @ pb @ inv_mod) > tol:
                raise ValidationError("v differs from qp |qp|^-1 beyond tolerance")
        # support conditions s(pqp) = p, s(qpq) = q
        for pb, qb, r in zip(self.p.blocks, self.q.blocks, self.p.ranks):
            for a, target in ((herm(pb @ qb @ pb), pb), (herm(qb @ pb @ qb), qb)):
                s = linalg.support(a, tol=1e-12 if r == 0 else None)
                if s.rank != r:
                    raise ValidationError("support of pqp/qpq has wrong rank")

    @property
    def algebra(self) -> BlockAlgebra:
        return self.p.algebra

    @property
    def ranks(self) -> tuple:
        return self.p.ranks

    def conditioning(self) -> float:
        """Largest norm of the cached |qp|^-2 blocks."""
        return max((op_norm(z) for z in self.qp_inv_sq), default=0.0)


def make_minimal_pair(algebra: BlockAlgebra, block_ranks, seed, gap_floor: float = 1e-6,
                      max_tries: int = 100) -> MinimalPair:
    """Haar-random minimal pair of the given per-block ranks.

    Retries with derived seeds until the smallest kept eigenvalue of pqp
    exceeds gap_floor in every nonzero block.
    """
    ranks = tuple(int(r) for r in block_ranks)
    if sum(ranks) == 0:
        raise PremiseError("zero-rank class: the q = 0 case is handled separately")
    base = rng_from(seed)
    for _ in range(max_tries):
        pb, qb = [], []
        ok = True
        for n, r in zip(algebra.block_dims, ranks):
            pb.append(haar_projection(n, r, base).matrix)
            qb.append(haar_projection(n, r, base).matrix)
        p = BlockProjection(algebra, pb, ranks)
        q = BlockProjection(algebra, qb, ranks)
        for pbk, qbk, r in zip(p.blocks, q.blocks, ranks):
            if r == 0:
                continue
            _, smallest = rank_k_pseudo_inverse(herm(pbk @ qbk @ pbk), r)
            if smallest < gap_floor:
                ok = False
                break
        if ok:
            return MinimalPair.build(p, q)
    raise ValidationError(f"no admissible pair after {max_tries} tries")


@dataclass(frozen=True)
class PairsElement:
    """(a, b) in PAIRS_q(M): aba = a, bab = b, s(a) ~ s(b) ~ class ranks."""

    algebra: BlockAlgebra
    a: list = field(compare=False)
    b: list = field(compare=False)
    class_ranks: tuple = ()

    def validate(self, tol: float = 1e-8):
        scale = max(
            max((op_norm(x) for x in self.a), default=1.0),
            max((op_norm(x) for x in self.b), default=1.0),
            1.0,
        )
        for ab, bb in zip(self.a, self.b):
            if op_norm(ab @ bb @ ab - ab) > tol * scale:
                raise ValidationError("aba = a fails beyond tolerance")
            if op_norm(bb @ ab @ bb - bb) > tol * scale:
                raise ValidationError("bab = b fails beyond tolerance")
        sa = block_support(self.algebra, self.a)
        sb = block_support(self.algebra, self.b)
        if not (sa.ranks == sb.ranks == self.class_ranks):
            raise ValidationError(
                f"support ranks {sa.ranks}, {sb.ranks} differ from class {self.class_ranks}"
            )
        if not (sa.coranks == sb.coranks):
            raise ValidationError("coranks disagree")


def complete_pair(a_blocks, pair: MinimalPair, tol: float = 1e-8) -> PairsElement:
    """Complete locally invertible a with s(a) = p to a PAIRS element via
    b = q |qp|^-2 a^-1 |qp|^-2 q."""
    algebra = pair.algebra
    a_blocks = algebra.check_blocks(a_blocks)
    sa = block_support(algebra, a_blocks)
    if sa.ranks != pair.p.ranks or any(
        op_norm(s - pb) > 1e-7 for s, pb in zip(sa.blocks, pair.p.blocks)
    ):
        raise PremiseError("support of a differs from the pair's p")
    b_blocks = []
    for ab, qb, z, r in zip(a_blocks, pair.q.blocks, pair.qp_inv_sq, pair.ranks):
        a_inv, _ = rank_k_pseudo_inverse(herm(ab), r)
        b_blocks.append(herm(qb @ z @ a_inv @ z @ qb))
    elem = PairsElement(algebra=algebra, a=a_blocks, b=b_blocks, class_ranks=pair.ranks)
    elem.validate(tol)
    return elem


def conjugate_pairs_element(elem: PairsElement, y_blocks, max_cond: float = 1e8) -> PairsElement:
    """Conjugation action on a pair: (a, b) -> (y* a y, y^-1 b y^-1*)."""
    y_blocks = elem.algebra.check_blocks(y_blocks)
    for y in y_blocks:
        s = np.linalg.svd(y, compute_uv=False)
        if s[-1] <= 0 or s[0] / s[-1] > max_cond:
            raise PremiseError("y is not invertible within the conditioning bound")
    a_new, b_new = [], []
    for ab, bb, y in zip(elem.a, elem.b, y_blocks):
        yi = np.linalg.inv(y)
        a_new.append(herm(dagger(y) @ ab @ y))
        b_new.append(herm(yi @ bb @ dagger(yi)))
    out = PairsElement(algebra=elem.algebra, a=a_new, b=b_new, class_ranks=elem.class_ranks)
    out.validate()
    return out


def support_equivalence_under_conjugation(x_blocks, y_blocks, algebra: BlockAlgebra):
    """Returns (s(x), s(y* x y), verdict): the supports are equivalent for
    every PSD x and invertible y."""
    x_blocks = algebra.check_blocks(x_blocks)
    y_blocks = algebra.check_blocks(y_blocks)
    sx = block_support(algebra, x_blocks)
    conj = [herm(dagger(y) @ x @ y) for x, y in zip(x_blocks, y_blocks)]
    sy = block_support(algebra, conj)
    return sx, sy, unitarily_equivalent(sx, sy)
