import numpy as np
import pytest

from parfid.errors import PremiseError, ValidationError
from parfid.forms import BlockAlgebra
from parfid.linalg import dagger, herm, op_norm
from parfid.pairs import (
    BlockProjection,
    MinimalPair,
    block_support,
    complete_pair,
    conjugate_pairs_element,
    make_minimal_pair,
    rank_k_pseudo_inverse,
    support_equivalence_under_conjugation,
    unitarily_equivalent,
)
from parfid.rand import random_invertible, random_psd, rng_from


def test_block_projection_construction():
    alg = BlockAlgebra((2, 3))
    q = BlockProjection.from_ranks(alg, (1, 2))
    assert q.total_rank == 3
    assert q.coranks == (1, 1)
    full = BlockProjection.identity(alg)
    assert full.ranks == (2, 3)
    with pytest.raises(ValidationError):
        BlockProjection(alg, [np.diag([0.5, 0.5]), np.eye(3)], (1, 3))


def test_block_support_and_equivalence():
    alg = BlockAlgebra((3,))
    rng = rng_from(20)
    x = random_psd(3, rng, rank=2)
    s = block_support(alg, [x])
    assert s.ranks == (2,)
    t = BlockProjection.from_ranks(alg, (2,))
    assert unitarily_equivalent(s, t)
    assert not unitarily_equivalent(s, BlockProjection.from_ranks(alg, (1,)))


def test_rank_k_pseudo_inverse():
    x = np.diag([4.0, 1.0, 0.25])
    inv, smallest = rank_k_pseudo_inverse(x, 2)
    assert smallest == pytest.approx(1.0)
    assert np.allclose(np.sort(np.diag(inv).real), [0.0, 0.25, 1.0])
    half, _ = rank_k_pseudo_inverse(x, 3, power=0.5)
    assert np.allclose(half @ half, np.linalg.inv(x), atol=1e-12)


def test_minimal_pair_isometry():
    alg = BlockAlgebra((3, 4))
    pair = make_minimal_pair(alg, (2, 2), seed=21)
    for v, pb, qb in zip(pair.isometry, pair.p.blocks, pair.q.blocks):
        assert np.allclose(dagger(v) @ v, pb, atol=1e-8)
        assert np.allclose(v @ dagger(v), qb, atol=1e-8)
    assert pair.conditioning() >= 1.0


def test_minimal_pair_rank_mismatch():
    alg = BlockAlgebra((3,))
    p = BlockProjection.from_ranks(alg, (1,))
    q = BlockProjection.from_ranks(alg, (2,))
    with pytest.raises(PremiseError):
        MinimalPair.build(p, q)


def test_complete_pair_identities():
    rng = rng_from(22)
    alg = BlockAlgebra((4,))
    pair = make_minimal_pair(alg, (2,), seed=23)
    # locally invertible a with support p
    pb = pair.p.blocks[0]
    g = random_invertible(4, rng)
    a = herm(pb @ g @ g.conj().T @ pb)
    elem = complete_pair([a], pair)
    ab, bb = elem.a[0], elem.b[0]
    assert op_norm(ab @ bb @ ab - ab) <= 1e-8 * max(op_norm(ab), 1.0)
    assert op_norm(bb @ ab @ bb - bb) <= 1e-8 * max(op_norm(bb), 1.0)


def test_complete_pair_rejects_wrong_support():
    rng = rng_from(24)
    alg = BlockAlgebra((4,))
    pair = make_minimal_pair(alg, (2,), seed=25)
    with pytest.raises(PremiseError):
        complete_pair([random_psd(4, rng, rank=3)], pair)


def test_conjugation_round_trip():
    rng = rng_from(26)
    alg = BlockAlgebra((3,))
    pair = make_minimal_pair(alg, (2,), seed=27)
    pb = pair.p.blocks[0]
    g = random_invertible(3, rng)
    a = herm(pb @ g @ g.conj().T @ pb)
    elem = complete_pair([a], pair)
    y = [random_invertible(3, rng, max_cond=50.0)]
    moved = conjugate_pairs_element(elem, y)
    moved.validate()
    back = conjugate_pairs_element(moved, [np.linalg.inv(y[0])])
    assert np.allclose(back.a[0], elem.a[0], atol=1e-8)
    assert np.allclose(back.b[0], elem.b[0], atol=1e-8)


def test_support_equivalence_under_conjugation():
    rng = rng_from(28)
    alg = BlockAlgebra((2, 3))
    x = [random_psd(2, rng, rank=1), random_psd(3, rng, rank=2)]
    y = [random_invertible(2, rng), random_invertible(3, rng)]
    sx, sy, same = support_equivalence_under_conjugation(x, y, alg)
    assert same
    assert sx.ranks == sy.ranks == (1, 2)
