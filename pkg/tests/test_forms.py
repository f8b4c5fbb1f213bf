import numpy as np
import pytest

from parfid.errors import ShapeMismatchError, ValidationError
from parfid.forms import (
    BlockAlgebra,
    PositiveForm,
    Trace,
    evaluate,
    form_from_trace_vector,
    in_centralizer,
    inner_derived,
    is_tracial,
    orthogonal,
    random_form,
    sqrt_density_rep,
)
from parfid.rand import ginibre, random_psd, rng_from


def test_block_algebra_basics():
    alg = BlockAlgebra((2, 3))
    assert alg.n_blocks == 2
    assert alg.total_dim == 5
    ident = alg.identity()
    assert np.allclose(ident[0], np.eye(2)) and np.allclose(ident[1], np.eye(3))
    with pytest.raises(ValidationError):
        BlockAlgebra((0,))
    with pytest.raises(ValidationError):
        BlockAlgebra((65,))


def test_assemble_is_block_diagonal():
    alg = BlockAlgebra((2, 2))
    blocks = [np.ones((2, 2)), 2 * np.ones((2, 2))]
    full = alg.assemble(blocks)
    assert full.shape == (4, 4)
    assert np.allclose(full[:2, 2:], 0)


def test_trace_validation_and_value():
    alg = BlockAlgebra((2, 3))
    with pytest.raises(ValidationError):
        Trace(alg, (1.0, -1.0))
    with pytest.raises(ShapeMismatchError):
        Trace(alg, (1.0,))
    tau = Trace(alg, (2.0, 0.5))
    assert tau(alg.identity()) == pytest.approx(2 * 2 + 0.5 * 3)


def test_positive_form_validation():
    alg = BlockAlgebra((2,))
    with pytest.raises(ValidationError):
        PositiveForm(alg, [np.diag([1.0, -0.1])])
    w = PositiveForm(alg, [np.diag([0.4, 0.6])])
    assert w.is_state()
    assert w.scaled(2.0).total() == pytest.approx(2.0)
    assert (w + w).total() == pytest.approx(2.0)


def test_evaluate_and_inner_derived():
    rng = rng_from(10)
    alg = BlockAlgebra((3,))
    w = random_form(alg, rng)
    a = ginibre(3, 3, rng)
    derived = inner_derived(w, [a])
    x = random_psd(3, rng)
    direct = evaluate(w, [a.conj().T @ x @ a])
    assert evaluate(derived, [x]) == pytest.approx(direct, abs=1e-10)


def test_sqrt_density_rep_round_trip():
    rng = rng_from(11)
    alg = BlockAlgebra((2, 3))
    tau = Trace(alg, (2.0, 0.7))
    w = random_form(alg, rng)
    x = sqrt_density_rep(w, tau)
    back = form_from_trace_vector(tau, x)
    for d1, d2 in zip(w.densities, back.densities):
        assert np.allclose(d1, d2, atol=1e-10)


def test_in_centralizer():
    rng = rng_from(12)
    alg = BlockAlgebra((4,))
    w = random_form(alg, rng)
    d = w.densities[0]
    assert in_centralizer(w, [d @ d + 0.3 * d])
    y = ginibre(4, 4, rng)
    assert not in_centralizer(w, [y])


def test_is_tracial_and_orthogonal():
    alg = BlockAlgebra((2, 2))
    tracial = PositiveForm(alg, [0.5 * np.eye(2), 1.5 * np.eye(2)])
    assert is_tracial(tracial)
    rng = rng_from(13)
    assert not is_tracial(random_form(alg, rng))
    a = PositiveForm(alg, [np.diag([1.0, 0.0]), np.zeros((2, 2))])
    b = PositiveForm(alg, [np.diag([0.0, 1.0]), np.eye(2)])
    assert orthogonal(a, b)
    assert not orthogonal(a, a)


def test_random_form_rank_control():
    rng = rng_from(14)
    alg = BlockAlgebra((4, 3))
    w = random_form(alg, rng, ranks=(2, 1))
    sup = w.support()
    assert sup[0].rank == 2 and sup[1].rank == 1
    assert w.is_state()
