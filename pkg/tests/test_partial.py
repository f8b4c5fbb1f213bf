import numpy as np
import pytest

from parfid.errors import PremiseError, ShapeMismatchError, ValidationError
from parfid.fidelity import fidelity_value
from parfid.forms import BlockAlgebra, PositiveForm, Trace, random_form
from parfid.linalg import op_norm
from parfid.partial import (
    SearchConfig,
    check_partial_invariance,
    check_sandwich,
    partial_fidelity_direct_sum,
    partial_fidelity_sampling,
    partial_fidelity_spectral,
    partial_fidelity_variational,
    profile,
    resolve_ranks,
)
from parfid.rand import ginibre, random_invertible, random_psd, rng_from


def state(diag):
    return PositiveForm.from_matrix(np.diag(diag))


def test_resolve_ranks():
    single = BlockAlgebra((3,))
    assert resolve_ranks(single, 2) == (2,)
    blocks = BlockAlgebra((2, 3))
    assert resolve_ranks(blocks, (1, 3)) == (1, 3)
    with pytest.raises(ValidationError):
        resolve_ranks(single, 4)
    with pytest.raises(ShapeMismatchError):
        resolve_ranks(blocks, (1,))
    with pytest.raises(ValidationError):
        resolve_ranks(blocks, (-1, 2))


def test_diagonal_example():
    w = state([0.5, 0.5])
    r = state([0.1, 0.9])
    tau = Trace.standard(w.algebra)
    v0, _ = partial_fidelity_spectral(w, r, tau, 0)
    v1, _ = partial_fidelity_spectral(w, r, tau, 1)
    v2, _ = partial_fidelity_spectral(w, r, tau, 2)
    assert v0 == pytest.approx(0.0, abs=1e-12)
    assert v1 == pytest.approx(np.sqrt(0.05), abs=1e-10)
    assert v2 == pytest.approx(np.sqrt(0.05) + np.sqrt(0.45), abs=1e-10)


def test_minimizer_commutes_and_has_prescribed_rank():
    rng = rng_from(40)
    alg = BlockAlgebra((4,))
    w = random_form(alg, rng)
    r = random_form(alg, rng, ranks=(3,))
    tau = Trace.standard(alg)
    val, q0 = partial_fidelity_spectral(w, r, tau, 2)
    assert q0.ranks == (2,)
    assert val >= -1e-12


def test_trace_weights_cancel():
    rng = rng_from(41)
    alg = BlockAlgebra((2, 3))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    v1, _ = partial_fidelity_spectral(w, r, Trace.standard(alg), (1, 2))
    v2, _ = partial_fidelity_spectral(w, r, Trace(alg, (3.0, 0.25)), (1, 2))
    assert v1 == pytest.approx(v2, abs=1e-10)


def test_endpoints():
    rng = rng_from(42)
    alg = BlockAlgebra((3,))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    tau = Trace.standard(alg)
    v0, _ = partial_fidelity_spectral(w, r, tau, 0)
    vfull, _ = partial_fidelity_spectral(w, r, tau, 3)
    assert v0 == 0.0
    assert vfull == pytest.approx(fidelity_value(w, r), abs=1e-10)


def test_sampling_route_upper_bounds_spectral():
    rng = rng_from(43)
    alg = BlockAlgebra((3,))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    tau = Trace.standard(alg)
    spectral, _ = partial_fidelity_spectral(w, r, tau, 2)
    sampled = partial_fidelity_sampling(w, r, tau, 2, n_samples=4000, seed=7)
    assert sampled >= spectral - 1e-9
    assert sampled - spectral <= 5e-3


def test_variational_route_matches_spectral():
    rng = rng_from(44)
    alg = BlockAlgebra((4,))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    tau = Trace.standard(alg)
    spectral, _ = partial_fidelity_spectral(w, r, tau, 2)
    rep = partial_fidelity_variational(w, r, 2)
    assert rep.value >= spectral - 1e-9
    assert rep.value - spectral <= 1e-3
    hist = np.array(rep.bound_history)
    assert np.all(np.diff(hist) <= 1e-12)


def test_variational_zero_rank_short_circuit():
    rng = rng_from(45)
    alg = BlockAlgebra((3,))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    rep = partial_fidelity_variational(w, r, 0)
    assert rep.value == 0.0 and rep.converged


def test_partial_invariance():
    rng = rng_from(46)
    alg = BlockAlgebra((3,))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    tau = Trace.standard(alg)
    a = [random_invertible(3, rng)]
    b = [random_invertible(3, rng)]
    c = [random_invertible(3, rng)]
    d = [np.linalg.inv(c[0].conj().T) @ a[0].conj().T @ b[0]]
    f1, f2 = check_partial_invariance(w, r, tau, 2, a, b, c, d)
    assert f1 == pytest.approx(f2, abs=1e-8)
    with pytest.raises(PremiseError):
        bad = [np.diag([1.0, 1.0, 0.0]).astype(complex)]
        check_partial_invariance(w, r, tau, 2, bad, b, c, d)


def test_sandwich_chain():
    rng = rng_from(47)
    alg = BlockAlgebra((2, 3))
    tau = Trace(alg, (1.0, 2.0))
    a = [random_psd(2, rng), random_psd(3, rng)]
    b = [random_psd(2, rng), random_psd(3, rng)]
    lower, value, upper = check_sandwich(tau, a, b, (1, 2), n_samples=100, seed=3)
    assert lower <= value + 1e-9
    assert value <= upper + 1e-9
    indefinite = np.diag([1.0, -1.0]).astype(complex)
    with pytest.raises(PremiseError):
        check_sandwich(tau, [indefinite, a[1]], b, (1, 2))


def test_direct_sum_additivity():
    rng = rng_from(48)
    alg = BlockAlgebra((2, 3))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    tau = Trace(alg, (1.0, 0.5))
    total = partial_fidelity_direct_sum(w, r, tau, (1, 2))
    whole, _ = partial_fidelity_spectral(w, r, tau, (1, 2))
    assert total == pytest.approx(whole, abs=1e-10)


def test_profile_properties():
    rng = rng_from(49)
    alg = BlockAlgebra((4,))
    w = random_form(alg, rng)
    r = random_form(alg, rng, ranks=(2,))
    prof = profile(w, r)
    assert prof.monotone_nondecreasing()
    assert prof.values[0] == 0.0
    assert prof.values[-1] == pytest.approx(prof.fidelity, abs=1e-10)
    assert prof.fidelity <= np.sqrt(w.total() * r.total()) + 1e-11


def test_profile_block_algebra():
    rng = rng_from(50)
    alg = BlockAlgebra((2, 2))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    prof = profile(w, r)
    assert len(prof.by_ranks) == 9
    assert prof.by_ranks[(0, 0)] == 0.0
    assert prof.by_ranks[(2, 2)] == pytest.approx(prof.fidelity, abs=1e-10)
    assert prof.monotone_nondecreasing()


def test_search_config_validation():
    with pytest.raises(ValidationError):
        SearchConfig(max_iters=0)
    with pytest.raises(ValidationError):
        SearchConfig(init_step=-1.0)


def test_algebra_mismatch():
    rng = rng_from(51)
    w = random_form(BlockAlgebra((3,)), rng)
    r = random_form(BlockAlgebra((4,)), rng)
    with pytest.raises(ShapeMismatchError):
        partial_fidelity_variational(w, r, 1)
