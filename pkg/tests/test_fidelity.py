import numpy as np
import pytest

from parfid.errors import PremiseError, ValidationError
from parfid.fidelity import (
    FidelityReport,
    OptimizerConfig,
    bures_distance,
    check_hereditarity,
    check_star_invariance,
    check_subadditivity,
    fidelity_pure_vs_mixed,
    fidelity_special_cases,
    fidelity_value,
    fidelity_variational,
    variational_objective,
)
from parfid.forms import BlockAlgebra, PositiveForm, inner_derived, random_form
from parfid.linalg import dagger, herm
from parfid.pairs import BlockProjection
from parfid.rand import (
    ginibre,
    haar_unitary,
    random_density,
    random_invertible,
    random_unit_vector,
    rng_from,
)


def state(diag):
    return PositiveForm.from_matrix(np.diag(diag))


def test_fidelity_closed_form_examples():
    assert fidelity_value(state([0.5, 0.5]), state([0.5, 0.5])) == pytest.approx(1.0)
    assert fidelity_value(state([1.0, 0.0]), state([0.0, 1.0])) == pytest.approx(0.0)
    f = fidelity_value(state([0.5, 0.5]), state([0.1, 0.9]))
    assert f == pytest.approx(np.sqrt(0.05) + np.sqrt(0.45), abs=1e-12)
    assert f == pytest.approx(0.894427, abs=1e-6)


def test_fidelity_symmetry_and_bounds():
    rng = rng_from(30)
    alg = BlockAlgebra((3,))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    f = fidelity_value(w, r)
    assert f == pytest.approx(fidelity_value(r, w), abs=1e-12)
    assert 0.0 <= f <= np.sqrt(w.total() * r.total()) + 1e-11


def test_pure_vs_mixed_shortcut():
    rng = rng_from(31)
    w = PositiveForm.from_matrix(random_density(3, rng))
    psi = random_unit_vector(3, rng)
    rho = PositiveForm.from_matrix(np.outer(psi, psi.conj()))
    assert fidelity_pure_vs_mixed(w, psi) == pytest.approx(
        fidelity_value(w, rho), abs=1e-10
    )


def test_bures_distance_endpoints():
    assert bures_distance(state([0.5, 0.5]), state([0.5, 0.5])) == pytest.approx(0.0)
    assert bures_distance(state([1.0, 0.0]), state([0.0, 1.0])) == pytest.approx(
        np.sqrt(2.0)
    )
    with pytest.raises(PremiseError):
        bures_distance(state([0.5, 0.5]).scaled(2.0), state([0.5, 0.5]))


def test_report_and_config_validation():
    with pytest.raises(ValidationError):
        FidelityReport(value=-1e-6, route="spectral")
    r = FidelityReport(value=-1e-13, route="spectral")
    assert r.value == 0.0
    with pytest.raises(ValidationError):
        OptimizerConfig(max_iters=0)
    with pytest.raises(ValidationError):
        OptimizerConfig(tol=1e-13)


def test_variational_route_matches_spectral():
    rng = rng_from(32)
    alg = BlockAlgebra((2, 3))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    rep = fidelity_variational(w, r)
    assert rep.converged
    assert rep.value == pytest.approx(fidelity_value(w, r), abs=1e-6)
    # every iterate is an upper bound and the history is monotone
    hist = np.array(rep.bound_history)
    assert np.all(np.diff(hist) <= 1e-12)
    assert hist[-1] >= fidelity_value(w, r) - 1e-9


def test_variational_gradient_matches_finite_differences():
    rng = rng_from(33)
    alg = BlockAlgebra((3,))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    h = [0.4 * herm(ginibre(3, 3, rng))]
    d = [herm(ginibre(3, 3, rng))]
    _, grads = variational_objective(w, r, h)
    eps = 1e-6
    up, _ = variational_objective(w, r, [h[0] + eps * d[0]])
    dn, _ = variational_objective(w, r, [h[0] - eps * d[0]])
    numeric = (up - dn) / (2 * eps)
    analytic = float(np.real(np.vdot(grads[0], d[0])))
    assert analytic == pytest.approx(numeric, rel=1e-5)


def test_star_invariance():
    rng = rng_from(34)
    alg = BlockAlgebra((3,))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    a = [ginibre(3, 3, rng)]
    b = [ginibre(3, 3, rng)]
    c = [random_invertible(3, rng)]
    d = [np.linalg.inv(dagger(c[0])) @ dagger(a[0]) @ b[0]]
    f_ab, f_cd = check_star_invariance(w, r, a, b, c, d)
    assert f_ab == pytest.approx(f_cd, abs=1e-9)
    with pytest.raises(PremiseError):
        check_star_invariance(w, r, a, b, c, [ginibre(3, 3, rng)])


def test_special_cases_dispatch():
    rng = rng_from(35)
    alg = BlockAlgebra((3,))
    mu = random_form(alg, rng)
    # a* b positive semidefinite
    a = [random_invertible(3, rng)]
    psd = random_density(3, rng)
    b = [np.linalg.inv(dagger(a[0])) @ psd]
    val = fidelity_special_cases(mu, a, b)
    assert val is not None
    assert val == pytest.approx(
        fidelity_value(inner_derived(mu, a), inner_derived(mu, b)), abs=1e-9
    )
    # tracial state, generic arguments
    tr_mu = PositiveForm(alg, [np.eye(3) / 3])
    a2 = [ginibre(3, 3, rng)]
    b2 = [ginibre(3, 3, rng)]
    val2 = fidelity_special_cases(tr_mu, a2, b2)
    assert val2 == pytest.approx(
        fidelity_value(inner_derived(tr_mu, a2), inner_derived(tr_mu, b2)), abs=1e-9
    )
    # no hypothesis applies
    assert fidelity_special_cases(mu, a2, b2) is None


def test_subadditivity():
    rng = rng_from(36)
    alg = BlockAlgebra((3,))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    parts = [([ginibre(3, 3, rng)], [ginibre(3, 3, rng)]) for _ in range(3)]
    total = sum(dagger(aj[0]) @ bj[0] for aj, bj in parts)
    a = [np.eye(3, dtype=complex)]
    b = [total]
    lhs, rhs = check_subadditivity(w, r, a, b, parts)
    assert lhs <= rhs + 1e-9


def test_hereditarity():
    rng = rng_from(37)
    alg = BlockAlgebra((2, 3))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    q = BlockProjection.from_ranks(alg, (1, 2))
    f_corner, f_derived = check_hereditarity(w, r, q)
    assert f_corner == pytest.approx(f_derived, abs=1e-9)


def test_unitary_invariance():
    rng = rng_from(38)
    alg = BlockAlgebra((4,))
    w = random_form(alg, rng)
    r = random_form(alg, rng)
    u = [haar_unitary(4, rng)]
    assert fidelity_value(inner_derived(w, u), inner_derived(r, u)) == pytest.approx(
        fidelity_value(w, r), abs=1e-10
    )
