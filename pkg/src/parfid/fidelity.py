"""Fidelity of pairs of positive forms.

Three faces of the same quantity: the spectral closed form
F = sum_k tr |sqrt(w_k) sqrt(r_k)|, the variational representation
F = inf over invertible PSD a of (omega(a) + rho(a^-1)) / 2, and the
closed-form special cases for inner-derived forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import PremiseError, ShapeMismatchError, ValidationError
from .forms import (
    BlockAlgebra,
    PositiveForm,
    evaluate,
    in_centralizer,
    inner_derived,
    is_tracial,
)
from .linalg import dagger, herm, op_norm
from .pairs import BlockProjection
from .rand import rng_from, random_hermitian


@dataclass(frozen=True)
class FidelityReport:
    value: float
    route: str
    iterations: int = 0
    residual: float = 0.0
    conditioning: float = 1.0
    converged: bool = True
    bound_history: tuple = field(default=(), compare=False)

    def __post_init__(self):
        v = float(self.value)
        if v < -1e-12:
            raise ValidationError(f"fidelity value {v} below -1e-12")
        object.__setattr__(self, "value", max(v, 0.0))


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 5000
    tol: float = 1e-10
    restarts: int = 1
    seed: int = 0
    init_step: float = 1.0
    backtrack: float = 0.5
    armijo: float = 1e-4
    grow: float = 1.2

    def __post_init__(self):
        if self.max_iters <= 0 or self.init_step <= 0 or not (0 < self.backtrack < 1):
            raise ValidationError("optimizer parameters must be positive")
        if self.tol < 1e-12:
            raise ValidationError("tolerance below 1e-12 is not resolvable")


def _check_same_algebra(a: PositiveForm, b: PositiveForm):
    if a.algebra != b.algebra:
        raise ShapeMismatchError("forms live on different algebras")


def fidelity_value(omega: PositiveForm, rho: PositiveForm) -> float:
    """Closed form sum_k tr |sqrt(w_k) sqrt(r_k)|."""
    _check_same_algebra(omega, rho)
    total = 0.0
    for w, r in zip(omega.densities, rho.densities):
        total += linalg.trace_norm(linalg.sqrt_psd(w) @ linalg.sqrt_psd(r))
    return total


def fidelity_spectral(omega: PositiveForm, rho: PositiveForm) -> FidelityReport:
    return FidelityReport(value=fidelity_value(omega, rho), route="spectral")


def fidelity_pure_vs_mixed(omega: PositiveForm, psi: np.ndarray) -> float:
    """F between omega and the pure state of unit vector psi: sqrt(<w psi, psi>)."""
    if omega.algebra.n_blocks != 1:
        raise PremiseError("pure-state shortcut requires a single-block algebra")
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise PremiseError("psi must be a unit vector")
    w = omega.densities[0]
    val = float(np.real(np.conjugate(psi) @ w @ psi))
    return float(np.sqrt(max(val, 0.0)))


def bures_distance(omega: PositiveForm, rho: PositiveForm) -> float:
    """d_B = sqrt(2 (1 - F)) for states."""
    if abs(omega.total() - 1.0) > 1e-10 or abs(rho.total() - 1.0) > 1e-10:
        raise PremiseError("Bures distance is defined here for states (trace one)")
    f = min(fidelity_value(omega, rho), 1.0)
    return float(np.sqrt(2.0 * (1.0 - f)))


# --- variational route -------------------------------------------------------


def _exp_blocks(h_blocks, sign=1.0):
    out = []
    decs = []
    for h in h_blocks:
        dec = linalg.eigh(h)
        decs.append(dec)
        u = dec.vectors
        out.append(herm((u * np.exp(sign * dec.eigenvalues)) @ dagger(u)))
    return out, decs


def _grad_trace_exp(w, dec, sign=1.0):
    """Gradient G (Hermitian) of H -> tr(w exp(sign * H)) with inner product
    Re tr(G X), via the Daleckii-Krein divided-difference formula."""
    lam = sign * dec.eigenvalues
    u = dec.vectors
    e = np.exp(lam)
    diff = lam[:, None] - lam[None, :]
    close = np.abs(diff) < 1e-12
    safe = np.where(close, 1.0, diff)
    # coincident eigenvalues take the derivative limit exp((l_i + l_j) / 2)
    phi = np.where(
        close,
        np.exp(0.5 * (lam[:, None] + lam[None, :])),
        (e[:, None] - e[None, :]) / safe,
    )
    wt = dagger(u) @ w @ u
    return sign * herm(u @ (wt * phi) @ dagger(u))


def variational_objective(omega: PositiveForm, rho: PositiveForm, h_blocks):
    """(omega(e^H) + rho(e^-H)) / 2 together with its gradient blocks."""
    eh, decs = _exp_blocks(h_blocks, 1.0)
    emh = []
    for dec in decs:
        u = dec.vectors
        emh.append(herm((u * np.exp(-dec.eigenvalues)) @ dagger(u)))
    val = 0.5 * (evaluate(omega, eh) + evaluate(rho, emh))
    grads = []
    for w, r, dec in zip(omega.densities, rho.densities, decs):
        g1 = _grad_trace_exp(w, dec, 1.0)
        g2 = _grad_trace_exp(r, dec, -1.0)
        grads.append(0.5 * (g1 + g2))
    return val, grads


def fidelity_variational(
    omega: PositiveForm, rho: PositiveForm, cfg: OptimizerConfig | None = None
) -> FidelityReport:
    """Minimize (omega(e^H) + rho(e^-H)) / 2 over Hermitian block H.

    Every iterate is a certified upper bound on the fidelity; the report
    carries the monotone bound history. Non-convergence is flagged, not
    raised.
    """
    _check_same_algebra(omega, rho)
    cfg = cfg or OptimizerConfig()
    dims = omega.algebra.block_dims
    rng = rng_from(cfg.seed)

    def descend(h_blocks):
        val, grads = variational_objective(omega, rho, h_blocks)
        step = cfg.init_step
        history = [val]
        iters = 0
        for iters in range(1, cfg.max_iters + 1):
            gnorm_sq = sum(float(np.real(np.vdot(g, g))) for g in grads)
            if gnorm_sq == 0.0:
                break
            accepted = False
            while step > 1e-18:
                trial = [h - step * g for h, g in zip(h_blocks, grads)]
                tval, tgrads = variational_objective(omega, rho, trial)
                if tval <= val - cfg.armijo * step * gnorm_sq:
                    accepted = True
                    break
                step *= cfg.backtrack
            if not accepted:
                break
            rel_drop = (val - tval) / max(abs(val), 1.0)
            h_blocks, val, grads = trial, tval, tgrads
            history.append(val)
            step *= cfg.grow
            if rel_drop < cfg.tol:
                break
        gnorm = np.sqrt(sum(float(np.real(np.vdot(g, g))) for g in grads))
        return val, iters, gnorm, history

    starts = [[np.zeros((n, n), dtype=complex) for n in dims]]
    for _ in range(max(cfg.restarts - 1, 0)):
        starts.append([0.3 * random_hermitian(n, rng) for n in dims])

    best = None
    for h0 in starts:
        val, iters, gnorm, history = descend(h0)
        if best is None or val < best[0]:
            best = (val, iters, gnorm, history)
    val, iters, gnorm, history = best
    converged = gnorm <= 1e-6 * max(1.0, abs(val)) or (
        len(history) > 1 and (history[-2] - history[-1]) / max(abs(val), 1.0) < cfg.tol
    )
    return FidelityReport(
        value=val,
        route="variational",
        iterations=iters,
        residual=gnorm,
        converged=converged,
        bound_history=tuple(history),
    )


# --- identities --------------------------------------------------------------


def _block_norm(blocks) -> float:
    return max((op_norm(b) for b in blocks), default=0.0)


def check_star_invariance(omega, rho, a, b, c, d, tol: float = 1e-10):
    """F(omega^a, rho^b) and F(omega^c, rho^d) under a* b = c* d."""
    alg = omega.algebra
    a, b, c, d = (alg.check_blocks(x) for x in (a, b, c, d))
    defect = _block_norm(
        [dagger(x) @ y - dagger(u) @ v for x, y, u, v in zip(a, b, c, d)]
    )
    if defect > tol:
        raise PremiseError(f"a* b differs from c* d by {defect:.3e}")
    f_ab = fidelity_value(inner_derived(omega, a), inner_derived(rho, b))
    f_cd = fidelity_value(inner_derived(omega, c), inner_derived(rho, d))
    return f_ab, f_cd


def fidelity_special_cases(mu: PositiveForm, a, b) -> float | None:
    """Closed forms for F(mu^a, mu^b); None when no hypothesis applies.

    Dispatch order: a* b PSD; a* b in the centralizer of mu; mu tracial.
    """
    alg = mu.algebra
    a = alg.check_blocks(a)
    b = alg.check_blocks(b)
    ab = [dagger(x) @ y for x, y in zip(a, b)]
    scale = max(_block_norm(ab), 1.0)
    psd = all(
        linalg.hermiticity_defect(m) <= 1e-10 * scale
        and float(np.min(np.linalg.eigvalsh(herm(m)))) >= -1e-10 * scale
        for m in ab
    )
    if psd:
        return evaluate(mu, [herm(m) for m in ab])
    if in_centralizer(mu, ab) or is_tracial(mu):
        return evaluate(mu, [linalg.modulus(m) for m in ab])
    return None


def check_subadditivity(omega, rho, a, b, decomposition, tol: float = 1e-10):
    """Both sides of F(omega^a, rho^b) <= sum_j F(omega^{a_j}, rho^{b_j})
    under a* b = sum_j a_j* b_j."""
    alg = omega.algebra
    a = alg.check_blocks(a)
    b = alg.check_blocks(b)
    parts = [(alg.check_blocks(aj), alg.check_blocks(bj)) for aj, bj in decomposition]
    target = [dagger(x) @ y for x, y in zip(a, b)]
    acc = alg.zeros()
    for aj, bj in parts:
        acc = [s + dagger(x) @ y for s, x, y in zip(acc, aj, bj)]
    defect = _block_norm([t - s for t, s in zip(target, acc)])
    if defect > tol:
        raise PremiseError(f"decomposition identity violated by {defect:.3e}")
    lhs = fidelity_value(inner_derived(omega, a), inner_derived(rho, b))
    rhs = sum(
        fidelity_value(inner_derived(omega, aj), inner_derived(rho, bj))
        for aj, bj in parts
    )
    return lhs, rhs


def corner_isometries(q: BlockProjection):
    """Per block: isometry onto range q (columns orthonormal), or None for
    zero-rank blocks."""
    out = []
    for blk, r in zip(q.blocks, q.ranks):
        if r == 0:
            out.append(None)
            continue
        dec = linalg.eigh(blk)
        out.append(dec.vectors[:, dec.eigenvalues > 0.5])
    return out


def check_hereditarity(omega: PositiveForm, rho: PositiveForm, q: BlockProjection):
    """F inside the corner algebra qMq vs F of the q-derived forms in M."""
    _check_same_algebra(omega, rho)
    if q.algebra != omega.algebra:
        raise ShapeMismatchError("projection lives on a different algebra")
    f_derived = fidelity_value(
        inner_derived(omega, q.blocks), inner_derived(rho, q.blocks)
    )
    f_corner = 0.0
    for v, w, r in zip(corner_isometries(q), omega.densities, rho.densities):
        if v is None:
            continue
        wc = herm(dagger(v) @ w @ v)
        rc = herm(dagger(v) @ r @ v)
        f_corner += linalg.trace_norm(linalg.sqrt_psd(wc) @ linalg.sqrt_psd(rc))
    return f_corner, f_derived
