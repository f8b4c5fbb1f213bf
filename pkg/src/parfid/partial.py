"""Rank-restricted fidelity of positive forms on block algebras.

For forms written as tau^x, tau^y the rank-restricted value is the trace
tau(|x* y| q) minimized over orthoprojections q of a prescribed per-block
rank profile. Three independent routes are provided: the closed form (sum
of the smallest eigenvalues per block), Haar sampling over projections,
and a derivative-free search over minimal projection pairs that evaluates
the full fidelity of derived forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import linalg
from .errors import PremiseError, ShapeMismatchError, ValidationError
from .fidelity import FidelityReport, fidelity_value
from .forms import (
    BlockAlgebra,
    PositiveForm,
    Trace,
    form_from_trace_vector,
    inner_derived,
    sqrt_density_rep,
)
from .linalg import dagger, herm, op_norm
from .pairs import BlockProjection, rank_k_pseudo_inverse
from .rand import ginibre, haar_isometry, rng_from


def resolve_ranks(algebra: BlockAlgebra, r) -> tuple:
    """Per-block rank profile from a BlockProjection, an int (single factor),
    or an iterable of ints."""
    if isinstance(r, BlockProjection):
        if r.algebra != algebra:
            raise ShapeMismatchError("projection lives on a different algebra")
        return r.ranks
    if isinstance(r, (int, np.integer)):
        if algebra.n_blocks != 1:
            raise ShapeMismatchError("a bare integer rank needs a single factor")
        r = (int(r),)
    ranks = tuple(int(k) for k in r)
    if len(ranks) != algebra.n_blocks:
        raise ShapeMismatchError("one rank per block required")
    for k, n in zip(ranks, algebra.block_dims):
        if not (0 <= k <= n):
            raise ValidationError(f"rank {k} out of range for block dim {n}")
    return ranks


def _overlap_moduli(omega: PositiveForm, rho: PositiveForm, tau: Trace):
    """Per block: |x* y| for x, y the square-root representing vectors.

    Built from the singular value decomposition of x y rather than the
    square root of (x y)* (x y): squaring would halve the accuracy of the
    small singular values the rank-restricted value is made of.
    """
    if omega.algebra != rho.algebra or tau.algebra != omega.algebra:
        raise ShapeMismatchError("forms and trace live on different algebras")
    x = sqrt_density_rep(omega, tau)
    y = sqrt_density_rep(rho, tau)
    out = []
    for a, b in zip(x, y):
        _, s, vh = np.linalg.svd(a @ b)
        out.append(herm(dagger(vh) @ (s[:, None] * vh)))
    return out


def partial_fidelity_spectral(
    omega: PositiveForm, rho: PositiveForm, tau: Trace, r
) -> tuple:
    """Closed form: per block, c_k times the sum of the rank(r_k) smallest
    eigenvalues of |x* y|; also returns the minimizing projection, which
    commutes with |x* y| blockwise."""
    alg = omega.algebra
    ranks = resolve_ranks(alg, r)
    mods = _overlap_moduli(omega, rho, tau)
    total = 0.0
    q_blocks = []
    for z, k, c, n in zip(mods, ranks, tau.weights, alg.block_dims):
        dec = linalg.eigh(z)
        total += c * float(np.sum(dec.eigenvalues[:k]))
        cols = dec.vectors[:, :k]
        q = herm(cols @ dagger(cols))
        scale = max(op_norm(z), 1.0)
        if op_norm(q @ z - z @ q) > 1e-9 * scale:
            raise ValidationError("minimizing projection fails to commute")
        q_blocks.append(q)
    q0 = BlockProjection(alg, q_blocks, ranks)
    return total, q0


def _block_sample_min(z, k, n_samples, rng, refine_iters=400):
    """Min of tr(z q) over sampled rank-k projections, with a random-walk
    polish that never consults the eigenbasis of z."""
    n = z.shape[0]
    if k == 0:
        return 0.0
    if k == n:
        return float(np.trace(z).real)
    g = rng.standard_normal((n_samples, n, k)) + 1j * rng.standard_normal(
        (n_samples, n, k)
    )
    v = np.linalg.qr(g)[0]
    vals = np.einsum("bik,ij,bjk->b", v.conj(), z, v).real
    i = int(np.argmin(vals))
    best, cols = float(vals[i]), v[i]
    step = 0.5
    for _ in range(refine_iters):
        trial = np.linalg.qr(cols + step * ginibre(n, k, rng))[0]
        val = float(np.einsum("ik,ij,jk->", trial.conj(), z, trial).real)
        if val < best:
            best, cols = val, trial
            step *= 1.2
        else:
            step *= 0.92
        if step < 1e-9:
            break
    return best


def partial_fidelity_sampling(
    omega: PositiveForm,
    rho: PositiveForm,
    tau: Trace,
    r,
    n_samples: int = 10_000,
    seed=0,
) -> float:
    """Monte-Carlo upper bound: minimize tau(|x* y| q) over Haar-random
    projections of the prescribed rank profile, blockwise, followed by a
    random-walk polish of the best sample.

    Deliberately independent of the closed form: the eigen-projection
    candidate is never inserted.
    """
    if n_samples < 1:
        raise ValidationError("n_samples must be at least 1")
    ranks = resolve_ranks(omega.algebra, r)
    mods = _overlap_moduli(omega, rho, tau)
    rng = rng_from(seed)
    total = 0.0
    for z, k, c in zip(mods, ranks, tau.weights):
        total += c * _block_sample_min(z, k, n_samples, rng)
    return total


@dataclass(frozen=True)
class SearchConfig:
    """Budget for the derivative-free minimal-pair search."""

    max_iters: int = 800
    restarts: int = 4
    seed: int = 0
    init_step: float = 0.4
    shrink: float = 0.85
    grow: float = 1.3
    min_step: float = 1e-9

    def __post_init__(self):
        if self.max_iters <= 0 or self.restarts < 1:
            raise ValidationError("search budget must be positive")
        if not (0 < self.shrink < 1 < self.grow):
            raise ValidationError("need shrink < 1 < grow")
        if self.init_step <= 0 or self.min_step <= 0:
            raise ValidationError("step sizes must be positive")


def _pair_evaluator(omega: PositiveForm, rho: PositiveForm, ranks):
    """Closure computing F(omega^z, rho^q) for minimal pairs p = AA*,
    q = BB*, where z = |qp|^-2 with rank prescribed per block.

    The fidelity of the derived forms is the trace norm of
    sqrt(w) z q sqrt(r) (fidelity through arbitrary PSD factorizations),
    which reduces bitwise to the closed-form primitive at p = q = 1.
    Returns (value, conditioning); degenerate pairs give value = inf.
    """
    roots_w = [linalg.sqrt_psd(w) for w in omega.densities]
    roots_r = [linalg.sqrt_psd(r) for r in rho.densities]

    def evaluate(a_cols, b_cols):
        val = 0.0
        cond = 1.0
        for rw, rr, ac, bc, k in zip(roots_w, roots_r, a_cols, b_cols, ranks):
            if k == 0:
                continue
            p = ac @ dagger(ac)
            q = bc @ dagger(bc)
            pqp = herm(p @ q @ p)
            z, smallest = rank_k_pseudo_inverse(pqp, k)
            if smallest < 1e-12:
                return np.inf, np.inf
            cond = max(cond, op_norm(z))
            s = np.linalg.svd(rw @ z @ q @ rr, compute_uv=False)
            val += float(np.sum(s))
        return val, cond

    return evaluate


def pair_objective(omega: PositiveForm, rho: PositiveForm, a_cols, b_cols, ranks):
    """One-off evaluation of the minimal-pair objective; see _pair_evaluator."""
    return _pair_evaluator(omega, rho, ranks)(a_cols, b_cols)


def _constructed_starts(omega: PositiveForm, rho: PositiveForm, ranks):
    """Warm starts for the pair search, built from regularized square roots.

    With a = sqrt(w + eps), b = sqrt(r + eps) invertible and b a = u m the
    polar split, the pair spanned by a^-1 m^(1/2) (k smallest eigendirections
    of m) and b^-1 u m^(1/2) (same directions) is admissible and approaches
    the infimum as eps -> 0. These are starting points, not the answer: the
    reported value is whatever the objective says at the best point found.
    """
    starts = []
    for eps in (1e-4, 1e-6, 1e-8):
        a_cols, b_cols = [], []
        for wd, rd, k in zip(omega.densities, rho.densities, ranks):
            n = wd.shape[0]
            if k == 0:
                a_cols.append(np.zeros((n, 0), dtype=complex))
                b_cols.append(np.zeros((n, 0), dtype=complex))
                continue
            scale = max(op_norm(wd), op_norm(rd), 1.0)
            a = linalg.sqrt_psd(wd + eps * scale * np.eye(n))
            b = linalg.sqrt_psd(rd + eps * scale * np.eye(n))
            u1, s1, v1h = np.linalg.svd(b @ a)
            v1 = dagger(v1h)
            mhalf = (v1 * np.sqrt(s1)) @ v1h
            u = u1 @ v1h
            small = v1[:, ::-1][:, :k]
            a_cols.append(np.linalg.qr(np.linalg.inv(a) @ mhalf @ small)[0])
            b_cols.append(np.linalg.qr(np.linalg.inv(b) @ u @ mhalf @ small)[0])
        starts.append((a_cols, b_cols))
    return starts


def partial_fidelity_variational(
    omega: PositiveForm,
    rho: PositiveForm,
    r,
    cfg: SearchConfig | None = None,
) -> FidelityReport:
    """Adaptive random-direction descent over minimal projection pairs.

    The value of any admissible pair is a certified upper bound on the
    rank-restricted fidelity; the best bound found within the budget is
    reported together with the conditioning of the cached |qp|^-2.
    """
    if omega.algebra != rho.algebra:
        raise ShapeMismatchError("forms live on different algebras")
    alg = omega.algebra
    ranks = resolve_ranks(alg, r)
    if sum(ranks) == 0:
        return FidelityReport(value=0.0, route="pair-search", converged=True)
    cfg = cfg or SearchConfig()
    rng = rng_from(cfg.seed)
    dims = alg.block_dims
    evaluate = _pair_evaluator(omega, rho, ranks)

    def retract(cols, direction, t):
        return [
            np.linalg.qr(c + t * d)[0] if k else c
            for c, d, k in zip(cols, direction, ranks)
        ]

    def one_run(tied: bool, start=None, init_step=None):
        if start is not None:
            a_cols = [c.copy() for c in start[0]]
            b_cols = [c.copy() for c in start[1]]
        else:
            a_cols = [haar_isometry(n, k, rng) for n, k in zip(dims, ranks)]
            b_cols = [c.copy() for c in a_cols] if tied else [
                haar_isometry(n, k, rng) for n, k in zip(dims, ranks)
            ]
        val, cond = evaluate(a_cols, b_cols)
        while not np.isfinite(val):
            a_cols = [haar_isometry(n, k, rng) for n, k in zip(dims, ranks)]
            b_cols = [haar_isometry(n, k, rng) for n, k in zip(dims, ranks)]
            val, cond = evaluate(a_cols, b_cols)
        step = init_step if init_step is not None else cfg.init_step
        history = [val]
        it = 0
        for it in range(1, cfg.max_iters + 1):
            da = [ginibre(n, k, rng) for n, k in zip(dims, ranks)]
            db = [ginibre(n, k, rng) for n, k in zip(dims, ranks)]
            improved = False
            # mirrored trial, then greedy step doubling along a winning direction
            for sign in (1.0, -1.0):
                t = sign * step
                ta = retract(a_cols, da, t)
                tb = retract(b_cols, db, t)
                tval, tcond = evaluate(ta, tb)
                if tval < val:
                    while True:
                        t2 = 2.0 * t
                        ta2 = retract(a_cols, da, t2)
                        tb2 = retract(b_cols, db, t2)
                        tval2, tcond2 = evaluate(ta2, tb2)
                        if tval2 < tval:
                            t, ta, tb, tval, tcond = t2, ta2, tb2, tval2, tcond2
                        else:
                            break
                    a_cols, b_cols, val, cond = ta, tb, tval, tcond
                    history.append(val)
                    step = min(abs(t) * cfg.grow, 2.0)
                    improved = True
                    break
            if not improved:
                step *= cfg.shrink
            if step < cfg.min_step:
                break
        return val, cond, it, step, history, (a_cols, b_cols)

    best = None
    for j in range(cfg.restarts):
        run = one_run(tied=(j == 0))
        if best is None or run[0] < best[0]:
            best = run
    warm = None
    for start in _constructed_starts(omega, rho, ranks):
        v, c = evaluate(start[0], start[1])
        if np.isfinite(v) and (warm is None or v < warm[0]):
            warm = (v, c, 0, 0.0, [v], start)
    if warm is not None:
        run = one_run(tied=False, start=warm[5], init_step=1e-3)
        if run[0] < warm[0]:
            warm = run
        if warm[0] < best[0]:
            best = warm
    # polish from the incumbent with a fine initial step
    polish = one_run(tied=False, start=best[5], init_step=1e-2)
    if polish[0] < best[0]:
        best = polish
    val, cond, iters, step, history = best[:5]
    return FidelityReport(
        value=val,
        route="pair-search",
        iterations=iters,
        residual=step,
        conditioning=cond,
        converged=step < 1e-6 or iters < cfg.max_iters,
        bound_history=tuple(history),
    )


def check_partial_invariance(
    omega: PositiveForm, rho: PositiveForm, tau: Trace, r, a, b, c, d,
    tol: float = 1e-10,
):
    """Rank-restricted values of (omega^a, rho^b) and (omega^c, rho^d) under
    a* b = c* d with all four blocks invertible."""
    alg = omega.algebra
    a, b, c, d = (alg.check_blocks(x) for x in (a, b, c, d))
    for blocks in (a, b, c, d):
        for m in blocks:
            s = np.linalg.svd(m, compute_uv=False)
            if s[-1] <= 1e-12 * max(s[0], 1.0):
                raise PremiseError("all four block elements must be invertible")
    defect = max(
        op_norm(dagger(x) @ y - dagger(u) @ v)
        for x, y, u, v in zip(a, b, c, d)
    )
    if defect > tol:
        raise PremiseError(f"a* b differs from c* d by {defect:.3e}")
    f1, _ = partial_fidelity_spectral(
        inner_derived(omega, a), inner_derived(rho, b), tau, r
    )
    f2, _ = partial_fidelity_spectral(
        inner_derived(omega, c), inner_derived(rho, d), tau, r
    )
    return f1, f2


def check_sandwich(
    tau: Trace, a_blocks, b_blocks, r, n_samples: int = 200, seed=0
):
    """(lower, value, upper) for the forms tau^a, tau^b with PSD a, b:
    lower = blockwise smallest-eigenvalue sums of |ab|, upper = best
    tau(sqrt(p |ab|^2 p)) over eigen-candidate and sampled projections."""
    alg = tau.algebra
    a_blocks = alg.check_blocks(a_blocks)
    b_blocks = alg.check_blocks(b_blocks)
    for m in a_blocks + b_blocks:
        lo = float(np.min(np.linalg.eigvalsh(linalg.check_hermitian(m))))
        if lo < -1e-10:
            raise PremiseError("sandwich bounds require PSD block elements")
    ranks = resolve_ranks(alg, r)
    omega = form_from_trace_vector(tau, a_blocks)
    rho = form_from_trace_vector(tau, b_blocks)
    value, _ = partial_fidelity_spectral(omega, rho, tau, ranks)

    rng = rng_from(seed)
    lower = 0.0
    upper = 0.0
    for am, bm, k, c, n in zip(a_blocks, b_blocks, ranks, tau.weights, alg.block_dims):
        z = linalg.modulus(am @ bm)
        dec = linalg.eigh(z)
        lower += c * float(np.sum(dec.eigenvalues[:k]))
        if k == 0:
            continue
        z2 = herm(z @ z)

        def corner(cols):
            return float(
                np.sum(np.sqrt(np.clip(
                    np.linalg.eigvalsh(herm(dagger(cols) @ z2 @ cols)), 0.0, None
                )))
            )

        best = corner(dec.vectors[:, :k])
        for _ in range(n_samples):
            best = min(best, corner(haar_isometry(n, k, rng)))
        upper += c * best
    if not (lower <= value + 1e-9 and value <= upper + 1e-9):
        raise ValidationError(
            f"bound chain violated: {lower:.12e} <= {value:.12e} <= {upper:.12e}"
        )
    return lower, value, upper


def partial_fidelity_direct_sum(
    omega: PositiveForm, rho: PositiveForm, tau: Trace, r
) -> float:
    """Blockwise sum of single-factor values; asserted equal to the value
    computed on the assembled block algebra."""
    alg = omega.algebra
    ranks = resolve_ranks(alg, r)
    total = 0.0
    for w, rd, c, k, n in zip(
        omega.densities, rho.densities, tau.weights, ranks, alg.block_dims
    ):
        sub = BlockAlgebra((n,))
        val, _ = partial_fidelity_spectral(
            PositiveForm(sub, [w]), PositiveForm(sub, [rd]), Trace(sub, (c,)), (k,)
        )
        total += val
    whole, _ = partial_fidelity_spectral(omega, rho, tau, ranks)
    if abs(total - whole) > 1e-10 * max(1.0, abs(whole)):
        raise ValidationError(
            f"blockwise sum {total:.12e} differs from assembled value {whole:.12e}"
        )
    return total


@dataclass(frozen=True)
class PartialFidelityProfile:
    """Rank-restricted fidelity as a function of the rank profile.

    by_ranks maps every per-block rank vector to its value; for a single
    factor, values is the k-indexed scan k = 0..n.
    """

    algebra: BlockAlgebra
    by_ranks: dict = field(compare=False)
    values: tuple = ()
    minimizer_ranks: tuple = ()
    fidelity: float = 0.0

    def monotone_nondecreasing(self, tol: float = 1e-10) -> bool:
        """Componentwise-ordered rank profiles give ordered values."""
        items = list(self.by_ranks.items())
        for r1, v1 in items:
            for r2, v2 in items:
                if all(x <= y for x, y in zip(r1, r2)) and v1 > v2 + tol:
                    return False
        return True


def profile(
    omega: PositiveForm, rho: PositiveForm, tau: Trace | None = None
) -> PartialFidelityProfile:
    """All rank-restricted values at once from one eigendecomposition per
    block; endpoints are 0 and the full fidelity."""
    alg = omega.algebra
    tau = tau or Trace.standard(alg)
    mods = _overlap_moduli(omega, rho, tau)
    cums = []
    for z, c in zip(mods, tau.weights):
        ev = linalg.eigh(z).eigenvalues
        cums.append(np.concatenate(([0.0], c * np.cumsum(ev))))
    by_ranks = {}
    for combo in product(*(range(n + 1) for n in alg.block_dims)):
        by_ranks[combo] = float(sum(cum[k] for cum, k in zip(cums, combo)))
    full = fidelity_value(omega, rho)
    if alg.n_blocks == 1:
        n = alg.block_dims[0]
        values = tuple(by_ranks[(k,)] for k in range(n + 1))
        minimizer_ranks = tuple(range(n + 1))
    else:
        values = ()
        minimizer_ranks = ()
    return PartialFidelityProfile(
        algebra=alg,
        by_ranks=by_ranks,
        values=values,
        minimizer_ranks=minimizer_ranks,
        fidelity=full,
    )
