"""Completely positive trace-preserving maps and joint-transformability.

Kraus and Choi encodings of channels, a fidelity-monotonicity sweep, a
Dykstra alternating-projection solver for the question "does one channel
send omega to omega' and rho to rho' simultaneously", and a constructive
generator of instances where equal fidelities coexist with a provable
obstruction to any such channel.

Choi convention: J[(i, a), (j, b)] = sum_l K_l[a, i] conj(K_l[b, j]) with
row index i * m + a (input index major), so that the channel action is
Phi(X)[a, b] = sum_{i j} J[(i, a), (j, b)] X[i, j] and the partial trace
of J over the output slot is the input identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import linalg
from .errors import PremiseError, ShapeMismatchError, ValidationError
from .linalg import dagger, herm, op_norm
from .rand import haar_isometry, rng_from, random_density, random_unit_vector


@dataclass(frozen=True)
class KrausSet:
    """Channel as operators K_j (out_dim x in_dim) with sum K* K = identity."""

    in_dim: int
    out_dim: int
    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise ValidationError("at least one operator required")
        for k in ops:
            if k.shape != (self.out_dim, self.in_dim):
                raise ShapeMismatchError(
                    f"operator shape {k.shape}, expected ({self.out_dim},{self.in_dim})"
                )
        acc = sum(dagger(k) @ k for k in ops)
        defect = op_norm(acc - np.eye(self.in_dim))
        if defect > 1e-9:
            raise ValidationError(f"sum K* K differs from identity by {defect:.3e}")
        object.__setattr__(self, "operators", ops)

    @classmethod
    def identity(cls, n: int) -> "KrausSet":
        return cls(n, n, (np.eye(n, dtype=complex),))

    @classmethod
    def depolarizing(cls, n: int) -> "KrausSet":
        """Fully depolarizing channel from normalized matrix units."""
        ops = []
        for a in range(n):
            for i in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[a, i] = 1.0 / np.sqrt(n)
                ops.append(e)
        return cls(n, n, tuple(ops))

    @classmethod
    def replace(cls, n: int, sigma: np.ndarray) -> "KrausSet":
        """X -> tr(X) sigma for a fixed output density sigma."""
        sigma = np.asarray(sigma, dtype=complex)
        m = sigma.shape[0]
        root = linalg.sqrt_psd(sigma)
        ops = []
        for i in range(n):
            for a in range(m):
                k = np.zeros((m, n), dtype=complex)
                k[:, i] = root[:, a]
                ops.append(k)
        return cls(n, m, tuple(ops))


def apply(kraus: KrausSet, w: np.ndarray) -> np.ndarray:
    w = linalg.as_complex(w)
    if w.shape[0] != kraus.in_dim:
        raise ShapeMismatchError(
            f"density dim {w.shape[0]} differs from channel input {kraus.in_dim}"
        )
    out = sum(k @ w @ dagger(k) for k in kraus.operators)
    return herm(out)


@dataclass(frozen=True)
class ChoiMatrix:
    """PSD matrix of dim in_dim * out_dim whose output partial trace is the
    input identity."""

    matrix: np.ndarray
    in_dim: int
    out_dim: int

    def __post_init__(self):
        j = linalg.as_complex(self.matrix)
        n, m = self.in_dim, self.out_dim
        if j.shape != (n * m, n * m):
            raise ShapeMismatchError(f"Choi shape {j.shape}, expected {(n * m,) * 2}")
        lo = float(np.min(np.linalg.eigvalsh(linalg.check_hermitian(j, rtol=1e-9))))
        if lo < -1e-9:
            raise ValidationError(f"Choi matrix has eigenvalue {lo:.3e} < -1e-9")
        ptr = np.einsum("iaja->ij", j.reshape(n, m, n, m))
        if op_norm(ptr - np.eye(n)) > 1e-8:
            raise ValidationError("output partial trace differs from the identity")
        object.__setattr__(self, "matrix", herm(j))

    def apply(self, x: np.ndarray) -> np.ndarray:
        n, m = self.in_dim, self.out_dim
        j4 = self.matrix.reshape(n, m, n, m)
        return herm(np.einsum("iajb,ij->ab", j4, linalg.as_complex(x)))


def choi_from_kraus(kraus: KrausSet) -> ChoiMatrix:
    n, m = kraus.in_dim, kraus.out_dim
    j = np.zeros((n * m, n * m), dtype=complex)
    for k in kraus.operators:
        v = k.T.reshape(-1)
        j += np.outer(v, np.conjugate(v))
    return ChoiMatrix(j, n, m)


def kraus_from_choi(choi: ChoiMatrix, tol: float = 1e-10) -> KrausSet:
    n, m = choi.in_dim, choi.out_dim
    dec = linalg.eigh(choi.matrix)
    ops = []
    for lam, col in zip(dec.eigenvalues, dec.vectors.T):
        if lam > tol:
            ops.append(np.sqrt(lam) * col.reshape(n, m).T)
    return KrausSet(n, m, tuple(ops))


def random_cptp(n: int, rng, out_dim: int | None = None, env_dim: int | None = None) -> KrausSet:
    """Generic channel from a Haar isometry into system x environment."""
    m = out_dim if out_dim is not None else n
    e = env_dim if env_dim is not None else n
    v = haar_isometry(m * e, n, rng_from(rng)).reshape(m, e, n)
    return KrausSet(n, m, tuple(v[:, j, :] for j in range(e)))


def _fidelity_of_densities(a: np.ndarray, b: np.ndarray) -> float:
    return linalg.trace_norm(linalg.sqrt_psd(a) @ linalg.sqrt_psd(b))


def monotonicity_sweep(
    n_channels: int, n_state_pairs: int, seed, dim: int = 3
) -> dict:
    """Fidelity never decreases under a channel applied to both states.

    Returns counts, the worst (most negative) margin F(out) - F(in), and a
    reproduction seed for the first violation if any.
    """
    rng = rng_from(seed)
    pairs = [
        (random_density(dim, rng), random_density(dim, rng))
        for _ in range(n_state_pairs)
    ]
    f_in = [_fidelity_of_densities(w, r) for w, r in pairs]
    violations = 0
    first_failure = None
    worst = np.inf
    for c in range(n_channels):
        chan = random_cptp(dim, rng)
        for (w, r), fi in zip(pairs, f_in):
            fo = _fidelity_of_densities(apply(chan, w), apply(chan, r))
            margin = fo - fi
            worst = min(worst, margin)
            if margin < -1e-9:
                violations += 1
                if first_failure is None:
                    first_failure = (seed, c)
    return {
        "channels": n_channels,
        "state_pairs": n_state_pairs,
        "dim": dim,
        "violations": violations,
        "worst_margin": float(worst),
        "first_failure": first_failure,
    }


# --- joint transformability --------------------------------------------------


class Feasibility(Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class FeasibilityConfig:
    feas_tol: float = 1e-7
    stall_tol: float = 1e-10
    stall_window: int = 500
    max_iters: int = 20_000

    def __post_init__(self):
        if self.feas_tol <= 0 or self.stall_tol <= 0 or self.max_iters <= 0:
            raise ValidationError("feasibility tolerances must be positive")


@dataclass(frozen=True)
class FeasibilityVerdict:
    status: Feasibility
    iterations: int
    psd_residual: float
    affine_residual: float
    choi: ChoiMatrix | None = field(default=None, compare=False)
    infeasibility_margin: float = 0.0


def _constraint_operator(omega, rho, omega_p, rho_p):
    """Real-linear map x -> (tr_out J - I, Phi(omega) - omega', Phi(rho) - rho')
    over real-stacked Hermitian-free coordinates of J, plus its rhs and
    pseudo-inverse."""
    n = omega.shape[0]
    m = omega_p.shape[0]
    d = n * m

    def constraints(j):
        j4 = j.reshape(n, m, n, m)
        c1 = np.einsum("iaja->ij", j4)
        c2 = np.einsum("iajb,ij->ab", j4, omega)
        c3 = np.einsum("iajb,ij->ab", j4, rho)
        return np.concatenate([c1.reshape(-1), c2.reshape(-1), c3.reshape(-1)])

    def pack(j):
        return np.concatenate([j.real.reshape(-1), j.imag.reshape(-1)])

    def unpack(x):
        half = d * d
        return (x[:half] + 1j * x[half:]).reshape(d, d)

    n_x = 2 * d * d
    cols = []
    for i in range(n_x):
        e = np.zeros(n_x)
        e[i] = 1.0
        c = constraints(unpack(e))
        cols.append(np.concatenate([c.real, c.imag]))
    a_mat = np.array(cols).T
    target = np.concatenate(
        [np.eye(n).reshape(-1), omega_p.reshape(-1), rho_p.reshape(-1)]
    )
    b_vec = np.concatenate([target.real, target.imag])

    # Facial reduction: a PSD J with tr_in[J (x^T x I)] = y forces
    # J (conj(v) x w) = 0 for every v in the support of x and w in the
    # kernel of y.  Appending these rows keeps the affine set's intersection
    # with the cone relatively interior, which restores the linear
    # convergence the alternating projections lose on boundary solutions.
    kernel_vecs = []
    for x_in, y_out in ((omega, omega_p), (rho, rho_p)):
        vals, vecs = np.linalg.eigh(herm(x_in))
        pvals, pvecs = np.linalg.eigh(herm(y_out))
        for i in range(n):
            if vals[i] > 1e-12:
                for a in range(m):
                    if pvals[a] < 1e-12:
                        kernel_vecs.append(np.kron(np.conj(vecs[:, i]), pvecs[:, a]))
    extra = []
    for vec in kernel_vecs:
        cols = []
        for i in range(n_x):
            e = np.zeros(n_x)
            e[i] = 1.0
            cols.append(unpack(e) @ vec)
        mat = np.array(cols).T
        extra.append(np.vstack([mat.real, mat.imag]))
    if extra:
        a_mat = np.vstack([a_mat] + extra)
        b_vec = np.concatenate([b_vec] + [np.zeros(e.shape[0]) for e in extra])

    pinv = np.linalg.pinv(a_mat, rcond=1e-12)
    return a_mat, b_vec, pinv, pack, unpack


def feasibility(
    omega, rho, omega_p, rho_p, cfg: FeasibilityConfig | None = None
) -> FeasibilityVerdict:
    """Decide whether one channel maps omega -> omega' and rho -> rho'.

    Dykstra alternating projections between the PSD cone and the affine set
    carrying the trace-preservation and two action constraints. "infeasible"
    is a stall heuristic; "feasible" requires both residuals below feas_tol.
    """
    cfg = cfg or FeasibilityConfig()
    omega, rho, omega_p, rho_p = (
        linalg.as_complex(x) for x in (omega, rho, omega_p, rho_p)
    )
    if omega.shape != rho.shape or omega_p.shape != rho_p.shape:
        raise ShapeMismatchError("input and output pairs must share dimensions")
    for x in (omega, rho, omega_p, rho_p):
        if abs(np.trace(x).real - 1.0) > 1e-10:
            raise ValidationError("densities must be trace-normalized to 1e-10")
    n, m = omega.shape[0], omega_p.shape[0]
    d = n * m
    a_mat, b_vec, pinv, pack, unpack = _constraint_operator(omega, rho, omega_p, rho_p)

    def proj_affine(x):
        return x - pinv @ (a_mat @ x - b_vec)

    def proj_psd(x):
        j = herm(unpack(x))
        vals, vecs = np.linalg.eigh(j)
        vals = np.clip(vals, 0.0, None)
        return pack((vecs * vals) @ dagger(vecs))

    # The affine system itself may be inconsistent (e.g. equal inputs with
    # distinct targets); its least-squares residual is then a certificate.
    x_ls = pinv @ b_vec
    inconsistency = float(np.linalg.norm(a_mat @ x_ls - b_vec))
    if inconsistency > 1e-8:
        return FeasibilityVerdict(
            Feasibility.INFEASIBLE, 0, 0.0, inconsistency,
            infeasibility_margin=inconsistency,
        )

    x = pack(np.eye(d, dtype=complex) / m)
    p_corr = np.zeros_like(x)
    q_corr = np.zeros_like(x)
    history = []
    psd_res = aff_res = np.inf
    it = 0
    for it in range(1, cfg.max_iters + 1):
        y = proj_psd(x + p_corr)
        p_corr = x + p_corr - y
        x = proj_affine(y + q_corr)
        q_corr = y + q_corr - x

        j = herm(unpack(x))
        lo = float(np.min(np.linalg.eigvalsh(j)))
        psd_res = max(0.0, -lo)
        aff_res = float(np.linalg.norm(a_mat @ pack(j) - b_vec))
        res = max(psd_res, aff_res)
        history.append(res)
        if psd_res <= cfg.feas_tol and aff_res <= cfg.feas_tol:
            choi = ChoiMatrix(_repair_choi(j, n, m), n, m)
            return FeasibilityVerdict(Feasibility.FEASIBLE, it, psd_res, aff_res, choi)

        # Separating-hyperplane certificate.  Near the limit of alternating
        # projections on disjoint sets, g = P_affine(P_psd(x)) - P_psd(x)
        # has <g, .> constant on the affine set and every feasible Choi has
        # trace n, so sup over PSD candidates of <g, J> <= n * max
        # eigenvalue of G.  A positive slack proves the sets are disjoint.
        if it % 50 == 0:
            a_pt = proj_psd(x)
            b_pt = proj_affine(a_pt)
            g = b_pt - a_pt
            g_norm = float(np.linalg.norm(g))
            if g_norm > 1e-9:
                g_top = float(np.max(np.linalg.eigvalsh(herm(unpack(g)))))
                slack = float(g @ b_pt) - n * max(g_top, 0.0)
                if slack >= 1e-6 * g_norm:
                    return FeasibilityVerdict(
                        Feasibility.INFEASIBLE, it, psd_res, aff_res,
                        infeasibility_margin=slack,
                    )
        if len(history) > cfg.stall_window:
            drop = history[-cfg.stall_window - 1] - res
            if drop < cfg.stall_tol and res > 100.0 * cfg.feas_tol:
                return FeasibilityVerdict(Feasibility.INFEASIBLE, it, psd_res, aff_res)
    return FeasibilityVerdict(Feasibility.UNKNOWN, it, psd_res, aff_res)


def _repair_choi(j, n, m):
    """Clip tiny negative eigenvalues and renormalize the output partial
    trace so the ChoiMatrix invariants hold exactly at return time."""
    vals, vecs = np.linalg.eigh(herm(j))
    vals = np.clip(vals, 0.0, None)
    j = (vecs * vals) @ dagger(vecs)
    ptr = np.einsum("iaja->ij", j.reshape(n, m, n, m))
    root = np.linalg.inv(linalg.sqrt_psd(herm(ptr)))
    corr = np.kron(root, np.eye(m))
    return herm(corr @ j @ dagger(corr))


def pure_pair(n: int, overlap: float, rng) -> tuple:
    """Two unit vectors in dim n with |<psi, phi>| = overlap."""
    if not (0.0 <= overlap <= 1.0):
        raise ValidationError("overlap must lie in [0, 1]")
    u = haar_isometry(n, min(2, n), rng_from(rng))
    psi = u[:, 0]
    if n == 1 or overlap == 1.0:
        return psi, psi * 1.0
    phi = overlap * u[:, 0] + np.sqrt(1.0 - overlap**2) * u[:, 1]
    return psi, phi


def transformability_counterexample(w: np.ndarray, w_prime: np.ndarray, seed=0) -> dict:
    """Vectors psi, phi with equal fidelities F(w, psi-state) = F(w', phi-state)
    yet no channel sending w -> w' and the psi-state -> the phi-state.

    Premise: some eigenvalue of w lies strictly inside the numerical-range
    interval of w'. The obstruction certificate is the most negative
    eigenvalue of w' - lambda * phi-state, while w - lambda * psi-state
    stays PSD.
    """
    w = linalg.check_hermitian(linalg.as_complex(w))
    w_prime = linalg.check_hermitian(linalg.as_complex(w_prime))
    dec = linalg.eigh(w)
    dec_p = linalg.eigh(w_prime)
    lo, hi = linalg.numerical_range_interval(w_prime)
    margin_gate = 1e-9
    candidates = [
        (min(hi - lam, lam - lo), j)
        for j, lam in enumerate(dec.eigenvalues)
        if lo + margin_gate < lam < hi - margin_gate
    ]
    if not candidates:
        raise PremiseError(
            "no eigenvalue of the first density lies strictly inside the "
            f"numerical-range interval of the second: spectrum {np.round(dec.eigenvalues, 12).tolist()}, "
            f"interval ({lo:.12g}, {hi:.12g})"
        )
    _, j_star = max(candidates)
    lam = float(dec.eigenvalues[j_star])
    psi = dec.vectors[:, j_star]
    lam_top = float(dec_p.eigenvalues[-1])
    lam_bot = float(dec_p.eigenvalues[0])
    beta = (lam - lam_bot) / (lam_top - lam_bot)
    phi = np.sqrt(beta) * dec_p.vectors[:, -1] + np.sqrt(1.0 - beta) * dec_p.vectors[:, 0]
    phi = phi / np.linalg.norm(phi)

    rho_psi = np.outer(psi, np.conjugate(psi))
    rho_phi = np.outer(phi, np.conjugate(phi))
    f_in = float(np.sqrt(max(np.real(np.conjugate(psi) @ w @ psi), 0.0)))
    f_out = float(np.sqrt(max(np.real(np.conjugate(phi) @ w_prime @ phi), 0.0)))
    cert_in = float(np.min(np.linalg.eigvalsh(herm(w - lam * rho_psi))))
    cert_out = float(np.min(np.linalg.eigvalsh(herm(w_prime - lam * rho_phi))))
    return {
        "psi": psi,
        "phi": phi,
        "rho_psi": rho_psi,
        "rho_phi": rho_phi,
        "lambda": lam,
        "beta": float(beta),
        "fidelity_in": f_in,
        "fidelity_out": f_out,
        "certificate_in": cert_in,
        "certificate_out": cert_out,
    }


def random_premise_instance(n: int, n_prime: int, rng) -> tuple:
    """Random mixed pair (w, w') satisfying the counterexample premise."""
    rng = rng_from(rng)
    for _ in range(1000):
        w = random_density(n, rng)
        w_p = random_density(n_prime, rng)
        lo, hi = linalg.numerical_range_interval(w_p)
        vals = np.linalg.eigvalsh(w)
        if any(lo + 1e-3 < v < hi - 1e-3 for v in vals):
            return w, w_p
    raise ValidationError("could not sample a premise-satisfying instance")


# --- conditional expectation onto a tensor factor ---------------------------


def conditional_expectation(n: int, m: int, sigma: np.ndarray, x: np.ndarray) -> np.ndarray:
    """E(A (x) B) = tr(sigma B) A (x) 1 extended linearly, on C^n (x) C^m."""
    sigma = linalg.as_complex(sigma)
    x = linalg.as_complex(x)
    if sigma.shape != (m, m) or x.shape != (n * m, n * m):
        raise ShapeMismatchError("tensor factorization inconsistent with inputs")
    x4 = x.reshape(n, m, n, m)
    reduced = np.einsum("ambn,nm->ab", x4, sigma)
    return np.kron(reduced, np.eye(m, dtype=complex))


def expectation_composed_density(n: int, m: int, sigma: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Density of the state w composed with the conditional expectation:
    the m-part-reduced density of w tensored with sigma."""
    sigma = linalg.as_complex(sigma)
    w = linalg.as_complex(w)
    w4 = w.reshape(n, m, n, m)
    reduced = np.einsum("ajbj->ab", w4)
    return np.kron(herm(reduced), herm(sigma))
