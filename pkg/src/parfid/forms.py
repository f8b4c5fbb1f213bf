"""Positive linear forms and traces on block algebras.

A block algebra is a finite direct sum of full matrix factors; its elements
are lists of square complex matrices, one per block. Positive linear forms
are stored as one PSD density matrix per block, so that
omega(x) = sum_k tr(w_k x_k).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ShapeMismatchError, ValidationError
from .linalg import OrthoProjection, dagger, herm
from .rand import rng_from, random_density, random_psd

DIMENSION_CAP = 64


@dataclass(frozen=True)
class BlockAlgebra:
    """M = direct sum of full matrix factors M_{n_k}."""

    block_dims: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        object.__setattr__(self, "block_dims", dims)
        if len(dims) == 0:
            raise ValidationError("a block algebra needs at least one block")
        if any(n < 1 for n in dims):
            raise ValidationError("block dimensions must be positive")
        if sum(dims) > DIMENSION_CAP:
            raise ValidationError(f"total dimension {sum(dims)} exceeds cap {DIMENSION_CAP}")

    @property
    def n_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def total_dim(self) -> int:
        return sum(self.block_dims)

    def zeros(self):
        return [np.zeros((n, n), dtype=complex) for n in self.block_dims]

    def identity(self):
        return [np.eye(n, dtype=complex) for n in self.block_dims]

    def check_blocks(self, blocks):
        blocks = [linalg.as_complex(b) for b in blocks]
        if len(blocks) != self.n_blocks:
            raise ShapeMismatchError(
                f"expected {self.n_blocks} blocks, got {len(blocks)}"
            )
        for b, n in zip(blocks, self.block_dims):
            if b.shape != (n, n):
                raise ShapeMismatchError(f"block of shape {b.shape}, expected ({n},{n})")
        return blocks

    def assemble(self, blocks) -> np.ndarray:
        """Dense direct-sum matrix (mainly for tests and diagnostics)."""
        blocks = self.check_blocks(blocks)
        n = self.total_dim
        out = np.zeros((n, n), dtype=complex)
        i = 0
        for b in blocks:
            m = b.shape[0]
            out[i : i + m, i : i + m] = b
            i += m
        return out


def block_dagger(blocks):
    return [dagger(b) for b in blocks]


def block_mul(a, b):
    return [x @ y for x, y in zip(a, b)]


@dataclass(frozen=True)
class Trace:
    """tau(x) = sum_k c_k tr(x_k) with strictly positive weights c_k."""

    algebra: BlockAlgebra
    weights: tuple

    def __post_init__(self):
        w = tuple(float(c) for c in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != self.algebra.n_blocks:
            raise ShapeMismatchError("one weight per block required")
        if any(c <= 0 for c in w):
            raise ValidationError("trace weights must be strictly positive (faithful)")

    @classmethod
    def standard(cls, algebra: BlockAlgebra) -> "Trace":
        return cls(algebra, (1.0,) * algebra.n_blocks)

    def __call__(self, blocks) -> float:
        blocks = self.algebra.check_blocks(blocks)
        return float(sum(c * np.trace(b).real for c, b in zip(self.weights, blocks)))


@dataclass(frozen=True)
class PositiveForm:
    """omega(x) = sum_k tr(w_k x_k) with PSD block densities w_k."""

    algebra: BlockAlgebra
    densities: list = field(compare=False)

    def __post_init__(self):
        blocks = self.algebra.check_blocks(self.densities)
        for w in blocks:
            lo = float(np.min(np.linalg.eigvalsh(linalg.check_hermitian(w))))
            if lo < -1e-10:
                raise ValidationError(f"block density has eigenvalue {lo:.3e} < -1e-10")
        object.__setattr__(self, "densities", [herm(w) for w in blocks])

    @classmethod
    def from_matrix(cls, w) -> "PositiveForm":
        """Single-factor convenience constructor."""
        w = linalg.as_complex(w)
        return cls(BlockAlgebra((w.shape[0],)), [w])

    def total(self) -> float:
        """omega(1)."""
        return float(sum(np.trace(w).real for w in self.densities))

    def is_state(self, tol: float = 1e-10) -> bool:
        return abs(self.total() - 1.0) <= tol

    def support(self):
        """Blockwise support projections."""
        return [linalg.support(w) for w in self.densities]

    def scaled(self, t: float) -> "PositiveForm":
        return PositiveForm(self.algebra, [t * w for w in self.densities])

    def __add__(self, other: "PositiveForm") -> "PositiveForm":
        if other.algebra != self.algebra:
            raise ShapeMismatchError("forms live on different algebras")
        return PositiveForm(
            self.algebra, [a + b for a, b in zip(self.densities, other.densities)]
        )


def evaluate(form: PositiveForm, blocks) -> float:
    """omega(x) for Hermitian block x; asserts the value is real."""
    blocks = form.algebra.check_blocks(blocks)
    val = sum(np.trace(w @ x) for w, x in zip(form.densities, blocks))
    scale = max(1.0, abs(val))
    if abs(val.imag) > 1e-12 * scale:
        raise ValidationError(f"evaluation has imaginary part {val.imag:.3e}")
    return float(val.real)


def evaluate_complex(form: PositiveForm, blocks) -> complex:
    """omega(x) without the reality assertion, for non-Hermitian arguments."""
    blocks = form.algebra.check_blocks(blocks)
    return complex(sum(np.trace(w @ x) for w, x in zip(form.densities, blocks)))


def inner_derived(form: PositiveForm, z_blocks) -> PositiveForm:
    """omega^z = omega(z* (.) z); densities z_k w_k z_k*."""
    z_blocks = form.algebra.check_blocks(z_blocks)
    dens = [herm(z @ w @ dagger(z)) for z, w in zip(z_blocks, form.densities)]
    return PositiveForm(form.algebra, dens)


def form_from_trace_vector(trace: Trace, x_blocks) -> PositiveForm:
    """tau^x as a form: densities c_k x_k x_k*."""
    x_blocks = trace.algebra.check_blocks(x_blocks)
    dens = [c * herm(x @ dagger(x)) for c, x in zip(trace.weights, x_blocks)]
    return PositiveForm(trace.algebra, dens)


def sqrt_density_rep(form: PositiveForm, trace: Trace):
    """Block vector x with tau^x = omega: x_k = sqrt(w_k / c_k)."""
    if trace.algebra != form.algebra:
        raise ShapeMismatchError("trace and form live on different algebras")
    return [
        linalg.sqrt_psd(w / c) for w, c in zip(form.densities, trace.weights)
    ]


def in_centralizer(
    form: PositiveForm, y_blocks, n_samples: int = 20, tol: float = 1e-9, seed=0
) -> bool:
    """Membership of y in the centralizer of the form.

    Decided by the exact commutator with the density; a randomized
    |mu(xy) - mu(yx)| check runs alongside and must agree.
    """
    y_blocks = form.algebra.check_blocks(y_blocks)
    comm = max(
        linalg.op_norm(y @ w - w @ y) for y, w in zip(y_blocks, form.densities)
    )
    exact = comm <= tol
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(n_samples):
        x = [
            (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            for n in form.algebra.block_dims
        ]
        xy = evaluate_complex(form, block_mul(x, y_blocks))
        yx = evaluate_complex(form, block_mul(y_blocks, x))
        worst = max(worst, abs(xy - yx))
    sampled = worst <= max(tol, 1e-8) * max(
        1.0, max(linalg.op_norm(y) for y in y_blocks)
    ) * max(1.0, form.total())
    if exact != sampled:
        # The exact algebraic check decides; a disagreement signals that the
        # sampling tolerance is too tight for this conditioning.
        return exact
    return exact


def is_tracial(form: PositiveForm, tol: float = 1e-10) -> bool:
    """True iff each block density is a nonnegative multiple of the identity."""
    for w, n in zip(form.densities, form.algebra.block_dims):
        c = np.trace(w).real / n
        if linalg.op_norm(w - c * np.eye(n)) > tol * max(1.0, abs(c)):
            return False
    return True


def orthogonal(a: PositiveForm, b: PositiveForm, tol: float = 1e-9) -> bool:
    """True iff the support projections are (numerically) orthogonal."""
    if a.algebra != b.algebra:
        raise ShapeMismatchError("forms live on different algebras")
    worst = 0.0
    for sa, sb in zip(a.support(), b.support()):
        worst = max(worst, linalg.op_norm(sa.matrix @ sb.matrix))
    return worst <= tol


def random_form(algebra: BlockAlgebra, rng, ranks=None, normalized=True) -> PositiveForm:
    """Random positive form; optionally rank deficient per block."""
    rng = rng_from(rng)
    dens = []
    for i, n in enumerate(algebra.block_dims):
        r = None if ranks is None else ranks[i]
        dens.append(random_psd(n, rng, rank=r))
    form = PositiveForm(algebra, dens)
    if normalized:
        tot = form.total()
        if tot > 0:
            form = form.scaled(1.0 / tot)
    return form
