"""Named property sweeps over seeded random instances.

Each sweep draws `cases` independent instances from a base seed, checks one
mathematical invariant per instance, and reports failures with the first
failing case seed. `inject_violation` plants a deliberate defect in every
case so callers can verify that the harness actually detects violations.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .channels import apply, random_cptp
from .errors import ParfidError
from .fidelity import fidelity_value
from .forms import BlockAlgebra, PositiveForm, Trace, random_form
from .linalg import dagger, herm
from .pairs import (
    complete_pair,
    conjugate_pairs_element,
    make_minimal_pair,
    support_equivalence_under_conjugation,
)
from .partial import (
    SearchConfig,
    check_partial_invariance,
    check_sandwich,
    partial_fidelity_direct_sum,
    partial_fidelity_sampling,
    partial_fidelity_spectral,
    partial_fidelity_variational,
)
from .rand import (
    random_density,
    random_invertible,
    random_psd,
    rng_from,
)


@dataclass(frozen=True)
class SweepResult:
    suite: str
    cases: int
    failures: int
    first_failing_seed: int | None = None
    details: tuple = field(default=(), compare=False)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "cases": self.cases,
            "failures": self.failures,
            "passed": self.passed,
            "first_failing_seed": self.first_failing_seed,
            "details": list(self.details[:10]),
        }


def _case_seed(seed: int, i: int) -> int:
    return (int(seed) * 1_000_003 + i) % (2**63)


def _run(name, cases, seed, check_one, jobs=1):
    seeds = [_case_seed(seed, i) for i in range(cases)]

    def wrapped(s):
        try:
            ok, detail = check_one(s)
        except ParfidError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        return ok, detail

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(wrapped, seeds))
    else:
        results = [wrapped(s) for s in seeds]
    failures = [(s, d) for s, (ok, d) in zip(seeds, results) if not ok]
    return SweepResult(
        suite=name,
        cases=cases,
        failures=len(failures),
        first_failing_seed=failures[0][0] if failures else None,
        details=tuple(d for _, d in failures),
    )


def _random_algebra(rng) -> BlockAlgebra:
    choices = [(2,), (3,), (4,), (2, 2), (2, 3)]
    return BlockAlgebra(choices[int(rng.integers(len(choices)))])


def sweep_support_equivalence(cases=200, seed=0, inject_violation=False, jobs=1):
    """s(y* x y) stays in the class of s(x) for invertible y."""

    def check_one(s):
        rng = rng_from(s)
        alg = _random_algebra(rng)
        ranks = [int(rng.integers(0, n + 1)) for n in alg.block_dims]
        x = [random_psd(n, rng, rank=r) for n, r in zip(alg.block_dims, ranks)]
        if inject_violation:
            # conjugation by a non-invertible element may collapse the support
            y = [np.diag([1.0] + [0.0] * (n - 1)).astype(complex) for n in alg.block_dims]
        else:
            y = [random_invertible(n, rng) for n in alg.block_dims]
        sx, sy, same = support_equivalence_under_conjugation(x, y, alg)
        detail = f"ranks {sx.ranks} vs {sy.ranks}"
        if inject_violation and sum(sx.ranks) <= alg.n_blocks:
            return False, "planted collapse (draw too small to differ in rank)"
        return same, detail

    return _run("support-equivalence", cases, seed, check_one, jobs)


def sweep_pairs(cases=200, seed=0, inject_violation=False, jobs=1):
    """Completion and conjugation inside the pair algebra round-trip."""

    def check_one(s):
        rng = rng_from(s)
        alg = _random_algebra(rng)
        ranks = [int(rng.integers(1, n + 1)) for n in alg.block_dims]
        pair = make_minimal_pair(alg, ranks, rng)
        a = []
        for pb, n, r in zip(pair.p.blocks, alg.block_dims, ranks):
            g = random_invertible(n, rng)
            a.append(herm(pb @ g @ dagger(g) @ pb) + 0.0)
        elem = complete_pair(a, pair)
        if inject_violation:
            from .pairs import PairsElement

            bad = [b + 0.05 * np.eye(b.shape[0]) for b in elem.b]
            PairsElement(alg, elem.a, bad, elem.class_ranks).validate()  # raises
            return False, "planted defect not detected"
        y = [random_invertible(n, rng, max_cond=100.0) for n in alg.block_dims]
        conj = conjugate_pairs_element(elem, y)
        yi = [np.linalg.inv(m) for m in y]
        back = conjugate_pairs_element(conj, yi)
        err = max(
            max(linalg.op_norm(x0 - x1) for x0, x1 in zip(elem.a, back.a)),
            max(linalg.op_norm(x0 - x1) for x0, x1 in zip(elem.b, back.b)),
        )
        return err <= 1e-8 * max(1.0, max(linalg.op_norm(x) for x in elem.b)), f"round-trip error {err:.3e}"

    return _run("pairs", cases, seed, check_one, jobs)


def sweep_subadditivity(cases=200, seed=0, inject_violation=False, jobs=1):
    """Splitting a* b into pieces never lowers the summed fidelity."""

    def check_one(s):
        rng = rng_from(s)
        alg = _random_algebra(rng)
        omega = random_form(alg, rng)
        rho = random_form(alg, rng)
        a = [random_invertible(n, rng) for n in alg.block_dims]
        b = [random_invertible(n, rng) for n in alg.block_dims]
        extra = [
            (
                [0.5 * random_invertible(n, rng) for n in alg.block_dims],
                [0.5 * random_invertible(n, rng) for n in alg.block_dims],
            )
            for _ in range(2)
        ]
        rest = [dagger(x) @ y for x, y in zip(a, b)]
        for aj, bj in extra:
            rest = [r - dagger(x) @ y for r, x, y in zip(rest, aj, bj)]
        first = (alg.identity(), rest)
        decomposition = [first] + extra
        if inject_violation:
            decomposition[1] = (
                decomposition[1][0],
                [1.5 * m for m in decomposition[1][1]],
            )
        from .fidelity import check_subadditivity

        lhs, rhs = check_subadditivity(omega, rho, a, b, decomposition)
        return lhs <= rhs + 1e-9, f"lhs {lhs:.12e} > rhs {rhs:.12e}"

    return _run("subadditivity", cases, seed, check_one, jobs)


def sweep_sandwich(cases=200, seed=0, inject_violation=False, jobs=1):
    """Lower and upper trace bounds bracket the rank-restricted value."""

    def check_one(s):
        rng = rng_from(s)
        n = int(rng.integers(2, 5))
        alg = BlockAlgebra((n,))
        tau = Trace.standard(alg)
        a = random_psd(n, rng)
        b = random_psd(n, rng)
        if inject_violation:
            a = a - 1.2 * float(np.max(np.linalg.eigvalsh(a))) * np.eye(n)
        k = int(rng.integers(0, n + 1))
        lower, value, upper = check_sandwich(tau, [a], [b], (k,), n_samples=50, seed=s)
        ok = lower <= value + 1e-9 <= upper + 2e-9
        return ok, f"chain {lower:.6e}, {value:.6e}, {upper:.6e}"

    return _run("sandwich", cases, seed, check_one, jobs)


def sweep_monotonicity(cases=200, seed=0, inject_violation=False, jobs=1):
    """Applying one channel to both states never lowers their fidelity."""

    def check_one(s):
        rng = rng_from(s)
        n = 3
        w = random_density(n, rng)
        r = random_density(n, rng)
        chan = random_cptp(n, rng)
        f_in = fidelity_value(PositiveForm.from_matrix(w), PositiveForm.from_matrix(r))
        wo, ro = apply(chan, w), apply(chan, r)
        if inject_violation:
            # a trace-leaking (non-channel) map shrinks the fidelity
            wo, ro = 0.64 * wo, 0.64 * ro
        f_out = linalg.trace_norm(linalg.sqrt_psd(wo) @ linalg.sqrt_psd(ro))
        return f_out >= f_in - 1e-9, f"margin {f_out - f_in:.3e}"

    return _run("monotonicity", cases, seed, check_one, jobs)


def sweep_additivity(cases=100, seed=0, inject_violation=False, jobs=1):
    """Blockwise values sum to the value on the assembled algebra."""

    def check_one(s):
        rng = rng_from(s)
        alg = BlockAlgebra((2, 3) if rng.integers(2) else (2, 2))
        omega = random_form(alg, rng)
        rho = random_form(alg, rng)
        tau = Trace(alg, tuple(float(rng.uniform(0.5, 2.0)) for _ in alg.block_dims))
        ranks = [int(rng.integers(0, n + 1)) for n in alg.block_dims]
        if inject_violation:
            bumpable = [i for i, (k, n) in enumerate(zip(ranks, alg.block_dims)) if k < n]
            if not bumpable:
                return True, ""  # nothing to tamper with; skip
            skewed = list(ranks)
            skewed[bumpable[0]] += 1
            v1 = partial_fidelity_direct_sum(omega, rho, tau, ranks)
            v2, _ = partial_fidelity_spectral(omega, rho, tau, skewed)
            return abs(v1 - v2) <= 1e-10, f"planted rank skew: {v1:.12e} vs {v2:.12e}"
        partial_fidelity_direct_sum(omega, rho, tau, ranks)  # raises on mismatch
        return True, ""

    return _run("additivity", cases, seed, check_one, jobs)


def sweep_invariance(cases=200, seed=0, inject_violation=False, jobs=1):
    """a* b = c* d gives equal rank-restricted values for the derived forms."""

    def check_one(s):
        rng = rng_from(s)
        alg = _random_algebra(rng)
        omega = random_form(alg, rng)
        rho = random_form(alg, rng)
        tau = Trace.standard(alg)
        ranks = [int(rng.integers(0, n + 1)) for n in alg.block_dims]
        a = [random_invertible(n, rng, max_cond=50.0) for n in alg.block_dims]
        b = [random_invertible(n, rng, max_cond=50.0) for n in alg.block_dims]
        g = [random_invertible(n, rng, max_cond=50.0) for n in alg.block_dims]
        c = g
        d = [np.linalg.inv(dagger(gi)) @ dagger(ai) @ bi for gi, ai, bi in zip(g, a, b)]
        if inject_violation:
            d = [1.05 * m for m in d]
        f1, f2 = check_partial_invariance(omega, rho, tau, ranks, a, b, c, d)
        return abs(f1 - f2) <= 1e-8 * max(1.0, f1), f"values {f1:.12e} vs {f2:.12e}"

    return _run("invariance", cases, seed, check_one, jobs)


def sweep_cross_route(cases=40, seed=0, inject_violation=False, jobs=1):
    """Sampling and pair-search stay above the closed form and close to it."""

    def check_one(s):
        rng = rng_from(s)
        n = int(rng.integers(2, 4))
        alg = BlockAlgebra((n,))
        tau = Trace.standard(alg)
        omega = random_form(alg, rng)
        rho = random_form(alg, rng)
        k = int(rng.integers(0, n + 1))
        spectral, _ = partial_fidelity_spectral(omega, rho, tau, (k,))
        sampled = partial_fidelity_sampling(omega, rho, tau, (k,), n_samples=2000, seed=s)
        if inject_violation:
            sampled -= 0.01
        report = partial_fidelity_variational(
            omega, rho, (k,), SearchConfig(max_iters=400, restarts=2, seed=s)
        )
        ok = (
            sampled >= spectral - 1e-9
            and sampled - spectral <= 5e-3
            and report.value >= spectral - 1e-9
            and report.value - spectral <= 5e-3
        )
        return ok, (
            f"spectral {spectral:.8e}, sampled {sampled:.8e}, search {report.value:.8e}"
        )

    return _run("cross-route", cases, seed, check_one, jobs)


SUITES = {
    "support-equivalence": sweep_support_equivalence,
    "pairs": sweep_pairs,
    "subadditivity": sweep_subadditivity,
    "sandwich": sweep_sandwich,
    "monotonicity": sweep_monotonicity,
    "additivity": sweep_additivity,
    "invariance": sweep_invariance,
    "cross-route": sweep_cross_route,
}


def run_suite(name: str, cases: int | None = None, seed: int = 0,
              inject_violation: bool = False, jobs: int = 1) -> SweepResult:
    if name not in SUITES:
        raise KeyError(name)
    fn = SUITES[name]
    kwargs = {"seed": seed, "inject_violation": inject_violation, "jobs": jobs}
    if cases is not None:
        kwargs["cases"] = cases
    return fn(**kwargs)
