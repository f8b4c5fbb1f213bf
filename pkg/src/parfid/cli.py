"""Command-line interface.

Exit codes: 0 success / feasible; 2 schema or usage errors; 3 validation
failures; 4 infeasible; 5 unknown feasibility; 6 counterexample premise
violation. The environment variable PARFID_SEED overrides the default seed.

Document convention for two-sided commands (feasibility, counterexample):
input-side matrices are read from the first block of the document's
algebra and output-side matrices from the last block, so a single-factor
document serves the equal-dimension case and a two-block document the
general one.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .channels import (
    Feasibility,
    FeasibilityConfig,
    feasibility,
    transformability_counterexample,
)
from .errors import ParfidError, PremiseError, ValidationError
from .fidelity import (
    OptimizerConfig,
    fidelity_value,
    fidelity_variational,
)
from .forms import BlockAlgebra, PositiveForm
from .io import SCHEMA, MatrixDocument
from .partial import partial_fidelity_spectral, profile, resolve_ranks
from .sweeps import SUITES, run_suite

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_VALIDATION = 3
EXIT_INFEASIBLE = 4
EXIT_UNKNOWN = 5
EXIT_PREMISE = 6


def _default_seed() -> int:
    return int(os.environ.get("PARFID_SEED", "0"))


def _emit(payload: dict):
    json.dump(payload, sys.stdout, indent=1)
    sys.stdout.write("\n")


def _load_document(path: str) -> MatrixDocument:
    return MatrixDocument.load(path)


def _form(doc: MatrixDocument, name: str) -> PositiveForm:
    return doc.form(name)


def _side_matrix(doc: MatrixDocument, name: str, side: str) -> np.ndarray:
    blocks = doc.blocks(name)
    return blocks[0] if side == "in" else blocks[-1]


def cmd_fidelity(args) -> int:
    doc = _load_document(args.input)
    omega = _form(doc, args.omega)
    rho = _form(doc, args.rho)
    bound = float(np.sqrt(omega.total() * rho.total()))
    routes = {}
    if args.route in ("spectral", "all"):
        routes["spectral"] = fidelity_value(omega, rho)
    if args.route in ("variational", "all"):
        rep = fidelity_variational(omega, rho, OptimizerConfig(seed=_default_seed()))
        routes["variational"] = {
            "value": rep.value,
            "iterations": rep.iterations,
            "converged": rep.converged,
            "gradient_norm": rep.residual,
        }
    value = routes.get("spectral")
    if value is None:
        value = routes["variational"]["value"]
    _emit({"fidelity": value, "routes": routes, "upper_bound": bound})
    return EXIT_OK


def cmd_profile(args) -> int:
    doc = _load_document(args.input)
    omega = _form(doc, args.omega)
    rho = _form(doc, args.rho)
    tau = doc.trace()
    if args.ranks:
        ranks = tuple(int(x) for x in args.ranks.split(","))
        value, q0 = partial_fidelity_spectral(omega, rho, tau, ranks)
        _emit({"ranks": list(ranks), "value": value, "minimizer_ranks": list(q0.ranks)})
        return EXIT_OK
    if doc.algebra.n_blocks != 1:
        raise ValidationError("the k-scan needs a single factor; use --ranks otherwise")
    prof = profile(omega, rho, tau)
    rows = []
    for k, value in enumerate(prof.values):
        _, q0 = partial_fidelity_spectral(omega, rho, tau, (k,))
        rows.append({"k": k, "value": value, "minimizer_rank_check": q0.ranks[0] == k})
    if args.csv:
        sys.stdout.write("k,value\n")
        for row in rows:
            sys.stdout.write(f"{row['k']},{row['value']:.17g}\n")
    else:
        _emit({"profile": rows, "fidelity": prof.fidelity})
    return EXIT_OK


def cmd_feasibility(args) -> int:
    doc = _load_document(args.input)
    name_in = args.pair_in.split(",")
    name_out = args.pair_out.split(",")
    if len(name_in) != 2 or len(name_out) != 2:
        raise ValidationError("--pair-in and --pair-out each need two names")
    omega = _side_matrix(doc, name_in[0], "in")
    rho = _side_matrix(doc, name_in[1], "in")
    omega_p = _side_matrix(doc, name_out[0], "out")
    rho_p = _side_matrix(doc, name_out[1], "out")
    cfg = FeasibilityConfig(feas_tol=args.tol, max_iters=args.max_iters)
    verdict = feasibility(omega, rho, omega_p, rho_p, cfg)
    _emit(
        {
            "status": verdict.status.value,
            "iterations": verdict.iterations,
            "psd_residual": verdict.psd_residual,
            "affine_residual": verdict.affine_residual,
            "infeasibility_margin": verdict.infeasibility_margin,
        }
    )
    if verdict.status is Feasibility.FEASIBLE:
        return EXIT_OK
    if verdict.status is Feasibility.INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_UNKNOWN


def cmd_counterexample(args) -> int:
    doc = _load_document(args.input)
    w = _side_matrix(doc, args.omega, "in")
    w_p = _side_matrix(doc, args.omega_prime, "out")
    result = transformability_counterexample(w, w_p, seed=_default_seed())
    n, m = w.shape[0], w_p.shape[0]
    algebra = BlockAlgebra((n, m)) if n != m or doc.algebra.n_blocks > 1 else BlockAlgebra((n,))
    zero_n = np.zeros((n, n))
    zero_m = np.zeros((m, m))

    def blocks(mat, side):
        if algebra.n_blocks == 1:
            return [mat]
        return [mat, zero_m] if side == "in" else [zero_n, mat]

    out_doc = MatrixDocument(
        algebra,
        {
            "omega_in": ("form", blocks(w, "in")),
            "rho_in": ("form", blocks(result["rho_psi"], "in")),
            "omega_out": ("form", blocks(w_p, "out")),
            "rho_out": ("form", blocks(result["rho_phi"], "out")),
        },
    )
    if args.out:
        out_doc.save(args.out)
    report = {
        "lambda": result["lambda"],
        "beta": result["beta"],
        "fidelity_in": result["fidelity_in"],
        "fidelity_out": result["fidelity_out"],
        "certificate_in": result["certificate_in"],
        "certificate_out": result["certificate_out"],
        "psi": [[z.real, z.imag] for z in result["psi"]],
        "phi": [[z.real, z.imag] for z in result["phi"]],
    }
    if not args.out:
        report["document"] = out_doc.to_dict()
    _emit(report)
    return EXIT_OK


def cmd_check(args) -> int:
    if args.suite not in SUITES:
        sys.stderr.write(
            f"unknown suite {args.suite!r}; known: {', '.join(sorted(SUITES))}\n"
        )
        return EXIT_SCHEMA
    result = run_suite(
        args.suite,
        cases=args.cases,
        seed=args.seed if args.seed is not None else _default_seed(),
        inject_violation=args.inject_violation,
        jobs=args.jobs,
    )
    _emit(result.to_dict())
    return EXIT_OK if result.passed else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parfid",
        description="Fidelity and rank-restricted fidelity of positive forms "
        f"on block matrix algebras (document schema {SCHEMA}).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fidelity", help="fidelity of two named forms")
    p.add_argument("input", help="matrix document path")
    p.add_argument("--omega", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--route", choices=("spectral", "variational", "all"), default="spectral")
    p.set_defaults(fn=cmd_fidelity)

    p = sub.add_parser("profile", help="rank-restricted fidelity scan")
    p.add_argument("input")
    p.add_argument("--omega", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--ranks", help="per-block rank vector, comma separated")
    p.add_argument("--csv", action="store_true", help="emit two-column CSV")
    p.set_defaults(fn=cmd_profile)

    p = sub.add_parser("feasibility", help="joint channel transformability")
    p.add_argument("input")
    p.add_argument("--pair-in", required=True, metavar="OMEGA,RHO")
    p.add_argument("--pair-out", required=True, metavar="OMEGA,RHO")
    p.add_argument("--max-iters", type=int, default=20_000)
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(fn=cmd_feasibility)

    p = sub.add_parser(
        "counterexample",
        help="equal-fidelity pair with a channel-transformability obstruction",
    )
    p.add_argument("input")
    p.add_argument("--omega", required=True)
    p.add_argument("--omega-prime", required=True)
    p.add_argument("--out", help="write the resulting document here")
    p.set_defaults(fn=cmd_counterexample)

    p = sub.add_parser("check", help="run a named property sweep")
    p.add_argument("--suite", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cases", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--inject-violation", action="store_true")
    p.set_defaults(fn=cmd_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PremiseError as exc:
        sys.stderr.write(f"premise violation: {exc}\n")
        return EXIT_PREMISE
    except ValidationError as exc:
        msg = str(exc)
        sys.stderr.write(f"error: {msg}\n")
        schema_words = ("schema", "JSON", "document", "No such", "matrix named")
        if any(w in msg for w in schema_words):
            return EXIT_SCHEMA
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SCHEMA
    except ParfidError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
