"""Command-line interface ``cph``.

Every command reads one JSON input document and writes one JSON report to
stdout.  Exit codes: 0 success, 2 malformed input, 3 failed precondition or
domain check, 4 non-convergence, 5 structural contradiction.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import cpmap, fock, markov, similarity, superharmonic
from .cpmap import KrausFamily
from .errors import ConvergenceError, CphError, DimensionError, DomainError, PreconditionError, StructureError
from .jsonio import SCHEMA_VERSION, InputError, dump_report, load_document
from .opcore import DEFAULT_TOL, is_psd, opnorm

__all__ = ["main", "build_parser", "run"]

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_CONVERGENCE, EXIT_STRUCTURE = 0, 2, 3, 4, 5

_FLAG_TOL = {
    "tol_herm": "herm_tol",
    "tol_psd": "psd_tol",
    "tol_eig": "eig_tol",
    "tol_conv": "conv_tol",
    "max_iter": "max_iter",
}


def _one_based(indices):
    return [int(i) + 1 for i in indices]


def _kraus_input(doc):
    if doc.kind not in ("kraus", "matrix-list"):
        raise InputError(f"this command expects a Kraus family, got kind '{doc.kind}'")
    try:
        return KrausFamily(tuple(doc.matrices))
    except DimensionError as exc:
        raise InputError(str(exc)) from None


def _markov_input(doc):
    if doc.kind == "markov" or (doc.kind == "matrix-list" and len(doc.matrices) == 1):
        return doc.matrices[0]
    raise InputError(f"this command expects a markov matrix, got kind '{doc.kind}'")


def _states_report(states):
    return [
        {
            "period": s.period,
            "trace": s.mass,
            "support_rank": s.support.rank,
            "density": s.density,
        }
        for s in states
        if s.support.rank > 0
    ]


def _pac_report(pac):
    return {
        "rank_lo": pac.P_lo.rank,
        "rank_hi": pac.P_hi.rank,
        "certified": pac.certified_equal,
        "verdict": (
            f"rank {pac.P_lo.rank}" if pac.certified_equal
            else f"indeterminate between ranks {pac.P_lo.rank} and {pac.P_hi.rank}"
        ),
        "witness_count": len(pac.witnesses),
        "witness_sources": pac.witness_sources,
        "periods": pac.periods,
    }


def cmd_analyze_cpmap(doc, tol, args):
    phi = _kraus_input(doc)
    contraction, witness = cpmap.is_row_contraction(phi, tol)
    spectrum = phi.spectrum
    verdicts = {"row_contraction": contraction}
    diagnostics = {
        "n": phi.n,
        "d": phi.d,
        "row_norm": witness,
        "cp_spectral_radius": spectrum.radius,
        "power_bounded": spectrum.radius <= 1 + tol.eig_tol and not spectrum.defective,
    }
    certificates = {}
    if contraction:
        ac = fock.is_absolutely_continuous_finite(phi, tol, cross_check=False)
        certificates["limit_phi_n_I"] = ac.limit
        diagnostics["coisometric_rank"] = ac.coisometric_rank
        verdicts["absolutely_continuous"] = ac.absolutely_continuous
    if diagnostics["power_bounded"]:
        I = np.eye(phi.n)
        if is_psd(I - phi.row_gram, tol):
            riesz = superharmonic.analyze(phi, I, tol)
            certificates["riesz_identity"] = {
                "harmonic_part": riesz.harmonic_part,
                "pure_part": riesz.pure_part,
            }
            diagnostics["riesz_identity"] = {
                "purity_defect": riesz.purity_defect,
                "pure_part_norm": opnorm(riesz.pure_part),
                "decay_iterations": riesz.decay_iterations,
            }
        pac = superharmonic.pac_bounds(phi, tol, seed=args.seed)
        diagnostics["pac"] = _pac_report(pac)
        verdicts["pac_certified"] = pac.certified_equal
        certificates["P_lo"] = pac.P_lo.matrix
        certificates["P_hi"] = pac.P_hi.matrix
        certificates["invariant_states"] = _states_report(pac.invariant_states)
        if contraction:
            verdicts["ac_consistent_with_pac"] = (
                verdicts["absolutely_continuous"] == (pac.P_lo.rank == phi.n)
                if pac.certified_equal else None
            )
    else:
        diagnostics["skipped"] = "P_ac bounds and Riesz decomposition need a power-bounded map"
    return verdicts, certificates, diagnostics


def cmd_analyze_markov(doc, tol, args):
    A = _markov_input(doc)
    cf = markov.canonical_form(A, tol)
    verdicts = {"pac_indices": _one_based(cf.transient_block.indices)}
    certificates = {
        "permutation": _one_based(cf.permutation),
        "recurrent_classes": [
            {"indices": _one_based(b.indices), "left_eigvec": b.left_eigvec}
            for b in cf.recurrent_blocks
        ],
        "transient_block": {"indices": _one_based(cf.transient_block.indices)},
        "invariant_vectors": markov.invariant_vectors(A, tol),
    }
    diagnostics = {
        "n": cf.A.shape[0],
        "transient_spectral_radius": cf.transient_block.spectral_radius,
        "recurrent_count": len(cf.recurrent_blocks),
    }
    if args.emit_kraus or args.verify_general:
        phi = markov.markov_to_kraus(A, tol)
        if args.emit_kraus:
            certificates["kraus"] = list(phi.kraus)
        if args.verify_general:
            pac = superharmonic.pac_bounds(phi, tol, seed=args.seed)
            expected = markov.pac_markov(A, tol)
            lo = np.real(np.diag(pac.P_lo.matrix))
            hi = np.real(np.diag(pac.P_hi.matrix))
            target = np.real(np.diag(expected.matrix))
            agrees = bool(
                pac.certified_equal
                and np.max(np.abs(lo - target)) <= 1e-8
                and np.max(np.abs(hi - target)) <= 1e-8
                and pac.P_lo.rank == expected.rank
            )
            diagnostics["general"] = _pac_report(pac)
            verdicts["general_agrees"] = agrees
            if not agrees:
                raise StructureError("general P_ac bounds disagree with the Markov canonical form")
    return verdicts, certificates, diagnostics


def _certificate_report(cert):
    out = {
        "kind": cert.kind,
        "method": cert.method,
        "indeterminate": cert.indeterminate,
        "achieved_norm": cert.achieved_norm,
    }
    if cert.reason:
        out["reason"] = cert.reason
    if cert.found:
        out["R"] = cert.R
        out["W"] = cert.W
        out["conjugated"] = list(cert.conjugated.kraus)
    return out


def cmd_similarity(doc, tol, args):
    phi = _kraus_input(doc)
    certs = {
        "contraction": similarity.similar_to_contraction(phi, tol),
        "c00": similarity.similar_to_c00(phi, tol, seed=args.seed),
        "strict": similarity.similar_to_strict(phi, tol, seed=args.seed),
    }
    verdicts = {name: c.kind for name, c in certs.items()}
    certificates = {name: _certificate_report(c) for name, c in certs.items()}
    diagnostics = {
        "cp_spectral_radius": phi.spectrum.radius,
        "row_norm": cpmap.is_row_contraction(phi, tol).witness,
    }
    return verdicts, certificates, diagnostics


def cmd_dilate(doc, tol, args):
    phi = _kraus_input(doc)
    dil = fock.build_dilation(phi, args.levels, tol)
    verdicts = {
        "isometric_off_top_level": dil.isometry_defect <= 1e-10,
        "dilates": dil.dilation_defect <= 1e-10,
    }
    diagnostics = {
        "H_dim": dil.H_dim,
        "levels": dil.levels,
        "K_dim": dil.K_dim,
        "defect_rank": dil.defect_rank,
        "isometry_defect": dil.isometry_defect,
        "dilation_defect": dil.dilation_defect,
        "minimality_defect": dil.minimality_defect,
        "words_checked": dil.words_checked,
    }
    certificates = {}
    if args.emit_matrices:
        certificates = {"defect": dil.defect, "V": dil.V}
    return verdicts, certificates, diagnostics


COMMANDS = {
    "analyze-cpmap": cmd_analyze_cpmap,
    "analyze-markov": cmd_analyze_markov,
    "similarity": cmd_similarity,
    "dilate": cmd_dilate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="input JSON document")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized searches (default 0)")
    common.add_argument("--tol-herm", type=float)
    common.add_argument("--tol-psd", type=float)
    common.add_argument("--tol-eig", type=float)
    common.add_argument("--tol-conv", type=float)
    common.add_argument("--max-iter", type=int)

    parser = argparse.ArgumentParser(
        prog="cph", description="Analyses of completely positive maps given by Kraus families."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze-cpmap", parents=[common], help="contractivity, limits, Riesz split, P_ac bounds")
    p = sub.add_parser("analyze-markov", parents=[common], help="canonical form of a sub-Markov matrix")
    p.add_argument("--emit-kraus", action="store_true", help="include the Kraus family of the chain")
    p.add_argument("--verify-general", action="store_true",
                   help="cross-check P_ac against the general superharmonic bounds")
    sub.add_parser("similarity", parents=[common], help="similarity certificates")
    p = sub.add_parser("dilate", parents=[common], help="truncated isometric dilation")
    p.add_argument("--levels", type=int, required=True, help="number of defect Fock levels")
    p.add_argument("--emit-matrices", action="store_true", help="include the dilation matrices")
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    """Run the CLI and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK

    try:
        doc = load_document(args.file)
        overrides = dict(doc.tolerances)
        overrides.update({key: getattr(args, flag) for flag, key in _FLAG_TOL.items()
                          if getattr(args, flag) is not None})
        try:
            tol = DEFAULT_TOL.with_overrides(**overrides)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        if getattr(args, "levels", 1) < 1:
            raise InputError("--levels must be a positive integer")
        verdicts, certificates, diagnostics = COMMANDS[args.command](doc, tol, args)
    except InputError as exc:
        return _fail(stderr, EXIT_PARSE, "input", exc)
    except (PreconditionError, DomainError, DimensionError) as exc:
        return _fail(stderr, EXIT_PRECONDITION, "precondition", exc)
    except ConvergenceError as exc:
        return _fail(stderr, EXIT_CONVERGENCE, "convergence", exc)
    except StructureError as exc:
        return _fail(stderr, EXIT_STRUCTURE, "structure", exc)
    except CphError as exc:  # pragma: no cover
        return _fail(stderr, EXIT_STRUCTURE, "error", exc)

    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "input_digest": doc.digest,
        "input_name": doc.name,
        "seed": args.seed,
        "tolerances": tol.as_dict(),
        "verdicts": verdicts,
        "certificates": certificates,
        "diagnostics": diagnostics,
    }
    stdout.write(dump_report(report))
    return EXIT_OK


def _fail(stderr, code, label, exc):
    details = getattr(exc, "diagnostics", None)
    message = f"cph: {label} error: {exc}"
    if details:
        message += " (" + ", ".join(f"{k}={v}" for k, v in sorted(details.items())) + ")"
    stderr.write(message + "\n")
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
