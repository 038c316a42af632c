"""Command-line entry point: ``crdegen COMMAND FILE [options]``."""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import report as rep
from .dsl import parse_document
from .errors import CRError, UsageError, ValidationError
from .hypersurface import validate_point
from .linalg import DEFAULT_TOL
from .mapping import check_map, map_nondegeneracy_order, transversality_certificate
from .nondegen import (DEFAULT_KMAX, default_deg_det_spec, deg_det, degeneracy_ideal, delta,
                       e_space, generic_order, leading_term_defect, nondegeneracy_order,
                       row_order_sign, second_order_deg_det_spec)
from .normalize import normalize_pair

COMMANDS = ("analyze", "generic-order", "delta", "deg-det", "degeneracy-ideal", "normalize",
            "check-map", "map-nondegeneracy", "certificate")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crdegen",
                                description="Nondegeneracy and map normalization for real "
                                            "hypersurfaces given by polynomial defining functions.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("file", help=".crs document")
    p.add_argument("--hypersurface", metavar="NAME", help="hypersurface to use (default: the "
                   "point's surface or the only one declared)")
    p.add_argument("--point", metavar="NAME")
    p.add_argument("--map", metavar="NAME")
    p.add_argument("--max-order", type=int, default=DEFAULT_KMAX, metavar="K")
    p.add_argument("--trials", type=int, default=50, metavar="T")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--backend", choices=("exact", "float"), default="exact")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, metavar="X")
    p.add_argument("--jobs", type=int, default=1, metavar="J")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--indices", metavar="I,J,...", help="Delta indices, e.g. 2,2")
    p.add_argument("--rows", choices=("first", "second"), default="first",
                   help="deg-det row choice: gradient plus first-order rows, or the last one "
                        "replaced by the second derivative in the last field")
    p.add_argument("--k0", type=int, default=2, metavar="K",
                   help="row order bound for degeneracy-ideal (default 2)")
    p.add_argument("--jet-order", type=int, default=8, metavar="K")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    return p


# --------------------------------------------------------------------------
# helpers

def _pick_surface(doc, args):
    if args.hypersurface:
        return doc.hypersurface(args.hypersurface)
    if args.point:
        return doc.hypersurfaces[doc.point(args.point).on]
    return doc.hypersurface()


def _pick_point(doc, H, args, required=True):
    if args.point:
        decl = doc.point(args.point)
        if decl.on != H.name:
            raise UsageError(f"point {decl.name} lies on {decl.on}, not {H.name}")
        return decl
    on_h = [p for p in doc.points.values() if p.on == H.name]
    if len(on_h) == 1:
        return on_h[0]
    if required:
        raise UsageError(f"name a point on {H.name} with --point")
    return None


def _span_dims(result):
    return list(result.report.dims)


def _map_parts(doc, args):
    decl = doc.map_decl(args.map)
    return (doc.hypersurfaces[decl.source], doc.hypersurfaces[decl.target],
            doc.map_jet(decl.name), decl)


def _tol(args):
    return args.tol if args.backend == "float" else 0.0


# --------------------------------------------------------------------------
# commands

def cmd_analyze(doc, args):
    H = _pick_surface(doc, args)
    pt = _pick_point(doc, H, args)
    res = nondegeneracy_order(H, pt.coords, args.max_order, tol=args.tol)
    dims = _span_dims(res)
    e1 = dims[1] if len(dims) > 1 else e_space(H, pt.coords, 1, tol=args.tol).dims[1]
    return {
        "hypersurface": H.name,
        "form": H.form,
        "point": pt.name,
        "order": str(res),
        "dims": dims,
        "levi_rank": e1 - 1,
    }


def cmd_generic_order(doc, args):
    H = _pick_surface(doc, args)
    res = generic_order(H, args.max_order, args.trials, args.seed, jobs=args.jobs, tol=args.tol)
    return {
        "hypersurface": H.name,
        "trials": res.trials,
        "seed": args.seed,
        "histogram": res.histogram,
        "generic_order": res.generic_order,
        "min_order": res.min_order,
        "claim": res.claim,
    }


def cmd_delta(doc, args):
    H = _pick_surface(doc, args)
    if not args.indices:
        raise UsageError("delta needs --indices, e.g. --indices 2,2")
    try:
        idx = tuple(int(s) for s in args.indices.split(",") if s.strip())
    except ValueError:
        raise UsageError(f"bad --indices {args.indices!r}") from None
    out = {"hypersurface": H.name, "indices": list(idx)}
    pt = _pick_point(doc, H, args, required=False) if args.point else None
    if pt is not None:
        validate_point(H, pt.coords, args.tol)
        out["point"] = pt.name
        out["value"] = rep.scalar(delta(H, idx, pt.coords))
    else:
        out["polynomial"] = rep.poly(delta(H, idx), H.names)
    return out


def cmd_deg_det(doc, args):
    H = _pick_surface(doc, args)
    spec = (default_deg_det_spec(H.nvars) if args.rows == "first"
            else second_order_deg_det_spec(H.nvars))
    res = deg_det(H, spec)
    out = {
        "hypersurface": H.name,
        "rows": [list(w) for w in res.rows_spec],
        "determinant": rep.poly(res.det, H.names),
        "row_order_sign": row_order_sign(H.nvars),
    }
    if args.rows == "first" and H.is_graph and H.distinguished == H.nvars - 1:
        defect = leading_term_defect(H)
        out["leading_term_defect_low_degree"] = rep.poly(defect.truncate(1), H.names)
    return out


def cmd_degeneracy_ideal(doc, args):
    H = _pick_surface(doc, args)
    gens = degeneracy_ideal(H, args.k0)
    return {
        "hypersurface": H.name,
        "k0": args.k0,
        "count": len(gens),
        "generators": [rep.poly(g, H.names) for g in gens],
        "all_zero": not gens,
    }


def _normalization_payload(res):
    out = {"branch": res.branch, "source_steps": list(res.source_change.steps),
           "lambda": rep.scalar(res.jet.lam), "orientation_flipped": res.jet.flipped}
    out["hermitian_identity_deviation"] = rep.scalar(res.hermitian.deviation)
    out["rank_U"] = res.hermitian.rank_U
    if res.change is None:
        out["message"] = "Levi-nondegenerate target point; degenerate normalization not applied"
        return out
    out["U_congruence"] = rep.matrix(res.congruence)
    out["D"] = rep.matrix(res.change.matrix)
    out["D_inverse"] = rep.matrix(res.change.inverse)
    cert = res.certificate
    out["certificate"] = {
        "passed": cert.passed,
        "deviations": {k: rep.scalar(v) for k, v in cert.deviations.items()},
    }
    out["normalized_map"] = [rep.poly(p, res.source.names) for p in res.map.polys()]
    out["normalized_target"] = rep.poly(res.target.rho.chop(1e-15) if res.target.rho.is_float()
                                        else res.target.rho, res.target.names)
    return out


def cmd_normalize(doc, args):
    M, Mp, F, decl = _map_parts(doc, args)
    res = normalize_pair(M, Mp, F, tol=args.tol)
    return {"map": decl.name, **_normalization_payload(res)}


def cmd_check_map(doc, args):
    M, Mp, F, decl = _map_parts(doc, args)
    res = check_map(M, Mp, F, args.jet_order, _tol(args))
    out = {
        "map": decl.name,
        "mode": res.mode,
        "vanishes": res.vanishes,
        "residual": rep.poly(res.residual, M.names),
        "lowest_degree": res.lowest_degree,
    }
    if res.quotient is not None:
        out["quotient"] = rep.poly(res.quotient, M.names)
    if res.jet_order is not None:
        out["jet_order"] = res.jet_order
    return out


def cmd_map_nondegeneracy(doc, args):
    M, Mp, F, decl = _map_parts(doc, args)
    if F.basepoint is None:
        raise UsageError(f"map {decl.name} needs a basepoint")
    res = map_nondegeneracy_order(M, Mp, F, args.max_order, tol=args.tol)
    return {"map": decl.name, "order": str(res), "dims": _span_dims(res)}


def cmd_certificate(doc, args):
    M, Mp, F, decl = _map_parts(doc, args)
    res = normalize_pair(M, Mp, F, tol=args.tol)
    out = {"map": decl.name, "normalization": _normalization_payload(res)}
    if res.change is None:
        return out
    cert = transversality_certificate(res.source, res.target, res.map, args.tol)
    out["certificate"] = {
        "rho_row_at_0": rep.vector(cert.rho_row_at_0),
        "cr_rows_at_0": rep.matrix(cert.li_rows_at_0) if cert.li_rows_at_0 else [],
        "pair": list(cert.pair) if cert.pair else None,
        "nu": rep.vector(cert.nu) if cert.nu else None,
        "nu_n_product": rep.scalar(cert.nu_n_product) if cert.nu_n_product is not None else None,
        "product_agreement": cert.product_agreement,
        "stack_rank": cert.stack_rank,
        "checks": cert.checks,
        "verdict": cert.verdict,
        "message": cert.message,
    }
    return out


DISPATCH = {
    "analyze": cmd_analyze,
    "generic-order": cmd_generic_order,
    "delta": cmd_delta,
    "deg-det": cmd_deg_det,
    "degeneracy-ideal": cmd_degeneracy_ideal,
    "normalize": cmd_normalize,
    "check-map": cmd_check_map,
    "map-nondegeneracy": cmd_map_nondegeneracy,
    "certificate": cmd_certificate,
}


def run(args: argparse.Namespace, text: str) -> dict:
    """Parse ``text`` and run one command; returns the report dictionary."""
    start = time.perf_counter()
    doc = parse_document(text, float_ok=args.backend == "float")
    result = DISPATCH[args.command](doc, args)
    report = {
        "schema": rep.SCHEMA,
        "command": args.command,
        "input": {"file": os.path.basename(args.file), "sha256": rep.digest(text)},
        "options": {
            "backend": args.backend,
            "tol": args.tol,
            "max_order": args.max_order,
            "trials": args.trials,
            "seed": args.seed,
            "point": args.point,
            "map": args.map,
        },
        "result": result,
    }
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - start, 6)
    return report


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"crdegen: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return UsageError.exit_code
    try:
        report = run(args, text)
    except CRError as exc:
        print(f"crdegen: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, ZeroDivisionError) as exc:
        print(f"crdegen: numerical failure: {exc}", file=sys.stderr)
        return ValidationError.exit_code
    out = rep.to_json(report) if args.format == "json" else rep.to_text(report)
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
