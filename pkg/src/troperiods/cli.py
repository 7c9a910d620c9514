"""Command line front end: problem files in, JSON reports and CSV sweeps out.

The subcommand picks which requests from the problem file actually run:
`triangulate` parses and validates only, `periods` runs the symbolic
expansions, `hodge` the limit filtration, `verify` the numeric sweeps and
`all` everything.  Exit codes: 0 on success, 2 when the input fails to
parse or validate, 3 when a numeric verification cannot meet its contract.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from . import gamma, hodge, problems, verify
from . import tropical as trop

_KINDS_FOR = {
    "triangulate": (),
    "periods": ("sphere", "torus", "leading"),
    "hodge": ("hodge",),
    "verify": ("verify",),
    "all": problems.REQUEST_KINDS,
}

CSV_COLUMNS = ("t", "numeric_re", "numeric_im", "symbolic_re",
               "symbolic_im", "abs_err", "est_quad_err")


def _triangulation_summary(tri):
    inst = tri.instance
    return {
        "dimension": inst.d,
        "monomials": len(inst.data),
        "interior_points": [list(p) for p in inst.W],
        "top_cells": [[list(p) for p in cell] for cell in tri.top_cells],
        "cells_by_dim": {str(k): len(v)
                         for k, v in sorted(tri.cells_by_dim.items())},
    }


def _dual_summary(tc):
    by_dim = {}
    bounded = 0
    for cell in tc.cells.values():
        by_dim[cell.dim] = by_dim.get(cell.dim, 0) + 1
        if cell.bounded:
            bounded += 1
    return {
        "cells_by_dim": {str(k): v for k, v in sorted(by_dim.items())},
        "bounded_cells": bounded,
        "hypersurface_cells": len(tc.marked_cells()),
    }


def _expansion_payload(exp):
    return {"expansion": exp.to_dict(), "rendered": exp.rendered()}


def _run_sphere(state, req):
    exp = gamma.sphere_period_asymptotics(state["inst"], state["tri"],
                                          req["l"], req["v"], req["w"],
                                          state["branches"])
    return _expansion_payload(exp)


def _run_torus(state, req):
    exp = gamma.torus_period_asymptotics(state["inst"], state["tri"],
                                         req["l"], req["v"], req["sigma"],
                                         req["w"])
    return _expansion_payload(exp)


def _run_leading(state, req):
    degree, coeff = gamma.leading_term(state["inst"], state["tri"],
                                       req["l"], req["v"], req["w"])
    z = coeff.numeric()
    return {"degree": degree,
            "coefficient": {"symbolic": str(coeff),
                            "numeric": [z.real, z.imag]}}


def _run_hodge(state, req):
    data = hodge.limit_filtration(state["inst"], state["tri"],
                                  state["branches"])
    return {"hodge": data.to_dict()}


def _run_verify(state, req):
    fam = verify.PositiveRealFamily(state["inst"], req["w"])
    if "sigma" in req:
        cycle = ("torus", req["sigma"])
    else:
        cycle = ("sphere", req["w"])
    cfg = verify.QuadratureConfig(**state["quadrature"])
    ts = [float(t) for t in req.get("t_sweep", ())]
    if not ts:
        return {"cycle": cycle[0], "rows": [],
                "note": "empty t_sweep; nothing to verify"}
    rows = verify.convergence_sweep(fam, req["l"], req["v"], cycle, ts, cfg)
    table = []
    for row in rows:
        table.append({
            "t": row["t"],
            "numeric_re": row["numeric"].real,
            "numeric_im": row["numeric"].imag,
            "symbolic_re": row["symbolic"].real,
            "symbolic_im": row["symbolic"].imag,
            "abs_err": row["abs_err"],
            "est_quad_err": row["est_quad_err"],
        })
    return {"cycle": cycle[0], "rows": table, "slope": rows[0]["slope"]}


_RUNNERS = {
    "sphere": _run_sphere,
    "torus": _run_torus,
    "leading": _run_leading,
    "hodge": _run_hodge,
    "verify": _run_verify,
}


def run_pipeline(doc, which="all", strict=True, threads=1, input_bytes=None):
    """Execute the selected requests of a problem document, in order.

    Returns the report as a plain dict whose json.dumps is byte-for-byte
    reproducible for a fixed input, whatever the thread count: the workers
    only read shared state and the results are assembled in request order.
    """
    assert which in _KINDS_FOR, "unknown subcommand %r" % (which,)
    inst, requests, options, warnings = problems.parse_problem(
        doc, strict=strict)
    try:
        tri = trop.validate_and_triangulate(inst)
    except ValueError as exc:
        raise problems.ValidationError(str(exc)) from None
    tc = trop.dual_complex(tri)
    selected = [(k, req) for k, req in enumerate(requests)
                if req["kind"] in _KINDS_FOR[which]]
    state = {"inst": inst, "tri": tri, "tc": tc,
             "quadrature": options["quadrature"], "branches": None}
    if any(req["kind"] in ("sphere", "hodge") for _, req in selected):
        try:
            state["branches"] = gamma.choose_arg_branches(
                inst, mode=options["branch_mode"], tri=tri)
        except ValueError as exc:
            raise problems.ValidationError(
                "options.branch_mode: %s" % (exc,)) from None

    def run_one(pair):
        k, req = pair
        try:
            return _RUNNERS[req["kind"]](state, req)
        except (verify.ChartGap, verify.NewtonDivergence, AssertionError):
            raise
        except ValueError as exc:
            raise problems.ValidationError(
                "requests[%d]: %s" % (k, exc)) from None

    if threads > 1 and len(selected) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            payloads = list(pool.map(run_one, selected))
    else:
        payloads = [run_one(pair) for pair in selected]

    results = []
    for (k, req), payload in zip(selected, payloads):
        entry = {"request_index": k, "kind": req["kind"],
                 "request": problems.problem_to_dict(
                     inst, [req])["requests"][0]}
        entry.update(payload)
        results.append(entry)

    if input_bytes is None:
        input_bytes = json.dumps(doc, sort_keys=True).encode()
    return {
        "provenance": {
            "engine": "troperiods",
            "engine_version": __version__,
            "input_sha256": hashlib.sha256(input_bytes).hexdigest(),
        },
        "problem": problems.problem_to_dict(inst, requests, options),
        "triangulation": _triangulation_summary(tri),
        "dual_complex": _dual_summary(tc),
        "results": results,
        "warnings": list(warnings),
    }


def report_text(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def emit_sweep_csv(report, directory):
    """Write one CSV per sweep table, named by request index.

    Warns and writes nothing when the report holds no sweeps.  Returns the
    list of paths written.
    """
    sweeps = [r for r in report["results"]
              if r["kind"] == "verify" and r.get("rows")]
    if not sweeps:
        print("warning: no sweep tables in the report; no CSV written",
              file=sys.stderr)
        return []
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise problems.IoError(str(exc)) from None
    paths = []
    for r in sweeps:
        path = os.path.join(directory, "sweep_%d.csv" % r["request_index"])
        try:
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(CSV_COLUMNS)
                for row in r["rows"]:
                    writer.writerow([repr(float(row[c]))
                                     for c in CSV_COLUMNS])
        except OSError as exc:
            raise problems.IoError(str(exc)) from None
        paths.append(path)
    return paths


def build_parser():
    parser = argparse.ArgumentParser(
        prog="troperiods",
        description="Asymptotic expansions of toric hypersurface periods "
                    "over tropical cycles.")
    parser.add_argument("--version", action="version",
                        version="troperiods " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "triangulate": "validate the instance and report the subdivision",
        "periods": "run the symbolic period expansions",
        "hodge": "run the d=1 limit filtration requests",
        "verify": "run the numeric quadrature sweeps",
        "all": "run every request in the file",
    }
    for name in _KINDS_FOR:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--input", required=True, help="problem JSON path")
        p.add_argument("--output",
                       help="report JSON path (stdout when omitted)")
        p.add_argument("--csv-dir",
                       help="directory for sweep CSV files")
        p.add_argument("--strict", dest="strict", action="store_true",
                       default=True,
                       help="reject unknown fields (the default)")
        p.add_argument("--lenient", dest="strict", action="store_false",
                       help="downgrade unknown fields to warnings")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads across independent requests")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.input, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        print("error: cannot read %s: %s" % (args.input, exc),
              file=sys.stderr)
        return 2
    try:
        doc = json.loads(blob)
    except json.JSONDecodeError as exc:
        print("error: %s is not valid JSON: %s" % (args.input, exc),
              file=sys.stderr)
        return 2
    try:
        report = run_pipeline(doc, which=args.command, strict=args.strict,
                              threads=args.threads, input_bytes=blob)
    except (problems.ParseError, problems.ValidationError) as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 2
    except (verify.ChartGap, verify.NewtonDivergence, AssertionError) as exc:
        print("numeric verification failed: %s" % (exc,), file=sys.stderr)
        return 3
    text = report_text(report)
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print("error: cannot write %s: %s" % (args.output, exc),
                  file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    if args.csv_dir:
        try:
            emit_sweep_csv(report, args.csv_dir)
        except problems.IoError as exc:
            print("error: cannot write CSV: %s" % (exc,), file=sys.stderr)
            return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
