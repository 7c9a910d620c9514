"""Problem-file parsing and serialization.

A problem file is a JSON document with the monomial data (exponent, rational
lift, exact complex coefficient) plus a list of requested computations.  All
rationals travel as "p/q" strings so nothing is lost at the interface;
decimal or float input is rejected, not rounded.
"""

from fractions import Fraction

from . import lattice as lat
from . import tropical as trop
from .constants import QQi, parse_rational, rational_str


class ParseError(ValueError):
    """Malformed problem document; message names the offending field."""


class ValidationError(ValueError):
    """Well-formed document whose data violates a hypothesis."""


class IoError(OSError):
    """Filesystem failure while reading or writing artifacts."""


REQUEST_KINDS = ("sphere", "torus", "hodge", "verify", "leading")
BRANCH_MODES = ("principal", "consistent")

_REQUEST_FIELDS = {
    "sphere": {"kind", "l", "v", "w"},
    "leading": {"kind", "l", "v", "w"},
    "torus": {"kind", "l", "v", "w", "sigma"},
    "hodge": {"kind"},
    "verify": {"kind", "l", "v", "w", "sigma", "t_sweep"},
}

_QUAD_FIELDS = {"nodes", "chart_margin", "newton_tol", "max_depth"}


def _expect(cond, where, what):
    if not cond:
        raise ParseError("%s: %s" % (where, what))


def _parse_fraction(value, where):
    try:
        return parse_rational(value)
    except (ValueError, TypeError) as exc:
        raise ParseError("%s: %s" % (where, exc)) from None


def _parse_point(value, where, dim=None):
    _expect(isinstance(value, (list, tuple)), where, "expected a list of ints")
    _expect(all(isinstance(x, int) and not isinstance(x, bool) for x in value),
            where, "coordinates must be integers")
    if dim is not None:
        _expect(len(value) == dim, where,
                "expected %d coordinates, got %d" % (dim, len(value)))
    return tuple(int(x) for x in value)


def _check_known(doc, allowed, where, strict, warnings):
    for key in doc:
        if key not in allowed:
            if strict:
                raise ParseError("%s.%s: unknown field" % (where, key))
            warnings.append("%s.%s: unknown field ignored" % (where, key))


def parse_problem(doc, strict=True):
    """Parse a problem dict into (instance, requests, options, warnings)."""
    warnings = []
    _expect(isinstance(doc, dict), "document", "expected a JSON object")
    _check_known(doc, {"dim", "monomials", "requests", "options"},
                 "document", strict, warnings)
    _expect("dim" in doc, "dim", "missing")
    dim = doc["dim"]
    _expect(isinstance(dim, int) and not isinstance(dim, bool) and dim >= 1,
            "dim", "expected a positive integer")
    _expect(isinstance(doc.get("monomials"), list) and doc["monomials"],
            "monomials", "expected a non-empty list")

    coeffs = []
    seen = set()
    for k, entry in enumerate(doc["monomials"]):
        where = "monomials[%d]" % k
        _expect(isinstance(entry, dict), where, "expected an object")
        _check_known(entry, {"m", "lambda", "c"}, where, strict, warnings)
        _expect("m" in entry, where + ".m", "missing")
        m = _parse_point(entry["m"], where + ".m", dim + 1)
        _expect(m not in seen, where + ".m", "duplicate exponent %r" % (m,))
        seen.add(m)
        _expect("lambda" in entry, where + ".lambda", "missing")
        lam = _parse_fraction(entry["lambda"], where + ".lambda")
        _expect("c" in entry, where + ".c", "missing")
        c = entry["c"]
        _expect(isinstance(c, dict), where + ".c",
                "expected {re, im} rational strings")
        _check_known(c, {"re", "im"}, where + ".c", strict, warnings)
        re = _parse_fraction(c.get("re", 0), where + ".c.re")
        im = _parse_fraction(c.get("im", 0), where + ".c.im")
        _expect(re != 0 or im != 0, where + ".c", "coefficient is zero")
        coeffs.append((m, lam, QQi(re, im)))

    requests = []
    for k, entry in enumerate(doc.get("requests", ())):
        requests.append(_parse_request(entry, k, dim, strict, warnings))

    options = _parse_options(doc.get("options", {}), strict, warnings)

    try:
        inst = trop.ProblemInstance(dim, coeffs)
    except (trop.MissingInteriorPoint, ValueError) as exc:
        raise ValidationError(str(exc)) from None
    return inst, requests, options, warnings


def _parse_request(entry, k, dim, strict, warnings):
    where = "requests[%d]" % k
    _expect(isinstance(entry, dict), where, "expected an object")
    _expect("kind" in entry, where + ".kind", "missing")
    kind = entry["kind"]
    _expect(kind in REQUEST_KINDS, where + ".kind",
            "expected one of %s" % (REQUEST_KINDS,))
    _check_known(entry, _REQUEST_FIELDS[kind], where, strict, warnings)
    req = {"kind": kind}
    if kind == "hodge":
        return req
    ell = entry.get("l", 1)
    _expect(isinstance(ell, int) and not isinstance(ell, bool) and ell >= 1,
            where + ".l", "expected a positive integer")
    req["l"] = ell
    _expect("v" in entry, where + ".v", "missing")
    req["v"] = _parse_point(entry["v"], where + ".v", dim + 1)
    _expect("w" in entry, where + ".w", "missing")
    req["w"] = _parse_point(entry["w"], where + ".w", dim + 1)
    if "sigma" in entry:
        sig = entry["sigma"]
        _expect(isinstance(sig, (list, tuple)) and len(sig) == 2,
                where + ".sigma", "expected an edge: a list of two points")
        req["sigma"] = tuple(sorted(
            _parse_point(p, where + ".sigma[%d]" % i, dim + 1)
            for i, p in enumerate(sig)))
    elif kind == "torus":
        raise ParseError(where + ".sigma: missing (torus request needs the "
                         "dual edge)")
    if kind == "verify":
        sweep = entry.get("t_sweep", [])
        _expect(isinstance(sweep, list), where + ".t_sweep",
                "expected a list of rationals in (0,1)")
        ts = []
        for i, s in enumerate(sweep):
            t = _parse_fraction(s, where + ".t_sweep[%d]" % i)
            _expect(0 < t < 1, where + ".t_sweep[%d]" % i,
                    "t must lie in (0,1)")
            ts.append(t)
        _expect(all(a > b for a, b in zip(ts, ts[1:])),
                where + ".t_sweep", "values must be strictly decreasing")
        req["t_sweep"] = ts
    return req


def _parse_options(doc, strict, warnings):
    _expect(isinstance(doc, dict), "options", "expected an object")
    _check_known(doc, {"branch_mode", "quadrature", "output"},
                 "options", strict, warnings)
    options = {"branch_mode": "principal", "quadrature": {}}
    mode = doc.get("branch_mode", "principal")
    _expect(mode in BRANCH_MODES, "options.branch_mode",
            "expected one of %s" % (BRANCH_MODES,))
    options["branch_mode"] = mode
    quad = doc.get("quadrature", {})
    _expect(isinstance(quad, dict), "options.quadrature",
            "expected an object")
    _check_known(quad, _QUAD_FIELDS, "options.quadrature", strict, warnings)
    out = {}
    if "nodes" in quad:
        _expect(isinstance(quad["nodes"], int) and quad["nodes"] >= 2,
                "options.quadrature.nodes", "expected an integer >= 2")
        out["nodes"] = quad["nodes"]
    if "chart_margin" in quad:
        margin = _parse_fraction(quad["chart_margin"],
                                 "options.quadrature.chart_margin")
        _expect(margin > 0, "options.quadrature.chart_margin",
                "must be positive")
        out["chart_margin"] = margin
    if "newton_tol" in quad:
        tol = quad["newton_tol"]
        _expect(isinstance(tol, (int, float)) and tol > 0,
                "options.quadrature.newton_tol", "expected a positive number")
        out["newton_tol"] = float(tol)
    if "max_depth" in quad:
        _expect(isinstance(quad["max_depth"], int) and quad["max_depth"] >= 1,
                "options.quadrature.max_depth", "expected a positive integer")
        out["max_depth"] = quad["max_depth"]
    options["quadrature"] = out
    if "output" in doc:
        _expect(isinstance(doc["output"], str), "options.output",
                "expected a path string")
        options["output"] = doc["output"]
    return options


def problem_to_dict(inst, requests=(), options=None):
    """Serialize back to the problem-file shape (exact round trip)."""
    monomials = []
    for m, datum in sorted(inst.data.items()):
        c = datum.c
        monomials.append({
            "m": list(m),
            "lambda": rational_str(datum.lam),
            "c": {"re": rational_str(c.re), "im": rational_str(c.im)},
        })
    doc = {"dim": inst.d, "monomials": monomials}
    reqs = []
    for req in requests:
        entry = {"kind": req["kind"]}
        if "l" in req:
            entry["l"] = req["l"]
        for key in ("v", "w"):
            if key in req:
                entry[key] = list(req[key])
        if "sigma" in req:
            entry["sigma"] = [list(p) for p in req["sigma"]]
        if "t_sweep" in req:
            entry["t_sweep"] = [rational_str(t) for t in req["t_sweep"]]
        reqs.append(entry)
    doc["requests"] = reqs
    if options is not None:
        opts = {"branch_mode": options.get("branch_mode", "principal")}
        quad = {}
        for key, val in options.get("quadrature", {}).items():
            if isinstance(val, Fraction):
                quad[key] = rational_str(val)
            else:
                quad[key] = val
        if quad:
            opts["quadrature"] = quad
        if "output" in options:
            opts["output"] = options["output"]
        doc["options"] = opts
    return doc
