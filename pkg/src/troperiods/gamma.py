"""Asymptotic expansions of period integrals over tropical cycles.

Everything here is exact: an expansion is a polynomial in L = -log t with
coefficients in the constant field, plus an O(t^eps) tail whose exponent is
never computed.  Sphere cycles (attached to interior lattice points) and
torus cycles (attached to dual edges) get separate entry points; leading
terms are recomputed from tropical volumes on an independent code path so
the two can be compared in tests.
"""

import math
from fractions import Fraction
from functools import cmp_to_key
from itertools import combinations_with_replacement, permutations

from . import lattice as lat
from . import toric
from . import tropical
from .constants import (I_UNIT, PI, QQi, SymbolicConstant, ZETA, log_abs,
                        principal_arg)
from .toric import DivisorPoly
from .tropical import WrongDimension


class IncompatiblePair(ValueError):
    """The point w and the carrier cell of v do not span a cell."""


class BadCell(ValueError):
    """The requested cell cannot carry a torus cycle."""


class ChamberPerturbationFailed(Exception):
    """No injective perturbation of the valuations kept the subdivision."""


SPHERE_ORIENTATION_NOTE = ("sphere cycle oriented so that the torus cycle "
                           "on any incident dual edge meets it positively")
TORUS_ORIENTATION_NOTE = ("torus cycle oriented so that it meets the sphere "
                          "cycle of w_orientation positively")


# ---------------------------------------------------------------- expansions

class AsymptoticExpansion:
    """Polynomial in L = -log t plus an O(t^eps) tail.

    coefficients[k] is the exact coefficient of L^k; trailing zeros are
    trimmed, so the zero expansion has an empty list and degree None.
    """

    def __init__(self, coefficients, meta=None):
        coeffs = [_sym(c) for c in coefficients]
        while coeffs and coeffs[-1].is_zero:
            coeffs.pop()
        self.coefficients = coeffs
        self.error = "O(t^eps)"
        self.meta = dict(meta or {})

    @property
    def is_zero(self):
        return not self.coefficients

    def degree(self):
        if not self.coefficients:
            return None
        return len(self.coefficients) - 1

    def coefficient(self, k):
        assert int(k) == k and k >= 0
        if k < len(self.coefficients):
            return self.coefficients[k]
        return SymbolicConstant()

    def top_term(self):
        """(degree, coefficient) of the highest power, (None, 0) if zero."""
        if not self.coefficients:
            return None, SymbolicConstant()
        return len(self.coefficients) - 1, self.coefficients[-1]

    def evaluate(self, t):
        t = float(t)
        assert 0.0 < t < 1.0
        big_l = -math.log(t)
        total = 0j
        for k, c in enumerate(self.coefficients):
            total += c.numeric() * big_l ** k
        return total

    def __add__(self, other):
        assert isinstance(other, AsymptoticExpansion)
        n = max(len(self.coefficients), len(other.coefficients))
        return AsymptoticExpansion(
            [self.coefficient(k) + other.coefficient(k) for k in range(n)])

    def __sub__(self, other):
        assert isinstance(other, AsymptoticExpansion)
        n = max(len(self.coefficients), len(other.coefficients))
        return AsymptoticExpansion(
            [self.coefficient(k) - other.coefficient(k) for k in range(n)])

    def __eq__(self, other):
        if not isinstance(other, AsymptoticExpansion):
            return NotImplemented
        return self.coefficients == other.coefficients

    def rendered(self):
        """The polynomial in L as a plain string, error tail included."""
        if not self.coefficients:
            return "0 + %s" % (self.error,)
        bits = []
        for k in range(len(self.coefficients) - 1, -1, -1):
            c = self.coefficients[k]
            if c.is_zero:
                continue
            if k == 0:
                bits.append("(%s)" % (c,))
            elif k == 1:
                bits.append("(%s)*L" % (c,))
            else:
                bits.append("(%s)*L^%d" % (c, k))
        return "%s + %s" % (" + ".join(bits), self.error)

    def __repr__(self):
        return "AsymptoticExpansion(%s)" % (self.rendered(),)

    def to_dict(self):
        rows = []
        for k, c in enumerate(self.coefficients):
            if c.is_zero:
                continue
            z = c.numeric()
            rows.append({"k": k, "coefficient": {"symbolic": str(c),
                                                 "numeric": [z.real, z.imag]}})
        return {"powers_of_L": rows,
                "error": self.error,
                "indices": self.meta.get("indices", {}),
                "orientation": self.meta.get("orientation", "")}


def _sym(x):
    if isinstance(x, SymbolicConstant):
        return x
    return SymbolicConstant.scalar(x)


def _require_interior(inst, v, scale):
    """v must be a lattice point strictly inside scale * Delta."""
    v = lat.lattice_vector(v)
    for normal, offset, _ in lat.hull_facets(inst.polytope.vertices):
        if lat.dot(normal, v) + scale * offset <= 0:
            raise ValueError("%r is not interior to %d * polytope"
                             % (v, scale))
    return v


# ------------------------------------------------------------- gamma series

def gamma_class_series(fan):
    """exp(sum_{k>=2} ((-1)^k / k) zeta(k) (sum_m D_m^k - sigma^k)).

    The degree-1 term would carry the Euler constant times
    (sigma - sum_m D_m), which is identically zero, so only zeta atoms of
    weight 2 .. d+1 appear.
    """
    sigma = toric.sigma_class(fan)
    logpart = DivisorPoly(fan, {})
    for k in range(2, fan.ambient_dim + 1):
        power_sum = DivisorPoly(fan, {(i,) * k: 1
                                      for i in range(len(fan.rays))})
        weight = SymbolicConstant.atom(ZETA(k), Fraction((-1) ** k, k))
        logpart = logpart + (power_sum - sigma ** k) * weight
    return logpart.exp()


def e_factor(tri, l, v, w):
    """Weight factor of the pair (v, w): rising factorials in the divisors.

    v has a unique minimal carrier cell tau with positive integer weights p
    summing to l; the factor is
    prod_{m in tau, m != w} D_m (D_m + 1) ... (D_m + p_m - 1)
    times sigma (sigma - 1) ... (sigma - p_w + 1).
    """
    assert int(l) == l and l >= 1
    v = _require_interior(tri.instance, v, l)
    w = lat.lattice_vector(w)
    tau, weights = tri.minimal_cell_with_scaled_point(v, l)
    if not tri.has_cell(set(tau) | {w}):
        raise IncompatiblePair("conv of %r and %r is not a cell" % (w, tau))
    fan = toric.star_fan(tri, w)
    out = DivisorPoly.scalar(fan, 1)
    for m in tau:
        if m == w:
            continue
        div = DivisorPoly.divisor(fan, lat.vsub(m, w))
        for i in range(weights[m]):
            out = out * (div + i)
    sigma = toric.sigma_class(fan)
    for i in range(weights.get(w, 0)):
        out = out * (sigma - i)
    return out


# ------------------------------------------------------------ branch choice

class BranchAssignment:
    """Chosen branches of arg(-c_{m1}/c_{m0}) for ordered exponent pairs.

    scope "principal": independent principal values, any dimension.
    scope "consistent": d = 1 assignment making the antisymmetry rule hold
    on every edge and the two-cell sum rule hold on every triangle exactly.
    Every stored value is a genuine branch: it differs from the principal
    value by 2 pi times an integer.
    """

    def __init__(self, inst, values, scope):
        assert scope in ("principal", "consistent")
        self.instance = inst
        self.scope = scope
        self.values = dict(values)
        for (m0, m1), val in self.values.items():
            diff = val - principal_arg(-(inst.coeff(m1) / inst.coeff(m0)))
            assert _is_two_pi_multiple(diff), \
                "stored value for %r is not a branch of the argument" \
                % ((m0, m1),)

    def value(self, m0, m1):
        m0 = lat.lattice_vector(m0)
        m1 = lat.lattice_vector(m1)
        assert m0 != m1, "no branch for a pair with itself"
        return self.values[(m0, m1)]

    def shifted(self, m0, m1, turns=1):
        """Copy with the (m0, m1) branch moved by 2 pi * turns.

        The reversed pair is untouched, so a consistent assignment usually
        stops being consistent; meant for sensitivity checks.
        """
        m0 = lat.lattice_vector(m0)
        m1 = lat.lattice_vector(m1)
        assert int(turns) == turns
        values = dict(self.values)
        values[(m0, m1)] = values[(m0, m1)] \
            + SymbolicConstant.atom(PI, 2 * turns)
        return BranchAssignment(self.instance, values, self.scope)


def _is_two_pi_multiple(x):
    if not x.terms:
        return True
    if set(x.terms) != {((PI, 1),)}:
        return False
    c = x.terms[((PI, 1),)]
    return c.im == 0 and c.re.denominator == 1 and c.re % 2 == 0


def _wedge(u, v):
    assert len(u) == 2 and len(v) == 2
    return u[0] * v[1] - u[1] * v[0]


def _angular_cmp(u, v):
    """Exact counterclockwise order of plane directions from angle 0."""
    def half(x):
        return 0 if (x[1] > 0 or (x[1] == 0 and x[0] > 0)) else 1
    hu, hv = half(u), half(v)
    if hu != hv:
        return -1 if hu < hv else 1
    cr = _wedge(u, v)
    if cr > 0:
        return -1
    if cr < 0:
        return 1
    raise AssertionError("parallel edge directions %r, %r" % (u, v))


def _injective_order(inst, tri):
    """Exponents sorted by a perturbed valuation, injective on all of them.

    The perturbation adds lex-rank * eps with eps under the chamber safety
    radius, shrinking eps until all values differ; the subdivision is then
    recomputed and must come back unchanged.
    """
    points = sorted(inst.exponents)
    n = len(points)
    _, radius = tri.chamber_margin()
    for denom in range(n + 1, 16 * (n + 2)):
        eps = radius / denom
        lams = {m: inst.lam(m) + j * eps for j, m in enumerate(points)}
        if len(set(lams.values())) < n:
            continue
        check = tropical.validate_and_triangulate(inst.with_lifts(lams))
        if check.top_cells != tri.top_cells:
            raise ChamberPerturbationFailed(
                "perturbation by %s moved the subdivision" % (eps,))
        return sorted(points, key=lambda m: lams[m])
    raise ChamberPerturbationFailed("no injective perturbation found")


def choose_arg_branches(inst, mode="principal", tri=None):
    """Branches of arg(-c_{m1}/c_{m0}) for every ordered pair of exponents.

    mode "principal" takes principal values everywhere.  mode "consistent"
    (d = 1 only) runs the inductive assignment over the edges of the
    subdivision: exponents are visited in order of a perturbed valuation,
    and for each new point the branches toward its already-visited
    neighbors are fixed one by one around it, each forced by the two-cell
    sum rule against the previous one whenever a triangle joins them, and
    free (principal) otherwise.
    """
    if mode not in ("principal", "consistent"):
        raise ValueError("unknown branch mode %r" % (mode,))
    points = sorted(inst.exponents)
    values = {}
    for m0 in points:
        for m1 in points:
            if m0 != m1:
                values[(m0, m1)] = principal_arg(
                    -(inst.coeff(m1) / inst.coeff(m0)))
    if mode == "principal":
        return BranchAssignment(inst, values, "principal")
    if inst.d != 1:
        raise WrongDimension("consistent branches need d = 1, got d = %d"
                             % (inst.d,))
    if tri is None:
        tri = tropical.validate_and_triangulate(inst)
    order = _injective_order(inst, tri)
    seen = set()
    for k in range(1, len(order)):
        mk1 = order[k]
        seen.add(order[k - 1])
        ring = [m for m in seen if tri.has_cell((m, mk1))]
        assert ring, "a new point must see an earlier neighbor"
        # pivot: an earlier neighbor lying in at most one triangle together
        # with mk1 and a third earlier point
        pivot = forced = None
        for cand in sorted(ring):
            thirds = []
            for cell in tri.top_cells:
                if cand in cell and mk1 in cell:
                    third = next(x for x in cell if x not in (cand, mk1))
                    if third in seen:
                        thirds.append(third)
            if len(thirds) <= 1:
                pivot = cand
                forced = thirds[0] if thirds else None
                break
        assert pivot is not None, "no pivot with the two-cell bound"
        dirs = {m: lat.vsub(m, mk1) for m in ring}
        ccw = sorted(ring, key=cmp_to_key(
            lambda a, b: _angular_cmp(dirs[a], dirs[b])))
        i0 = ccw.index(pivot)
        ccw = ccw[i0:] + ccw[:i0]
        seq = ccw
        if forced is not None and len(ring) > 1:
            if ccw[1] != forced:
                seq = [ccw[0]] + list(reversed(ccw[1:]))
                assert seq[1] == forced, \
                    "forced neighbor is not angularly adjacent to the pivot"
        prev = None
        for m in seq:
            if prev is not None and tri.has_cell((mk1, m, prev)):
                # two-cell sum rule against the previous assignment
                values[(mk1, m)] = values[(mk1, prev)] + values[(prev, m)] \
                    + SymbolicConstant.atom(
                        PI, _wedge(lat.vsub(m, mk1), lat.vsub(prev, mk1)))
            # otherwise the principal prefill stands (free choice)
            values[(m, mk1)] = -values[(mk1, m)]
            prev = m
    out = BranchAssignment(inst, values, "consistent")
    res1, res2 = branch_condition_residuals(inst, tri, out)
    assert all(r.is_zero for r in res1.values()), "antisymmetry failed"
    assert all(r.is_zero for r in res2.values()), "two-cell sum rule failed"
    return out


def branch_condition_residuals(inst, tri, branches):
    """Exact residuals of the two consistency rules (d = 1 only).

    Returns (res1, res2): res1 maps each ordered edge pair (m0, m1) to
    branch(m0, m1) + branch(m1, m0); res2 maps each ordered triple spanning
    a triangle to branch(m0,m1) - branch(m0,m2) - branch(m2,m1)
    - wedge(m1-m0, m2-m0) * pi.  A consistent assignment zeroes every entry.
    """
    if inst.d != 1:
        raise WrongDimension("branch conditions live in the plane, d = %d"
                             % (inst.d,))
    res1 = {}
    for a, b in tri.cells_by_dim.get(1, []):
        res1[(a, b)] = branches.value(a, b) + branches.value(b, a)
        res1[(b, a)] = branches.value(b, a) + branches.value(a, b)
    res2 = {}
    for cell in tri.top_cells:
        for m0, m1, m2 in permutations(cell, 3):
            res2[(m0, m1, m2)] = (
                branches.value(m0, m1) - branches.value(m0, m2)
                - branches.value(m2, m1)
                - SymbolicConstant.atom(
                    PI, _wedge(lat.vsub(m1, m0), lat.vsub(m2, m0))))
    return res1, res2


# --------------------------------------------------------- sphere expansion

def _log_class(inst, fan, branches, theta_turns):
    """sum_m (log|-c_m/c_w| + i branch(w, m)) D_m, optionally twisted.

    A twist by theta = 2 pi * theta_turns multiplies every ratio by
    e^{i (lambda_m - lambda_w) theta}, shifting each branch accordingly.
    """
    w = fan.w
    c_w = inst.coeff(w)
    terms = {}
    for i in range(len(fan.rays)):
        m = fan.point(i)
        val = log_abs(-(inst.coeff(m) / c_w)) + I_UNIT * branches.value(w, m)
        if theta_turns:
            val = val + I_UNIT * SymbolicConstant.atom(
                PI, 2 * theta_turns * (inst.lam(m) - inst.lam(w)))
        if not val.is_zero:
            terms[(i,)] = val
    return DivisorPoly(fan, terms)


def _sphere_engine(inst, tri, l, v, w, branches, theta_turns, extra_factor):
    assert int(l) == l and l >= 1
    v = _require_interior(inst, v, l)
    w = lat.lattice_vector(w)
    fan = toric.star_fan(tri, w)
    d = inst.d
    meta = {"indices": {"kind": "sphere", "l": l,
                        "v": list(v), "w": list(w)},
            "orientation": SPHERE_ORIENTATION_NOTE}
    tau, weights = tri.minimal_cell_with_scaled_point(v, l)
    if not tri.has_cell(set(tau) | {w}):
        return AsymptoticExpansion([], meta)
    p_w = weights.get(w, 0)
    x = (-_log_class(inst, fan, branches, theta_turns)).exp() \
        * e_factor(tri, l, v, w) * gamma_class_series(fan)
    if extra_factor is not None:
        x = x * extra_factor
    # no constant term, so the L^{d+1} coefficient vanishes identically
    assert () not in x.terms
    omega = toric.omega_class(fan, inst.lam)
    pref = Fraction((-1) ** (d + p_w), math.factorial(l - 1))
    coeffs = []
    omega_pow = DivisorPoly.scalar(fan, 1)
    for k in range(d + 1):
        if k:
            omega_pow = omega_pow * omega
        part = omega_pow * x.degree_part(d + 1 - k)
        val = toric.integrate_divisor_poly(fan, part)
        coeffs.append(val * (pref / math.factorial(k)))
    return AsymptoticExpansion(coeffs, meta)


def sphere_period_asymptotics(inst, tri, l, v, w, branches,
                              extra_factor=None):
    """Expansion over the sphere cycle of w of the degree-l form of v.

    Zero (with the error flag) when w and the carrier cell of v do not
    span a cell.  extra_factor, if given, is a DivisorPoly multiplied into
    the integrand; used by consistency checks.
    """
    return _sphere_engine(inst, tri, l, v, w, branches, 0, extra_factor)


def theta_twisted_asymptotics(inst, tri, l, v, w, branches, theta_turns):
    """Sphere expansion after turning the parameter by 2 pi * theta_turns.

    Only the branches move: each arg(-c_m/c_w) gains
    2 pi * theta_turns * (lambda_m - lambda_w).  The top coefficient is
    twist-independent.
    """
    theta_turns = lat.rational(theta_turns)
    return _sphere_engine(inst, tri, l, v, w, branches, theta_turns, None)


# ---------------------------------------------------------- torus expansion

def _binom(n, k):
    # the usual extension: top index -1 alternates, 0 <= n < k dies
    assert k >= 0
    if n < 0:
        assert n == -1, "only top index -1 occurs here"
        return (-1) ** k
    if n < k:
        return 0
    return math.comb(n, k)


def torus_period_asymptotics(inst, tri, l, v, sigma_edge, w_orientation):
    """Period over the torus cycle on the dual of an edge, a pure constant.

    sigma_edge is an edge {w, m0} of the subdivision with w = w_orientation
    an interior lattice point fixing the sign.  With v = p_w w + p_m0 m0 on
    the edge, the value is (2 pi i)^d (-1)^{p_w} binom(p_m0 - 1, l - 1);
    anything not carried by the edge gives zero.
    """
    assert int(l) == l and l >= 1
    v = _require_interior(inst, v, l)
    w = lat.lattice_vector(w_orientation)
    edge = tuple(sorted(lat.lattice_vector(p) for p in sigma_edge))
    if len(edge) != 2 or edge[0] == edge[1]:
        raise BadCell("need two distinct edge endpoints, got %r"
                      % (sigma_edge,))
    if not tri.has_cell(edge):
        raise BadCell("%r is not an edge of the subdivision" % (edge,))
    if w not in edge:
        raise BadCell("w_orientation %r is not an endpoint of %r"
                      % (w, edge))
    if w not in tri.instance.W:
        raise BadCell("w_orientation %r is not an interior lattice point"
                      % (w,))
    m0 = edge[0] if edge[1] == w else edge[1]
    d = inst.d
    meta = {"indices": {"kind": "torus", "l": l, "v": list(v),
                        "sigma": [list(p) for p in edge],
                        "w_orientation": list(w)},
            "orientation": TORUS_ORIENTATION_NOTE}
    tau, weights = tri.minimal_cell_with_scaled_point(v, l)
    if not set(tau) <= {w, m0}:
        return AsymptoticExpansion([], meta)
    p_w = weights.get(w, 0)
    scale = (-1) ** p_w * _binom(weights.get(m0, 0) - 1, l - 1)
    if scale == 0:
        return AsymptoticExpansion([], meta)
    if p_w == 0:
        # v = l * m0 interior forces m0 itself interior
        assert m0 in tri.instance.W
    two_pi_i = SymbolicConstant.atom(PI, QQi(0, 2))
    return AsymptoticExpansion([two_pi_i ** d * scale], meta)


# ------------------------------------------------------------ leading terms

def leading_term(inst, tri, l, v, w):
    """(degree, coefficient) of the top power of L in the sphere period.

    Computed from tropical volumes, independently of the expansion engine:
    when v is carried by w alone the answer is the total dual facet volume
    around w; when w carries no weight it is a single dual cell volume; in
    the mixed case the minimal-degree part of the weight factor pairs
    exp(omega) with a squarefree divisor product, a derivative of the same
    volume data.
    """
    assert int(l) == l and l >= 1
    v = _require_interior(inst, v, l)
    w = lat.lattice_vector(w)
    if w not in tri.instance.W:
        raise tropical.NotInteriorPoint("%r is not an interior lattice point"
                                        % (w,))
    tau, weights = tri.minimal_cell_with_scaled_point(v, l)
    if not tri.has_cell(set(tau) | {w}):
        raise IncompatiblePair("conv of %r and %r is not a cell" % (w, tau))
    d = inst.d
    tc = tropical.dual_complex(tri)
    p_w = weights.get(w, 0)
    others = [m for m in tau if m != w]
    if p_w and not others:
        total = sum(tropical.cell_volume(tc, tuple(sorted((w, m))))
                    for m in tri.adjacent_points(w))
        return d, SymbolicConstant.scalar((-1) ** (d + 1) * total)
    fac = Fraction(1, math.factorial(l - 1))
    for m in others:
        fac *= math.factorial(weights[m] - 1)
    if p_w == 0:
        cell = tuple(sorted([w] + others))
        vol = tropical.cell_volume(tc, cell)
        return (d + 1 - len(others),
                SymbolicConstant.scalar((-1) ** d * fac * vol))
    fan = toric.star_fan(tri, w)
    base = toric.sigma_class(fan)
    for m in others:
        base = base * DivisorPoly.divisor(fan, lat.vsub(m, w))
    fac *= math.factorial(p_w - 1)
    val = toric.integrate_divisor_poly(
        fan, toric.omega_class(fan, inst.lam).exp() * base)
    if val.is_zero:
        # every expansion coefficient carries base as a factor, so the
        # whole period is O(t^eps) provided base pairs to zero against
        # everything of complementary degree; certify that
        for mono in combinations_with_replacement(
                range(len(fan.rays)), d - len(others)):
            probe = DivisorPoly(fan, {tuple(mono): 1}) * base
            assert toric.integrate_divisor_poly(fan, probe).is_zero, \
                "degenerate top pairing with a non-trivial class"
        return None, SymbolicConstant()
    return (d - len(others),
            val * ((-1) ** (d + 1) * fac))
