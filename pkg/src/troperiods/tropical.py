"""Regular unimodular triangulations from lifts and their dual complexes.

The input family is a lattice polytope with one (exponent, valuation,
coefficient) datum per lattice point. The valuations induce a regular
subdivision via the lower hull of the lifted points; we insist it is a
unimodular triangulation and reject anything else. The dual decomposition of
the covector space, cell volumes and (for curves) tropical edge lengths are
derived from the same data.
"""

import math
from fractions import Fraction
from itertools import combinations

from . import lattice as lat
from .constants import QQi, rational_str


class NotATriangulation(ValueError):
    pass


class NotUnimodular(ValueError):
    pass


class MissingMonomial(ValueError):
    pass


class MissingInteriorPoint(ValueError):
    pass


class NotInteriorPoint(ValueError):
    pass


class UnboundedCell(ValueError):
    pass


class WrongDimension(ValueError):
    pass


class CoefficientDatum:
    """One monomial of the family: exponent, valuation and leading coefficient."""

    __slots__ = ("m", "lam", "c")

    def __init__(self, m, lam, c):
        self.m = lat.lattice_vector(m)
        self.lam = lat.rational(lam)
        if isinstance(c, tuple):
            c = QQi(*c)
        elif not isinstance(c, QQi):
            c = QQi(c)
        if not c:
            raise ValueError("zero leading coefficient at exponent %r" % (self.m,))
        self.c = c

    def __eq__(self, other):
        if not isinstance(other, CoefficientDatum):
            return NotImplemented
        return (self.m, self.lam, self.c) == (other.m, other.lam, other.c)

    def __hash__(self):
        return hash((self.m, self.lam, self.c))

    def __repr__(self):
        return "CoefficientDatum(%r, %s, %s)" % (self.m, self.lam, self.c)


class ProblemInstance:
    """The family data: dimension, coefficient data, optional branch overrides.

    d is the hypersurface dimension; exponents live in rank d+1. The interior
    lattice points of the Newton polytope must be nonempty, otherwise there is
    no cycle to integrate over.
    """

    def __init__(self, dim, coefficients, branch_overrides=None):
        self.d = int(dim)
        assert self.d >= 1, "dimension must be at least 1"
        data = []
        for entry in coefficients:
            if not isinstance(entry, CoefficientDatum):
                entry = CoefficientDatum(*entry)
            data.append(entry)
        assert data, "no coefficients given"
        for entry in data:
            if len(entry.m) != self.d + 1:
                raise ValueError("exponent %r has wrong rank, expected %d"
                                 % (entry.m, self.d + 1))
        seen = {}
        for entry in data:
            if entry.m in seen:
                raise ValueError("duplicate exponent %r" % (entry.m,))
            seen[entry.m] = entry
        self.data = dict(sorted(seen.items()))
        self.polytope = lat.LatticePolytope(list(self.data))
        if self.polytope.dim != self.d + 1:
            raise ValueError("Newton polytope has dimension %d, expected %d"
                             % (self.polytope.dim, self.d + 1))
        self.W = lat.interior_lattice_points(self.polytope, 1)
        if not self.W:
            raise MissingInteriorPoint("no interior lattice points")
        self.branch_overrides = dict(branch_overrides or {})

    @property
    def exponents(self):
        return list(self.data)

    def lam(self, m):
        return self.data[tuple(m)].lam

    def coeff(self, m):
        return self.data[tuple(m)].c

    def mu(self, m, n):
        """The affine form valuation + <m, n> at the covector n."""
        return self.data[tuple(m)].lam + lat.dot(m, n)

    def interior_points(self, scale):
        return lat.interior_lattice_points(self.polytope, scale)

    def with_lifts(self, new_lams):
        """Copy of the instance with valuations replaced by new_lams[m]."""
        coeffs = [CoefficientDatum(m, new_lams[m], c.c)
                  for m, c in self.data.items()]
        return ProblemInstance(self.d, coeffs, self.branch_overrides)


def trop_eval(inst, n, with_argmin=False):
    """min over the family of (valuation + <m, n>), optionally with argmin."""
    n = lat.rational_point(n)
    best = None
    argmin = []
    for m, datum in inst.data.items():
        v = datum.lam + lat.dot(m, n)
        if best is None or v < best:
            best = v
            argmin = [m]
        elif v == best:
            argmin.append(m)
    if with_argmin:
        return best, tuple(argmin)
    return best


def _lower_cells(inst):
    # cells of the regular subdivision induced by the lifts, as exponent tuples
    exps = list(inst.data)
    lifted = [m + (inst.data[m].lam,) for m in exps]
    origin = lifted[0]
    rank = lat.mat_rank([lat.vsub(p, origin) for p in lifted[1:]])
    if rank < inst.d + 2:
        # the lift is affine: the subdivision is trivially the whole polytope
        return [tuple(exps)]
    cells = []
    for normal, offset, inc in lat.hull_facets(lifted):
        if normal[-1] > 0:
            cells.append(tuple(sorted(exps[i] for i in inc)))
    return sorted(cells)


def validate_and_triangulate(inst):
    """The regular subdivision of the lifts, validated as unimodular.

    Raises MissingMonomial when the data does not cover every lattice point
    of the polytope, NotATriangulation when some lower cell is not a simplex,
    NotUnimodular when a simplex has excess volume.
    """
    expected = lat.lattice_points(inst.polytope)
    if list(inst.data) != expected:
        missing = [m for m in expected if m not in inst.data]
        raise MissingMonomial("missing exponents %r" % (missing,))
    cells = _lower_cells(inst)
    D = inst.d + 1
    unit = Fraction(1, math.factorial(D))
    total = Fraction(0)
    for cell in cells:
        if len(cell) != D + 1:
            raise NotATriangulation(
                "lower cell with %d vertices: %r" % (len(cell), cell))
        try:
            vol = lat.normalized_simplex_volume(cell)
        except lat.DegenerateSimplex as exc:
            raise NotATriangulation(str(exc)) from exc
        if vol != unit:
            raise NotUnimodular("cell %r has normalized volume %s" % (cell, vol))
        total += vol
    assert total == lat.polytope_volume(inst.polytope), \
        "triangulation does not cover the polytope"
    return RegularTriangulation(inst, cells)


class RegularTriangulation:
    """The unimodular triangulation with its full face lattice."""

    def __init__(self, inst, top_cells):
        self.instance = inst
        self.d = inst.d
        self.top_cells = sorted(top_cells)
        faces = set()
        for cell in self.top_cells:
            for k in range(1, len(cell) + 1):
                for sub in combinations(cell, k):
                    faces.add(tuple(sorted(sub)))
        self.cells = sorted(faces, key=lambda c: (len(c), c))
        self._face_set = faces
        self.cells_by_dim = {}
        for c in self.cells:
            self.cells_by_dim.setdefault(len(c) - 1, []).append(c)

    def has_cell(self, points):
        return tuple(sorted(lat.lattice_vector(p) for p in points)) in self._face_set

    def star(self, w):
        w = lat.lattice_vector(w)
        return [c for c in self.top_cells if w in c]

    def adjacent_points(self, w):
        """A_w: the exponents m with conv{w, m} an edge of the triangulation."""
        w = lat.lattice_vector(w)
        out = []
        for edge in self.cells_by_dim.get(1, []):
            if w in edge:
                other = edge[0] if edge[1] == w else edge[1]
                out.append(other)
        return sorted(out)

    def barycentric(self, cell, v, scale=1):
        """Integer weights p with v = sum p_i * cell_i, sum p = scale, or None.

        Requires nonnegative weights (v must lie in scale * conv(cell));
        weights are integral because the cell is unimodular.
        """
        v = lat.lattice_vector(v)
        rows = [m + (1,) for m in cell]
        sol = lat.coords_in_basis(v + (scale,), rows)
        if sol is None:
            return None
        if any(x < 0 for x in sol):
            return None
        assert all(x.denominator == 1 for x in sol), \
            "non-integral barycentric weights on a unimodular cell"
        return {m: int(x) for m, x in zip(cell, sol)}

    def minimal_cell_with_scaled_point(self, v, scale):
        """The unique cell tau with v in the relative interior of scale*tau.

        Returns (tau, weights) with weights the positive integer barycentric
        coordinates summing to scale.
        """
        v = lat.lattice_vector(v)
        for cell in self.top_cells:
            weights = self.barycentric(cell, v, scale)
            if weights is None:
                continue
            support = tuple(sorted(m for m, p in weights.items() if p > 0))
            assert support in self._face_set
            return support, {m: p for m, p in weights.items() if p > 0}
        raise ValueError("point %r not in %d * polytope" % (v, scale))

    def chamber_margin(self):
        """(margin, safe_radius) for valuation perturbations.

        margin is the least lower-hull slack of a lattice point against a
        top cell not containing it; any perturbation of every valuation by
        less than safe_radius keeps the same triangulation.
        """
        inst = self.instance
        margin = None
        bound = Fraction(0)
        for cell in self.top_cells:
            rows = [m + (1,) for m in cell]
            for p in inst.data:
                if p in cell:
                    continue
                sol = lat.coords_in_basis(p + (1,), rows)
                assert sol is not None
                ell = sum(a * inst.data[m].lam for a, m in zip(sol, cell))
                slack = inst.data[p].lam - ell
                assert slack > 0, "zero slack should have joined the cell"
                margin = slack if margin is None else min(margin, slack)
                bound = max(bound, sum(abs(a) for a in sol))
        if margin is None:
            # single-cell triangulation: any lift keeps it
            return Fraction(1), Fraction(1)
        return margin, margin / (bound + 1)


# ------------------------------------------------------------- dual complex

class TropicalCell:
    """One cell of the dual decomposition, dual to the cell tau.

    Stored as an exact inequality system; the vertex/ray description is
    computed on first use. Equalities (the mu_m agreeing on tau) are kept as
    paired inequalities.
    """

    def __init__(self, inst, tau):
        self.instance = inst
        self.tau = tuple(sorted(tau))
        self.d = inst.d
        m0 = self.tau[0]
        lam = inst.data
        eqs = []
        for m in self.tau[1:]:
            eqs.append((lat.vsub(m, m0), lam[m].lam - lam[m0].lam))
        ineqs = []
        for p in inst.data:
            if p in self.tau:
                continue
            ineqs.append((lat.vsub(p, m0), lam[p].lam - lam[m0].lam))
        self.equalities = eqs
        self.inequalities = ineqs
        self.dim = inst.d + 2 - len(self.tau)
        self._parts = None

    def h_description(self):
        out = list(self.inequalities)
        for nm, off in self.equalities:
            out.append((nm, off))
            out.append((lat.vscale(-1, nm), -off))
        return out

    def _compute_parts(self):
        if self._parts is None:
            self._parts = lat.polyhedron_parts(self.h_description())
        return self._parts

    @property
    def vertices(self):
        return self._compute_parts()[0]

    @property
    def rays(self):
        return self._compute_parts()[1]

    @property
    def bounded(self):
        return not self.rays

    def contains(self, n):
        n = lat.rational_point(n)
        return (all(lat.dot(nm, n) + off == 0 for nm, off in self.equalities)
                and all(lat.dot(nm, n) + off >= 0 for nm, off in self.inequalities))

    def interior_point(self):
        """A rational point in the relative interior."""
        verts, rays = self._compute_parts()
        k = len(verts)
        center = tuple(sum(v[i] for v in verts) / k for i in range(len(verts[0])))
        for r in rays:
            center = lat.vadd(center, r)
        for nm, off in self.inequalities:
            assert lat.dot(nm, center) + off > 0, \
                "centroid landed on a face; cell %r degenerate" % (self.tau,)
        return center

    def as_polytope(self):
        if not self.bounded:
            raise UnboundedCell("cell dual to %r is unbounded" % (self.tau,))
        return lat.RationalPolytope(vertices=self.vertices)

    def __repr__(self):
        return "TropicalCell(dual to %r, dim %d)" % (self.tau, self.dim)


class TropicalComplex:
    """The dual decomposition: one cell per triangulation face."""

    def __init__(self, tri):
        self.tri = tri
        self.instance = tri.instance
        self.d = tri.d
        self.cells = {tau: TropicalCell(tri.instance, tau) for tau in tri.cells}

    def cell(self, tau):
        return self.cells[tuple(sorted(tau))]

    def cells_of_dim(self, k):
        return [c for c in self.cells.values() if c.dim == k]

    def marked_cells(self):
        """The tropical hypersurface: cells dual to faces of dimension >= 1."""
        return [c for tau, c in self.cells.items() if len(tau) >= 2]


def dual_complex(tri):
    return TropicalComplex(tri)


def dual_cell_polytope(tri, w):
    """The full-dimensional cell dual to the interior vertex w, as a polytope."""
    w = lat.lattice_vector(w)
    if w not in tri.instance.W:
        raise NotInteriorPoint("%r is not an interior lattice point" % (w,))
    cell = TropicalCell(tri.instance, (w,))
    verts = cell.vertices
    assert cell.bounded
    return lat.RationalPolytope(vertices=verts,
                                inequalities=cell.inequalities)


def cell_volume(tc_or_cell, tau=None):
    """Lattice-normalized volume of a bounded dual cell (a point counts 1)."""
    if isinstance(tc_or_cell, TropicalCell):
        cell = tc_or_cell
    else:
        cell = tc_or_cell.cell(tau)
    if not cell.bounded:
        raise UnboundedCell("cell dual to %r is unbounded" % (cell.tau,))
    return lat.polytope_volume(cell.vertices)


def tropical_periods(tc):
    """Edge lengths of the tropical curve: the map (w, w') -> l(w, w').

    Only for curve families (d = 1). Off-diagonal entries are the lattice
    lengths of the bounded dual edges; the diagonal is the boundary length of
    the dual polygon.
    """
    if tc.d != 1:
        raise WrongDimension("tropical periods need d = 1, got d = %d" % (tc.d,))
    inst = tc.instance
    tri = tc.tri
    W = inst.W
    out = {}
    for w in W:
        for wp in W:
            if w == wp:
                continue
            edge = tuple(sorted((w, wp)))
            if tri.has_cell(edge):
                out[(w, wp)] = cell_volume(tc.cell(edge))
            else:
                out[(w, wp)] = Fraction(0)
    for w in W:
        total = Fraction(0)
        for m in tri.adjacent_points(w):
            total += cell_volume(tc.cell(tuple(sorted((w, m)))))
        out[(w, w)] = total
    return out


# ------------------------------------------------------------ serialization

def triangulation_report(tri):
    """JSON-friendly summary of the triangulation (exact rationals as "p/q")."""
    exps = list(tri.instance.data)
    index = {m: i for i, m in enumerate(exps)}
    return {
        "dim": tri.d,
        "points": [list(m) for m in exps],
        "lifts": [rational_str(tri.instance.data[m].lam) for m in exps],
        "top_cells": [[index[m] for m in cell] for cell in tri.top_cells],
        "cells_by_dim": {str(k): [[index[m] for m in cell] for cell in cells]
                         for k, cells in sorted(tri.cells_by_dim.items())},
        "interior_points": [list(w) for w in tri.instance.W],
        "chamber_margin": rational_str(tri.chamber_margin()[0]),
    }


def complex_report(tc):
    """JSON-friendly dual complex: V- and H-descriptions of every cell."""
    exps = list(tc.instance.data)
    index = {m: i for i, m in enumerate(exps)}
    cells = []
    for tau, cell in sorted(tc.cells.items()):
        entry = {
            "dual_cell": [index[m] for m in tau],
            "dim": cell.dim,
            "bounded": cell.bounded,
            "inequalities": [
                {"normal": list(nm), "offset": rational_str(off)}
                for nm, off in cell.h_description()],
            "vertices": [[rational_str(x) for x in v] for v in cell.vertices],
        }
        if not cell.bounded:
            entry["rays"] = [list(r) for r in cell.rays]
        else:
            entry["volume"] = rational_str(cell_volume(cell))
        cells.append(entry)
    return {"dim": tc.d, "cells": cells}
