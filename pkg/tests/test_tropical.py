import random
from fractions import Fraction

import pytest

from troperiods import lattice as lat
from troperiods import tropical as trop


def cube_instance():
    # 3d worked family: conv{2e1, -e1, +-e2, +-e3}, lift 3 at 2e1, 0 at the
    # origin, 1 elsewhere; negative leading coefficient at the origin
    pts = lat.lattice_points([(2, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                              (0, 0, 1), (0, 0, -1)])
    def lift(m):
        if m == (2, 0, 0):
            return 3
        if m == (0, 0, 0):
            return 0
        return 1
    coeffs = [(m, lift(m), (-1 if m == (0, 0, 0) else 1, 0)) for m in pts]
    return trop.ProblemInstance(2, coeffs)


def elliptic_instance():
    # hexagonal lift on the cubic triangle
    pts = lat.lattice_points([(-1, -1), (2, -1), (-1, 2)])
    coeffs = [(m, Fraction(m[0] * m[0] + m[0] * m[1] + m[1] * m[1], 2),
               (-1 if m == (0, 0) else 1, 0)) for m in pts]
    return trop.ProblemInstance(1, coeffs)


def genus2_instance():
    pts = [(x, y) for x in range(4) for y in range(3)]
    lam = {m: Fraction(m[0] ** 2) + m[1] ** 2 + Fraction(m[0] * m[1], 5)
           for m in pts}
    coeffs = [(m, lam[m], (-1 if m in ((1, 1), (2, 1)) else 1, 0)) for m in pts]
    return trop.ProblemInstance(1, coeffs)


class TestInstanceValidation:
    def test_missing_interior_point(self):
        coeffs = [((0, 0), 0, 1), ((1, 0), 0, 1), ((0, 1), 0, 1)]
        with pytest.raises(trop.MissingInteriorPoint):
            trop.ProblemInstance(1, coeffs)

    def test_zero_coefficient_rejected(self):
        with pytest.raises(ValueError):
            trop.CoefficientDatum((0, 0), 0, 0)

    def test_missing_monomial(self):
        pts = lat.lattice_points([(-1, -1), (2, -1), (-1, 2)])
        coeffs = [(m, Fraction(m[0] ** 2 + m[0] * m[1] + m[1] ** 2, 2), 1)
                  for m in pts if m != (1, 0)]
        inst = trop.ProblemInstance(1, coeffs)
        with pytest.raises(trop.MissingMonomial):
            trop.validate_and_triangulate(inst)

    def test_flat_boundary_lift_rejected(self):
        # equal lifts on collinear boundary points cannot triangulate
        pts = lat.lattice_points([(-1, -1), (2, -1), (-1, 2)])
        coeffs = [(m, 0 if m == (0, 0) else 1, (-1 if m == (0, 0) else 1, 0))
                  for m in pts]
        inst = trop.ProblemInstance(1, coeffs)
        with pytest.raises(trop.NotATriangulation):
            trop.validate_and_triangulate(inst)

    def test_non_unimodular_rejected(self):
        # single simplex of volume 2: lower hull is one cell, not unimodular
        coeffs = [((0, 0), 0, 1), ((2, 0), 0, 1), ((0, 1), 0, 1),
                  ((1, 0), 1, 1)]
        # (1,0) lifted high so the subdivision keeps the big simplex
        with pytest.raises((trop.NotUnimodular, trop.MissingInteriorPoint)):
            inst = trop.ProblemInstance(1, coeffs)
            trop.validate_and_triangulate(inst)


class TestCubeTriangulation:
    def setup_method(self):
        self.inst = cube_instance()
        self.tri = trop.validate_and_triangulate(self.inst)

    def test_interior_points(self):
        assert self.inst.W == [(0, 0, 0), (1, 0, 0)]

    def test_star_of_origin(self):
        # the six unit vectors and nothing else
        assert self.tri.adjacent_points((0, 0, 0)) == sorted(
            [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)])

    def test_star_of_second_point(self):
        assert self.tri.adjacent_points((1, 0, 0)) == sorted(
            [(2, 0, 0), (0, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)])

    def test_top_cell_count(self):
        # 8 octants at the origin plus 4 cells wrapping the spike
        assert len(self.tri.top_cells) == 12

    def test_dual_cell_is_cube(self):
        p = trop.dual_cell_polytope(self.tri, (0, 0, 0))
        assert lat.polytope_volume(p) == 8
        assert len(p.vertex_list()) == 8

    def test_dual_two_cell_area(self):
        tc = trop.dual_complex(self.tri)
        cell = tc.cell(((0, 0, 0), (1, 0, 0)))
        assert trop.cell_volume(cell) == 4
        assert [v[0] for v in cell.vertices] == [-1, -1, -1, -1]

    def test_vertex_cell_volume_one(self):
        tc = trop.dual_complex(self.tri)
        top = self.tri.top_cells[0]
        cell = tc.cell(top)
        assert cell.dim == 0
        assert trop.cell_volume(cell) == 1

    def test_trop_eval(self):
        v, argmin = trop.trop_eval(self.inst, (0, 0, 0), with_argmin=True)
        assert v == 0 and argmin == ((0, 0, 0),)
        v, argmin = trop.trop_eval(self.inst, (-1, 0, 0), with_argmin=True)
        assert v == 0
        assert set(argmin) == {(0, 0, 0), (1, 0, 0)}

    def test_not_interior_raises(self):
        with pytest.raises(trop.NotInteriorPoint):
            trop.dual_cell_polytope(self.tri, (2, 0, 0))

    def test_wrong_dimension_periods(self):
        tc = trop.dual_complex(self.tri)
        with pytest.raises(trop.WrongDimension):
            trop.tropical_periods(tc)

    def test_minimal_cell(self):
        tau, weights = self.tri.minimal_cell_with_scaled_point((0, 0, 0), 1)
        assert tau == ((0, 0, 0),) and weights == {(0, 0, 0): 1}
        tau, weights = self.tri.minimal_cell_with_scaled_point((1, 0, 0), 2)
        # (1,0,0) = 1*(0,0,0) + 1*(1,0,0) at scale 2? no: weights sum to 2
        assert sum(weights.values()) == 2
        assert all(p > 0 for p in weights.values())


class TestEllipticTriangulation:
    def setup_method(self):
        self.inst = elliptic_instance()
        self.tri = trop.validate_and_triangulate(self.inst)
        self.tc = trop.dual_complex(self.tri)

    def test_nine_cells(self):
        assert len(self.tri.top_cells) == 9

    def test_ring_neighbors(self):
        assert self.tri.adjacent_points((0, 0)) == sorted(
            [(1, 0), (0, 1), (-1, 0), (0, -1), (1, -1), (-1, 1)])

    def test_tropical_periods(self):
        per = trop.tropical_periods(self.tc)
        assert per[((0, 0), (0, 0))] == 3

    def test_dual_hexagon(self):
        p = trop.dual_cell_polytope(self.tri, (0, 0))
        verts = p.vertex_list()
        assert len(verts) == 6
        assert lat.polytope_volume(p) == Fraction(3, 4)

    def test_unbounded_cells_marked(self):
        # edges touching the boundary of the polytope have unbounded duals
        cell = self.tc.cell(((-1, -1), (0, -1)))
        assert not cell.bounded
        with pytest.raises(trop.UnboundedCell):
            trop.cell_volume(cell)


class TestGenus2Triangulation:
    def setup_method(self):
        self.inst = genus2_instance()
        self.tri = trop.validate_and_triangulate(self.inst)
        self.tc = trop.dual_complex(self.tri)

    def test_interior_points(self):
        assert self.inst.W == [(1, 1), (2, 1)]

    def test_twelve_cells(self):
        assert len(self.tri.top_cells) == 12

    def test_periods_symmetric(self):
        per = trop.tropical_periods(self.tc)
        assert per[((1, 1), (2, 1))] == per[((2, 1), (1, 1))] == Fraction(9, 5)
        assert per[((1, 1), (1, 1))] == Fraction(38, 5)


class TestDualityInvariants:
    @pytest.mark.parametrize("maker", [cube_instance, elliptic_instance,
                                       genus2_instance])
    def test_dimension_reversal_bijection(self, maker):
        inst = maker()
        tri = trop.validate_and_triangulate(inst)
        tc = trop.dual_complex(tri)
        d = inst.d
        for k in range(0, d + 2):
            tri_count = len(tri.cells_by_dim.get(k, []))
            dual_count = len([c for c in tc.cells.values()
                              if c.dim == d + 1 - k])
            assert tri_count == dual_count
        # inclusion reversal on the face relation
        for tau in tri.cells:
            for tau2 in tri.cells:
                if set(tau) <= set(tau2):
                    c1 = tc.cell(tau)
                    c2 = tc.cell(tau2)
                    for v in c2.vertices:
                        assert c1.contains(v)

    @pytest.mark.parametrize("maker", [cube_instance, elliptic_instance])
    def test_top_cells_attain_min(self, maker):
        inst = maker()
        tri = trop.validate_and_triangulate(inst)
        tc = trop.dual_complex(tri)
        for m in inst.data:
            cell = tc.cell((m,))
            samples = list(cell.vertices) + [cell.interior_point()]
            for n in samples:
                val, argmin = trop.trop_eval(inst, n, with_argmin=True)
                assert val == inst.mu(m, n)
            val, argmin = trop.trop_eval(inst, cell.interior_point(),
                                         with_argmin=True)
            assert argmin == (m,)

    @pytest.mark.parametrize("maker", [cube_instance, elliptic_instance,
                                       genus2_instance])
    def test_bounded_iff_not_in_boundary(self, maker):
        # dual cell is bounded exactly when the cell is not contained in a
        # proper face of the polytope
        inst = maker()
        tri = trop.validate_and_triangulate(inst)
        tc = trop.dual_complex(tri)
        facets = lat.hull_facets(inst.polytope.vertices)
        for tau, cell in tc.cells.items():
            in_boundary = any(
                all(lat.dot(normal, m) + off == 0 for m in tau)
                for normal, off, _ in facets)
            assert cell.bounded == (not in_boundary)

    def test_argmin_matches_dual_cell(self):
        inst = cube_instance()
        tri = trop.validate_and_triangulate(inst)
        tc = trop.dual_complex(tri)
        for tau in tri.top_cells:
            cell = tc.cell(tau)
            n = cell.vertices[0]
            val, argmin = trop.trop_eval(inst, n, with_argmin=True)
            assert set(argmin) == set(tau)


class TestChamberPerturbation:
    @pytest.mark.parametrize("maker", [cube_instance, elliptic_instance,
                                       genus2_instance])
    def test_perturbation_keeps_triangulation(self, maker):
        inst = maker()
        tri = trop.validate_and_triangulate(inst)
        margin, radius = tri.chamber_margin()
        assert margin > 0 and radius > 0
        rng = random.Random(99)
        for _ in range(5):
            delta = {m: Fraction(rng.randint(-9, 9), 10) * radius
                     for m in inst.data}
            inst2 = inst.with_lifts({m: inst.data[m].lam + delta[m]
                                     for m in inst.data})
            tri2 = trop.validate_and_triangulate(inst2)
            assert tri2.top_cells == tri.top_cells


class TestSerialization:
    def test_triangulation_report_roundtrips(self):
        import json
        inst = elliptic_instance()
        tri = trop.validate_and_triangulate(inst)
        rep = trop.triangulation_report(tri)
        text = json.dumps(rep)
        back = json.loads(text)
        assert back["dim"] == 1
        assert len(back["top_cells"]) == 9
        assert back["lifts"][back["points"].index([0, 0])] == "0"
        assert "/" in back["chamber_margin"] or back["chamber_margin"].isdigit()

    def test_complex_report(self):
        import json
        inst = elliptic_instance()
        tri = trop.validate_and_triangulate(inst)
        tc = trop.dual_complex(tri)
        rep = trop.complex_report(tc)
        json.dumps(rep)
        cells = {tuple(sorted(map(tuple, c["dual_cell"]))) if False else None
                 for c in rep["cells"]}
        vertex_cells = [c for c in rep["cells"] if c["dim"] == 0]
        assert all(c["bounded"] for c in vertex_cells)
        assert len(rep["cells"]) == len(tc.cells)
