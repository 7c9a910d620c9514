import random
from fractions import Fraction

import pytest

from troperiods import corpus, gamma, toric
from troperiods import lattice as lat
from troperiods import tropical as trop
from troperiods.constants import PI, QQi, SymbolicConstant

S = SymbolicConstant


def lifts_of(inst):
    return {m: datum.lam for m, datum in inst.data.items()}


@pytest.fixture(scope="module")
def families():
    out = []
    for name in corpus.available():
        inst = corpus.instance(name)
        tri = trop.validate_and_triangulate(inst)
        mode = "consistent" if inst.d == 1 else "principal"
        br = gamma.choose_arg_branches(inst, mode=mode, tri=tri)
        out.append((name, inst, tri, br))
    return out


@pytest.fixture(scope="module")
def star_fans(families):
    fans = []
    for name, inst, tri, _ in families:
        for w in inst.W:
            fans.append((name, inst, tri, toric.star_fan(tri, w)))
    return fans


class TestIntersectionNumbers:
    def test_relation_annihilation_thousand_draws(self, star_fans):
        # linear equivalence: sum_rho <m, n_rho> D_rho = 0, so pairing the
        # relation against any multiset of d divisors must give exact zero
        rng = random.Random(1234)
        for _ in range(1000):
            name, inst, tri, fan = rng.choice(star_fans)
            rank = fan.ambient_dim
            m = tuple(rng.randint(-3, 3) for _ in range(rank))
            fixed = [rng.choice(fan.rays) for _ in range(rank - 1)]
            total = 0
            for r in fan.rays:
                c = lat.dot(m, r)
                if c:
                    total += c * toric.intersection_number(fan, fixed + [r])
            assert total == 0

    def test_oracle_agreement_two_hundred_multisets(self, star_fans):
        # the combinatorial reduction and the finite-difference volume
        # polynomial are independent routes to the same integer
        rng = random.Random(4321)
        steps = {}
        for _ in range(200):
            name, inst, tri, fan = rng.choice(star_fans)
            if id(fan) not in steps:
                _, radius = tri.chamber_margin()
                steps[id(fan)] = radius / 4
            ms = [rng.choice(fan.rays) for _ in range(fan.ambient_dim)]
            assert (toric.volume_polynomial_oracle(
                fan, lifts_of(inst), ms, step=steps[id(fan)])
                == toric.intersection_number(fan, ms))


class TestDuality:
    def test_dimension_reversing_bijection(self, families):
        for name, inst, tri, _ in families:
            tc = trop.dual_complex(tri)
            rank = inst.d + 1
            counts = {}
            for tau, cell in tc.cells.items():
                assert cell.dim == rank - (len(tau) - 1), name
                counts[cell.dim] = counts.get(cell.dim, 0) + 1
            for k, faces in tri.cells_by_dim.items():
                assert counts[rank - k] == len(faces), name

    def test_inclusion_reversal_on_random_face_pairs(self, families):
        rng = random.Random(2026)
        for name, inst, tri, _ in families:
            tc = trop.dual_complex(tri)
            for _ in range(25):
                tau2 = rng.choice(tri.top_cells)
                k = rng.randint(1, len(tau2) - 1)
                tau1 = tuple(sorted(rng.sample(list(tau2), k)))
                small = tc.cell(tau2)
                big = tc.cell(tau1)
                assert big.contains(small.interior_point()), name
                for vtx in small.vertices:
                    assert big.contains(vtx), name

    def test_bounded_iff_away_from_boundary(self, families):
        # a dual cell is bounded exactly when its face uses only interior
        # lattice points
        for name, inst, tri, _ in families:
            tc = trop.dual_complex(tri)
            interior = set(inst.W)
            for tau, cell in tc.cells.items():
                assert cell.bounded == all(p in interior for p in tau), name

    def test_min_attained_exactly_on_the_face(self, families):
        rng = random.Random(55)
        for name, inst, tri, _ in families:
            tc = trop.dual_complex(tri)
            marked = [tau for tau in tri.cells if len(tau) >= 2]
            for tau in rng.sample(marked, min(12, len(marked))):
                p = tc.cell(tau).interior_point()
                val, argmin = trop.trop_eval(inst, p, with_argmin=True)
                assert set(argmin) == set(tau), name


class TestBranchShift:
    def test_twenty_random_shift_configs(self, families):
        # moving one branch by 2 pi k multiplies the integrand by
        # exp(-2 pi i k D_m); the expansion difference must equal the run
        # with the factor exp(-2 pi i k D_m) - 1 inserted
        rng = random.Random(31415)
        fans = {}
        for _ in range(20):
            name, inst, tri, br = rng.choice(families)
            w = rng.choice(inst.W)
            if (name, w) not in fans:
                fans[(name, w)] = toric.star_fan(tri, w)
            fan = fans[(name, w)]
            ray = rng.choice(fan.rays)
            turns = rng.choice((-3, -2, -1, 1, 2, 3))
            shifted = br.shifted(w, lat.vadd(w, ray), turns)
            usable = [p for p in inst.W
                      if p == w or tri.has_cell(tuple(sorted((w, p))))]
            v = rng.choice(usable)
            lhs = gamma.sphere_period_asymptotics(inst, tri, 1, v, w,
                                                  shifted) \
                - gamma.sphere_period_asymptotics(inst, tri, 1, v, w, br)
            extra = toric.DivisorPoly.divisor(
                fan, ray, S.atom(PI, QQi(0, -2 * turns))).exp() - 1
            rhs = gamma.sphere_period_asymptotics(inst, tri, 1, v, w, br,
                                                  extra_factor=extra)
            assert lhs == rhs, (name, w, ray, turns, v)


class TestChamberStability:
    def test_perturbed_lifts_keep_the_triangulation(self, families):
        rng = random.Random(777)
        for name, inst, tri, _ in families:
            _, radius = tri.chamber_margin()
            for _ in range(3):
                coeffs = []
                for m, datum in inst.data.items():
                    delta = radius * Fraction(rng.randint(-99, 99), 200)
                    coeffs.append((m, datum.lam + delta, datum.c))
                inst2 = trop.ProblemInstance(inst.d, coeffs)
                tri2 = trop.validate_and_triangulate(inst2)
                assert tri2.top_cells == tri.top_cells, name
