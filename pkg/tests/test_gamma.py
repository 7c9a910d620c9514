import random
from fractions import Fraction

import pytest

from troperiods import corpus, gamma, toric
from troperiods import lattice as lat
from troperiods import tropical as trop
from troperiods.constants import PI, QQi, SymbolicConstant, ZETA

S = SymbolicConstant
TWO_PI_I = S.atom(PI, QQi(0, 2))
ORIGIN3 = (0, 0, 0)
E1 = (1, 0, 0)


@pytest.fixture(scope="module")
def cube():
    inst = corpus.instance("cube")
    tri = trop.validate_and_triangulate(inst)
    br = gamma.choose_arg_branches(inst, mode="principal", tri=tri)
    return inst, tri, br


@pytest.fixture(scope="module")
def cube_weighted():
    inst = corpus.instance("cube_weighted")
    tri = trop.validate_and_triangulate(inst)
    br = gamma.choose_arg_branches(inst, mode="principal", tri=tri)
    return inst, tri, br


@pytest.fixture(scope="module")
def elliptic():
    inst = corpus.instance("elliptic")
    tri = trop.validate_and_triangulate(inst)
    br = gamma.choose_arg_branches(inst, mode="consistent", tri=tri)
    return inst, tri, br


@pytest.fixture(scope="module")
def genus2():
    inst = corpus.instance("genus2")
    tri = trop.validate_and_triangulate(inst)
    br = gamma.choose_arg_branches(inst, mode="consistent", tri=tri)
    return inst, tri, br


class TestAsymptoticExpansion:
    def test_trims_trailing_zeros(self):
        e = gamma.AsymptoticExpansion([1, 2, 0, S()])
        assert e.degree() == 1
        assert e.coefficients == [S.scalar(1), S.scalar(2)]

    def test_zero_expansion(self):
        e = gamma.AsymptoticExpansion([0, S()])
        assert e.is_zero
        assert e.degree() is None
        assert e.top_term() == (None, S())
        assert e.evaluate(0.5) == 0j

    def test_coefficient_padding(self):
        e = gamma.AsymptoticExpansion([3])
        assert e.coefficient(0) == S.scalar(3)
        assert e.coefficient(5) == S()

    def test_evaluate(self):
        import math
        e = gamma.AsymptoticExpansion([1, 2])
        big_l = -math.log(0.1)
        assert abs(e.evaluate(0.1) - (1 + 2 * big_l)) < 1e-12

    def test_add_sub(self):
        a = gamma.AsymptoticExpansion([1, 2])
        b = gamma.AsymptoticExpansion([1, 0, 5])
        assert (a + b).coefficients == [S.scalar(2), S.scalar(2), S.scalar(5)]
        assert (a - a).is_zero

    def test_to_dict_skips_zero_rows(self):
        e = gamma.AsymptoticExpansion([1, 0, 2], meta={"indices": {"l": 1}})
        rows = e.to_dict()["powers_of_L"]
        assert [r["k"] for r in rows] == [0, 2]
        assert e.to_dict()["error"] == "O(t^eps)"
        assert e.to_dict()["indices"] == {"l": 1}


class TestGammaSeries:
    def test_degree_parts(self, cube):
        _, tri, _ = cube
        fan = toric.star_fan(tri, ORIGIN3)
        g = gamma.gamma_class_series(fan)
        assert g.degree_part(0) == toric.DivisorPoly.scalar(fan, 1)
        # the weight-1 term carries sigma - sum D_m = 0
        assert g.degree_part(1).is_zero
        ps2 = toric.DivisorPoly(fan, {(i,) * 2: 1
                                      for i in range(len(fan.rays))})
        sigma = toric.sigma_class(fan)
        want = (ps2 - sigma ** 2) * S.atom(ZETA(2), Fraction(1, 2))
        assert g.degree_part(2) == want

    def test_only_zeta_atoms(self, elliptic):
        _, tri, _ = elliptic
        fan = toric.star_fan(tri, (0, 0))
        g = gamma.gamma_class_series(fan)
        for coeff in g.terms.values():
            for mono in coeff.terms:
                for atom, _ in mono:
                    assert atom[0] == "zeta"


class TestEFactor:
    def test_v_equals_w(self, cube):
        _, tri, _ = cube
        fan = toric.star_fan(tri, ORIGIN3)
        assert gamma.e_factor(tri, 1, ORIGIN3, ORIGIN3) \
            == toric.sigma_class(fan)

    def test_v_on_neighbor(self, cube):
        _, tri, _ = cube
        fan = toric.star_fan(tri, ORIGIN3)
        assert gamma.e_factor(tri, 1, E1, ORIGIN3) \
            == toric.DivisorPoly.divisor(fan, E1)

    def test_scaled_point_on_edge(self, cube):
        # 2v = w + m splits as one divisor factor and one sigma factor
        _, tri, _ = cube
        fan = toric.star_fan(tri, ORIGIN3)
        want = toric.DivisorPoly.divisor(fan, E1) * toric.sigma_class(fan)
        assert gamma.e_factor(tri, 2, E1, ORIGIN3) == want

    def test_incompatible_pair(self, genus2):
        _, tri, _ = genus2
        with pytest.raises(gamma.IncompatiblePair):
            gamma.e_factor(tri, 2, (1, 1), (2, 1))

    def test_not_interior(self, cube):
        _, tri, _ = cube
        with pytest.raises(ValueError):
            gamma.e_factor(tri, 1, (0, 0, 1), ORIGIN3)


class TestBranches:
    def test_principal_any_dimension(self, cube):
        inst, _, br = cube
        assert br.scope == "principal"
        # c_0 = -1 and c_m = 1 elsewhere, so -c_m/c_0 = 1 has argument zero
        # while -c_0/c_m = 1 does too; a pair of outer points gives -1
        assert br.value(ORIGIN3, E1) == S()
        assert br.value(E1, (0, 1, 0)) == S.atom(PI, 1)

    def test_consistent_needs_curves(self, cube):
        inst, tri, _ = cube
        with pytest.raises(trop.WrongDimension):
            gamma.choose_arg_branches(inst, mode="consistent", tri=tri)

    def test_unknown_mode(self, cube):
        inst, _, _ = cube
        with pytest.raises(ValueError):
            gamma.choose_arg_branches(inst, mode="exotic")

    def test_elliptic_assignment_values(self, elliptic):
        _, _, br = elliptic
        # deterministic free choices land these two away from the principal
        # branch; frozen so the induction cannot silently change
        assert br.value((0, 0), (0, -1)) == S.atom(PI, -2)
        assert br.value((0, 0), (1, -1)) == S.atom(PI, -4)

    def test_elliptic_residuals_zero(self, elliptic):
        inst, tri, br = elliptic
        res1, res2 = gamma.branch_condition_residuals(inst, tri, br)
        assert res1 and res2
        assert len(res1) == 2 * len(tri.cells_by_dim[1])
        assert len(res2) == 6 * len(tri.top_cells)
        assert all(r.is_zero for r in res1.values())
        assert all(r.is_zero for r in res2.values())

    def test_genus2_residuals_zero(self, genus2):
        inst, tri, br = genus2
        res1, res2 = gamma.branch_condition_residuals(inst, tri, br)
        assert all(r.is_zero for r in res1.values())
        assert all(r.is_zero for r in res2.values())

    def test_residuals_need_curves(self, cube):
        inst, tri, br = cube
        with pytest.raises(trop.WrongDimension):
            gamma.branch_condition_residuals(inst, tri, br)

    def test_every_value_is_a_branch(self, elliptic):
        inst, _, br = elliptic
        from troperiods.constants import principal_arg
        for (m0, m1), val in br.values.items():
            diff = val - principal_arg(-(inst.coeff(m1) / inst.coeff(m0)))
            if not diff.is_zero:
                assert set(diff.terms) == {((PI, 1),)}
                c = diff.terms[((PI, 1),)]
                assert c.im == 0 and c.re % 2 == 0

    def test_shifted_moves_one_pair(self, cube):
        inst, _, br = cube
        sh = br.shifted(ORIGIN3, E1, 1)
        assert sh.value(ORIGIN3, E1) == br.value(ORIGIN3, E1) + S.atom(PI, 2)
        assert sh.value(E1, ORIGIN3) == br.value(E1, ORIGIN3)

    def test_shift_must_be_integral(self, cube):
        _, _, br = cube
        with pytest.raises(AssertionError):
            br.shifted(ORIGIN3, E1, Fraction(1, 2))

    def test_value_requires_distinct_points(self, cube):
        _, _, br = cube
        with pytest.raises(AssertionError):
            br.value(ORIGIN3, ORIGIN3)

    def test_principal_matches_consistent_up_to_two_pi(self, genus2):
        inst, tri, br = genus2
        pr = gamma.choose_arg_branches(inst, mode="principal")
        for key, val in br.values.items():
            diff = val - pr.values[key]
            if not diff.is_zero:
                c = diff.terms[((PI, 1),)]
                assert c.re % 2 == 0


class TestSphereExpansion:
    def test_cube_golden_pair(self, cube):
        inst, tri, br = cube
        e = gamma.sphere_period_asymptotics(inst, tri, 1, E1, ORIGIN3, br)
        assert e.coefficients == [S.atom(ZETA(2), -4), S(), S.scalar(4)]
        assert abs(e.evaluate(1e-3).real - 184.2885957098294) < 1e-9
        assert abs(e.evaluate(1e-3).imag) < 1e-12

    def test_cube_self_pair(self, cube):
        inst, tri, br = cube
        e = gamma.sphere_period_asymptotics(inst, tri, 1, ORIGIN3, ORIGIN3,
                                            br)
        assert e.coefficients == [S.atom(ZETA(2), 24), S(), S.scalar(-24)]

    def test_elliptic_expansion(self, elliptic):
        inst, tri, br = elliptic
        e = gamma.sphere_period_asymptotics(inst, tri, 1, (0, 0), (0, 0), br)
        assert e.coefficients == [S.atom(PI, QQi(0, 6)), S.scalar(3)]

    def test_elliptic_top_is_tropical_length(self, elliptic):
        # the L-coefficient is the lattice length of the dual cell boundary
        inst, tri, br = elliptic
        tc = trop.dual_complex(tri)
        lengths = trop.tropical_periods(tc)
        e = gamma.sphere_period_asymptotics(inst, tri, 1, (0, 0), (0, 0), br)
        assert e.coefficient(1) == S.scalar(lengths[((0, 0), (0, 0))])

    def test_weighted_coefficients_pick_up_logs(self, cube_weighted):
        inst, tri, br = cube_weighted
        e = gamma.sphere_period_asymptotics(inst, tri, 1, ORIGIN3, ORIGIN3,
                                            br)
        assert e.coefficient(2) == S.scalar(-24)
        assert e.coefficient(1) == S.atom(("log", 2), 8) \
            + S.atom(("log", 3), 8)

    def test_degree_bounded_by_d(self, cube, elliptic, genus2):
        for inst, tri, br in (cube, elliptic, genus2):
            for w in inst.W:
                e = gamma.sphere_period_asymptotics(inst, tri, 1, w, w, br)
                deg = e.degree()
                assert deg is not None and deg <= inst.d

    def test_incompatible_pair_is_flagged_zero(self, genus2):
        inst, tri, br = genus2
        e = gamma.sphere_period_asymptotics(inst, tri, 2, (1, 1), (2, 1), br)
        assert e.is_zero
        assert e.error == "O(t^eps)"
        assert e.meta["indices"]["kind"] == "sphere"

    def test_rejects_non_interior_v(self, cube):
        inst, tri, br = cube
        with pytest.raises(ValueError):
            gamma.sphere_period_asymptotics(inst, tri, 1, (0, 0, 1), ORIGIN3,
                                            br)

    def test_meta_records_the_pair(self, cube):
        inst, tri, br = cube
        e = gamma.sphere_period_asymptotics(inst, tri, 2, E1, ORIGIN3, br)
        assert e.meta["indices"] == {"kind": "sphere", "l": 2,
                                     "v": [1, 0, 0], "w": [0, 0, 0]}
        assert "oriented" in e.meta["orientation"]

    def test_branch_shift_identity(self, cube):
        # moving one branch by 2 pi changes the integrand by the factor
        # exp(-2 pi i D_m); the difference of expansions must match the
        # run with that factor inserted
        inst, tri, br = cube
        fan = toric.star_fan(tri, ORIGIN3)
        m = (0, 1, 0)
        sh = br.shifted(ORIGIN3, m, 1)
        lhs = gamma.sphere_period_asymptotics(inst, tri, 1, ORIGIN3, ORIGIN3,
                                              sh) \
            - gamma.sphere_period_asymptotics(inst, tri, 1, ORIGIN3, ORIGIN3,
                                              br)
        extra = toric.DivisorPoly.divisor(fan, m,
                                          S.atom(PI, QQi(0, -2))).exp() - 1
        rhs = gamma.sphere_period_asymptotics(inst, tri, 1, ORIGIN3, ORIGIN3,
                                              br, extra_factor=extra)
        assert not lhs.is_zero
        assert lhs == rhs

    def test_branch_shift_identity_random(self, cube, elliptic, genus2):
        rng = random.Random(9001)
        for _ in range(8):
            inst, tri, br = rng.choice((cube, elliptic, genus2))
            w = rng.choice(inst.W)
            fan = toric.star_fan(tri, w)
            m = rng.choice(fan.rays)
            point = lat.vadd(w, m)
            turns = rng.choice((-2, -1, 1, 2))
            sh = br.shifted(w, point, turns)
            lhs = gamma.sphere_period_asymptotics(inst, tri, 1, w, w, sh) \
                - gamma.sphere_period_asymptotics(inst, tri, 1, w, w, br)
            extra = toric.DivisorPoly.divisor(
                fan, m, S.atom(PI, QQi(0, -2 * turns))).exp() - 1
            rhs = gamma.sphere_period_asymptotics(inst, tri, 1, w, w, br,
                                                  extra_factor=extra)
            assert lhs == rhs


class TestThetaTwist:
    def test_zero_turns_is_identity(self, elliptic):
        inst, tri, br = elliptic
        a = gamma.sphere_period_asymptotics(inst, tri, 1, (0, 0), (0, 0), br)
        b = gamma.theta_twisted_asymptotics(inst, tri, 1, (0, 0), (0, 0), br,
                                            0)
        assert a == b

    def test_elliptic_full_turn_difference(self, elliptic):
        inst, tri, br = elliptic
        a = gamma.sphere_period_asymptotics(inst, tri, 1, (0, 0), (0, 0), br)
        b = gamma.theta_twisted_asymptotics(inst, tri, 1, (0, 0), (0, 0), br,
                                            1)
        diff = b - a
        assert diff.coefficients == [S.atom(PI, QQi(0, -6))]

    def test_top_coefficient_twist_invariant(self, cube, elliptic, genus2):
        rng = random.Random(321)
        for inst, tri, br in (cube, elliptic, genus2):
            for _ in range(3):
                w = rng.choice(inst.W)
                turns = rng.choice((1, 2, Fraction(1, 3)))
                a = gamma.sphere_period_asymptotics(inst, tri, 1, w, w, br)
                b = gamma.theta_twisted_asymptotics(inst, tri, 1, w, w, br,
                                                    turns)
                assert a.top_term() == b.top_term()


class TestTorusExpansion:
    def test_cube_edge_at_w(self, cube):
        inst, tri, _ = cube
        e = gamma.torus_period_asymptotics(inst, tri, 1, ORIGIN3,
                                           (ORIGIN3, E1), ORIGIN3)
        assert e.coefficients == [TWO_PI_I ** 2 * (-1)]

    def test_cube_edge_at_far_end(self, cube):
        inst, tri, _ = cube
        e = gamma.torus_period_asymptotics(inst, tri, 1, E1,
                                           (ORIGIN3, E1), ORIGIN3)
        assert e.coefficients == [TWO_PI_I ** 2]

    def test_cube_degree_two(self, cube):
        inst, tri, _ = cube
        cases = {ORIGIN3: [TWO_PI_I ** 2 * (-1)],
                 E1: [],
                 (2, 0, 0): [TWO_PI_I ** 2]}
        for v, want in cases.items():
            e = gamma.torus_period_asymptotics(inst, tri, 2, v,
                                               (ORIGIN3, E1), ORIGIN3)
            assert e.coefficients == want

    def test_unmatched_carrier_is_zero(self, cube):
        inst, tri, _ = cube
        e = gamma.torus_period_asymptotics(inst, tri, 1, E1,
                                           (ORIGIN3, (0, 1, 0)), ORIGIN3)
        assert e.is_zero
        assert e.meta["indices"]["kind"] == "torus"

    def test_elliptic_value(self, elliptic):
        inst, tri, _ = elliptic
        e = gamma.torus_period_asymptotics(inst, tri, 1, (0, 0),
                                           ((0, 0), (1, 0)), (0, 0))
        assert e.coefficients == [TWO_PI_I * (-1)]

    def test_matching_value_is_minus_two_pi_i_power(self, cube, elliptic,
                                                    genus2):
        # every l = 1, v = w configuration over an incident edge
        for inst, tri, _ in (cube, elliptic, genus2):
            for w in inst.W:
                for m in tri.adjacent_points(w):
                    if m == w:
                        continue
                    e = gamma.torus_period_asymptotics(inst, tri, 1, w,
                                                       (w, m), w)
                    assert e.coefficients == [TWO_PI_I ** inst.d * (-1)]

    def test_bad_edges(self, cube):
        inst, tri, _ = cube
        with pytest.raises(gamma.BadCell):
            gamma.torus_period_asymptotics(inst, tri, 1, ORIGIN3,
                                           (ORIGIN3, ORIGIN3), ORIGIN3)
        with pytest.raises(gamma.BadCell):
            gamma.torus_period_asymptotics(inst, tri, 1, ORIGIN3,
                                           (ORIGIN3, (1, 1, 1)), ORIGIN3)
        # orientation point must be an endpoint of the edge
        with pytest.raises(gamma.BadCell):
            gamma.torus_period_asymptotics(inst, tri, 1, ORIGIN3,
                                           (ORIGIN3, (0, 1, 0)), E1)
        # orientation point must be an interior lattice point
        with pytest.raises(gamma.BadCell):
            gamma.torus_period_asymptotics(inst, tri, 1, ORIGIN3,
                                           ((0, 1, 0), ORIGIN3), (0, 1, 0))


class TestLeadingTerm:
    def test_golden_pair(self, cube):
        inst, tri, _ = cube
        assert gamma.leading_term(inst, tri, 1, E1, ORIGIN3) \
            == (2, S.scalar(4))

    def test_self_pair_is_dual_facet_volume(self, cube):
        inst, tri, _ = cube
        assert gamma.leading_term(inst, tri, 1, ORIGIN3, ORIGIN3) \
            == (2, S.scalar(-24))

    def test_degenerate_pairing_reports_zero(self, cube):
        # this pair's squarefree class pairs to zero against everything,
        # so the whole expansion vanishes and there is no leading term
        inst, tri, br = cube
        lead = gamma.leading_term(inst, tri, 2, E1, E1)
        assert lead == (None, S())
        e = gamma.sphere_period_asymptotics(inst, tri, 2, E1, E1, br)
        assert e.is_zero

    def test_incompatible_pair_raises(self, genus2):
        inst, tri, _ = genus2
        with pytest.raises(gamma.IncompatiblePair):
            gamma.leading_term(inst, tri, 2, (1, 1), (2, 1))

    def test_w_must_be_interior(self, cube):
        inst, tri, _ = cube
        with pytest.raises(trop.NotInteriorPoint):
            gamma.leading_term(inst, tri, 1, ORIGIN3, (0, 1, 0))

    def test_matches_expansion_on_corpus(self, cube, cube_weighted,
                                         elliptic, genus2):
        counts = {}
        for name, (inst, tri, br) in (("cube", cube),
                                      ("cube_weighted", cube_weighted),
                                      ("elliptic", elliptic),
                                      ("genus2", genus2)):
            match = zero = 0
            for l in (1, 2):
                for v in inst.interior_points(l):
                    for w in inst.W:
                        try:
                            lead = gamma.leading_term(inst, tri, l, v, w)
                        except gamma.IncompatiblePair:
                            continue
                        e = gamma.sphere_period_asymptotics(inst, tri, l, v,
                                                            w, br)
                        assert lead == e.top_term(), (name, l, v, w)
                        if lead[0] is None:
                            zero += 1
                        else:
                            match += 1
            counts[name] = (match, zero)
        assert counts == {"cube": (27, 1), "cube_weighted": (27, 1),
                          "elliptic": (11, 0), "genus2": (26, 0)}
