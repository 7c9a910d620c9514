"""Limit Hodge data of one-parameter curve degenerations.

For d = 1 the period expansions assemble into a polarized limit structure:
a nilpotent matrix built from tropical edge lengths, the standard
symplectic pairing, and a rank-g filtration block whose entries mix 2 pi i
with logarithms of the coefficient data.  Everything except the numeric
rank and isotropy margins is exact.

Basis order is alpha*_w for w in lex order followed by beta*_w; matrices
act on columns in that order.
"""

from fractions import Fraction

import numpy as np

from . import lattice as lat
from . import toric
from . import tropical
from .constants import (I_UNIT, PI, QQi, SymbolicConstant, log_abs,
                        rational_str)
from .gamma import (branch_condition_residuals, sphere_period_asymptotics,
                    theta_twisted_asymptotics)
from .toric import DivisorPoly
from .tropical import WrongDimension


class InconsistentBranches(ValueError):
    """The branch assignment fails an edge or triangle condition."""


MINUS_TWO_PI_I = SymbolicConstant.atom(PI, QQi(0, -2))


def _point_tag(w):
    return "(%s)" % ",".join(str(x) for x in w)


class SymplecticBasisLabels:
    """Names and pairing for the rank-2g homology of a curve family.

    One alpha/beta pair per interior lattice point; the pairing on the
    dual basis is the standard symplectic form, Q(alpha*_v, beta*_w)
    = delta_{vw}.
    """

    def __init__(self, W):
        pts = [lat.lattice_vector(w) for w in W]
        assert pts == sorted(pts), "basis points must be lex sorted"
        assert len(set(pts)) == len(pts), "duplicate basis point"
        assert pts, "need at least one interior point"
        self.W = pts
        self.g = len(pts)

    def cycle_labels(self):
        return (["alpha_%s" % _point_tag(w) for w in self.W]
                + ["beta_%s" % _point_tag(w) for w in self.W])

    def dual_labels(self):
        return (["alpha*_%s" % _point_tag(w) for w in self.W]
                + ["beta*_%s" % _point_tag(w) for w in self.W])

    def alpha_index(self, w):
        return self.W.index(lat.lattice_vector(w))

    def beta_index(self, w):
        return self.g + self.W.index(lat.lattice_vector(w))

    def pairing_matrix(self):
        g = self.g
        q = [[Fraction(0)] * (2 * g) for _ in range(2 * g)]
        for i in range(g):
            q[i][g + i] = Fraction(1)
            q[g + i][i] = Fraction(-1)
        return q


def _mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    assert all(len(row) == k for row in a)
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)]
            for i in range(n)]


def _mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _identity(n):
    return [[Fraction(1) if i == j else Fraction(0) for j in range(n)]
            for i in range(n)]


def monodromy_matrix(tc):
    """Nilpotent log-monodromy on the dual basis, from tropical lengths.

    The alpha*_v column has beta*_w entry (-1)^{1 + delta_{vw}} l(v, w)
    for w = v or w an interior neighbor of v; beta* columns vanish, so the
    square is zero by construction.
    """
    if tc.d != 1:
        raise WrongDimension("log-monodromy needs d = 1, got d = %d"
                             % (tc.d,))
    inst = tc.instance
    tri = tc.tri
    W = inst.W
    g = len(W)
    lengths = tropical.tropical_periods(tc)
    n = [[Fraction(0)] * (2 * g) for _ in range(2 * g)]
    for j, v in enumerate(W):
        for i, w in enumerate(W):
            if v == w:
                n[g + i][j] = Fraction(lengths[(v, w)])
            elif tri.has_cell((v, w)):
                n[g + i][j] = -Fraction(lengths[(v, w)])
    return n


def p_matrix(inst, branches, tri=None):
    """g x g matrix of constants pairing coefficient logs with volumes.

    P[v][w] couples the dual cell data around w with
    Log(-c_m / c_w) = log|-c_m / c_w| + i * branch(w, m): against the
    boundary class when v = w, against the divisor of v when v neighbors
    w, zero otherwise.  These are the constant terms of the degree-one
    sphere expansions.
    """
    if inst.d != 1:
        raise WrongDimension("the filtration block needs d = 1, got d = %d"
                             % (inst.d,))
    if tri is None:
        tri = tropical.validate_and_triangulate(inst)
    res1, res2 = branch_condition_residuals(inst, tri, branches)
    bad = sum(1 for r in res1.values() if not r.is_zero) \
        + sum(1 for r in res2.values() if not r.is_zero)
    if bad:
        raise InconsistentBranches(
            "%d branch condition residuals are nonzero" % (bad,))
    W = inst.W
    p = [[SymbolicConstant() for _ in W] for _ in W]
    for jw, w in enumerate(W):
        fan = toric.star_fan(tri, w)
        sigma = toric.sigma_class(fan)
        logs = []
        for i in range(len(fan.rays)):
            m = fan.point(i)
            logs.append(log_abs(-(inst.coeff(m) / inst.coeff(w)))
                        + I_UNIT * branches.value(w, m))
        for iv, v in enumerate(W):
            if v == w:
                total = SymbolicConstant()
                for i in range(len(fan.rays)):
                    pair = toric.integrate_divisor_poly(
                        fan, DivisorPoly(fan, {(i,): 1}) * sigma)
                    total = total + logs[i] * pair
                p[iv][jw] = -total
            elif tri.has_cell(tuple(sorted((v, w)))):
                dv = DivisorPoly.divisor(fan, lat.vsub(v, w))
                total = SymbolicConstant()
                for i in range(len(fan.rays)):
                    pair = toric.integrate_divisor_poly(
                        fan, DivisorPoly(fan, {(i,): 1}) * dv)
                    total = total + logs[i] * pair
                p[iv][jw] = total
    return p


class LimitHodgeData:
    """The limit package: genus, nilpotent N, pairing Q, filtration block.

    F1 rows span the middle filtration step: row v is
    -2 pi i * alpha*_v + sum_w P[v][w] beta*_w.  The full space and zero
    complete the filtration implicitly.
    """

    def __init__(self, basis, n_matrix, p):
        self.basis = basis
        g = basis.g
        self.g = g
        assert len(n_matrix) == 2 * g and len(p) == g
        self.N = [list(row) for row in n_matrix]
        self.Q = basis.pairing_matrix()
        self.P = [list(row) for row in p]
        self.expN = _mat_add(_identity(2 * g), self.N)
        sq = _mat_mul(self.N, self.N)
        assert all(x == 0 for row in sq for x in row), "monodromy not square-zero"
        for j in range(g, 2 * g):
            assert all(self.N[i][j] == 0 for i in range(2 * g)), \
                "beta* columns must vanish"
        self.F1 = []
        for iv in range(g):
            row = [SymbolicConstant() for _ in range(2 * g)]
            row[iv] = MINUS_TWO_PI_I
            for jw in range(g):
                row[g + jw] = self.P[iv][jw]
            self.F1.append(row)

    def to_dict(self):
        def frac_rows(m):
            return [[rational_str(x) for x in row] for row in m]

        def const_rows(m):
            out = []
            for row in m:
                cells = []
                for c in row:
                    z = c.numeric()
                    cells.append({"symbolic": str(c),
                                  "numeric": [z.real, z.imag]})
                out.append(cells)
            return out

        return {"genus": self.g,
                "basis": self.basis.dual_labels(),
                "N": frac_rows(self.N),
                "expN": frac_rows(self.expN),
                "Q": frac_rows(self.Q),
                "P": const_rows(self.P),
                "F1": const_rows(self.F1)}


def limit_filtration(inst, tri, branches):
    """Assemble the limit data for a curve family."""
    if inst.d != 1:
        raise WrongDimension("limit data needs d = 1, got d = %d"
                             % (inst.d,))
    basis = SymplecticBasisLabels(inst.W)
    tc = tropical.dual_complex(tri)
    n = monodromy_matrix(tc)
    p = p_matrix(inst, branches, tri=tri)
    return LimitHodgeData(basis, n, p)


def _divide_by_minus_two_pi_i(x):
    """Exact quotient of a pure i*pi rational multiple by -2 pi i."""
    if x.is_zero:
        return Fraction(0)
    assert set(x.terms) == {((PI, 1),)}, \
        "expected a pure pi multiple, got %s" % (x,)
    c = x.terms[((PI, 1),)]
    assert c.re == 0, "expected a purely imaginary pi multiple, got %s" % (x,)
    return -c.im / 2


def monodromy_crosscheck(inst, tri, branches):
    """Recover the monodromy block from a full parameter turn.

    For each pair (v, w) the constant term moves by -2 pi i times the
    length entry when the parameter winds once around zero; dividing the
    move by -2 pi i must reproduce the alpha*_v -> beta*_w entry of N
    exactly.  Returns the recovered block and the worst absolute
    discrepancy, which any correct run reports as zero.
    """
    if inst.d != 1:
        raise WrongDimension("the crosscheck needs d = 1, got d = %d"
                             % (inst.d,))
    W = inst.W
    g = len(W)
    n = monodromy_matrix(tropical.dual_complex(tri))
    recovered = [[Fraction(0)] * g for _ in range(g)]
    worst = Fraction(0)
    for j, v in enumerate(W):
        for i, w in enumerate(W):
            base = sphere_period_asymptotics(inst, tri, 1, v, w, branches)
            turned = theta_twisted_asymptotics(inst, tri, 1, v, w,
                                               branches, 1)
            diff = turned - base
            assert diff.degree() in (None, 0), \
                "a full turn may only move the constant term"
            rec = _divide_by_minus_two_pi_i(diff.coefficient(0))
            recovered[i][j] = rec
            worst = max(worst, abs(rec - n[g + i][j]))
    return {"recovered_block": recovered, "max_discrepancy": worst}


# ------------------------------------------------------- numeric margins

def f1_numeric(data):
    rows = [[complex(c.numeric()) for c in row] for row in data.F1]
    return np.array(rows, dtype=complex)


def f1_rank_margin(data):
    """Smallest singular value of the F1 block; positive means rank g."""
    return float(np.linalg.svd(f1_numeric(data), compute_uv=False).min())


def frame_rank_margin(data, t=1e-3):
    """|det| of the period frame at parameter t stacked over its conjugate.

    The limit block alone can be degenerate against its conjugate: with
    real coefficient ratios every P entry is purely imaginary and each
    conjugated row is -1 times the original.  Nondegeneracy is restored by
    the L * N part of the actual period rows at a nearby t in (0, 1), so
    that is what gets stacked here.
    """
    t = float(t)
    assert 0.0 < t < 1.0
    big_l = -np.log(t)
    g = data.g
    rows = np.zeros((g, 2 * g), dtype=complex)
    for v in range(g):
        rows[v][v] = complex(MINUS_TWO_PI_I.numeric())
        for i in range(g):
            rows[v][g + i] = big_l * float(data.N[g + i][v]) \
                + complex(data.P[v][i].numeric())
    stack = np.vstack([rows, rows.conj()])
    return abs(np.linalg.det(stack))


def f1_isotropy_defect(data):
    """max |Q(x, y)| over rows x, y of F1; the pairing should vanish."""
    top = f1_numeric(data)
    q = np.array([[float(x) for x in row] for row in data.Q])
    return float(np.abs(top @ q @ top.T).max())
