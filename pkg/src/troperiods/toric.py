"""Star fans, divisor polynomials, and exact toric intersection numbers.

For an interior lattice point w of a unimodularly triangulated polytope the
cells containing w span a complete smooth fan.  The associated projective
toric variety carries one divisor class per adjacent lattice point, and top
intersection numbers of those classes are what every period coefficient
reduces to.  Two independent routes are provided: a Chow-ring reduction with
memoization (intersection_number) and a polytope-volume polarization
(volume_polynomial_oracle).  The two must agree; tests rely on that.
"""

import threading
from fractions import Fraction
from itertools import combinations
from math import factorial
import random

from . import lattice as lat
from .constants import SymbolicConstant


class SmoothnessViolation(Exception):
    """A star cone whose rays are not a lattice basis."""


class BadArity(ValueError):
    """Wrong number of divisor factors for a top intersection."""


class FanMismatch(ValueError):
    """Divisor polynomial evaluated against a different fan."""


class ChamberExit(Exception):
    """A finite-difference offset left the normal-fan chamber."""


class StarFan:
    """Complete smooth fan spanned by the triangulation cells at w.

    rays are the primitive vectors m - w for the points m adjacent to w,
    kept in sorted order; top cones are index tuples into that list.  The
    constructor checks smoothness (every top cone a lattice basis) and
    completeness (every ridge shared by exactly two top cones, plus a
    handful of generic directions each landing in exactly one cone).
    """

    def __init__(self, w, rays, top_cones):
        self.w = lat.lattice_vector(w)
        self.rays = tuple(sorted(lat.lattice_vector(r) for r in rays))
        assert len(set(self.rays)) == len(self.rays), "duplicate rays"
        self.ambient_dim = len(self.w)
        for r in self.rays:
            prim, scale = lat.primitive(r)
            if scale != 1:
                raise SmoothnessViolation("ray %r is not primitive" % (r,))
        self._ray_index = {r: i for i, r in enumerate(self.rays)}
        cones = set()
        for cone in top_cones:
            idx = tuple(sorted(self._resolve(r) for r in cone))
            assert len(set(idx)) == len(idx), "repeated ray in a cone"
            if len(idx) != self.ambient_dim:
                raise SmoothnessViolation("top cone %r is not full" % (idx,))
            det = lat.mat_det([self.rays[i] for i in idx])
            if det not in (1, -1):
                raise SmoothnessViolation(
                    "cone %r has determinant %s" % (idx, det))
            cones.add(idx)
        self.top_cones = tuple(sorted(cones))
        assert self.top_cones, "fan has no top cones"
        self._cone_sets = [frozenset(c) for c in self.top_cones]
        used = set()
        for c in self.top_cones:
            used.update(c)
        assert used == set(range(len(self.rays))), "ray not used by any cone"
        self._check_complete()
        self._memo = {}
        self._lock = threading.Lock()

    def _resolve(self, ray):
        if isinstance(ray, int):
            assert 0 <= ray < len(self.rays)
            return ray
        key = lat.lattice_vector(ray)
        if key not in self._ray_index:
            raise ValueError("%r is not a ray of this fan" % (ray,))
        return self._ray_index[key]

    def _check_complete(self):
        # every ridge must separate exactly two top cones
        ridge_count = {}
        for cone in self.top_cones:
            for ridge in combinations(cone, self.ambient_dim - 1):
                ridge_count[ridge] = ridge_count.get(ridge, 0) + 1
        for ridge, count in ridge_count.items():
            assert count == 2, "ridge %r on %d cones" % (ridge, count)
        rng = random.Random(20210 + len(self.rays))
        good = 0
        for _ in range(200):
            if good >= 10:
                break
            direction = tuple(Fraction(rng.randint(-997, 997), 1009)
                              for _ in range(self.ambient_dim))
            strict = 0
            on_wall = False
            for idx in self.top_cones:
                coords = lat.coords_in_basis(
                    direction, [self.rays[i] for i in idx])
                if coords is None or any(c < 0 for c in coords):
                    continue
                if all(c > 0 for c in coords):
                    strict += 1
                else:
                    on_wall = True
            if on_wall and strict == 0:
                continue  # resample non-generic directions
            assert strict == 1, "direction %r in %d cones" % (direction,
                                                              strict)
            good += 1
        assert good >= 10

    def ray_index(self, ray):
        return self._resolve(ray)

    def point(self, i):
        # the adjacent lattice point this ray came from
        return lat.vadd(self.w, self.rays[i])

    def points(self):
        return [self.point(i) for i in range(len(self.rays))]

    def cones_containing(self, support):
        need = set(support)
        return [c for c, s in zip(self.top_cones, self._cone_sets)
                if need <= s]

    def has_cone(self, rays):
        support = set(self._resolve(r) for r in rays)
        return bool(self.cones_containing(support))

    def dual_covector(self, cone, i_ray):
        """Integer m with <m, ray_i> = 1 and 0 on the other rays of cone."""
        assert i_ray in cone
        rows = [self.rays[i] for i in cone]
        rhs = tuple(Fraction(1 if i == i_ray else 0) for i in cone)
        m = lat.solve_square(rows, rhs)
        assert m is not None
        assert all(x.denominator == 1 for x in m)
        return tuple(int(x) for x in m)

    def __eq__(self, other):
        if not isinstance(other, StarFan):
            return NotImplemented
        return (self.w == other.w and self.rays == other.rays
                and self.top_cones == other.top_cones)

    def __hash__(self):
        return hash((self.w, self.rays, self.top_cones))

    def __repr__(self):
        return "StarFan(w=%r, %d rays, %d top cones)" % (
            self.w, len(self.rays), len(self.top_cones))


def star_fan(tri, w):
    """Fan of the toric variety attached to the interior point w."""
    from .tropical import NotInteriorPoint
    w = lat.lattice_vector(w)
    if w not in tri.instance.W:
        raise NotInteriorPoint("%r is not an interior lattice point" % (w,))
    rays = [lat.vsub(m, w) for m in tri.adjacent_points(w)]
    cones = []
    for tau in tri.star(w):
        if len(tau) == tri.instance.d + 2:
            cones.append([lat.vsub(m, w) for m in tau if m != w])
    return StarFan(w, rays, cones)


# ------------------------------------------------ intersection numbers

def intersection_number(fan, rays, rng=None, memo=None):
    """Top intersection number of the divisors named by rays (a multiset).

    The reduction rewrites a repeated divisor through the linear relation
    sum_rho <m, n_rho> D_rho = 0 with m dual to the repeated ray inside a
    top cone containing the current support, so every generated term has
    strictly larger support; depth is bounded by the ambient dimension.
    With rng given, all tie-break choices are randomized (the result must
    not change) and a fresh memo table is used.
    """
    idx = sorted(fan.ray_index(r) for r in rays)
    if len(idx) != fan.ambient_dim:
        raise BadArity("need %d divisors, got %d"
                       % (fan.ambient_dim, len(idx)))
    if memo is None:
        memo = {} if rng is not None else fan._memo
    shared = memo is fan._memo
    return _reduce(fan, tuple(idx), memo, rng, shared)


def _reduce(fan, key, memo, rng, shared):
    if key in memo:
        return memo[key]
    support = sorted(set(key))
    cones = fan.cones_containing(support)
    if not cones:
        val = 0
    elif len(support) == len(key):
        # squarefree multiset of full size spanning a top cone
        val = 1
    else:
        counts = {}
        for i in key:
            counts[i] = counts.get(i, 0) + 1
        repeated = sorted(i for i, c in counts.items() if c > 1)
        rho = rng.choice(repeated) if rng else repeated[0]
        if rng:
            sigma = rng.choice(cones)
        else:
            sigma = cones[0]
        m = fan.dual_covector(sigma, rho)
        rest = list(key)
        rest.remove(rho)
        in_sigma = set(sigma)
        val = 0
        order = list(range(len(fan.rays)))
        if rng:
            rng.shuffle(order)
        for rr in order:
            if rr in in_sigma:
                continue
            c = lat.dot(m, fan.rays[rr])
            if c == 0:
                continue
            sub = tuple(sorted(rest + [rr]))
            assert len(set(sub)) > len(support)
            val -= int(c) * _reduce(fan, sub, memo, rng, shared)
    if shared:
        with fan._lock:
            memo[key] = val
    else:
        memo[key] = val
    return val


# ------------------------------------------------ divisor polynomials

class DivisorPoly:
    """Polynomial in the divisor classes of a star fan.

    Terms are kept per exponent multiset (sorted ray index tuple) with
    coefficients in the exact constant field; everything of total degree
    above the ambient dimension is dropped since it cannot survive a top
    intersection anyway.
    """

    def __init__(self, fan, terms=None):
        self.fan = fan
        cut = fan.ambient_dim
        clean = {}
        if terms:
            for key, coeff in terms.items():
                key = tuple(sorted(key))
                assert all(0 <= i < len(fan.rays) for i in key)
                if len(key) > cut:
                    continue
                coeff = _as_symbolic(coeff)
                if not coeff.is_zero:
                    clean[key] = coeff
        self.terms = clean

    @classmethod
    def scalar(cls, fan, value):
        return cls(fan, {(): _as_symbolic(value)})

    @classmethod
    def divisor(cls, fan, ray, coeff=1):
        return cls(fan, {(fan.ray_index(ray),): _as_symbolic(coeff)})

    def coefficient(self, key):
        key = tuple(sorted(self.fan.ray_index(r) for r in key))
        return self.terms.get(key, SymbolicConstant())

    @property
    def is_zero(self):
        return not self.terms

    def degree_part(self, k):
        return DivisorPoly(self.fan, {key: c for key, c in self.terms.items()
                                      if len(key) == k})

    def max_degree(self):
        return max((len(k) for k in self.terms), default=0)

    def _same_fan(self, other):
        if self.fan != other.fan:
            raise FanMismatch("operands live on different fans")

    def __add__(self, other):
        if not isinstance(other, DivisorPoly):
            other = DivisorPoly.scalar(self.fan, other)
        self._same_fan(other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            s = terms.get(key, SymbolicConstant()) + c
            if s.is_zero:
                terms.pop(key, None)
            else:
                terms[key] = s
        return DivisorPoly(self.fan, terms)

    __radd__ = __add__

    def __neg__(self):
        return DivisorPoly(self.fan,
                           {key: -c for key, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DivisorPoly):
            other = DivisorPoly.scalar(self.fan, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, DivisorPoly):
            other = _as_symbolic(other)
            return DivisorPoly(self.fan, {k: c * other
                                          for k, c in self.terms.items()})
        self._same_fan(other)
        cut = self.fan.ambient_dim
        terms = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                if len(k1) + len(k2) > cut:
                    continue
                key = tuple(sorted(k1 + k2))
                prod = c1 * c2
                s = terms.get(key, SymbolicConstant()) + prod
                if s.is_zero:
                    terms.pop(key, None)
                else:
                    terms[key] = s
        return DivisorPoly(self.fan, terms)

    __rmul__ = __mul__

    def __pow__(self, k):
        assert isinstance(k, int) and k >= 0
        out = DivisorPoly.scalar(self.fan, 1)
        for _ in range(k):
            out = out * self
        return out

    def exp(self):
        """exp of a polynomial with no constant term, truncated."""
        assert () not in self.terms, "exp needs zero constant term"
        out = DivisorPoly.scalar(self.fan, 1)
        power = DivisorPoly.scalar(self.fan, 1)
        for k in range(1, self.fan.ambient_dim + 1):
            power = power * self
            if power.is_zero:
                break
            out = out + power * Fraction(1, factorial(k))
        return out

    def __eq__(self, other):
        if not isinstance(other, DivisorPoly):
            return NotImplemented
        return self.fan == other.fan and self.terms == other.terms

    def __repr__(self):
        return "DivisorPoly(%d terms, max degree %d)" % (
            len(self.terms), self.max_degree())


def _as_symbolic(x):
    if isinstance(x, SymbolicConstant):
        return x
    return SymbolicConstant.scalar(x)


def sigma_class(fan):
    """Sum of all divisor classes (the anticanonical class here)."""
    return DivisorPoly(fan, {(i,): SymbolicConstant.scalar(1)
                             for i in range(len(fan.rays))})


def omega_class(fan, lift):
    """sum_m (lambda_m - lambda_w) D_m over the adjacent points m."""
    lam = _lift_lookup(lift)
    lam_w = lam(fan.w)
    terms = {}
    for i in range(len(fan.rays)):
        c = lat.rational(lam(fan.point(i))) - lam_w
        if c:
            terms[(i,)] = SymbolicConstant.scalar(c)
    return DivisorPoly(fan, terms)


def _lift_lookup(lift):
    if callable(lift):
        return lift
    table = {lat.lattice_vector(m): lat.rational(v)
             for m, v in dict(lift).items()}
    return lambda m: table[lat.lattice_vector(m)]


def integrate_divisor_poly(fan, p):
    """Pair a divisor polynomial with the fundamental class.

    Only the top-degree part contributes; the value is exact in the
    constant field.
    """
    if not isinstance(p, DivisorPoly):
        raise FanMismatch("not a divisor polynomial: %r" % (p,))
    if p.fan != fan:
        raise FanMismatch("polynomial belongs to %r" % (p.fan,))
    total = SymbolicConstant()
    for key, coeff in p.terms.items():
        if len(key) != fan.ambient_dim:
            continue
        total = total + coeff * intersection_number(
            fan, key)
    return total


# ------------------------------------------------ volume-polynomial oracle

def volume_polynomial_oracle(fan, lift, rays, step=None):
    """Intersection number recomputed by polarizing the volume function.

    vol of {n : <ray, n> + a_ray >= 0} is a degree-(d+1) polynomial of the
    offsets a as long as the combinatorial type stays put, and its mixed
    finite differences in the directions of the multiset recover the same
    integer as intersection_number.  Offsets start at a = lambda_m -
    lambda_w and move by step; any vertex-facet incidence change along the
    way raises ChamberExit (pick a step below the chamber margin).
    """
    idx = sorted(fan.ray_index(r) for r in rays)
    n = fan.ambient_dim
    if len(idx) != n:
        raise BadArity("need %d divisors, got %d" % (n, len(idx)))
    if step is None:
        step = Fraction(1, 16)
    step = lat.rational(step)
    assert step > 0
    lam = _lift_lookup(lift)
    lam_w = lam(fan.w)
    base = [lat.rational(lam(fan.point(i))) - lam_w
            for i in range(len(fan.rays))]

    def snapshot(offsets):
        ineqs = [(fan.rays[i], offsets[i]) for i in range(len(fan.rays))]
        verts = lat.vertices_from_inequalities(ineqs, with_incidence=True)
        shape = tuple(sorted(tight for _, tight in verts))
        return [v for v, _ in verts], shape

    _, reference = snapshot(base)
    total = Fraction(0)
    for mask in range(1 << n):
        offsets = list(base)
        ones = 0
        for pos in range(n):
            if mask >> pos & 1:
                offsets[idx[pos]] += step
                ones += 1
        verts, shape = snapshot(offsets)
        if shape != reference:
            raise ChamberExit(
                "offset pattern %r changed the combinatorial type" % (mask,))
        total += (-1) ** (n - ones) * lat.polytope_volume(verts)
    value = total / step ** n
    assert value.denominator == 1
    return value
