"""Exact lattice and polytope primitives.

Everything here runs on fractions.Fraction; floating point never enters this
module. Lattice vectors are plain int tuples, rational points are Fraction
tuples. Ambient dimensions stay small (<= 4 in practice, a few dozen points),
so hulls, triangulations and lattice routines use exhaustive exact enumeration
instead of incremental geometry.
"""

import math
from fractions import Fraction
from itertools import combinations, product


class DegenerateSimplex(ValueError):
    pass


class UnboundedPolytope(ValueError):
    pass


class IrrationalDirection(ValueError):
    pass


# ------------------------------------------------------------------ vectors

def rational(x):
    # floats are rejected outright: binary rounding artifacts would silently
    # poison the exact pipeline
    if isinstance(x, float):
        raise TypeError("floating point value %r not allowed here" % (x,))
    return Fraction(x)


def rational_point(seq):
    return tuple(rational(x) for x in seq)


def lattice_vector(seq):
    out = []
    for x in seq:
        f = rational(x)
        if f.denominator != 1:
            raise ValueError("non-integer coordinate %r in lattice vector" % (x,))
        out.append(int(f))
    return tuple(out)


def vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a):
    return tuple(c * x for x in a)


def dot(a, b):
    assert len(a) == len(b)
    return sum(x * y for x, y in zip(a, b))


def primitive(v):
    """Primitive integer vector on the ray of rational v, and the scale.

    Returns (p, r) with v = r * p, r a positive rational, p primitive integer.
    """
    v = rational_point(v)
    if all(x == 0 for x in v):
        raise ValueError("zero vector has no direction")
    den = math.lcm(*[x.denominator for x in v])
    ints = [int(x * den) for x in v]
    g = math.gcd(*[abs(x) for x in ints])
    return tuple(x // g for x in ints), Fraction(g, den)


# ----------------------------------------------------------- linear algebra

def mat_det(rows):
    n = len(rows)
    if n == 0:
        return Fraction(1)
    assert all(len(r) == n for r in rows)
    m = [[Fraction(x) for x in r] for r in rows]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] * inv
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return det


def _rref(m):
    """In-place reduced row echelon form; returns the pivot column list."""
    nr = len(m)
    nc = len(m[0]) if nr else 0
    pivots = []
    row = 0
    for col in range(nc):
        piv = next((i for i in range(row, nr) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = 1 / m[row][col]
        m[row] = [x * inv for x in m[row]]
        for i in range(nr):
            if i != row and m[i][col]:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        pivots.append(col)
        row += 1
        if row == nr:
            break
    return pivots


def mat_rank(rows):
    if not rows:
        return 0
    m = [[Fraction(x) for x in r] for r in rows]
    return len(_rref(m))


def mat_mul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b)))
             for j in range(len(b[0]))] for i in range(len(a))]


def mat_vec(a, v):
    return tuple(sum(r[j] * v[j] for j in range(len(v))) for r in a)


def identity_matrix(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_inv(rows):
    n = len(rows)
    m = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(rows)]
    pivots = _rref(m)
    if pivots != list(range(n)):
        raise ValueError("singular matrix")
    return [r[n:] for r in m]


def solve_square(rows, rhs):
    """Unique solution x of rows . x = rhs, or None if the matrix is singular."""
    n = len(rows)
    m = [[Fraction(x) for x in rows[i]] + [Fraction(rhs[i])] for i in range(n)]
    pivots = _rref(m)
    if pivots != list(range(n)):
        return None
    return tuple(m[i][n] for i in range(n))


def coords_in_basis(v, rows):
    """x with sum_i x_i rows[i] = v, or None if v is outside the span.

    rows must be linearly independent.
    """
    k = len(rows)
    n = len(v)
    m = [[Fraction(rows[i][j]) for i in range(k)] + [Fraction(v[j])]
         for j in range(n)]
    pivots = _rref(m)
    if k in pivots:
        return None
    assert pivots == list(range(k)), "basis rows are dependent"
    return tuple(m[i][k] for i in range(k))


def cross_normal(rows, k):
    """A nonzero kernel covector of a (k-1) x k matrix of rank k-1.

    Cofactor expansion; returns the zero vector when the rank is deficient.
    """
    comps = []
    for i in range(k):
        minor = [[r[j] for j in range(k) if j != i] for r in rows]
        comps.append((-1) ** i * mat_det(minor))
    return tuple(comps)


# ------------------------------------------------------- integer reduction

def integer_diagonalize(rows, width=None):
    """Reduce an integer matrix to diagonal form by unimodular row/col ops.

    Returns (U, D, V, Vinv) with U*rows*V = D, U and V unimodular, D diagonal
    with nonnegative entries. No divisibility chain is enforced; saturations,
    kernels and completions below only need the diagonal shape.
    """
    A = [[int(x) for x in r] for r in rows]
    r = len(A)
    c = len(A[0]) if A else width
    assert c is not None, "width required for an empty matrix"
    if A:
        assert all(len(row) == c for row in A)
        if width is not None:
            assert width == c
    U = identity_matrix(r)
    V = identity_matrix(c)
    Vinv = identity_matrix(c)

    def row_sub(i, t, q):
        for j in range(c):
            A[i][j] -= q * A[t][j]
        for j in range(r):
            U[i][j] -= q * U[t][j]

    def col_sub(j, t, q):
        for i in range(r):
            A[i][j] -= q * A[i][t]
        for i in range(c):
            V[i][j] -= q * V[i][t]
        for k in range(c):
            Vinv[t][k] += q * Vinv[j][k]

    for t in range(min(r, c)):
        while True:
            best = None
            for i in range(t, r):
                for j in range(t, c):
                    if A[i][j] != 0 and (best is None
                                         or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            bi, bj = best
            if bi != t:
                A[bi], A[t] = A[t], A[bi]
                U[bi], U[t] = U[t], U[bi]
            if bj != t:
                for i in range(r):
                    A[i][bj], A[i][t] = A[i][t], A[i][bj]
                for i in range(c):
                    V[i][bj], V[i][t] = V[i][t], V[i][bj]
                Vinv[bj], Vinv[t] = Vinv[t], Vinv[bj]
            if A[t][t] < 0:
                for j in range(c):
                    A[t][j] = -A[t][j]
                for j in range(r):
                    U[t][j] = -U[t][j]
            dirty = False
            for i in range(t + 1, r):
                if A[i][t]:
                    row_sub(i, t, A[i][t] // A[t][t])
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, c):
                if A[t][j]:
                    col_sub(j, t, A[t][j] // A[t][t])
                    if A[t][j]:
                        dirty = True
            if not dirty:
                break
    return U, A, V, Vinv


def saturated_basis(vectors):
    """Basis of (Q-span of vectors) ∩ Z^n, as integer rows.

    Input rows may be rational and linearly dependent. Integer coordinates in
    the returned basis classify exactly the lattice points of the span, so
    Euclidean measure in these coordinates is lattice-normalized measure.
    """
    vecs = [rational_point(v) for v in vectors]
    vecs = [v for v in vecs if any(x != 0 for x in v)]
    if not vecs:
        return []
    n = len(vecs[0])
    ints = []
    for v in vecs:
        den = math.lcm(*[x.denominator for x in v])
        ints.append([int(x * den) for x in v])
    U, D, V, Vinv = integer_diagonalize(ints)
    rank = sum(1 for i in range(min(len(ints), n)) if D[i][i] != 0)
    return [tuple(Vinv[i]) for i in range(rank)]


def integer_kernel(rows, width):
    """Basis rows of {x in Z^width : rows . x = 0}."""
    if not rows:
        return [tuple(r) for r in identity_matrix(width)]
    U, D, V, Vinv = integer_diagonalize(rows, width)
    rank = sum(1 for i in range(min(len(rows), width)) if D[i][i] != 0)
    return [tuple(V[i][j] for i in range(width)) for j in range(rank, width)]


def unimodular_complete(rows):
    """Extend rows spanning a saturated sublattice to a basis of Z^n.

    rows must be independent integer vectors with all elementary divisors 1;
    the first len(rows) returned rows span the same sublattice.
    """
    rows = [lattice_vector(r) for r in rows]
    n = len(rows[0])
    U, D, V, Vinv = integer_diagonalize(rows)
    assert all(D[i][i] == 1 for i in range(len(rows))), \
        "rows do not span a saturated sublattice"
    return [tuple(Vinv[i]) for i in range(n)]


# ------------------------------------------------------------------- hulls

def affine_coordinates(points):
    """(origin, basis, coords) for exact work inside the affine span.

    basis rows span (linear span of differences) ∩ Z^n and
    points[i] = origin + coords[i] . basis. Volumes computed on coords are the
    lattice-normalized ("affine") volumes of the span.
    """
    pts = [rational_point(p) for p in points]
    origin = pts[0]
    diffs = [vsub(p, origin) for p in pts[1:]]
    basis = saturated_basis(diffs)
    coords = []
    for p in pts:
        if not basis:
            coords.append(())
            continue
        x = coords_in_basis(vsub(p, origin), basis)
        assert x is not None
        coords.append(x)
    return origin, basis, coords


def hull_facets(points):
    """Facets of a full-dimensional conv(points).

    Returns a sorted list of (normal, offset, indices): normal a primitive
    integer covector with dot(normal, x) + offset >= 0 on the polytope, and
    indices all input points lying on the facet hyperplane. Exhaustive over
    k-subsets of points; exact, and cheap at desk scale.
    """
    pts = [rational_point(p) for p in points]
    n = len(pts)
    k = len(pts[0])
    assert k >= 1
    assert mat_rank([vsub(p, pts[0]) for p in pts[1:]]) == k, \
        "points are not full-dimensional"
    found = {}
    for sub in combinations(range(n), k):
        rows = [vsub(pts[j], pts[sub[0]]) for j in sub[1:]]
        normal = cross_normal(rows, k)
        if all(x == 0 for x in normal):
            continue
        normal, _ = primitive(normal)
        offset = -dot(normal, pts[sub[0]])
        pos = neg = False
        for p in pts:
            s = dot(normal, p) + offset
            if s > 0:
                pos = True
            elif s < 0:
                neg = True
            if pos and neg:
                break
        if pos and neg:
            continue
        if neg:
            # flip so the polytope sits on the >= 0 side
            normal = vscale(-1, normal)
            offset = -offset
        if (normal, offset) in found:
            continue
        inc = tuple(i for i, p in enumerate(pts) if dot(normal, p) + offset == 0)
        found[(normal, offset)] = inc
    return [(nm, off, inc) for (nm, off), inc in sorted(found.items())]


def hull_vertex_indices(points, facets=None):
    """Indices of the actual vertices among full-dimensional points."""
    pts = [rational_point(p) for p in points]
    k = len(pts[0])
    if facets is None:
        facets = hull_facets(pts)
    out = []
    for i in range(len(pts)):
        active = [nm for nm, off, inc in facets if i in inc]
        if len(active) >= k and mat_rank(active) == k:
            out.append(i)
    return out


def pull_triangulation(points):
    """Triangulation of conv(points) using only its vertices.

    points are distinct rational points of any affine dimension; returns a
    list of index tuples into points, each of length (affine dim + 1). Cones
    the earliest-listed vertex over the facets avoiding it, recursively.
    """
    pts = [rational_point(p) for p in points]
    assert len(set(pts)) == len(pts), "duplicate points"
    if len(pts) == 1:
        return [(0,)]
    origin, basis, coords = affine_coordinates(pts)
    return _pull(coords, list(range(len(pts))))


def _pull(coords, labels):
    k = len(coords[0])
    if k == 0:
        return [(labels[0],)]
    facets = hull_facets(coords)
    verts = hull_vertex_indices(coords, facets)
    apex = min(verts)
    out = []
    for normal, offset, inc in facets:
        if apex in inc:
            continue
        sub = [coords[i] for i in inc]
        o, b, sc = affine_coordinates(sub)
        for simplex in _pull(sc, [labels[i] for i in inc]):
            out.append((labels[apex],) + simplex)
    return out


# ----------------------------------------------------------------- volumes

def normalized_simplex_volume(simplex):
    """|det of edge matrix| / (dim)!, for dim+1 lattice points.

    A simplex is unimodular exactly when this returns 1/(dim)!.
    """
    pts = [lattice_vector(p) for p in simplex]
    k = len(pts[0])
    if len(pts) != k + 1:
        raise DegenerateSimplex("need %d points in dimension %d, got %d"
                                % (k + 1, k, len(pts)))
    det = mat_det([vsub(p, pts[0]) for p in pts[1:]])
    if det == 0:
        raise DegenerateSimplex("affinely dependent points %r" % (pts,))
    return Fraction(abs(det), math.factorial(k))


def _volume_of_coords(coords):
    # coords full-dimensional in their length; distinct points
    k = len(coords[0]) if coords else 0
    if k == 0:
        return Fraction(1)
    total = Fraction(0)
    for simplex in _pull(coords, list(range(len(coords)))):
        base = coords[simplex[0]]
        det = mat_det([vsub(coords[i], base) for i in simplex[1:]])
        total += Fraction(abs(det), math.factorial(k))
    return total


def polytope_volume(p):
    """Exact volume, lattice-normalized in the affine span.

    Full-dimensional polytopes get their ordinary Euclidean volume; lower
    dimensional ones are measured in the induced lattice of their span, so a
    unimodular k-simplex always has volume 1/k!. A point has volume 1.
    """
    pts = _vertices_of(p)
    pts = sorted(set(rational_point(q) for q in pts))
    if len(pts) == 1:
        return Fraction(1)
    origin, basis, coords = affine_coordinates(pts)
    return _volume_of_coords(coords)


def _vertices_of(p):
    if isinstance(p, RationalPolytope):
        return p.vertex_list()
    if isinstance(p, LatticePolytope):
        return p.vertices
    return list(p)


# ---------------------------------------------------------------- polytopes

class LatticePolytope:
    """A lattice polytope stored by its exact vertex set.

    Accepts any generating point list; non-vertices are dropped. dim is the
    affine dimension of the vertex span.
    """

    def __init__(self, points):
        pts = sorted(set(lattice_vector(p) for p in points))
        assert pts, "no points given"
        self.ambient_dim = len(pts[0])
        if len(pts) == 1:
            self.vertices = pts
            self.dim = 0
            return
        origin, basis, coords = affine_coordinates(pts)
        self.dim = len(basis)
        facets = hull_facets(coords)
        keep = hull_vertex_indices(coords, facets)
        self.vertices = [pts[i] for i in keep]

    def scaled(self, factor):
        assert factor >= 1 and int(factor) == factor
        return LatticePolytope([vscale(int(factor), v) for v in self.vertices])

    def __eq__(self, other):
        return (isinstance(other, LatticePolytope)
                and self.vertices == other.vertices)

    def __hash__(self):
        return hash(tuple(self.vertices))

    def __repr__(self):
        return "LatticePolytope(%r)" % (self.vertices,)


def polyhedron_parts(ineqs, with_incidence=False):
    """(vertices, extreme rays) of a pointed {x : dot(n, x) + c >= 0} set.

    Rays come back as primitive integer vectors. A lineality space raises
    UnboundedPolytope (no vertices to report); an empty set raises ValueError.
    With with_incidence=True the vertices are (point, tight inequality
    indices) pairs.
    """
    ineqs = [(rational_point(nm), rational(off)) for nm, off in ineqs]
    assert ineqs
    n = len(ineqs[0][0])
    normals = [nm for nm, off in ineqs]
    if mat_rank(normals) < n:
        raise UnboundedPolytope("polyhedron has a lineality space")
    rays = set()
    if n == 1:
        for u in ((Fraction(1),), (Fraction(-1),)):
            if all(dot(nm, u) >= 0 for nm in normals):
                rays.add(primitive(u)[0])
    else:
        for sub in combinations(range(len(ineqs)), n - 1):
            rows = [normals[i] for i in sub]
            u = cross_normal(rows, n)
            if all(x == 0 for x in u):
                continue
            for s in (u, vscale(-1, u)):
                if all(dot(nm, s) >= 0 for nm in normals):
                    rays.add(primitive(s)[0])
    verts = {}
    for sub in combinations(range(len(ineqs)), n):
        rows = [normals[i] for i in sub]
        rhs = [-ineqs[i][1] for i in sub]
        x = solve_square(rows, rhs)
        if x is None:
            continue
        if x not in verts and all(dot(nm, x) + off >= 0 for nm, off in ineqs):
            verts[x] = tuple(i for i, (nm, off) in enumerate(ineqs)
                             if dot(nm, x) + off == 0)
    if not verts:
        raise ValueError("empty polytope")
    if with_incidence:
        return sorted(verts.items()), sorted(rays)
    return sorted(verts), sorted(rays)


def vertices_from_inequalities(ineqs, with_incidence=False):
    """Vertex set of a bounded {x : dot(n, x) + c >= 0 for (n, c) in ineqs}.

    Raises UnboundedPolytope when the recession cone is nontrivial, and
    ValueError when the polytope is empty. With with_incidence=True each
    vertex comes with the sorted tuple of tight inequality indices.
    """
    verts, rays = polyhedron_parts(ineqs, with_incidence)
    if rays:
        raise UnboundedPolytope("recession ray %r" % (rays[0],))
    return verts


class RationalPolytope:
    """Rational polytope given by vertices, inequalities, or both.

    Inequalities are (normal, offset) pairs meaning dot(normal, x) + offset
    >= 0. When both descriptions are supplied they are cross-checked.
    """

    def __init__(self, vertices=None, inequalities=None):
        assert vertices is not None or inequalities is not None
        self._verts = None
        self._ineqs = None
        if vertices is not None:
            self._verts = sorted(set(rational_point(v) for v in vertices))
            assert self._verts, "no vertices given"
        if inequalities is not None:
            self._ineqs = [(rational_point(nm), rational(off))
                           for nm, off in inequalities]
        if self._verts is not None and self._ineqs is not None:
            computed = vertices_from_inequalities(self._ineqs)
            if computed != self._verts:
                raise ValueError("vertex and inequality descriptions disagree")

    def vertex_list(self):
        if self._verts is None:
            self._verts = vertices_from_inequalities(self._ineqs)
        return list(self._verts)

    def inequality_list(self):
        if self._ineqs is None:
            # only supported for full-dimensional polytopes: lower dimensional
            # sets need equality constraints this representation lacks
            facets = hull_facets(self.vertex_list())
            self._ineqs = [(rational_point(nm), rational(off))
                           for nm, off, inc in facets]
        return list(self._ineqs)

    def dim(self):
        vs = self.vertex_list()
        return mat_rank([vsub(v, vs[0]) for v in vs[1:]])

    def __repr__(self):
        if self._verts is not None:
            return "RationalPolytope(vertices=%r)" % (self._verts,)
        return "RationalPolytope(inequalities=%r)" % (self._ineqs,)


# ------------------------------------------------------------ spec queries

def interior_lattice_points(p, scale=1):
    """Lattice points strictly inside scale * p, in lexicographic order."""
    assert scale >= 1 and int(scale) == scale
    if not isinstance(p, LatticePolytope):
        p = LatticePolytope(p)
    if p.dim < p.ambient_dim:
        return []
    verts = [vscale(int(scale), v) for v in p.vertices]
    facets = hull_facets(verts)
    lo = [min(v[i] for v in verts) for i in range(p.ambient_dim)]
    hi = [max(v[i] for v in verts) for i in range(p.ambient_dim)]
    out = []
    for cand in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if all(dot(nm, cand) + off > 0 for nm, off, inc in facets):
            out.append(cand)
    return out


def lattice_points(p, scale=1):
    """All lattice points of scale * p (boundary included), lex order."""
    assert scale >= 1 and int(scale) == scale
    if not isinstance(p, LatticePolytope):
        p = LatticePolytope(p)
    verts = [vscale(int(scale), v) for v in p.vertices]
    lo = [min(v[i] for v in verts) for i in range(p.ambient_dim)]
    hi = [max(v[i] for v in verts) for i in range(p.ambient_dim)]
    box = product(*(range(a, b + 1) for a, b in zip(lo, hi)))
    if p.dim == p.ambient_dim:
        facets = hull_facets(verts)
        return [c for c in box
                if all(dot(nm, c) + off >= 0 for nm, off, inc in facets)]
    if p.dim == 0:
        return list(verts)
    # lower dimensional: test span membership exactly, then the facet
    # inequalities of the hull inside span coordinates
    origin, basis, coords = affine_coordinates(verts)
    facets = hull_facets(coords)
    out = []
    for cand in box:
        y = coords_in_basis(vsub(cand, origin), basis)
        if y is None:
            continue
        if all(dot(nm, y) + off >= 0 for nm, off, inc in facets):
            out.append(cand)
    return out


def primitive_lattice_length(a, b):
    """The r > 0 with b - a = r * (primitive lattice direction)."""
    try:
        a = rational_point(a)
        b = rational_point(b)
    except TypeError as exc:
        raise IrrationalDirection(str(exc)) from exc
    diff = vsub(b, a)
    if all(x == 0 for x in diff):
        raise ValueError("points coincide")
    prim, r = primitive(diff)
    return r
