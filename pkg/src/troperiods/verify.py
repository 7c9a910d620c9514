"""Quadrature checks of period asymptotics on positive real families.

When the coefficient at one interior point w is a negative real and every
other coefficient is a positive real, the hypersurface f_t = 0 meets the
positive real points z = t^n in a convex d-sphere wrapping the dual cell
of w, and the angle tori over interior points of the dual edge cells stay
honest cycles.  This module integrates the residue form over those cycles
with deterministic quadrature so the symbolic expansions can be compared
against straight numbers.

The sphere is split into charts indexed by the second smallest exponent
q and the set K of exponents within chart_margin of it.  Inside a chart
the coordinates are alpha = mu_q - mu_w, beta_k = mu_k - mu_q and a
unimodular completion gamma; alpha is solved from the defining equation
at every node and the remaining walls mu_m - mu_q = chart_margin are
located on the true surface, so the charts partition the cycle exactly
for any margin and the only error is quadrature error plus the tail the
expansion itself drops.
"""

import math
from fractions import Fraction

import numpy as np

from . import lattice as lat
from . import tropical
from .gamma import (choose_arg_branches, sphere_period_asymptotics,
                    torus_period_asymptotics)


class NewtonDivergence(RuntimeError):
    """A root solve failed to bracket or converge."""


class ChartGap(RuntimeError):
    """The chart decomposition fails to cover the cycle at this t."""


# ------------------------------------------------------------ configuration


class QuadratureConfig:
    """Knobs for the quadrature routines."""

    def __init__(self, nodes=16, angle_nodes=32, chart_margin=Fraction(1, 4),
                 newton_tol=1e-12, max_depth=64, coverage_samples=128,
                 coverage_tol=0.0, orientation=1):
        self.nodes = int(nodes)
        self.angle_nodes = int(angle_nodes)
        self.chart_margin = lat.rational(chart_margin)
        self.newton_tol = float(newton_tol)
        self.max_depth = int(max_depth)
        self.coverage_samples = int(coverage_samples)
        self.coverage_tol = float(coverage_tol)
        self.orientation = int(orientation)
        assert self.nodes >= 2, "need at least two nodes per axis"
        assert self.angle_nodes >= 4
        assert self.chart_margin > 0, "chart margin must be positive"
        assert self.newton_tol > 0
        assert self.max_depth >= 8
        assert self.coverage_samples >= 0
        assert self.coverage_tol >= 0
        assert self.orientation in (1, -1)

    def _copy(self, **changes):
        fields = dict(nodes=self.nodes, angle_nodes=self.angle_nodes,
                      chart_margin=self.chart_margin,
                      newton_tol=self.newton_tol, max_depth=self.max_depth,
                      coverage_samples=self.coverage_samples,
                      coverage_tol=self.coverage_tol,
                      orientation=self.orientation)
        fields.update(changes)
        return QuadratureConfig(**fields)

    def doubled(self):
        return self._copy(nodes=2 * self.nodes,
                          angle_nodes=2 * self.angle_nodes)

    def with_margin(self, margin):
        return self._copy(chart_margin=margin)

    def flipped(self):
        return self._copy(orientation=-self.orientation)


class PositiveRealFamily:
    """Coefficient data with c_w real negative and all other c_m real positive.

    Every ratio -c_m / c_w is then positive, so all argument branches are
    zero and the cycle around w lives on the positive real points.
    """

    def __init__(self, inst, w):
        self.instance = inst
        self.w = lat.lattice_vector(w)
        if self.w not in inst.W:
            raise tropical.NotInteriorPoint(
                "%r is not an interior lattice point" % (w,))
        c_w = complex(inst.coeff(self.w))
        if c_w.imag != 0 or c_w.real >= 0:
            raise ValueError("coefficient at w must be a negative real, "
                             "got %r" % (c_w,))
        self.ratios = {}
        for m in inst.exponents:
            if m == self.w:
                continue
            c = complex(inst.coeff(m))
            if c.imag != 0 or c.real <= 0:
                raise ValueError("coefficient at %r must be a positive "
                                 "real, got %r" % (m, c))
            self.ratios[m] = c.real / (-c_w.real)
        self.tri = tropical.validate_and_triangulate(inst)
        self._tc = None

    def ratio(self, m):
        # c_m / (-c_w); equals -1 at w itself
        m = lat.lattice_vector(m)
        if m == self.w:
            return -1.0
        return self.ratios[m]

    def complex_ratio(self, m):
        # c_m / c_w without the sign flip, for the torus solves
        return complex(self.instance.coeff(m)) / complex(
            self.instance.coeff(self.w))

    def dual_complex(self):
        if self._tc is None:
            self._tc = tropical.dual_complex(self.tri)
        return self._tc


# ------------------------------------------------------- chart coordinates


class _Chart:
    """Affine coordinates (alpha; beta_k; gamma_j) for one chart (q, K).

    alpha = mu_q - mu_w and beta_k = mu_k - mu_q exactly; the gamma rows
    complete them to a unimodular system, which exists because the cell
    conv({w, q} + K) is unimodular.
    """

    def __init__(self, fam, q, K):
        inst = fam.instance
        w = fam.w
        self.q = q
        self.K = tuple(sorted(K))
        d = inst.d
        rows = [lat.vsub(q, w)] + [lat.vsub(k, q) for k in self.K]
        full = lat.unimodular_complete(rows)
        rows = rows + [tuple(r) for r in full[len(rows):]]
        assert abs(lat.mat_det(rows)) == 1
        consts = [inst.lam(q) - inst.lam(w)] \
            + [inst.lam(k) - inst.lam(q) for k in self.K] \
            + [Fraction(0)] * (d - len(self.K))
        tinv = lat.mat_inv(rows)
        # mu_m - mu_w = a_m * alpha + bg_m . (beta, gamma) + const_m
        self.affine = {}
        for m in inst.exponents:
            diff = lat.vsub(m, w)
            coeffs = tuple(sum(Fraction(tinv[i][j]) * diff[i]
                               for i in range(d + 1)) for j in range(d + 1))
            const = inst.lam(m) - inst.lam(w) \
                - sum(coeffs[j] * consts[j] for j in range(d + 1))
            self.affine[m] = (coeffs[0], coeffs[1:], const)
        a_q, bg_q, c_q = self.affine[q]
        assert a_q == 1 and all(x == 0 for x in bg_q) and c_q == 0
        for i, k in enumerate(self.K):
            a_k, bg_k, c_k = self.affine[k]
            assert a_k == 1 and c_k == 0
            assert all(bg_k[j] == (1 if j == i else 0) for j in range(d))
        self.others = tuple(m for m in inst.exponents
                            if m != w and m != q and m not in self.K)
        # float arrays over the defining monomials A minus w, fixed order
        mons = tuple(m for m in inst.exponents if m != w)
        self.mons = mons
        self.r = np.array([fam.ratio(m) for m in mons])
        self.a = np.array([float(self.affine[m][0]) for m in mons])
        self.bg = np.array([[float(x) for x in self.affine[m][1]]
                            for m in mons])
        self.c = np.array([float(self.affine[m][2]) for m in mons])
        oidx = [mons.index(m) for m in self.others]
        self.oth_idx = np.array(oidx, dtype=int)

    def wall_inequalities(self, eps):
        # tropical walls mu_m - mu_q >= eps at alpha = 0, exact, over
        # (beta, gamma); the box walls for beta come separately
        out = []
        for m in self.others:
            a_m, bg_m, c_m = self.affine[m]
            out.append((bg_m, c_m - eps))
        return out

    def box_inequalities(self, eps, dim):
        out = []
        for i in range(len(self.K)):
            unit = tuple(Fraction(1 if j == i else 0) for j in range(dim))
            nunit = tuple(-x for x in unit)
            out.append((unit, Fraction(0)))
            out.append((nunit, eps))
        return out


def _chart_list(tri, w):
    charts = []
    for size, cells in sorted(tri.cells_by_dim.items()):
        if size < 1:
            continue
        for tau in cells:
            if w not in tau or len(tau) < 2:
                continue
            for q in tau:
                if q == w:
                    continue
                K = tuple(m for m in tau if m != w and m != q)
                charts.append((q, K))
    charts.sort()
    return charts


# ------------------------------------------------------------ alpha solving


def _alpha_roots(chart, pts, lt, cfg, allow_missing=False):
    """Solve sum_m r_m t^{a_m alpha + bg_m.x + c_m} = 1 per point.

    pts has shape (N, d).  The wanted root is the one on the decreasing
    branch of the convex exponential sum, found by a derivative-aware
    bisection and polished with Newton.  Points whose fiber misses the
    surface have no root; with allow_missing they are flagged instead of
    raising, which lets the wall bisections probe past the fold.
    """
    rest = pts @ chart.bg.T + chart.c
    r = chart.r
    a = chart.a

    def g_and_slope(alpha):
        # clip keeps the bracket search finite; clipped points are far from
        # the root so the distortion never reaches the answer
        e = np.exp(np.clip(lt * (np.outer(alpha, a) + rest), -700.0,
                           700.0)) * r
        return e.sum(axis=1), lt * (e * a).sum(axis=1)

    n = pts.shape[0]
    span = 8.0 + 2.0 * abs(float(cfg.chart_margin))
    lo = np.full(n, -span)
    hi = np.full(n, span)
    g_lo, s_lo = g_and_slope(lo)
    for _ in range(cfg.max_depth):
        bad = (g_lo <= 1.0) | (s_lo >= 0.0)
        if not bad.any():
            break
        lo = np.where(bad, 2.0 * lo, lo)
        g_lo, s_lo = g_and_slope(lo)
    if ((g_lo <= 1.0) | (s_lo >= 0.0)).any():
        raise NewtonDivergence("no left bracket for the surface equation")
    # a short bisection localizes the decreasing branch; Newton is then
    # monotone by convexity and finishes the digits
    for _ in range(18):
        mid = 0.5 * (lo + hi)
        g_mid, s_mid = g_and_slope(mid)
        move_lo = (g_mid > 1.0) & (s_mid < 0.0)
        lo = np.where(move_lo, mid, lo)
        hi = np.where(move_lo, hi, mid)
    alpha = 0.5 * (lo + hi)
    for _ in range(6):
        g_val, s_val = g_and_slope(alpha)
        step = np.where(s_val != 0.0, (g_val - 1.0) / s_val, 0.0)
        alpha = alpha - np.where(np.abs(step) < 1.0, step, 0.0)
        if np.max(np.abs(g_val - 1.0)) < cfg.newton_tol:
            break
    g_val, _ = g_and_slope(alpha)
    ok = np.abs(g_val - 1.0) <= 1e3 * cfg.newton_tol
    if allow_missing:
        return alpha, rest, ok
    if not ok.all():
        raise NewtonDivergence("surface equation residual %.3e"
                               % np.max(np.abs(g_val - 1.0)))
    return alpha, rest


def _chart_values(fam, chart, v, pts, lt, cfg):
    """Integrand t^{mu_v - mu_w} / |F_alpha| at solved surface points."""
    alpha, rest = _alpha_roots(chart, pts, lt, cfg)
    e = np.exp(lt * (np.outer(alpha, chart.a) + rest)) * chart.r
    f_alpha = (e * chart.a).sum(axis=1)
    a_v, bg_v, c_v = chart.affine[v]
    ev = float(a_v) * alpha + pts @ np.array([float(x) for x in bg_v]) \
        + float(c_v)
    return np.exp(lt * ev) / np.abs(f_alpha)


def _phi_walls(chart, pts, lt, cfg, eps):
    """min over non-chart monomials of mu_m - mu_q - eps on the surface.

    Off-surface points get a negative sentinel so bisections treat the
    fold of the projection like the outside of the chart.
    """
    alpha, rest, ok = _alpha_roots(chart, pts, lt, cfg, allow_missing=True)
    phi = np.outer(alpha, chart.a - 1.0) + rest
    phi_min = (phi[:, chart.oth_idx] - eps).min(axis=1)
    return np.where(ok, phi_min, -1.0), alpha


def _phi_binders(chart, pts, lt, cfg, eps):
    """Index (into chart.others) of the smallest wall value per point."""
    alpha, rest, ok = _alpha_roots(chart, pts, lt, cfg, allow_missing=True)
    phi = np.outer(alpha, chart.a - 1.0) + rest
    return np.argmin(phi[:, chart.oth_idx] - eps, axis=1)


# ------------------------------------------------------------ wall locating


def _bisect_walls(func, inside, outside, depth=45):
    lo = np.asarray(inside, dtype=float).copy()
    hi = np.asarray(outside, dtype=float).copy()
    f_lo = func(lo)
    f_hi = func(hi)
    if (f_lo < 0.0).any() or (f_hi > 0.0).any():
        raise NewtonDivergence("wall bracket lost its signs")
    for _ in range(depth):
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        pos = f_mid >= 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return 0.5 * (lo + hi)


def _expand_outside(func, start, step, depth):
    out = np.asarray(start, dtype=float).copy()
    f = func(out)
    width = np.full_like(out, step)
    for _ in range(depth):
        bad = f >= 0.0
        if not bad.any():
            return out
        out = np.where(bad, out + width, out)
        width = np.where(bad, 2.0 * width, width)
        f = func(out)
    raise NewtonDivergence("could not step outside a chart wall")


# ------------------------------------------------------- chart integration


def _gauss_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _beta_grid(eps, k_axes, n):
    x01, w01 = _gauss_nodes(n)
    pts = np.zeros((1, 0))
    wts = np.ones(1)
    for _ in range(k_axes):
        new_pts = []
        new_wts = []
        for row, wt in zip(pts, wts):
            for xx, ww in zip(x01 * eps, w01 * eps):
                new_pts.append(list(row) + [xx])
                new_wts.append(wt * ww)
        pts = np.array(new_pts)
        wts = np.array(new_wts)
    return pts, wts


def _integral_box(fam, chart, v, lt, cfg, eps):
    pts, wts = _beta_grid(float(eps), len(chart.K), cfg.nodes)
    if chart.others:
        phi, _ = _phi_walls(chart, pts, lt, cfg, float(eps))
        if (phi <= 0.0).any():
            raise ChartGap("a corner chart node is claimed by another "
                           "monomial; t is too large for this margin")
    vals = _chart_values(fam, chart, v, pts, lt, cfg)
    return float(wts @ vals)


def _slice_bounds(ineqs, beta, dim):
    # tropical gamma-interval of {normal.(beta, gamma) + off >= 0} at fixed
    # beta; the gamma coordinate is the last axis
    lo, hi = -math.inf, math.inf
    for normal, off in ineqs:
        head = sum(float(normal[j]) * beta[j] for j in range(dim - 1))
        gcoef = float(normal[dim - 1])
        bound = -(head + float(off))
        if gcoef > 0:
            lo = max(lo, bound / gcoef)
        elif gcoef < 0:
            hi = min(hi, bound / gcoef)
        else:
            assert head + float(off) >= -1e-9, "slice violates a flat wall"
    assert lo > -math.inf and hi < math.inf, "unbounded chart slice"
    return lo, hi


def _integral_fiber(fam, chart, v, lt, cfg, eps):
    """Charts whose gamma part is one dimensional.

    Runs Gauss nodes over the beta box (split at the beta-coordinates of
    the tropical polytope vertices) and, per beta node, over the true
    gamma interval whose endpoints are solved on the surface.
    """
    d = fam.instance.d
    k_axes = len(chart.K)
    walls = chart.wall_inequalities(eps)
    ineqs = walls + chart.box_inequalities(eps, d)
    try:
        verts = lat.vertices_from_inequalities(ineqs)
    except ValueError:
        return 0.0
    x01, w01 = _gauss_nodes(cfg.nodes)
    if k_axes == 0:
        beta_pts = np.zeros((1, 0))
        beta_wts = np.ones(1)
    else:
        # beta axis is one dimensional here (k_axes = d - 1 and d <= 2)
        assert k_axes == 1
        breaks = sorted(set([Fraction(0), eps]
                            + [val for vert in verts for val in vert[:1]]))
        breaks = [b for b in breaks if 0 <= b <= eps]
        beta_pts = []
        beta_wts = []
        for b0, b1 in zip(breaks[:-1], breaks[1:]):
            width = float(b1 - b0)
            if width <= 0:
                continue
            for xx, ww in zip(x01, w01):
                beta_pts.append([float(b0) + width * xx])
                beta_wts.append(width * ww)
        beta_pts = np.array(beta_pts)
        beta_wts = np.array(beta_wts)

    def phi_at(gam, beta):
        pts = np.concatenate([beta, gam[:, None]], axis=1)
        return _phi_walls(chart, pts, lt, cfg, float(eps))[0]

    n_beta = beta_pts.shape[0]
    lo0 = np.empty(n_beta)
    hi0 = np.empty(n_beta)
    for i in range(n_beta):
        lo0[i], hi0[i] = _slice_bounds(ineqs, beta_pts[i], d)
    # probe each fiber for a point inside the true region; the tropical
    # interval midpoint can fall past the fold once t is not tiny
    probes = lo0[:, None] + (hi0 - lo0)[:, None] * x01[None, :]
    pp = np.concatenate([np.repeat(beta_pts[:, None, :], cfg.nodes, axis=1),
                         probes[..., None]], axis=2)
    phi_probe = _phi_walls(chart, pp.reshape(-1, d), lt, cfg,
                           float(eps))[0].reshape(n_beta, cfg.nodes)
    best = np.argmax(phi_probe, axis=1)
    seed = probes[np.arange(n_beta), best]
    alive = phi_probe[np.arange(n_beta), best] > 0.0
    if not alive.any():
        return 0.0
    seed = seed[alive]
    beta_live = beta_pts[alive]
    wts_live = beta_wts[alive]
    step = 0.05 + 2.0 / abs(lt)
    lo_out = _expand_outside(lambda g: phi_at(g, beta_live), seed - step,
                             -step, cfg.max_depth)
    hi_out = _expand_outside(lambda g: phi_at(g, beta_live), seed + step,
                             step, cfg.max_depth)
    lo = _bisect_walls(lambda g: phi_at(g, beta_live), seed, lo_out)
    hi = _bisect_walls(lambda g: phi_at(g, beta_live), seed, hi_out)
    widths = np.maximum(hi - lo, 0.0)
    gam = lo[:, None] + widths[:, None] * x01[None, :]
    pts = np.concatenate([np.repeat(beta_live[:, None, :], cfg.nodes,
                                    axis=1), gam[..., None]], axis=2)
    vals = _chart_values(fam, chart, v, pts.reshape(-1, d), lt,
                         cfg).reshape(len(seed), cfg.nodes)
    return float((wts_live * widths) @ (vals @ w01))


def _radial_center(chart, verts, lt, cfg, eps):
    # a point strictly inside the true chart region; the tropical centroid
    # works for small t, otherwise pull toward each corner and retry
    centroid = np.array([float(sum(v_[j] for v_ in verts)) / len(verts)
                         for j in (0, 1)])
    candidates = [centroid]
    for s in (0.5, 0.25, 0.75):
        for v_ in verts:
            pt = np.array([float(x) for x in v_])
            candidates.append(centroid + s * (pt - centroid))
    for cand in candidates:
        phi, _ = _phi_walls(chart, cand[None, :], lt, cfg, float(eps))
        if phi[0] > 1e-9:
            return cand
    raise NewtonDivergence("no interior point found for a facet chart")


def _integral_radial(fam, chart, v, lt, cfg, eps):
    """Facet charts of a d = 2 cycle: K empty, two gamma axes.

    The true chart region is star shaped about an interior center, so it
    is integrated in polar coordinates; the boundary radius is bisected
    on the surface per direction and the angular axis is split where the
    binding wall changes, which keeps every panel smooth.
    """
    walls = chart.wall_inequalities(eps)
    try:
        verts = lat.vertices_from_inequalities(walls)
    except ValueError:
        return 0.0
    if len(verts) < 3:
        return 0.0
    center = _radial_center(chart, verts, lt, cfg, eps)
    scale = max(math.hypot(float(v_[0]) - center[0],
                           float(v_[1]) - center[1]) for v_ in verts)

    def phi_at(rho, ang):
        pts = center[None, :] + rho[:, None] * np.stack(
            [np.cos(ang), np.sin(ang)], axis=1)
        return _phi_walls(chart, pts, lt, cfg, float(eps))[0]

    def rho_of(ang):
        inner = np.zeros(len(ang))
        outer = _expand_outside(lambda r: phi_at(r, ang),
                                np.full(len(ang), 0.2 * scale + 0.05),
                                0.4 * scale + 0.1, cfg.max_depth)
        return _bisect_walls(lambda r: phi_at(r, ang), inner, outer)

    def binder_of(ang):
        rho = rho_of(ang)
        pts = center[None, :] + (rho * 1.0)[:, None] * np.stack(
            [np.cos(ang), np.sin(ang)], axis=1)
        return _phi_binders(chart, pts, lt, cfg, float(eps))

    n_scan = 8 * cfg.nodes
    scan = 2.0 * np.pi * np.arange(n_scan) / n_scan
    labels = binder_of(scan)
    idx = [i for i in range(n_scan) if labels[i] != labels[(i + 1) % n_scan]]
    # the angular error of a kink feeds the area quadratically, so a short
    # bisection after the scan is plenty
    if idx:
        a = scan[np.array(idx)]
        b = a + 2.0 * np.pi / n_scan
        la = labels[np.array(idx)]
        for _ in range(12):
            mid = 0.5 * (a + b)
            same = binder_of(mid) == la
            a = np.where(same, mid, a)
            b = np.where(same, b, mid)
        kinks = sorted((0.5 * (a + b)).tolist())
    else:
        kinks = [0.0]
    panels = [(kinks[i], kinks[i + 1]) for i in range(len(kinks) - 1)]
    panels.append((kinks[-1], kinks[0] + 2.0 * np.pi))
    x01, w01 = _gauss_nodes(cfg.nodes)
    total = 0.0
    for a, b in panels:
        if b - a <= 1e-12:
            continue
        ang = a + (b - a) * x01
        rho = rho_of(ang)
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        rr = np.outer(x01, rho)
        pts = center[None, None, :] + rr[..., None] * dirs[None, :, :]
        vals = _chart_values(fam, chart, v, pts.reshape(-1, 2), lt, cfg)
        vals = vals.reshape(cfg.nodes, cfg.nodes)
        wmat = np.outer(w01 * x01, w01 * rho * rho)
        total += (b - a) * float((wmat * vals).sum())
    return total


# ----------------------------------------------------------- coverage check


def _sample_directions(d, count):
    if d == 1:
        ang = 2.0 * math.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    assert d == 2
    golden = math.pi * (3.0 - math.sqrt(5.0))
    z = 1.0 - 2.0 * (np.arange(count) + 0.5) / count
    rad = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    ang = golden * np.arange(count)
    return np.stack([rad * np.cos(ang), rad * np.sin(ang), z], axis=1)


def _coverage_check(fam, t, cfg):
    """Shoot rays from inside the dual cell and classify the hit points.

    Every surface point determines (q, K) by sorting its exponents; the
    decomposition covers the cycle iff each such pair spans a cell of the
    triangulation together with w.
    """
    if cfg.coverage_samples == 0:
        return
    inst = fam.instance
    d = inst.d
    tc = fam.dual_complex()
    center = np.array([float(x)
                       for x in tc.cell((fam.w,)).interior_point()])
    lt = math.log(t)
    mons = [m for m in inst.exponents if m != fam.w]
    r = np.array([fam.ratio(m) for m in mons])
    diff = np.array([[float(x) for x in lat.vsub(m, fam.w)] for m in mons])
    const = np.array([float(inst.lam(m) - inst.lam(fam.w)) for m in mons])

    def g_at(pts):
        return (np.exp(lt * (pts @ diff.T + const)) * r).sum(axis=1)

    g_center = float(g_at(center[None, :])[0])
    if g_center >= 1.0:
        raise ChartGap("the cycle is empty at t = %g: the defining sum is "
                       "%.3f >= 1 at the center of the dual cell"
                       % (t, g_center))
    dirs = _sample_directions(d, cfg.coverage_samples)
    lo = np.zeros(len(dirs))
    hi = np.full(len(dirs), 1.0)
    for _ in range(cfg.max_depth):
        g_hi = g_at(center[None, :] + hi[:, None] * dirs)
        bad = g_hi <= 1.0
        if not bad.any():
            break
        hi = np.where(bad, 2.0 * hi, hi)
    if (g_at(center[None, :] + hi[:, None] * dirs) <= 1.0).any():
        raise NewtonDivergence("coverage rays never left the cycle")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        g_mid = g_at(center[None, :] + mid[:, None] * dirs)
        inside = g_mid < 1.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    pts = center[None, :] + (0.5 * (lo + hi))[:, None] * dirs
    mu = pts @ diff.T + const
    eps_f = float(cfg.chart_margin)
    misses = 0
    for row in mu:
        iq = int(np.argmin(row))
        band = row - row[iq] <= eps_f
        members = tuple(mons[j] for j in range(len(mons)) if band[j])
        tau = tuple(sorted((fam.w,) + members))
        if not fam.tri.has_cell(tau):
            misses += 1
    residual = misses / len(dirs)
    if residual > cfg.coverage_tol:
        raise ChartGap("%d of %d sample points fall outside every chart "
                       "(residual %.3f); t is too large for this margin"
                       % (misses, len(dirs), residual))


# ------------------------------------------------------------ sphere cycle


def real_cycle_quadrature(fam, l, v, w, t, cfg=None):
    """Integrate the residue d-form over the positive real cycle around w.

    Only l = 1 is integrable here: higher powers live on deformed tube
    cycles this module does not construct.  Returns the oriented total
    (-1)^d L^d sum over charts of r_v t^{mu_v - mu_w} / |F_alpha|.
    """
    if cfg is None:
        cfg = QuadratureConfig()
    inst = fam.instance
    assert int(l) == l and l >= 1
    if l != 1:
        raise ValueError("only l = 1 cycles are integrable numerically; "
                         "higher powers need tube cycles that are not "
                         "constructed")
    w = lat.lattice_vector(w)
    assert w == fam.w, "family is signed for %r, not %r" % (fam.w, w)
    v = lat.lattice_vector(v)
    if v not in inst.W:
        raise tropical.NotInteriorPoint("%r is not interior" % (v,))
    d = inst.d
    if d > 2:
        raise ValueError("real cycle quadrature is implemented for d <= 2")
    t = float(t)
    assert 0.0 < t < 1.0
    _coverage_check(fam, t, cfg)
    lt = math.log(t)
    eps = cfg.chart_margin
    total = 0.0
    for q, K in _chart_list(fam.tri, fam.w):
        chart = _Chart(fam, q, K)
        g_dim = d - len(K)
        if g_dim == 0:
            total += _integral_box(fam, chart, v, lt, cfg, eps)
        elif g_dim == 1:
            total += _integral_fiber(fam, chart, v, lt, cfg, eps)
        else:
            total += _integral_radial(fam, chart, v, lt, cfg, eps)
    big_l = -lt
    value = cfg.orientation * (-1) ** d * big_l ** d * fam.ratio(v) * total
    return complex(value)


# ------------------------------------------------------------- torus cycle


def _torus_frame(fam, edge):
    w = fam.w
    edge = tuple(sorted(lat.lattice_vector(p) for p in edge))
    assert len(edge) == 2 and edge[0] != edge[1], "need a two point edge"
    assert w in edge, "edge %r does not touch w = %r" % (edge, w)
    if not fam.tri.has_cell(edge):
        raise tropical.NotATriangulation(
            "%r is not an edge of the subdivision" % (edge,))
    m0 = edge[0] if edge[1] == w else edge[1]
    # the completion may flip the spanning row, so keep the edge vector
    # itself and only take the tail rows from it
    row0 = lat.vsub(m0, w)
    full = lat.unimodular_complete([row0])
    basis = [tuple(row0)] + [tuple(r) for r in full[1:]]
    if lat.mat_det(basis) != 1:
        basis[-1] = tuple(-x for x in basis[-1])
    assert lat.mat_det(basis) == 1
    tc = fam.dual_complex()
    n0 = tc.cell(edge).interior_point()
    return m0, basis, n0


def _torus_monomials(fam, m0, basis, n0):
    # per monomial m != w: complex ratio c_m / c_w, the power of y and the
    # integer angles, plus the fixed magnitude exponent
    inst = fam.instance
    w = fam.w
    gammas = basis[1:]
    out = []
    for m in inst.exponents:
        if m == w:
            continue
        coords = lat.coords_in_basis(lat.vsub(m, w), basis)
        assert coords is not None
        s = int(coords[0])
        angles = [int(x) for x in coords[1:]]
        mag = float(inst.lam(m) - inst.lam(w)) \
            + float(inst.lam(w) - inst.lam(m0)) * s \
            + sum(float(lat.dot(g, n0)) * angles[j]
                  for j, g in enumerate(gammas))
        out.append((fam.complex_ratio(m), s, angles, mag))
    return out


def _power_phase(phases, angles):
    out = np.ones_like(phases[0])
    for j, a in enumerate(angles):
        if a:
            out = out * phases[j] ** a
    return out


def _torus_h(mono, y, phases, t):
    h = np.ones_like(y)
    hp = np.zeros_like(y)
    for cm, s, angles, mag in mono:
        term = cm * (t ** mag) * _power_phase(phases, angles) * y ** s
        h = h + term
        hp = hp + term * s / y
    return h, hp


def _solve_torus_y(mono, seed, phases, t, target, cfg):
    y = np.full(phases[0].shape, seed, dtype=complex) if not isinstance(
        seed, np.ndarray) else seed.copy()
    for _ in range(cfg.max_depth):
        h, hp = _torus_h(mono, y, phases, t)
        step = (h - target) / hp
        y = y - step
        if np.max(np.abs(step)) < cfg.newton_tol:
            return y
    raise NewtonDivergence("transverse coordinate solve stalled")


def torus_cycle_quadrature(fam, l, v, sigma, t, cfg=None):
    """Integrate over the angle torus above an interior point of sigma.

    sigma is given by its dual edge (a pair of exponents containing w).
    The moduli |z^{gamma_j}| are pinned at an interior point n_0 of the
    dual cell, the transverse coordinate is solved by complex Newton and
    the angles are integrated by the trapezoid rule; for l >= 2 an extra
    circle in the tube variable extracts the order-l coefficient.
    """
    if cfg is None:
        cfg = QuadratureConfig()
    inst = fam.instance
    assert int(l) == l and l >= 1
    d = inst.d
    t = float(t)
    assert 0.0 < t < 1.0
    v = lat.lattice_vector(v)
    m0, basis, n0 = _torus_frame(fam, sigma)
    mono = _torus_monomials(fam, m0, basis, n0)
    gammas = basis[1:]
    n_ang = cfg.angle_nodes
    theta = 2.0 * np.pi * np.arange(n_ang) / n_ang
    seed = complex(-1.0 / fam.complex_ratio(m0))

    tau_v, weights = fam.tri.minimal_cell_with_scaled_point(v, l)
    coeff = 1.0 + 0.0j
    lam_sum = Fraction(0)
    for m, p in weights.items():
        coeff *= complex(inst.coeff(m)) ** p
        lam_sum += p * inst.lam(m)
    shift = lat.vsub(v, lat.vscale(l, fam.w))
    coords = lat.coords_in_basis(shift, basis)
    assert coords is not None
    s_v = int(coords[0])
    ang_v = [int(x) for x in coords[1:]]
    mag_v = float(lam_sum - l * inst.lam(fam.w)) \
        + float(inst.lam(fam.w) - inst.lam(m0)) * s_v \
        + sum(float(lat.dot(g, n0)) * ang_v[j] for j, g in enumerate(gammas))
    c_w = complex(inst.coeff(fam.w))

    if l == 1:
        grids = np.meshgrid(*([theta] * d), indexing="ij")
        phases = [np.exp(1j * g) for g in grids]
        y = _solve_torus_y(mono, seed, phases, t, 0.0, cfg)
        _, hp = _torus_h(mono, y, phases, t)
        zv = (t ** mag_v) * _power_phase(phases, ang_v) * y ** s_v
        integrand = (coeff / c_w) * zv * (1j ** d) / (y * hp)
        value = (2.0 * np.pi / n_ang) ** d * integrand.sum()
        return complex(value)

    # tube circle in x for higher order poles; f = -c_w t^{lam_w} z^w x on
    # the tube, so 1/f^l carries x^{-l} and the circle extracts its residue
    radius = 0.5
    grids = np.meshgrid(*([theta] * (d + 1)), indexing="ij")
    phases = [np.exp(1j * g) for g in grids[:d]]
    x = radius * np.exp(1j * grids[d])
    y = _solve_torus_y(mono, seed, phases, t, -x, cfg)
    _, hp = _torus_h(mono, y, phases, t)
    w_coords = lat.coords_in_basis(fam.w, basis)
    if w_coords is None:
        raise NewtonDivergence("w is outside the monomial lattice frame")
    s_w = int(w_coords[0])
    ang_w = [int(x_) for x_ in w_coords[1:]]
    mag_w = float(inst.lam(fam.w)) + float(inst.lam(fam.w)
                                           - inst.lam(m0)) * s_w \
        + sum(float(lat.dot(g, n0)) * ang_w[j] for j, g in enumerate(gammas))
    z_w = (t ** mag_w) * _power_phase(phases, ang_w) * y ** s_w
    z_shift = (t ** mag_v) * _power_phase(phases, ang_v) * y ** s_v
    numer = coeff * z_shift
    denom = (-c_w * z_w) ** l * x ** l
    integrand = numer / denom * (-1.0 / hp) / y * (1j * x) * (1j ** d)
    value = (2.0 * np.pi / n_ang) ** (d + 1) * integrand.sum() \
        / (2j * np.pi)
    return complex(value)


# ------------------------------------------------------------------ sweeps


def quadrature_with_estimate(fam, l, v, cycle, t, cfg=None):
    """(value, error estimate) by doubling every node count once."""
    if cfg is None:
        cfg = QuadratureConfig()
    coarse = _dispatch_cycle(fam, l, v, cycle, t, cfg)
    fine = _dispatch_cycle(fam, l, v, cycle, t, cfg.doubled())
    return fine, 2.0 * abs(fine - coarse)


def _dispatch_cycle(fam, l, v, cycle, t, cfg):
    kind, data = cycle
    if kind == "sphere":
        return real_cycle_quadrature(fam, l, v, data, t, cfg)
    if kind == "torus":
        return torus_cycle_quadrature(fam, l, v, data, t, cfg)
    raise ValueError("unknown cycle kind %r" % (kind,))


def _symbolic_expansion(fam, l, v, cycle):
    kind, data = cycle
    if kind == "sphere":
        branches = choose_arg_branches(fam.instance, mode="principal",
                                       tri=fam.tri)
        return sphere_period_asymptotics(fam.instance, fam.tri, l, v,
                                         lat.lattice_vector(data), branches)
    if kind == "torus":
        return torus_period_asymptotics(fam.instance, fam.tri, l, v, data,
                                        fam.w)
    raise ValueError("unknown cycle kind %r" % (kind,))


def convergence_sweep(fam, l, v, cycle, ts, cfg=None):
    """Rows (t, numeric, symbolic, errors) over a decreasing t list.

    Asserts the absolute error against the symbolic expansion decreases
    along the sweep and fits the slope of log error against log t once
    at least three points are available.
    """
    if cfg is None:
        cfg = QuadratureConfig()
    ts = [float(t) for t in ts]
    assert ts and all(0.0 < t < 1.0 for t in ts)
    assert all(a > b for a, b in zip(ts, ts[1:])), \
        "sweep wants strictly decreasing t"
    expansion = _symbolic_expansion(fam, l, v, cycle)
    rows = []
    for t in ts:
        numeric, est = quadrature_with_estimate(fam, l, v, cycle, t, cfg)
        symbolic = expansion.evaluate(t)
        err = abs(numeric - symbolic)
        rows.append({"t": t, "numeric": numeric, "symbolic": symbolic,
                     "abs_err": err, "est_quad_err": est})
    errs = [row["abs_err"] for row in rows]
    assert all(a > b for a, b in zip(errs, errs[1:])), \
        "quadrature error failed to decrease along the sweep: %r" % (errs,)
    slope = None
    if len(rows) >= 3 and all(e > 0 for e in errs):
        xs = np.log(np.array(ts))
        ys = np.log(np.array(errs))
        slope = float(np.polyfit(xs, ys, 1)[0])
    for row in rows:
        row["slope"] = slope
    return rows
