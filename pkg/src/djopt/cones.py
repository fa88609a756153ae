"""Tangent and normal cone calculus for polyhedral sets.

Every routine works from the local structure of the set: near z a
polyhedral set coincides with z + T_S(z), so directional objects at (z, w)
reduce to ordinary objects of the tangent cone at w.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numeric_core import (
    DEFAULT_TOL,
    GeneratorRep,
    LpProblem,
    Optimal,
    Tolerance,
    as_vector,
    dd_v_to_h,
    solve_lp,
    span_basis,
)
from .polyhedra import (
    ConvexPolyhedron,
    PointNotInSet,
    PolyhedralCone,
    PolyhedralSet,
    contains,
    distance_inf,
    in_piece_polar,
    polar,
    tangent_cone,
)

PRUNE_THRESHOLD = 32
ROW_ZERO = 1e-12


class EmptyCone:
    """Marker for a directional object that is empty because w is not tangent."""

    def __init__(self, dim: int):
        self.dim = dim
        self.pieces: list[ConvexPolyhedron] = []

    def contains(self, z, tol: Tolerance = DEFAULT_TOL) -> bool:
        return False

    def __repr__(self):
        return f"EmptyCone(dim={self.dim})"


AnyCone = PolyhedralCone | EmptyCone


@dataclass
class DirectionalContext:
    S: PolyhedralSet
    z: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.z = as_vector(self.z, self.S.dim)
        self.w = as_vector(self.w, self.S.dim)


def _require_member(S: PolyhedralSet, z, tol: Tolerance):
    if not contains(S, z, tol):
        raise PointNotInSet("point is not in the set", distance_inf(S, z, tol))


def cone_of(piece: ConvexPolyhedron) -> PolyhedralCone:
    return PolyhedralCone([piece], piece.dim)


def prune_union(pieces: list[ConvexPolyhedron], tol: Tolerance = DEFAULT_TOL) -> list[ConvexPolyhedron]:
    """Drop exact duplicates; when more than PRUNE_THRESHOLD remain, also drop
    pieces contained in another piece (generator-in-H-rep test)."""
    seen, out = set(), []
    for p in pieces:
        k = p.key()
        if k not in seen:
            seen.add(k)
            out.append(p)
    if len(out) <= PRUNE_THRESHOLD:
        return out
    keep = []
    for i, p in enumerate(out):
        dominated = False
        for j, q in enumerate(out):
            if i == j:
                continue
            if piece_subset(p, q, tol):
                # among mutually equal pieces keep the first one
                if not (piece_subset(q, p, tol) and j > i):
                    dominated = True
                    break
        if not dominated:
            keep.append(p)
    return keep


def piece_subset(p: ConvexPolyhedron, q: ConvexPolyhedron, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Cone p is contained in cone q: every generator of p satisfies q's rows."""
    g = p.generators
    for v in np.vstack([g.rays, g.lines, -g.lines]):
        if not q.contains(v, tol):
            return False
    return True


def second_order_tangent_set(ctx: DirectionalContext, tol: Tolerance = DEFAULT_TOL) -> AnyCone:
    """T_{T_S(z)}(w), or EmptyCone when w is not tangent."""
    T = tangent_cone(ctx.S, ctx.z, tol)
    if not contains(T, ctx.w, tol):
        return EmptyCone(ctx.S.dim)
    return tangent_cone(T, ctx.w, tol)


def regular_normal_cone(S: PolyhedralSet, z, tol: Tolerance = DEFAULT_TOL) -> PolyhedralCone:
    return cone_of(polar(tangent_cone(S, z, tol), tol))


def limiting_normal_cone(S: PolyhedralSet, z, tol: Tolerance = DEFAULT_TOL) -> PolyhedralCone:
    """Union, over faces F of the pieces of T = T_S(z), of the polar of T_T(rep F)."""
    T = tangent_cone(S, z, tol)
    return _limiting_at_apex(T, tol)


def _limiting_at_apex(T: PolyhedralCone, tol: Tolerance) -> PolyhedralCone:
    pieces = [polar(tangent_cone(T, y, tol), tol) for y in cell_points(T, tol)]
    return PolyhedralCone(prune_union(pieces, tol), T.dim)


def _hyperplanes(T: PolyhedralCone):
    """Distinct hyperplanes through the rows of T's pieces, and for every
    piece its rows as (hyperplane, orientation, is_equality)."""
    planes: list[np.ndarray] = []
    index: dict[tuple, int] = {}
    usage = []
    for p in T.pieces:
        rows = []
        for is_eq, M in ((False, p.A), (True, p.E)):
            for r in M:
                scale = float(np.max(np.abs(r)))
                if scale < ROW_ZERO:
                    continue
                v = r / scale
                lead = v[np.flatnonzero(np.abs(v) > ROW_ZERO)[0]]
                sign = 1.0 if lead > 0 else -1.0
                key = tuple(np.round(v * sign, 12) + 0.0)
                if key not in index:
                    index[key] = len(planes)
                    planes.append(np.array(key))
                rows.append((index[key], sign, is_eq))
        usage.append(rows)
    return planes, usage


def _fits_piece(rows, signs: dict[int, int]) -> bool:
    for k, orient, is_eq in rows:
        s = signs.get(k)
        if s is None:
            continue
        if (is_eq and s != 0) or (not is_eq and orient * s > 0):
            return False
    return True


def cell_points(T: PolyhedralCone, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """One point in every cell of the hyperplane arrangement of T that lies in T.

    The local shape of a union of cones is constant on each cell (fixed sign
    pattern against every row of every piece), so these points see every
    tangent cone that occurs anywhere in T.
    """
    n = T.dim
    planes, usage = _hyperplanes(T)
    out: list[np.ndarray] = []

    def point_for(signs: dict[int, int]):
        A = [-s * planes[k] for k, s in signs.items() if s != 0]
        E = [planes[k] for k, s in signs.items() if s == 0]
        res = solve_lp(LpProblem(np.zeros(n), np.array(A).reshape(-1, n), -np.ones(len(A)),
                                 np.array(E).reshape(-1, n), np.zeros(len(E))), tol)
        return res.x if isinstance(res, Optimal) else None

    owners = [[i for i, rows in enumerate(usage) if any(k == j for k, _, _ in rows)] for j in range(len(planes))]

    def interior_of_some_piece(signs: dict[int, int]) -> bool:
        # the normal cone there is {0}, which the apex already contributes
        for rows in usage:
            if rows and all(not is_eq and signs.get(k) is not None and orient * signs[k] < 0
                            for k, orient, is_eq in rows):
                return True
        return False

    def visit(pos: int, signs: dict[int, int], x: np.ndarray):
        if pos == len(planes):
            out.append(x)
            return
        if not any(_fits_piece(usage[i], signs) for i in owners[pos]):
            # only pieces that already exclude this cell use the plane
            visit(pos + 1, signs, x)
            return
        h = planes[pos]
        level = float(h @ x)
        here = 0 if abs(level) <= tol.eps_zero * max(1.0, float(np.max(np.abs(x)))) else (1 if level > 0 else -1)
        for s in (1, 0, -1):
            signs[pos] = s
            if any(_fits_piece(rows, signs) for rows in usage) and not interior_of_some_piece(signs):
                if s == here:
                    # the parent's point already lies in this cell; rescale for the unit margin
                    y = x if s == 0 else x * max(1.0, 1.0 / abs(level))
                else:
                    y = point_for(signs)
                if y is not None:
                    visit(pos + 1, signs, y)
            del signs[pos]

    visit(0, {}, np.zeros(n))
    return out


def directional_limiting_normal_cone(ctx: DirectionalContext, tol: Tolerance = DEFAULT_TOL) -> AnyCone:
    _require_member(ctx.S, ctx.z, tol)
    T = tangent_cone(ctx.S, ctx.z, tol)
    if not contains(T, ctx.w, tol):
        return EmptyCone(ctx.S.dim)
    return limiting_normal_cone(T, ctx.w, tol)


def directional_proximal_normal_cone(ctx: DirectionalContext, tol: Tolerance = DEFAULT_TOL) -> AnyCone:
    _require_member(ctx.S, ctx.z, tol)
    T = tangent_cone(ctx.S, ctx.z, tol)
    if not contains(T, ctx.w, tol):
        return EmptyCone(ctx.S.dim)
    return regular_normal_cone(T, ctx.w, tol)


def merged_generators(K: PolyhedralCone) -> GeneratorRep:
    rays = [p.generators.rays for p in K.pieces]
    lines = [p.generators.lines for p in K.pieces]
    return GeneratorRep(np.vstack(rays), np.vstack(lines), K.dim)


def convex_hull_cone(K: PolyhedralCone, tol: Tolerance = DEFAULT_TOL) -> PolyhedralCone:
    g = merged_generators(K)
    A, E = dd_v_to_h(g, tol)
    return cone_of(ConvexPolyhedron.cone(A, E, K.dim))


def clarke_directional_normal_cone(ctx: DirectionalContext, tol: Tolerance = DEFAULT_TOL) -> AnyCone:
    N = directional_limiting_normal_cone(ctx, tol)
    if isinstance(N, EmptyCone):
        return N
    return convex_hull_cone(N, tol)


def directional_regular_tangent_cone(ctx: DirectionalContext, tol: Tolerance = DEFAULT_TOL) -> PolyhedralCone:
    """Polar of the directional limiting normal cone (all of R^n if that is empty)."""
    N = directional_limiting_normal_cone(ctx, tol)
    if isinstance(N, EmptyCone):
        return PolyhedralCone.whole_space(ctx.S.dim)
    return cone_of(polar(N, tol))


def span_of_cone(K: AnyCone, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the linear span of a union of cones."""
    if isinstance(K, EmptyCone) or not K.pieces:
        return np.zeros((K.dim, 0))
    return span_basis(merged_generators(K).all_vectors(), K.dim, tol)


def lineality_of_convex(K: PolyhedralCone, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    from .polyhedra import lineality_space

    return lineality_space(K.pieces[0], tol)


def in_cone_polar(K: AnyCone, v, tol: Tolerance = DEFAULT_TOL) -> bool:
    if isinstance(K, EmptyCone):
        return True
    return all(in_piece_polar(p, v, tol) for p in K.pieces)


# ---------------------------------------------------------------------------
# Sampling-based cone comparison


def cone_probes(K: AnyCone, rng: np.random.Generator, count: int, spread: float = 0.3) -> np.ndarray:
    """Points drawn from the generators of K (on faces and inside) plus
    off-cone perturbations of them."""
    if isinstance(K, EmptyCone):
        return np.zeros((0, K.dim))
    out = []
    gens = [p.generators for p in K.pieces]
    n = K.dim
    for i in range(count):
        g = gens[i % len(gens)]
        vecs = g.rays
        pts = np.zeros(n)
        if vecs.shape[0]:
            mask = rng.random(vecs.shape[0]) < 0.6
            weights = rng.random(vecs.shape[0]) * mask
            pts = pts + weights @ vecs
        if g.lines.shape[0]:
            pts = pts + rng.normal(size=g.lines.shape[0]) @ g.lines
        if i % 3 == 2:
            pts = pts + spread * rng.normal(size=n)
        out.append(pts)
    return np.array(out).reshape(-1, n)


def membership_disagreements(K1: AnyCone, K2: AnyCone, probes: np.ndarray,
                             tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    bad = []
    for p in probes:
        if K1.contains(p, tol) != K2.contains(p, tol):
            bad.append(p)
    return bad


def cones_agree(K1: AnyCone, K2: AnyCone, rng: np.random.Generator, count: int = 1000,
                tol: Tolerance = DEFAULT_TOL) -> bool:
    """Two-sided membership sampling plus exact generator-in-H-rep checks."""
    if isinstance(K1, EmptyCone) or isinstance(K2, EmptyCone):
        return isinstance(K1, EmptyCone) and isinstance(K2, EmptyCone)
    half = max(1, count // 2)
    probes = np.vstack([
        cone_probes(K1, rng, half),
        cone_probes(K2, rng, count - half),
        rng.normal(size=(max(1, count // 10), K1.dim)),
    ])
    if membership_disagreements(K1, K2, probes, tol):
        return False
    for A, B in ((K1, K2), (K2, K1)):
        for p in A.pieces:
            for v in p.generators.all_vectors():
                if not B.contains(v, tol):
                    return False
    return True
