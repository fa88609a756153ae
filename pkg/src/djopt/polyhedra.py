"""Finite unions of convex polyhedra, their tangent cones, polars and faces."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .numeric_core import (
    DEFAULT_TOL,
    DimensionMismatch,
    GeneratorRep,
    Infeasible,
    LpProblem,
    Optimal,
    ScaleCapExceeded,
    Tolerance,
    as_matrix,
    as_vector,
    dd_h_to_v,
    dd_v_to_h,
    null_space,
    solve_lp,
)

FACE_ROW_CAP = 20


class PointNotInSet(ValueError):
    def __init__(self, message: str, distance: float | None = None):
        super().__init__(message)
        self.distance = distance


class EmptySet(ValueError):
    pass


def _scale(z: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(z)))) if z.size else 1.0


class ConvexPolyhedron:
    """{z : A z <= b, E z = f} in R^dim."""

    def __init__(self, A=None, b=None, E=None, f=None, dim: int | None = None):
        if dim is None:
            for M in (A, E):
                if M is not None and np.asarray(M).ndim == 2 and np.asarray(M).shape[1] > 0:
                    dim = np.asarray(M).shape[1]
                    break
            else:
                raise DimensionMismatch("ambient dimension must be given for an unconstrained piece")
        self.dim = int(dim)
        self.A = as_matrix(A, self.dim)
        self.E = as_matrix(E, self.dim)
        self.b = as_vector(b if b is not None else np.zeros(self.A.shape[0]), self.A.shape[0])
        self.f = as_vector(f if f is not None else np.zeros(self.E.shape[0]), self.E.shape[0])
        for arr in (self.A, self.E, self.b, self.f):
            arr.setflags(write=False)

    @classmethod
    def cone(cls, A=None, E=None, dim: int | None = None) -> "ConvexPolyhedron":
        return cls(A, None, E, None, dim)

    @classmethod
    def whole_space(cls, dim: int) -> "ConvexPolyhedron":
        return cls(None, None, None, None, dim)

    @property
    def is_cone(self) -> bool:
        return not np.any(self.b) and not np.any(self.f)

    def contains(self, z, tol: Tolerance = DEFAULT_TOL) -> bool:
        z = as_vector(z, self.dim)
        s = _scale(z)
        if self.A.shape[0] and np.max(self.A @ z - self.b) > tol.eps_feas * s:
            return False
        if self.E.shape[0] and np.max(np.abs(self.E @ z - self.f)) > tol.eps_feas * s:
            return False
        return True

    def active_rows(self, z, tol: Tolerance = DEFAULT_TOL) -> list[int]:
        z = as_vector(z, self.dim)
        s = _scale(z)
        slack = self.b - self.A @ z
        return [i for i in range(self.A.shape[0]) if abs(slack[i]) <= tol.eps_feas * s]

    def feasible_point(self, tol: Tolerance = DEFAULT_TOL) -> np.ndarray | None:
        out = solve_lp(LpProblem(np.zeros(self.dim), self.A, self.b, self.E, self.f), tol)
        return out.x if isinstance(out, Optimal) else None

    def is_empty(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.feasible_point(tol) is None

    @cached_property
    def generators(self) -> GeneratorRep:
        if not self.is_cone:
            raise ValueError("generators are only defined for cone pieces")
        return dd_h_to_v(self.A, self.E, self.dim)

    def key(self) -> tuple:
        return (self.A.tobytes(), self.b.tobytes(), self.E.tobytes(), self.f.tobytes(), self.A.shape, self.E.shape)

    def to_json(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist(), "E": self.E.tolist(), "f": self.f.tolist()}

    def __repr__(self):
        return f"ConvexPolyhedron(dim={self.dim}, ineq={self.A.shape[0]}, eq={self.E.shape[0]})"


class PolyhedralSet:
    """Union of convex polyhedral pieces sharing one ambient dimension."""

    def __init__(self, pieces, dim: int | None = None):
        pieces = list(pieces)
        if not pieces:
            raise ValueError("a polyhedral set needs at least one piece")
        if dim is None:
            dim = pieces[0].dim
        if any(p.dim != dim for p in pieces):
            raise DimensionMismatch("all pieces must share the ambient dimension")
        self.pieces: list[ConvexPolyhedron] = pieces
        self.dim = dim

    def contains(self, z, tol: Tolerance = DEFAULT_TOL) -> bool:
        return contains(self, z, tol)

    def to_json(self) -> dict:
        return {"dim": self.dim, "pieces": [p.to_json() for p in self.pieces]}

    @classmethod
    def from_json(cls, data) -> "PolyhedralSet":
        if isinstance(data, str):
            data = json.loads(data)
        dim = int(data["dim"])
        pieces = []
        for raw in data["pieces"]:
            pieces.append(ConvexPolyhedron(raw.get("A") or None, raw.get("b") or None,
                                           raw.get("E") or None, raw.get("f") or None, dim))
        return cls(pieces, dim)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, pieces={len(self.pieces)})"


class PolyhedralCone(PolyhedralSet):
    """Union of convex polyhedral cones (every piece has b = 0 and f = 0)."""

    def __init__(self, pieces, dim: int | None = None):
        super().__init__(pieces, dim)
        if not all(p.is_cone for p in self.pieces):
            raise ValueError("cone pieces must have zero right-hand sides")

    @classmethod
    def from_pieces(cls, pieces: list[tuple], dim: int) -> "PolyhedralCone":
        return cls([ConvexPolyhedron.cone(A, E, dim) for A, E in pieces], dim)

    @classmethod
    def from_generators(cls, gens: GeneratorRep) -> "PolyhedralCone":
        A, E = dd_v_to_h(gens)
        return cls([ConvexPolyhedron.cone(A, E, gens.dim)], gens.dim)

    @classmethod
    def whole_space(cls, dim: int) -> "PolyhedralCone":
        return cls([ConvexPolyhedron.whole_space(dim)], dim)

    @classmethod
    def origin(cls, dim: int) -> "PolyhedralCone":
        return cls([ConvexPolyhedron.cone(None, np.eye(dim), dim)], dim)

    def generator_reps(self) -> list[GeneratorRep]:
        return [p.generators for p in self.pieces]

    def is_convex_piece(self) -> bool:
        return len(self.pieces) == 1


@dataclass(frozen=True)
class Face:
    parent: int
    active: tuple[int, ...]
    rep_point: np.ndarray


# ---------------------------------------------------------------------------


def _check_dim(S: PolyhedralSet, z) -> np.ndarray:
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != S.dim:
        raise DimensionMismatch(f"point has dimension {z.shape[0]}, set has {S.dim}")
    return z


def contains(S: PolyhedralSet, z, tol: Tolerance = DEFAULT_TOL) -> bool:
    z = _check_dim(S, z)
    return any(p.contains(z, tol) for p in S.pieces)


def tangent_cone(S: PolyhedralSet, z, tol: Tolerance = DEFAULT_TOL) -> PolyhedralCone:
    """Union over pieces containing z of {w : A_active w <= 0, E w = 0}."""
    z = _check_dim(S, z)
    pieces = []
    for p in S.pieces:
        if p.contains(z, tol):
            act = p.active_rows(z, tol)
            pieces.append(ConvexPolyhedron.cone(p.A[act], p.E, S.dim))
    if not pieces:
        raise PointNotInSet("point is not in the set", distance_inf(S, z, tol))
    return PolyhedralCone(_dedupe(pieces), S.dim)


def _dedupe(pieces: list[ConvexPolyhedron]) -> list[ConvexPolyhedron]:
    seen, out = set(), []
    for p in pieces:
        k = p.key()
        if k not in seen:
            seen.add(k)
            out.append(p)
    return out


def _piece_distance(p: ConvexPolyhedron, z: np.ndarray, tol: Tolerance):
    """min t s.t. |z - y|_inf <= t, y in piece. Variables (y, t)."""
    n = p.dim
    I = np.eye(n)
    one = np.ones((n, 1))
    A = np.vstack([
        np.hstack([I, -one]),
        np.hstack([-I, -one]),
        np.hstack([p.A, np.zeros((p.A.shape[0], 1))]),
    ])
    b = np.concatenate([z, -z, p.b])
    E = np.hstack([p.E, np.zeros((p.E.shape[0], 1))])
    c = np.zeros(n + 1)
    c[-1] = 1.0
    out = solve_lp(LpProblem(c, A, b, E, p.f, sense="min"), tol)
    if not isinstance(out, Optimal):
        return np.inf, None
    return max(out.value, 0.0), out.x[:n]


def nearest_point_inf(S: PolyhedralSet, z, tol: Tolerance = DEFAULT_TOL):
    """(distance, nearest point) in the max-norm; (inf, None) if S is empty."""
    z = _check_dim(S, z)
    best, point = np.inf, None
    for p in S.pieces:
        if p.contains(z, tol):
            return 0.0, z.copy()
        d, y = _piece_distance(p, z, tol)
        if d < best:
            best, point = d, y
    return best, point


def distance_inf(S: PolyhedralSet, z, tol: Tolerance = DEFAULT_TOL) -> float:
    """Max-norm distance from z to the union; +inf when every piece is empty."""
    return nearest_point_inf(S, z, tol)[0]


# ---------------------------------------------------------------------------
# Faces


def _relint_lp(P: ConvexPolyhedron, active: frozenset, tol: Tolerance):
    """max t s.t. rows in `active` tight, other rows slack by t*|row|, t <= 1.

    Returns (t, point, dual weights on the non-active rows)."""
    n = P.dim
    act = sorted(active)
    rest = [i for i in range(P.A.shape[0]) if i not in active]
    norms = np.linalg.norm(P.A[rest], axis=1) if rest else np.zeros(0)
    norms = np.where(norms > 0, norms, 1.0)
    A_ineq = np.vstack([
        np.hstack([P.A[rest], norms[:, None]]) if rest else np.zeros((0, n + 1)),
        np.concatenate([np.zeros(n), [1.0]])[None, :],
    ])
    b_ineq = np.concatenate([P.b[rest], [1.0]])
    A_eq = np.vstack([
        np.hstack([P.A[act], np.zeros((len(act), 1))]),
        np.hstack([P.E, np.zeros((P.E.shape[0], 1))]),
    ])
    b_eq = np.concatenate([P.b[act], P.f])
    c = np.zeros(n + 1)
    c[-1] = 1.0
    out = solve_lp(LpProblem(c, A_ineq, b_ineq, A_eq, b_eq), tol)
    if isinstance(out, Infeasible):
        return None
    assert isinstance(out, Optimal)
    return out.value, out.x[:n], dict(zip(rest, out.dual_ineq[: len(rest)]))


def _close_active(P: ConvexPolyhedron, active: frozenset, tol: Tolerance):
    """Smallest superset of `active` that is the exact active set of a face.

    Returns (active set, relative-interior point) or None if empty."""
    while True:
        res = _relint_lp(P, active, tol)
        if res is None:
            return None
        t, x, duals = res
        if t > tol.eps_feas:
            return active, x
        implicit = {i for i, y in duals.items() if y > tol.eps_zero}
        if not implicit:
            # degenerate dual; fall back to rows tight at the optimum
            slack = P.b - P.A @ x
            implicit = {i for i in duals if abs(slack[i]) <= tol.eps_feas * _scale(x)}
        if not implicit:
            return active, x
        active = active | frozenset(implicit)


def faces(P: ConvexPolyhedron, tol: Tolerance = DEFAULT_TOL, parent: int = 0) -> list[Face]:
    """All nonempty faces, each once, identified by its maximal active set.

    Faces are explored downward: the facets of a face F are the closures of
    F's active set plus one more row.
    """
    if P.A.shape[0] > FACE_ROW_CAP:
        raise ScaleCapExceeded(f"face enumeration limited to {FACE_ROW_CAP} inequality rows")
    root = _close_active(P, frozenset(), tol)
    if root is None:
        raise EmptySet("polyhedron is empty")
    found = {root[0]: root[1]}
    frontier = [root[0]]
    while frontier:
        nxt = []
        for act in frontier:
            for j in range(P.A.shape[0]):
                if j in act:
                    continue
                res = _close_active(P, act | {j}, tol)
                if res is None or res[0] in found:
                    continue
                found[res[0]] = res[1]
                nxt.append(res[0])
        frontier = nxt
    out = [Face(parent, tuple(sorted(a)), x) for a, x in found.items()]
    out.sort(key=lambda F: (len(F.active), F.active))
    return out


def all_faces(S: PolyhedralSet, tol: Tolerance = DEFAULT_TOL) -> list[Face]:
    out = []
    for idx, p in enumerate(S.pieces):
        try:
            out.extend(faces(p, tol, parent=idx))
        except EmptySet:
            continue
    return out


# ---------------------------------------------------------------------------
# Polars and lineality


def piece_polar(piece: ConvexPolyhedron, tol: Tolerance = DEFAULT_TOL) -> ConvexPolyhedron:
    """Polar of a convex cone piece: the cone generated by rows of A and +-rows of E."""
    A, E = dd_v_to_h(GeneratorRep(piece.A, piece.E, piece.dim), tol)
    return ConvexPolyhedron.cone(A, E, piece.dim)


def polar(K: PolyhedralSet, tol: Tolerance = DEFAULT_TOL) -> ConvexPolyhedron:
    """Polar of a union of cones: intersection of the piece polars."""
    if not all(p.is_cone for p in K.pieces):
        raise ValueError("polar is implemented for cones only")
    As, Es = [], []
    for p in K.pieces:
        q = piece_polar(p, tol)
        As.append(q.A)
        Es.append(q.E)
    return simplify_cone(ConvexPolyhedron.cone(np.vstack(As), np.vstack(Es), K.dim), tol)


def simplify_cone(piece: ConvexPolyhedron, tol: Tolerance = DEFAULT_TOL) -> ConvexPolyhedron:
    """Canonical irredundant H-rep of a convex cone via a generator round trip."""
    g = dd_h_to_v(piece.A, piece.E, piece.dim, tol)
    A, E = dd_v_to_h(g, tol)
    out = ConvexPolyhedron.cone(A, E, piece.dim)
    out.__dict__["generators"] = g
    return out


def lineality_space(piece: ConvexPolyhedron, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of {w : A w = 0, E w = 0}."""
    return null_space(np.vstack([piece.A, piece.E]), piece.dim, tol)


def in_piece_polar(piece: ConvexPolyhedron, v, tol: Tolerance = DEFAULT_TOL) -> bool:
    """v.w <= 0 for every w in the cone piece (LP bounded test)."""
    v = as_vector(v, piece.dim)
    if not np.any(v):
        return True
    out = solve_lp(LpProblem(v, piece.A, piece.b, piece.E, piece.f), tol)
    return isinstance(out, Optimal) and out.value <= tol.eps_feas * _scale(v)


def in_polar(K: PolyhedralSet, v, tol: Tolerance = DEFAULT_TOL) -> bool:
    return all(in_piece_polar(p, v, tol) for p in K.pieces)
