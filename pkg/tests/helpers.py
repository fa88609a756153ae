"""Shared fixtures and independent oracles for the test suite.

Nothing here calls the closed-form cone calculus under test; oracles work
from row evaluations, generator dot products or scipy's LP solver.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from djopt.polyhedra import ConvexPolyhedron, PolyhedralSet

DCOMP = PolyhedralSet([
    ConvexPolyhedron([[-1, 0]], [0], [[0, 1]], [0]),
    ConvexPolyhedron([[0, 1]], [0], [[1, 0]], [0]),
])
SWITCH = PolyhedralSet([
    ConvexPolyhedron(None, None, [[1, 0]], [0], dim=2),
    ConvexPolyhedron(None, None, [[0, 1]], [0], dim=2),
])


# --- random data ----------------------------------------------------------------


def random_piece(rng: np.random.Generator, n: int, rows: int, with_eq: bool, through_origin: bool = True):
    A = rng.integers(-2, 3, size=(rows, n)).astype(float)
    A = A[np.any(A != 0, axis=1)]
    b = np.zeros(A.shape[0]) if through_origin else rng.choice([0.0, 0.0, 1.0], size=A.shape[0])
    E = np.zeros((0, n))
    if with_eq:
        E = rng.integers(-1, 2, size=(1, n)).astype(float)
        if not np.any(E):
            E = np.zeros((0, n))
    return ConvexPolyhedron(A, b, E, np.zeros(E.shape[0]), dim=n)


def random_set(rng: np.random.Generator, n: int | None = None, pieces: int | None = None,
               through_origin: bool = False) -> PolyhedralSet:
    """Union of up to 4 integer polyhedra in R^2..R^4, each containing 0."""
    n = n or int(rng.integers(2, 5))
    pieces = pieces or int(rng.integers(1, 5))
    out = []
    for _ in range(pieces):
        rows = int(rng.integers(1, n + 2))
        out.append(random_piece(rng, n, rows, rng.random() < 0.25, through_origin))
    return PolyhedralSet(out, n)


def random_cone(rng: np.random.Generator, n: int | None = None, pieces: int | None = None) -> PolyhedralSet:
    return random_set(rng, n, pieces, through_origin=True)


# --- exact and LP oracles ----------------------------------------------------------


def fraction_rank(M) -> int:
    """Rank by Gaussian elimination over the rationals."""
    rows = [[Fraction(int(v)) for v in r] for r in M]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                factor = rows[i][col] / rows[rank][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def scipy_lp(c, A=None, b=None, E=None, f=None, sense="max"):
    """(status, value) with status in optimal/unbounded/infeasible."""
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    sign = -1.0 if sense == "max" else 1.0
    kw = {}
    if A is not None and len(A):
        kw["A_ub"], kw["b_ub"] = np.asarray(A, float), np.asarray(b, float)
    if E is not None and len(E):
        kw["A_eq"], kw["b_eq"] = np.asarray(E, float), np.asarray(f, float)
    r = linprog(sign * c, bounds=[(None, None)] * n, method="highs", **kw)
    if r.status == 0:
        return "optimal", sign * r.fun
    if r.status == 3:
        return "unbounded", None
    if r.status == 2:
        return "infeasible", None
    raise RuntimeError(r.message)


def brute_force_lp(c, A, b, sense="max", tol=1e-9):
    """Best basic feasible solution of a bounded LP {Ax <= b} by enumerating
    all n-row subsets; None when infeasible."""
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    n = A.shape[1]
    best = None
    for rows in itertools.combinations(range(A.shape[0]), n):
        M = A[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, b[list(rows)])
        if np.all(A @ x <= b + tol * (1 + np.abs(b))):
            val = float(np.dot(c, x))
            if best is None or (val > best if sense == "max" else val < best):
                best = val
    return best


def in_generated_cone(rays, lines, w, tol=1e-7) -> bool:
    """w ∈ cone(rays) + span(lines), decided by scipy's LP."""
    rays = np.asarray(rays, float).reshape(-1, len(w))
    lines = np.asarray(lines, float).reshape(-1, len(w))
    k, m = rays.shape[0], lines.shape[0]
    if k + m == 0:
        return bool(np.max(np.abs(w)) <= tol)
    M = np.hstack([rays.T, lines.T])
    bounds = [(0, None)] * k + [(None, None)] * m
    # minimise the max-norm residual
    n = len(w)
    c = np.zeros(k + m + 1)
    c[-1] = 1
    A = np.vstack([np.hstack([M, -np.ones((n, 1))]), np.hstack([-M, -np.ones((n, 1))])])
    bb = np.concatenate([w, -np.asarray(w)])
    r = linprog(c, A_ub=A, b_ub=bb, bounds=bounds + [(0, None)], method="highs")
    return r.status == 0 and r.fun <= tol * max(1.0, float(np.max(np.abs(w))))


def rows_contain(piece: ConvexPolyhedron, z, tol=1e-12) -> bool:
    z = np.asarray(z, float)
    scale = max(1.0, float(np.max(np.abs(z)))) if z.size else 1.0
    ok = True
    if piece.A.shape[0]:
        ok = bool(np.all(piece.A @ z - piece.b <= tol * scale))
    if ok and piece.E.shape[0]:
        ok = bool(np.all(np.abs(piece.E @ z - piece.f) <= tol * scale))
    return ok


def set_contains(S: PolyhedralSet, z, tol=1e-12) -> bool:
    return any(rows_contain(p, z, tol) for p in S.pieces)


def curve_member(S: PolyhedralSet, z, w, s, ts=(1e-3, 1e-4)) -> bool:
    """z + t w + t²s/2 ∈ S for the given small t (direct row evaluation)."""
    z, w, s = (np.asarray(v, float) for v in (z, w, s))
    return all(set_contains(S, z + t * w + 0.5 * t * t * s, 1e-11) for t in ts)


def polar_mask(piece_gens, V: np.ndarray, tol=1e-9) -> np.ndarray:
    """Rows of V lying in the polar of the cone with the given generators."""
    rays, lines = piece_gens
    mask = np.ones(V.shape[0], dtype=bool)
    if rays.shape[0]:
        mask &= np.max(V @ rays.T, axis=1) <= tol
    if lines.shape[0]:
        mask &= np.max(np.abs(V @ lines.T), axis=1) <= tol
    return mask


def regular_normal_mask(pieces, gens, y, V, tol=1e-9) -> np.ndarray:
    """V ∈ N̂_K(y) for a union of cones K: for every piece containing y,
    v is in the piece's polar and orthogonal to y."""
    mask = np.abs(V @ y) <= tol * max(1.0, float(np.max(np.abs(y))))
    for p, g in zip(pieces, gens):
        if rows_contain(p, y, 1e-10):
            mask &= polar_mask(g, V, tol)
    return mask


def limiting_normal_mask_at_origin(K: PolyhedralSet, V: np.ndarray, tol=1e-9, seed: int = 0) -> np.ndarray:
    """v ∈ N_K(0) for a union of cones K.

    v is a limiting normal at 0 iff v ∈ N̂_K(y) for some y ∈ K, and for a
    union of cones that means: v lies in the polar of every piece containing
    y and v ⊥ y. For a piece Q with v in its polar, Q ∩ v^⊥ is a face of Q,
    so it suffices to look for a sampled face point y of such a Q that
    avoids every piece whose polar misses v. The admissible y form a
    relatively open part of that face, so dense face sampling finds them.
    """
    rng = np.random.default_rng(seed)
    gens = [(p.generators.rays, p.generators.lines) for p in K.pieces]
    in_polar = np.column_stack([polar_mask(g, V, tol) for g in gens])  # probes x pieces
    mask = np.all(in_polar, axis=1)  # y = 0
    for qi, q in enumerate(K.pieces):
        Y = np.array(face_samples(q, rng, per_face=200))
        if Y.size == 0:
            continue
        holds = np.column_stack([[rows_contain(r, y, 1e-10) for y in Y] for r in K.pieces])  # samples x pieces
        ortho = np.abs(V @ Y.T) <= tol * np.maximum(1.0, np.abs(V).max(axis=1))[:, None]
        blocked = (~in_polar).astype(int) @ holds.T.astype(int) > 0  # probes x samples
        mask |= in_polar[:, qi] & np.any(ortho & ~blocked, axis=1)
    return mask


def probes_for(cones, rng: np.random.Generator, count: int) -> np.ndarray:
    """Probe vectors from the generators of the given cones, integer points
    and Gaussian noise."""
    from djopt.cones import EmptyCone, cone_probes

    n = next(K.dim for K in cones)
    parts = []
    live = [K for K in cones if not isinstance(K, EmptyCone) and K.pieces]
    share = count // (len(live) + 2) if live else 0
    for K in live:
        parts.append(cone_probes(K, rng, share))
    parts.append(rng.integers(-2, 3, size=(share or count // 2, n)).astype(float))
    rest = count - sum(p.shape[0] for p in parts)
    parts.append(rng.normal(size=(max(rest, 0), n)))
    return np.vstack(parts)


def scipy_face_points(piece: ConvexPolyhedron, box: float = 10.0) -> list[tuple[np.ndarray, tuple]]:
    """One relative-interior point per nonempty face of the piece, found by
    maximising the slack of the inactive rows with scipy (inside a box)."""
    n = piece.dim
    k = piece.A.shape[0]
    out = []
    for r in range(k + 1):
        for active in itertools.combinations(range(k), r):
            rest = [i for i in range(k) if i not in active]
            # variables (x, s): max s, A_rest x + s <= b_rest, A_act x = b_act, E x = f, s <= 1
            c = np.zeros(n + 1)
            c[-1] = -1.0
            A_ub = [np.hstack([piece.A[rest], np.ones((len(rest), 1))])] if rest else []
            b_ub = [piece.b[rest]] if rest else []
            A_eq, b_eq = [], []
            if active:
                A_eq.append(np.hstack([piece.A[list(active)], np.zeros((len(active), 1))]))
                b_eq.append(piece.b[list(active)])
            if piece.E.shape[0]:
                A_eq.append(np.hstack([piece.E, np.zeros((piece.E.shape[0], 1))]))
                b_eq.append(piece.f)
            bounds = [(-box, box)] * n + [(None, 1.0)]
            res = linprog(c, A_ub=np.vstack(A_ub) if A_ub else None, b_ub=np.concatenate(b_ub) if b_ub else None,
                          A_eq=np.vstack(A_eq) if A_eq else None, b_eq=np.concatenate(b_eq) if b_eq else None,
                          bounds=bounds, method="highs")
            if res.status == 0 and (not rest or -res.fun > 1e-7):
                out.append((res.x[:n], active))
    return out


def regular_normal_member(S: PolyhedralSet, z, v, tol=1e-9) -> bool:
    """v ∈ N̂_S(z): for each piece containing z, v is a nonnegative
    combination of its active inequality rows plus a combination of its
    equality rows."""
    z = np.asarray(z, float)
    for p in S.pieces:
        if not rows_contain(p, z, 1e-9):
            continue
        act = [i for i in range(p.A.shape[0]) if abs(p.A[i] @ z - p.b[i]) <= 1e-8 * max(1.0, abs(p.b[i]))]
        if not in_generated_cone(p.A[act], p.E, v, tol=1e-7):
            return False
    return True


def face_samples(piece: ConvexPolyhedron, rng: np.random.Generator, per_face: int = 150,
                 box: float = 10.0) -> list[np.ndarray]:
    """Hit-and-run samples inside every nonempty face of the piece (clipped to a box)."""
    out = []
    k = piece.A.shape[0]
    for x0, active in scipy_face_points(piece, box):
        out.append(x0)
        fixed = np.vstack([piece.A[list(active)], piece.E]) if active else piece.E
        if fixed.shape[0]:
            _, sv, vt = np.linalg.svd(fixed)
            rank = int(np.sum(sv > 1e-10))
            dirs = vt[rank:].T
        else:
            dirs = np.eye(piece.dim)
        if dirs.shape[1] == 0:
            continue
        rest = [i for i in range(k) if i not in active]
        rows = np.vstack([piece.A[rest], np.eye(piece.dim), -np.eye(piece.dim)])
        rhs = np.concatenate([piece.b[rest], np.full(piece.dim, box), np.full(piece.dim, box)])
        x = x0.copy()
        for _ in range(per_face):
            d = dirs @ rng.normal(size=dirs.shape[1])
            slope = rows @ d
            room = rhs - rows @ x
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = room / slope
            hi = np.min(ratio[slope > 1e-12], initial=np.inf)
            lo = np.max(ratio[slope < -1e-12], initial=-np.inf)
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi - lo < 1e-12:
                continue
            x = x + rng.uniform(lo, hi) * d
            out.append(x.copy())
    return out


def lower_support_grid_oracle(S: PolyhedralSet, zstar, seed: int = 0) -> float:
    """Min of <z*, z> over sampled face points z of S with z* in the regular normal cone at z."""
    zstar = np.asarray(zstar, float)
    rng = np.random.default_rng(seed)
    pts = []
    nonempty = False
    for p in S.pieces:
        # a normal at z must in particular be normal to the sampled piece: z maximises z* there
        E = p.E if p.E.shape[0] else None
        status, top = scipy_lp(zstar, p.A, p.b, E, p.f if E is not None else None, "max")
        nonempty |= status != "infeasible"
        if status == "optimal":
            pts.extend(x for x in face_samples(p, rng) if zstar @ x >= top - 1e-9)
    if not nonempty:
        return -np.inf
    pts.sort(key=lambda z: float(zstar @ z))
    for z in pts:
        if set_contains(S, z, 1e-9) and regular_normal_member(S, z, zstar):
            return float(zstar @ z)
    return np.inf


# --- expressions and finite differences ---------------------------------------------


def random_expression(rng: np.random.Generator, n: int, depth: int = 3) -> str:
    """Random text in the expression grammar that is smooth on all of R^n."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.7:
            return f"x{int(rng.integers(1, n + 1))}"
        return str(int(rng.integers(1, 4)))
    a = random_expression(rng, n, depth - 1)
    kind = int(rng.integers(0, 9))
    if kind <= 2:
        b = random_expression(rng, n, depth - 1)
        return f"({a}) {'+-*'[kind]} ({b})"
    if kind == 3:
        return f"({a})^{int(rng.integers(0, 4))}"
    if kind == 4:
        return f"({a}) / (1 + ({random_expression(rng, n, depth - 1)})^2)"
    if kind == 5:
        return f"log(1 + ({a})^2)"
    if kind == 6:
        return f"exp(({a}) / 4)" if depth < 3 else f"exp(sin({a}))"
    return f"{'sin' if kind == 7 else 'cos'}({a})"


def fd_gradient(fun, x, h: float = 1e-4) -> np.ndarray:
    x = np.asarray(x, float)
    g = np.zeros_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def fd_hessian(fun, x, h: float = 1e-4) -> np.ndarray:
    """Central second differences of the values only."""
    x = np.asarray(x, float)
    n = x.shape[0]
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            v = (fun(x + ei + ej) - fun(x + ei - ej) - fun(x - ei + ej) + fun(x - ei - ej)) / (4 * h * h)
            H[i, j] = H[j, i] = v
    return H


# --- random expression systems ------------------------------------------------------


def _poly_text(lin, quad) -> str:
    """Text of sum lin_i x_i + sum_{i<=j} quad_ij x_i x_j with integer data."""
    terms = []
    n = len(lin)
    for i in range(n):
        if lin[i]:
            terms.append(f"{int(lin[i])}*x{i + 1}")
    for i in range(n):
        for j in range(i, n):
            if quad[i][j]:
                terms.append(f"{int(quad[i][j])}*x{i + 1}*x{j + 1}")
    return " + ".join(terms) if terms else "0"


def random_quadratic_map(rng: np.random.Generator, n: int, d: int, jac: np.ndarray | None = None) -> list[str]:
    """d quadratic expressions vanishing at 0 with integer coefficients; the
    Jacobian at 0 is `jac` when given."""
    J = rng.integers(-2, 3, size=(d, n)) if jac is None else np.asarray(jac)
    out = []
    for i in range(d):
        Q = np.triu(rng.integers(-1, 2, size=(n, n)))
        out.append(_poly_text(J[i], Q))
    return out


# --- bundled fixtures ------------------------------------------------------------------

FIXTURE_DIR = __import__("pathlib").Path(__file__).resolve().parent.parent / "fixtures"


def fixture_names() -> list[str]:
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.json"))


def load_fixture(name: str):
    """ProblemPoint of a bundled fixture with the file's own options."""
    import json

    from djopt.cli import build_parser, load_problem, settings_from

    data = json.loads((FIXTURE_DIR / f"{name}.json").read_text())
    args = build_parser().parse_args(["analyze", str(FIXTURE_DIR / f"{name}.json")])
    return load_problem(data, settings_from(args, data))
