"""Dense linear algebra kernels: a certificate-producing simplex solver,
double-description conversion for polyhedral cones, and subspace helpers.

Everything here is deterministic and works on small dense numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DimensionMismatch(ValueError):
    """Array shapes do not agree."""


class ScaleCapExceeded(ValueError):
    """Input exceeds the size limits of an exhaustive algorithm."""


@dataclass(frozen=True)
class Tolerance:
    eps_feas: float = 1e-8
    eps_zero: float = 1e-10
    eps_opt: float = 1e-8

    def __post_init__(self):
        if min(self.eps_feas, self.eps_zero, self.eps_opt) <= 0:
            raise ValueError("tolerances must be strictly positive")
        if self.eps_zero > self.eps_feas:
            raise ValueError("eps_zero must not exceed eps_feas")


DEFAULT_TOL = Tolerance()

DD_MAX_DIM = 12
DD_MAX_ROWS = 64


def as_matrix(M, ncols: int | None = None) -> np.ndarray:
    """Coerce to a 2-D float array; empty inputs become shape (0, ncols)."""
    if M is None:
        if ncols is None:
            raise DimensionMismatch("cannot infer column count of an empty matrix")
        return np.zeros((0, ncols))
    arr = np.asarray(M, dtype=float)
    if arr.size == 0:
        if ncols is None:
            ncols = arr.shape[1] if arr.ndim == 2 else 0
        return np.zeros((0, ncols))
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {arr.shape}")
    if ncols is not None and arr.shape[1] != ncols:
        raise DimensionMismatch(f"expected {ncols} columns, got {arr.shape[1]}")
    return arr


def as_vector(v, length: int | None = None) -> np.ndarray:
    if v is None:
        v = np.zeros(0 if length is None else length)
    arr = np.asarray(v, dtype=float).reshape(-1)
    if length is not None and arr.shape[0] != length:
        raise DimensionMismatch(f"expected vector of length {length}, got {arr.shape[0]}")
    return arr


# ---------------------------------------------------------------------------
# Linear programming


@dataclass
class LpProblem:
    """maximize/minimize c.x subject to A_ineq x <= b_ineq, A_eq x = b_eq, x free."""

    c: np.ndarray
    A_ineq: np.ndarray | None = None
    b_ineq: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    sense: str = "max"

    def __post_init__(self):
        self.c = as_vector(self.c)
        n = self.c.shape[0]
        try:
            self.A_ineq = as_matrix(self.A_ineq, n)
            self.A_eq = as_matrix(self.A_eq, n)
        except DimensionMismatch as exc:
            raise DimensionMismatch(f"constraint blocks must have {n} columns") from exc
        self.b_ineq = as_vector(self.b_ineq if self.b_ineq is not None else np.zeros(self.A_ineq.shape[0]))
        self.b_eq = as_vector(self.b_eq if self.b_eq is not None else np.zeros(self.A_eq.shape[0]))
        if self.b_ineq.shape[0] != self.A_ineq.shape[0] or self.b_eq.shape[0] != self.A_eq.shape[0]:
            raise DimensionMismatch("right-hand side length differs from row count")
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")

    @property
    def n(self) -> int:
        return self.c.shape[0]


@dataclass
class Optimal:
    x: np.ndarray
    value: float
    dual_ineq: np.ndarray
    dual_eq: np.ndarray


@dataclass
class Unbounded:
    ray: np.ndarray


@dataclass
class Infeasible:
    farkas: np.ndarray


LpOutcome = Optimal | Unbounded | Infeasible


class _Tableau:
    """Dense simplex tableau over nonnegative variables with Bland's rule.

    Rows hold B^-1 [M | I] and B^-1 r; the trailing identity block tracks
    the artificial variables so B^-1 is always available for duals.
    """

    def __init__(self, M: np.ndarray, r: np.ndarray, pivot_tol: float):
        m, nv = M.shape
        self.m, self.nv = m, nv
        self.T = np.hstack([M, np.eye(m)])
        self.rhs = r.copy()
        self.basis = list(range(nv, nv + m))
        self.pivot_tol = pivot_tol

    def pivot(self, row: int, col: int):
        T = self.T
        p = T[row, col]
        T[row] /= p
        self.rhs[row] /= p
        T[row, col] = 1.0
        for i in range(self.m):
            if i != row:
                factor = T[i, col]
                if factor != 0.0:
                    T[i] -= factor * T[row]
                    T[i, col] = 0.0
                    self.rhs[i] -= factor * self.rhs[row]
        self.basis[row] = col

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        cb = cost[self.basis]
        return cost - cb @ self.T

    def run(self, cost: np.ndarray, allowed: int, rc_tol: float, max_iter: int = 20000):
        """Maximize cost.z over the first `allowed` columns. Returns None on
        optimality or the entering column index if unbounded."""
        for _ in range(max_iter):
            rc = self.reduced_costs(cost)
            entering = -1
            for j in range(allowed):
                if rc[j] > rc_tol and j not in self.basis:
                    entering = j
                    break
            if entering < 0:
                return None
            col = self.T[:, entering]
            best_row, best_ratio = -1, np.inf
            for i in range(self.m):
                if col[i] > self.pivot_tol:
                    ratio = max(self.rhs[i], 0.0) / col[i]
                    if ratio < best_ratio - 1e-13 or (
                        abs(ratio - best_ratio) <= 1e-13 and self.basis[i] < self.basis[best_row]
                    ):
                        best_row, best_ratio = i, ratio
            if best_row < 0:
                return entering
            self.pivot(best_row, entering)
        raise RuntimeError("simplex iteration limit reached")

    def binv(self) -> np.ndarray:
        return self.T[:, self.nv:]


def _trivial_infeasibility(b_ineq, b_eq, tol) -> np.ndarray | None:
    """Certificate when there are no variables at all."""
    k1, k2 = b_ineq.shape[0], b_eq.shape[0]
    for i in range(k1):
        if b_ineq[i] < -tol.eps_feas:
            cert = np.zeros(k1 + k2)
            cert[i] = 1.0
            return cert
    for i in range(k2):
        if abs(b_eq[i]) > tol.eps_feas:
            cert = np.zeros(k1 + k2)
            cert[k1 + i] = -np.sign(b_eq[i])
            return cert
    return None


def _normalize_cert(v: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(v)) if v.size else 0.0
    return v / scale if scale > 0 else v


def solve_lp(p: LpProblem, tol: Tolerance = DEFAULT_TOL) -> LpOutcome:
    """Two-phase primal simplex with Bland's anti-cycling rule.

    Free variables are split as x = x+ - x-; inequality rows get slacks.
    The Farkas vector for an infeasible problem is (y, v) with y >= 0,
    A_ineq^T y + A_eq^T v = 0 and b_ineq.y + b_eq.v < 0.
    Optimal duals satisfy A_ineq^T y + A_eq^T v = c for "max" and = -c for
    "min", with y >= 0 in both cases.
    """
    n = p.n
    A, b, E, f = p.A_ineq, p.b_ineq, p.A_eq, p.b_eq
    k1, k2 = A.shape[0], E.shape[0]
    c = p.c if p.sense == "max" else -p.c
    if n == 0:
        cert = _trivial_infeasibility(b, f, tol)
        if cert is not None:
            return Infeasible(cert)
        return Optimal(np.zeros(0), 0.0, np.zeros(k1), np.zeros(k2))

    m = k1 + k2
    if m == 0:
        if np.max(np.abs(c)) > tol.eps_zero:
            return Unbounded(_normalize_cert(c.copy()))
        return Optimal(np.zeros(n), 0.0, np.zeros(0), np.zeros(0))

    # columns: x+ (n), x- (n), slacks (k1)
    M = np.zeros((m, 2 * n + k1))
    M[:k1, :n] = A
    M[:k1, n:2 * n] = -A
    M[:k1, 2 * n:] = np.eye(k1)
    M[k1:, :n] = E
    M[k1:, n:2 * n] = -E
    r = np.concatenate([b, f])
    signs = np.where(r < 0, -1.0, 1.0)
    M *= signs[:, None]
    r = r * signs
    nv = M.shape[1]

    pivot_tol = 1e-9
    rc_tol = min(tol.eps_opt, 1e-9)
    tab = _Tableau(M, r, pivot_tol)

    # phase 1: maximize -sum(artificials)
    cost1 = np.concatenate([np.zeros(nv), -np.ones(m)])
    tab.run(cost1, nv, rc_tol)
    infeas = float(np.sum(tab.rhs[[i for i, j in enumerate(tab.basis) if j >= nv]])) \
        if any(j >= nv for j in tab.basis) else 0.0
    if infeas > tol.eps_feas:
        pi = cost1[tab.basis] @ tab.binv()
        # pi is the dual of the phase-1 max; g = sign-corrected weights on the original rows
        g = signs * pi
        return Infeasible(_normalize_cert(g))

    # drive zero-level artificials out of the basis where possible
    for i in range(m):
        if tab.basis[i] >= nv:
            row = tab.T[i, :nv]
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > pivot_tol:
                tab.pivot(i, j)

    cost2 = np.concatenate([c, -c, np.zeros(k1), np.zeros(m)])
    entering = tab.run(cost2, nv, rc_tol)
    if entering is not None:
        z = np.zeros(nv + m)
        z[entering] = 1.0
        for i, j in enumerate(tab.basis):
            z[j] = -tab.T[i, entering]
        ray = z[:n] - z[n:2 * n]
        return Unbounded(_normalize_cert(ray))

    # refine the primal point by solving with the final basis
    B = np.hstack([M, np.eye(m)])[:, tab.basis]
    try:
        zb = np.linalg.solve(B, r)
    except np.linalg.LinAlgError:
        zb = tab.rhs.copy()
    z = np.zeros(nv + m)
    z[tab.basis] = np.maximum(zb, 0.0)
    x = z[:n] - z[n:2 * n]
    pi = cost2[tab.basis] @ tab.binv()
    g = signs * pi
    dual_ineq = np.maximum(g[:k1], 0.0)
    dual_eq = g[k1:]
    value = float(p.c @ x)
    return Optimal(x, value, dual_ineq, dual_eq)


def lp_feasible_point(A, b, E, f, n: int, tol: Tolerance = DEFAULT_TOL) -> np.ndarray | None:
    out = solve_lp(LpProblem(np.zeros(n), A, b, E, f), tol)
    return out.x if isinstance(out, Optimal) else None


# ---------------------------------------------------------------------------
# Subspaces


def _rank_cutoff(s: np.ndarray, shape, tol: Tolerance) -> float:
    smax = s[0] if s.size else 0.0
    return tol.eps_zero * max(1.0, smax) * max(shape) * 10


def matrix_rank(M, tol: Tolerance = DEFAULT_TOL) -> int:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > _rank_cutoff(s, M.shape, tol)))


def null_space(M, n: int | None = None, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of {x : Mx = 0}."""
    M = as_matrix(M, n)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > _rank_cutoff(s, M.shape, tol)))
    return vt[rank:].T.copy()


def span_basis(vectors, n: int | None = None, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the span of the given row vectors."""
    V = as_matrix(vectors, n)
    n = V.shape[1]
    if V.shape[0] == 0:
        return np.zeros((n, 0))
    u, s, _ = np.linalg.svd(V.T, full_matrices=False)
    rank = int(np.sum(s > _rank_cutoff(s, V.shape, tol)))
    return u[:, :rank].copy()


def orthogonal_complement(basis, n: int, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the complement of span(columns of basis)."""
    B = np.asarray(basis, dtype=float).reshape(n, -1)
    return null_space(B.T, n, tol)


# ---------------------------------------------------------------------------
# Double description


@dataclass
class GeneratorRep:
    """cone(rays) + span(lines); rays and lines stored as rows."""

    rays: np.ndarray
    lines: np.ndarray
    dim: int = field(default=-1)

    def __post_init__(self):
        if self.dim < 0:
            for arr in (self.rays, self.lines):
                a = np.asarray(arr, dtype=float)
                if a.ndim == 2 and a.shape[1] > 0:
                    self.dim = a.shape[1]
                    break
            else:
                raise DimensionMismatch("dimension of an empty generator set must be given")
        self.rays = as_matrix(self.rays, self.dim)
        self.lines = as_matrix(self.lines, self.dim)

    def is_zero(self) -> bool:
        return self.rays.shape[0] == 0 and self.lines.shape[0] == 0

    def all_vectors(self) -> np.ndarray:
        return np.vstack([self.rays, self.lines, -self.lines])


def _unit_max(v: np.ndarray) -> np.ndarray:
    return v / np.max(np.abs(v))


def _pointed_dd(B: np.ndarray, tol: Tolerance) -> np.ndarray:
    """Extreme rays of the pointed cone {y : By <= 0} whose B has full column rank."""
    m, k = B.shape
    # pick k linearly independent rows greedily for the initial simplicial cone
    chosen: list[int] = []
    for i in range(m):
        trial = chosen + [i]
        if matrix_rank(B[trial], tol) == len(trial):
            chosen = trial
            if len(chosen) == k:
                break
    base = B[chosen]
    inv = np.linalg.inv(base)
    rays = [-inv[:, j] for j in range(k)]
    rays = [_unit_max(r) for r in rays]
    processed = list(chosen)
    scale = max(1.0, float(np.max(np.abs(B))))
    zero_tol = tol.eps_zero * 1e3 * scale

    def active_set(r):
        vals = B[processed] @ r
        return frozenset(processed[i] for i in range(len(processed)) if abs(vals[i]) <= zero_tol)

    actives = [active_set(r) for r in rays]
    for i in range(m):
        if i in chosen:
            continue
        row = B[i]
        vals = np.array([row @ r for r in rays])
        pos = [j for j in range(len(rays)) if vals[j] > zero_tol]
        neg = [j for j in range(len(rays)) if vals[j] < -zero_tol]
        zer = [j for j in range(len(rays)) if abs(vals[j]) <= zero_tol]
        new_rays = [rays[j] for j in neg + zer]
        for a in pos:
            for bq in neg:
                common = actives[a] & actives[bq]
                if len(common) < k - 2:
                    continue
                if k >= 2 and matrix_rank(B[sorted(common)], tol) != k - 2:
                    continue
                if k == 1:
                    continue
                # combinatorial check: no other ray shares the common active set
                adjacent = True
                for c_idx in range(len(rays)):
                    if c_idx in (a, bq):
                        continue
                    if common <= actives[c_idx]:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                r = vals[a] * rays[bq] - vals[bq] * rays[a]
                if np.max(np.abs(r)) <= zero_tol:
                    continue
                new_rays.append(_unit_max(r))
        processed.append(i)
        rays = new_rays
        actives = [active_set(r) for r in rays]
        if not rays:
            break
    # dedupe
    out: list[np.ndarray] = []
    for r in rays:
        if not any(np.max(np.abs(r - q)) <= 1e-9 for q in out):
            out.append(r)
    return np.array(out).reshape(-1, k)


def _check_caps(n: int, rows: int):
    if n > DD_MAX_DIM or rows > DD_MAX_ROWS:
        raise ScaleCapExceeded(
            f"double description limited to dimension <= {DD_MAX_DIM} and <= {DD_MAX_ROWS} rows"
        )


def dd_h_to_v(A, E, n: int | None = None, tol: Tolerance = DEFAULT_TOL) -> GeneratorRep:
    """Generators of the cone {w : Aw <= 0, Ew = 0}."""
    if n is None:
        for M in (A, E):
            arr = np.asarray(M, dtype=float) if M is not None else np.zeros(0)
            if arr.ndim == 2 and arr.shape[1] > 0:
                n = arr.shape[1]
                break
        else:
            raise DimensionMismatch("cannot infer dimension of the cone")
    A = as_matrix(A, n)
    E = as_matrix(E, n)
    _check_caps(n, A.shape[0] + E.shape[0])
    L = null_space(np.vstack([A, E]), n, tol)  # lineality, columns
    lines = np.array([_unit_max(L[:, j]) for j in range(L.shape[1])]).reshape(-1, n)
    Q = null_space(np.vstack([E, L.T]), n, tol)  # complement of lineality inside ker E
    k = Q.shape[1]
    if k == 0:
        return GeneratorRep(np.zeros((0, n)), lines, n)
    B = A @ Q
    keep = [i for i in range(B.shape[0]) if np.max(np.abs(B[i])) > tol.eps_zero]
    B = B[keep]
    if B.shape[0] == 0:
        raise AssertionError("lineality computation left an unconstrained direction")
    Y = _pointed_dd(B, tol)
    rays = np.array([_unit_max(Q @ y) for y in Y]).reshape(-1, n)
    rays = _sorted_rows(rays)
    return GeneratorRep(rays, lines, n)


def _sorted_rows(R: np.ndarray) -> np.ndarray:
    if R.shape[0] <= 1:
        return R
    order = np.lexsort(np.round(R, 12).T[::-1])
    return R[order]


def dd_v_to_h(g: GeneratorRep, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """H-representation (A, E) of cone(rays) + span(lines), as {w : Aw <= 0, Ew = 0}.

    Computed as the generators of the polar cone, since the polar of
    {a : a.r <= 0, a.l = 0} is the original cone.
    """
    polar = dd_h_to_v(g.rays, g.lines, g.dim, tol)
    return polar.rays, polar.lines


def cone_contains_h(A, E, w, tol: Tolerance = DEFAULT_TOL) -> bool:
    w = np.asarray(w, dtype=float)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    A = np.asarray(A, dtype=float).reshape(-1, w.shape[0])
    E = np.asarray(E, dtype=float).reshape(-1, w.shape[0])
    if A.shape[0] and np.max(A @ w) > tol.eps_feas * scale:
        return False
    if E.shape[0] and np.max(np.abs(E @ w)) > tol.eps_feas * scale:
        return False
    return True


def cone_contains_v(g: GeneratorRep, w, tol: Tolerance = DEFAULT_TOL) -> bool:
    """LP membership: w = R^T mu + L^T nu with mu >= 0."""
    w = as_vector(w, g.dim)
    nr, nl = g.rays.shape[0], g.lines.shape[0]
    if nr + nl == 0:
        return bool(np.max(np.abs(w)) <= tol.eps_feas) if w.size else True
    Aeq = np.hstack([g.rays.T, g.lines.T])
    Aineq = np.hstack([-np.eye(nr), np.zeros((nr, nl))])
    out = solve_lp(LpProblem(np.zeros(nr + nl), Aineq, np.zeros(nr), Aeq, w), tol)
    return isinstance(out, Optimal)


def stack(rows: Sequence[np.ndarray], n: int) -> np.ndarray:
    parts = [as_matrix(r, n) for r in rows if r is not None]
    return np.vstack(parts) if parts else np.zeros((0, n))
