"""Critical cones and second-order optimality checks for

    minimize f(x)  subject to  g(x) ∈ D,   D a finite union of polyhedra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product

import numpy as np

from .cones import regular_normal_cone
from .expr import Var, differentiate_at, evaluate, evaluate_map, parse, second_directional
from .numeric_core import (
    DEFAULT_TOL,
    LpProblem,
    Optimal,
    Tolerance,
    Unbounded,
    as_vector,
    solve_lp,
)
from .polyhedra import (
    ConvexPolyhedron,
    PolyhedralCone,
    PolyhedralSet,
    contains,
    distance_inf,
    tangent_cone,
)
from .systems import DirectionalSystem, SystemPoint, multiplier_set, nondegeneracy_check

DEFAULT_SEED = 0x5EED
LINEALITY_SPLIT_CAP = 6


class ProblemPoint:
    """A candidate point x̄ of min f(x) s.t. g(x) ∈ D with derivatives at x̄.

    An empty constraint list means the unconstrained problem (g = id, D = R^n).
    """

    def __init__(self, objective, constraints, D: PolyhedralSet | None, xbar,
                 kappa: float | None = None, tol: Tolerance = DEFAULT_TOL):
        self.xbar = as_vector(xbar)
        n = self.xbar.shape[0]
        self.objective = parse(objective) if isinstance(objective, str) else objective
        constraints = [parse(c) if isinstance(c, str) else c for c in constraints]
        if not constraints:
            constraints = [Var(i + 1) for i in range(n)]
            D = PolyhedralSet([ConvexPolyhedron.whole_space(n)], n)
        if D is None:
            raise ValueError("a constraint set D is required when constraints are given")
        self.constraints = constraints
        self.D = D
        self.tol = tol
        self.f_map = differentiate_at([self.objective], self.xbar)
        self.g_map = differentiate_at(constraints, self.xbar)
        self.system = SystemPoint(self.xbar, D, self.g_map, kappa, constraints)
        self.kappa = kappa

    @property
    def n(self) -> int:
        return self.xbar.shape[0]

    @property
    def grad_f(self) -> np.ndarray:
        return self.f_map.jacobian[0]

    @property
    def hess_f(self) -> np.ndarray:
        return self.f_map.hessians[0]

    @property
    def jacobian(self) -> np.ndarray:
        return self.g_map.jacobian

    @property
    def f_value(self) -> float:
        return float(self.f_map.value[0])

    def lagrangian_hessian(self, alpha: float, lam) -> np.ndarray:
        H = alpha * self.hess_f
        for li, Hi in zip(lam, self.g_map.hessians):
            H = H + li * Hi
        return 0.5 * (H + H.T)

    def f(self, x) -> float:
        return evaluate(self.objective, x)

    def infeasibility(self, x) -> float:
        return distance_inf(self.D, evaluate_map(self.constraints, x), self.tol)


# --- critical cone -----------------------------------------------------------


@dataclass
class RefinedPiece:
    """A sign cell of the critical cone: on its relative interior the image
    ∇g u sits in a fixed cell of the face arrangement of T_D(g(x̄))."""

    cone: ConvexPolyhedron
    direction: np.ndarray
    signs: tuple[int, ...]
    admissible_normal: ConvexPolyhedron

    @property
    def trivial(self) -> bool:
        return self.cone.generators.is_zero()


@dataclass
class CriticalCone:
    pieces: PolyhedralCone
    refinement: list[RefinedPiece]

    def contains(self, u, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.pieces.contains(u, tol)


def _canonical_row(r: np.ndarray) -> tuple[np.ndarray, float]:
    scale = float(np.max(np.abs(r)))
    v = r / scale
    lead = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
    sign = 1.0 if lead > 0 else -1.0
    return np.round(v * sign, 12) + 0.0, sign


def _arrangement(T: PolyhedralCone):
    """Distinct hyperplanes through the rows of T's pieces, and for every
    piece the list of (hyperplane, orientation, is_equality)."""
    planes: list[np.ndarray] = []
    index: dict[tuple, int] = {}
    usage = []
    for p in T.pieces:
        rows = []
        for kind, M in ((False, p.A), (True, p.E)):
            for r in M:
                if np.max(np.abs(r)) < 1e-12:
                    continue
                canon, sign = _canonical_row(r)
                key = tuple(canon)
                if key not in index:
                    index[key] = len(planes)
                    planes.append(canon)
                rows.append((index[key], sign, kind))
        usage.append(rows)
    return planes, usage


def _piece_compatible(rows, signs: dict[int, int]) -> bool:
    for k, sigma, is_eq in rows:
        if k not in signs:
            continue
        s = signs[k]
        if is_eq and s != 0:
            return False
        if not is_eq and sigma * s > 0:
            return False
    return True


def _cell_rows(funcs: list[np.ndarray], signs: dict[int, int], grad_f: np.ndarray, n: int, strict: bool):
    A, b, E = [grad_f], [0.0], []
    for k, s in signs.items():
        h = funcs[k]
        if s == 0:
            E.append(h)
        else:
            A.append(-s * h)
            b.append(-1.0 if strict else 0.0)
    A = np.array(A).reshape(-1, n)
    E = np.array(E).reshape(-1, n)
    return A, np.array(b), E


def _cell_point(funcs, signs, grad_f, n, tol) -> np.ndarray | None:
    A, b, E = _cell_rows(funcs, signs, grad_f, n, strict=True)
    out = solve_lp(LpProblem(np.zeros(n), A, b, E, np.zeros(E.shape[0])), tol)
    return out.x if isinstance(out, Optimal) else None


def critical_cone(pp: ProblemPoint) -> CriticalCone:
    """{u : ∇g u ∈ T_D(g(x̄)), ∇f u <= 0}, with its sign-cell refinement."""
    tol = pp.tol
    n = pp.n
    J = pp.jacobian
    gf = pp.grad_f
    T = tangent_cone(pp.D, pp.g_map.value, tol)
    pieces = []
    for K in T.pieces:
        A = np.vstack([K.A @ J, gf[None, :]])
        pieces.append(ConvexPolyhedron.cone(A, K.E @ J, n))
    cone = PolyhedralCone(pieces, n)

    planes, usage = _arrangement(T)
    funcs = [h @ J for h in planes]
    forced = {k: 0 for k, h in enumerate(funcs) if np.max(np.abs(h)) <= 1e-12}
    free = [k for k in range(len(funcs)) if k not in forced]
    refinement: list[RefinedPiece] = []

    def visit(pos: int, signs: dict[int, int]):
        if not any(_piece_compatible(rows, signs) for rows in usage):
            return
        point = _cell_point(funcs, signs, gf, n, tol)
        if point is None:
            return
        if pos == len(free):
            A, b, E = _cell_rows(funcs, signs, gf, n, strict=False)
            closure = ConvexPolyhedron.cone(A, E, n)
            if not np.any(point):
                # only equality signs: the closure is the cell itself
                g = closure.generators
                point = g.rays.sum(axis=0) + g.lines.sum(axis=0)
            N = regular_normal_cone(T, J @ point, tol).pieces[0]
            key = tuple(signs[k] for k in range(len(funcs)))
            refinement.append(RefinedPiece(closure, point, key, N))
            return
        k = free[pos]
        for s in (1, 0, -1):
            signs[k] = s
            visit(pos + 1, signs)
            del signs[k]

    visit(0, dict(forced))
    return CriticalCone(cone, refinement)


# --- reports ---------------------------------------------------------------------


@dataclass
class CheckReport:
    verdict: str
    detail: str = ""
    witness: np.ndarray | None = None
    value: float | None = None
    multiplier: np.ndarray | None = None
    alpha: float | None = None
    margin: float | None = None
    conditional: bool = False
    sub_reports: list["CheckReport"] = field(default_factory=list)
    certificates: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "detail": self.detail, "conditional": self.conditional}
        for name in ("witness", "multiplier"):
            v = getattr(self, name)
            if v is not None:
                out[name] = [float(t) for t in v]
        for name in ("value", "alpha", "margin"):
            v = getattr(self, name)
            if v is not None:
                out[name] = float(v) if math.isfinite(v) else ("+inf" if v > 0 else "-inf")
        if self.sub_reports:
            out["pieces"] = [r.to_json() for r in self.sub_reports]
        if self.certificates:
            out["certificates"] = self.certificates
        return out


# --- copositivity ----------------------------------------------------------------


@dataclass
class CopositivityResult:
    status: str  # "Proven" | "Disproven" | "Unknown"
    witness: np.ndarray | None = None
    margin: float | None = None
    leaves: int = 0


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _gram_bound(gram: np.ndarray) -> float:
    """Largest b with uᵀQu >= b (Σμ)² for all u = Σ μ_i g_i, μ >= 0, from
    the smallest diagonal d and smallest off-diagonal o of the Gram matrix:
    uᵀQu = (d - o)Σμ² + o(Σμ)² + (nonnegative rest)."""
    m = gram.shape[0]
    d = float(np.min(np.diag(gram)))
    if m == 1:
        return d
    o = float(np.min(gram[~np.eye(m, dtype=bool)]))
    return (d - o) / m + o if d >= o else d


def copositivity_test(Q, P, depth: int = 12, tol: Tolerance = DEFAULT_TOL) -> CopositivityResult:
    """Decide uᵀQu > 0 on P minus the origin by generator bisection.

    P is a cone (ConvexPolyhedron) or a GeneratorRep. On a cone generated by
    unit vectors g_i, the Gram matrix bounds uᵀQu from below by a multiple
    of ‖u‖² (see _gram_bound). When that bound is not positive the cone is
    split at the normalised midpoint of the worst pair, which covers it for
    any generating set.
    Lines are handled by splitting into the sign orthants of the lineality.
    """
    Q = np.asarray(Q, dtype=float)
    Q = 0.5 * (Q + Q.T)
    gens = P.generators if isinstance(P, ConvexPolyhedron) else P
    rays = [_unit(r) for r in gens.rays]
    lines = [_unit(l) for l in gens.lines]
    if not rays and not lines:
        return CopositivityResult("Proven", None, math.inf, 0)
    for v in rays + lines:
        if float(v @ Q @ v) <= 0.0:
            return CopositivityResult("Disproven", v, None, 0)
    if len(lines) > LINEALITY_SPLIT_CAP:
        return CopositivityResult("Unknown", None, None, 0)
    tiny = tol.eps_zero * max(1.0, float(np.max(np.abs(Q))))
    stack = []
    for signs in product((1.0, -1.0), repeat=len(lines)):
        stack.append(([*rays, *(s * l for s, l in zip(signs, lines))], 0))
    margin = math.inf
    leaves = 0
    unknown = False
    while stack:
        G, level = stack.pop()
        M = np.array(G)
        gram = M @ Q @ M.T
        bound = _gram_bound(gram)
        if bound > tiny:
            margin = min(margin, bound)
            leaves += 1
            continue
        if level >= depth:
            unknown = True
            leaves += 1
            continue
        i, j = np.unravel_index(int(np.argmin(gram)), gram.shape)
        if i == j:
            # a non-positive diagonal entry is a direct counterexample
            if gram[i, i] <= 0.0:
                return CopositivityResult("Disproven", G[i], None, leaves)
            unknown = True
            continue
        mid = G[i] + G[j]
        if np.linalg.norm(mid) <= 1e-14:
            # opposite generators span a line: Q must be positive on it
            unknown = True
            continue
        mid = _unit(mid)
        qm = float(mid @ Q @ mid)
        if qm <= 0.0:
            return CopositivityResult("Disproven", mid, None, leaves)
        left = list(G)
        left[j] = mid
        right = list(G)
        right[i] = mid
        stack.append((left, level + 1))
        stack.append((right, level + 1))
    if unknown:
        return CopositivityResult("Unknown", None, None, leaves)
    return CopositivityResult("Proven", None, margin, leaves)


# --- necessary condition -------------------------------------------------------


def _direction_is_critical(pp: ProblemPoint, u: np.ndarray) -> bool:
    tol = pp.tol
    scale = max(1.0, float(np.max(np.abs(u))) * max(1.0, float(np.max(np.abs(pp.grad_f)))))
    if float(pp.grad_f @ u) > tol.eps_feas * scale:
        return False
    T = tangent_cone(pp.D, pp.g_map.value, tol)
    return contains(T, pp.jacobian @ u, tol)


def necessary_check(pp: ProblemPoint, u, mode: str = "M", kappa: float | None = None) -> CheckReport:
    """Second-order necessary condition in a critical direction u.

    With x* = -∇f(x̄) the multiplier set is {λ : ∇gᵀλ = x*} intersected with
    the limiting (mode M) or regular (mode S) normal cone of T_D at ∇g u.
    The condition asks for some λ with uᵀ∇²f u + Σ λ_i uᵀ∇²g_i u >= 0.
    """
    if mode not in ("M", "S"):
        raise ValueError("mode must be 'M' or 'S'")
    tol = pp.tol
    u = as_vector(u, pp.n)
    if not _direction_is_critical(pp, u):
        raise ValueError("u is not a critical direction")
    ds = DirectionalSystem(pp.system, u, tol)
    xstar = -pp.grad_f
    mset = multiplier_set(ds, xstar, mode)
    if mode == "M":
        qualified = ds.foscms.holds
        conditional = not qualified
        tag = ds.mscq_status
    else:
        qualified = nondegeneracy_check(ds).holds
        conditional = not qualified
        tag = "nondegenerate" if qualified else "nondegeneracy fails"
    kappa = kappa if kappa is not None else pp.kappa
    radius = None if kappa is None else kappa * float(np.linalg.norm(xstar))
    base = float(u @ pp.hess_f @ u)
    curv = ds.curvature
    d = curv.shape[0]

    best, best_lam, unbounded = -math.inf, None, False
    for A, b, E, f in mset.piece_lps():
        if radius is not None:
            A = np.vstack([A, np.eye(d), -np.eye(d)])
            b = np.concatenate([b, np.full(2 * d, radius)])
        r = solve_lp(LpProblem(curv, A, b, E, f), tol)
        if isinstance(r, Unbounded):
            unbounded = True
            break
        if isinstance(r, Optimal) and r.value > best:
            best, best_lam = r.value, r.x
    certs = {"mscq": tag, "mode": mode}
    if unbounded:
        return CheckReport("Satisfied", "sup over multipliers is +inf", None, math.inf,
                           conditional=conditional, certificates=certs)
    if best_lam is None:
        if qualified:
            return CheckReport("Violated", "no multiplier exists in this direction", u, -math.inf,
                               conditional=False, certificates=certs)
        return CheckReport("Unknown", f"empty multiplier set and {tag}", conditional=True, certificates=certs)
    value = base + best
    if value >= -tol.eps_opt:
        return CheckReport("Satisfied", "", None, value, best_lam, 1.0, conditional=conditional,
                           certificates=certs)
    if mode == "S" and not qualified:
        return CheckReport("Unknown", "negative value but nondegeneracy fails", None, value, best_lam,
                           conditional=True, certificates=certs)
    # re-check the witness by direct evaluation
    recheck = float(u @ pp.lagrangian_hessian(1.0, best_lam) @ u)
    if not (_direction_is_critical(pp, u) and mset.contains(best_lam, tol) and abs(recheck - value) <= 1e-7 * max(1.0, abs(value))):
        return CheckReport("Unknown", "witness failed re-check", None, value, conditional=conditional,
                           certificates=certs)
    return CheckReport("Violated", f"largest second-order value {value:.6g} < 0", u, value, best_lam, 1.0,
                       conditional=conditional, certificates=certs)


# --- sufficient condition ----------------------------------------------------------


def _admissible_lp(pp: ProblemPoint, N: ConvexPolyhedron, alpha: float):
    """λ-polytope: λ ∈ N, ∇gᵀλ = -α∇f, |λ|_inf <= 1."""
    d = pp.D.dim
    A = np.vstack([N.A, np.eye(d), -np.eye(d)])
    b = np.concatenate([np.zeros(N.A.shape[0]), np.ones(2 * d)])
    E = np.vstack([N.E, pp.jacobian.T])
    f = np.concatenate([np.zeros(N.E.shape[0]), -alpha * pp.grad_f])
    return A, b, E, f


def _pair_vectors(cone: ConvexPolyhedron):
    g = cone.generators
    vecs = [_unit(r) for r in g.rays]
    signed_lines = []
    for i, l in enumerate(g.lines):
        vecs.append(_unit(l))
        vecs.append(-_unit(l))
        signed_lines.append((len(vecs) - 2, len(vecs) - 1))
    skip = {frozenset(p) for p in signed_lines}
    pairs = [(i, j) for i, j in combinations_with_replacement(range(len(vecs)), 2) if frozenset((i, j)) not in skip]
    return vecs, pairs


def _candidates(pp: ProblemPoint, piece: RefinedPiece, alpha: float, tol: Tolerance) -> list[np.ndarray]:
    d = pp.D.dim
    A, b, E, f = _admissible_lp(pp, piece.admissible_normal, alpha)
    if not isinstance(solve_lp(LpProblem(np.zeros(d), A, b, E, f), tol), Optimal):
        return []
    cands: list[np.ndarray] = []
    zero = np.zeros(d)
    if alpha > 0 and np.max(np.abs(pp.jacobian.T @ zero + alpha * pp.grad_f)) <= tol.eps_feas and piece.admissible_normal.contains(zero, tol):
        cands.append(zero)

    # λ maximising the smallest pairwise form over generator pairs
    vecs, pairs = _pair_vectors(piece.cone)
    if pairs:
        rows, rhs = [], []
        for i, j in pairs:
            coeff = np.array([vecs[i] @ Hk @ vecs[j] for Hk in pp.g_map.hessians])
            const = alpha * float(vecs[i] @ pp.hess_f @ vecs[j])
            # t - coeff·λ <= const
            rows.append(np.concatenate([-coeff, [1.0]]))
            rhs.append(const)
        Am = np.vstack([np.hstack([A, np.zeros((A.shape[0], 1))]), np.array(rows)])
        bm = np.concatenate([b, rhs])
        tcap = np.zeros(d + 1)
        tcap[-1] = 1.0
        Am = np.vstack([Am, tcap])
        bm = np.concatenate([bm, [1.0]])
        Em = np.hstack([E, np.zeros((E.shape[0], 1))])
        c = np.zeros(d + 1)
        c[-1] = 1.0
        r = solve_lp(LpProblem(c, Am, bm, Em, f), tol)
        if isinstance(r, Optimal):
            cands.append(r.x[:d])

    # λ maximising the form in the representative direction
    u = piece.direction
    if np.any(u):
        curv = second_directional(pp.g_map, u)
        r = solve_lp(LpProblem(curv, A, b, E, f), tol)
        if isinstance(r, Optimal):
            cands.append(r.x)

    # vertices in the coordinate directions
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        for sense in ("max", "min"):
            r = solve_lp(LpProblem(e, A, b, E, f, sense=sense), tol)
            if isinstance(r, Optimal):
                cands.append(r.x)

    out: list[np.ndarray] = []
    for lam in cands:
        if alpha == 0 and np.max(np.abs(lam)) <= tol.eps_zero:
            continue
        if not any(np.max(np.abs(lam - o)) <= 1e-12 for o in out):
            out.append(lam)
    return out


def _prove_piece(pp: ProblemPoint, piece: RefinedPiece, depth: int, tol: Tolerance) -> CheckReport:
    tried = 0
    for alpha in (1.0, 0.0):
        for lam in _candidates(pp, piece, alpha, tol):
            tried += 1
            Q = pp.lagrangian_hessian(alpha, lam)
            res = copositivity_test(Q, piece.cone, depth, tol)
            if res.status == "Proven":
                # report the pair scaled to alpha + |lambda|_1 = 1
                scale = alpha + float(np.sum(np.abs(lam)))
                margin = res.margin / scale
                return CheckReport("Proven", f"copositive with margin {margin:.6g}", None, None,
                                   lam / scale, alpha / scale, margin,
                                   certificates={"signs": list(piece.signs), "leaves": res.leaves})
    return CheckReport("Unknown", f"no certificate among {tried} candidate multipliers", piece.direction,
                       certificates={"signs": list(piece.signs)})


def sufficient_check(pp: ProblemPoint, depth: int = 12) -> CheckReport:
    """Second-order sufficient condition for an essential local minimizer.

    Each sign cell of the critical cone needs one (α, λ) with λ in the
    regular normal cone of T_D at the cell's image, ∇ₓL^α = 0 and
    uᵀ∇²L^α u > 0 on the cell. Failure to find one is Unknown, never
    Disproven.

    Certificates are scaled so that α + ‖λ‖₁ = 1; the reported margin is a
    lower bound of uᵀ∇²L^α u / ‖u‖² for that scaled pair.
    """
    tol = pp.tol
    cc = critical_cone(pp)
    subs = []
    for piece in cc.refinement:
        if piece.trivial:
            continue
        subs.append(_prove_piece(pp, piece, depth, tol))
    if not subs:
        return CheckReport("Proven", "critical cone is {0}", margin=math.inf)
    failing = [i for i, r in enumerate(subs) if r.verdict != "Proven"]
    if failing:
        return CheckReport("Unknown", f"no certificate on pieces {failing}", sub_reports=subs)
    margin = min(r.margin for r in subs)
    return CheckReport("Proven", f"all {len(subs)} pieces certified", margin=margin, sub_reports=subs)


# --- sampling oracles ---------------------------------------------------------------


@dataclass
class OracleVerdict:
    holds: bool
    point: np.ndarray | None = None
    checked: int = 0

    def __bool__(self):
        return self.holds


def halton_ball(n: int, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Scrambled Halton points mapped radially from the cube onto the unit ball."""
    from scipy.stats import qmc

    h = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
    c = 2.0 * h - 1.0
    inf = np.max(np.abs(c), axis=1)
    two = np.linalg.norm(c, axis=1)
    scale = np.divide(inf, two, out=np.zeros_like(inf), where=two > 0)
    return c * scale[:, None]


def _feasible_samples(pp: ProblemPoint, delta: float, count: int, seed: int) -> list[np.ndarray]:
    from .oracles import ConstraintSet

    Gamma = ConstraintSet(pp.constraints, pp.D)
    out = []
    for p in halton_ball(pp.n, count, seed + 1):
        y = pp.xbar + delta * p
        _, x = Gamma.project(y)
        if x is not None and np.linalg.norm(x - pp.xbar) <= delta:
            out.append(x)
    return out


def _growth_gap(pp: ProblemPoint, x: np.ndarray, eps: float, use_distance: bool) -> float:
    step = float(np.linalg.norm(x - pp.xbar))
    need = eps * step * step
    lhs = pp.f(x) - pp.f_value
    # the distance LP is only needed when the objective gap falls short
    if use_distance and lhs < need:
        lhs = max(lhs, pp.infeasibility(x))
    return lhs - need


def _slack(pp: ProblemPoint, x: np.ndarray) -> float:
    return 1e-12 * max(1.0, abs(pp.f_value), float(np.linalg.norm(x)) ** 2)


def essential_min_oracle(pp: ProblemPoint, eps: float, delta: float, samples: int = 10_000,
                         seed: int = DEFAULT_SEED, projected: int = 256) -> OracleVerdict:
    """Check max{f(x) - f(x̄), dist(g(x), D)} >= eps‖x - x̄‖² on Halton points
    of the delta-ball, plus a batch of those points moved onto the feasible set."""
    pts = [pp.xbar + delta * p for p in halton_ball(pp.n, samples, seed)]
    if projected:
        pts += _feasible_samples(pp, delta, projected, seed)
    for x in pts:
        if _growth_gap(pp, x, eps, True) < -_slack(pp, x):
            return OracleVerdict(False, x, len(pts))
    return OracleVerdict(True, None, len(pts))


def quadratic_growth_oracle(pp: ProblemPoint, eps: float, delta: float, samples: int = 1000,
                            seed: int = DEFAULT_SEED) -> OracleVerdict:
    """Check f(x) >= f(x̄) + eps‖x - x̄‖² on feasible points near x̄."""
    pts = _feasible_samples(pp, delta, samples, seed)
    for x in pts:
        if np.linalg.norm(x - pp.xbar) == 0.0:
            continue
        if _growth_gap(pp, x, eps, False) < -_slack(pp, x) and pp.infeasibility(x) <= 1e-9:
            return OracleVerdict(False, x, len(pts))
    return OracleVerdict(True, None, len(pts))


def find_descent(pp: ProblemPoint, delta: float, direction=None, samples: int = 512,
                 seed: int = DEFAULT_SEED) -> np.ndarray | None:
    """A feasible x with ‖x - x̄‖ <= delta and f(x) < f(x̄), if one is found
    along the given direction or among projected Halton samples."""
    from .oracles import ConstraintSet

    Gamma = ConstraintSet(pp.constraints, pp.D)
    cands = []
    if direction is not None:
        u = as_vector(direction, pp.n)
        u = u / np.linalg.norm(u)
        for t in delta * 0.9 * 0.5 ** np.arange(12):
            _, x = Gamma.project(pp.xbar + t * u)
            if x is not None:
                cands.append(x)
    cands += _feasible_samples(pp, delta, samples, seed)
    for x in cands:
        if np.linalg.norm(x - pp.xbar) > delta or pp.infeasibility(x) > 1e-9:
            continue
        if pp.f(x) < pp.f_value - 1e-13:
            return x
    return None
