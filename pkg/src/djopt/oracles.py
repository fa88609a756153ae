"""Definition-level sampling oracles.

These work from membership and distance alone (no cone formulas) and are
used to cross-check the closed-form computations. Sets are either a
PolyhedralSet or a ConstraintSet {x : G(x) ∈ D} given by expressions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import differentiate_at, evaluate_map, parse
from .numeric_core import DEFAULT_TOL, LpProblem, Optimal, Tolerance, as_vector, solve_lp
from .polyhedra import PolyhedralSet, distance_inf, nearest_point_inf
from .supports import MINUS_INF, PLUS_INF, ExtReal


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0x5EED
    t0: float = 0.1
    ratio: float = 0.5
    count: int = 20
    probe_count: int = 64
    delta: float = 1.0
    rho: float = 0.5
    accept_tol: float = 1e-6

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.delta <= 0 or self.rho <= 0 or self.t0 <= 0:
            raise ValueError("t0, delta and rho must be positive")

    def t_sequence(self) -> np.ndarray:
        return self.t0 * self.ratio ** np.arange(self.count)

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])


class ConstraintSet:
    """Γ = {x : G(x) ∈ D} for expression-defined G."""

    def __init__(self, exprs, D: PolyhedralSet):
        self.exprs = [parse(e) if isinstance(e, str) else e for e in exprs]
        self.D = D
        if len(self.exprs) != D.dim:
            raise ValueError("number of constraint expressions must equal the dimension of D")

    def residual(self, x) -> float:
        return distance_inf(self.D, evaluate_map(self.exprs, x))

    def contains(self, x, tol: Tolerance = DEFAULT_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return self.residual(x) <= tol.eps_feas * max(1.0, float(np.max(np.abs(x))))

    def project(self, y, iterations: int = 12, tol: Tolerance = DEFAULT_TOL):
        """Nearby point of Γ by repeated linearized max-norm projections, one
        run per piece of D; returns (distance, point) or (inf, None)."""
        y = as_vector(y)
        n = y.shape[0]
        best = (math.inf, None)
        for piece in self.D.pieces:
            x = y.copy()
            ok = False
            for _ in range(iterations):
                m = differentiate_at(self.exprs, x)
                Gx, J = m.value, m.jacobian
                # variables (d, t): min t, |x + d - y| <= t, G + J d in piece
                I = np.eye(n)
                one = np.ones((n, 1))
                A = np.vstack([
                    np.hstack([I, -one]),
                    np.hstack([-I, -one]),
                    np.hstack([piece.A @ J, np.zeros((piece.A.shape[0], 1))]),
                ])
                b = np.concatenate([y - x, x - y, piece.b - piece.A @ Gx])
                E = np.hstack([piece.E @ J, np.zeros((piece.E.shape[0], 1))])
                f = piece.f - piece.E @ Gx
                c = np.zeros(n + 1)
                c[-1] = 1.0
                out = solve_lp(LpProblem(c, A, b, E, f, sense="min"), tol)
                if not isinstance(out, Optimal):
                    break
                step = out.x[:n]
                x = x + step
                gval = evaluate_map(self.exprs, x)
                ok = piece.contains(gval, Tolerance(1e-12, 1e-13, 1e-12))
                if ok and np.max(np.abs(step)) < 1e-14:
                    break
            if ok:
                d = float(np.max(np.abs(x - y)))
                if d < best[0]:
                    best = (d, x)
        return best


# projections at scale t must not be rounded to zero by the feasibility tolerance,
# otherwise dist/t collapses once t * dist drops below eps_feas
PROJECTION_TOL = Tolerance(1e-13, 1e-14, 1e-13)


def _project(S, y):
    if isinstance(S, PolyhedralSet):
        return nearest_point_inf(S, y, PROJECTION_TOL)
    return S.project(y)


def _distance(S, y) -> float:
    return _project(S, y)[0]


def tangent_membership_oracle(S, z, w, cfg: SamplerConfig = SamplerConfig()) -> bool:
    """w is tangent iff dist(z + t w, S)/t -> 0 along the t-sequence."""
    z = as_vector(z)
    w = as_vector(w, z.shape[0])
    ts = cfg.t_sequence()
    ratios = [_distance(S, z + t * w) / t for t in ts]
    t_last = ts[-1]
    threshold = cfg.accept_tol + 10.0 * t_last * (1.0 + float(w @ w))
    return min(ratios[-3:]) <= threshold


def second_order_tangent_oracle(S, z, w, s, cfg: SamplerConfig = SamplerConfig()) -> bool:
    """s belongs to the second-order tangent set iff
    2 dist(z + t w + t²s/2, S)/t² -> 0. Only t >= 1e-4 is used so that the
    t² scale stays far above rounding error."""
    z = as_vector(z)
    w = as_vector(w, z.shape[0])
    s = as_vector(s, z.shape[0])
    ts = [t for t in cfg.t_sequence() if t >= 1e-4]
    ratios = [2.0 * _distance(S, z + t * w + 0.5 * t * t * s) / (t * t) for t in ts]
    t_last = ts[-1]
    threshold = cfg.accept_tol + 10.0 * t_last * (1.0 + float(s @ s) + float(w @ w))
    return min(ratios[-2:]) <= threshold


@dataclass
class Band:
    lo: ExtReal
    hi: ExtReal
    values: list[float]

    def contains(self, v: ExtReal, atol: float = 1e-6) -> bool:
        return self.lo.value - atol <= v.value <= self.hi.value + atol

    def classification(self) -> str:
        if self.lo == PLUS_INF:
            return "+inf"
        if self.hi == MINUS_INF:
            return "-inf"
        return "finite"


def _quotient_polyhedral(S: PolyhedralSet, z, zstar, w, t: float, radius: float, tol: Tolerance) -> float:
    """inf of -2<z*, w'>/t over w' with z + t w' ∈ S and |w' - w|_inf <= radius."""
    n = S.dim
    best = -math.inf
    for p in S.pieces:
        # rows divided by t keep the tolerance meaningful for tiny t
        A = np.vstack([p.A, np.eye(n), -np.eye(n)])
        b = np.concatenate([(p.b - p.A @ z) / t, w + radius, radius - w])
        E = p.E
        f = (p.f - p.E @ z) / t
        out = solve_lp(LpProblem(zstar, A, b, E, f), tol)
        if isinstance(out, Optimal):
            best = max(best, out.value)
    if best == -math.inf:
        return math.inf
    return -2.0 * best / t


def _quotient_sampled(S: "ConstraintSet", z, zstar, w, t: float, radius: float, rng) -> float:
    n = z.shape[0]
    best = math.inf
    probes = [np.zeros(n)] + [rng.uniform(-1, 1, n) for _ in range(24)]
    for xi in probes:
        wp = w + radius * xi
        d, x = S.project(z + t * wp)
        if x is None:
            continue
        w2 = (x - z) / t
        if np.max(np.abs(w2 - w)) <= 2 * radius:
            best = min(best, -2.0 * float(zstar @ w2) / t)
    return best


def d2_indicator_oracle(S, z, zstar, w, cfg: SamplerConfig = SamplerConfig(),
                        tol: Tolerance = DEFAULT_TOL) -> Band:
    """Grid liminf of the second-order difference quotient of the indicator.

    The neighbourhood radius shrinks like sqrt(t), so w' -> w while
    t^-1 |w' - w| still blows up; the last few values are classified as
    +inf, -inf or a finite band."""
    z = as_vector(z)
    n = z.shape[0]
    zstar = as_vector(zstar, n)
    w = as_vector(w, n)
    rng = cfg.rng(1)
    vals = []
    for t in cfg.t_sequence():
        radius = cfg.rho * math.sqrt(t)
        if isinstance(S, PolyhedralSet):
            vals.append(_quotient_polyhedral(S, z, zstar, w, t, radius, tol))
        else:
            vals.append(_quotient_sampled(S, z, zstar, w, t, radius, rng))
    tail = vals[-6:]
    if all(v == math.inf for v in tail):
        return Band(PLUS_INF, PLUS_INF, vals)
    finite_tail = [v for v in tail if math.isfinite(v)]
    if len(finite_tail) == len(tail):
        growing = all(abs(tail[i + 1]) >= 1.3 * abs(tail[i]) for i in range(len(tail) - 1))
        same_sign = all(v > 0 for v in tail) or all(v < 0 for v in tail)
        if growing and same_sign and abs(tail[-1]) > 1.0:
            return Band(PLUS_INF, PLUS_INF, vals) if tail[-1] > 0 else Band(MINUS_INF, MINUS_INF, vals)
        return Band(ExtReal(min(tail) - 1e-6), ExtReal(max(tail) + 1e-6), vals)
    return Band(ExtReal(min(finite_tail)) if finite_tail else MINUS_INF, PLUS_INF, vals)


def _in_direction_neighbourhood(d: np.ndarray, w: np.ndarray, delta: float, rho: float) -> bool:
    nd, nw = float(np.linalg.norm(d)), float(np.linalg.norm(w))
    if nd > delta:
        return False
    if nw == 0.0:
        return True
    return float(np.linalg.norm(nw * d - nd * w)) <= rho * nd * nw


def normal_limit_oracle(S: PolyhedralSet, z, w, cfg: SamplerConfig = SamplerConfig(),
                        tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Unit regular normals collected at points of S near z in direction w.

    Points z + t_k (ŵ + ρ_k ξ) with ρ_k = ρ sqrt(t_k / t_0) are projected onto
    S; those whose offset stays in the directional neighbourhood contribute the
    generators of their regular normal cones. Only the second half of the
    t-sequence is used, so the offsets are small against the data of S while
    the perturbation stays far above the projection tolerance."""
    from .cones import regular_normal_cone

    z = as_vector(z)
    n = z.shape[0]
    w = as_vector(w, n)
    directional = bool(np.any(w))
    unit_w = w / np.linalg.norm(w) if directional else np.zeros(n)
    rng = cfg.rng(2)
    found: list[np.ndarray] = []
    ts = cfg.t_sequence()
    start = cfg.count // 2 if directional else 0
    stop = min(cfg.count, start + max(4, cfg.count // 4))
    for t in ts[start:stop]:
        rho_k = cfg.rho * math.sqrt(t / cfg.t0)
        for _ in range(cfg.probe_count):
            xi = rng.normal(size=n)
            xi *= rng.random() / max(float(np.linalg.norm(xi)), 1e-12)
            d = t * (unit_w + (rho_k if directional else 1.0) * xi)
            _, y = nearest_point_inf(S, z + d, PROJECTION_TOL)
            if y is None:
                continue
            off = y - z
            if directional and not np.any(off):
                continue
            if not _in_direction_neighbourhood(off, w, cfg.delta, 2.0 * rho_k):
                continue
            N = regular_normal_cone(S, y, PROJECTION_TOL)
            g = N.pieces[0].generators
            for v in np.vstack([g.rays, g.lines, -g.lines]):
                v = v / np.linalg.norm(v)
                if not any(np.max(np.abs(v - q)) < 1e-9 for q in found):
                    found.append(v)
    return np.array(found).reshape(-1, n)
