"""Second-order analysis of constraint systems G(x) in D at a feasible point.

All objects are computed from the frozen derivatives of G at x̄ and the
tangent-cone structure of D at G(x̄). Formulas that need metric
subregularity are still evaluated when the first-order sufficient check
fails, but their results carry ``conditional=True``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import (
    limiting_normal_cone,
    regular_normal_cone,
    span_of_cone,
)
from .expr import SmoothMapAtPoint, differentiate_at, second_directional
from .numeric_core import (
    DEFAULT_TOL,
    GeneratorRep,
    LpProblem,
    Optimal,
    ScaleCapExceeded,
    Tolerance,
    Unbounded,
    as_vector,
    dd_h_to_v,
    dd_v_to_h,
    null_space,
    solve_lp,
)
from .polyhedra import (
    ConvexPolyhedron,
    PointNotInSet,
    PolyhedralCone,
    PolyhedralSet,
    contains,
    distance_inf,
    polar,
    tangent_cone,
)
from .supports import MINUS_INF, PLUS_INF, ExtReal

HOFFMAN_ROW_CAP = 16


class DirectionNotLinearized(ValueError):
    """The direction u does not satisfy ∇G(x̄)u ∈ T_D(G(x̄))."""


class MissingKappa(ValueError):
    pass


class AssumptionViolated(ValueError):
    pass


@dataclass
class SystemPoint:
    xbar: np.ndarray
    D: PolyhedralSet
    map: SmoothMapAtPoint
    kappa: float | None = None
    exprs: list | None = None

    def __post_init__(self):
        self.xbar = as_vector(self.xbar)
        if self.map.jacobian.shape != (self.D.dim, self.xbar.shape[0]):
            raise ValueError(
                f"jacobian shape {self.map.jacobian.shape} does not match "
                f"({self.D.dim}, {self.xbar.shape[0]})"
            )
        if not contains(self.D, self.map.value):
            raise PointNotInSet("G(x̄) is not in D", distance_inf(self.D, self.map.value))
        if self.kappa is not None and self.kappa <= 0:
            raise ValueError("kappa must be positive")

    @classmethod
    def from_exprs(cls, exprs, D: PolyhedralSet, xbar, kappa: float | None = None) -> "SystemPoint":
        return cls(as_vector(xbar), D, differentiate_at(exprs, xbar), kappa, list(exprs))

    @property
    def jacobian(self) -> np.ndarray:
        return self.map.jacobian

    @property
    def n(self) -> int:
        return self.xbar.shape[0]

    @property
    def d(self) -> int:
        return self.D.dim


class DirectionalSystem:
    """A system point together with a direction u of the linearized cone and
    the cones of D needed at (G(x̄), ∇G(x̄)u)."""

    def __init__(self, base: SystemPoint, u, tol: Tolerance = DEFAULT_TOL):
        self.base = base
        self.tol = tol
        self.u = as_vector(u, base.n)
        J = base.jacobian
        self.image_direction = J @ self.u
        self.tangent = tangent_cone(base.D, base.map.value, tol)
        if not contains(self.tangent, self.image_direction, tol):
            raise DirectionNotLinearized("∇G(x̄)u is not tangent to D at G(x̄)")
        self.second_tangent = tangent_cone(self.tangent, self.image_direction, tol)
        self.normal = limiting_normal_cone(self.tangent, self.image_direction, tol)
        self.regular_normal = regular_normal_cone(self.tangent, self.image_direction, tol)
        self.curvature = second_directional(base.map, self.u)
        self._foscms: CQResult | None = None

    @property
    def jacobian(self) -> np.ndarray:
        return self.base.jacobian

    @property
    def foscms(self) -> "CQResult":
        if self._foscms is None:
            self._foscms = foscms_check(self)
        return self._foscms

    @property
    def conditional(self) -> bool:
        """True when subregularity is not certified by the first-order check."""
        return not self.foscms.holds

    @property
    def mscq_status(self) -> str:
        return "FOSCMS verified" if self.foscms.holds else "conditional on MSCQ"


@dataclass
class CQResult:
    holds: bool
    witness: np.ndarray | None = None

    def __bool__(self):
        return self.holds


def _unit(v: np.ndarray) -> np.ndarray:
    m = np.max(np.abs(v))
    return v / m if m > 0 else v


def _preimage_piece(piece: ConvexPolyhedron, J: np.ndarray, shift: np.ndarray | None = None) -> ConvexPolyhedron:
    """{p : J p + shift ∈ piece} for a cone piece."""
    n = J.shape[1]
    if shift is None:
        return ConvexPolyhedron.cone(piece.A @ J, piece.E @ J, n)
    return ConvexPolyhedron(piece.A @ J, -piece.A @ shift, piece.E @ J, -piece.E @ shift, n)


def linearization_cone(sp: SystemPoint, tol: Tolerance = DEFAULT_TOL) -> PolyhedralCone:
    """{u : ∇G(x̄)u ∈ T_D(G(x̄))} as a union of pre-image cones."""
    T = tangent_cone(sp.D, sp.map.value, tol)
    return PolyhedralCone([_preimage_piece(p, sp.jacobian) for p in T.pieces], sp.n)


def preimage_cone(ds: DirectionalSystem) -> PolyhedralCone:
    """K = {p : ∇G(x̄)p ∈ T_{T_D}(∇G(x̄)u)}."""
    return PolyhedralCone([_preimage_piece(p, ds.jacobian) for p in ds.second_tangent.pieces], ds.base.n)


# --- constraint qualifications -------------------------------------------------


def foscms_check(ds: DirectionalSystem) -> CQResult:
    """No nonzero directional limiting normal lies in ker ∇G(x̄)^T."""
    Jt = ds.jacobian.T
    for piece in ds.normal.pieces:
        g = dd_h_to_v(piece.A, np.vstack([piece.E, Jt]), ds.base.d, ds.tol)
        if g.rays.shape[0]:
            return CQResult(False, _unit(g.rays[0]))
        if g.lines.shape[0]:
            return CQResult(False, _unit(g.lines[0]))
    return CQResult(True)


def _kernel_span_intersection(ds: DirectionalSystem) -> np.ndarray:
    """Basis (columns) of ker ∇G(x̄)^T ∩ span N_D(G(x̄); ∇G(x̄)u)."""
    B = span_of_cone(ds.normal, ds.tol)
    if B.shape[1] == 0:
        return B
    coeffs = null_space(ds.jacobian.T @ B, B.shape[1], ds.tol)
    return B @ coeffs


def nondegeneracy_check(ds: DirectionalSystem) -> CQResult:
    V = _kernel_span_intersection(ds)
    if V.shape[1] == 0:
        return CQResult(True)
    return CQResult(False, _unit(V[:, 0]))


def generalized_nondegeneracy_check(ds: DirectionalSystem) -> CQResult:
    """<v, ∇²G(x̄)(u,u)> = 0 for all v in ker ∇G^T ∩ span of the normal cone."""
    V = _kernel_span_intersection(ds)
    scale = max(1.0, float(np.max(np.abs(ds.curvature)))) if ds.curvature.size else 1.0
    for j in range(V.shape[1]):
        if abs(V[:, j] @ ds.curvature) > ds.tol.eps_feas * scale:
            return CQResult(False, _unit(V[:, j]))
    return CQResult(True)


# --- second-order tangent set and its support ----------------------------------


def second_order_tangent_gamma(ds: DirectionalSystem) -> PolyhedralSet:
    """{p : ∇G p + ∇²G(u,u) ∈ T_{T_D}(∇G u)}; exact under directional MSCQ
    (see ``ds.conditional``)."""
    J, c = ds.jacobian, ds.curvature
    return PolyhedralSet([_preimage_piece(p, J, c) for p in ds.second_tangent.pieces], ds.base.n)


@dataclass
class GammaSupport:
    value: ExtReal
    point: np.ndarray | None = None
    multiplier: np.ndarray | None = None
    piece: int | None = None
    multiplier_in_lambda: bool = False
    conditional: bool = False


def support_T2_gamma(ds: DirectionalSystem, xstar) -> GammaSupport:
    """Support function of the second-order tangent set with an LP-dual multiplier
    y* satisfying ∇G^T y* = x* and σ = -<y*, ∇²G(u,u)>."""
    tol = ds.tol
    xstar = as_vector(xstar, ds.base.n)
    J, c = ds.jacobian, ds.curvature
    best = GammaSupport(MINUS_INF, conditional=ds.conditional)
    for idx, piece in enumerate(ds.second_tangent.pieces):
        pre = _preimage_piece(piece, J, c)
        out = solve_lp(LpProblem(xstar, pre.A, pre.b, pre.E, pre.f), tol)
        if isinstance(out, Unbounded):
            return GammaSupport(PLUS_INF, piece=idx, conditional=ds.conditional)
        if isinstance(out, Optimal) and out.value > best.value.value:
            y = piece.A.T @ out.dual_ineq + piece.E.T @ out.dual_eq
            best = GammaSupport(ExtReal(out.value), out.x, y, idx, conditional=ds.conditional)
    if best.point is not None:
        _repair_multiplier(ds, xstar, best)
    return best


def _repair_multiplier(ds: DirectionalSystem, xstar: np.ndarray, res: GammaSupport):
    """Prefer a multiplier in the regular normal cone of T_{T_D}(∇Gu) at the
    optimal image point, which places it in the limiting cone at 0."""
    tol = ds.tol
    J, c = ds.jacobian, ds.curvature
    q = J @ res.point + c
    local = polar(tangent_cone(ds.second_tangent, q, tol), tol)
    if not local.contains(res.multiplier, tol):
        out = solve_lp(LpProblem(np.zeros(ds.base.d), local.A, None, np.vstack([local.E, J.T]),
                                 np.concatenate([np.zeros(local.E.shape[0]), xstar])), tol)
        if isinstance(out, Optimal):
            res.multiplier = out.x
    res.multiplier_in_lambda = bool(
        ds.normal.contains(res.multiplier, tol)
        and np.max(np.abs(J.T @ res.multiplier - xstar), initial=0.0) <= tol.eps_feas * max(1.0, float(np.max(np.abs(xstar), initial=0.0)))
    )


def second_subderivative_gamma(ds: DirectionalSystem, xstar) -> ExtReal:
    """Second subderivative of the indicator of Γ at x̄ for x* in direction u."""
    tol = ds.tol
    xstar = as_vector(xstar, ds.base.n)
    slope = float(xstar @ ds.u)
    scale = max(1.0, float(np.max(np.abs(xstar))) * max(1.0, float(np.max(np.abs(ds.u)))))
    if slope < -tol.eps_feas * scale:
        return PLUS_INF
    if slope > tol.eps_feas * scale:
        return MINUS_INF
    sigma = support_T2_gamma(ds, xstar).value
    return -sigma


# --- multipliers -----------------------------------------------------------------


@dataclass
class MultiplierSet:
    kind: str
    jac_t: np.ndarray
    rhs: np.ndarray
    cone: PolyhedralCone

    def contains(self, y, tol: Tolerance = DEFAULT_TOL) -> bool:
        y = as_vector(y, self.jac_t.shape[1])
        scale = max(1.0, float(np.max(np.abs(self.rhs), initial=0.0)))
        if np.max(np.abs(self.jac_t @ y - self.rhs), initial=0.0) > tol.eps_feas * scale:
            return False
        return self.cone.contains(y, tol)

    def piece_lps(self):
        """(A_ineq, b_ineq, A_eq, b_eq) per cone piece, in y-space."""
        for p in self.cone.pieces:
            yield p.A, np.zeros(p.A.shape[0]), np.vstack([p.E, self.jac_t]), \
                np.concatenate([np.zeros(p.E.shape[0]), self.rhs])

    def is_empty(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        d = self.jac_t.shape[1]
        for A, b, E, f in self.piece_lps():
            if isinstance(solve_lp(LpProblem(np.zeros(d), A, b, E, f), tol), Optimal):
                return False
        return True

    def coordinate_extent(self, tol: Tolerance = DEFAULT_TOL) -> list[tuple[float, float]]:
        """Per-coordinate min and max over the set (±inf when unbounded)."""
        d = self.jac_t.shape[1]
        out = []
        for i in range(d):
            e = np.zeros(d)
            e[i] = 1.0
            lo, hi = np.inf, -np.inf
            for A, b, E, f in self.piece_lps():
                for sense in ("min", "max"):
                    r = solve_lp(LpProblem(e, A, b, E, f, sense=sense), tol)
                    if isinstance(r, Unbounded):
                        if sense == "min":
                            lo = -np.inf
                        else:
                            hi = np.inf
                    elif isinstance(r, Optimal):
                        lo, hi = (min(lo, r.value), hi) if sense == "min" else (lo, max(hi, r.value))
            out.append((lo, hi))
        return out


def multiplier_set(ds: DirectionalSystem, xstar, kind: str = "M") -> MultiplierSet:
    """M: y* in N_{T_D}(∇Gu); S: y* in the regular normal cone of T_D at ∇Gu."""
    if kind not in ("M", "S"):
        raise ValueError("kind must be 'M' or 'S'")
    xstar = as_vector(xstar, ds.base.n)
    cone = ds.normal if kind == "M" else ds.regular_normal
    return MultiplierSet(kind, ds.jacobian.T.copy(), xstar, cone)


@dataclass
class MultiplierBounds:
    lower: ExtReal
    upper: ExtReal
    s_upper: ExtReal
    lower_point: np.ndarray | None = None
    upper_point: np.ndarray | None = None
    clipped: bool = False
    radius: float | None = None
    conditional: bool = False


def _extremes_over(mset: MultiplierSet, objective: np.ndarray, radius: float | None, tol: Tolerance):
    d = mset.jac_t.shape[1]
    lo, hi = PLUS_INF, MINUS_INF
    lo_pt = hi_pt = None
    for A, b, E, f in mset.piece_lps():
        if radius is not None:
            A = np.vstack([A, np.eye(d), -np.eye(d)])
            b = np.concatenate([b, np.full(2 * d, radius)])
        for sense in ("min", "max"):
            r = solve_lp(LpProblem(objective, A, b, E, f, sense=sense), tol)
            if isinstance(r, Unbounded):
                if sense == "min":
                    lo = MINUS_INF
                else:
                    hi = PLUS_INF
            elif isinstance(r, Optimal):
                if sense == "min" and r.value < lo.value:
                    lo, lo_pt = ExtReal(r.value), r.x
                if sense == "max" and r.value > hi.value:
                    hi, hi_pt = ExtReal(r.value), r.x
    return lo, hi, lo_pt, hi_pt


def multiplier_bounds(ds: DirectionalSystem, xstar, kappa: float | None = None,
                      require_kappa: bool = False) -> MultiplierBounds:
    """inf/sup of <y*, ∇²G(u,u)> over M-multipliers in the max-norm ball of
    radius κ‖x*‖₂ (which contains the Euclidean ball), plus the sup over
    S-multipliers. Without κ the bounds run over the whole set and
    ``clipped`` is False."""
    tol = ds.tol
    xstar = as_vector(xstar, ds.base.n)
    if kappa is None:
        kappa = ds.base.kappa
    if kappa is None and require_kappa:
        raise MissingKappa("clipped multiplier bounds need a subregularity modulus")
    radius = None if kappa is None else kappa * float(np.linalg.norm(xstar))
    M = multiplier_set(ds, xstar, "M")
    S = multiplier_set(ds, xstar, "S")
    lo, hi, lo_pt, hi_pt = _extremes_over(M, ds.curvature, radius, tol)
    _, s_hi, _, _ = _extremes_over(S, ds.curvature, None, tol)
    return MultiplierBounds(lo, hi, s_hi, lo_pt, hi_pt, radius is not None, radius, ds.conditional)


# --- translated-cone form --------------------------------------------------------


def common_lineality(K: PolyhedralCone, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Basis (columns) of the intersection of the piece lineality spaces."""
    rows = [np.vstack([p.A, p.E]) for p in K.pieces]
    return null_space(np.vstack(rows), K.dim, tol)


def gamma_shift_point(ds: DirectionalSystem) -> np.ndarray | None:
    """Minimal-norm p0 with ∇G p0 + ∇²G(u,u) in the lineality of T_{T_D}(∇Gu)."""
    J, c = ds.jacobian, ds.curvature
    L = common_lineality(ds.second_tangent, ds.tol)
    M = np.hstack([J, -L])
    sol, *_ = np.linalg.lstsq(M, -c, rcond=None)
    resid = M @ sol + c
    if np.max(np.abs(resid), initial=0.0) > ds.tol.eps_feas * max(1.0, float(np.max(np.abs(c), initial=0.0))):
        return None
    return sol[: J.shape[1]]


def lower_support_T2_gamma(ds: DirectionalSystem, xstar) -> ExtReal:
    """Lower generalized support of the second-order tangent set, using the
    representation p0 + K under the generalized nondegeneracy condition."""
    check = generalized_nondegeneracy_check(ds)
    if not check.holds:
        raise AssumptionViolated(
            "generalized nondegeneracy fails; use multiplier_bounds for two-sided estimates"
        )
    xstar = as_vector(xstar, ds.base.n)
    p0 = gamma_shift_point(ds)
    if p0 is None:
        raise AssumptionViolated("no shift point found in the common lineality space")
    K = preimage_cone(ds)
    N = limiting_normal_cone(K, np.zeros(ds.base.n), ds.tol)
    if not N.contains(xstar, ds.tol):
        return PLUS_INF
    return ExtReal(float(xstar @ p0))


# --- normal cone equalities ------------------------------------------------------


def image_cone(K: PolyhedralCone, M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> PolyhedralCone:
    """Union of M K_i, each computed from generators."""
    n = M.shape[0]
    pieces = []
    for p in K.pieces:
        g = p.generators
        A, E = dd_v_to_h(GeneratorRep(g.rays @ M.T, g.lines @ M.T, n), tol)
        pieces.append(ConvexPolyhedron.cone(A, E, n))
    return PolyhedralCone(pieces, n)


@dataclass
class NormalEqualityReport:
    image: PolyhedralCone
    tangent_normal: PolyhedralCone
    certified: bool
    foscms: bool
    note: str = ""


def directional_normal_equalities(ds: DirectionalSystem) -> NormalEqualityReport:
    """∇G(x̄)^T N_{T_D}(∇G u), which equals N_Γ(x̄;u) and N_{T_Γ}(u) under
    directional nondegeneracy; otherwise it is reported as an upper bound."""
    tol = ds.tol
    img = image_cone(ds.normal, ds.jacobian.T, tol)
    lin = linearization_cone(ds.base, tol)
    tn = limiting_normal_cone(lin, ds.u, tol)
    nondeg = nondegeneracy_check(ds).holds
    fos = ds.foscms.holds
    if nondeg:
        note = "all four sets coincide"
    elif fos:
        note = "upper bound only: N_Γ(x̄;u) ⊆ N_{T_Γ}(u) ⊆ image"
    else:
        note = "upper bound only, conditional on MSCQ"
    return NormalEqualityReport(img, tn, nondeg, fos, note)


# --- Hoffman-type modulus ----------------------------------------------------------


@dataclass
class KappaEstimate:
    value: float
    per_piece: list[float] = field(default_factory=list)
    valid: bool = True
    provenance: str = "ESTIMATE"
    note: str = ""


def _min_dual_norm(Ms: np.ndarray, tol: Tolerance) -> float:
    """min ||Ms^T v||_1 over v >= 0 with sum(v) = 1."""
    k, n = Ms.shape
    # variables (v, s): minimize sum s with -s <= Ms^T v <= s
    c = np.concatenate([np.zeros(k), np.ones(n)])
    A = np.vstack([
        np.hstack([Ms.T, -np.eye(n)]),
        np.hstack([-Ms.T, -np.eye(n)]),
        np.hstack([-np.eye(k), np.zeros((k, n))]),
    ])
    b = np.zeros(2 * n + k)
    E = np.concatenate([np.ones(k), np.zeros(n)])[None, :]
    out = solve_lp(LpProblem(c, A, b, E, [1.0], sense="min"), tol)
    assert isinstance(out, Optimal)
    return max(out.value, 0.0)


def hoffman_constant(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> float:
    """Max-norm Hoffman constant of {p : M p <= b} by enumerating the
    surjective row subsets (those with no nonnegative combination vanishing)."""
    m = M.shape[0]
    if m > HOFFMAN_ROW_CAP:
        raise ScaleCapExceeded(f"Hoffman enumeration limited to {HOFFMAN_ROW_CAP} rows")
    best = 0.0
    cutoff = 1e-9

    def grow(chosen: list[int], start: int):
        nonlocal best
        extended = False
        for j in range(start, m):
            trial = chosen + [j]
            val = _min_dual_norm(M[trial], tol)
            if val > cutoff:
                extended = True
                best = max(best, 1.0 / val)
                grow(trial, j + 1)
        return extended

    grow([], 0)
    return best


def kappa_oracle(ds: DirectionalSystem) -> KappaEstimate:
    """A Hoffman-type constant for Φ(p) = ∇G p + ∇²G(u,u) - T_{T_D}(∇G u).

    Per piece K_i = {y : A y <= 0, E y = 0}: dist(p, {J p + c ∈ K_i}) is at
    most H(R J) * max_i ||R_i||_1 * dist(J p + c, K_i) with R = [A; E; -E].
    The maximum over pieces bounds the union when every piece pre-image is
    nonempty.
    """
    tol = ds.tol
    J, c = ds.jacobian, ds.curvature
    per_piece = []
    valid = True
    for piece in ds.second_tangent.pieces:
        pre = _preimage_piece(piece, J, c)
        if pre.is_empty(tol):
            valid = False
            continue
        R = np.vstack([piece.A, piece.E, -piece.E])
        if R.shape[0] == 0:
            per_piece.append(0.0)
            continue
        H = hoffman_constant(R @ J, tol)
        per_piece.append(H * float(np.max(np.sum(np.abs(R), axis=1))))
    value = max(per_piece) if per_piece else 0.0
    note = "" if valid else "some piece has an empty pre-image; the bound may fail far from x̄"
    return KappaEstimate(value if value > 0 else 1.0, per_piece, valid, "ESTIMATE", note)
