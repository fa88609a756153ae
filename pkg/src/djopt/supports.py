"""Support functions, lower generalized support functions and second
subderivatives of indicator functions of polyhedral sets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from .cones import DirectionalContext, EmptyCone, in_cone_polar, second_order_tangent_set
from .numeric_core import DEFAULT_TOL, LpProblem, Optimal, ScaleCapExceeded, Tolerance, Unbounded, as_vector, solve_lp
from .polyhedra import Face, PointNotInSet, PolyhedralSet, contains, distance_inf, tangent_cone

ESCAPE_CAP = 4096


class UndefinedArithmetic(ArithmeticError):
    """inf - inf or a similar indeterminate extended-real combination."""


@total_ordering
class ExtReal:
    """A value in R together with +inf and -inf."""

    __slots__ = ("value",)

    def __init__(self, value: float):
        value = float(value)
        if math.isnan(value):
            raise UndefinedArithmetic("NaN is not an extended real")
        self.value = value

    @classmethod
    def finite(cls, v: float) -> "ExtReal":
        if not math.isfinite(v):
            raise ValueError("finite value expected")
        return cls(v)

    @classmethod
    def plus_inf(cls) -> "ExtReal":
        return cls(math.inf)

    @classmethod
    def minus_inf(cls) -> "ExtReal":
        return cls(-math.inf)

    @property
    def tag(self) -> str:
        if self.value == math.inf:
            return "PlusInf"
        if self.value == -math.inf:
            return "MinusInf"
        return "Finite"

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def _coerce(self, other) -> "ExtReal":
        return other if isinstance(other, ExtReal) else ExtReal(other)

    def __add__(self, other):
        other = self._coerce(other)
        if math.isinf(self.value) and math.isinf(other.value) and self.value != other.value:
            raise UndefinedArithmetic("inf - inf is undefined")
        return ExtReal(self.value + other.value)

    __radd__ = __add__

    def __neg__(self):
        return ExtReal(-self.value)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __eq__(self, other):
        try:
            return self.value == self._coerce(other).value
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self.value < self._coerce(other).value

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return self.value

    def close_to(self, other, atol: float = 1e-8) -> bool:
        other = self._coerce(other)
        if not self.is_finite or not other.is_finite:
            return self.value == other.value
        return abs(self.value - other.value) <= atol * max(1.0, abs(other.value))

    def to_json(self):
        if self.tag == "Finite":
            return self.value
        return "+inf" if self.tag == "PlusInf" else "-inf"

    def __repr__(self):
        if self.tag == "Finite":
            return f"ExtReal({self.value!r})"
        return "ExtReal(+inf)" if self.tag == "PlusInf" else "ExtReal(-inf)"


PLUS_INF = ExtReal.plus_inf()
MINUS_INF = ExtReal.minus_inf()


@dataclass
class SupportResult:
    value: ExtReal
    attaining_point: np.ndarray | None = None
    attaining_face: Face | None = None


def support_function(S: PolyhedralSet, zstar, tol: Tolerance = DEFAULT_TOL) -> SupportResult:
    """sup of <z*, z> over the union, one LP per piece."""
    zstar = as_vector(zstar, S.dim)
    best = SupportResult(MINUS_INF)
    for p in S.pieces:
        out = solve_lp(LpProblem(zstar, p.A, p.b, p.E, p.f), tol)
        if isinstance(out, Unbounded):
            return SupportResult(PLUS_INF)
        if isinstance(out, Optimal) and out.value > best.value.value:
            best = SupportResult(ExtReal(out.value), out.x)
    return best


def lower_generalized_support(S: PolyhedralSet, zstar, tol: Tolerance = DEFAULT_TOL) -> ExtReal:
    return lower_generalized_support_detail(S, zstar, tol).value


def lower_generalized_support_detail(S: PolyhedralSet, zstar, tol: Tolerance = DEFAULT_TOL) -> SupportResult:
    """Smallest <z*, z> over points z of S whose regular normal cone contains z*.

    z* is a regular normal at z exactly when z maximises <z*, .> over every
    piece containing z. Such points live on the argmax face F_j of some
    piece j and avoid every piece whose own maximum exceeds the value on F_j.
    So the answer is the smallest finite piece maximum whose argmax face is
    not covered by the pieces with a larger maximum. -inf for an empty set,
    +inf when no piece qualifies.
    """
    zstar = as_vector(zstar, S.dim)
    values = [_piece_max(p, zstar, tol) for p in S.pieces]
    if all(v == -math.inf for v in values):
        return SupportResult(MINUS_INF)
    order = sorted((v, j) for j, v in enumerate(values) if math.isfinite(v))
    for v, j in order:
        above = [S.pieces[i] for i, w in enumerate(values) if w > v + _gap(v, tol)]
        z = _uncovered_point(S.pieces[j], zstar, v, above, tol)
        if z is not None:
            return SupportResult(ExtReal(v), z)
    return SupportResult(PLUS_INF)


def _gap(v: float, tol: Tolerance) -> float:
    return tol.eps_opt * max(1.0, abs(v))


def _piece_max(p, zstar: np.ndarray, tol: Tolerance) -> float:
    out = solve_lp(LpProblem(zstar, p.A, p.b, p.E, p.f), tol)
    if isinstance(out, Unbounded):
        return math.inf
    if isinstance(out, Optimal):
        return out.value
    return -math.inf


def _escape_rows(p) -> list[tuple[np.ndarray, float]]:
    """Half-spaces (g, h), g.z >= h, whose strict versions cover the complement of p."""
    rows = [(a, b) for a, b in zip(p.A, p.b)]
    for e, f in zip(p.E, p.f):
        rows.append((e, f))
        rows.append((-e, -f))
    return rows


def _uncovered_point(piece, zstar: np.ndarray, value: float, above: list, tol: Tolerance) -> np.ndarray | None:
    """A point of the argmax face {z in piece : <z*, z> = value} lying
    strictly outside every piece in ``above``, or None."""
    n = piece.dim
    choices = [_escape_rows(q) for q in above]
    if any(not c for c in choices):
        return None
    count = int(np.prod([len(c) for c in choices])) if choices else 1
    if count > ESCAPE_CAP:
        raise ScaleCapExceeded(f"covering test needs {count} LPs (cap {ESCAPE_CAP})")
    # variables (z, s): maximise s subject to the face rows and g.z - s >= h per chosen row
    A_face = np.hstack([piece.A, np.zeros((piece.A.shape[0], 1))])
    E_face = np.vstack([np.hstack([piece.E, np.zeros((piece.E.shape[0], 1))]),
                        np.concatenate([zstar, [0.0]])[None, :]])
    f_face = np.concatenate([piece.f, [value]])
    c = np.zeros(n + 1)
    c[-1] = 1.0
    cap = np.zeros(n + 1)
    cap[-1] = 1.0
    for combo in itertools.product(*choices):
        esc = np.array([np.concatenate([-g, [1.0]]) for g, _ in combo]).reshape(-1, n + 1)
        esc_b = np.array([-h for _, h in combo])
        A = np.vstack([A_face, esc, cap])
        b = np.concatenate([piece.b, esc_b, [1.0]])
        out = solve_lp(LpProblem(c, A, b, E_face, f_face), tol)
        if isinstance(out, Optimal) and (not combo or out.value > tol.eps_feas):
            return out.x[:n]
        if isinstance(out, Unbounded):
            raise AssertionError("slack is capped; the covering LP cannot be unbounded")
    return None


def second_subderivative_indicator(ctx: DirectionalContext, zstar, tol: Tolerance = DEFAULT_TOL) -> ExtReal:
    """Second subderivative of the indicator of S at z for z*, in direction w."""
    S, z, w = ctx.S, ctx.z, ctx.w
    if not contains(S, z, tol):
        raise PointNotInSet("point is not in the set", distance_inf(S, z, tol))
    zstar = as_vector(zstar, S.dim)
    T = tangent_cone(S, z, tol)
    if not contains(T, w, tol):
        return PLUS_INF
    slope = float(zstar @ w)
    scale = max(1.0, float(np.max(np.abs(zstar))) * max(1.0, float(np.max(np.abs(w)))))
    if slope < -tol.eps_feas * scale:
        return PLUS_INF
    if slope > tol.eps_feas * scale:
        return MINUS_INF
    T2 = second_order_tangent_set(ctx, tol)
    if isinstance(T2, EmptyCone):
        return PLUS_INF
    return ExtReal(0.0) if in_cone_polar(T2, zstar, tol) else MINUS_INF
