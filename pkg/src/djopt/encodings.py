"""Builders for the constraint sets D of common disjunctive problem classes.

Pair-based classes place pair i on coordinates (2i, 2i+1) as (a_i, b_i):

* mpcc        a >= 0, b <= 0, a·b = 0  ->  {a >= 0, b = 0} ∪ {a = 0, b <= 0}
* switching   a·b = 0                  ->  {a = 0} ∪ {b = 0}
* vanishing   a >= 0, a·b <= 0         ->  {a = 0} ∪ {a >= 0, b <= 0}
              (a plays the role of H(x), b of G(x))
* cardinality at most s nonzero entries of z ∈ R^n
              ->  union over index sets I with |I| = s of {z_j = 0 for j ∉ I}
* box         lower <= z <= upper (entries may be null for no bound)
* custom      explicit pieces in the PolyhedralSet JSON layout

Unions over several pairs are expanded into all combinations of the
per-pair pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable

import numpy as np

from .numeric_core import ScaleCapExceeded
from .polyhedra import ConvexPolyhedron, PolyhedralSet

MAX_PAIRS = 6
MAX_PIECES = 64
KINDS = ("mpcc", "switching", "vanishing", "cardinality", "box", "custom")


class EncodingError(ValueError):
    pass


@dataclass
class EncodingSpec:
    kind: str
    pairs: int = 0
    dim: int = 0
    max_nonzeros: int = 0
    lower: list | None = None
    upper: list | None = None
    pieces: list = field(default_factory=list)

    def __post_init__(self):
        self.kind = self.kind.lower()
        if self.kind not in KINDS:
            raise EncodingError(f"unknown encoding kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.kind in ("mpcc", "switching", "vanishing"):
            if self.pairs <= 0:
                raise EncodingError("pairs must be positive")
            if self.pairs > MAX_PAIRS:
                raise ScaleCapExceeded(f"{self.pairs} pairs exceed the cap of {MAX_PAIRS}")
            self.dim = 2 * self.pairs
        elif self.kind == "cardinality":
            if self.dim <= 0 or not 0 <= self.max_nonzeros <= self.dim:
                raise EncodingError("cardinality needs dim > 0 and 0 <= max_nonzeros <= dim")
        elif self.kind == "box":
            if self.lower is None or self.upper is None or len(self.lower) != len(self.upper):
                raise EncodingError("box needs lower and upper lists of equal length")
            self.dim = len(self.lower)

    @classmethod
    def from_json(cls, data: dict) -> "EncodingSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise EncodingError("encoding must be an object with a 'kind' field")
        known = {"kind", "pairs", "dim", "max_nonzeros", "lower", "upper", "pieces"}
        extra = set(data) - known
        if extra:
            raise EncodingError(f"unknown encoding fields: {sorted(extra)}")
        return cls(**data)


def _pair_pieces(kind: str) -> list[ConvexPolyhedron]:
    if kind == "mpcc":
        return [ConvexPolyhedron([[-1, 0]], [0], [[0, 1]], [0]),
                ConvexPolyhedron([[0, 1]], [0], [[1, 0]], [0])]
    if kind == "switching":
        return [ConvexPolyhedron(None, None, [[1, 0]], [0], dim=2),
                ConvexPolyhedron(None, None, [[0, 1]], [0], dim=2)]
    return [ConvexPolyhedron(None, None, [[1, 0]], [0], dim=2),
            ConvexPolyhedron([[-1, 0], [0, 1]], [0, 0])]


def product_set(blocks: list[list[ConvexPolyhedron]]) -> PolyhedralSet:
    """Cartesian product of unions, expanded into one piece per combination."""
    count = int(np.prod([len(b) for b in blocks]))
    if count > MAX_PIECES:
        raise ScaleCapExceeded(f"product has {count} pieces (cap {MAX_PIECES})")
    dims = [b[0].dim for b in blocks]
    total = sum(dims)
    pieces = []
    for combo in product(*blocks):
        A_rows, b, E_rows, f = [], [], [], []
        offset = 0
        for p, d in zip(combo, dims):
            for M, rows in ((p.A, A_rows), (p.E, E_rows)):
                for r in M:
                    full = np.zeros(total)
                    full[offset:offset + d] = r
                    rows.append(full)
            b.extend(p.b)
            f.extend(p.f)
            offset += d
        pieces.append(ConvexPolyhedron(np.array(A_rows).reshape(-1, total), b,
                                       np.array(E_rows).reshape(-1, total), f, dim=total))
    return PolyhedralSet(pieces, total)


def _cardinality(n: int, s: int) -> PolyhedralSet:
    subsets = list(combinations(range(n), s))
    if len(subsets) > MAX_PIECES:
        raise ScaleCapExceeded(f"cardinality set has {len(subsets)} pieces (cap {MAX_PIECES})")
    pieces = []
    for keep in subsets:
        zero = [j for j in range(n) if j not in keep]
        E = np.eye(n)[zero]
        pieces.append(ConvexPolyhedron(None, None, E, np.zeros(len(zero)), dim=n))
    return PolyhedralSet(pieces, n)


def _box(lower, upper) -> PolyhedralSet:
    n = len(lower)
    A, b = [], []
    for i, (lo, hi) in enumerate(zip(lower, upper)):
        if lo is not None and hi is not None and lo > hi:
            raise EncodingError(f"empty box in coordinate {i}")
        if hi is not None:
            A.append(np.eye(n)[i])
            b.append(hi)
        if lo is not None:
            A.append(-np.eye(n)[i])
            b.append(-lo)
    return PolyhedralSet([ConvexPolyhedron(np.array(A).reshape(-1, n), b, dim=n)], n)


def build(spec: EncodingSpec | dict) -> PolyhedralSet:
    if isinstance(spec, dict):
        spec = EncodingSpec.from_json(spec)
    if spec.kind in ("mpcc", "switching", "vanishing"):
        return product_set([_pair_pieces(spec.kind)] * spec.pairs)
    if spec.kind == "cardinality":
        return _cardinality(spec.dim, spec.max_nonzeros)
    if spec.kind == "box":
        return _box(spec.lower, spec.upper)
    return PolyhedralSet.from_json({"dim": spec.dim, "pieces": spec.pieces})


def expected_piece_count(spec: EncodingSpec) -> int:
    if spec.kind in ("mpcc", "switching", "vanishing"):
        return 2 ** spec.pairs
    if spec.kind == "cardinality":
        return len(list(combinations(range(spec.dim), spec.max_nonzeros)))
    if spec.kind == "box":
        return 1
    return len(spec.pieces)


def membership_predicate(spec: EncodingSpec, atol: float = 1e-9) -> Callable[[np.ndarray], bool]:
    """The defining logical condition of the class, written directly."""

    def zero(v):
        return abs(v) <= atol

    if spec.kind in ("mpcc", "switching", "vanishing"):
        def pairs_ok(z):
            z = np.asarray(z, dtype=float)
            for a, b in z.reshape(-1, 2):
                if spec.kind == "mpcc" and not (a >= -atol and b <= atol and zero(a * b)):
                    return False
                if spec.kind == "switching" and not zero(a * b):
                    return False
                if spec.kind == "vanishing" and not (a >= -atol and a * b <= atol):
                    return False
            return True
        return pairs_ok
    if spec.kind == "cardinality":
        return lambda z: int(np.sum(np.abs(np.asarray(z, dtype=float)) > atol)) <= spec.max_nonzeros
    if spec.kind == "box":
        def in_box(z):
            for v, lo, hi in zip(z, spec.lower, spec.upper):
                if lo is not None and v < lo - atol:
                    return False
                if hi is not None and v > hi + atol:
                    return False
            return True
        return in_box
    built = build(spec)
    return lambda z: built.contains(z)
