import itertools

import numpy as np
import pytest

from djopt.encodings import EncodingError, EncodingSpec, build, expected_piece_count, membership_predicate
from djopt.numeric_core import ScaleCapExceeded
from djopt.polyhedra import contains

from helpers import DCOMP


def _probe_points(rng, dim, count=1000):
    """Random points with many exact zeros so that every branch is hit."""
    z = rng.integers(-2, 3, size=(count, dim)).astype(float)
    z[: count // 2] *= rng.random(size=(count // 2, dim))
    return z


def test_one_mpcc_pair_is_dcomp():
    S = build({"kind": "mpcc", "pairs": 1})
    assert len(S.pieces) == 2 and S.dim == 2
    for z in itertools.product([-1, 0, 1, 2], repeat=2):
        assert contains(S, z) == contains(DCOMP, z)


def test_one_switching_pair_is_a_cross():
    S = build({"kind": "switching", "pairs": 1})
    assert len(S.pieces) == 2
    assert contains(S, [5, 0]) and contains(S, [0, -5]) and not contains(S, [1, 1])


def test_two_mpcc_pairs_have_four_pieces():
    S = build(EncodingSpec("mpcc", pairs=2))
    assert S.dim == 4 and len(S.pieces) == 4


SPECS = [
    EncodingSpec("mpcc", pairs=1),
    EncodingSpec("mpcc", pairs=2),
    EncodingSpec("mpcc", pairs=3),
    EncodingSpec("switching", pairs=2),
    EncodingSpec("vanishing", pairs=1),
    EncodingSpec("vanishing", pairs=2),
    EncodingSpec("cardinality", dim=4, max_nonzeros=2),
    EncodingSpec("cardinality", dim=3, max_nonzeros=0),
    EncodingSpec("box", lower=[-1, None, 0], upper=[1, 2, None]),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.kind}-{s.dim}")
def test_membership_equals_defining_predicate(spec):
    S = build(spec)
    pred = membership_predicate(spec)
    rng = np.random.default_rng(spec.dim)
    for z in _probe_points(rng, S.dim):
        assert contains(S, z) == pred(z)


def _independent_predicate(kind, z):
    """Second spelling of each class, written without the library."""
    pairs = np.asarray(z).reshape(-1, 2)
    if kind == "mpcc":
        return all(min(a, -b) >= 0 and a * b == 0 for a, b in pairs)
    if kind == "switching":
        return all(a == 0 or b == 0 for a, b in pairs)
    return all(a == 0 or (a > 0 and b <= 0) for a, b in pairs)


@pytest.mark.parametrize("kind", ["mpcc", "switching", "vanishing"])
def test_pair_encodings_against_hand_written_predicates(kind):
    S = build({"kind": kind, "pairs": 2})
    for z in itertools.product([-1, 0, 1], repeat=4):
        assert contains(S, z) == _independent_predicate(kind, z)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.kind}-{s.dim}")
def test_piece_counts(spec):
    assert len(build(spec).pieces) == expected_piece_count(spec)


def test_piece_count_formulas():
    for k in range(1, 7):
        assert len(build({"kind": "mpcc", "pairs": k}).pieces) == 2 ** k
        assert len(build({"kind": "switching", "pairs": k}).pieces) == 2 ** k
    assert len(build({"kind": "cardinality", "dim": 5, "max_nonzeros": 2}).pieces) == 10


def test_caps_and_bad_specs():
    with pytest.raises(ScaleCapExceeded):
        build({"kind": "mpcc", "pairs": 7})
    with pytest.raises(ScaleCapExceeded):
        build({"kind": "cardinality", "dim": 10, "max_nonzeros": 5})
    with pytest.raises(EncodingError):
        build({"kind": "mpcc", "pairs": 0})
    with pytest.raises(EncodingError):
        build({"kind": "triangle"})
    with pytest.raises(EncodingError):
        build({"kind": "box", "lower": [2], "upper": [1]})
    with pytest.raises(EncodingError):
        build({"kind": "mpcc", "pairs": 1, "colour": "red"})


def test_custom_pieces():
    S = build({"kind": "custom", "dim": 2, "pieces": [{"A": [[1, 0]], "b": [0]}, {"E": [[0, 1]], "f": [0]}]})
    assert contains(S, [-1, 4]) and contains(S, [3, 0]) and not contains(S, [1, 1])
