import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from djopt.cones import (
    DirectionalContext,
    EmptyCone,
    clarke_directional_normal_cone,
    cone_probes,
    cones_agree,
    directional_limiting_normal_cone,
    directional_proximal_normal_cone,
    directional_regular_tangent_cone,
    limiting_normal_cone,
    merged_generators,
    regular_normal_cone,
    second_order_tangent_set,
    span_of_cone,
)
from djopt.polyhedra import ConvexPolyhedron, PointNotInSet, PolyhedralSet, lineality_space, tangent_cone

from helpers import (
    DCOMP,
    curve_member,
    in_generated_cone,
    limiting_normal_mask_at_origin,
    random_set,
)

HALF = PolyhedralSet([ConvexPolyhedron([[1, 0]], [0])])
BOX = PolyhedralSet([ConvexPolyhedron(np.vstack([np.eye(2), -np.eye(2)]), [1, 1, 1, 1])])


def ctx(S, z, w):
    return DirectionalContext(S, z, w)


def members(K, pts):
    return [K.contains(p) for p in pts]


# --- second-order tangent set ---------------------------------------------------------------


def test_second_order_tangent_examples():
    T2 = second_order_tangent_set(ctx(DCOMP, [0, 0], [1, 0]))
    assert members(T2, [[3, 0], [-3, 0], [0, 1], [0, -1]]) == [True, True, False, False]
    for s in ([3, 0], [-3, 0], [0, 1], [0, -1]):
        assert curve_member(DCOMP, [0, 0], [1, 0], s) == T2.contains(s)
    assert isinstance(second_order_tangent_set(ctx(DCOMP, [0, 0], [1, 1])), EmptyCone)


@given(seed=st.integers(0, 5000))
def test_second_order_tangent_with_zero_direction_is_tangent_cone(seed):
    rng = np.random.default_rng(seed)
    S = random_set(rng)
    z = np.zeros(S.dim)
    T2 = second_order_tangent_set(ctx(S, z, np.zeros(S.dim)))
    T = tangent_cone(S, z)
    assert cones_agree(T2, T, rng, 200)


def test_second_order_tangent_requires_membership():
    with pytest.raises(PointNotInSet):
        directional_limiting_normal_cone(ctx(DCOMP, [1, 1], [0, 0]))


# --- normal cones --------------------------------------------------------------------------------


def test_regular_normal_examples():
    N = regular_normal_cone(DCOMP, [0, 0])
    assert members(N, [[-1, 1], [0, 0], [1, 0], [0, -1]]) == [True, True, False, False]
    N = regular_normal_cone(HALF, [0, 5])
    assert members(N, [[2, 0], [-1, 0], [0, 1]]) == [True, False, False]
    N = regular_normal_cone(BOX, [0.2, -0.3])
    assert members(N, [[0, 0], [1e-3, 0], [0, -1e-3]]) == [True, False, False]


def test_limiting_normal_of_dcomp():
    N = limiting_normal_cone(DCOMP, [0, 0])
    inside = [[-1, 1], [0, -3], [0, 3], [5, 0], [-5, 0], [-2, 0.5]]
    outside = [[1, 1], [1, -1], [-1, -1], [2, 0.1]]
    assert all(members(N, inside))
    assert not any(members(N, outside))
    rng = np.random.default_rng(0)
    V = rng.normal(size=(1000, 2))
    T = tangent_cone(DCOMP, [0, 0])
    assert list(limiting_normal_mask_at_origin(T, V)) == members(N, V)


def test_limiting_normal_sees_part_of_a_shared_boundary_line():
    # a half-plane whose boundary line is interior to the union on one side only
    K = PolyhedralSet([
        ConvexPolyhedron.cone([[1, 2], [-1, 0]], None, 2),
        ConvexPolyhedron.cone([[-1, 1], [-1, -1]], None, 2),
        ConvexPolyhedron.cone([[-1, -2]], None, 2),
    ])
    N = limiting_normal_cone(K, [0, 0])
    assert N.contains([-1, -2]) and N.contains([-1, 0])
    assert not N.contains([1, 2])
    rng = np.random.default_rng(5)
    V = np.vstack([rng.normal(size=(500, 2)), [[-1, -2], [-2, -4], [1, 2]]])
    assert list(limiting_normal_mask_at_origin(K, V)) == members(N, V)


def test_limiting_normal_at_interior_point_is_zero():
    N = limiting_normal_cone(BOX, [0.1, 0.1])
    assert N.contains([0, 0]) and not N.contains([1e-4, 0])


def test_convex_limiting_equals_regular():
    rng = np.random.default_rng(1)
    for _ in range(15):
        S = random_set(rng, pieces=1)
        z = np.zeros(S.dim)
        assert cones_agree(limiting_normal_cone(S, z), regular_normal_cone(S, z), rng, 300)


def test_directional_limiting_examples():
    N = directional_limiting_normal_cone(ctx(DCOMP, [0, 0], [1, 0]))
    assert members(N, [[0, 4], [0, -4], [1, 0], [-1, 0], [-1, 1]]) == [True, True, False, False, False]
    N0 = directional_limiting_normal_cone(ctx(DCOMP, [0, 0], [0, 0]))
    assert cones_agree(N0, limiting_normal_cone(DCOMP, [0, 0]), np.random.default_rng(2), 400)
    assert isinstance(directional_limiting_normal_cone(ctx(DCOMP, [0, 0], [1, 1])), EmptyCone)


def test_directional_limiting_convex_case():
    """For convex S: N_S(z) ∩ {w}^⊥."""
    rng = np.random.default_rng(3)
    checked = 0
    for _ in range(40):
        S = random_set(rng, pieces=1)
        z = np.zeros(S.dim)
        T = tangent_cone(S, z)
        for w in cone_probes(T, rng, 3, spread=0.0):
            N = directional_limiting_normal_cone(ctx(S, z, w))
            Nz = regular_normal_cone(S, z)
            for v in np.vstack([cone_probes(Nz, rng, 20), rng.normal(size=(20, S.dim))]):
                expected = Nz.contains(v) and abs(v @ w) <= 1e-9 * max(1, np.abs(v).max() * np.abs(w).max())
                assert N.contains(v) == expected
            checked += 1
    assert checked >= 40


def test_directional_proximal_examples():
    P = directional_proximal_normal_cone(ctx(DCOMP, [0, 0], [1, 0]))
    assert members(P, [[0, 3], [0, -3], [1, 0]]) == [True, True, False]
    P0 = directional_proximal_normal_cone(ctx(DCOMP, [0, 0], [0, 0]))
    assert cones_agree(P0, regular_normal_cone(DCOMP, [0, 0]), np.random.default_rng(4), 300)


def test_clarke_is_convex_hull_of_limiting():
    N = limiting_normal_cone(DCOMP, [0, 0])
    C = clarke_directional_normal_cone(ctx(DCOMP, [0, 0], [0, 0]))
    g = merged_generators(N)
    rng = np.random.default_rng(5)
    for v in rng.normal(size=(300, 2)):
        assert C.contains(v) == in_generated_cone(g.rays, g.lines, v)


def test_clarke_of_convex_set_is_limiting():
    rng = np.random.default_rng(6)
    for _ in range(10):
        S = random_set(rng, pieces=1)
        z = np.zeros(S.dim)
        c = ctx(S, z, np.zeros(S.dim))
        assert cones_agree(clarke_directional_normal_cone(c), directional_limiting_normal_cone(c), rng, 200)


def test_regular_tangent_examples():
    T = directional_regular_tangent_cone(ctx(DCOMP, [0, 0], [1, 0]))
    assert members(T, [[3, 0], [-3, 0], [0, 1]]) == [True, True, False]
    rng = np.random.default_rng(7)
    for _ in range(10):
        S = random_set(rng, pieces=1)
        z = np.zeros(S.dim)
        assert cones_agree(directional_regular_tangent_cone(ctx(S, z, np.zeros(S.dim))), tangent_cone(S, z), rng, 200)


def _random_direction_contexts(rng, count):
    out = []
    while len(out) < count:
        S = random_set(rng)
        z = np.zeros(S.dim)
        T = tangent_cone(S, z)
        for w in cone_probes(T, rng, 2, spread=0.0):
            out.append(ctx(S, z, w))
    return out


def test_polarity_of_regular_tangent_and_clarke():
    rng = np.random.default_rng(8)
    for c in _random_direction_contexts(rng, 25):
        That = directional_regular_tangent_cone(c)
        Nc = clarke_directional_normal_cone(c)
        for v in np.vstack([cone_probes(That, rng, 30), rng.normal(size=(30, c.S.dim))]):
            polar_member = all(v @ g <= 1e-8 for g in merged_generators(Nc).rays) and \
                all(abs(v @ g) <= 1e-8 for g in merged_generators(Nc).lines)
            assert That.contains(v) == polar_member


def test_span_polar_equals_lineality_of_regular_tangent():
    rng = np.random.default_rng(9)
    for c in _random_direction_contexts(rng, 25):
        N = directional_limiting_normal_cone(c)
        B = span_of_cone(N)
        L = lineality_space(directional_regular_tangent_cone(c).pieces[0])
        # (span N)° = (span N)^⊥ ; compare subspaces by projector
        n = c.S.dim
        perp = np.eye(n) - B @ B.T
        assert np.allclose(perp, L @ L.T, atol=1e-8)


def test_sum_rules_with_regular_tangent():
    rng = np.random.default_rng(10)
    for c in _random_direction_contexts(rng, 25):
        T2 = second_order_tangent_set(c)
        That = directional_regular_tangent_cone(c)
        a = cone_probes(T2, rng, 30, spread=0.0)
        b = cone_probes(That, rng, 30, spread=0.0)
        for x, y in zip(a, b):
            assert T2.contains(x + y)


def test_directional_normal_inclusion_chain():
    rng = np.random.default_rng(11)
    for c in _random_direction_contexts(rng, 25):
        w = c.w
        Nz = regular_normal_cone(c.S, c.z)
        P = directional_proximal_normal_cone(c)
        L = directional_limiting_normal_cone(c)
        C = clarke_directional_normal_cone(c)
        for v in np.vstack([cone_probes(Nz, rng, 20), cone_probes(P, rng, 20), cone_probes(L, rng, 20)]):
            if Nz.contains(v) and abs(v @ w) <= 1e-9:
                assert P.contains(v)
            if P.contains(v):
                assert L.contains(v)
            if L.contains(v):
                assert C.contains(v)
