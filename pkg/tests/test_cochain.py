import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dvbc.bundle import GaugeTransform, apply_gauge, euclidean_metric, new_bundle, trivial_bundle
from dvbc.cochain import (
    ALPHA_FIRST,
    OUTER_ALPHA,
    OUTER_W,
    W_FIRST,
    CochainError,
    HomCochain,
    ScalarCochain,
    VBCochain,
    constant_scalar,
    cup,
    cup_scalar,
    curvature,
    curvature_permuted,
    d_nabla,
    d_nabla_hom,
    d_nabla_rule,
    d_scalar,
    dot_cochain1_section,
    dot_sections,
    evaluate,
    hom_action,
    identity_hom,
    max_difference,
    max_entry,
    nabla,
    pullback_cochain,
    pullback_scalar,
    section,
    wedge,
    wedge_averaged,
    wedge_rule,
    wedge_scalar,
)
from dvbc.complex import identity_map
from dvbc.bundle import pullback_bundle
from dvbc.fixtures import (
    canonical_complex,
    collapse_map,
    random_bundle,
    random_cochain,
    random_gauge,
    random_hom_cochain,
    random_monotone_map,
    random_orthogonal_bundle,
    random_scalar_cochain,
    random_vertex_map,
    scalar_bundle,
)

TOL = 1e-9
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def flat_bundle(X, n, seed):
    """Gauge transform of the trivial bundle: flat with trivial holonomy."""
    T = trivial_bundle(X, n)
    return apply_gauge(T, random_gauge(T, seed))


def indicator_scalar(X, k, key):
    return ScalarCochain(X, k, {key: 1.0})


def indicator_vector(E, k, key):
    return VBCochain(E, k, {key: np.ones(E.dim[key[0]])})


# -- evaluation and derivatives ----------------------------------------------


def test_evaluate_examples():
    E = random_bundle(canonical_complex("filled_triangle"), 2, 1)
    a = random_cochain(E, 1, 2)
    assert np.array_equal(evaluate(a, (0, 1), 0), a[(0, 1)])
    assert np.array_equal(evaluate(a, (1, 0), 0), -a[(0, 1)])
    assert np.allclose(evaluate(a, (1, 2), 0), E.transport(0, 1) @ a[(1, 2)])


def test_evaluate_unknown_simplex():
    E = random_bundle(canonical_complex("circle"), 1, 1)
    a = random_cochain(E, 1, 2)
    with pytest.raises(CochainError):
        evaluate(a, (0, 1, 2), 0)


def test_nabla_scalar_example():
    E = new_bundle(canonical_complex("edge"), 1, {(0, 1): 2.0})
    assert nabla(section(E, {0: [1.0], 1: [4.0]}))[(0, 1)][0] == 7.0


def test_nabla_constant_on_trivial_is_zero():
    E = trivial_bundle(canonical_complex("tetrahedron"), 3)
    s = section(E, {v: [1.0, -2.0, 0.5] for v in range(4)})
    assert max_entry(nabla(s)) == 0.0


def test_nabla_needs_every_vertex():
    E = trivial_bundle(canonical_complex("edge"), 1)
    with pytest.raises(CochainError):
        nabla(section(E, {0: [1.0]}))


def test_tree_transported_section_is_parallel_on_tree_edges():
    from dvbc.analysis import tree_frames
    from dvbc.complex import spanning_tree

    E = flat_bundle(canonical_complex("tetrahedron"), 2, 3)
    T = spanning_tree(E.base)
    x = np.array([0.3, -1.2])
    s = section(E, {v: P @ x for v, P in tree_frames(E, T).items()})
    ns = nabla(s)
    for e in T.tree_edges():
        assert np.allclose(ns[e], 0, atol=1e-12)


def test_d_scalar_examples():
    X = canonical_complex("tetrahedron")
    f = random_scalar_cochain(X, 0, 1)
    assert d_scalar(f)[(0, 1)] == f[(1,)] - f[(0,)]
    assert max_entry(d_scalar(constant_scalar(X, 4.0))) == 0.0
    for k in range(2):
        w = random_scalar_cochain(X, k, k + 5)
        assert max_entry(d_scalar(d_scalar(w))) < 1e-15


def test_dnabla_on_trivial_is_componentwise_d():
    X = canonical_complex("tetrahedron")
    E = trivial_bundle(X, 2)
    for k in range(3):
        a = random_cochain(E, k, k)
        da = d_nabla(a)
        for c in range(2):
            comp = ScalarCochain(X, k, {s: a[s][c] for s in a.keys()})
            dc = d_scalar(comp)
            assert all(abs(da[s][c] - dc[s]) < 1e-15 for s in dc.keys())


def test_dnabla_squared_on_section():
    E = random_bundle(canonical_complex("filled_triangle"), 2, 4)
    s = random_cochain(E, 0, 5)
    U = E.transport
    expect = (U(0, 1) @ U(1, 2) - U(0, 2)) @ s[(2,)]
    assert np.allclose(d_nabla(d_nabla(s))[(0, 1, 2)], expect, atol=1e-14)


def test_dnabla_degree_overflow():
    E = random_bundle(canonical_complex("circle"), 1, 1)
    with pytest.raises(CochainError):
        d_nabla(random_cochain(E, 1, 1))


# -- cup and wedge -------------------------------------------------------------


def test_cup_front_back():
    E = random_bundle(canonical_complex("filled_triangle"), 2, 1)
    a, w = random_cochain(E, 1, 2), random_scalar_cochain(E.base, 1, 3)
    assert np.allclose(cup(a, w)[(0, 1, 2)], a[(0, 1)] * w[(1, 2)])


def test_cup_with_unit_scalar():
    E = random_bundle(canonical_complex("tetrahedron"), 2, 1)
    a = random_cochain(E, 2, 2)
    assert max_difference(cup(a, constant_scalar(E.base), W_FIRST), a) == 0.0


def test_wedge_one_zero():
    E = random_bundle(canonical_complex("edge"), 2, 1)
    a, w = random_cochain(E, 1, 2), random_scalar_cochain(E.base, 0, 3)
    assert np.allclose(wedge(a, w)[(0, 1)], a[(0, 1)] * (w[(0,)] + w[(1,)]) / 2)


def test_wedge_scalar_first():
    E = random_bundle(canonical_complex("edge"), 2, 1)
    a, f = random_cochain(E, 1, 2), random_scalar_cochain(E.base, 0, 3)
    assert np.allclose(wedge(a, f, W_FIRST)[(0, 1)], (f[(0,)] + f[(1,)]) / 2 * a[(0, 1)])


@pytest.mark.parametrize("seed", range(5))
def test_wedge_six_term_expansion(seed):
    E = random_bundle(canonical_complex("filled_triangle"), 2, seed)
    a, w = random_cochain(E, 1, seed + 1), random_scalar_cochain(E.base, 1, seed + 2)
    U01 = E.transport(0, 1)
    A = lambda i, j: a[(i, j)] if i < j else -a[(j, i)]
    W = lambda i, j: w[(i, j)] if i < j else -w[(j, i)]
    # six-term expansion with explicit transports to vertex 0
    expect = (
        A(0, 1) * W(1, 2)
        - A(0, 2) * W(2, 1)
        - A(1, 0) * W(0, 2)
        + U01 @ A(1, 2) * W(2, 0)
        + A(2, 0) * W(0, 1)
        - U01 @ A(2, 1) * W(1, 0)
    ) / 6
    assert np.allclose(wedge(a, w)[(0, 1, 2)], expect, atol=1e-14)


@pytest.mark.parametrize("mode", [OUTER_ALPHA, OUTER_W])
@pytest.mark.parametrize("order", [ALPHA_FIRST, W_FIRST])
@given(seed=seeds)
@settings(max_examples=15, deadline=None)
def test_averaged_matches_permutation_sum(mode, order, seed):
    X = canonical_complex("tetrahedron")
    E = random_bundle(X, 2, seed)
    for k in range(4):
        for l in range(4 - k):
            a, w = random_cochain(E, k, seed + 1), random_scalar_cochain(X, l, seed + 2)
            assert max_difference(wedge(a, w, order), wedge_averaged(a, w, mode, order)) < 1e-12


def coefficient_table(E, k, l, simplex, mode=None):
    """Coefficient of (alpha on a, w on b) in the wedge at ``simplex``, rank 1."""
    X = E.base
    table = {}
    for a in X.simplices_of(k):
        for b in X.simplices_of(l):
            alpha, w = indicator_vector(E, k, a), indicator_scalar(X, l, b)
            val = wedge(alpha, w) if mode is None else wedge_averaged(alpha, w, mode)
            table[(a, b)] = float(val[simplex][0])
    return table


def test_averaged012_closed_form():
    # Rank 1 over the triangle with U_01 = 7 so transported terms are visible.
    E = scalar_bundle("filled_triangle", 7.0, 3.0, 5.0)
    u = 7.0
    # alpha_01 (w_02 + w_12)/2 + U_01 alpha_12 (w_10 + w_20)/2 + alpha_20 (w_01 + w_21)/2, all over 3
    expect = {
        ((0, 1), (0, 2)): 1 / 6, ((0, 1), (1, 2)): 1 / 6,
        ((1, 2), (0, 1)): -u / 6, ((1, 2), (0, 2)): -u / 6,
        ((0, 2), (0, 1)): -1 / 6, ((0, 2), (1, 2)): 1 / 6,
    }
    for mode in (None, OUTER_ALPHA, OUTER_W):
        got = coefficient_table(E, 1, 1, (0, 1, 2), mode)
        for key, c in got.items():
            assert c == pytest.approx(expect.get(key, 0.0), abs=1e-14), (mode, key)


def test_averaged012_other_closed_form():
    # (alpha_20 + U_01 alpha_21)/2 w_01 + (alpha_01 + alpha_02)/2 w_12 + (alpha_10 + U_01 alpha_12)/2 w_20, over 3
    E = scalar_bundle("filled_triangle", 7.0, 3.0, 5.0)
    u = 7.0
    expect = {
        ((0, 2), (0, 1)): -1 / 6, ((1, 2), (0, 1)): -u / 6,
        ((0, 1), (1, 2)): 1 / 6, ((0, 2), (1, 2)): 1 / 6,
        ((0, 1), (0, 2)): 1 / 6, ((1, 2), (0, 2)): -u / 6,
    }
    got = coefficient_table(E, 1, 1, (0, 1, 2), OUTER_W)
    for key, c in got.items():
        assert c == pytest.approx(expect.get(key, 0.0), abs=1e-14), key


def test_wedge_two_one_closed_form():
    # 1/4 [a_012 (w03+w13+w23)/3 + a_031 (w02+w12+w32)/3 + a_023 (w01+w21+w31)/3 + U01 a_132 (w10+w20+w30)/3]
    X = canonical_complex("tetrahedron")
    E = new_bundle(X, 1, {(0, 1): 7.0, (0, 2): 3.0, (0, 3): 5.0, (1, 2): 2.0, (1, 3): 11.0, (2, 3): 13.0})
    u = 7.0
    expect = {
        ((0, 1, 2), (0, 3)): 1, ((0, 1, 2), (1, 3)): 1, ((0, 1, 2), (2, 3)): 1,
        ((0, 1, 3), (0, 2)): -1, ((0, 1, 3), (1, 2)): -1, ((0, 1, 3), (2, 3)): 1,
        ((0, 2, 3), (0, 1)): 1, ((0, 2, 3), (1, 2)): -1, ((0, 2, 3), (1, 3)): -1,
        ((1, 2, 3), (0, 1)): u, ((1, 2, 3), (0, 2)): u, ((1, 2, 3), (0, 3)): u,
    }
    for mode in (None, OUTER_ALPHA, OUTER_W):
        got = coefficient_table(E, 2, 1, (0, 1, 2, 3), mode)
        for key, c in got.items():
            assert c == pytest.approx(expect.get(key, 0.0) / 12, abs=1e-14), (mode, key)


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_scalar_graded_anticommutativity(seed):
    X = canonical_complex("tetrahedron")
    for k in range(4):
        for l in range(4 - k):
            a, b = random_scalar_cochain(X, k, seed), random_scalar_cochain(X, l, seed + 1)
            assert max_difference(wedge_scalar(a, b), (-1) ** (k * l) * wedge_scalar(b, a)) < 1e-12


def test_bundle_valued_anticommutativity_report(capsys):
    # Not asserted: the two orders are compared and the residual printed.
    X = canonical_complex("tetrahedron")
    E = random_bundle(X, 2, 3)
    with capsys.disabled():
        for k, l in [(1, 1), (1, 2), (2, 1)]:
            a, w = random_cochain(E, k, 1), random_scalar_cochain(X, l, 2)
            r = max_difference(wedge(a, w, ALPHA_FIRST), (-1) ** (k * l) * wedge(a, w, W_FIRST))
            print(f"\n  alpha^w vs (-1)^(kl) w^alpha, k={k} l={l}: max diff {r:.3e}", end="")


def test_cup_scalar_front_back():
    X = canonical_complex("filled_triangle")
    a, b = random_scalar_cochain(X, 1, 1), random_scalar_cochain(X, 1, 2)
    assert cup_scalar(a, b)[(0, 1, 2)] == a[(0, 1)] * b[(1, 2)]


# -- Leibniz rules -------------------------------------------------------------


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_leibniz_sections(seed):
    X = canonical_complex("tetrahedron")
    E = random_bundle(X, 3, seed)
    f, s = random_scalar_cochain(X, 0, seed + 1), random_cochain(E, 0, seed + 2)
    lhs = nabla(wedge(s, f, W_FIRST))
    rhs = wedge(s, d_scalar(f), W_FIRST) + wedge(nabla(s), f, W_FIRST)
    assert max_difference(lhs, rhs) < TOL


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_leibniz_cup(seed):
    X = canonical_complex("tetrahedron")
    E = random_bundle(X, 2, seed)
    for k in range(3):
        for l in range(3 - k):
            a, w = random_cochain(E, k, seed + 1), random_scalar_cochain(X, l, seed + 2)
            lhs = d_nabla(cup(a, w))
            rhs = cup(d_nabla(a), w) + (-1) ** k * cup(a, d_scalar(w))
            assert max_difference(lhs, rhs) < TOL


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_leibniz_wedge_flat(seed):
    X = canonical_complex("tetrahedron")
    E = flat_bundle(X, 2, seed)
    for k in range(3):
        for l in range(3 - k):
            a, w = random_cochain(E, k, seed + 1), random_scalar_cochain(X, l, seed + 2)
            lhs = d_nabla(wedge(a, w))
            rhs = wedge(d_nabla(a), w) + (-1) ** k * wedge(a, d_scalar(w))
            assert max_difference(lhs, rhs) < TOL


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_leibniz_wedge_scalar_degree_zero(seed):
    X = canonical_complex("tetrahedron")
    E = random_bundle(X, 2, seed)
    for k in range(3):
        a, w = random_cochain(E, k, seed + 1), random_scalar_cochain(X, 0, seed + 2)
        lhs = d_nabla(wedge(a, w))
        rhs = wedge(d_nabla(a), w) + (-1) ** k * wedge(a, d_scalar(w))
        assert max_difference(lhs, rhs) < TOL


def test_leibniz_wedge_gap_is_half_curvature():
    # k=0, l=1 on one triangle: s only at vertex 2, w only on [1,2].
    E = random_bundle(canonical_complex("filled_triangle"), 2, 9)
    s = section(E, {0: [0.0, 0.0], 1: [0.0, 0.0], 2: [0.4, -1.1]})
    w = indicator_scalar(E.base, 1, (1, 2))
    lhs = d_nabla(wedge(s, w))
    rhs = wedge(d_nabla(s), w) + wedge(s, d_scalar(w))
    gap = lhs[(0, 1, 2)] - rhs[(0, 1, 2)]
    assert np.allclose(gap, curvature(E)[(0, 1, 2)] @ s[(2,)] / 2, atol=1e-14)
    assert np.linalg.norm(gap) > 1e-3


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_hom_leibniz(seed):
    X = canonical_complex("simplex4_boundary")
    E = random_bundle(X, 2, seed)
    for k in range(3):
        for l in range(3 - k):
            A, a = random_hom_cochain(E, k, seed + 1), random_cochain(E, l, seed + 2)
            lhs = d_nabla(hom_action(A, a))
            rhs = hom_action(d_nabla_hom(A), a) + (-1) ** k * hom_action(A, d_nabla(a))
            assert max_difference(lhs, rhs) < TOL


# -- naturality ------------------------------------------------------------------


def test_example_pullback_signs():
    f = collapse_map()
    E = random_bundle(f.codomain, 2, 3)
    a = random_cochain(E, 1, 4)
    pa = pullback_cochain(f, a)
    assert np.array_equal(pa[(0, 1)], a[(0, 1)])
    assert np.array_equal(pa[(0, 3)], np.zeros(2))
    assert np.allclose(pa[(1, 3)], -E.transport(1, 0) @ a[(0, 1)])
    assert np.allclose(pa[(2, 3)], -E.transport(2, 0) @ a[(0, 2)])


def test_pullback_identity_map():
    E = random_bundle(canonical_complex("tetrahedron"), 2, 1)
    a = random_cochain(E, 2, 2)
    assert max_difference(pullback_cochain(identity_map(E.base), a, E), a) == 0.0


def test_example_dnabla_pullback():
    f = collapse_map()
    E = random_bundle(f.codomain, 2, 3)
    a = random_cochain(E, 1, 4)
    P = pullback_bundle(f, E)
    lhs = pullback_cochain(f, d_nabla_rule(a), P)
    rhs = d_nabla(pullback_cochain(f, a, P))
    for t in f.domain.triangles:
        assert np.allclose(lhs[t], rhs[t], atol=1e-12)
    for t in [(0, 1, 3), (0, 2, 3)]:
        assert np.abs(rhs[t]).max() <= 1e-12 and np.abs(lhs[t]).max() == 0.0


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_naturality_monotone_maps(seed):
    Y = canonical_complex("tetrahedron")
    E = random_bundle(Y, 2, seed)
    for name in ("simplex4_boundary", "tetrahedron"):
        X = canonical_complex(name)
        f = random_monotone_map(X, Y, seed + 1)
        P = pullback_bundle(f, E)
        for k in range(3):
            a = random_cochain(E, k, seed + 2)
            assert max_difference(pullback_cochain(f, d_nabla_rule(a), P), d_nabla(pullback_cochain(f, a, P))) < TOL
        for k in range(4):
            for l in range(4 - k):
                a, w = random_cochain(E, k, seed + 3), random_scalar_cochain(Y, l, seed + 4)
                lhs = pullback_cochain(f, wedge_rule(a, w), P)
                rhs = wedge(pullback_cochain(f, a, P), pullback_scalar(f, w))
                assert max_difference(lhs, rhs) < TOL


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_naturality_arbitrary_maps_flat(seed):
    Y = canonical_complex("tetrahedron")
    E = flat_bundle(Y, 2, seed)
    X = canonical_complex("simplex4_boundary")
    f = random_vertex_map(X, Y, seed + 1)
    P = pullback_bundle(f, E)
    for k in range(3):
        a = random_cochain(E, k, seed + 2)
        assert max_difference(pullback_cochain(f, d_nabla_rule(a), P), d_nabla(pullback_cochain(f, a, P))) < TOL
    for k in range(4):
        for l in range(4 - k):
            a, w = random_cochain(E, k, seed + 3), random_scalar_cochain(Y, l, seed + 4)
            lhs = pullback_cochain(f, wedge_rule(a, w), P)
            rhs = wedge(pullback_cochain(f, a, P), pullback_scalar(f, w))
            assert max_difference(lhs, rhs) < TOL


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_dnabla_naturality_arbitrary_maps_low_degree(seed):
    Y = canonical_complex("tetrahedron")
    E = random_bundle(Y, 2, seed)
    X = canonical_complex("simplex4_boundary")
    f = random_vertex_map(X, Y, seed + 1)
    P = pullback_bundle(f, E)
    for k in range(2):
        a = random_cochain(E, k, seed + 2)
        assert max_difference(pullback_cochain(f, d_nabla_rule(a), P), d_nabla(pullback_cochain(f, a, P))) < TOL


def test_scalar_pullback_commutes_with_d():
    f = random_vertex_map(canonical_complex("simplex4_boundary"), canonical_complex("tetrahedron"), 3)
    for k in range(3):
        w = random_scalar_cochain(f.codomain, k, k)
        assert max_difference(pullback_scalar(f, d_scalar(w)), d_scalar(pullback_scalar(f, w))) < 1e-14


# -- curvature and Hom cochains ----------------------------------------------------


def test_curvature_examples():
    assert max_entry(curvature(trivial_bundle(canonical_complex("tetrahedron"), 2))) == 0.0
    F = curvature(scalar_bundle("filled_triangle", 2, 3, 5))
    assert F[(0, 1, 2)][0, 0] == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_curvature_gauge_rule(seed):
    E = random_bundle(canonical_complex("tetrahedron"), 2, seed)
    g = random_gauge(E, seed + 50)
    G = apply_gauge(E, g)
    for a, b, c in E.base.triangles:
        assert np.allclose(curvature(G)[(a, b, c)], g[a] @ curvature(E)[(a, b, c)] @ g.g_inv[c])


@pytest.mark.parametrize("seed", range(10))
def test_curvature_permuted_matches_definition(seed):
    E = random_bundle(canonical_complex("filled_triangle"), 2, seed)
    U = E.transport
    for o in itertools.permutations((0, 1, 2)):
        direct = U(o[0], o[1]) @ U(o[1], o[2]) - U(o[0], o[2])
        assert np.allclose(curvature_permuted(E, o), direct, atol=1e-12)


def test_curvature_permuted_stated_forms():
    E = random_bundle(canonical_complex("filled_triangle"), 2, 3)
    U = E.transport
    F = curvature(E)[(0, 1, 2)]
    assert np.allclose(curvature_permuted(E, (0, 1, 2)), F)
    assert np.allclose(curvature_permuted(E, (0, 2, 1)), -F @ U(2, 1))
    assert np.allclose(curvature_permuted(E, (1, 0, 2)), -U(1, 0) @ F)
    assert np.allclose(curvature_permuted(E, (1, 2, 0)), U(1, 0) @ F @ U(2, 0))
    assert np.allclose(curvature_permuted(E, (2, 0, 1)), U(2, 0) @ F @ U(2, 1))


def test_reversed_curvature_is_not_inverse():
    # Counterexample to reading the reversed ordering as the inverse of F.
    E = scalar_bundle("filled_triangle", 2, 3, 5)
    F012 = curvature(E)[(0, 1, 2)][0, 0]
    F210 = curvature_permuted(E, (2, 1, 0))[0, 0]
    assert F012 == pytest.approx(1.0)
    assert F210 == pytest.approx(1 / 6 - 1 / 5)
    assert abs(F210 - 1 / F012) > 1.0


def test_curvature_permuted_rejects_non_triangle():
    E = random_bundle(canonical_complex("tetrahedron"), 1, 1)
    with pytest.raises(CochainError):
        curvature_permuted(E, (0, 1))


def test_hom_action_examples():
    E = random_bundle(canonical_complex("filled_triangle"), 2, 1)
    s = random_cochain(E, 0, 2)
    F = curvature(E)
    assert np.allclose(hom_action(F, s)[(0, 1, 2)], F[(0, 1, 2)] @ s[(2,)])
    a = random_cochain(E, 1, 3)
    assert max_difference(hom_action(identity_hom(E), a), a) == 0.0


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_dnabla_squared_is_curvature(seed):
    E = random_bundle(canonical_complex("tetrahedron"), 3, seed)
    for k in (0, 1):
        a = random_cochain(E, k, seed + 1)
        assert max_difference(d_nabla(d_nabla(a)), hom_action(curvature(E), a)) < TOL


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_bianchi(seed):
    E = random_bundle(canonical_complex("simplex4_boundary"), 3, seed)
    assert max_entry(d_nabla_hom(curvature(E))) < TOL


def test_bianchi_rank_one_exact():
    X = canonical_complex("simplex4_boundary")
    vals = {e: float(p) for e, p in zip(X.edges, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29])}
    E = new_bundle(X, 1, vals)
    assert max_entry(d_nabla_hom(curvature(E))) < 1e-12


def test_dnabla_hom_trivial_is_matrix_coboundary():
    X = canonical_complex("tetrahedron")
    E = trivial_bundle(X, 2)
    A = random_hom_cochain(E, 1, 4)
    dA = d_nabla_hom(A)
    for s in X.triangles:
        expect = sum((-1) ** i * A[s[:i] + s[i + 1 :]] for i in range(3))
        assert np.allclose(dA[s], expect)


def test_hom_shape_validation():
    X = canonical_complex("edge")
    E = random_bundle(X, 2, 1)
    with pytest.raises(CochainError):
        HomCochain(E, 1, {(0, 1): np.eye(3)})


# -- inner products ----------------------------------------------------------------


def test_dot_sections_examples():
    from dvbc.bundle import Metric

    X = canonical_complex("circle")
    E = trivial_bundle(X, 2)
    e1 = section(E, {v: [1.0, 0.0] for v in range(3)})
    assert all(v == 1.0 for v in dot_sections(e1, e1, euclidean_metric(E)).values.values())
    R = trivial_bundle(X, 1)
    one = section(R, {v: [1.0] for v in range(3)})
    M = Metric({v: [[2.0]] for v in range(3)})
    assert dot_sections(one, one, M)[(0,)] == 2.0
    s, t = random_cochain(E, 0, 1), random_cochain(E, 0, 2)
    assert max_difference(dot_sections(s, t, euclidean_metric(E)), dot_sections(t, s, euclidean_metric(E))) < 1e-15


def test_dot_cochain1_section_trivial():
    X = canonical_complex("circle")
    E = trivial_bundle(X, 2)
    a, s = random_cochain(E, 1, 1), random_cochain(E, 0, 2)
    got = dot_cochain1_section(a, s, euclidean_metric(E))
    for i, j in X.edges:
        assert got[(i, j)] == pytest.approx(a[(i, j)] @ (s[(i,)] + s[(j,)]) / 2)


def metric_gap(E, s, t):
    M = euclidean_metric(E)
    lhs = d_scalar(dot_sections(s, t, M))
    rhs = dot_cochain1_section(nabla(s), t, M) + dot_cochain1_section(nabla(t), s, M)
    return max_difference(lhs, rhs)


@pytest.mark.parametrize("seed", range(10))
def test_metric_compatibility_orthogonal(seed):
    E = random_orthogonal_bundle(canonical_complex("tetrahedron"), 3, seed)
    assert metric_gap(E, random_cochain(E, 0, seed + 1), random_cochain(E, 0, seed + 2)) < TOL


def test_metric_compatibility_violated():
    E = new_bundle(canonical_complex("edge"), 1, {(0, 1): 2.0})
    assert metric_gap(E, section(E, {0: [1.0], 1: [1.0]}), section(E, {0: [1.0], 1: [1.0]})) > 0.1
