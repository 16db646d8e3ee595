"""Named complexes, seeded random data and the worked examples used in tests.

Random data comes from ``numpy.random.Generator(PCG64(seed))``; the same
seed always reproduces the same fixture bit for bit.  Entries are drawn in
canonical simplex order.
"""

from __future__ import annotations

import itertools

import numpy as np

from dvbc.bundle import Bundle, GaugeTransform, new_bundle
from dvbc.cochain import HomCochain, ScalarCochain, VBCochain
from dvbc.complex import SimplicialComplex, SimplicialMap, build_complex

SINGULAR_FLOOR = 0.1


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def canonical_complex(name: str) -> SimplicialComplex:
    if name == "circle":
        return build_complex([[0, 1], [1, 2], [0, 2]])
    if name == "edge":
        return build_complex([[0, 1]])
    if name == "filled_triangle":
        return build_complex([[0, 1, 2]])
    if name == "tetrahedron":
        return build_complex([[0, 1, 2, 3]])
    if name == "tetra_skeleton":
        return build_complex(itertools.combinations(range(4), 2))
    if name == "tetra_boundary":
        return build_complex(itertools.combinations(range(4), 3))
    if name == "simplex4_boundary":
        return build_complex(itertools.combinations(range(5), 4))
    raise KeyError(f"unknown complex {name!r}")


def random_invertible(gen: np.random.Generator, n: int) -> np.ndarray:
    """``I + 0.5 N`` with ``N`` uniform on [-1, 1], resampled until well conditioned."""
    while True:
        m = np.eye(n) + 0.5 * gen.uniform(-1.0, 1.0, size=(n, n))
        if np.linalg.svd(m, compute_uv=False)[-1] >= SINGULAR_FLOOR:
            return m


def random_bundle(X: SimplicialComplex, n: int, seed: int) -> Bundle:
    if n < 1:
        raise ValueError("rank must be positive")
    gen = rng(seed)
    return new_bundle(X, n, {e: random_invertible(gen, n) for e in X.edges})


def random_gauge(E: Bundle, seed: int) -> GaugeTransform:
    gen = rng(seed)
    return GaugeTransform({v: random_invertible(gen, E.dim[v]) for v in sorted(E.dim)})


def random_orthogonal(gen: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(gen.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_orthogonal_bundle(X: SimplicialComplex, n: int, seed: int) -> Bundle:
    gen = rng(seed)
    return new_bundle(X, n, {e: random_orthogonal(gen, n) for e in X.edges})


def random_cochain(E: Bundle, k: int, seed: int) -> VBCochain:
    gen = rng(seed)
    vals = {s: gen.uniform(-1.0, 1.0, size=E.dim[s[0]]) for s in E.base.simplices_of(k)}
    return VBCochain(E, k, vals)


def random_hom_cochain(E: Bundle, k: int, seed: int) -> HomCochain:
    gen = rng(seed)
    vals = {s: gen.uniform(-1.0, 1.0, size=(E.dim[s[0]], E.dim[s[-1]])) for s in E.base.simplices_of(k)}
    return HomCochain(E, k, vals)


def random_scalar_cochain(X: SimplicialComplex, k: int, seed: int) -> ScalarCochain:
    gen = rng(seed)
    return ScalarCochain(X, k, {s: gen.uniform(-1.0, 1.0) for s in X.simplices_of(k)})


def random_monotone_map(X: SimplicialComplex, Y: SimplicialComplex, seed: int) -> SimplicialMap:
    """Order-preserving vertex map into a full simplex ``Y``."""
    top = max(Y.simplices_of(Y.dim))
    if len(Y.simplices_of(Y.dim)) != 1:
        raise ValueError("codomain must be a single full simplex")
    gen = rng(seed)
    values = sorted(int(v) for v in gen.choice(top, size=len(X.vertices)))
    return SimplicialMap(X, Y, dict(zip(sorted(X.vertices), values)))


def random_vertex_map(X: SimplicialComplex, Y: SimplicialComplex, seed: int) -> SimplicialMap:
    """Arbitrary vertex map into a full simplex ``Y``."""
    top = max(Y.simplices_of(Y.dim))
    if len(Y.simplices_of(Y.dim)) != 1:
        raise ValueError("codomain must be a single full simplex")
    gen = rng(seed)
    return SimplicialMap(X, Y, {v: int(gen.choice(top)) for v in sorted(X.vertices)})


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotation_bundle_circle(theta: float) -> Bundle:
    """Rank 2 over the circle: identity on [0,1] and [0,2], rotation by ``theta`` on [1,2]."""
    X = canonical_complex("circle")
    return new_bundle(X, 2, {(0, 1): np.eye(2), (0, 2): np.eye(2), (1, 2): rotation(theta)})


def scalar_bundle(name: str, u: float, v: float, w: float) -> Bundle:
    """Rank 1 over ``circle`` or ``filled_triangle`` with ``U_01 = u``, ``U_12 = v``, ``U_02 = w``."""
    X = canonical_complex(name)
    return new_bundle(X, 1, {(0, 1): u, (1, 2): v, (0, 2): w})


def collapse_map() -> SimplicialMap:
    """Tetrahedron onto the filled triangle: ``u_i -> v_i`` for ``i <= 2`` and ``u_3 -> v_0``."""
    return SimplicialMap(
        canonical_complex("tetrahedron"), canonical_complex("filled_triangle"), {0: 0, 1: 1, 2: 2, 3: 0}
    )


def circle_to_edge_map() -> SimplicialMap:
    """Circle onto a single edge: ``u_0, u_2 -> v_0`` and ``u_1 -> v_1``."""
    return SimplicialMap(canonical_complex("circle"), canonical_complex("edge"), {0: 0, 1: 1, 2: 0})
