"""Discrete vector bundles with connection.

A bundle stores one transport matrix per edge ``[i, j]`` with ``i < j``.
The stored matrix is ``U_ij``, which carries the fiber over ``j`` to the
fiber over ``i`` (first index is the target).  ``U_ji`` is the inverse,
computed once at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from dvbc.complex import (
    Check,
    SimplicialComplex,
    SimplicialMap,
    InvalidPathError,
    check_simplicial_map,
    identity_map,
    validate_path,
    is_loop,
)
from dvbc.tolerance import DEFAULT_TOL, RANK_RTOL, Tolerance, is_invertible, max_abs

Edge = tuple[int, int]


class BundleError(ValueError):
    pass


class SingularMatrixError(BundleError):
    pass


def _edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


def _as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    return a


@dataclass(frozen=True, eq=False)
class Bundle:
    base: SimplicialComplex
    dim: Mapping[int, int]
    stored: Mapping[Edge, np.ndarray] = field(repr=False)
    inverse: Mapping[Edge, np.ndarray] = field(repr=False)

    def transport(self, i: int, j: int) -> np.ndarray:
        """``U_ij``: fiber at ``j`` -> fiber at ``i``.  ``i == j`` gives the identity."""
        if i == j:
            return np.eye(self.dim[i])
        if not self.base.has_edge(i, j):
            raise BundleError(f"[{i}, {j}] is not an edge")
        return self.stored[(i, j)] if i < j else self.inverse[(j, i)]

    def rank(self) -> int:
        ranks = set(self.dim.values())
        if len(ranks) != 1:
            raise BundleError(f"fiber dimension is not uniform: {sorted(ranks)}")
        return ranks.pop()

    def edges(self) -> list[Edge]:
        return self.base.edges


def new_bundle(
    X: SimplicialComplex,
    dim: Mapping[int, int] | int,
    transports: Mapping[Sequence[int], object],
    *,
    inverses: Mapping[Sequence[int], object] | None = None,
    strict: bool = True,
    tol: Tolerance = DEFAULT_TOL,
) -> Bundle:
    """Validate transport data and precompute inverses.

    ``transports`` maps each edge ``(i, j)``, ``i < j``, to ``U_ij`` of shape
    ``dim[i] x dim[j]``.  ``inverses`` may supply ``U_ji`` explicitly; with
    ``strict`` the supplied pair must compose to the identity.  Non-strict
    construction exists so that corrupted files can be loaded and then
    reported on by the involution check.
    """
    if isinstance(dim, int):
        dim = {v: dim for v in X.vertices}
    dim = {int(v): int(n) for v, n in dim.items()}
    if set(dim) != set(X.vertices):
        raise BundleError(
            f"fiber dimensions given for {sorted(dim)}, complex has {sorted(X.vertices)}"
        )
    for v, n in dim.items():
        if n < 1:
            raise BundleError(f"fiber dimension at vertex {v} must be positive")
    given = {}
    for key, m in transports.items():
        i, j = (int(a) for a in key)
        if i >= j:
            raise BundleError(f"transport key {[i, j]} must be an ascending edge")
        if not X.has_edge(i, j):
            raise BundleError(f"transport given for non-edge {[i, j]}")
        given[(i, j)] = _as_matrix(m)
    supplied = {tuple(int(a) for a in key): m for key, m in (inverses or {}).items()}
    stored, inverse = {}, {}
    for e in X.edges:
        if e not in given:
            raise BundleError(f"missing transport for edge {list(e)}")
        i, j = e
        m = given[e]
        if m.shape != (dim[i], dim[j]):
            raise BundleError(
                f"transport on edge {list(e)} has shape {m.shape}, expected {(dim[i], dim[j])}"
            )
        if not is_invertible(m, RANK_RTOL):
            raise SingularMatrixError(f"transport on edge {list(e)} is singular")
        m.setflags(write=False)
        stored[e] = m
        if e in supplied:
            inv = _as_matrix(supplied[e])
            if inv.shape != (dim[j], dim[i]):
                raise BundleError(f"inverse on edge {list(e)} has shape {inv.shape}")
            if strict and not tol.close(m @ inv, np.eye(dim[i])):
                raise BundleError(f"supplied inverse on edge {list(e)} is not U_ij^-1")
        else:
            inv = np.linalg.inv(m)
        inv.setflags(write=False)
        inverse[e] = inv
    return Bundle(X, dim, stored, inverse)


def trivial_bundle(X: SimplicialComplex, n: int) -> Bundle:
    return new_bundle(X, n, {e: np.eye(n) for e in X.edges})


def check_involution(E: Bundle, tol: Tolerance = DEFAULT_TOL) -> Check:
    worst = 0.0
    for i, j in E.edges():
        prod = E.transport(i, j) @ E.transport(j, i)
        worst = max(worst, max_abs(prod - np.eye(E.dim[i])))
        if not tol.close(prod, np.eye(E.dim[i])):
            return Check(False, (i, j), worst)
    return Check(True, None, worst)


def transport_along(E: Bundle, path: Sequence[int]) -> np.ndarray:
    """``U_{v0 v1} U_{v1 v2} ... U_{v(k-1) vk}``, mapping the fiber at the end to the start."""
    p = validate_path(E.base, path)
    out = np.eye(E.dim[p[0]])
    for a, b in zip(p, p[1:]):
        out = out @ E.transport(a, b)
    return out


def holonomy(E: Bundle, loop: Sequence[int]) -> np.ndarray:
    if not is_loop(loop):
        raise InvalidPathError(f"path {list(loop)} is not a loop")
    return transport_along(E, loop)


def bundles_close(E: Bundle, F: Bundle, tol: Tolerance = DEFAULT_TOL) -> bool:
    if E.base != F.base or dict(E.dim) != dict(F.dim):
        return False
    return all(tol.close(E.stored[e], F.stored[e]) for e in E.edges())


# -- gauge -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaugeTransform:
    g: Mapping[int, np.ndarray]
    g_inv: Mapping[int, np.ndarray] = field(repr=False, default=None)

    def __post_init__(self):
        g = {int(v): _as_matrix(m) for v, m in self.g.items()}
        inv = {}
        for v, m in g.items():
            if not is_invertible(m):
                raise SingularMatrixError(f"gauge at vertex {v} is singular")
            inv[v] = np.linalg.inv(m)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "g_inv", inv)

    def __getitem__(self, v: int) -> np.ndarray:
        return self.g[v]

    def inverse(self) -> "GaugeTransform":
        return GaugeTransform(self.g_inv)

    def __matmul__(self, other: "GaugeTransform") -> "GaugeTransform":
        """Pointwise product; acting by ``g @ h`` is acting by ``h`` then ``g``."""
        return GaugeTransform({v: self.g[v] @ other.g[v] for v in self.g})


def identity_gauge(E: Bundle) -> GaugeTransform:
    return GaugeTransform({v: np.eye(n) for v, n in E.dim.items()})


def apply_gauge(E: Bundle, g: GaugeTransform) -> Bundle:
    """Change fiber bases: ``U_ij -> g_i U_ij g_j^-1``."""
    for v, n in E.dim.items():
        if v not in g.g or g.g[v].shape != (n, n):
            raise BundleError(f"gauge at vertex {v} does not match fiber dimension {n}")
    return new_bundle(
        E.base, E.dim, {(i, j): g.g[i] @ E.stored[(i, j)] @ g.g_inv[j] for i, j in E.edges()}
    )


# -- constructions -----------------------------------------------------------


def whitney_sum(E: Bundle, F: Bundle) -> Bundle:
    if E.base != F.base:
        raise BundleError("Whitney sum needs bundles over the same complex")
    return new_bundle(
        E.base,
        {v: E.dim[v] + F.dim[v] for v in E.dim},
        {e: scipy.linalg.block_diag(E.stored[e], F.stored[e]) for e in E.edges()},
    )


def pullback_bundle(f: SimplicialMap, E: Bundle) -> Bundle:
    """Fiber ``E_f(i)`` at ``i``; collapsed edges carry the identity."""
    if f.codomain != E.base:
        raise BundleError("map codomain is not the bundle's base")
    chk = check_simplicial_map(f)
    if not chk:
        raise BundleError(f"not a simplicial map: simplex {list(chk.where)}")
    X = f.domain
    return new_bundle(
        X,
        {v: E.dim[f(v)] for v in X.vertices},
        {(i, j): E.transport(f(i), f(j)) for i, j in X.edges},
    )


# -- bundle maps -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BundleMap:
    """Fiber maps ``maps[l]: E_l -> E'_{f(l)}`` covering the simplicial map ``f``."""

    f: SimplicialMap
    maps: Mapping[int, np.ndarray]


def check_bundle_map(
    m: BundleMap, source: Bundle, target: Bundle, tol: Tolerance = DEFAULT_TOL
) -> Check:
    """Commuting squares ``U'_{f(j) f(i)} m_i = m_j U_{ji}`` on every edge."""
    f = m.f
    if source.base != f.domain or target.base != f.codomain:
        raise BundleError("bundle map does not cover the given bundles")
    for v in source.base.vertices:
        shape = (target.dim[f(v)], source.dim[v])
        if np.shape(m.maps[v]) != shape:
            raise BundleError(f"fiber map at {v} has shape {np.shape(m.maps[v])}, expected {shape}")
    worst = 0.0
    bad = None
    for i, j in source.edges():
        for a, b in ((i, j), (j, i)):
            lhs = target.transport(f(b), f(a)) @ m.maps[a]
            rhs = m.maps[b] @ source.transport(b, a)
            worst = max(worst, max_abs(lhs - rhs))
            if bad is None and not tol.close(lhs, rhs):
                bad = (i, j)
    return Check(bad is None, bad, worst)


def canonical_pullback_map(f: SimplicialMap, E: Bundle) -> tuple[Bundle, BundleMap]:
    """The pullback bundle with its identity-on-fibers map to ``E``."""
    P = pullback_bundle(f, E)
    return P, BundleMap(f, {v: np.eye(E.dim[f(v)]) for v in f.domain.vertices})


def factor_through_pullback(
    m: BundleMap, source: Bundle, target: Bundle, tol: Tolerance = DEFAULT_TOL
) -> BundleMap:
    """The unique map ``source -> f*target`` over the identity through which ``m`` factors.

    Fibers of ``f*target`` at ``l`` are ``target_{f(l)}``, so the fiber maps
    are unchanged; only the covered simplicial map becomes the identity.
    """
    chk = check_bundle_map(m, source, target, tol)
    if not chk:
        raise BundleError(f"not a bundle map: squares fail on edge {list(chk.where)}")
    return BundleMap(identity_map(source.base), {v: np.array(a) for v, a in m.maps.items()})


def compose_bundle_maps(second: BundleMap, first: BundleMap) -> BundleMap:
    """``second o first``; the simplicial maps compose as well."""
    from dvbc.complex import compose

    f = compose(second.f, first.f)
    return BundleMap(f, {v: second.maps[first.f(v)] @ first.maps[v] for v in first.maps})


# -- metrics -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Metric:
    gram: Mapping[int, np.ndarray]

    def __post_init__(self):
        gram = {int(v): _as_matrix(m) for v, m in self.gram.items()}
        for v, G in gram.items():
            if G.ndim != 2 or G.shape[0] != G.shape[1]:
                raise BundleError(f"Gram matrix at {v} is not square")
            if not DEFAULT_TOL.close(G, G.T):
                raise BundleError(f"Gram matrix at {v} is not symmetric")
            try:
                np.linalg.cholesky((G + G.T) / 2)
            except np.linalg.LinAlgError:
                raise BundleError(f"Gram matrix at {v} is not positive definite") from None
        object.__setattr__(self, "gram", gram)

    def __getitem__(self, v: int) -> np.ndarray:
        return self.gram[v]


def euclidean_metric(E: Bundle) -> Metric:
    return Metric({v: np.eye(n) for v, n in E.dim.items()})


def is_metric_compatible(E: Bundle, M: Metric, tol: Tolerance = DEFAULT_TOL) -> Check:
    """Inner-product preservation in Gram form: ``U_ijᵀ G_i U_ij = G_j``."""
    for v, n in E.dim.items():
        if M[v].shape != (n, n):
            raise BundleError(f"Gram matrix at {v} has wrong shape")
    worst = 0.0
    bad = None
    for i, j in E.edges():
        U = E.transport(i, j)
        lhs = U.T @ M[i] @ U
        worst = max(worst, max_abs(lhs - M[j]))
        if bad is None and not tol.close(lhs, M[j]):
            bad = (i, j)
    return Check(bad is None, bad, worst)
