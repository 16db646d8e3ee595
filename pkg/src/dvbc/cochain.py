"""Scalar, bundle-valued and Hom-valued cochains and the operators between them.

Storage convention: a bundle-valued cochain keeps, for every canonically
ordered simplex ``[v0 < ... < vk]``, one vector in the fiber over ``v0``.
Evaluating on another ordering multiplies by the permutation sign; evaluating
"at" another vertex ``b`` of the ambient simplex transports along the single
edge ``[b, v0]``.

Operators built from other cochains (``d_nabla``, ``cup``, ``wedge``) are
available in two forms: a rule that evaluates the defining formula on an
arbitrary vertex ordering (``*_at`` functions and :class:`DerivedCochain`),
and a materialized :class:`VBCochain` holding the values on canonical keys.
Pullbacks go through the rule, so a pulled-back derived cochain is the
formula evaluated on the image ordering, not a re-transported stored value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from dvbc.bundle import Bundle, Metric, pullback_bundle
from dvbc.complex import (
    ComplexError,
    Simplex,
    SimplicialComplex,
    SimplicialMap,
    canonicalize,
    check_simplicial_map,
)
from dvbc.tolerance import max_abs


class CochainError(ValueError):
    pass


def _check_key(X: SimplicialComplex, key, k: int) -> Simplex:
    key = tuple(int(v) for v in key)
    if len(key) != k + 1 or any(a >= b for a, b in zip(key, key[1:])):
        raise CochainError(f"{list(key)} is not a canonical {k}-simplex")
    if key not in X.simplices.get(k, ()):
        raise CochainError(f"simplex {list(key)} is not in the complex")
    return key


# -- scalar cochains ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScalarCochain:
    base: SimplicialComplex
    degree: int
    values: Mapping[Simplex, float]

    def __post_init__(self):
        vals = {_check_key(self.base, key, self.degree): float(v) for key, v in self.values.items()}
        object.__setattr__(self, "values", vals)

    def __getitem__(self, key) -> float:
        return self.values.get(tuple(key), 0.0)

    def at(self, ordering: Sequence[int]) -> float:
        key, sign = canonicalize(ordering)
        if key not in self.base:
            raise CochainError(f"simplex {list(key)} is not in the complex")
        return sign * self.values.get(key, 0.0)

    def keys(self) -> list[Simplex]:
        return self.base.simplices_of(self.degree)

    def _combine(self, other: "ScalarCochain", op) -> "ScalarCochain":
        if other.base != self.base or other.degree != self.degree:
            raise CochainError("cochains live on different spaces")
        return ScalarCochain(self.base, self.degree, {k: op(self[k], other[k]) for k in self.keys()})

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __rmul__(self, c: float):
        return ScalarCochain(self.base, self.degree, {k: c * self[k] for k in self.keys()})

    def __neg__(self):
        return -1.0 * self


def scalar_cochain(X: SimplicialComplex, k: int, values: Mapping | None = None) -> ScalarCochain:
    return ScalarCochain(X, k, dict(values or {}))


def constant_scalar(X: SimplicialComplex, c: float = 1.0) -> ScalarCochain:
    return ScalarCochain(X, 0, {s: c for s in X.simplices_of(0)})


def d_scalar(w: ScalarCochain) -> ScalarCochain:
    """Coboundary: alternating sum over facets."""
    k = w.degree + 1
    vals = {}
    for s in w.base.simplices_of(k):
        vals[s] = sum((-1) ** i * w[s[:i] + s[i + 1 :]] for i in range(len(s)))
    return ScalarCochain(w.base, k, vals)


# -- bundle-valued cochains --------------------------------------------------


@dataclass(frozen=True, eq=False)
class VBCochain:
    bundle: Bundle
    degree: int
    values: Mapping[Simplex, np.ndarray]

    def __post_init__(self):
        E = self.bundle
        vals = {}
        for key, v in self.values.items():
            key = _check_key(E.base, key, self.degree)
            vec = np.array(v, dtype=float).reshape(-1)
            if vec.shape != (E.dim[key[0]],):
                raise CochainError(
                    f"value on {list(key)} has length {vec.size}, fiber at {key[0]} has {E.dim[key[0]]}"
                )
            vec.setflags(write=False)
            vals[key] = vec
        object.__setattr__(self, "values", vals)

    def __getitem__(self, key) -> np.ndarray:
        key = tuple(key)
        v = self.values.get(key)
        return np.zeros(self.bundle.dim[key[0]]) if v is None else v

    def at(self, ordering: Sequence[int]) -> np.ndarray:
        """Value on an oriented simplex, expressed in the fiber over ``ordering[0]``."""
        return evaluate(self, ordering, ordering[0])

    def keys(self) -> list[Simplex]:
        return self.bundle.base.simplices_of(self.degree)

    def _combine(self, other, op) -> "VBCochain":
        if other.bundle is not self.bundle or other.degree != self.degree:
            raise CochainError("cochains live on different spaces")
        return VBCochain(self.bundle, self.degree, {k: op(self[k], other[k]) for k in self.keys()})

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rmul__(self, c: float):
        return VBCochain(self.bundle, self.degree, {k: c * self[k] for k in self.keys()})

    def __neg__(self):
        return -1.0 * self


def vb_cochain(E: Bundle, k: int, values: Mapping | None = None) -> VBCochain:
    return VBCochain(E, k, dict(values or {}))


def section(E: Bundle, values: Mapping[int, object]) -> VBCochain:
    return VBCochain(E, 0, {(v,): x for v, x in values.items()})


def evaluate(c: VBCochain, ordering: Sequence[int], base: int) -> np.ndarray:
    """Sign-adjusted stored value, transported from the simplex's lowest vertex to ``base``.

    ``base`` must be the lowest vertex or joined to it by an edge; inside a
    simplex of the complex every pair of vertices is an edge.
    """
    key, sign = canonicalize(ordering)
    E = c.bundle
    if len(key) != c.degree + 1:
        raise CochainError(f"degree-{c.degree} cochain evaluated on {len(key) - 1}-simplex")
    if key not in E.base:
        raise CochainError(f"simplex {list(key)} is not in the complex")
    return sign * (E.transport(base, key[0]) @ c[key])


@dataclass(frozen=True, eq=False)
class DerivedCochain:
    """A bundle-valued cochain given by a rule on oriented simplices.

    ``rule(ordering)`` returns the value in the fiber over ``ordering[0]``.
    """

    bundle: Bundle
    degree: int
    rule: Callable[[tuple[int, ...]], np.ndarray]

    def at(self, ordering: Sequence[int]) -> np.ndarray:
        return self.rule(tuple(ordering))

    def materialize(self) -> VBCochain:
        return VBCochain(
            self.bundle, self.degree, {s: self.rule(s) for s in self.bundle.base.simplices_of(self.degree)}
        )


AnyVB = Union[VBCochain, DerivedCochain]


def _check_degree_fits(X: SimplicialComplex, k: int) -> None:
    if k > X.dim:
        raise CochainError(f"degree {k} exceeds complex dimension {X.dim}")


# -- covariant derivatives ---------------------------------------------------


def d_nabla_at(alpha: VBCochain, ordering: Sequence[int]) -> np.ndarray:
    """``U_{01} alpha[1..k+1] + sum_{i>=1} (-1)^i alpha[0..^i..k+1]`` at ``ordering[0]``."""
    rho = tuple(ordering)
    E = alpha.bundle
    out = E.transport(rho[0], rho[1]) @ evaluate(alpha, rho[1:], rho[1])
    for i in range(1, len(rho)):
        out = out + (-1) ** i * evaluate(alpha, rho[:i] + rho[i + 1 :], rho[0])
    return out


def d_nabla_rule(alpha: VBCochain) -> DerivedCochain:
    return DerivedCochain(alpha.bundle, alpha.degree + 1, lambda rho: d_nabla_at(alpha, rho))


def d_nabla(alpha: VBCochain) -> VBCochain:
    """Exterior covariant derivative."""
    _check_degree_fits(alpha.bundle.base, alpha.degree + 1)
    return d_nabla_rule(alpha).materialize()


def nabla(s: VBCochain) -> VBCochain:
    """Covariant derivative of a section: ``U_ij s_j - s_i`` on ``[i, j]``."""
    if s.degree != 0:
        raise CochainError("nabla acts on sections (degree 0)")
    missing = [v for (v,) in s.keys() if (v,) not in s.values]
    if missing:
        raise CochainError(f"section undefined at vertices {missing}")
    return d_nabla(s)


# -- products ----------------------------------------------------------------

ALPHA_FIRST = "alpha_first"
W_FIRST = "w_first"


def _check_order(order: str) -> None:
    if order not in (ALPHA_FIRST, W_FIRST):
        raise CochainError(f"order must be {ALPHA_FIRST!r} or {W_FIRST!r}, got {order!r}")


def _check_same_base(alpha, w: ScalarCochain) -> None:
    if alpha.bundle.base != w.base:
        raise CochainError("operands live on different complexes")


def cup_at(
    alpha: VBCochain, w: ScalarCochain, ordering: Sequence[int], order: str = ALPHA_FIRST, base: int | None = None
) -> np.ndarray:
    """Front-face/back-face product, expressed in the fiber over ``base`` (default ``ordering[0]``)."""
    rho = tuple(ordering)
    base = rho[0] if base is None else base
    k, l = alpha.degree, w.degree
    if order == ALPHA_FIRST:
        return evaluate(alpha, rho[: k + 1], base) * w.at(rho[k:])
    return w.at(rho[: l + 1]) * evaluate(alpha, rho[l:], base)


def cup(alpha: VBCochain, w: ScalarCochain, order: str = ALPHA_FIRST) -> VBCochain:
    _check_order(order)
    _check_same_base(alpha, w)
    _check_degree_fits(w.base, alpha.degree + w.degree)
    k = alpha.degree + w.degree
    return DerivedCochain(alpha.bundle, k, lambda rho: cup_at(alpha, w, rho, order)).materialize()


def wedge_at(alpha: VBCochain, w: ScalarCochain, ordering: Sequence[int], order: str = ALPHA_FIRST) -> np.ndarray:
    """Antisymmetrized cup product, normalized by ``1/(k+l+1)!``."""
    rho = tuple(ordering)
    n = len(rho)
    total = np.zeros(alpha.bundle.dim[rho[0]])
    for perm in itertools.permutations(range(n)):
        sign = canonicalize(perm)[1]
        total = total + sign * cup_at(alpha, w, tuple(rho[p] for p in perm), order, rho[0])
    return total / math.factorial(n)


def wedge_rule(alpha: VBCochain, w: ScalarCochain, order: str = ALPHA_FIRST) -> DerivedCochain:
    _check_order(order)
    _check_same_base(alpha, w)
    return DerivedCochain(alpha.bundle, alpha.degree + w.degree, lambda rho: wedge_at(alpha, w, rho, order))


def wedge(alpha: VBCochain, w: ScalarCochain, order: str = ALPHA_FIRST) -> VBCochain:
    _check_degree_fits(w.base, alpha.degree + w.degree)
    return wedge_rule(alpha, w, order).materialize()


OUTER_ALPHA = "outer_alpha"
OUTER_W = "outer_w"


def _position_sign(ordering: Sequence[int], reference: Sequence[int]) -> int:
    pos = {v: i for i, v in enumerate(reference)}
    return canonicalize([pos[v] for v in ordering])[1]


def _averaged_at(front, back, p: int, q: int, rho: tuple[int, ...], outer_front: bool):
    """Double average over faces of ``rho`` for a product ``front ⌣ back``.

    ``front``/``back`` evaluate a degree-``p``/``q`` cochain on an ordering.
    The outer sum runs over faces of the outer factor with the orientation
    inherited from ``rho``; the inner sum runs over the vertices ``v`` of
    that face, pairing it with the complementary face through ``v``.  The
    sign attached to each inner term is the sign of the cup-product ordering
    it comes from, corrected for the fixed orientation of the outer face.
    """
    n = len(rho)
    size = (p if outer_front else q) + 1
    total = None
    for positions in itertools.combinations(range(n), size):
        face = tuple(rho[i] for i in positions)
        rest = tuple(v for v in rho if v not in face)
        inner = None
        for v in face:
            others = tuple(u for u in face if u != v)
            if outer_front:
                cup_order = others + (v,) + rest
                sign = _position_sign(cup_order, rho) * _position_sign(others + (v,), face)
                term = sign * back((v,) + rest)
            else:
                cup_order = rest + (v,) + others
                sign = _position_sign(cup_order, rho) * _position_sign((v,) + others, face)
                term = sign * front(rest + (v,))
            inner = term if inner is None else inner + term
        inner = inner / size
        outer = front(face) if outer_front else back(face)
        term = outer * inner
        total = term if total is None else total + term
    return total / math.comb(n, size)


def wedge_averaged_at(
    alpha: VBCochain, w: ScalarCochain, ordering: Sequence[int], mode: str = OUTER_ALPHA, order: str = ALPHA_FIRST
) -> np.ndarray:
    rho = tuple(ordering)
    a = lambda o: evaluate(alpha, o, rho[0])  # noqa: E731
    if order == ALPHA_FIRST:
        front, back, p, q, outer_front = a, w.at, alpha.degree, w.degree, mode == OUTER_ALPHA
    else:
        front, back, p, q, outer_front = w.at, a, w.degree, alpha.degree, mode == OUTER_W
    return _averaged_at(front, back, p, q, rho, outer_front)


def wedge_averaged(alpha: VBCochain, w: ScalarCochain, mode: str = OUTER_ALPHA, order: str = ALPHA_FIRST) -> VBCochain:
    """Wedge product computed as an average over faces instead of over permutations."""
    if mode not in (OUTER_ALPHA, OUTER_W):
        raise CochainError(f"mode must be {OUTER_ALPHA!r} or {OUTER_W!r}")
    _check_order(order)
    _check_same_base(alpha, w)
    _check_degree_fits(w.base, alpha.degree + w.degree)
    k = alpha.degree + w.degree
    return DerivedCochain(alpha.bundle, k, lambda rho: wedge_averaged_at(alpha, w, rho, mode, order)).materialize()


def cup_scalar(a: ScalarCochain, b: ScalarCochain) -> ScalarCochain:
    k = a.degree + b.degree
    return ScalarCochain(a.base, k, {s: a.at(s[: a.degree + 1]) * b.at(s[a.degree :]) for s in a.base.simplices_of(k)})


def wedge_scalar(a: ScalarCochain, b: ScalarCochain) -> ScalarCochain:
    """Antisymmetrized cup product of two real cochains."""
    if a.base != b.base:
        raise CochainError("operands live on different complexes")
    k = a.degree + b.degree
    _check_degree_fits(a.base, k)
    n = k + 1
    vals = {}
    for s in a.base.simplices_of(k):
        total = 0.0
        for perm in itertools.permutations(range(n)):
            o = tuple(s[p] for p in perm)
            total += canonicalize(perm)[1] * a.at(o[: a.degree + 1]) * b.at(o[a.degree :])
        vals[s] = total / math.factorial(n)
    return ScalarCochain(a.base, k, vals)


# -- pullbacks ---------------------------------------------------------------


def pullback_scalar(f: SimplicialMap, w: ScalarCochain) -> ScalarCochain:
    if f.codomain != w.base:
        raise CochainError("cochain does not live on the map's codomain")
    k = w.degree
    vals = {}
    for s in f.domain.simplices_of(k):
        img = f.image(s)
        vals[s] = w.at(img) if len(set(img)) == k + 1 else 0.0
    return ScalarCochain(f.domain, k, vals)


def pullback_cochain(f: SimplicialMap, alpha: AnyVB, pulled: Bundle | None = None) -> VBCochain:
    """Pull back a bundle-valued cochain to ``f*E``.

    The value on ``[u0 .. uk]`` is ``alpha`` on the image ordering, expressed
    at ``f(u0)``, or zero when the image has lower dimension.
    """
    E = alpha.bundle
    if f.codomain != E.base:
        raise CochainError("cochain does not live on the map's codomain")
    chk = check_simplicial_map(f)
    if not chk:
        raise ComplexError(f"not a simplicial map: simplex {list(chk.where)}")
    P = pullback_bundle(f, E) if pulled is None else pulled
    k = alpha.degree
    vals = {}
    for s in f.domain.simplices_of(k):
        img = f.image(s)
        if len(set(img)) == k + 1:
            vals[s] = alpha.at(img)
        else:
            vals[s] = np.zeros(P.dim[s[0]])
    return VBCochain(P, k, vals)


# -- Hom-valued cochains -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class HomCochain:
    """Maps ``E_{vk} -> E_{v0}`` on canonical simplices ``[v0 < ... < vk]``."""

    bundle: Bundle
    degree: int
    values: Mapping[Simplex, np.ndarray]

    def __post_init__(self):
        E = self.bundle
        vals = {}
        for key, m in self.values.items():
            key = _check_key(E.base, key, self.degree)
            a = np.array(m, dtype=float)
            if a.ndim == 0:
                a = a.reshape(1, 1)
            shape = (E.dim[key[0]], E.dim[key[-1]])
            if a.shape != shape:
                raise CochainError(f"value on {list(key)} has shape {a.shape}, expected {shape}")
            a.setflags(write=False)
            vals[key] = a
        object.__setattr__(self, "values", vals)

    def __getitem__(self, key) -> np.ndarray:
        key = tuple(key)
        m = self.values.get(key)
        return np.zeros((self.bundle.dim[key[0]], self.bundle.dim[key[-1]])) if m is None else m

    def keys(self) -> list[Simplex]:
        return self.bundle.base.simplices_of(self.degree)


def hom_cochain(E: Bundle, k: int, values: Mapping | None = None) -> HomCochain:
    return HomCochain(E, k, dict(values or {}))


def identity_hom(E: Bundle) -> HomCochain:
    return HomCochain(E, 0, {(v,): np.eye(n) for v, n in E.dim.items()})


def curvature(E: Bundle) -> HomCochain:
    """``F_012 = U_01 U_12 - U_02`` on every triangle."""
    vals = {}
    for a, b, c in E.base.triangles:
        vals[(a, b, c)] = E.transport(a, b) @ E.transport(b, c) - E.transport(a, c)
    return HomCochain(E, 2, vals)


def curvature_permuted(E: Bundle, ordering: Sequence[int]) -> np.ndarray:
    """Curvature on a reordered triangle, expressed through ``F`` on the sorted one.

    For ``[a<b<c]`` these are ``F_acb = -F U_cb``, ``F_bac = -U_ba F``,
    ``F_bca = U_ba F U_ca``, ``F_cab = U_ca F U_cb`` and
    ``F_cba = -U_ca F U_cb U_ba``.
    """
    key, _ = canonicalize(ordering)
    if len(key) != 3 or key not in E.base:
        raise CochainError(f"{list(ordering)} is not a triangle of the complex")
    a, b, c = key
    U = E.transport
    F = U(a, b) @ U(b, c) - U(a, c)
    o = tuple(ordering)
    if o == (a, b, c):
        return F
    if o == (a, c, b):
        return -F @ U(c, b)
    if o == (b, a, c):
        return -U(b, a) @ F
    if o == (b, c, a):
        return U(b, a) @ F @ U(c, a)
    if o == (c, a, b):
        return U(c, a) @ F @ U(c, b)
    return -U(c, a) @ F @ U(c, b) @ U(b, a)


def hom_action(A: HomCochain, alpha: VBCochain) -> VBCochain:
    """``(A alpha)[0..k+l] = A[0..k] alpha[k..k+l]``."""
    if A.bundle is not alpha.bundle:
        raise CochainError("operands live on different bundles")
    k, l = A.degree, alpha.degree
    _check_degree_fits(A.bundle.base, k + l)
    vals = {}
    for s in A.bundle.base.simplices_of(k + l):
        vals[s] = A[s[: k + 1]] @ alpha[s[k:]]
    return VBCochain(alpha.bundle, k + l, vals)


def d_nabla_hom(A: HomCochain) -> HomCochain:
    """``U_01 A[1..] + sum_{1<=i<=k} (-1)^i A[..^i..] + (-1)^{k+1} A[0..k] U_{k,k+1}``."""
    E = A.bundle
    k = A.degree
    _check_degree_fits(E.base, k + 1)
    vals = {}
    for s in E.base.simplices_of(k + 1):
        m = E.transport(s[0], s[1]) @ A[s[1:]]
        for i in range(1, k + 1):
            m = m + (-1) ** i * A[s[:i] + s[i + 1 :]]
        m = m + (-1) ** (k + 1) * A[s[:-1]] @ E.transport(s[k], s[k + 1])
        vals[s] = m
    return HomCochain(E, k + 1, vals)


# -- inner products ----------------------------------------------------------


def dot_sections(s: VBCochain, t: VBCochain, M: Metric) -> ScalarCochain:
    if s.degree != 0 or t.degree != 0:
        raise CochainError("dot_sections needs two sections")
    X = s.bundle.base
    return ScalarCochain(X, 0, {(v,): float(s[(v,)] @ M[v] @ t[(v,)]) for (v,) in X.simplices_of(0)})


def dot_cochain1_section(alpha: VBCochain, s: VBCochain, M: Metric) -> ScalarCochain:
    """On ``[0, 1]``: ``alpha_01 . (s_0 + U_01 s_1) / 2`` in the metric at vertex 0."""
    if alpha.degree != 1 or s.degree != 0:
        raise CochainError("dot_cochain1_section needs a 1-cochain and a section")
    E = alpha.bundle
    vals = {}
    for i, j in E.base.edges:
        avg = (s[(i,)] + E.transport(i, j) @ s[(j,)]) / 2
        vals[(i, j)] = float(alpha[(i, j)] @ M[i] @ avg)
    return ScalarCochain(E.base, 1, vals)


# -- comparisons -------------------------------------------------------------


def max_difference(a, b) -> float:
    """Largest entrywise difference between two cochains of the same kind."""
    if a.degree != b.degree:
        raise CochainError("degrees differ")
    worst = 0.0
    for key in a.keys():
        worst = max(worst, max_abs(np.asarray(a[key]) - np.asarray(b[key])))
    return worst


def max_entry(a) -> float:
    return max((max_abs(a[key]) for key in a.keys()), default=0.0)
