"""Oriented abstract simplicial complexes, simplicial maps, paths and spanning trees.

Simplices are stored as strictly increasing vertex tuples.  Any other
ordering of the same vertices is an oriented simplex whose sign relative to
the stored key is the parity of the sorting permutation.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

Simplex = tuple[int, ...]
Path = tuple[int, ...]


class ComplexError(ValueError):
    """Malformed complex, simplex or simplicial-map input."""


class DegenerateOrderingError(ComplexError):
    pass


class ConnectivityError(ComplexError):
    """Raised when an operation needs a connected complex."""

    def __init__(self, first: Sequence[int], second: Sequence[int]):
        self.components = (tuple(first), tuple(second))
        super().__init__(
            f"complex is disconnected: component {list(first)} "
            f"is not joined to component {list(second)}"
        )


class InvalidPathError(ComplexError):
    pass


class InvalidMoveError(ComplexError):
    pass


class Check(NamedTuple):
    """Outcome of a verification: ``where`` names the first offending item."""

    ok: bool
    where: tuple | None = None
    residual: float = 0.0

    def __bool__(self) -> bool:
        return self.ok


def canonicalize(ordering: Iterable[int]) -> tuple[Simplex, int]:
    """Sort a vertex ordering, returning the key and the permutation sign."""
    verts = tuple(int(v) for v in ordering)
    if len(set(verts)) != len(verts):
        raise DegenerateOrderingError(f"repeated vertex in ordering {list(verts)}")
    inversions = sum(
        1 for a in range(len(verts)) for b in range(a + 1, len(verts)) if verts[a] > verts[b]
    )
    return tuple(sorted(verts)), (-1 if inversions % 2 else 1)


def permutation_sign(perm: Sequence[int]) -> int:
    return canonicalize(perm)[1]


def faces(simplex: Simplex) -> list[Simplex]:
    """Codimension-one faces, the i-th face omitting vertex i."""
    return [simplex[:i] + simplex[i + 1 :] for i in range(len(simplex))]


@dataclass(frozen=True)
class SimplicialComplex:
    vertices: frozenset[int]
    simplices: Mapping[int, frozenset[Simplex]]
    _neighbors: Mapping[int, tuple[int, ...]] = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        for k, keys in self.simplices.items():
            for s in keys:
                if len(s) != k + 1 or any(a >= b for a, b in zip(s, s[1:])):
                    raise ComplexError(f"simplex {s} is not a canonical {k}-simplex")
                if k > 0:
                    for f in faces(s):
                        if f not in self.simplices.get(k - 1, ()):
                            raise ComplexError(f"face {f} of {s} is missing")
        if set(v for (v,) in self.simplices.get(0, ())) != set(self.vertices):
            raise ComplexError("vertex set does not match the 0-simplices")
        nbrs: dict[int, set[int]] = {v: set() for v in self.vertices}
        for a, b in self.simplices.get(1, ()):
            nbrs[a].add(b)
            nbrs[b].add(a)
        object.__setattr__(self, "_neighbors", {v: tuple(sorted(n)) for v, n in nbrs.items()})

    @property
    def dim(self) -> int:
        return max((k for k, s in self.simplices.items() if s), default=-1)

    def simplices_of(self, k: int) -> list[Simplex]:
        return sorted(self.simplices.get(k, ()))

    @property
    def edges(self) -> list[Simplex]:
        return self.simplices_of(1)

    @property
    def triangles(self) -> list[Simplex]:
        return self.simplices_of(2)

    def all_simplices(self) -> list[Simplex]:
        return [s for k in range(self.dim + 1) for s in self.simplices_of(k)]

    def __contains__(self, vertices) -> bool:
        key = tuple(sorted(set(vertices)))
        return bool(key) and key in self.simplices.get(len(key) - 1, ())

    def has_edge(self, i: int, j: int) -> bool:
        return i != j and (min(i, j), max(i, j)) in self.simplices.get(1, ())

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._neighbors[v]

    def maximal_simplices(self) -> list[Simplex]:
        out = []
        for k in range(self.dim + 1):
            higher = self.simplices.get(k + 1, frozenset())
            cofaces = {f for s in higher for f in faces(s)}
            out.extend(s for s in self.simplices_of(k) if s not in cofaces)
        return sorted(out, key=lambda s: (len(s), s))

    def components(self) -> list[tuple[int, ...]]:
        seen: set[int] = set()
        comps = []
        for start in sorted(self.vertices):
            if start in seen:
                continue
            comp = []
            queue = deque([start])
            seen.add(start)
            while queue:
                v = queue.popleft()
                comp.append(v)
                for w in self.neighbors(v):
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
            comps.append(tuple(sorted(comp)))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def require_connected(self) -> None:
        comps = self.components()
        if len(comps) > 1:
            raise ConnectivityError(comps[0], comps[1])


def build_complex(top_cells: Iterable[Sequence[int]]) -> SimplicialComplex:
    """Close a list of cells under taking faces."""
    simplices: dict[int, set[Simplex]] = {}
    for cell in top_cells:
        cell = [int(v) for v in cell]
        if not cell:
            raise ComplexError("empty cell")
        if any(v < 0 for v in cell):
            raise ComplexError(f"negative vertex id in cell {cell}")
        if len(set(cell)) != len(cell):
            raise ComplexError(f"duplicate vertex in cell {cell}")
        key = tuple(sorted(cell))
        for r in range(1, len(key) + 1):
            for sub in itertools.combinations(key, r):
                simplices.setdefault(r - 1, set()).add(sub)
    vertices = frozenset(v for (v,) in simplices.get(0, ()))
    return SimplicialComplex(vertices, {k: frozenset(s) for k, s in simplices.items()})


@dataclass(frozen=True)
class SimplicialMap:
    domain: SimplicialComplex
    codomain: SimplicialComplex
    vertex_map: Mapping[int, int]

    def __call__(self, v: int) -> int:
        return self.vertex_map[v]

    def image(self, ordering: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.vertex_map[v] for v in ordering)


def check_simplicial_map(f: SimplicialMap) -> Check:
    missing = sorted(set(f.domain.vertices) - set(f.vertex_map))
    if missing:
        raise ComplexError(f"vertex map undefined on {missing}")
    for s in f.domain.all_simplices():
        if set(f.image(s)) not in f.codomain:
            return Check(False, s)
    return Check(True)


def compose(g: SimplicialMap, f: SimplicialMap) -> SimplicialMap:
    """The map ``g o f``."""
    return SimplicialMap(f.domain, g.codomain, {v: g(f(v)) for v in f.domain.vertices})


def identity_map(X: SimplicialComplex) -> SimplicialMap:
    return SimplicialMap(X, X, {v: v for v in X.vertices})


# -- paths -------------------------------------------------------------------


def validate_path(X: SimplicialComplex, path: Sequence[int]) -> Path:
    p = tuple(int(v) for v in path)
    if not p:
        raise InvalidPathError("empty path")
    if p[0] not in X.vertices:
        raise InvalidPathError(f"vertex {p[0]} not in complex")
    for a, b in zip(p, p[1:]):
        if not X.has_edge(a, b):
            raise InvalidPathError(f"[{a}, {b}] is not an edge")
    return p


def is_loop(path: Sequence[int]) -> bool:
    return len(path) > 0 and path[0] == path[-1]


def concatenate(p: Sequence[int], q: Sequence[int]) -> Path:
    if p[-1] != q[0]:
        raise InvalidPathError("paths do not meet")
    return tuple(p) + tuple(q[1:])


def reverse(p: Sequence[int]) -> Path:
    return tuple(reversed(p))


def apply_elementary_homotopy(
    X: SimplicialComplex, path: Sequence[int], i: int, mode: str, vertex: int | None = None
) -> Path:
    """One elementary simple homotopy move.

    ``mode="delete"`` removes ``path[i]``; ``mode="insert"`` puts ``vertex``
    between ``path[i-1]`` and ``path[i]``.  Either way the three vertices
    involved must span a 2-simplex, so endpoints never move.
    """
    p = validate_path(X, path)
    if mode == "delete":
        if not 0 < i < len(p) - 1:
            raise InvalidMoveError("cannot delete an endpoint")
        trio = (p[i - 1], p[i], p[i + 1])
        result = p[:i] + p[i + 1 :]
    elif mode == "insert":
        if vertex is None:
            raise InvalidMoveError("insert needs a vertex")
        if not 0 < i < len(p):
            raise InvalidMoveError("insertion must be strictly between endpoints")
        trio = (p[i - 1], vertex, p[i])
        result = p[:i] + (int(vertex),) + p[i:]
    else:
        raise InvalidMoveError(f"unknown mode {mode!r}")
    if len(set(trio)) != 3 or trio not in X:
        raise InvalidMoveError(f"vertices {list(trio)} do not span a 2-simplex")
    return result


# -- spanning trees ----------------------------------------------------------


@dataclass(frozen=True)
class SpanningTree:
    root: int
    parent: Mapping[int, int | None]

    def path_to_root(self, v: int) -> Path:
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return tuple(out)

    def path_from_root(self, v: int) -> Path:
        return reverse(self.path_to_root(v))

    def tree_edges(self) -> list[Simplex]:
        return sorted(
            (min(v, p), max(v, p)) for v, p in self.parent.items() if p is not None
        )

    def non_tree_edges(self, X: SimplicialComplex) -> list[Simplex]:
        tree = set(self.tree_edges())
        return [e for e in X.edges if e not in tree]


def spanning_tree(X: SimplicialComplex, root: int | None = None) -> SpanningTree:
    """Breadth-first tree from the smallest vertex, visiting neighbours in ascending order."""
    if not X.vertices:
        raise ComplexError("empty complex")
    X.require_connected()
    root = min(X.vertices) if root is None else root
    parent: dict[int, int | None] = {root: None}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in X.neighbors(v):
            if w not in parent:
                parent[w] = v
                queue.append(w)
    return SpanningTree(root, parent)


def generator_loops(X: SimplicialComplex, tree: SpanningTree) -> list[Path]:
    """One loop at the root per non-tree edge ``[u, v]``: root -> u -> v -> root."""
    loops = []
    for u, v in tree.non_tree_edges(X):
        loops.append(tree.path_from_root(u) + tree.path_to_root(v))
    return loops
