"""Flatness, holonomy, trivialization, parallel sections and structure groups.

Everything past ``is_flat`` needs a connected base complex.  Loops are the
tree-generator loops of a breadth-first spanning tree (one per non-tree
edge), which stand in for generators of the fundamental group.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from dvbc.bundle import (
    Bundle,
    BundleError,
    GaugeTransform,
    Metric,
    holonomy,
    is_metric_compatible,
    transport_along,
)
from dvbc.cochain import VBCochain
from dvbc.complex import (
    Check,
    Path,
    Simplex,
    SpanningTree,
    generator_loops,
    spanning_tree,
)
from dvbc.tolerance import DEFAULT_TOL, RANK_RTOL, Tolerance, kernel, max_abs, rank


class FlatnessReport(NamedTuple):
    flat: bool
    witness: Simplex | None
    residual: float


def triangle_holonomy(E: Bundle, t: Simplex) -> np.ndarray:
    i, j, k = t
    return holonomy(E, (i, j, k, i))


def is_flat(E: Bundle, tol: Tolerance = DEFAULT_TOL) -> FlatnessReport:
    """Holonomy around every triangle is the identity.

    The witness of a non-flat bundle is the triangle with the largest
    ``max|hol - I|``; ties go to the first triangle in canonical order.
    """
    worst, worst_t, flat = 0.0, None, True
    for t in E.base.triangles:
        hol = triangle_holonomy(E, t)
        ident = np.eye(hol.shape[0])
        if not tol.close(hol, ident):
            flat = False
            r = max_abs(hol - ident)
            if worst_t is None or r > worst:
                worst, worst_t = r, t
    return FlatnessReport(flat, worst_t, worst)


def holonomy_representation(
    E: Bundle, tree: SpanningTree | None = None
) -> list[tuple[Path, np.ndarray]]:
    tree = spanning_tree(E.base) if tree is None else tree
    return [(loop, holonomy(E, loop)) for loop in generator_loops(E.base, tree)]


def tree_frames(E: Bundle, tree: SpanningTree) -> dict[int, np.ndarray]:
    """``P_v``: transport from the root fiber to the fiber at ``v`` along the tree."""
    return {v: transport_along(E, tree.path_to_root(v)) for v in sorted(E.base.vertices)}


# -- trivialization ----------------------------------------------------------

NON_FLAT = "non_flat"
NONTRIVIAL_HOLONOMY = "nontrivial_holonomy"


@dataclass(frozen=True)
class Obstruction:
    kind: str
    where: tuple[int, ...]
    residual: float

    def describe(self) -> str:
        if self.kind == NON_FLAT:
            return f"non_flat: holonomy around triangle {list(self.where)} differs from I by {self.residual:.3g}"
        return f"nontrivial_holonomy: loop {list(self.where)} differs from I by {self.residual:.3g}"


@dataclass(frozen=True)
class TrivializationResult:
    gauge: GaugeTransform | None = None
    obstruction: Obstruction | None = None

    @property
    def ok(self) -> bool:
        return self.gauge is not None


def trivialize(E: Bundle, tol: Tolerance = DEFAULT_TOL) -> TrivializationResult:
    """Gauge making every transport the identity, or the first obstruction.

    Non-flat triangles are reported before nontrivial generator holonomy,
    each in canonical order.  The gauge is ``g_v = P_v^-1`` where ``P_v``
    carries a basis of the root fiber to ``v`` along the spanning tree.
    """
    tree = spanning_tree(E.base)
    for t in E.base.triangles:
        hol = triangle_holonomy(E, t)
        if not tol.close(hol, np.eye(hol.shape[0])):
            return TrivializationResult(obstruction=Obstruction(NON_FLAT, t, max_abs(hol - np.eye(hol.shape[0]))))
    for loop, hol in holonomy_representation(E, tree):
        if not tol.close(hol, np.eye(hol.shape[0])):
            return TrivializationResult(
                obstruction=Obstruction(NONTRIVIAL_HOLONOMY, loop, max_abs(hol - np.eye(hol.shape[0])))
            )
    frames = tree_frames(E, tree)
    return TrivializationResult(gauge=GaugeTransform(frames).inverse())


# -- parallel sections -------------------------------------------------------


@dataclass(frozen=True)
class ParallelBasis:
    bundle: Bundle
    sections: tuple[VBCochain, ...]

    @property
    def dimension(self) -> int:
        return len(self.sections)

    def matrix_at(self, v: int) -> np.ndarray:
        """Section values at ``v`` as the columns of an ``n x k`` matrix."""
        n = self.bundle.dim[v]
        if not self.sections:
            return np.zeros((n, 0))
        return np.column_stack([s[(v,)] for s in self.sections])


def is_parallel(s: VBCochain, tol: Tolerance = DEFAULT_TOL) -> Check:
    E = s.bundle
    for i, j in E.edges():
        a, b = E.transport(i, j) @ s[(j,)], s[(i,)]
        if not tol.close(a, b):
            return Check(False, (i, j), max_abs(a - b))
    return Check(True)


def parallel_sections(E: Bundle, tol: Tolerance = DEFAULT_TOL, rtol: float = RANK_RTOL) -> ParallelBasis:
    """Basis of the parallel sections.

    Fixed vectors of all generator holonomies at the root are spread over
    the complex by tree transport; every candidate is then re-checked on all
    edges and dropped if it fails.
    """
    tree = spanning_tree(E.base)
    n = E.dim[tree.root]
    hols = holonomy_representation(E, tree)
    stacked = np.vstack([h - np.eye(n) for _, h in hols]) if hols else np.zeros((0, n))
    fixed = kernel(stacked, n, rtol)
    frames = tree_frames(E, tree)
    sections = []
    for c in range(fixed.shape[1]):
        x = fixed[:, c]
        s = VBCochain(E, 0, {(v,): frames[v] @ x for v in frames})
        if is_parallel(s, tol):
            sections.append(s)
    return ParallelBasis(E, tuple(sections))


def _complete_basis(S: np.ndarray) -> np.ndarray:
    """Append standard basis vectors to the columns of ``S``, largest leftover first."""
    n, k = S.shape
    cols = [S[:, c] for c in range(k)]
    while len(cols) < n:
        q, _ = np.linalg.qr(np.column_stack(cols)) if cols else (np.zeros((n, 0)), None)
        leftover = np.eye(n) - q @ q.T
        norms = np.linalg.norm(leftover, axis=0)
        cols.append(np.eye(n)[:, int(np.argmax(norms))])
    return np.column_stack(cols)


def trivial_subbundle_gauge(
    basis: ParallelBasis, rtol: float = RANK_RTOL
) -> GaugeTransform:
    """Gauge putting every transport in block upper-triangular form with an identity top-left block.

    The new frame ``P_v`` at each vertex has the section values as its
    first ``k`` columns, completed by standard basis vectors; the gauge is
    ``P_v^-1``.
    """
    k = basis.dimension
    if k == 0:
        raise BundleError("empty parallel basis")
    frames = {}
    for v in sorted(basis.bundle.base.vertices):
        S = basis.matrix_at(v)
        if rank(S, rtol) < k:
            raise BundleError(f"parallel sections are dependent at vertex {v}")
        frames[v] = _complete_basis(S)
    return GaugeTransform(frames).inverse()


# -- structure groups --------------------------------------------------------


@dataclass(frozen=True)
class BlockDiagonal:
    k: int


@dataclass(frozen=True)
class BlockUpperUnit:
    k: int


@dataclass(frozen=True)
class Orthogonal:
    metric: Metric


def block_diagonal(k: int) -> BlockDiagonal:
    return BlockDiagonal(k)


def block_upper_unit(k: int) -> BlockUpperUnit:
    return BlockUpperUnit(k)


def orthogonal(M: Metric) -> Orthogonal:
    return Orthogonal(M)


def _pattern_parts(U: np.ndarray, group) -> list[tuple[np.ndarray, np.ndarray]]:
    k = group.k
    lower = U[k:, :k]
    if isinstance(group, BlockDiagonal):
        other = U[:k, k:]
        return [(lower, np.zeros_like(lower)), (other, np.zeros_like(other))]
    return [(lower, np.zeros_like(lower)), (U[:k, :k], np.eye(k))]


def verify_structure_group(E: Bundle, group, tol: Tolerance = DEFAULT_TOL) -> Check:
    """Every transport lies in the subgroup described by ``group``; reports the first violating edge."""
    dims = set(E.dim.values())
    if len(dims) != 1:
        raise BundleError("structure group checks need a uniform fiber dimension")
    if isinstance(group, Orthogonal):
        return is_metric_compatible(E, group.metric, tol)
    if not isinstance(group, (BlockDiagonal, BlockUpperUnit)):
        raise TypeError(f"unknown structure group {group!r}")
    n = dims.pop()
    if not 0 <= group.k <= n:
        raise BundleError(f"block size {group.k} out of range for rank {n}")
    for e in E.edges():
        parts = _pattern_parts(E.stored[e], group)
        if not all(tol.close(a, b) for a, b in parts):
            return Check(False, e, max(max_abs(a - b) for a, b in parts))
    return Check(True)


def flat_transport_invariant(E: Bundle, paths: Sequence[Path], tol: Tolerance = DEFAULT_TOL) -> bool:
    """All given paths (same endpoints) transport identically."""
    mats = [transport_along(E, p) for p in paths]
    return all(tol.close(m, mats[0]) for m in mats[1:])
