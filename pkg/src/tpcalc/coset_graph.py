"""The bipartite intersection graph of left cosets of H against right cosets
of K, its components, weights, and the component-count bounds.

Components are recovered by union-find over nonempty coset intersections and
then cross-checked against an independent double-coset decomposition before a
graph is returned. Construction is a pure function of (G, H, K); distinct
pairs may be processed concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import PreconditionError, VerificationError
from .group_core import (
    GroupTable,
    Subgroup,
    conjugator_count,
    is_normal_subgroup,
)


@dataclass(frozen=True)
class TVector:
    """Component sizes of a coset intersection graph, sorted decreasingly."""

    entries: tuple[int, ...]

    def __post_init__(self):
        if any(t < 1 for t in self.entries):
            raise PreconditionError("component sizes must be positive")
        if list(self.entries) != sorted(self.entries, reverse=True):
            raise PreconditionError("entries must be sorted decreasingly")

    @property
    def n(self) -> int:
        return sum(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class Component:
    """One connected component: a complete bipartite block of equal-weight edges."""

    left_vertices: tuple[int, ...]   # minimal reps of its left cosets
    right_vertices: tuple[int, ...]  # minimal reps of its right cosets
    t: int
    weight: int
    double_coset_rep: int


@dataclass(frozen=True)
class CosetGraph:
    parent: GroupTable
    H: Subgroup
    K: Subgroup
    n: int
    left_reps: tuple[int, ...]
    right_reps: tuple[int, ...]
    components: tuple[Component, ...]
    s: int
    m: int

    @cached_property
    def t_vector(self) -> TVector:
        return TVector(tuple(sorted((c.t for c in self.components), reverse=True)))

    @cached_property
    def weight_by_pair(self) -> np.ndarray:
        """The n x n matrix |l_i H  intersect  K r_j| in rep order."""
        return _intersection_matrix(self.parent, self.left_reps, self.H,
                                    self.right_reps, self.K)


def left_coset_reps(G: GroupTable, H: Subgroup) -> tuple[int, ...]:
    """Minimal-index representatives of the left cosets gH, ascending."""
    assigned = np.zeros(G.order, dtype=bool)
    reps = []
    for g in range(G.order):
        if not assigned[g]:
            assigned[G.mul[g, H.elem_array]] = True
            reps.append(g)
    return tuple(reps)


def right_coset_reps(G: GroupTable, K: Subgroup) -> tuple[int, ...]:
    """Minimal-index representatives of the right cosets Kg, ascending."""
    assigned = np.zeros(G.order, dtype=bool)
    reps = []
    for g in range(G.order):
        if not assigned[g]:
            assigned[G.mul[K.elem_array, g]] = True
            reps.append(g)
    return tuple(reps)


def _coset_membership(G: GroupTable, reps, sub: Subgroup, side: str) -> np.ndarray:
    rows = np.zeros((len(reps), G.order), dtype=bool)
    for i, r in enumerate(reps):
        coset = G.mul[r, sub.elem_array] if side == "left" else G.mul[sub.elem_array, r]
        rows[i, coset] = True
    return rows


def _intersection_matrix(G, left_reps, H, right_reps, K) -> np.ndarray:
    L = _coset_membership(G, left_reps, H, "left").astype(np.int64)
    R = _coset_membership(G, right_reps, K, "right").astype(np.int64)
    return L @ R.T


class _UnionFind:
    def __init__(self, n: int):
        self.up = list(range(n))

    def find(self, x: int) -> int:
        while self.up[x] != x:
            self.up[x] = self.up[self.up[x]]
            x = self.up[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.up[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class DoubleCosets:
    """Partition of G into (K,H)-double cosets, by minimal representative."""

    reps: tuple[int, ...]
    sizes: tuple[int, ...]
    block_of: np.ndarray  # element index -> block index


def double_cosets(G: GroupTable, H: Subgroup, K: Subgroup) -> DoubleCosets:
    n = G.order
    block_of = np.full(n, -1, dtype=np.int64)
    reps, sizes = [], []
    for g in range(n):
        if block_of[g] >= 0:
            continue
        block = np.unique(G.mul[np.ix_(G.mul[K.elem_array, g], H.elem_array)])
        block_of[block] = len(reps)
        reps.append(g)
        sizes.append(int(block.size))
    if sum(sizes) != n:
        raise VerificationError("double cosets do not cover the group")
    block_of.setflags(write=False)
    return DoubleCosets(tuple(reps), tuple(sizes), block_of)


def build_coset_graph(G: GroupTable, H: Subgroup, K: Subgroup | None = None) -> CosetGraph:
    """Assemble the graph for (G, H, K) and assert every structural invariant:
    complete bipartite components with constant weight, weight * size = |H|,
    sizes summing to the index, the trivial-component count matching the
    conjugator-counting formula, and component/double-coset agreement.
    """
    if K is None:
        K = H
    if H.parent is not G or K.parent is not G:
        raise PreconditionError("subgroups must belong to the given group")
    if H.index != K.index:
        raise PreconditionError(
            f"subgroups must have equal index, got {H.index} and {K.index}")
    n = H.index
    lreps = left_coset_reps(G, H)
    rreps = right_coset_reps(G, K)
    W = _intersection_matrix(G, lreps, H, rreps, K)

    uf = _UnionFind(2 * n)
    li, rj = np.nonzero(W)
    for i, j in zip(li.tolist(), rj.tolist()):
        uf.union(i, n + j)
    groups: dict[int, tuple[list[int], list[int]]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), ([], []))[0].append(i)
    for j in range(n):
        groups.setdefault(uf.find(n + j), ([], []))[1].append(j)

    dcs = double_cosets(G, H, K)
    components = []
    for root in sorted(groups):
        lefts, rights = groups[root]
        if len(lefts) != len(rights) or not lefts:
            raise VerificationError("component is not balanced bipartite")
        sub = W[np.ix_(lefts, rights)]
        w = int(sub[0, 0])
        if w <= 0 or not (sub == w).all():
            raise VerificationError("component is not complete with constant weight")
        t = len(lefts)
        if w * t != H.order:
            raise VerificationError("weight * size != |H| in a component")
        if K.order % t != 0:
            raise VerificationError("component size does not divide |K|")
        lmask = _coset_membership(G, [lreps[i] for i in lefts], H, "left").any(axis=0)
        rmask = _coset_membership(G, [rreps[j] for j in rights], K, "right").any(axis=0)
        if not np.array_equal(lmask, rmask):
            raise VerificationError("left and right coset unions differ in a component")
        rep = int(np.flatnonzero(lmask)[0])
        if dcs.sizes[dcs.block_of[rep]] != int(lmask.sum()):
            raise VerificationError("component does not fill its double coset")
        components.append(Component(
            left_vertices=tuple(lreps[i] for i in lefts),
            right_vertices=tuple(rreps[j] for j in rights),
            t=t,
            weight=w,
            double_coset_rep=rep,
        ))

    s = len(components)
    if s != len(dcs.reps):
        raise VerificationError("component count differs from double-coset count")
    if sum(c.t for c in components) != n:
        raise VerificationError("component sizes do not sum to the index")
    m = sum(1 for c in components if c.t == 1)
    m_formula = conjugator_count(G, H, K) // H.order
    if m != m_formula:
        raise VerificationError(f"trivial-component count {m} != formula value {m_formula}")
    return CosetGraph(parent=G, H=H, K=K, n=n, left_reps=lreps, right_reps=rreps,
                      components=tuple(components), s=s, m=m)


@dataclass(frozen=True)
class SBoundsReport:
    lower: Fraction
    upper: Fraction
    s: int
    m: int
    holds: bool


def s_bounds_check(G: GroupTable, H: Subgroup, K: Subgroup | None = None) -> SBoundsReport:
    """Bracket the component count: (n-m)/|H| + m <= s <= (n-m)/p + m with p
    the smallest prime divisor of |H|. For |H| = 1 both sides collapse to n."""
    graph = build_coset_graph(G, H, K)
    n, s, m = graph.n, graph.s, graph.m
    if graph.H.order == 1:
        lower = upper = Fraction(n)
    else:
        p = _smallest_prime(graph.H.order)
        lower = Fraction(n - m, graph.H.order) + m
        upper = Fraction(n - m, p) + m
    return SBoundsReport(lower, upper, s, m, lower <= s <= upper)


def _smallest_prime(n: int) -> int:
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


@dataclass(frozen=True)
class FrobeniusS2Report:
    s: int
    s2_and_size: bool
    frobenius: bool
    consistent: bool


def frobenius_s2_check(G: GroupTable, H: Subgroup) -> FrobeniusS2Report:
    """Instance check of the equivalence between `s = 2 with |H| = n - 1` and
    the malnormality property defining a Frobenius complement.

    Consistency means: (s = 2 and |H| = n-1) implies malnormal, and if H is
    malnormal then s = 2 holds exactly when |H| = n - 1.
    """
    if is_normal_subgroup(G, H):
        raise PreconditionError("H must be non-normal")
    n = H.index
    dcs = double_cosets(G, H, H)
    s = len(dcs.reps)
    size_match = H.order == n - 1
    frobenius = _is_malnormal(G, H)
    forward = (not (s == 2 and size_match)) or frobenius
    backward = (not frobenius) or ((s == 2) == size_match)
    return FrobeniusS2Report(s=s, s2_and_size=(s == 2 and size_match),
                             frobenius=frobenius, consistent=forward and backward)


def _is_malnormal(G: GroupTable, H: Subgroup) -> bool:
    arr = H.elem_array
    mask = H.mask
    for g in range(G.order):
        if mask[g]:
            continue
        conj = G.mul[G.mul[G.inv[g], arr], g]
        if np.count_nonzero(mask[conj]) > 1:
            return False
    return True
