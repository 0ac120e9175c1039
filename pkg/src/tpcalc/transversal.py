"""Exact probabilities that a left transversal of H is a right transversal of K,
with three independent computation routes (component sizes, matrix permanent,
brute-force enumeration) and the bound suite.

All probabilities are exact `Fraction`s; the only floats are in the
gamma-function bound, with a stated relative tolerance. Everything here is
pure and safe for concurrent use; the factorial-ratio cache is shared.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arith_nt import (
    amgm_upper_bound,
    factorial_ratio,
    jensen_power_bound,
    prop_gamma_vs_amgm_holds,
)
from .coset_graph import (
    CosetGraph,
    TVector,
    build_coset_graph,
    left_coset_reps,
    right_coset_reps,
)
from .errors import (
    BudgetError,
    ParameterError,
    PreconditionError,
    SizeLimitError,
    VerificationError,
)
from .group_core import GroupTable, Subgroup, is_normal_subgroup, subgroup_relations

BigRational = Fraction

PERMANENT_SIZE_CAP = 24
ENUMERATION_BUDGET = 10**6
GAMMA_REL_TOL = 1e-9


def p_from_tvector(t: TVector | Sequence[int]) -> Fraction:
    """The exact probability determined by component sizes: the product of
    t!/t^t over the entries."""
    entries = tuple(t)
    if not entries:
        raise PreconditionError("component-size vector must be nonempty")
    if any(x < 1 for x in entries):
        raise PreconditionError("component sizes must be positive")
    out = Fraction(1)
    for x in entries:
        out *= factorial_ratio(x)
    return out


def p_g(G: GroupTable, H: Subgroup, K: Subgroup | None = None,
        graph: CosetGraph | None = None) -> Fraction:
    """P(G; H, K): probability that a uniformly random left transversal of H
    is also a right transversal of K. Equals 1 exactly when H = K is normal;
    that equivalence is asserted on every call."""
    if graph is None:
        graph = build_coset_graph(G, H, K)
    value = p_from_tvector(graph.t_vector)
    trivially_one = graph.H.elems == graph.K.elems and is_normal_subgroup(G, graph.H)
    if (value == 1) != trivially_one:
        raise VerificationError("P = 1 must hold exactly for a normal H = K")
    return value


def p_prime_subgroup(G: GroupTable, H: Subgroup) -> Fraction:
    """Closed form (p!/p^p)^((n-m)/p) for |H| = p prime, checked against the
    graph computation."""
    p = H.order
    if not _is_prime(p):
        raise ParameterError("subgroup order must be prime")
    rel = subgroup_relations(G, H)
    n = H.index
    m = rel.normalizer.order // H.order
    if (n - m) % p != 0:
        raise VerificationError("(n - m)/p must be an integer")
    value = factorial_ratio(p) ** ((n - m) // p)
    if value != p_g(G, H, H):
        raise VerificationError("closed form disagrees with the graph computation")
    return value


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# Weight matrix and permanent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightMatrix:
    """The n x n matrix of coset intersection sizes |l_i H  intersect  K r_j|.

    For H = K the right cosets are labelled by the inverses of the left
    representatives; that pairing is always a right transversal and makes the
    matrix symmetric. (Reusing the left representatives verbatim fails both
    properties for some groups.)
    """

    n: int
    entries: np.ndarray
    left_reps: tuple[int, ...]
    right_reps: tuple[int, ...]
    matched: bool

    @property
    def line_sum(self) -> int:
        return int(self.entries[0].sum())


def weight_matrix(G: GroupTable, H: Subgroup, K: Subgroup | None = None) -> WeightMatrix:
    matched = K is None or K.elems == H.elems
    if K is None:
        K = H
    if H.index != K.index:
        raise PreconditionError("subgroups must have equal index")
    lreps = left_coset_reps(G, H)
    if matched:
        rreps = tuple(int(G.inv[l]) for l in lreps)
    else:
        rreps = right_coset_reps(G, K)
    n = len(lreps)
    L = np.zeros((n, G.order), dtype=np.int64)
    R = np.zeros((n, G.order), dtype=np.int64)
    for i, r in enumerate(lreps):
        L[i, G.mul[r, H.elem_array]] = 1
    seen_rows = set()
    for j, r in enumerate(rreps):
        coset = G.mul[K.elem_array, r]
        key = tuple(sorted(int(x) for x in coset))
        if key in seen_rows:
            raise VerificationError("right labels do not form a right transversal")
        seen_rows.add(key)
        R[j, coset] = 1
    W = L @ R.T
    if not ((W.sum(axis=1) == H.order).all() and (W.sum(axis=0) == H.order).all()):
        raise VerificationError("weight matrix rows/columns do not sum to |H|")
    W.setflags(write=False)
    return WeightMatrix(n=n, entries=W, left_reps=lreps, right_reps=tuple(rreps),
                        matched=matched)


def permanent_ryser(M, cap: int = PERMANENT_SIZE_CAP) -> int:
    """Exact permanent by inclusion-exclusion over column subsets.

    Small cases run vectorised in int64 (the subset-sum products are bounded
    so overflow cannot occur); anything that could overflow falls back to a
    Gray-code loop over Python big ints.
    """
    A = np.asarray(M, dtype=object)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError("matrix must be square")
    n = A.shape[0]
    if n > cap:
        raise SizeLimitError(f"permanent size {n} exceeds cap {cap}")
    if n == 0:
        return 1
    bound = 1
    for i in range(n):
        bound *= int(sum(abs(int(x)) for x in A[i]))
    if bound << n < (1 << 62):
        return _ryser_vectorised(np.asarray(M, dtype=np.int64))
    return _ryser_bigint(A)


def _ryser_vectorised(A: np.ndarray) -> int:
    n = A.shape[0]
    lo = min(n, 14)
    hi = n - lo
    lo_bits = ((np.arange(1 << lo)[:, None] >> np.arange(lo)[None, :]) & 1).astype(np.int64)
    r_lo = lo_bits @ A.T[:lo]  # subset-of-low-columns row sums, shape (2^lo, n)
    par_lo = _parity_signs(1 << lo)
    total = 0
    if hi == 0:
        prods = np.multiply.reduce(r_lo, axis=1)
        total = int(np.dot(par_lo, prods))
    else:
        hi_bits = ((np.arange(1 << hi)[:, None] >> np.arange(hi)[None, :]) & 1).astype(np.int64)
        r_hi = hi_bits @ A.T[lo:]
        par_hi = _parity_signs(1 << hi)
        for h in range(1 << hi):
            prods = np.multiply.reduce(r_lo + r_hi[h], axis=1)
            total += int(par_hi[h]) * int(np.dot(par_lo, prods))
    return int((-1) ** n * total)


def _parity_signs(count: int) -> np.ndarray:
    par = np.zeros(count, dtype=np.int64)
    for i in range(1, count):
        par[i] = par[i >> 1] ^ (i & 1)
    return 1 - 2 * par


def _ryser_bigint(A: np.ndarray) -> int:
    n = A.shape[0]
    cols = [[int(A[i, j]) for i in range(n)] for j in range(n)]
    sums = [0] * n
    total = 0
    gray = 0
    for k in range(1, 1 << n):
        new_gray = k ^ (k >> 1)
        bit = (gray ^ new_gray).bit_length() - 1
        col = cols[bit]
        if new_gray & (1 << bit):
            for i in range(n):
                sums[i] += col[i]
        else:
            for i in range(n):
                sums[i] -= col[i]
        gray = new_gray
        prod = 1
        for v in sums:
            if v == 0:
                prod = 0
                break
            prod *= v
        if bin(gray).count("1") & 1:
            total -= prod
        else:
            total += prod
    return total if n % 2 == 0 else -total


def dt_enumerate(G: GroupTable, H: Subgroup, K: Subgroup | None = None,
                 budget: int = ENUMERATION_BUDGET) -> int:
    """Count two-sided transversals by depth-first choice of one element per
    left coset, pruning on the set of right cosets already hit. The count is
    cross-checked against |H|^n * P before being returned."""
    if K is None:
        K = H
    if H.index != K.index:
        raise PreconditionError("subgroups must have equal index")
    n = H.index
    if H.order**n > budget:
        raise BudgetError(f"|H|^n = {H.order**n} exceeds budget {budget}")
    lreps = left_coset_reps(G, H)
    right_id = np.full(G.order, -1, dtype=np.int64)
    nxt = 0
    for g in range(G.order):
        if right_id[g] < 0:
            right_id[G.mul[K.elem_array, g]] = nxt
            nxt += 1
    cosets = [[int(right_id[x]) for x in G.mul[l, H.elem_array]] for l in lreps]

    count = 0
    used = [False] * n

    def walk(level: int) -> None:
        nonlocal count
        if level == n:
            count += 1
            return
        for rid in cosets[level]:
            if not used[rid]:
                used[rid] = True
                walk(level + 1)
                used[rid] = False

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, n + 100))
    try:
        walk(0)
    finally:
        sys.setrecursionlimit(old_limit)
    expected = Fraction(H.order) ** n * p_g(G, H, K)
    if count != expected:
        raise VerificationError("enumeration disagrees with the exact formula")
    return count


# ---------------------------------------------------------------------------
# Doubly stochastic form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StochasticFormReport:
    n: int
    s: int
    block_sizes: tuple[int, ...]
    doubly_stochastic: bool
    blocks_uniform: bool
    idempotent: bool
    trace: Fraction
    rank: int
    symmetric: bool | None

    @property
    def all_hold(self) -> bool:
        spectral = (self.doubly_stochastic and self.blocks_uniform
                    and self.idempotent and self.trace == self.s and self.rank == self.s)
        return spectral and (self.symmetric is not False)


def stochastic_form_checks(G: GroupTable, H: Subgroup,
                           K: Subgroup | None = None) -> StochasticFormReport:
    """Validate the doubly stochastic normalisation of the weight matrix: after
    grouping rows/columns by graph component it is block diagonal with uniform
    1/t blocks, idempotent, of trace and rank equal to the component count.
    Symmetry of the unpermuted matrix is asserted only in the matched H = K
    case (it can fail otherwise and is reported as None)."""
    if K is None:
        K = H
    wm = weight_matrix(G, H, K)
    graph = build_coset_graph(G, H, K)
    n = wm.n
    h = H.order
    M = [[Fraction(int(wm.entries[i, j]), h) for j in range(n)] for i in range(n)]

    left_pos = {rep: i for i, rep in enumerate(wm.left_reps)}
    # column index of the right coset containing a given element
    col_of_elem = {}
    for j, r in enumerate(wm.right_reps):
        for x in G.mul[K.elem_array, r]:
            col_of_elem[int(x)] = j
    row_order, col_order, block_sizes = [], [], []
    for comp in graph.components:
        block_sizes.append(comp.t)
        row_order += [left_pos[rep] for rep in comp.left_vertices]
        col_order += [col_of_elem[rep] for rep in comp.right_vertices]
    D = [[M[i][j] for j in col_order] for i in row_order]

    spans = []
    at = 0
    for t in block_sizes:
        spans.append((at, at + t))
        at += t
    blocks_uniform = all(
        D[i][j] == (Fraction(1, a1 - a0) if bi == bj else Fraction(0))
        for bi, (a0, a1) in enumerate(spans)
        for bj, (b0, b1) in enumerate(spans)
        for i in range(a0, a1) for j in range(b0, b1))

    dd = _mat_mul(D, D)
    idempotent = dd == D
    trace = sum((D[i][i] for i in range(n)), Fraction(0))
    rank = _exact_rank([row[:] for row in D])
    doubly = (all(sum(row, Fraction(0)) == 1 for row in M)
              and all(sum((M[i][j] for i in range(n)), Fraction(0)) == 1 for j in range(n)))
    symmetric = None
    if wm.matched:
        symmetric = all(M[i][j] == M[j][i] for i in range(n) for j in range(n))
    return StochasticFormReport(
        n=n, s=graph.s, block_sizes=tuple(block_sizes), doubly_stochastic=doubly,
        blocks_uniform=blocks_uniform, idempotent=idempotent, trace=trace,
        rank=rank, symmetric=symmetric)


def _mat_mul(A, B):
    n = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(n)), Fraction(0))
             for j in range(n)] for i in range(n)]


def _exact_rank(rows) -> int:
    n = len(rows)
    rank = 0
    col = 0
    while rank < n and col < n:
        pivot = next((r for r in range(rank, n) if rows[r][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        lead = rows[rank][col]
        for r in range(rank + 1, n):
            if rows[r][col] != 0:
                factor = rows[r][col] / lead
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundsReport:
    n: int
    s: int
    m: int
    p_exact: Fraction
    lower_factorial: Fraction
    upper_half_power: Fraction
    upper_ams: Fraction
    upper_seven_eighths: Fraction | None
    upper_gamma: float
    conjugate_non_normal: bool
    holds_factorial_sandwich: bool
    holds_half_power: bool
    holds_sharp_window: bool | None
    holds_seven_eighths: bool | None
    holds_gamma: bool
    holds_gamma_vs_ams: bool
    all_hold: bool


def bounds_report(G: GroupTable, H: Subgroup, K: Subgroup | None = None) -> BoundsReport:
    """Evaluate every applicable bound on P and record whether it brackets the
    exact value. Clauses that require conjugate non-normal subgroups are
    reported as None when they do not apply."""
    graph = build_coset_graph(G, H, K)
    K = graph.K
    p_exact = p_g(G, H, K, graph=graph)
    n, s, m = graph.n, graph.s, graph.m

    lower_asymp1 = factorial_ratio(n)
    upper_ams = amgm_upper_bound(n, s)
    lower_factorial = factorial_ratio(n - m) if n > m else Fraction(1)
    upper_half_power = Fraction(1, 2) ** (s - m)
    holds_factorial_sandwich = (lower_asymp1 <= lower_factorial <= p_exact
                                and p_exact <= upper_ams)
    holds_half_power = p_exact <= upper_half_power

    conj = m > 0  # trivial components exist iff the pair is conjugate
    normal_pair = H.elems == K.elems and is_normal_subgroup(G, H)
    conjugate_non_normal = conj and not normal_pair
    holds_sharp_window = None
    upper_seven = None
    holds_seven = None
    if conjugate_non_normal:
        holds_sharp_window = (factorial_ratio(n - 1) <= p_exact <= Fraction(1, 2))
        upper_seven = Fraction(7, 8) ** n
        holds_seven = p_exact <= upper_seven

    upper_gamma = jensen_power_bound(n, s)
    pf = float(p_exact)
    holds_gamma = pf <= upper_gamma * (1 + GAMMA_REL_TOL) + 1e-300
    if 4 * s <= 3 * n:
        holds_gamma_vs_ams = prop_gamma_vs_amgm_holds(n, s, GAMMA_REL_TOL)
    else:
        holds_gamma_vs_ams = True  # comparison only claimed for s <= 3n/4
    all_hold = (holds_factorial_sandwich and holds_half_power and holds_gamma
                and holds_gamma_vs_ams
                and (holds_sharp_window is not False)
                and (holds_seven is not False))
    return BoundsReport(
        n=n, s=s, m=m, p_exact=p_exact,
        lower_factorial=lower_factorial,
        upper_half_power=upper_half_power,
        upper_ams=upper_ams,
        upper_seven_eighths=upper_seven,
        upper_gamma=upper_gamma,
        conjugate_non_normal=conjugate_non_normal,
        holds_factorial_sandwich=holds_factorial_sandwich,
        holds_half_power=holds_half_power,
        holds_sharp_window=holds_sharp_window,
        holds_seven_eighths=holds_seven,
        holds_gamma=holds_gamma,
        holds_gamma_vs_ams=holds_gamma_vs_ams,
        all_hold=all_hold,
    )
