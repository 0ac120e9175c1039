"""Finite groups as validated Cayley tables on indices 0..n-1.

Conventions, fixed once for the whole package:
  * the identity is always element index 0;
  * coset and double-coset representatives are minimal-index elements;
  * the canonical key of a subgroup is its sorted element tuple.

GroupTable and Subgroup are immutable after construction; derived data
(fingerprints, subgroup lists) is cached on first use and only ever replaced
by an identical value, so concurrent readers are safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    ActionError,
    FormatError,
    NormalityError,
    ParameterError,
    SizeLimitError,
    VerificationError,
)

ASSOC_EXHAUSTIVE_CAP = 512
ASSOC_RANDOM_TRIPLES = 10_000
SUBGROUP_ORDER_CAP = 256
ISO_ORDER_CAP = 512
CLOSURE_ELEMENT_CAP = 20_000


class GroupTable:
    """A finite group given by its multiplication table of element indices."""

    def __init__(self, mul, labels: Sequence[str] | None = None, provenance: str = ""):
        mul = np.ascontiguousarray(mul, dtype=np.int32)
        if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
            raise ParameterError("multiplication table must be a nonempty square matrix")
        n = mul.shape[0]
        idx = np.arange(n, dtype=np.int32)
        if mul.min() < 0 or mul.max() >= n:
            raise ParameterError("table entries out of range")
        if not (np.array_equal(np.sort(mul, axis=1), np.tile(idx, (n, 1)))
                and np.array_equal(np.sort(mul, axis=0), np.tile(idx[:, None], (1, n)))):
            raise ParameterError("table is not a Latin square")
        if not (np.array_equal(mul[0], idx) and np.array_equal(mul[:, 0], idx)):
            raise ParameterError("identity must be element 0")
        inv = np.argmax(mul == 0, axis=1).astype(np.int32)
        if not (np.array_equal(mul[idx, inv], np.zeros(n, dtype=np.int32))
                and np.array_equal(mul[inv, idx], np.zeros(n, dtype=np.int32))):
            raise ParameterError("table has no two-sided inverses")
        _check_associativity(mul)
        if labels is not None and len(labels) != n:
            raise ParameterError("labels length must equal the group order")
        mul.setflags(write=False)
        inv.setflags(write=False)
        self.mul = mul
        self.inv = inv
        self.order = n
        self.identity = 0
        self.labels = tuple(labels) if labels is not None else None
        self.provenance = provenance
        self._subgroup_list: tuple["Subgroup", ...] | None = None
        self._tp_cache = None

    # -- basic element operations ------------------------------------------

    def elements(self) -> range:
        return range(self.order)

    def multiply(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def conjugate(self, x: int, g: int) -> int:
        """g^-1 x g."""
        return int(self.mul[self.mul[self.inv[g], x], g])

    def power(self, x: int, k: int) -> int:
        if k < 0:
            return self.power(self.inverse(x), -k)
        acc, base = 0, x
        while k:
            if k & 1:
                acc = int(self.mul[acc, base])
            base = int(self.mul[base, base])
            k >>= 1
        return acc

    def label(self, a: int) -> str:
        return self.labels[a] if self.labels is not None else str(a)

    def __repr__(self) -> str:
        tag = self.provenance or "group"
        return f"GroupTable(order={self.order}, provenance={tag!r})"

    # -- cached structure data ---------------------------------------------

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    @cached_property
    def element_orders(self) -> np.ndarray:
        n = self.order
        orders = np.zeros(n, dtype=np.int64)
        cur = np.arange(n, dtype=np.int32)
        alive = np.ones(n, dtype=bool)
        k = 1
        while alive.any():
            done = alive & (cur == 0)
            orders[done] = k
            alive &= ~done
            cur = self.mul[cur, np.arange(n, dtype=np.int32)]
            k += 1
        orders.setflags(write=False)
        return orders

    @cached_property
    def center_elems(self) -> tuple[int, ...]:
        mask = (self.mul == self.mul.T).all(axis=1)
        return tuple(int(i) for i in np.flatnonzero(mask))

    @cached_property
    def minimal_generators(self) -> tuple[int, ...]:
        """Greedy generating sequence: repeatedly adjoin the smallest outside index."""
        gens: list[int] = []
        current = np.array([0], dtype=np.int64)
        while current.size < self.order:
            mask = np.zeros(self.order, dtype=bool)
            mask[current] = True
            nxt = int(np.flatnonzero(~mask)[0])
            gens.append(nxt)
            current = closure_of(self, list(current) + [nxt])
        return tuple(gens)

    @cached_property
    def generator_chain_sizes(self) -> tuple[int, ...]:
        sizes = []
        seed: list[int] = [0]
        for g in self.minimal_generators:
            seed.append(g)
            sizes.append(int(closure_of(self, seed).size))
        return tuple(sizes)

    @cached_property
    def conjugacy_classes(self) -> tuple[tuple[int, ...], ...]:
        n = self.order
        cls_id = np.full(n, -1, dtype=np.int64)
        classes = []
        gens = self.minimal_generators or (0,)
        for x in range(n):
            if cls_id[x] >= 0:
                continue
            orbit = {x}
            frontier = [x]
            while frontier:
                y = frontier.pop()
                for g in gens:
                    z = self.conjugate(y, g)
                    if z not in orbit:
                        orbit.add(z)
                        frontier.append(z)
            block = tuple(sorted(orbit))
            for y in block:
                cls_id[y] = len(classes)
            classes.append(block)
        return tuple(classes)

    @cached_property
    def class_size_of(self) -> np.ndarray:
        sizes = np.zeros(self.order, dtype=np.int64)
        for block in self.conjugacy_classes:
            for x in block:
                sizes[x] = len(block)
        sizes.setflags(write=False)
        return sizes

    @cached_property
    def derived_elems(self) -> np.ndarray:
        return _derived_of(self, np.arange(self.order, dtype=np.int64))

    @cached_property
    def fingerprint(self) -> tuple:
        orders = self.element_orders
        hist = {}
        for o in orders.tolist():
            hist[o] = hist.get(o, 0) + 1
        class_stats = sorted((len(c), int(orders[c[0]])) for c in self.conjugacy_classes)
        return (
            self.order,
            self.is_abelian,
            tuple(sorted(hist.items())),
            len(self.center_elems),
            int(self.derived_elems.size),
            tuple(class_stats),
        )


def _check_associativity(mul: np.ndarray) -> None:
    n = mul.shape[0]
    if n <= ASSOC_EXHAUSTIVE_CAP:
        for a in range(n):
            if not np.array_equal(mul[mul[a], :], mul[a][mul]):
                raise ParameterError(f"table is not associative (row {a})")
    else:
        rng = np.random.default_rng(n)
        for _ in range(ASSOC_RANDOM_TRIPLES):
            a, b, c = (int(v) for v in rng.integers(0, n, size=3))
            if mul[mul[a, b], c] != mul[a, mul[b, c]]:
                raise ParameterError("table is not associative (random triple)")


# ---------------------------------------------------------------------------
# Subgroups
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Subgroup:
    """A subgroup of `parent`, stored as its sorted element-index tuple."""

    parent: GroupTable = field(repr=False)
    elems: tuple[int, ...]

    def __post_init__(self):
        elems = tuple(int(e) for e in self.elems)
        object.__setattr__(self, "elems", elems)
        if not elems or elems[0] != 0 or list(elems) != sorted(set(elems)):
            raise ParameterError("subgroup elements must be sorted, unique, and contain 0")
        arr = np.array(elems, dtype=np.int64)
        sub = self.parent.mul[np.ix_(arr, arr)]
        mask = np.zeros(self.parent.order, dtype=bool)
        mask[arr] = True
        if not mask[sub].all():
            raise ParameterError("element set is not closed under multiplication")
        if self.parent.order % len(elems) != 0:
            raise ParameterError("subgroup order does not divide the group order")

    @property
    def order(self) -> int:
        return len(self.elems)

    @property
    def index(self) -> int:
        return self.parent.order // len(self.elems)

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.order, dtype=bool)
        m[list(self.elems)] = True
        m.setflags(write=False)
        return m

    @cached_property
    def elem_array(self) -> np.ndarray:
        a = np.array(self.elems, dtype=np.int64)
        a.setflags(write=False)
        return a

    def __contains__(self, x: int) -> bool:
        return bool(self.mask[x])

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return bool(self.mask[other.elem_array].all())

    def generators(self) -> tuple[int, ...]:
        """Greedy minimal generating sequence by smallest element index."""
        G = self.parent
        gens: list[int] = []
        current = np.array([0], dtype=np.int64)
        want = set(self.elems)
        while current.size < self.order:
            nxt = min(want - set(current.tolist()))
            gens.append(nxt)
            current = closure_of(G, list(current) + [nxt])
        return tuple(gens)

    def conjugate_by(self, g: int) -> "Subgroup":
        G = self.parent
        conj = G.mul[G.mul[G.inv[g], self.elem_array], g]
        return Subgroup(G, tuple(sorted(int(x) for x in conj)))


def closure_of(G: GroupTable, seed: Iterable[int]) -> np.ndarray:
    """Sorted element array of the subgroup generated by `seed` (plus identity)."""
    elems = np.unique(np.array(sorted(set(seed) | {0}), dtype=np.int64))
    while True:
        prods = G.mul[np.ix_(elems, elems)]
        new = np.unique(prods)
        if new.size == elems.size:
            return new.astype(np.int64)
        elems = new


def subgroup_generated(G: GroupTable, seed: Iterable[int]) -> Subgroup:
    return Subgroup(G, tuple(int(x) for x in closure_of(G, seed)))


def trivial_subgroup(G: GroupTable) -> Subgroup:
    return Subgroup(G, (0,))


def full_subgroup(G: GroupTable) -> Subgroup:
    return Subgroup(G, tuple(range(G.order)))


# ---------------------------------------------------------------------------
# Named families
# ---------------------------------------------------------------------------

def cyclic(n: int) -> GroupTable:
    if n < 1:
        raise ParameterError("cyclic group order must be positive")
    idx = np.arange(n)
    mul = (idx[:, None] + idx[None, :]) % n
    return GroupTable(mul, provenance=f"cyclic({n})")


def elementary_abelian(p: int, r: int) -> GroupTable:
    if not _is_prime(p) or r < 1:
        raise ParameterError("elementary_abelian needs a prime p and r >= 1")
    n = p**r
    idx = np.arange(n)
    mul = np.zeros((n, n), dtype=np.int64)
    scale = 1
    a, b = idx[:, None], idx[None, :]
    for _ in range(r):
        mul += scale * (((a // scale) % p + (b // scale) % p) % p)
        scale *= p
    return GroupTable(mul, provenance=f"elementary_abelian({p},{r})")


def dihedral(n: int) -> GroupTable:
    """Dihedral group of order 2n (rotations first, then reflections)."""
    if n < 1:
        raise ParameterError("dihedral parameter must be positive")
    if n == 1:
        return GroupTable(cyclic(2).mul, provenance="dihedral(1)")
    rot = cyclic(n)
    G = semidirect_product(rot, cyclic(2), action_by_inversion(rot, cyclic(2)))
    return GroupTable(G.mul, provenance=f"dihedral({n})")


def generalized_quaternion(order: int) -> GroupTable:
    """Q_{2^m} of the given order 2^m, m >= 3."""
    m = order.bit_length() - 1
    if order != 1 << m or m < 3:
        raise ParameterError("generalized quaternion order must be 2^m with m >= 3")
    half = order // 2
    hpow = half // 2  # b^2 = a^(2^(m-2))
    mul = np.zeros((order, order), dtype=np.int64)
    for x in range(order):
        i, e1 = x % half, x // half
        for y in range(order):
            j, e2 = y % half, y // half
            if e1 == 0:
                k, e = (i + j) % half, e2
            else:
                k, e = (i - j) % half, 1 - e2
                if e2 == 1:
                    k = (k + hpow) % half
            mul[x, y] = e * half + k
    return GroupTable(mul, provenance=f"generalized_quaternion({order})")


def cp_rtimes_c2n(p: int, k: int) -> GroupTable:
    """C_p . C_{2^k} with the 2-part inverting the p-part: order p * 2^k."""
    if not _is_prime(p) or p == 2:
        raise ParameterError("p must be an odd prime")
    if k < 1:
        raise ParameterError("k must be >= 1")
    base = cyclic(p)
    top = cyclic(2**k)
    G = semidirect_product(base, top, action_by_inversion(base, top))
    return GroupTable(G.mul, provenance=f"cp_rtimes_c2n({p},{k})")


def field_frobenius(q: int) -> GroupTable:
    """The natural affine group of GF(q): additive group extended by the full
    multiplicative group, of order q(q-1)."""
    if q < 3:
        raise ParameterError("field_frobenius needs a prime power q >= 3")
    fld = _GaloisField(q)
    add_mul = np.array([[fld.add(a, b) for b in range(q)] for a in range(q)])
    additive = GroupTable(add_mul, provenance=f"gf({q})+")
    units = [1] + [u for u in range(1, q) if u != 1]  # identity of GF* first
    unit_pos = {u: i for i, u in enumerate(units)}
    mult_mul = np.array([[unit_pos[fld.mul(units[a], units[b])] for b in range(q - 1)]
                         for a in range(q - 1)])
    multiplicative = GroupTable(mult_mul, provenance=f"gf({q})*")
    action = [np.array([fld.mul(g, units[k]) for g in range(q)], dtype=np.int64)
              for k in range(q - 1)]
    G = semidirect_product(additive, multiplicative, action)
    return GroupTable(G.mul, provenance=f"field_frobenius({q})")


_FAMILIES: dict[str, Callable[..., GroupTable]] = {
    "cyclic": cyclic,
    "dihedral": dihedral,
    "generalized_quaternion": generalized_quaternion,
    "cp_rtimes_c2n": cp_rtimes_c2n,
    "field_frobenius": field_frobenius,
    "elementary_abelian": elementary_abelian,
}


def make_named_family(family: str, *params: int) -> GroupTable:
    if family not in _FAMILIES:
        raise ParameterError(f"unknown family {family!r}")
    return _FAMILIES[family](*params)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class _GaloisField:
    """GF(p^r) arithmetic with elements encoded as base-p digit strings.

    The defining polynomial is the lexicographically first monic irreducible
    over GF(p) (coefficient tuple c_0..c_{r-1} read as a base-p number).
    """

    def __init__(self, q: int):
        p = _smallest_prime_factor(q)
        r = 0
        m = q
        while m > 1:
            if m % p != 0:
                raise ParameterError(f"{q} is not a prime power")
            m //= p
            r += 1
        self.p, self.r, self.q = p, r, q
        self.modulus = self._first_irreducible() if r > 1 else ()

    def _digits(self, x: int) -> list[int]:
        out = []
        for _ in range(self.r):
            out.append(x % self.p)
            x //= self.p
        return out

    def _pack(self, digits: Sequence[int]) -> int:
        out = 0
        for d in reversed(digits):
            out = out * self.p + d
        return out

    def add(self, a: int, b: int) -> int:
        da, db = self._digits(a), self._digits(b)
        return self._pack([(x + y) % self.p for x, y in zip(da, db)])

    def mul(self, a: int, b: int) -> int:
        p, r = self.p, self.r
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * r - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        # reduce modulo x^r - modulus tail
        for i in range(len(prod) - 1, r - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j, m in enumerate(self.modulus):
                    prod[i - r + j] = (prod[i - r + j] - c * m) % p
        return self._pack(prod[:r])

    def _first_irreducible(self) -> tuple[int, ...]:
        p, r = self.p, self.r
        for code in range(p**r):
            tail = [(code // p**i) % p for i in range(r)]
            if self._is_irreducible(tail):
                return tuple(tail)
        raise VerificationError("no irreducible polynomial found")

    def _is_irreducible(self, tail: Sequence[int]) -> bool:
        # poly = x^r + tail; test divisibility by every monic poly of degree <= r/2
        p, r = self.p, self.r
        poly = list(tail) + [1]
        for deg in range(1, r // 2 + 1):
            for code in range(p**deg):
                div = [(code // p**i) % p for i in range(deg)] + [1]
                if _poly_mod(poly, div, p) == []:
                    return False
        return True


def _poly_mod(num: Sequence[int], den: Sequence[int], p: int) -> list[int]:
    num = list(num)
    dd = len(den) - 1
    inv_lead = pow(den[-1], -1, p)
    while len(num) - 1 >= dd and any(num):
        while num and num[-1] == 0:
            num.pop()
        if len(num) - 1 < dd:
            break
        c = num[-1] * inv_lead % p
        shift = len(num) - 1 - dd
        for i, d in enumerate(den):
            num[shift + i] = (num[shift + i] - c * d) % p
    while num and num[-1] == 0:
        num.pop()
    return num


def _smallest_prime_factor(n: int) -> int:
    if n < 2:
        raise ParameterError("need n >= 2")
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


# ---------------------------------------------------------------------------
# Products and extensions
# ---------------------------------------------------------------------------

def direct_product(A: GroupTable, B: GroupTable) -> GroupTable:
    """Componentwise product; element (a, b) has index a*|B| + b."""
    na, nb = A.order, B.order
    a = np.arange(na * nb) // nb
    b = np.arange(na * nb) % nb
    mul = A.mul[np.ix_(a, a)].astype(np.int64) * nb + B.mul[np.ix_(b, b)]
    return GroupTable(mul, provenance=f"direct_product({A.provenance},{B.provenance})")


def action_by_inversion(G: GroupTable, K: GroupTable) -> list[np.ndarray]:
    """For cyclic K = <1> of even order: element k acts by g -> g^((-1)^k).

    Requires G abelian (else inversion is not an automorphism); the semidirect
    constructor validates this.
    """
    ident = np.arange(G.order, dtype=np.int64)
    invp = G.inv.astype(np.int64)
    return [invp if k % 2 == 1 else ident for k in range(K.order)]


def action_by_generator_power(G: GroupTable, K: GroupTable, exponent: int) -> list[np.ndarray]:
    """For cyclic K = <1>: element k acts by g -> g^(exponent^k)."""
    perms = []
    n = G.order
    current = np.arange(n, dtype=np.int64)
    step = np.array([G.power(g, exponent) for g in range(n)], dtype=np.int64)
    for _ in range(K.order):
        perms.append(current)
        current = step[current]
    return perms


def semidirect_product(G: GroupTable, K: GroupTable,
                       action: Sequence[Sequence[int]]) -> GroupTable:
    """Split extension of G by K: pairs (k, g) with index k*|G| + g and
    multiplication (k1,g1)(k2,g2) = (k1 k2, action[k2](g1) g2).

    `action` maps each K-index to an automorphism of G (a permutation of its
    indices); it must satisfy action[0] = id and the right-action law
    action[k1 k2] = action[k2] o action[k1]. The canonical copies of G and K
    sit at indices {g} and {k*|G|}.
    """
    ng, nk = G.order, K.order
    if len(action) != nk:
        raise ActionError("action must assign an automorphism to every element of K")
    acts = [np.asarray(a, dtype=np.int64) for a in action]
    ident = np.arange(ng, dtype=np.int64)
    for k, perm in enumerate(acts):
        if perm.shape != (ng,) or not np.array_equal(np.sort(perm), ident):
            raise ActionError(f"action[{k}] is not a permutation of G")
        if not np.array_equal(perm[G.mul], G.mul[np.ix_(perm, perm)]):
            raise ActionError(f"action[{k}] is not an automorphism of G")
    if not np.array_equal(acts[0], ident):
        raise ActionError("action[identity] must be the identity map")
    for k1 in range(nk):
        for k2 in range(nk):
            k12 = int(K.mul[k1, k2])
            if not np.array_equal(acts[k12], acts[k2][acts[k1]]):
                raise ActionError("action is not a right-action homomorphism")

    n = nk * ng
    karr = np.arange(n) // ng
    garr = np.arange(n) % ng
    kk = K.mul[np.ix_(karr, karr)].astype(np.int64)
    act_stack = np.stack(acts)  # (nk, ng)
    g1_twisted = act_stack[karr[None, :], garr[:, None]]  # [x, y] = action[k(y)](g(x))
    gg = G.mul[g1_twisted, garr[None, :]]
    mul = kk * ng + gg
    return GroupTable(mul, provenance=f"semidirect({G.provenance},{K.provenance})")


# ---------------------------------------------------------------------------
# Permutation-generator construction and text formats
# ---------------------------------------------------------------------------

def from_permutation_generators(degree: int, generators: Sequence[Sequence[int]],
                                cap: int = CLOSURE_ELEMENT_CAP) -> GroupTable:
    """Close a set of permutations of 0..degree-1 under composition.

    Elements are indexed in breadth-first discovery order, identity first;
    permutations compose left-to-right (apply the left factor, then the right).
    """
    ident = tuple(range(degree))
    gens = []
    for g in generators:
        t = tuple(int(x) for x in g)
        if sorted(t) != list(range(degree)):
            raise ParameterError(f"{g!r} is not a permutation of 0..{degree - 1}")
        gens.append(t)
    elems: list[tuple[int, ...]] = [ident]
    pos = {ident: 0}
    head = 0
    while head < len(elems):
        cur = elems[head]
        head += 1
        for g in gens:
            nxt = tuple(g[c] for c in cur)
            if nxt not in pos:
                if len(elems) >= cap:
                    raise SizeLimitError(f"closure exceeded {cap} elements")
                pos[nxt] = len(elems)
                elems.append(nxt)
    n = len(elems)
    mul = np.zeros((n, n), dtype=np.int64)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            mul[i, j] = pos[tuple(b[x] for x in a)]
    gen_desc = ";".join(",".join(map(str, g)) for g in gens)
    return GroupTable(mul, provenance=f"perm(degree={degree},gens=[{gen_desc}])")


def write_cayley_table(G: GroupTable) -> str:
    lines = [str(G.order)]
    lines += [" ".join(str(int(v)) for v in row) for row in G.mul]
    return "\n".join(lines) + "\n"


def read_cayley_table(text: str) -> GroupTable:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty Cayley table input")
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise FormatError(f"bad order line: {lines[0]!r}") from exc
    if len(lines) != n + 1:
        raise FormatError(f"expected {n} table rows, found {len(lines) - 1}")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        try:
            row = [int(tok) for tok in ln.split()]
        except ValueError as exc:
            raise FormatError(f"line {i}: non-integer entry") from exc
        if len(row) != n:
            raise FormatError(f"line {i}: expected {n} entries, found {len(row)}")
        rows.append(row)
    return GroupTable(np.array(rows), provenance="table(file)")


def write_permutation_generators(degree: int, generators: Sequence[Sequence[int]]) -> str:
    lines = [str(degree)]
    lines += [" ".join(str(int(v)) for v in g) for g in generators]
    return "\n".join(lines) + "\n"


def read_permutation_generators(text: str) -> tuple[int, list[tuple[int, ...]]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty generator input")
    try:
        degree = int(lines[0])
    except ValueError as exc:
        raise FormatError(f"bad degree line: {lines[0]!r}") from exc
    gens = []
    for i, ln in enumerate(lines[1:], start=2):
        try:
            g = tuple(int(tok) for tok in ln.split())
        except ValueError as exc:
            raise FormatError(f"line {i}: non-integer entry") from exc
        if sorted(g) != list(range(degree)):
            raise FormatError(f"line {i}: not a permutation of 0..{degree - 1}")
        gens.append(g)
    return degree, gens


# ---------------------------------------------------------------------------
# Subgroup enumeration and relations
# ---------------------------------------------------------------------------

def all_subgroups(G: GroupTable, cap: int = SUBGROUP_ORDER_CAP) -> list[Subgroup]:
    """The complete subgroup list, sorted by (order, element tuple).

    Closure algorithm: seed with every cyclic subgroup, then repeatedly extend
    each known subgroup H by one representative of each (H,H)-double coset and
    close, until no new subgroup appears. Adjoining x and adjoining any h1*x*h2
    generate the same subgroup, so double-coset representatives suffice.
    """
    if G.order > cap:
        raise SizeLimitError(f"group order {G.order} exceeds subgroup cap {cap}")
    if G._subgroup_list is None:
        found: dict[tuple[int, ...], Subgroup] = {}
        for x in range(G.order):
            key = tuple(int(v) for v in closure_of(G, [x]))
            if key not in found:
                found[key] = Subgroup(G, key)
        work = list(found.values())
        while work:
            H = work.pop()
            reps = _double_coset_reps(G, H.elem_array, H.elem_array)
            for r in reps:
                if H.mask[r]:
                    continue
                key = tuple(int(v) for v in closure_of(G, list(H.elems) + [int(r)]))
                if key not in found:
                    sub = Subgroup(G, key)
                    found[key] = sub
                    work.append(sub)
        ordered = sorted(found.values(), key=lambda s: (s.order, s.elems))
        G._subgroup_list = tuple(ordered)
    return list(G._subgroup_list)


def _double_coset_reps(G: GroupTable, left: np.ndarray, right: np.ndarray) -> list[int]:
    """Minimal representatives of the (left, right)-double cosets {L g R}."""
    n = G.order
    seen = np.zeros(n, dtype=bool)
    reps = []
    for g in range(n):
        if seen[g]:
            continue
        block = np.unique(G.mul[np.ix_(G.mul[left, g], right)])
        seen[block] = True
        reps.append(g)
    return reps


@dataclass(frozen=True)
class SubgroupRelations:
    normalizer: Subgroup
    core: Subgroup
    is_normal: bool


def subgroup_relations(G: GroupTable, H: Subgroup) -> SubgroupRelations:
    """Normalizer, normal core, and normality flag of H in G."""
    mask = H.mask
    arr = H.elem_array
    norm_elems = [g for g in range(G.order)
                  if mask[G.mul[G.mul[G.inv[g], arr], g]].all()]
    normalizer = Subgroup(G, tuple(norm_elems))
    core_mask = mask.copy()
    for g in range(G.order):
        conj = G.mul[G.mul[G.inv[g], arr], g]
        cm = np.zeros(G.order, dtype=bool)
        cm[conj] = True
        core_mask &= cm
    core = Subgroup(G, tuple(int(x) for x in np.flatnonzero(core_mask)))
    is_normal = normalizer.order == G.order
    if is_normal != (core.order == H.order):
        raise VerificationError("normalizer and core disagree about normality")
    return SubgroupRelations(normalizer, core, is_normal)


def is_normal_subgroup(G: GroupTable, H: Subgroup) -> bool:
    mask = H.mask
    arr = H.elem_array
    return all(mask[G.mul[G.mul[G.inv[g], arr], g]].all() for g in G.minimal_generators)


def are_conjugate(G: GroupTable, H: Subgroup, K: Subgroup) -> tuple[bool, int | None]:
    """Whether H^g = K for some g; returns the minimal witness when true."""
    if H.order != K.order:
        return False, None
    target = K.elems
    arr = H.elem_array
    for g in range(G.order):
        conj = np.sort(G.mul[G.mul[G.inv[g], arr], g])
        if tuple(int(x) for x in conj) == target:
            return True, g
    return False, None


def conjugator_count(G: GroupTable, H: Subgroup, K: Subgroup) -> int:
    """|{g in G : H^g = K}|."""
    if H.order != K.order:
        return 0
    target = K.elems
    arr = H.elem_array
    count = 0
    for g in range(G.order):
        conj = np.sort(G.mul[G.mul[G.inv[g], arr], g])
        if tuple(int(x) for x in conj) == target:
            count += 1
    return count


def subgroup_conjugacy_classes(G: GroupTable, subs: Sequence[Subgroup]) -> list[list[Subgroup]]:
    """Partition of `subs` into conjugacy classes (orbit closure under G's
    generators); each class is sorted, classes ordered by their first member."""
    by_key = {s.elems: s for s in subs}
    remaining = dict(by_key)
    gens = G.minimal_generators
    classes = []
    for key in sorted(by_key):
        if key not in remaining:
            continue
        orbit = {key}
        frontier = [key]
        while frontier:
            cur = np.array(frontier.pop(), dtype=np.int64)
            for g in gens:
                conj = tuple(int(x) for x in np.sort(G.mul[G.mul[G.inv[g], cur], g]))
                if conj not in orbit:
                    if conj not in by_key:
                        raise VerificationError("conjugate of a subgroup missing from list")
                    orbit.add(conj)
                    frontier.append(conj)
        block = sorted(orbit)
        for k in block:
            remaining.pop(k, None)
        classes.append([by_key[k] for k in block])
    return classes


def quotient_group(G: GroupTable, N: Subgroup) -> tuple[GroupTable, np.ndarray]:
    """The quotient by a normal subgroup, plus the index projection map.

    Cosets are indexed by ascending minimal representative, so the identity
    coset N gets index 0.
    """
    if not is_normal_subgroup(G, N):
        raise NormalityError("quotient by a non-normal subgroup")
    n = G.order
    proj = np.full(n, -1, dtype=np.int64)
    reps = []
    for g in range(n):
        if proj[g] >= 0:
            continue
        coset = G.mul[g, N.elem_array]
        proj[coset] = len(reps)
        reps.append(g)
    rep_arr = np.array(reps, dtype=np.int64)
    mul = proj[G.mul[np.ix_(rep_arr, rep_arr)]]
    Q = GroupTable(mul, provenance=f"quotient({G.provenance}/N{N.order})")
    if not np.array_equal(proj[G.mul], Q.mul[proj[:, None], proj[None, :]]):
        raise VerificationError("projection is not a homomorphism")
    proj.setflags(write=False)
    return Q, proj


def subgroup_as_group(G: GroupTable, H: Subgroup) -> GroupTable:
    """H reindexed as a standalone GroupTable (element i is H.elems[i])."""
    arr = H.elem_array
    pos = np.full(G.order, -1, dtype=np.int64)
    pos[arr] = np.arange(H.order)
    mul = pos[G.mul[np.ix_(arr, arr)]]
    return GroupTable(mul, provenance=f"subgroup(order={H.order} of {G.provenance})")


# ---------------------------------------------------------------------------
# Isomorphism testing
# ---------------------------------------------------------------------------

def is_isomorphic(A: GroupTable, B: GroupTable, cap: int = ISO_ORDER_CAP) -> bool:
    if A.order > cap or B.order > cap:
        raise SizeLimitError(f"isomorphism cap {cap} exceeded")
    if A is B:
        return True
    if A.fingerprint != B.fingerprint:
        return False
    return find_isomorphism(A, B) is not None


def find_isomorphism(A: GroupTable, B: GroupTable) -> np.ndarray | None:
    """Backtracking search mapping A's minimal generating sequence into B.

    Candidates are filtered by (element order, conjugacy-class size) and by the
    partial subgroup sizes of the generator chain; a candidate map is accepted
    only after a full table check.
    """
    if A.order != B.order:
        return None
    gens = A.minimal_generators
    if not gens:  # trivial group
        return np.zeros(1, dtype=np.int64)
    chain_sizes = A.generator_chain_sizes
    span = _spanning_words(A, gens)
    a_inv = [(int(A.element_orders[g]), int(A.class_size_of[g])) for g in gens]
    b_inv = {}
    for x in range(B.order):
        b_inv.setdefault((int(B.element_orders[x]), int(B.class_size_of[x])), []).append(x)

    images: list[int] = []

    def extend(level: int) -> np.ndarray | None:
        if level == len(gens):
            phi = _build_map(A, B, gens, images, span)
            if phi is not None and _is_full_isomorphism(A, B, phi):
                return phi
            return None
        for cand in b_inv.get(a_inv[level], ()):
            images.append(cand)
            size = int(closure_of(B, [images[i] for i in range(level + 1)]).size)
            if size == chain_sizes[level]:
                got = extend(level + 1)
                if got is not None:
                    return got
            images.pop()
        return None

    return extend(0)


def _spanning_words(A: GroupTable, gens: Sequence[int]) -> list[tuple[int, int, int]]:
    """BFS factorisation: triples (new, parent, gen_index) with new = parent*gen."""
    n = A.order
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    order = [0]
    steps: list[tuple[int, int, int]] = []
    head = 0
    while head < len(order):
        cur = order[head]
        head += 1
        for gi, g in enumerate(gens):
            nxt = int(A.mul[cur, g])
            if not seen[nxt]:
                seen[nxt] = True
                order.append(nxt)
                steps.append((nxt, cur, gi))
    return steps


def _build_map(A: GroupTable, B: GroupTable, gens, images, span) -> np.ndarray | None:
    phi = np.full(A.order, -1, dtype=np.int64)
    phi[0] = 0
    for new, parent, gi in span:
        phi[new] = B.mul[phi[parent], images[gi]]
    if (phi < 0).any():
        return None
    return phi


def _is_full_isomorphism(A: GroupTable, B: GroupTable, phi: np.ndarray) -> bool:
    if np.unique(phi).size != A.order:
        return False
    return bool(np.array_equal(phi[A.mul], B.mul[phi[:, None], phi[None, :]]))


# ---------------------------------------------------------------------------
# Structure classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructureReport:
    is_abelian: bool
    is_dedekind: bool
    is_nilpotent: bool
    is_soluble: bool
    is_supersoluble: bool
    derived_length: int | None
    center_order: int
    derived_order: int

    def __post_init__(self):
        ok = (
            (not self.is_abelian or self.is_dedekind)
            and (not self.is_nilpotent or self.is_supersoluble)
            and (not self.is_supersoluble or self.is_soluble)
            and ((self.derived_length is not None and self.derived_length <= 1)
                 == self.is_abelian)
        )
        if not ok:
            raise VerificationError("structure implication chain violated")


def _derived_of(G: GroupTable, elems: np.ndarray) -> np.ndarray:
    inv_e = G.inv[elems].astype(np.int64)
    left = G.mul[np.ix_(inv_e, inv_e)].ravel()
    right = G.mul[np.ix_(elems, elems)].ravel()
    comms = np.unique(G.mul[left, right])
    return closure_of(G, comms.tolist())


def derived_series(G: GroupTable) -> list[np.ndarray]:
    series = [np.arange(G.order, dtype=np.int64)]
    while True:
        nxt = _derived_of(G, series[-1])
        if nxt.size == series[-1].size:
            break
        series.append(nxt)
        if nxt.size == 1:
            break
    return series


def classify_structure(G: GroupTable, cap: int = SUBGROUP_ORDER_CAP) -> StructureReport:
    """Structure flags computed from first principles, with the supersolubility
    test done two independent ways (chief-factor orders vs maximal-subgroup
    indices) and cross-checked."""
    if G.order > cap:
        raise SizeLimitError(f"group order {G.order} exceeds cap {cap}")
    series = derived_series(G)
    soluble = series[-1].size == 1
    derived_length = len(series) - 1 if soluble else None
    abelian = G.is_abelian
    subs = all_subgroups(G, cap)
    normal_flags = {s.elems: is_normal_subgroup(G, s) for s in subs}
    dedekind = all(normal_flags.values())
    nilpotent = _is_nilpotent(G, subs)
    supers_chief = _supersoluble_by_chief_series(G, subs, normal_flags) if soluble else False
    supers_maximal = _supersoluble_by_maximal_indices(G, subs) if soluble else False
    if supers_chief != supers_maximal:
        raise VerificationError(
            f"supersolubility tests disagree: chief={supers_chief} maximal={supers_maximal}")
    return StructureReport(
        is_abelian=abelian,
        is_dedekind=dedekind,
        is_nilpotent=nilpotent,
        is_soluble=soluble,
        is_supersoluble=supers_chief,
        derived_length=derived_length,
        center_order=len(G.center_elems),
        derived_order=int(G.derived_elems.size),
    )


def _is_nilpotent(G: GroupTable, subs: Sequence[Subgroup]) -> bool:
    # nilpotent iff every Sylow subgroup is normal iff each is unique
    n = G.order
    for p in _prime_factors(n):
        part = 1
        m = n
        while m % p == 0:
            part *= p
            m //= p
        if sum(1 for s in subs if s.order == part) != 1:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _supersoluble_by_chief_series(G: GroupTable, subs: Sequence[Subgroup],
                                  normal_flags: dict) -> bool:
    normals = sorted((s for s in subs if normal_flags[s.elems]),
                     key=lambda s: (s.order, s.elems))
    cur = normals[0]  # trivial subgroup
    while cur.order < G.order:
        over = [s for s in normals if s.order > cur.order and s.contains_subgroup(cur)]
        step = min(over, key=lambda s: s.order)
        if not _is_prime(step.order // cur.order):
            return False
        cur = step
    return True


def _supersoluble_by_maximal_indices(G: GroupTable, subs: Sequence[Subgroup]) -> bool:
    proper = [s for s in subs if s.order < G.order]
    for H in proper:
        is_maximal = not any(
            K.order > H.order and K.order < G.order and K.contains_subgroup(H)
            for K in proper)
        if is_maximal and not _is_prime(G.order // H.order):
            return False
    return True


def has_section(G: GroupTable, X: GroupTable) -> tuple[bool, tuple[Subgroup, Subgroup] | None]:
    """Whether some H <= G and N normal in H give H/N isomorphic to X."""
    if X.order == 1:
        t = trivial_subgroup(G)
        return True, (t, t)
    subs = all_subgroups(G)
    if not any(s.order % X.order == 0 for s in subs):
        return False, None
    for H in subs:
        if H.order % X.order != 0:
            continue
        Hg = subgroup_as_group(G, H)
        if H.order == X.order:
            if is_isomorphic(Hg, X):
                return True, (H, trivial_subgroup(G))
            continue
        target = H.order // X.order
        for N in all_subgroups(Hg):
            if N.order != target or not is_normal_subgroup(Hg, N):
                continue
            Q, _ = quotient_group(Hg, N)
            if is_isomorphic(Q, X):
                n_in_g = Subgroup(G, tuple(sorted(H.elems[i] for i in N.elems)))
                return True, (H, n_in_g)
    return False, None
