"""Partial permutations and their order structure.

A partial permutation is a bijection of a finite set of positive-integer
vertex labels onto itself.  Equality remembers the support: the cycle
(1,2,3) acting on {1,2,3} is a different element from (1,2,3)(4) acting on
{1,2,3,4}.  Fixed points are genuine data.

Two order relations are provided.  The one-step relation ``leq_step``
(written a <= b below) holds when the vertex set of ``a`` is contained in
that of ``b`` and the shared directed edges are numerous enough:

    |V(a)| + #cycles(b) - #cycles(a) - 1  <=  |E(a) & E(b)|.

Its reflexive-transitive closure ``leq`` is a partial order with an
equivalent direct description: every loop of ``a`` traverses its vertices
in the cyclic order induced by the loop of ``b`` that contains them, and
the loops of ``a`` are pairwise non-crossing chords.  Both descriptions are
implemented; the test suite checks them against each other exhaustively.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Sequence

from .errors import LatticeCapExceeded, NotComparable

LATTICE_CAP = 6


class PartialPermutation:
    """A bijection on a finite set of positive integer labels."""

    __slots__ = ("_map", "_pairs", "_hash")

    def __init__(self, mapping: dict[int, int]):
        support = set(mapping)
        if set(mapping.values()) != support:
            raise ValueError(f"not a bijection on its support: {mapping}")
        if any(v < 1 for v in support):
            raise ValueError("vertex labels must be positive integers")
        self._map = dict(mapping)
        self._pairs = tuple(sorted(mapping.items()))
        self._hash = hash(self._pairs)

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]]) -> "PartialPermutation":
        mapping: dict[int, int] = {}
        for cyc in cycles:
            if not cyc:
                continue
            for a, b in zip(cyc, tuple(cyc[1:]) + (cyc[0],)):
                if a in mapping:
                    raise ValueError(f"overlapping cycles at vertex {a}")
                mapping[a] = b
        return cls(mapping)

    @classmethod
    def identity(cls, vertices: Iterable[int]) -> "PartialPermutation":
        return cls({v: v for v in vertices})

    @classmethod
    def empty(cls) -> "PartialPermutation":
        return cls({})

    @classmethod
    def parse(cls, text: str) -> "PartialPermutation":
        """Parse compact cycle notation like ``"(1,2)(3)"``; ``"()"`` is empty."""
        text = text.strip()
        if text in ("", "()"):
            return cls({})
        if not re.fullmatch(r"(\(\s*\d+(\s*,\s*\d+)*\s*\))+", text):
            raise ValueError(f"cannot parse permutation {text!r}")
        cycles = [
            [int(x) for x in grp.split(",")]
            for grp in re.findall(r"\(([^()]*)\)", text)
        ]
        return cls.from_cycles(cycles)

    @classmethod
    def from_json(cls, obj) -> "PartialPermutation":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict) or set(obj) != {"cycles"}:
            raise ValueError("permutation JSON must be {'cycles': [[...], ...]}")
        return cls.from_cycles(obj["cycles"])

    def to_json(self) -> dict:
        return {"cycles": [list(c) for c in self.cycles()]}

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self._map)

    @property
    def mapping(self) -> dict[int, int]:
        return dict(self._map)

    def __call__(self, v: int) -> int:
        return self._map[v]

    def __len__(self) -> int:
        return len(self._map)

    def __eq__(self, other) -> bool:
        return isinstance(other, PartialPermutation) and self._pairs == other._pairs

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if not self._map:
            return "()"
        return "".join("(" + ",".join(map(str, c)) + ")" for c in self.cycles())

    def cycles(self) -> list[tuple[int, ...]]:
        """Orbit decomposition; each cycle starts at its least vertex."""
        seen: set[int] = set()
        out = []
        for start in sorted(self._map):
            if start in seen:
                continue
            orbit = [start]
            seen.add(start)
            v = self._map[start]
            while v != start:
                orbit.append(v)
                seen.add(v)
                v = self._map[v]
            out.append(tuple(orbit))
        return out

    @property
    def n_cycles(self) -> int:
        return len(self.cycles())

    def is_cycle(self) -> bool:
        return self.n_cycles == 1

    def one_line(self) -> tuple[int, ...]:
        return tuple(self._map[v] for v in sorted(self._map))

    def invert(self) -> "PartialPermutation":
        return PartialPermutation({b: a for a, b in self._map.items()})

    def compose(self, other: "PartialPermutation") -> "PartialPermutation":
        """self after other; both must act on the same support."""
        if self.support != other.support:
            raise ValueError("compose requires equal supports")
        return PartialPermutation({v: self._map[other._map[v]] for v in self._map})

    def restrict(self, vertices: Iterable[int]) -> "PartialPermutation":
        """Restriction to a sub-support closed under the permutation."""
        vs = set(vertices)
        if not vs <= self.support:
            raise ValueError("restriction set is not contained in the support")
        if any(self._map[v] not in vs for v in vs):
            raise ValueError("restriction set is not closed under the permutation")
        return PartialPermutation({v: self._map[v] for v in vs})

    def with_fixed_points(self, extra: Iterable[int]) -> "PartialPermutation":
        """Extend by fixed points on new vertices (lift to a larger support)."""
        mapping = dict(self._map)
        for v in extra:
            if v in mapping:
                raise ValueError(f"vertex {v} already in the support")
            mapping[v] = v
        return PartialPermutation(mapping)


EMPTY = PartialPermutation({})


def compose(sigma: PartialPermutation, pi: PartialPermutation) -> PartialPermutation:
    return sigma.compose(pi)


def invert(pi: PartialPermutation) -> PartialPermutation:
    return pi.invert()


def restrict(sigma: PartialPermutation, vertices: Iterable[int]) -> PartialPermutation:
    return sigma.restrict(vertices)


def cycles(sigma: PartialPermutation) -> list[tuple[int, ...]]:
    return sigma.cycles()


def edge_set(sigma: PartialPermutation) -> frozenset[tuple[int, int]]:
    """Directed edges (v, sigma(v)) of the functional digraph."""
    return frozenset(sigma.mapping.items())


def _require_cycle(p: PartialPermutation, name: str) -> None:
    if not p.is_cycle():
        raise ValueError(f"{name} must be a single cycle, got {p!r}")


def _orbit(sigma: PartialPermutation, start: int) -> list[int]:
    out = [start]
    v = sigma(start)
    while v != start:
        out.append(v)
        v = sigma(v)
    return out


def in_cyclic_order(sigma: PartialPermutation, vs: Sequence[int]) -> bool:
    """Does the orbit of ``sigma`` visit ``vs`` in the given cyclic order?"""
    _require_cycle(sigma, "sigma")
    if len(vs) < 3:
        raise ValueError("need at least three vertices")
    if len(set(vs)) != len(vs):
        raise ValueError("vertices must be distinct")
    if not set(vs) <= sigma.support:
        raise ValueError("vertices must lie in the support of sigma")
    orbit = _orbit(sigma, vs[0])
    pos = {v: i for i, v in enumerate(orbit)}
    ranks = [pos[v] for v in vs]
    return all(a < b for a, b in zip(ranks, ranks[1:]))


def is_subloop(sigma: PartialPermutation, tau: PartialPermutation) -> bool:
    """Is the cycle ``sigma`` a sub-loop of the cycle ``tau``?

    Operative rule: the orbit of ``sigma`` visits its vertices in the
    cyclic order induced by ``tau``.  A loop obtained by closing one
    interval of ``tau`` (the one-step case, where tau o sigma^{-1} moves
    at most one vertex) always passes; so do loops reached by iterating
    interval decompositions, which is what the order relation requires.
    """
    _require_cycle(sigma, "sigma")
    _require_cycle(tau, "tau")
    if not sigma.support <= tau.support:
        raise ValueError("support of sigma must be contained in support of tau")
    if len(sigma) <= 2:
        return True
    start = min(sigma.support)
    return in_cyclic_order(tau, _orbit(sigma, start))


def _arc_strictly_between(tau: PartialPermutation, a: int, b: int) -> set[int]:
    """Vertices met walking tau forward from a to b, both endpoints excluded."""
    out: set[int] = set()
    v = tau(a)
    while v != b:
        out.add(v)
        v = tau(v)
    return out


def are_crossing(
    pi1: PartialPermutation, pi2: PartialPermutation, sigma: PartialPermutation
) -> bool:
    """Do the chords of two disjoint sub-loops of ``sigma`` interleave?

    An edge (a, b) of pi1 and an edge (c, d) of pi2 cross when exactly one
    of c, d lies strictly inside the forward arc of ``sigma`` from a to b.
    Degenerate edges (fixed points, or tuples with fewer than four distinct
    vertices) never cross.
    """
    _require_cycle(pi1, "pi1")
    _require_cycle(pi2, "pi2")
    _require_cycle(sigma, "sigma")
    if pi1.support & pi2.support:
        raise ValueError("sub-loops must have disjoint supports")
    if not (pi1.support | pi2.support) <= sigma.support:
        raise ValueError("sub-loops must live on the support of sigma")
    for a, b in edge_set(pi1):
        if a == b:
            continue
        inside = _arc_strictly_between(sigma, a, b)
        for c, d in edge_set(pi2):
            if c == d:
                continue
            if (c in inside) != (d in inside):
                return True
    return False


def leq_step(sigma: PartialPermutation, tau: PartialPermutation) -> bool:
    """One-step relation via the shared-edge count."""
    if not sigma.support <= tau.support:
        return False
    shared = len(edge_set(sigma) & edge_set(tau))
    return len(sigma.support) + tau.n_cycles - sigma.n_cycles - 1 <= shared


def lt_step(sigma: PartialPermutation, tau: PartialPermutation) -> bool:
    return sigma != tau and leq_step(sigma, tau)


def leq(sigma: PartialPermutation, tau: PartialPermutation) -> bool:
    """The partial order: loop-wise order embedding plus non-crossing."""
    if not sigma.support <= tau.support:
        return False
    tau_loops = [PartialPermutation.from_cycles([c]) for c in tau.cycles()]
    loc = {v: k for k, loop in enumerate(tau_loops) for v in loop.support}
    sigma_loops = [PartialPermutation.from_cycles([c]) for c in sigma.cycles()]
    homes = []
    for loop in sigma_loops:
        ks = {loc[v] for v in loop.support}
        if len(ks) != 1:
            return False
        k = ks.pop()
        if not is_subloop(loop, tau_loops[k]):
            return False
        homes.append(k)
    for (i, li), (j, lj) in itertools.combinations(enumerate(sigma_loops), 2):
        if homes[i] == homes[j] and are_crossing(li, lj, tau_loops[homes[i]]):
            return False
    return True


def lt(sigma: PartialPermutation, tau: PartialPermutation) -> bool:
    return sigma != tau and leq(sigma, tau)


def interval_decomposition_oracle(tau: PartialPermutation) -> set[PartialPermutation]:
    """All one-step predecessors of a single cycle, built constructively.

    Partition the orbit circle into contiguous intervals; close each kept
    interval into a cycle and delete the rest.  Equals {sigma : sigma <= tau}
    by the edge-count test (cross-checked exhaustively in the test suite).
    """
    _require_cycle(tau, "tau")
    m = len(tau)
    if m > 8:
        raise LatticeCapExceeded("interval oracle capped at cycles of length 8")
    orbit = _orbit(tau, min(tau.support))
    out: set[PartialPermutation] = set()
    for k in range(1, m + 1):
        for cuts in itertools.combinations(range(m), k):
            blocks = []
            for i, c in enumerate(cuts):
                nxt = cuts[(i + 1) % k]
                if nxt > c:
                    blocks.append(orbit[c:nxt])
                else:
                    blocks.append(orbit[c:] + orbit[:nxt])
            for keep in itertools.product((False, True), repeat=k):
                out.add(
                    PartialPermutation.from_cycles(
                        [b for b, used in zip(blocks, keep) if used]
                    )
                )
    return out


def step_predecessors(tau: PartialPermutation) -> set[PartialPermutation]:
    """{sigma : sigma <= tau in one step}, for arbitrary tau (constructive)."""
    loops = tau.cycles()
    out = {tau}
    for k, loop in enumerate(loops):
        rest = [c for i, c in enumerate(loops) if i != k]
        base = PartialPermutation.from_cycles(rest)
        for piece in interval_decomposition_oracle(
            PartialPermutation.from_cycles([loop])
        ):
            out.add(PartialPermutation(base.mapping | piece.mapping))
    return out


@lru_cache(maxsize=4096)
def downset(tau: PartialPermutation) -> frozenset[PartialPermutation]:
    """All sigma with sigma reachable from tau by one-step moves (chain closure)."""
    seen: set[PartialPermutation] = set()
    frontier = {tau}
    while frontier:
        seen |= frontier
        frontier = {
            s for f in frontier for s in step_predecessors(f) if s not in seen
        }
    return frozenset(seen)


def leq_chain(sigma: PartialPermutation, tau: PartialPermutation) -> bool:
    """Chain-of-steps characterization of the order (reference path)."""
    return sigma in downset(tau)


def full_support_downset(sigma: PartialPermutation) -> set[PartialPermutation]:
    """{pi : pi below sigma with the same support}."""
    return {p for p in downset(sigma) if p.support == sigma.support}


def nonfixed(sigma: PartialPermutation, tau: PartialPermutation) -> frozenset[int]:
    """Vertices of sigma moved by tau o sigma^{-1}; requires one-step order."""
    if not leq_step(sigma, tau):
        raise NotComparable(f"{sigma!r} is not one-step below {tau!r}")
    inv = sigma.invert()
    return frozenset(b for b in sigma.support if tau(inv(b)) != b)


def hat_nonfixed(sigma: PartialPermutation, tau: PartialPermutation) -> frozenset[int]:
    return nonfixed(sigma, tau) | (tau.support - sigma.support)


def hat_nonfixed_preimage(
    sigma: PartialPermutation, tau: PartialPermutation
) -> frozenset[int]:
    """sigma^{-1} of the hatted non-fixed set, with sigma^{-1} = id off-support."""
    inv = sigma.invert()
    return frozenset(inv(b) for b in nonfixed(sigma, tau)) | (
        tau.support - sigma.support
    )


def _sort_key(p: PartialPermutation):
    return (len(p.support), -p.n_cycles, tuple(sorted(p.support)), p.one_line())


@dataclass(frozen=True)
class OrderedIndex:
    """All partial permutations on subsets of a vertex set, in solve order.

    The sort (support size ascending, cycle count descending, then a fixed
    canonical tiebreak) is a linear extension of the partial order, so
    forward substitution along the index is well defined.
    """

    vertices: tuple[int, ...]
    elements: tuple[PartialPermutation, ...]
    positions: dict[PartialPermutation, int] = field(compare=False, repr=False)

    @classmethod
    def for_vertices(cls, vertices: Iterable[int], cap: int = LATTICE_CAP) -> "OrderedIndex":
        vs = tuple(sorted(set(vertices)))
        if len(vs) > cap:
            raise LatticeCapExceeded(
                f"lattice on {len(vs)} vertices exceeds the cap {cap}"
            )
        elems: list[PartialPermutation] = []
        for k in range(len(vs) + 1):
            for subset in itertools.combinations(vs, k):
                for images in itertools.permutations(subset):
                    elems.append(
                        PartialPermutation(dict(zip(subset, images)))
                    )
        elems.sort(key=_sort_key)
        return cls(vs, tuple(elems), {p: i for i, p in enumerate(elems)})

    def __len__(self) -> int:
        return len(self.elements)

    def position(self, p: PartialPermutation) -> int:
        return self.positions[p]


def enumerate_lattice(ell: int, cap: int = LATTICE_CAP) -> OrderedIndex:
    """The ordered index over supports contained in {1, ..., ell}."""
    if ell < 1:
        raise ValueError("ell must be positive")
    if ell > cap:
        raise LatticeCapExceeded(f"ell={ell} exceeds the cap {cap}")
    return OrderedIndex.for_vertices(range(1, ell + 1), cap=cap)


def lattice_size(ell: int) -> int:
    return sum(comb(ell, k) * factorial(k) for k in range(ell + 1))


def predecessors(
    tau: PartialPermutation, index: OrderedIndex
) -> set[PartialPermutation]:
    """{sigma in index : sigma strictly one step below tau}."""
    return {s for s in index.elements if s != tau and leq_step(s, tau)}


def lattice_to_json(index: OrderedIndex) -> dict:
    """Ordered element list plus the one-step adjacency (strict pairs)."""
    adj = [
        [i, j]
        for j, t in enumerate(index.elements)
        for i, s in enumerate(index.elements)
        if i != j and leq_step(s, t)
    ]
    return {
        "vertices": list(index.vertices),
        "elements": [p.to_json() for p in index.elements],
        "precedes": adj,
    }
