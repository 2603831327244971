"""ANOVA sets, component multi-index sets and the global basis catalog.

Conventions
-----------
* A multi-index is a tuple of ``N`` nonnegative degrees.
* An ANOVA set is a strictly increasing tuple of 1-based dimension labels;
  ``()`` is the order-0 set.
* Catalog order: zero index, then ANOVA order ascending, then ANOVA sets
  lexicographically, then multi-indices by total degree and lexicographically.
  Appending a new order therefore extends an existing catalog as a prefix.
"""
from __future__ import annotations

import itertools
import json
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InputError

MultiIndex = tuple[int, ...]
AnovaSet = tuple[int, ...]

__all__ = [
    "MultiIndex",
    "AnovaSet",
    "IndexCatalog",
    "enumerate_anova_sets",
    "component_multiindices",
    "build_catalog",
    "full_catalog",
    "admissible_next",
    "support",
]


def support(index: Sequence[int]) -> AnovaSet:
    """1-based labels of the nonzero entries of a multi-index."""
    return tuple(t + 1 for t, d in enumerate(index) if d != 0)


def enumerate_anova_sets(k: int, N: int) -> list[AnovaSet]:
    """All subsets of {1..N} of size k, lexicographic."""
    if k < 0 or k > N:
        raise DomainError(f"ANOVA order must satisfy 0 <= k <= N, got k={k}, N={N}")
    return list(itertools.combinations(range(1, N + 1), k))


def _compositions(total: int, parts: int):
    """Positive integer vectors of length ``parts`` summing to ``total``."""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def component_multiindices(T: AnovaSet, p: int, N: int) -> list[MultiIndex]:
    """Multi-indices supported exactly on ``T`` with total degree <= p."""
    T = tuple(T)
    if any(t < 1 or t > N for t in T):
        raise InputError(f"ANOVA set {T} not contained in 1..{N}")
    if not T:
        return [(0,) * N]
    out = []
    for total in range(len(T), p + 1):
        degs = sorted(_compositions(total, len(T)))
        for d in degs:
            idx = [0] * N
            for t, v in zip(T, d):
                idx[t - 1] = v
            out.append(tuple(idx))
    return out


class IndexCatalog:
    """Ordered gPC basis with position lookup and per-ANOVA-set slices.

    Parameters
    ----------
    N, p : int
        Stochastic dimension and total-degree bound.
    sets : sequence of AnovaSet
        ANOVA sets in catalog order, starting with ``()``.
    blocks : sequence of list of MultiIndex
        Multi-indices belonging to each set, aligned with ``sets``.
    """

    def __init__(self, N: int, p: int, sets: Sequence[AnovaSet], blocks: Sequence[Sequence[MultiIndex]]):
        if not sets or tuple(sets[0]) != ():
            raise InputError("catalog must start with the empty ANOVA set")
        self.N = N
        self.p = p
        self.sets: list[AnovaSet] = [tuple(s) for s in sets]
        entries: list[MultiIndex] = []
        self._ranges: dict[AnovaSet, range] = {}
        for s, blk in zip(self.sets, blocks):
            if s in self._ranges:
                raise InputError(f"duplicate ANOVA set {s}")
            start = len(entries)
            entries.extend(tuple(int(v) for v in b) for b in blk)
            self._ranges[s] = range(start, len(entries))
        self.entries: list[MultiIndex] = entries
        self.position: dict[MultiIndex, int] = {e: i for i, e in enumerate(entries)}
        if len(self.position) != len(entries):
            raise InputError("catalog entries are not unique")
        self.array = np.array(entries, dtype=np.int64).reshape(len(entries), N)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, index) -> bool:
        return tuple(index) in self.position

    def __eq__(self, other) -> bool:
        return isinstance(other, IndexCatalog) and self.N == other.N and self.entries == other.entries

    def __repr__(self) -> str:
        return f"IndexCatalog(N={self.N}, p={self.p}, size={len(self)}, sets={len(self.sets)})"

    def index(self, mi: Sequence[int]) -> int:
        return self.position[tuple(mi)]

    def set_range(self, T: AnovaSet) -> range:
        try:
            return self._ranges[tuple(T)]
        except KeyError:
            raise InputError(f"ANOVA set {tuple(T)} not in catalog") from None

    def has_set(self, T: AnovaSet) -> bool:
        return tuple(T) in self._ranges

    @property
    def max_degree(self) -> int:
        return int(self.array.max()) if len(self) else 0

    def is_prefix_of(self, other: "IndexCatalog") -> bool:
        return other.entries[: len(self)] == self.entries

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "p": self.p,
            "orders": [{"set": list(s), "indices": [list(e) for e in (self.entries[i] for i in self._ranges[s])]} for s in self.sets],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "IndexCatalog":
        sets = [tuple(o["set"]) for o in doc["orders"]]
        blocks = [[tuple(i) for i in o["indices"]] for o in doc["orders"]]
        return cls(int(doc["N"]), int(doc["p"]), sets, blocks)

    @classmethod
    def from_json(cls, text: str) -> "IndexCatalog":
        return cls.from_dict(json.loads(text))


def build_catalog(active: Sequence[Iterable[AnovaSet]], p: int, N: int) -> IndexCatalog:
    """Catalog spanned by the zero index and every active ANOVA set.

    ``active[j]`` holds the active sets of order ``j + 1``. Sets of order
    larger than ``p`` carry no multi-index and are left out.
    """
    seen: set[AnovaSet] = set()
    sets: list[AnovaSet] = [()]
    blocks: list[list[MultiIndex]] = [[(0,) * N]]
    for order, group in enumerate(active, start=1):
        for T in sorted(tuple(t) for t in group):
            if len(T) != order:
                raise InputError(f"set {T} listed under order {order}")
            if T in seen:
                raise InputError(f"duplicate ANOVA set {T}")
            seen.add(T)
            if order > p:
                continue
            sets.append(T)
            blocks.append(component_multiindices(T, p, N))
    return IndexCatalog(N, p, sets, blocks)


def full_catalog(N: int, p: int) -> IndexCatalog:
    """Full total-degree space (size C(N+p, N)) in catalog order."""
    active = [enumerate_anova_sets(k, N) for k in range(1, min(N, p) + 1)]
    return build_catalog(active, p, N)


def admissible_next(retained: Iterable[AnovaSet], N: int) -> list[AnovaSet]:
    """Order-(k+1) sets whose every order-k subset is retained."""
    kept = {tuple(t) for t in retained}
    if not kept:
        return []
    k = len(next(iter(kept)))
    if any(len(t) != k for t in kept):
        raise InputError("retained sets must share one cardinality")
    out = []
    for S in sorted(kept):
        # every candidate is generated once, from its subset without the max label
        start = S[-1] + 1 if S else 1
        for t in range(start, N + 1):
            T = S + (t,)
            if all(sub in kept for sub in itertools.combinations(T, k)):
                out.append(T)
    return sorted(out)


def catalog_size(active_sizes: Sequence[int], p: int) -> int:
    """Catalog size from the number of active sets per order (1-based orders)."""
    return 1 + sum(n * comb(p, k) for k, n in enumerate(active_sizes, start=1) if k <= p)
