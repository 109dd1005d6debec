"""Label permutations: canonical form, neighborhoods, enumeration, Kendall's tau.

A permutation of size L is stored 1-based as a tuple ``map`` with
``map[l - 1] = sigma(l)``: category ``l`` of the response is placed at rank
``sigma(l)`` of the latent ordinal scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


class PermutationError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Permutation:
    map: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.map)
        if sorted(m) != list(range(1, len(m) + 1)):
            raise PermutationError(f"{m} is not a bijection on 1..{len(m)}")
        object.__setattr__(self, "map", m)

    @classmethod
    def identity(cls, size: int) -> "Permutation":
        return cls(tuple(range(1, size + 1)))

    @classmethod
    def from_order(cls, order: Sequence[int]) -> "Permutation":
        """Build from the category sequence listed lowest rank first.

        ``from_order([1, 3, 2])`` places category 3 between 1 and 2, i.e. the
        ordering ``1 < 3 < 2``.
        """
        ranks = [0] * len(order)
        for rank, category in enumerate(order, start=1):
            ranks[int(category) - 1] = rank
        return cls(tuple(ranks))

    def __len__(self) -> int:
        return len(self.map)

    def __call__(self, level: int) -> int:
        return self.map[level - 1]

    def __iter__(self):
        return iter(self.map)

    @property
    def size(self) -> int:
        return len(self.map)

    def order(self) -> tuple[int, ...]:
        """Categories sorted by rank (the inverse permutation)."""
        inv = [0] * self.size
        for level, rank in enumerate(self.map, start=1):
            inv[rank - 1] = level
        return tuple(inv)

    def reversed(self) -> "Permutation":
        n = self.size
        return Permutation(tuple(n + 1 - v for v in self.map))

    @property
    def is_canonical(self) -> bool:
        return self.size < 2 or self.map[0] < self.map[1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.map, dtype=np.int64)

    def __str__(self) -> str:
        return "(" + ",".join(str(v) for v in self.map) + ")"


def canonicalize(p: Permutation) -> Permutation:
    """Representative of ``{p, reversal of p}`` with ``sigma(1) < sigma(2)``."""
    if p.size < 2:
        raise PermutationError("canonical form needs L >= 2")
    return p if p.is_canonical else p.reversed()


def transposition_neighbors(p: Permutation, adjacent_only: bool = False) -> list[Permutation]:
    """All permutations obtained by swapping the values at two positions.

    With ``adjacent_only`` the swap is restricted to two categories whose
    ranks are adjacent (``L - 1`` neighbors instead of ``L(L-1)/2``).
    Returned in lexicographic order of their maps.
    """
    m = list(p.map)
    out = []
    for i, j in itertools.combinations(range(len(m)), 2):
        if adjacent_only and abs(m[i] - m[j]) != 1:
            continue
        q = m.copy()
        q[i], q[j] = q[j], q[i]
        out.append(Permutation(tuple(q)))
    out.sort()
    return out


def enumerate_all(size: int, canonical_only: bool = False) -> Iterator[Permutation]:
    """Yield every permutation of ``1..size`` in lexicographic order.

    ``canonical_only`` yields one member per reversal pair (``size!/2`` items).
    """
    if size < 2:
        raise PermutationError("enumeration needs L >= 2")
    for m in itertools.permutations(range(1, size + 1)):
        if canonical_only and m[0] > m[1]:
            continue
        yield Permutation(m)


def kendall_tau(a: Permutation | Sequence[int], b: Permutation | Sequence[int]) -> float:
    """Kendall rank correlation of two equal-length rank sequences (no ties)."""
    x = tuple(a)
    y = tuple(b)
    if len(x) != len(y):
        raise PermutationError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise PermutationError("Kendall's tau needs at least 2 items")
    score = 0
    for i, j in itertools.combinations(range(n), 2):
        score += 1 if (x[i] - x[j]) * (y[i] - y[j]) > 0 else -1
    return score / (n * (n - 1) / 2)


def ordering_tau(estimate: Permutation, truth: Permutation, orientation: str = "canonical") -> float:
    """Agreement between an estimated and a true category ordering.

    ``orientation="canonical"`` compares canonical forms; ``"best"`` takes the
    better of the two orientations of ``estimate`` (an ordering and its
    reversal define the same model).
    """
    if orientation == "canonical":
        return kendall_tau(canonicalize(estimate), canonicalize(truth))
    if orientation == "best":
        return max(kendall_tau(estimate, truth), kendall_tau(estimate.reversed(), truth))
    raise ValueError(f"unknown orientation {orientation!r}")


def inversions(p: Permutation) -> int:
    m = p.map
    return sum(1 for i, j in itertools.combinations(range(len(m)), 2) if m[i] > m[j])


def permutation_at_tau(size: int, target: float) -> Permutation:
    """Canonical permutation reached from the identity by adjacent swaps until
    its Kendall tau against the identity drops to ``target`` or below.

    Each step swaps the rightmost adjacent ascent that keeps the permutation
    canonical, so every step adds exactly one inversion.  When the walk gets
    stuck before reaching ``target`` the last permutation is returned; callers
    read the achieved tau off the result.
    """
    if not -1.0 <= target <= 1.0:
        raise PermutationError(f"tau target {target} outside [-1, 1]")
    current = list(range(1, size + 1))
    ident = tuple(current)
    while kendall_tau(current, ident) > target + 1e-12:
        for i in range(size - 2, -1, -1):
            if current[i] < current[i + 1] and i != 0:
                break
        else:
            break
        current[i], current[i + 1] = current[i + 1], current[i]
    return Permutation(tuple(current))
