"""Belief-propagation (peeling) decoder for sum-of-sources equations.

Each equation states that a known value is the ring sum of a set of source
symbols.  Over characteristic 2 this is the usual XOR peeling decoder; over
Z_q or the integers the "XOR" becomes addition and peeling subtracts.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Collection, Sequence


class PeelingIntegrityError(ValueError):
    """Equations disagree about the value of an already resolved source."""


@dataclass
class PeelResult:
    values: dict[int, Any]
    unresolved: frozenset[int]
    work: int = 0
    # (equation index, source solved by it) in solve order
    trace: list[tuple[int, int]] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.unresolved

    @property
    def resolved(self) -> frozenset[int]:
        return frozenset(src for _, src in self.trace)


def peel_decode(
    equations: Sequence[Collection[int]],
    num_sources: int,
    known: Sequence[Any] | None = None,
    check: bool = True,
) -> PeelResult:
    """Peel ``equations`` until every source in ``1..num_sources`` is solved or none can be.

    ``known[i]`` is the value of equation ``i``.  Without ``known`` only the
    structure is decoded (values stay empty), which is what the MDS checks
    use.  Among equations with one unresolved source the lowest index goes
    first.  ``work`` counts block subtractions spent solving sources;
    consistency checks on redundant equations are not charged.
    """
    if known is not None and len(known) != len(equations):
        raise ValueError("one value per equation required")
    eqs = [frozenset(e) for e in equations]
    occurs: dict[int, list[int]] = {}
    for i, eq in enumerate(eqs):
        if not eq:
            raise ValueError(f"equation {i} is empty")
        for src in eq:
            if not 1 <= src <= num_sources:
                raise ValueError(f"equation {i} references source {src} outside 1..{num_sources}")
            occurs.setdefault(src, []).append(i)

    pending = [len(eq) for eq in eqs]
    ready = [i for i, cnt in enumerate(pending) if cnt == 1]
    heapq.heapify(ready)
    solved: set[int] = set()
    used: set[int] = set()
    values: dict[int, Any] = {}
    trace: list[tuple[int, int]] = []
    work = 0

    while ready and len(solved) < num_sources:
        i = heapq.heappop(ready)
        if pending[i] != 1:
            continue
        (src,) = (s for s in eqs[i] if s not in solved)
        if known is not None:
            val = known[i]
            for other in eqs[i]:
                if other != src:
                    val = val - values[other]
                    work += 1
            values[src] = val
        else:
            work += len(eqs[i]) - 1
        solved.add(src)
        used.add(i)
        trace.append((i, src))
        for j in occurs[src]:
            pending[j] -= 1
            if pending[j] == 1:
                heapq.heappush(ready, j)

    if check and known is not None:
        for i, eq in enumerate(eqs):
            if i in used or pending[i] != 0:
                continue
            total = None
            for src in eq:
                total = values[src] if total is None else total + values[src]
            if total != known[i]:
                raise PeelingIntegrityError(f"equation {i} over sources {sorted(eq)} is inconsistent")

    unresolved = frozenset(range(1, num_sources + 1)) - solved
    return PeelResult(values=values, unresolved=unresolved, work=work, trace=trace)


def peels(equations: Sequence[Collection[int]], num_sources: int) -> bool:
    """True when the equations alone determine every source by peeling."""
    return peel_decode(equations, num_sources).complete
