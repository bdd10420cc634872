"""Concrete transition systems, state partitions and their existential
abstractions.

A partition is an abstract domain of sets of states: ``alpha`` maps a set
of states to the blocks it touches, ``gamma`` takes the union of blocks.
Blocks are kept sorted by their least state, so block ids are stable and
deterministic.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

StateSet = frozenset[int]
BlockSet = frozenset[int]

EXHAUSTIVE_BLOCK_LIMIT = 16


@dataclass(frozen=True)
class TransitionSystem:
    size: int
    edges: frozenset[tuple[int, int]]
    init: StateSet = frozenset()
    error: StateSet = frozenset()
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))
        object.__setattr__(self, "init", frozenset(self.init))
        object.__setattr__(self, "error", frozenset(self.error))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.size)))
        if len(self.labels) != self.size:
            raise ValueError("one label per state required")
        if len(set(self.labels)) != self.size:
            raise ValueError("state labels must be distinct")
        for a, b in self.edges:
            if not (0 <= a < self.size and 0 <= b < self.size):
                raise ValueError(f"edge {a} -> {b} leaves the state space")
        for s in self.init | self.error:
            if not 0 <= s < self.size:
                raise ValueError(f"state {s} out of range")

    @classmethod
    def numbered(cls, n: int, edges: Iterable[tuple[int, int]], init=(), error=()) -> "TransitionSystem":
        """States labelled ``1..n``; edges, init and error given by label number."""
        return cls(
            n,
            frozenset((a - 1, b - 1) for a, b in edges),
            frozenset(s - 1 for s in init),
            frozenset(s - 1 for s in error),
            tuple(str(i) for i in range(1, n + 1)),
        )

    @cached_property
    def _succ(self) -> tuple[StateSet, ...]:
        succ = defaultdict(set)
        for a, b in self.edges:
            succ[a].add(b)
        return tuple(frozenset(succ[s]) for s in range(self.size))

    @cached_property
    def _pred(self) -> tuple[StateSet, ...]:
        pred = defaultdict(set)
        for a, b in self.edges:
            pred[b].add(a)
        return tuple(frozenset(pred[s]) for s in range(self.size))

    @property
    def states(self) -> StateSet:
        return frozenset(range(self.size))

    def successors(self, s: int) -> StateSet:
        return self._succ[s]

    def post(self, states: Iterable[int]) -> StateSet:
        return frozenset().union(*(self._succ[s] for s in states))

    def pre(self, states: Iterable[int]) -> StateSet:
        return frozenset().union(*(self._pred[s] for s in states))

    def state(self, label: str) -> int:
        return self.labels.index(label)

    def ids(self, *labels: str) -> StateSet:
        return frozenset(self.state(x) for x in labels)

    def render(self, states: Iterable[int]) -> str:
        return "[" + ",".join(self.labels[s] for s in sorted(states)) + "]"


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks covering ``0 .. n-1``.

    ``names`` optionally carries display names keyed by block contents;
    they do not take part in equality.
    """

    blocks: tuple[StateSet, ...]
    names: dict[StateSet, str] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        blocks = tuple(sorted((frozenset(b) for b in self.blocks), key=min_or_fail))
        object.__setattr__(self, "blocks", blocks)
        seen: set[int] = set()
        for b in blocks:
            if seen & b:
                raise ValueError("blocks overlap")
            seen |= b
        if seen != set(range(len(seen))):
            raise ValueError("blocks do not cover 0..n-1")

    @classmethod
    def discrete(cls, n: int) -> "Partition":
        return cls(tuple(frozenset({s}) for s in range(n)))

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], names: dict | None = None) -> "Partition":
        return cls(tuple(frozenset(b) for b in blocks), dict(names or {}))

    @cached_property
    def block_of(self) -> tuple[int, ...]:
        owner = [0] * self.n_states
        for i, b in enumerate(self.blocks):
            for s in b:
                owner[s] = i
        return tuple(owner)

    @property
    def n_states(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def alpha(self, states: Iterable[int]) -> BlockSet:
        owner = self.block_of
        return frozenset(owner[s] for s in states)

    def gamma(self, blocks: Iterable[int]) -> StateSet:
        return frozenset().union(*(self.blocks[i] for i in blocks))

    def index(self, block: Iterable[int]) -> int:
        return self.blocks.index(frozenset(block))

    def block_name(self, i: int, ts: TransitionSystem | None = None) -> str:
        b = self.blocks[i]
        if b in self.names:
            return self.names[b]
        if ts is not None:
            return ts.render(b)
        return "[" + ",".join(map(str, sorted(b))) + "]"

    def render(self, ts: TransitionSystem) -> str:
        return "{" + ",".join(ts.render(b) for b in self.blocks) + "}"

    def refines(self, other: "Partition") -> bool:
        """Every block of ``self`` lies inside a block of ``other``."""
        owner = other.block_of
        return all(len({owner[s] for s in b}) == 1 for b in self.blocks)

    def split(self, i: int, parts: Sequence[Iterable[int]]) -> "Partition":
        """Replace block ``i`` by the nonempty ``parts`` (which must cover it)."""
        parts = [frozenset(p) for p in parts if p]
        if frozenset().union(*parts) != self.blocks[i] or sum(map(len, parts)) != len(self.blocks[i]):
            raise ValueError("parts must partition the block")
        rest = [b for j, b in enumerate(self.blocks) if j != i]
        names = {b: n for b, n in self.names.items() if b in rest}
        return Partition(tuple(rest + parts), names)

    def merge(self, groups: Iterable[Iterable[int]]) -> "Partition":
        """Union each group of block ids into one block."""
        used: set[int] = set()
        blocks = []
        for g in groups:
            g = sorted(set(g))
            used.update(g)
            blocks.append(self.gamma(g))
        blocks.extend(b for i, b in enumerate(self.blocks) if i not in used)
        names = {b: n for b, n in self.names.items() if b in blocks}
        return Partition(tuple(blocks), names)


def min_or_fail(block: frozenset[int]) -> int:
    if not block:
        raise ValueError("empty block")
    return min(block)


@dataclass(frozen=True)
class AbstractTransitionSystem:
    """Existential abstraction of ``ts`` over ``partition``; build with :func:`build_ats`."""

    ts: TransitionSystem
    partition: Partition
    edges: frozenset[tuple[int, int]]

    @cached_property
    def _succ(self) -> tuple[BlockSet, ...]:
        succ = defaultdict(set)
        for a, b in self.edges:
            succ[a].add(b)
        return tuple(frozenset(succ[i]) for i in range(len(self.partition)))

    @cached_property
    def _pred(self) -> tuple[BlockSet, ...]:
        pred = defaultdict(set)
        for a, b in self.edges:
            pred[b].add(a)
        return tuple(frozenset(pred[i]) for i in range(len(self.partition)))

    def successors(self, block: int) -> BlockSet:
        return self._succ[block]

    def post_ee(self, blocks: Iterable[int]) -> BlockSet:
        return frozenset().union(*(self._succ[b] for b in blocks))

    def pre_ee(self, blocks: Iterable[int]) -> BlockSet:
        return frozenset().union(*(self._pred[b] for b in blocks))

    def has_edge(self, a: int, b: int) -> bool:
        return (a, b) in self.edges

    def block_name(self, i: int) -> str:
        return self.partition.block_name(i, self.ts)

    def init_blocks(self) -> BlockSet:
        return self.partition.alpha(self.ts.init)

    def error_blocks(self) -> BlockSet:
        return self.partition.alpha(self.ts.error)


def build_ats(ts: TransitionSystem, partition: Partition) -> AbstractTransitionSystem:
    if partition.n_states != ts.size:
        raise ValueError(f"partition covers {partition.n_states} states, system has {ts.size}")
    owner = partition.block_of
    return AbstractTransitionSystem(ts, partition, frozenset((owner[a], owner[b]) for a, b in ts.edges))


def alpha_p(partition: Partition, states: Iterable[int]) -> BlockSet:
    return partition.alpha(states)


def gamma_p(partition: Partition, blocks: Iterable[int]) -> StateSet:
    return partition.gamma(blocks)


def signature(ats: AbstractTransitionSystem, block: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return tuple(sorted(ats.pre_ee({block}))), tuple(sorted(ats.post_ee({block})))


def partition_kernel(ts: TransitionSystem, partition: Partition) -> Partition:
    """Merge blocks with identical (pre, post) abstract neighbourhoods.

    Signatures are taken in ``partition`` itself: a single pass, not a
    fixpoint (see :func:`iterate_partition_kernel`).
    """
    return partition.merge(merge_groups(ts, partition))


def merge_groups(ts: TransitionSystem, partition: Partition) -> list[list[int]]:
    """Blocks of ``partition`` that the kernel puts together (groups of size > 1)."""
    ats = build_ats(ts, partition)
    groups: dict[tuple, list[int]] = defaultdict(list)
    for i in range(len(partition)):
        groups[signature(ats, i)].append(i)
    return sorted(g for g in groups.values() if len(g) > 1)


def iterate_partition_kernel(ts: TransitionSystem, partition: Partition) -> list[Partition]:
    """Re-apply :func:`partition_kernel` until nothing merges.

    Each stage keeps the previous stage's abstract pre/post, not
    necessarily the original's.  Returns every stage, the input first.
    """
    stages = [partition]
    while True:
        nxt = partition_kernel(ts, stages[-1])
        if nxt == stages[-1]:
            return stages
        stages.append(nxt)


def kernel_family_oracle(ts: TransitionSystem, partition: Partition) -> frozenset[StateSet]:
    """Intersection/union closure of concretized singleton pre/post images."""
    if len(partition) > EXHAUSTIVE_BLOCK_LIMIT:
        raise ValueError(f"oracle limited to {EXHAUSTIVE_BLOCK_LIMIT} blocks")
    ats = build_ats(ts, partition)
    gens = {partition.gamma(ats.pre_ee({c})) for c in range(len(partition))}
    gens |= {partition.gamma(ats.post_ee({b})) for b in range(len(partition))}
    family = {frozenset(), ts.states} | gens
    pending = list(family)
    while pending:
        x = pending.pop()
        for y in list(family):
            for z in (x & y, x | y):
                if z not in family:
                    family.add(z)
                    pending.append(z)
    return frozenset(family)


def family_atoms(n_states: int, family: Iterable[StateSet]) -> Partition:
    """Group states that no member of ``family`` separates."""
    fam = sorted(family, key=lambda s: sorted(s))
    classes: dict[tuple, set[int]] = defaultdict(set)
    for s in range(n_states):
        classes[tuple(s in x for x in fam)].add(s)
    return Partition.from_blocks(classes.values())


def _block_subsets(n: int) -> Iterable[BlockSet]:
    for r in range(n + 1):
        for combo in combinations(range(n), r):
            yield frozenset(combo)


def bca_correspondence_check(
    ts: TransitionSystem, partition: Partition, sample: Iterable[BlockSet] | None = None
) -> bool:
    """``alpha . pre . gamma == pre_ee`` and dually for post, on block sets.

    Exhaustive up to ``EXHAUSTIVE_BLOCK_LIMIT`` blocks; otherwise all
    singletons plus ``sample``.
    """
    ats = build_ats(ts, partition)
    n = len(partition)
    if n <= EXHAUSTIVE_BLOCK_LIMIT and sample is None:
        subsets: Iterable[BlockSet] = _block_subsets(n)
    else:
        subsets = [frozenset({i}) for i in range(n)] + [frozenset(s) for s in (sample or ())]
    for bs in subsets:
        conc = partition.gamma(bs)
        if partition.alpha(ts.pre(conc)) != ats.pre_ee(bs):
            return False
        if partition.alpha(ts.post(conc)) != ats.post_ee(bs):
            return False
    return True


# --- fixtures -------------------------------------------------------------

def figure1_system() -> tuple[TransitionSystem, Partition]:
    """Nine states, partition {[1],[2,3],[4,5],[6],[7],[8,9]}."""
    ts = TransitionSystem.numbered(
        9, [(1, 2), (1, 4), (2, 6), (3, 7), (4, 6), (5, 7), (6, 8), (7, 9)]
    )
    blocks = [[1], [2, 3], [4, 5], [6], [7], [8, 9]]
    return ts, Partition.from_blocks([[s - 1 for s in b] for b in blocks])


def figure2_system() -> tuple[TransitionSystem, Partition]:
    """Seven states, partition {[1],[2],[3,4,5],[6],[7]}; init {1,2}, error {6}."""
    ts = TransitionSystem.numbered(
        7, [(1, 5), (2, 4), (2, 5), (3, 6), (4, 7), (5, 7)], init=[1, 2], error=[6]
    )
    blocks = [[1], [2], [3, 4, 5], [6], [7]]
    return ts, Partition.from_blocks([[s - 1 for s in b] for b in blocks])


def parse_blocks(ts: TransitionSystem, text: str) -> Partition:
    """Read ``{[1],[2,3],...}`` in label notation."""
    body = text.strip().strip("{}").strip()
    blocks = []
    for chunk in body.split("]"):
        chunk = chunk.strip().lstrip(",").strip()
        if not chunk:
            continue
        blocks.append(ts.ids(*[x.strip() for x in chunk.lstrip("[").split(",")]))
    return Partition.from_blocks(blocks)
