"""Seeded random instances for property checks."""

from __future__ import annotations

import random
from itertools import combinations

from .absdom import AbstractDomain, MonotoneFn, from_image
from .ats import AbstractTransitionSystem, Partition, TransitionSystem
from .lattice import Lattice


def random_lattice(rng: random.Random, max_size: int = 10, universe: int = 4) -> Lattice:
    """A random finite lattice, realised as an intersection-closed set family.

    Every finite lattice arises this way, ordered by inclusion.
    """
    full = (1 << universe) - 1
    while True:
        family = {full}
        for _ in range(rng.randint(0, max_size)):
            family.add(rng.randrange(full + 1))
        changed = True
        while changed:
            changed = False
            for a, b in combinations(list(family), 2):
                if a & b not in family:
                    family.add(a & b)
                    changed = True
        if len(family) <= max_size:
            break
    members = sorted(family, key=lambda m: (bin(m).count("1"), m))
    names = ["{" + "".join(str(i) for i in range(universe) if m >> i & 1) + "}" for m in members]
    return Lattice.from_leq(
        names, lambda i, j: members[i] & ~members[j] == 0, check=True
    )


def random_monotone(rng: random.Random, lat: Lattice, name: str = "f") -> MonotoneFn:
    """Monotone hull of a random map: ``x -> lub{g(y) | y <= x}``."""
    g = [rng.randrange(lat.size) for _ in lat.elements()]
    return MonotoneFn.from_callable(
        lat, lambda x: lat.lub(g[y] for y in lat.downset(x)), name
    )


def random_domain(rng: random.Random, lat: Lattice, max_image: int = 8, name: str = "A") -> AbstractDomain:
    while True:
        k = rng.randint(0, lat.size)
        dom = from_image(lat, rng.sample(range(lat.size), k), name)
        if len(dom) <= max_image:
            return dom


def random_system(
    rng: random.Random,
    max_states: int = 10,
    max_blocks: int = 5,
    density: float | None = None,
    with_init_error: bool = False,
) -> tuple[TransitionSystem, Partition]:
    n = rng.randint(2, max_states)
    p = density if density is not None else rng.uniform(0.08, 0.35)
    edges = frozenset((a, b) for a in range(n) for b in range(n) if rng.random() < p)
    k = rng.randint(1, min(max_blocks, n))
    owner = list(range(k)) + [rng.randrange(k) for _ in range(n - k)]
    rng.shuffle(owner)
    blocks = [[s for s in range(n) if owner[s] == i] for i in range(k)]
    init = error = frozenset()
    if with_init_error:
        init = frozenset(rng.sample(range(n), rng.randint(1, max(1, n // 3))))
        error = frozenset(rng.sample(range(n), rng.randint(1, max(1, n // 3))))
    ts = TransitionSystem(n, edges, init, error)
    return ts, Partition.from_blocks(blocks)


def random_walk(rng: random.Random, ats: AbstractTransitionSystem, max_len: int = 8) -> tuple[int, ...]:
    """An abstract path of length 1..max_len, stopping early at dead ends."""
    path = [rng.randrange(len(ats.partition))]
    for _ in range(rng.randint(0, max_len - 1)):
        succ = sorted(ats.successors(path[-1]))
        if not succ:
            break
        path.append(rng.choice(succ))
    return tuple(path)
