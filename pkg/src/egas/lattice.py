"""Explicit finite lattices.

Two carriers share one interface:

* :class:`Lattice` stores an arbitrary finite order as per-element down-set
  bitmasks (bit ``j`` of ``down[i]`` is set iff ``j <= i``), so ``leq`` is a
  shift and a mask.
* :class:`PowersetLattice` is the subset lattice of a set of named atoms.
  Element ids are the subset bitmasks themselves and are never materialized.

In both cases elements are dense integer ids ``0 .. size - 1``.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Iterable, Iterator, Sequence


class LatticeError(ValueError):
    """Raised when an order fails the complete-lattice axioms."""


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class FiniteLattice:
    """Operations shared by every finite carrier.

    Subclasses provide ``size``, ``leq``, ``meet``, ``join``, ``top``,
    ``bottom`` and ``name``; everything here is derived from those.
    """

    size: int

    def __len__(self) -> int:
        return self.size

    def elements(self) -> range:
        return range(self.size)

    def leq(self, a: int, b: int) -> bool:
        raise NotImplementedError

    def meet(self, a: int, b: int) -> int:
        raise NotImplementedError

    def join(self, a: int, b: int) -> int:
        raise NotImplementedError

    @property
    def top(self) -> int:
        raise NotImplementedError

    @property
    def bottom(self) -> int:
        raise NotImplementedError

    def name(self, a: int) -> str:
        raise NotImplementedError

    def names_of(self, xs: Iterable[int]) -> list[str]:
        return [self.name(x) for x in sorted(xs)]

    def lt(self, a: int, b: int) -> bool:
        return a != b and self.leq(a, b)

    def glb(self, xs: Iterable[int]) -> int:
        """Greatest lower bound; the empty meet is top."""
        result = self.top
        for x in xs:
            result = self.meet(result, x)
        return result

    def lub(self, xs: Iterable[int]) -> int:
        """Least upper bound; the empty join is bottom."""
        result = self.bottom
        for x in xs:
            result = self.join(result, x)
        return result

    def maximal(self, xs: Iterable[int]) -> frozenset[int]:
        s = set(xs)
        return frozenset(x for x in s if not any(self.lt(x, y) for y in s))

    def minimal(self, xs: Iterable[int]) -> frozenset[int]:
        s = set(xs)
        return frozenset(x for x in s if not any(self.lt(y, x) for y in s))

    def downset(self, y: int) -> frozenset[int]:
        return frozenset(x for x in self.elements() if self.leq(x, y))

    def upset(self, y: int) -> frozenset[int]:
        return frozenset(x for x in self.elements() if self.leq(y, x))

    def _closure(self, xs: Iterable[int], op: Callable[[int, int], int], unit: int) -> frozenset[int]:
        closed = {unit}
        pending = list(dict.fromkeys(xs))
        while pending:
            x = pending.pop()
            if x in closed:
                continue
            new = [op(x, y) for y in closed]
            closed.add(x)
            pending.extend(z for z in new if z not in closed)
        return frozenset(closed)

    def meet_closure(self, xs: Iterable[int]) -> frozenset[int]:
        """Smallest superset of ``xs`` closed under glb of arbitrary subsets.

        Always contains top (the meet of the empty family).
        """
        return self._closure(xs, self.meet, self.top)

    def join_closure(self, xs: Iterable[int]) -> frozenset[int]:
        """Dual of :meth:`meet_closure`; always contains bottom."""
        return self._closure(xs, self.join, self.bottom)

    def is_meet_closed(self, xs: Iterable[int]) -> bool:
        s = frozenset(xs)
        return self.meet_closure(s) == s

    def covers(self) -> list[tuple[int, int]]:
        """Hasse-diagram edges ``(lower, upper)`` sorted by ids."""
        out = []
        for a in self.elements():
            for b in self.elements():
                if self.lt(a, b) and not any(
                    self.lt(a, c) and self.lt(c, b) for c in self.elements()
                ):
                    out.append((a, b))
        return out

    def validate(self) -> list[str]:
        return []


class Lattice(FiniteLattice):
    """A finite lattice given by an explicit partial order.

    The constructor takes the down-set masks directly and does not check
    the lattice axioms; call :meth:`validate` (or use a ``check=True``
    factory) for that.  Instances are immutable.
    """

    def __init__(self, names: Sequence[str], down: Sequence[int]):
        if len(names) != len(down):
            raise ValueError("names and down-sets differ in length")
        if len(set(names)) != len(names):
            raise ValueError("duplicate element names")
        self._names = tuple(names)
        self._down = tuple(down)
        n = len(names)
        up = [0] * n
        for i, d in enumerate(self._down):
            for j in _bits(d):
                up[j] |= 1 << i
        self._up = tuple(up)
        self._index = {name: i for i, name in enumerate(self._names)}
        self.size = n
        self._top = self._extreme(self._down)
        self._bottom = self._extreme(self._up)

    def _extreme(self, masks: Sequence[int]) -> int | None:
        full = (1 << self.size) - 1
        for i, m in enumerate(masks):
            if m == full:
                return i
        return None

    @classmethod
    def from_covers(
        cls,
        names: Sequence[str],
        covers: Iterable[tuple[int, int]],
        check: bool = True,
    ) -> "Lattice":
        """Build the reflexive-transitive closure of ``covers`` (pairs ``lower, upper``)."""
        n = len(names)
        down = [1 << i for i in range(n)]
        for lo, hi in covers:
            if not (0 <= lo < n and 0 <= hi < n):
                raise LatticeError(f"cover ({lo}, {hi}) out of range")
            down[hi] |= 1 << lo
        # Warshall on bit rows
        for k in range(n):
            bit = 1 << k
            dk = down[k]
            for i in range(n):
                if down[i] & bit:
                    down[i] |= dk
        lat = cls(names, down)
        if check:
            lat.check()
        return lat

    @classmethod
    def from_leq(
        cls,
        names: Sequence[str],
        leq: Callable[[int, int], bool],
        check: bool = True,
    ) -> "Lattice":
        n = len(names)
        down = [sum(1 << j for j in range(n) if leq(j, i)) for i in range(n)]
        lat = cls(names, down)
        if check:
            lat.check()
        return lat

    @classmethod
    def chain(cls, n: int) -> "Lattice":
        return cls.from_covers([str(i) for i in range(n)], [(i, i + 1) for i in range(n - 1)])

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown element {name!r}") from None

    def ids(self, *names: str) -> frozenset[int]:
        return frozenset(self.index(n) for n in names)

    def name(self, a: int) -> str:
        return self._names[a]

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    @property
    def down_masks(self) -> tuple[int, ...]:
        return self._down

    def leq(self, a: int, b: int) -> bool:
        return bool((self._down[b] >> a) & 1)

    @property
    def top(self) -> int:
        if self._top is None:
            raise LatticeError("lattice has no top element")
        return self._top

    @property
    def bottom(self) -> int:
        if self._bottom is None:
            raise LatticeError("lattice has no bottom element")
        return self._bottom

    def _greatest(self, mask: int, masks: Sequence[int]) -> int | None:
        for g in _bits(mask):
            if masks[g] == mask:
                return g
        return None

    def meet(self, a: int, b: int) -> int:
        common = self._down[a] & self._down[b]
        g = self._greatest(common, self._down)
        if g is None:
            raise LatticeError(f"no glb for {self.name(a)}, {self.name(b)}")
        return g

    def join(self, a: int, b: int) -> int:
        common = self._up[a] & self._up[b]
        g = self._greatest(common, self._up)
        if g is None:
            raise LatticeError(f"no lub for {self.name(a)}, {self.name(b)}")
        return g

    def downset(self, y: int) -> frozenset[int]:
        return frozenset(_bits(self._down[y]))

    def upset(self, y: int) -> frozenset[int]:
        return frozenset(_bits(self._up[y]))

    def validate(self) -> list[str]:
        """Return diagnostics for every broken axiom; empty means valid.

        The closure built by the factories is reflexive and transitive by
        construction, so only antisymmetry, existence of top/bottom and the
        pairwise bounds can fail.
        """
        problems = []
        n = self.size
        for i in range(n):
            if not (self._down[i] >> i) & 1:
                problems.append(f"order not reflexive at {self.name(i)}")
            for j in _bits(self._down[i]):
                if self._down[j] & ~self._down[i]:
                    problems.append(f"order not transitive at {self.name(j)} <= {self.name(i)}")
                    break
        for i, j in combinations(range(n), 2):
            if self.leq(i, j) and self.leq(j, i):
                problems.append(f"antisymmetry violated: {self.name(i)} and {self.name(j)}")
        if n == 0:
            problems.append("empty lattice")
            return problems
        if self._top is None:
            problems.append("no top element")
        if self._bottom is None:
            problems.append("no bottom element")
        for i, j in combinations(range(n), 2):
            if self._greatest(self._down[i] & self._down[j], self._down) is None:
                problems.append(f"pair {self.name(i)}, {self.name(j)} has no unique glb")
            if self._greatest(self._up[i] & self._up[j], self._up) is None:
                problems.append(f"pair {self.name(i)}, {self.name(j)} has no unique lub")
        return problems

    def check(self) -> None:
        problems = self.validate()
        if problems:
            raise LatticeError(problems[0])

    def __repr__(self) -> str:
        return f"Lattice({list(self._names)!r})"


class PowersetLattice(FiniteLattice):
    """Subsets of ``atoms`` ordered by inclusion; element id = bitmask."""

    def __init__(self, atoms: Sequence[str]):
        if len(set(atoms)) != len(atoms):
            raise ValueError("duplicate atom names")
        self.atoms = tuple(atoms)
        self.size = 1 << len(self.atoms)
        self._full = self.size - 1

    @property
    def top(self) -> int:
        return self._full

    @property
    def bottom(self) -> int:
        return 0

    def leq(self, a: int, b: int) -> bool:
        return a & ~b == 0

    def meet(self, a: int, b: int) -> int:
        return a & b

    def join(self, a: int, b: int) -> int:
        return a | b

    def glb(self, xs: Iterable[int]) -> int:
        result = self._full
        for x in xs:
            result &= x
        return result

    def lub(self, xs: Iterable[int]) -> int:
        result = 0
        for x in xs:
            result |= x
        return result

    def atom(self, name: str) -> int:
        return 1 << self.atoms.index(name)

    def subset(self, names: Iterable[str]) -> int:
        return self.lub(self.atom(n) for n in names)

    def members(self, a: int) -> list[str]:
        return [self.atoms[i] for i in _bits(a)]

    def singletons(self) -> list[int]:
        return [1 << i for i in range(len(self.atoms))]

    def name(self, a: int) -> str:
        return "{" + ",".join(self.members(a)) + "}"

    def downset(self, y: int) -> frozenset[int]:
        out = []
        sub = y
        while True:
            out.append(sub)
            if sub == 0:
                break
            sub = (sub - 1) & y
        return frozenset(out)

    def upset(self, y: int) -> frozenset[int]:
        comp = self._full & ~y
        return frozenset(y | s for s in self.downset(comp))

    def covers(self) -> list[tuple[int, int]]:
        return sorted(
            (a, a | (1 << i))
            for a in self.elements()
            for i in range(len(self.atoms))
            if not a >> i & 1
        )

    def materialize(self) -> Lattice:
        """Explicit copy, for small atom counts only."""
        if len(self.atoms) > 12:
            raise ValueError("powerset too large to materialize")
        return Lattice.from_leq([self.name(a) for a in self.elements()], self.leq, check=False)

    def __repr__(self) -> str:
        return f"PowersetLattice({list(self.atoms)!r})"
