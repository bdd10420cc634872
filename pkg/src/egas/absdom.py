"""Abstract domains as upper closure operators on a finite lattice.

A domain is identified with the image of its closure, a meet-closed subset
of the carrier that contains top.  Abstraction is the closure itself and
concretization is the inclusion of the image, so ``alpha`` and ``apply``
coincide on element ids.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

from .lattice import FiniteLattice, Lattice, PowersetLattice

# carriers up to this size are compared exhaustively
EXHAUSTIVE_LIMIT = 1 << 12


@dataclass(frozen=True, eq=False)
class MonotoneFn:
    """A total monotone map on a carrier, stored as a lookup table."""

    carrier: FiniteLattice
    table: tuple[int, ...]
    name: str = "f"

    def __post_init__(self):
        if len(self.table) != self.carrier.size:
            raise ValueError(f"{self.name}: table is not total on the carrier")
        for v in self.table:
            if not 0 <= v < self.carrier.size:
                raise ValueError(f"{self.name}: value {v} outside the carrier")

    @classmethod
    def from_callable(
        cls, carrier: FiniteLattice, fn: Callable[[int], int], name: str = "f", check: bool = True
    ) -> "MonotoneFn":
        f = cls(carrier, tuple(fn(x) for x in carrier.elements()), name)
        if check:
            f.check_monotone()
        return f

    @classmethod
    def from_mapping(
        cls, carrier: FiniteLattice, mapping: Mapping[int, int], name: str = "f", check: bool = True
    ) -> "MonotoneFn":
        missing = [x for x in carrier.elements() if x not in mapping]
        if missing:
            raise ValueError(f"{name}: undefined on {carrier.name(missing[0])}")
        return cls.from_callable(carrier, mapping.__getitem__, name, check)

    @classmethod
    def additive(
        cls, carrier: PowersetLattice, atom_image: Sequence[int], name: str = "f"
    ) -> "MonotoneFn":
        """Extend a map on atoms to all subsets by union.

        Additive maps are monotone, so no check is run.
        """
        n = len(carrier.atoms)
        if len(atom_image) != n:
            raise ValueError(f"{name}: need one image per atom")
        table = [0] * carrier.size
        for mask in range(1, carrier.size):
            low = mask & -mask
            table[mask] = table[mask ^ low] | atom_image[low.bit_length() - 1]
        return cls(carrier, tuple(table), name)

    @classmethod
    def identity(cls, carrier: FiniteLattice) -> "MonotoneFn":
        return cls(carrier, tuple(carrier.elements()), "id")

    def __call__(self, x: int) -> int:
        return self.table[x]

    def monotonicity_violation(self) -> tuple[int, int] | None:
        c = self.carrier
        if isinstance(c, PowersetLattice):
            pairs = ((a, b) for a, b in c.covers())
        else:
            pairs = ((a, b) for a in c.elements() for b in c.upset(a))
        for a, b in pairs:
            if not c.leq(self.table[a], self.table[b]):
                return a, b
        return None

    def check_monotone(self) -> None:
        bad = self.monotonicity_violation()
        if bad is not None:
            a, b = bad
            c = self.carrier
            raise ValueError(
                f"{self.name} is not monotone: {c.name(a)} <= {c.name(b)} but "
                f"{c.name(self.table[a])} is not <= {c.name(self.table[b])}"
            )

    def __eq__(self, other):
        if not isinstance(other, MonotoneFn):
            return NotImplemented
        return self.carrier is other.carrier and self.table == other.table

    def __hash__(self):
        return hash((id(self.carrier), self.table))


@dataclass(frozen=True, eq=False)
class AbstractDomain:
    """The image of an upper closure operator on ``carrier``."""

    carrier: FiniteLattice
    image: frozenset[int]
    name: str = field(default="A", compare=False)

    def __post_init__(self):
        image = frozenset(self.image)
        object.__setattr__(self, "image", image)
        if not self.carrier.is_meet_closed(image):
            raise ValueError(f"domain {self.name} is not meet-closed")

    @cached_property
    def _table(self) -> tuple[int, ...] | None:
        if self.carrier.size > EXHAUSTIVE_LIMIT:
            return None
        return tuple(self._apply(c) for c in self.carrier.elements())

    def _apply(self, c: int) -> int:
        leq = self.carrier.leq
        return self.carrier.glb(y for y in self.image if leq(c, y))

    def apply(self, c: int) -> int:
        """Least image element above ``c``."""
        table = self._table
        return table[c] if table is not None else self._apply(c)

    __call__ = apply
    alpha = apply

    def gamma(self, a: int) -> int:
        if a not in self.image:
            raise ValueError(f"{self.carrier.name(a)} is not in domain {self.name}")
        return a

    def __contains__(self, a: int) -> bool:
        return a in self.image

    def __iter__(self):
        return iter(sorted(self.image))

    def __len__(self) -> int:
        return len(self.image)

    def __eq__(self, other):
        if not isinstance(other, AbstractDomain):
            return NotImplemented
        return self.carrier is other.carrier and self.image == other.image

    def __hash__(self):
        return hash((id(self.carrier), self.image))

    def names(self) -> list[str]:
        return self.carrier.names_of(self.image)

    def __repr__(self) -> str:
        return f"AbstractDomain({self.name}: {{{', '.join(self.names())}}})"


def from_image(carrier: FiniteLattice, xs: Iterable[int], name: str = "A") -> AbstractDomain:
    """The domain whose image is the meet-closure of ``xs`` (top included)."""
    return AbstractDomain(carrier, carrier.meet_closure(xs), name)


def identity_domain(carrier: FiniteLattice, name: str = "id") -> AbstractDomain:
    if carrier.size > EXHAUSTIVE_LIMIT:
        raise ValueError("carrier too large for the identity domain")
    return AbstractDomain(carrier, frozenset(carrier.elements()), name)


@dataclass(frozen=True)
class BcaTable:
    """Best correct approximation of ``fn`` restricted to a domain's image."""

    domain: AbstractDomain
    fn: MonotoneFn
    entries: Mapping[int, int]

    def __getitem__(self, a: int) -> int:
        return self.entries[a]

    def image(self) -> frozenset[int]:
        return frozenset(self.entries.values())

    def named(self) -> dict[str, str]:
        c = self.domain.carrier
        return {c.name(a): c.name(b) for a, b in sorted(self.entries.items())}


def bca(domain: AbstractDomain, fn: MonotoneFn) -> BcaTable:
    _same_carrier(domain, fn)
    return BcaTable(domain, fn, {a: domain.apply(fn(a)) for a in sorted(domain.image)})


def bca_extended(domain: AbstractDomain, fn: MonotoneFn) -> MonotoneFn:
    """``mu . f . mu`` on every carrier element."""
    _same_carrier(domain, fn)
    mu = domain.apply
    return MonotoneFn(
        domain.carrier,
        tuple(mu(fn(mu(c))) for c in domain.carrier.elements()),
        f"{fn.name}^{domain.name}",
    )


def _same_carrier(domain: AbstractDomain, fn: MonotoneFn) -> None:
    if domain.carrier is not fn.carrier:
        raise ValueError(f"{fn.name} and domain {domain.name} live on different carriers")


def default_sample(carrier: FiniteLattice, extra: Iterable[int] = (), count: int = 256, seed: int = 0) -> list[int]:
    """Points used when a carrier is too large to compare exhaustively.

    Atoms (for powersets), ``extra`` points, bottom/top and ``count``
    seeded random elements.
    """
    pts = {carrier.bottom, carrier.top, *extra}
    if isinstance(carrier, PowersetLattice):
        pts.update(carrier.singletons())
    rng = random.Random(seed)
    pts.update(rng.randrange(carrier.size) for _ in range(count))
    return sorted(pts)


def is_exhaustive(carrier: FiniteLattice) -> bool:
    return carrier.size <= EXHAUSTIVE_LIMIT


def bca_witness(
    a: AbstractDomain, b: AbstractDomain, fn: MonotoneFn, sample: Iterable[int] | None = None
) -> int | None:
    """Least checked element where the two best approximations differ."""
    if a.carrier is not b.carrier:
        raise ValueError("domains live on different carriers")
    _same_carrier(a, fn)
    if sample is None:
        if is_exhaustive(a.carrier):
            points: Iterable[int] = a.carrier.elements()
        else:
            points = default_sample(a.carrier, a.image | b.image)
    else:
        points = sorted(set(sample) | a.image | b.image)
    for c in points:
        if a.apply(fn(a.apply(c))) != b.apply(fn(b.apply(c))):
            return c
    return None


def bca_equal(
    a: AbstractDomain, b: AbstractDomain, fn: MonotoneFn, sample: Iterable[int] | None = None
) -> bool:
    """Whether ``a`` and ``b`` induce the same best approximation of ``fn``.

    Exhaustive on carriers of at most ``EXHAUSTIVE_LIMIT`` elements;
    otherwise checks ``sample`` (or :func:`default_sample`) plus both images.
    """
    return bca_witness(a, b, fn, sample) is None


def precision_leq(a: AbstractDomain, b: AbstractDomain) -> bool:
    """``a`` is at least as precise as ``b`` (``b`` is a simplification of ``a``)."""
    return b.image <= a.image


def abs_lub(domains: Sequence[AbstractDomain]) -> AbstractDomain:
    """Most concrete common simplification: intersection of images."""
    carrier = _common_carrier(domains)
    image = frozenset.intersection(*(d.image for d in domains)) if domains else frozenset({carrier.top})
    return AbstractDomain(carrier, image, "lub")


def abs_glb(domains: Sequence[AbstractDomain]) -> AbstractDomain:
    """Most abstract common refinement: meet-closure of the union of images."""
    carrier = _common_carrier(domains)
    return from_image(carrier, frozenset().union(*(d.image for d in domains)), "glb")


def _common_carrier(domains: Sequence[AbstractDomain]) -> FiniteLattice:
    if not domains:
        raise ValueError("need at least one domain")
    carrier = domains[0].carrier
    if any(d.carrier is not carrier for d in domains):
        raise ValueError("domains live on different carriers")
    return carrier


# --- fixtures -------------------------------------------------------------

SIGN_NAMES = ("empty", "Z<0", "0", "Z>0", "Z<=0", "Z!=0", "Z>=0", "Z")


def sign_lattice() -> Lattice:
    """The eight-element sign lattice of sets of integers."""
    n = {name: i for i, name in enumerate(SIGN_NAMES)}
    covers = [
        ("empty", "Z<0"), ("empty", "0"), ("empty", "Z>0"),
        ("Z<0", "Z<=0"), ("Z<0", "Z!=0"), ("0", "Z<=0"), ("0", "Z>=0"),
        ("Z>0", "Z!=0"), ("Z>0", "Z>=0"),
        ("Z<=0", "Z"), ("Z!=0", "Z"), ("Z>=0", "Z"),
    ]
    return Lattice.from_covers(SIGN_NAMES, [(n[a], n[b]) for a, b in covers])


# which signs each element admits: (negative, zero, positive)
_SIGN_PARTS = {
    "empty": (0, 0, 0), "Z<0": (1, 0, 0), "0": (0, 1, 0), "Z>0": (0, 0, 1),
    "Z<=0": (1, 1, 0), "Z!=0": (1, 0, 1), "Z>=0": (0, 1, 1), "Z": (1, 1, 1),
}


def sign_square(lattice: Lattice) -> MonotoneFn:
    """Squaring, read off the sign lattice: negatives and positives go positive."""
    by_parts = {v: k for k, v in _SIGN_PARTS.items()}

    def sq(x: int) -> int:
        neg, zero, pos = _SIGN_PARTS[lattice.name(x)]
        return lattice.index(by_parts[(0, zero, int(neg or pos))])

    return MonotoneFn.from_callable(lattice, sq, "sq")


def esempio_lattice() -> Lattice:
    """Five elements: 1 < 2 < {3, 4} < 5."""
    names = ("1", "2", "3", "4", "5")
    return Lattice.from_covers(names, [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)])


def esempio_fn(lattice: Lattice) -> MonotoneFn:
    m = {"1": "1", "2": "1", "3": "5", "4": "5", "5": "5"}
    return MonotoneFn.from_callable(lattice, lambda x: lattice.index(m[lattice.name(x)]), "f")


def increment_fixture(bound: int = 8):
    """Sets of integers in ``[-bound, bound]`` with saturating increment.

    Returns ``(carrier, inc, a1, a2)`` where ``a1`` is the four-point sign
    domain ``{0, Z<=0, Z>=0, Z}`` and ``a2`` is ``{Z>=0, Z}``.
    """
    values = list(range(-bound, bound + 1))
    carrier = PowersetLattice([str(v) for v in values])
    pos = {v: i for i, v in enumerate(values)}
    inc = MonotoneFn.additive(carrier, [1 << pos[min(v + 1, bound)] for v in values], "++")
    sub = lambda pred: carrier.lub(1 << pos[v] for v in values if pred(v))  # noqa: E731
    zero, nonpos, nonneg = sub(lambda v: v == 0), sub(lambda v: v <= 0), sub(lambda v: v >= 0)
    a1 = AbstractDomain(carrier, frozenset({zero, nonpos, nonneg, carrier.top}), "A1")
    a2 = AbstractDomain(carrier, frozenset({nonneg, carrier.top}), "A2")
    return carrier, inc, a1, a2
