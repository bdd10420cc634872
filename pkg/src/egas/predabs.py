"""Predicate abstraction over a bounded integer state space.

Variables range over ``Z mod N``.  Statements are total, possibly
nondeterministic transformers on states; best approximations are obtained
by enumerating concrete states, which is cheap for the small spaces used
here (``N**k`` states).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Callable, Iterable, Sequence

from .absdom import AbstractDomain, MonotoneFn, bca_witness, identity_domain
from .kernel import KernelVerificationError, correctness_kernel
from .lattice import PowersetLattice

State = tuple[int, ...]
BoolVec = tuple[int, ...]
BoolAbsElem = frozenset[BoolVec]

MAX_PREDICATES = 4


@dataclass(frozen=True)
class ConcreteProgramSpace:
    variables: tuple[str, ...]
    modulus: int = 4

    def __post_init__(self):
        if self.modulus < 3:
            raise ValueError("modulus must be at least 3")

    @cached_property
    def states(self) -> tuple[State, ...]:
        return tuple(product(range(self.modulus), repeat=len(self.variables)))

    def var(self, name: str) -> int:
        return self.variables.index(name)


@dataclass(frozen=True)
class Statement:
    name: str
    transformer: Callable[[State], Iterable[State]]

    def post(self, states: Iterable[State]) -> frozenset[State]:
        return frozenset(t for s in states for t in self.transformer(s))

    def then(self, other: "Statement") -> "Statement":
        return Statement(
            f"{self.name}; {other.name}",
            lambda s: {u for t in self.transformer(s) for u in other.transformer(t)},
        )

    def or_skip(self) -> "Statement":
        """Nondeterministic branch with the guard dropped: run or skip."""
        return Statement(f"[{self.name}]", lambda s: {s, *self.transformer(s)})


SKIP = Statement("skip", lambda s: {s})


def assign(space: ConcreteProgramSpace, var: str, expr: Callable[[State], int]) -> Statement:
    i = space.var(var)
    n = space.modulus

    def run(s: State):
        t = list(s)
        t[i] = expr(s) % n
        return {tuple(t)}

    return Statement(f"{var} := ...", run)


@dataclass(frozen=True)
class Predicate:
    name: str
    holds: Callable[[State], bool]


@dataclass(frozen=True)
class PredicateSet:
    predicates: tuple[Predicate, ...]

    def __len__(self) -> int:
        return len(self.predicates)

    def vector(self, s: State) -> BoolVec:
        return tuple(int(bool(p.holds(s))) for p in self.predicates)

    def vectors(self) -> list[BoolVec]:
        """All valuations in lexicographic order."""
        return list(product((0, 1), repeat=len(self.predicates)))


# --- Boolean abstraction ---------------------------------------------------

def alpha_b(preds: PredicateSet, states: Iterable[State]) -> BoolAbsElem:
    return frozenset(preds.vector(s) for s in states)


def gamma_b(preds: PredicateSet, space: ConcreteProgramSpace, vecs: Iterable[BoolVec]) -> frozenset[State]:
    vecs = frozenset(vecs)
    return frozenset(s for s in space.states if preds.vector(s) in vecs)


def bca_post_b(
    preds: PredicateSet, space: ConcreteProgramSpace, stmt: Statement
) -> dict[BoolVec, BoolAbsElem]:
    """Per-valuation table of ``alpha . post . gamma``; extend to sets by union."""
    return {
        v: alpha_b(preds, stmt.post(gamma_b(preds, space, {v}))) for v in preds.vectors()
    }


def apply_table(table: dict[BoolVec, BoolAbsElem], vecs: Iterable[BoolVec]) -> BoolAbsElem:
    return frozenset().union(*(table[v] for v in vecs))


def boolean_lattice(preds: PredicateSet) -> PowersetLattice:
    if len(preds) > MAX_PREDICATES:
        raise ValueError(f"at most {MAX_PREDICATES} predicates")
    return PowersetLattice([render_vec(v) for v in preds.vectors()])


def render_vec(v: BoolVec) -> str:
    return "<" + ",".join(map(str, v)) + ">"


def render_set(vecs: Iterable[BoolVec]) -> str:
    return "{" + ",".join(render_vec(v) for v in sorted(vecs)) + "}"


def to_mask(lat: PowersetLattice, vecs: Iterable[BoolVec]) -> int:
    return lat.subset(render_vec(v) for v in vecs)


def from_mask(preds: PredicateSet, mask: int) -> BoolAbsElem:
    vs = preds.vectors()
    return frozenset(vs[i] for i in range(len(vs)) if mask >> i & 1)


def post_b_fn(preds: PredicateSet, space: ConcreteProgramSpace, stmt: Statement, lat: PowersetLattice) -> MonotoneFn:
    table = bca_post_b(preds, space, stmt)
    return MonotoneFn.additive(lat, [to_mask(lat, table[v]) for v in preds.vectors()], stmt.name)


def boolean_kernel(
    preds: PredicateSet,
    space: ConcreteProgramSpace,
    stmts: Sequence[Statement],
    disjunctive: bool = True,
) -> AbstractDomain:
    """Kernel of the full Boolean abstraction for the given statements.

    The Boolean analysis joins by set union, so by default the kernel is
    taken among disjunctive domains: the meet-closed kernel is further closed
    under unions (and meets again, until stable).  ``disjunctive=False``
    returns the plain kernel.
    """
    lat = boolean_lattice(preds)
    full = identity_domain(lat, "B")
    fns = [post_b_fn(preds, space, s, lat) for s in stmts]
    kernel = correctness_kernel(full, fns).kernel
    if not disjunctive:
        return kernel
    image = set(kernel.image)
    while True:
        grown = lat.meet_closure(lat.join_closure(image))
        if grown == image:
            break
        image = grown
    dom = AbstractDomain(lat, frozenset(image), "K(B)")
    for fn in fns:
        if bca_witness(dom, full, fn) is not None:
            raise KernelVerificationError(f"disjunctive closure changes {fn.name}")
    return dom


# --- Cartesian abstraction -------------------------------------------------

STAR = "*"
CartesianElem = "tuple[int | str, ...] | None"  # None is the bottom element


def cart_leq(a, b) -> bool:
    if a is None:
        return True
    if b is None:
        return False
    return all(x == y or y == STAR for x, y in zip(a, b))


def cart_join(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return tuple(x if x == y else STAR for x, y in zip(a, b))


def cart_meet(a, b):
    if a is None or b is None:
        return None
    out = []
    for x, y in zip(a, b):
        if x == STAR:
            out.append(y)
        elif y == STAR or x == y:
            out.append(x)
        else:
            return None
    return tuple(out)


def gamma_c(preds: PredicateSet, space: ConcreteProgramSpace, e) -> frozenset[State]:
    if e is None:
        return frozenset()
    return frozenset(s for s in space.states if cart_leq(preds.vector(s), e))


def alpha_c(preds: PredicateSet, states: Iterable[State]):
    out = None
    for s in states:
        out = cart_join(out, preds.vector(s))
    return out


def cart_top(preds: PredicateSet):
    return (STAR,) * len(preds)


def bca_post_c(preds: PredicateSet, space: ConcreteProgramSpace, stmt: Statement):
    return lambda e: alpha_c(preds, stmt.post(gamma_c(preds, space, e)))


def render_cart(e) -> str:
    return "bot" if e is None else render_vec(e)


# --- fixpoints -------------------------------------------------------------

def kleene_lfp(step: Callable, seed, join: Callable, max_iter: int = 10_000):
    """Iterate ``x := x join step(x)`` from ``seed`` until it stabilises.

    Returns the limit and the chain of iterates.
    """
    chain = [seed]
    x = seed
    for _ in range(max_iter):
        nxt = join(x, step(x))
        if nxt == x:
            return x, chain
        chain.append(nxt)
        x = nxt
    raise RuntimeError("no fixpoint within iteration cap")


# --- the foo() case study ---------------------------------------------------

class Abstraction(str, enum.Enum):
    BOOLEAN = "boolean"
    KERNEL = "kernel"
    CARTESIAN = "cartesian"


class FooVerdict(str, enum.Enum):
    UNREACHABLE = "UNREACHABLE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class FooFixture:
    space: ConcreteProgramSpace
    preds: PredicateSet
    s1: Statement
    s2: Statement


def foo_fixture(modulus: int = 4) -> FooFixture:
    """``do { z := 0; x := y; if (w) { x++; z := 1; } } while (x != y); if (z) assert(0);``

    Predicates ``z = 0`` and ``x = y``.
    """
    space = ConcreteProgramSpace(("x", "y", "z", "w"), modulus)
    x, y, z = space.var("x"), space.var("y"), space.var("z")
    preds = PredicateSet((
        Predicate("z=0", lambda s: s[z] == 0),
        Predicate("x=y", lambda s: s[x] == s[y]),
    ))
    s1 = assign(space, "z", lambda s: 0).then(assign(space, "x", lambda s: s[y]))
    s1 = Statement("S1", s1.transformer)
    s2 = assign(space, "x", lambda s: s[x] + 1).then(assign(space, "z", lambda s: 1))
    s2 = Statement("S2", s2.transformer)
    return FooFixture(space, preds, s1, s2)


@dataclass(frozen=True)
class FooResult:
    abstraction: Abstraction
    chain: tuple[str, ...]
    loop_exit: str
    after_guard: str
    verdict: FooVerdict


def foo_verification(
    abstraction: Abstraction | str, modulus: int = 4, disjunctive: bool = True
) -> FooResult:
    """Analyse the loop of ``foo`` from an arbitrary entry state.

    The loop head collects the entry and the back edge; the body is ``S1``
    followed by ``S2`` or nothing (guard ignored).  The exit value is
    intersected with ``x = y`` and the assert is unreachable when every
    remaining state satisfies ``z = 0``.  ``disjunctive`` selects the
    kernel variant (see :func:`boolean_kernel`).
    """
    abstraction = Abstraction(abstraction)
    fx = foo_fixture(modulus)
    preds, space = fx.preds, fx.space
    p1, p2 = 0, 1

    if abstraction is Abstraction.CARTESIAN:
        s1 = bca_post_c(preds, space, fx.s1)
        s2 = bca_post_c(preds, space, fx.s2)
        top = cart_top(preds)

        def body(e):
            mid = s1(cart_join(top, e))
            return cart_join(mid, s2(mid))

        lfp, chain = kleene_lfp(body, None, cart_join)
        guard = tuple(1 if i == p2 else STAR for i in range(len(preds)))
        exit_ = cart_meet(lfp, guard)
        safe = exit_ is None or exit_[p1] == 1
        return FooResult(
            abstraction, tuple(render_cart(e) for e in chain), render_cart(lfp),
            render_cart(exit_), FooVerdict.UNREACHABLE if safe else FooVerdict.INCONCLUSIVE,
        )

    lat = boolean_lattice(preds)
    f1 = post_b_fn(preds, space, fx.s1, lat)
    f2 = post_b_fn(preds, space, fx.s2, lat)
    if abstraction is Abstraction.BOOLEAN:
        dom = identity_domain(lat, "B")
    else:
        dom = boolean_kernel(preds, space, [fx.s1, fx.s2], disjunctive)
    mu = dom.apply

    def join(a: int, b: int) -> int:
        return mu(a | b)

    def body(x: int) -> int:
        mid = mu(f1(mu(join(lat.top, x))))
        return join(mid, mu(f2(mid)))

    lfp, chain = kleene_lfp(body, mu(lat.bottom), join)
    guard = to_mask(lat, [v for v in preds.vectors() if v[p2] == 1])
    exit_ = mu(lfp & guard)
    safe = all(v[p1] == 1 for v in from_mask(preds, exit_))
    return FooResult(
        abstraction, tuple(render_set(from_mask(preds, m)) for m in chain),
        render_set(from_mask(preds, lfp)), render_set(from_mask(preds, exit_)),
        FooVerdict.UNREACHABLE if safe else FooVerdict.INCONCLUSIVE,
    )
