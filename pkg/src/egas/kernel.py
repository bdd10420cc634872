"""Correctness kernels: the most abstract simplification of a domain that
keeps the best correct approximation of every function in a family.

The constructive route (:func:`correctness_kernel`) closes, under meets, the
images of the best approximations together with the maximal elements of
each of their fibres.  :func:`kernel_oracle` enumerates candidate domains
directly and is kept independent of that construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .absdom import (
    AbstractDomain,
    MonotoneFn,
    abs_glb,
    bca,
    bca_equal,
    bca_witness,
    esempio_fn,
    esempio_lattice,
    from_image,
    is_exhaustive,
)
from .lattice import FiniteLattice

ORACLE_IMAGE_LIMIT = 16
ORACLE_CARRIER_LIMIT = 16


class KernelVerificationError(AssertionError):
    """The computed kernel failed to reproduce the original approximations."""


@dataclass(frozen=True)
class FunctionWitness:
    """Per-function ingredients of the kernel generator set."""

    image: frozenset[int]
    max_preimages: dict[int, frozenset[int]]


@dataclass(frozen=True)
class KernelResult:
    domain: AbstractDomain
    kernel: AbstractDomain
    required: frozenset[int]
    per_function: dict[str, FunctionWitness]
    verification: str  # "exhaustive" or "sampled"

    @property
    def removed(self) -> frozenset[int]:
        return self.domain.image - self.kernel.image


def _fibres(domain: AbstractDomain, fn: MonotoneFn) -> tuple[dict[int, int], frozenset[int]]:
    table = bca(domain, fn).entries
    return table, frozenset(table.values())


def function_witness(domain: AbstractDomain, fn: MonotoneFn) -> FunctionWitness:
    table, img = _fibres(domain, fn)
    lat = domain.carrier
    max_pre = {
        y: lat.maximal(x for x, fx in table.items() if fx == y) for y in sorted(img)
    }
    return FunctionWitness(img, max_pre)


def required_set_fibres(domain: AbstractDomain, fn: MonotoneFn) -> frozenset[int]:
    """Image of ``fn``'s best approximation plus the maximal element(s) of
    each fibre ``{x in A | f^A(x) = y}``."""
    w = function_witness(domain, fn)
    return w.image.union(*w.max_preimages.values())


def required_set_bounded(domain: AbstractDomain, fn: MonotoneFn) -> frozenset[int]:
    """Inequality form: maximal ``x`` with ``f^A(x) <= y`` for every ``y`` in A."""
    table, img = _fibres(domain, fn)
    lat = domain.carrier
    out = set(img)
    for y in domain.image:
        out |= lat.maximal(x for x, fx in table.items() if lat.leq(fx, y))
    return frozenset(out)


def correctness_kernel(
    domain: AbstractDomain,
    fns: Sequence[MonotoneFn],
    sample: Iterable[int] | None = None,
) -> KernelResult:
    """Kernel of ``domain`` for the family ``fns``.

    Generator sets of all functions are united before a single
    meet-closure.  The result is re-checked against the original best
    approximations; a mismatch raises :class:`KernelVerificationError`.
    On carriers too large for an exhaustive check the verification runs on
    a sample and the result says so.
    """
    required: set[int] = set()
    per_function = {}
    for fn in fns:
        w = function_witness(domain, fn)
        per_function[fn.name] = w
        required |= w.image.union(*w.max_preimages.values())
    kernel = from_image(domain.carrier, required, f"K({domain.name})")
    if sample is not None:
        sample = list(sample)
    for fn in fns:
        c = bca_witness(kernel, domain, fn, sample)
        if c is not None:
            raise KernelVerificationError(
                f"kernel changes {fn.name}'s best approximation at {domain.carrier.name(c)}"
            )
    mode = "exhaustive" if is_exhaustive(domain.carrier) and sample is None else "sampled"
    return KernelResult(domain, kernel, frozenset(required), per_function, mode)


def _meet_closed_subsets(lat: FiniteLattice, pool: Sequence[int]) -> Iterable[frozenset[int]]:
    top = lat.top
    rest = [x for x in pool if x != top]
    for r in range(len(rest) + 1):
        for combo in combinations(rest, r):
            cand = frozenset(combo) | {top}
            if all(lat.meet(a, b) in cand for a, b in combinations(combo, 2)):
                yield cand


def kernel_oracle(
    domain: AbstractDomain, fns: Sequence[MonotoneFn], over_carrier: bool = False
) -> AbstractDomain:
    """Brute-force kernel: intersect every candidate domain whose best
    approximations of ``fns`` agree with ``domain``'s.

    Candidates are the meet-closed subsets of the domain's image or, with
    ``over_carrier``, of the whole carrier.
    """
    lat = domain.carrier
    if over_carrier:
        if lat.size > ORACLE_CARRIER_LIMIT:
            raise ValueError(f"carrier has {lat.size} elements; oracle limit is {ORACLE_CARRIER_LIMIT}")
        pool = list(lat.elements())
    else:
        if len(domain.image) > ORACLE_IMAGE_LIMIT:
            raise ValueError(
                f"domain has {len(domain.image)} elements; oracle limit is {ORACLE_IMAGE_LIMIT}"
            )
        pool = sorted(domain.image)
    survivors = domain.image
    for cand in _meet_closed_subsets(lat, pool):
        if cand >= survivors:
            continue
        b = AbstractDomain(lat, cand, "B")
        if all(bca_equal(b, domain, fn) for fn in fns):
            survivors = survivors & cand
    return AbstractDomain(lat, survivors, f"oracle({domain.name})")


@dataclass(frozen=True)
class CounterexampleReport:
    """Two domains that each keep ``mu``'s approximation while their glb does not."""

    mu: AbstractDomain
    rho1: AbstractDomain
    rho2: AbstractDomain
    glb: AbstractDomain
    rho1_equal: bool
    rho2_equal: bool
    glb_equal: bool
    witness: int | None

    @property
    def demonstrates(self) -> bool:
        return self.rho1_equal and self.rho2_equal and not self.glb_equal


def most_concrete_counterexample(
    rho1_image: Iterable[str] = ("1", "3", "5"),
    rho2_image: Iterable[str] = ("1", "4", "5"),
) -> CounterexampleReport:
    """Show on the five-element fixture that no most concrete domain keeps
    the approximation of ``f`` induced by ``mu = {1, 5}``."""
    lat = esempio_lattice()
    f = esempio_fn(lat)
    mu = AbstractDomain(lat, lat.ids("1", "5"), "mu")
    rho1 = AbstractDomain(lat, lat.ids(*rho1_image), "rho1")
    rho2 = AbstractDomain(lat, lat.ids(*rho2_image), "rho2")
    meet = abs_glb([rho1, rho2])
    witness = bca_witness(meet, mu, f)
    return CounterexampleReport(
        mu, rho1, rho2, meet,
        bca_equal(rho1, mu, f), bca_equal(rho2, mu, f), witness is None, witness,
    )
