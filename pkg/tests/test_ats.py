import random
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from egas.absdom import MonotoneFn, identity_domain
from egas.ats import (
    Partition,
    TransitionSystem,
    alpha_p,
    bca_correspondence_check,
    build_ats,
    family_atoms,
    gamma_p,
    iterate_partition_kernel,
    kernel_family_oracle,
    merge_groups,
    parse_blocks,
    partition_kernel,
)
from egas.generators import random_system
from egas.kernel import correctness_kernel
from egas.lattice import PowersetLattice

seeds = st.integers(0, 10**6)


def generic_kernel_family(ts, part):
    """Kernel of the subsets-of-blocks domain for pre/post, computed by the
    generic machinery and concretized to sets of states."""
    ats = build_ats(ts, part)
    n = len(part)
    lat = PowersetLattice([str(i) for i in range(n)])
    mask = lambda bs: sum(1 << b for b in bs)  # noqa: E731
    pre = MonotoneFn.additive(lat, [mask(ats.pre_ee({b})) for b in range(n)], "pre")
    post = MonotoneFn.additive(lat, [mask(ats.post_ee({b})) for b in range(n)], "post")
    k = correctness_kernel(identity_domain(lat), [pre, post]).kernel
    return {part.gamma(b for b in range(n) if m >> b & 1) for m in k.image}


def test_fig1_edges(fig1):
    ts, part = fig1
    ats = build_ats(ts, part)
    b = lambda text: part.index(ts.ids(*text.split(",")))  # noqa: E731
    assert ats.successors(b("1")) == {b("2,3"), b("4,5")}
    assert ats.pre_ee({b("2,3")}) == {b("1")} == ats.pre_ee({b("4,5")})
    assert ats.post_ee({b("2,3")}) == {b("6"), b("7")}
    assert len(ats.edges) == 8
    assert ats.pre_ee(set()) == set()


def test_fig2_edges(fig2):
    ts, part = fig2
    ats = build_ats(ts, part)
    mid = part.index(ts.ids("3", "4", "5"))
    assert {ats.block_name(c) for c in ats.successors(mid)} == {"[6]", "[7]"}


def test_fig1_kernel(fig1):
    ts, part = fig1
    kern = partition_kernel(ts, part)
    assert kern.render(ts) == "{[1],[2,3,4,5],[6,7],[8,9]}"
    groups = merge_groups(ts, part)
    assert [[part.block_name(i, ts) for i in g] for g in groups] == [["[2,3]", "[4,5]"], ["[6]", "[7]"]]


def test_fig1_kernel_is_stable(fig1):
    ts, part = fig1
    kern = partition_kernel(ts, part)
    assert partition_kernel(ts, kern) == kern
    assert iterate_partition_kernel(ts, part) == [part, kern]


def test_fig1_family(fig1):
    ts, part = fig1
    fam = kernel_family_oracle(ts, part)
    for s in (["1"], ["2", "3", "4", "5"], ["6", "7"], ["8", "9"]):
        assert ts.ids(*s) in fam
    assert family_atoms(ts.size, fam) == partition_kernel(ts, part)


def test_edgeless_system():
    ts = TransitionSystem(4, frozenset())
    part = Partition.discrete(4)
    assert partition_kernel(ts, part) == Partition.from_blocks([range(4)])
    assert kernel_family_oracle(ts, part) == {frozenset(), ts.states}
    assert build_ats(ts, part).edges == frozenset()
    assert bca_correspondence_check(ts, part)


def test_empty_system():
    ts = TransitionSystem(0, frozenset())
    assert bca_correspondence_check(ts, Partition(()))


@given(seeds)
def test_kernel_atoms_three_ways(seed):
    ts, part = random_system(random.Random(seed), max_states=10, max_blocks=6)
    kern = partition_kernel(ts, part)
    assert family_atoms(ts.size, kernel_family_oracle(ts, part)) == kern
    assert family_atoms(ts.size, generic_kernel_family(ts, part)) == kern


def test_set_families_can_differ():
    """The union/intersection family and the generic kernel agree on atoms
    but not necessarily as families of sets."""
    rng = random.Random(0)
    for _ in range(100):
        ts, part = random_system(rng, max_states=10, max_blocks=6)
        if generic_kernel_family(ts, part) != kernel_family_oracle(ts, part):
            return
    pytest.fail("families always coincided")


@given(seeds)
def test_kernel_coarsens_and_quotients_edges(seed):
    ts, part = random_system(random.Random(seed), max_states=10, max_blocks=6)
    kern = partition_kernel(ts, part)
    assert part.refines(kern)
    fine, coarse = build_ats(ts, part), build_ats(ts, kern)
    owner = kern.alpha
    quotient = {(min(owner(part.blocks[a])), min(owner(part.blocks[b]))) for a, b in fine.edges}
    assert coarse.edges == quotient


@given(seeds)
def test_correspondence(seed):
    ts, part = random_system(random.Random(seed), max_states=10, max_blocks=5)
    assert bca_correspondence_check(ts, part)


@given(seeds)
def test_alpha_gamma_insertion(seed):
    rng = random.Random(seed)
    ts, part = random_system(rng, max_states=10, max_blocks=5)
    n = len(part)
    for r in range(n + 1):
        for bs in combinations(range(n), r):
            assert alpha_p(part, gamma_p(part, bs)) == frozenset(bs)
    for _ in range(20):
        s = frozenset(x for x in range(ts.size) if rng.random() < 0.4)
        bs = frozenset(b for b in range(n) if rng.random() < 0.5)
        assert (alpha_p(part, s) <= bs) == (s <= gamma_p(part, bs))


class TestPartition:
    def test_blocks_sorted_by_least_state(self):
        p = Partition.from_blocks([[3, 4], [0], [1, 2]])
        assert p.blocks == (frozenset({0}), frozenset({1, 2}), frozenset({3, 4}))
        assert p.block_of == (0, 1, 1, 2, 2)

    def test_invalid(self):
        with pytest.raises(ValueError, match="overlap"):
            Partition.from_blocks([[0, 1], [1, 2]])
        with pytest.raises(ValueError, match="cover"):
            Partition.from_blocks([[0], [2]])
        with pytest.raises(ValueError, match="empty"):
            Partition.from_blocks([[0], []])

    def test_split_and_merge(self):
        p = Partition.from_blocks([[0], [1, 2, 3]])
        q = p.split(1, [[1], [2, 3]])
        assert q.blocks == (frozenset({0}), frozenset({1}), frozenset({2, 3}))
        assert q.refines(p) and not p.refines(q)
        assert q.merge([[1, 2]]) == p
        with pytest.raises(ValueError):
            p.split(1, [[1], [2]])

    def test_parse_blocks(self, fig1):
        ts, part = fig1
        assert parse_blocks(ts, "{[1],[2,3],[4,5],[6],[7],[8,9]}") == part
        assert parse_blocks(ts, part.render(ts)) == part


class TestTransitionSystem:
    def test_numbered_labels(self, fig2):
        ts, _ = fig2
        assert ts.labels[0] == "1"
        assert ts.init == ts.ids("1", "2") and ts.error == ts.ids("6")
        assert ts.render(ts.ids("3", "5")) == "[3,5]"

    def test_pre_post(self, fig2):
        ts, _ = fig2
        assert ts.post(ts.ids("2")) == ts.ids("4", "5")
        assert ts.pre(ts.ids("7")) == ts.ids("4", "5")

    def test_rejects_bad_edges(self):
        with pytest.raises(ValueError):
            TransitionSystem(2, frozenset({(0, 2)}))
        with pytest.raises(ValueError):
            TransitionSystem(2, frozenset(), labels=("a", "a"))

    def test_partition_size_mismatch(self, fig1):
        ts, _ = fig1
        with pytest.raises(ValueError):
            build_ats(ts, Partition.discrete(3))
