import random
from itertools import product

import pytest

from egas.absdom import AbstractDomain, bca_equal, identity_domain
from egas.kernel import kernel_oracle
from egas.predabs import (
    STAR,
    Abstraction,
    ConcreteProgramSpace,
    FooVerdict,
    alpha_b,
    alpha_c,
    apply_table,
    bca_post_b,
    boolean_kernel,
    boolean_lattice,
    cart_join,
    cart_leq,
    cart_meet,
    foo_fixture,
    foo_verification,
    from_mask,
    gamma_b,
    gamma_c,
    kleene_lfp,
    post_b_fn,
)

V00, V01, V10, V11 = (0, 0), (0, 1), (1, 0), (1, 1)
ALL = frozenset({V00, V01, V10, V11})


@pytest.fixture(scope="module")
def fx():
    return foo_fixture()


def all_subsets(vs):
    vs = sorted(vs)
    return [frozenset(v for v, keep in zip(vs, bits) if keep) for bits in product((0, 1), repeat=len(vs))]


def test_s1_table(fx):
    table = bca_post_b(fx.preds, fx.space, fx.s1)
    assert table == {v: {V11} for v in ALL}


def test_s2_table(fx):
    table = bca_post_b(fx.preds, fx.space, fx.s2)
    assert table == {V00: {V00, V01}, V01: {V00}, V10: {V00, V01}, V11: {V00}}


@pytest.mark.parametrize("n", [3, 5])
def test_tables_do_not_depend_on_modulus(fx, n):
    other = foo_fixture(n)
    for a, b in ((fx.s1, other.s1), (fx.s2, other.s2)):
        assert bca_post_b(fx.preds, fx.space, a) == bca_post_b(other.preds, other.space, b)


def test_modulus_two_rejected():
    with pytest.raises(ValueError):
        ConcreteProgramSpace(("x",), 2)


def test_table_extends_to_every_set(fx):
    for stmt in (fx.s1, fx.s2):
        table = bca_post_b(fx.preds, fx.space, stmt)
        for vs in all_subsets(ALL):
            direct = alpha_b(fx.preds, stmt.post(gamma_b(fx.preds, fx.space, vs)))
            assert apply_table(table, vs) == direct


def test_entry_state_set(fx):
    x, y, z = (fx.space.var(v) for v in "xyz")
    s = [st for st in fx.space.states if st[z] == 0 and st[x] == st[y]]
    assert alpha_b(fx.preds, s) == {V11}


def test_galois_laws(fx):
    rng = random.Random(0)
    states = fx.space.states
    for _ in range(60):
        s = frozenset(st for st in states if rng.random() < 0.05)
        for v in all_subsets(ALL):
            assert (alpha_b(fx.preds, s) <= v) == (s <= gamma_b(fx.preds, fx.space, v))
    for a in all_subsets(ALL):
        for b in all_subsets(ALL):
            g = lambda vs: gamma_b(fx.preds, fx.space, vs)  # noqa: E731
            assert g(a | b) == g(a) | g(b)


def concrete_loop_head(fx):
    """Concrete states after the loop body, from any entry state."""
    body = lambda xs: (lambda mid: mid | fx.s2.post(mid))(fx.s1.post(xs))  # noqa: E731
    top = frozenset(fx.space.states)
    reach, _ = kleene_lfp(lambda xs: body(top | xs), frozenset(), frozenset.union)
    return reach


def test_boolean_loop(fx):
    res = foo_verification("boolean")
    assert res.loop_exit == "{<0,0>,<1,1>}"
    assert res.chain == ("{}", "{<0,0>,<1,1>}")
    assert res.after_guard == "{<1,1>}"
    assert res.verdict is FooVerdict.UNREACHABLE
    assert alpha_b(fx.preds, concrete_loop_head(fx)) == {V00, V11}


def test_concrete_program_is_safe(fx):
    x, y, z = (fx.space.var(v) for v in "xyz")
    exits = [s for s in concrete_loop_head(fx) if s[x] == s[y]]
    assert exits and all(s[z] == 0 for s in exits)


def test_kernel_verdict():
    res = foo_verification("kernel")
    assert res.verdict is FooVerdict.UNREACHABLE
    assert res.loop_exit == "{<0,0>,<1,1>}"


def test_plain_kernel_is_too_coarse():
    res = foo_verification("kernel", disjunctive=False)
    assert res.verdict is FooVerdict.INCONCLUSIVE


def test_cartesian_verdict():
    res = foo_verification(Abstraction.CARTESIAN)
    assert res.loop_exit == "<*,*>"
    assert res.after_guard == "<*,1>"
    assert res.verdict is FooVerdict.INCONCLUSIVE


def named(dom, preds):
    return {from_mask(preds, m) for m in dom.image}


def test_boolean_kernel_image(fx):
    k = boolean_kernel(fx.preds, fx.space, [fx.s1, fx.s2])
    assert named(k, fx.preds) == set(all_subsets({V00, V01, V11})) | {ALL}


def test_plain_kernel_matches_oracle(fx):
    lat = boolean_lattice(fx.preds)
    fns = [post_b_fn(fx.preds, fx.space, s, lat) for s in (fx.s1, fx.s2)]
    plain = boolean_kernel(fx.preds, fx.space, [fx.s1, fx.s2], disjunctive=False)
    assert plain.image == kernel_oracle(identity_domain(lat), fns, over_carrier=True).image
    assert named(plain, fx.preds) == {
        frozenset(), frozenset({V00}), frozenset({V01}), frozenset({V00, V01}),
        frozenset({V11}), frozenset({V01, V11}), ALL,
    }


def test_disjunctive_kernel_is_least_union_closed(fx):
    """Brute force over all 2^16 families of subsets of valuations."""
    lat = boolean_lattice(fx.preds)
    full = identity_domain(lat)
    fns = [post_b_fn(fx.preds, fx.space, s, lat) for s in (fx.s1, fx.s2)]
    survivors = frozenset(lat.elements())
    for family in range(1 << lat.size):
        image = frozenset(e for e in lat.elements() if family >> e & 1)
        if lat.top not in image or lat.bottom not in image:
            continue
        if any(a & b not in image or a | b not in image for a in image for b in image):
            continue
        dom = AbstractDomain(lat, image)
        if all(bca_equal(dom, full, f) for f in fns):
            survivors &= image
    assert survivors == boolean_kernel(fx.preds, fx.space, [fx.s1, fx.s2]).image


def test_kernel_and_cartesian_incomparable(fx):
    k = boolean_kernel(fx.preds, fx.space, [fx.s1, fx.s2])
    g_kernel = {gamma_b(fx.preds, fx.space, from_mask(fx.preds, m)) for m in k.image}
    cart = [None] + list(product((0, 1, STAR), repeat=2))
    g_cart = {gamma_c(fx.preds, fx.space, e) for e in cart}
    assert gamma_c(fx.preds, fx.space, (1, 0)) not in g_kernel
    assert gamma_b(fx.preds, fx.space, {V00, V11}) not in g_cart


class TestCartesian:
    elems = [None] + list(product((0, 1, STAR), repeat=2))

    def test_order_and_lattice_ops(self):
        for a in self.elems:
            for b in self.elems:
                j, m = cart_join(a, b), cart_meet(a, b)
                assert cart_leq(a, j) and cart_leq(b, j)
                assert cart_leq(m, a) and cart_leq(m, b)
                assert cart_leq(a, b) == (cart_join(a, b) == b)

    def test_gamma_monotone_and_insertion(self, fx):
        for a in self.elems:
            for b in self.elems:
                if cart_leq(a, b):
                    assert gamma_c(fx.preds, fx.space, a) <= gamma_c(fx.preds, fx.space, b)
            if a is not None:
                assert alpha_c(fx.preds, gamma_c(fx.preds, fx.space, a)) == a

    def test_alpha_of_empty(self, fx):
        assert alpha_c(fx.preds, []) is None
        assert gamma_c(fx.preds, fx.space, None) == frozenset()


def test_kleene_on_chain():
    lfp, chain = kleene_lfp(lambda x: min(x + 1, 5), 0, max)
    assert lfp == 5 and chain == [0, 1, 2, 3, 4, 5]
