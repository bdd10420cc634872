import random

import pytest
from hypothesis import given, strategies as st

from egas.absdom import (
    MonotoneFn,
    bca_equal,
    bca_extended,
    from_image,
    identity_domain,
    increment_fixture,
)
from egas.generators import random_domain, random_lattice, random_monotone
from egas.kernel import (
    correctness_kernel,
    kernel_oracle,
    most_concrete_counterexample,
    required_set_bounded,
    required_set_fibres,
)
from egas.lattice import PowersetLattice

seeds = st.integers(0, 10**6)


def case(seed, nfns=None):
    rng = random.Random(seed)
    lat = random_lattice(rng)
    dom = random_domain(rng, lat)
    k = nfns or rng.randint(1, 2)
    return lat, dom, [random_monotone(rng, lat, f"f{i}") for i in range(k)]


def test_sign_kernel(sign):
    lat, sq = sign
    res = correctness_kernel(identity_domain(lat, "Sign"), [sq])
    assert res.kernel.names() == ["empty", "0", "Z>0", "Z!=0", "Z>=0", "Z"]
    assert lat.names_of(res.removed) == ["Z<0", "Z<=0"]
    assert res.verification == "exhaustive"
    w = res.per_function["sq"]
    assert lat.names_of(w.image) == ["empty", "0", "Z>0", "Z>=0"]
    assert {lat.name(y): lat.names_of(p) for y, p in w.max_preimages.items()} == {
        "empty": ["empty"], "0": ["0"], "Z>0": ["Z!=0"], "Z>=0": ["Z"],
    }


def test_sign_kernel_matches_oracles(sign):
    lat, sq = sign
    full = identity_domain(lat)
    k = correctness_kernel(full, [sq]).kernel
    assert kernel_oracle(full, [sq]) == k
    assert kernel_oracle(full, [sq], over_carrier=True) == k


@given(seeds)
def test_kernel_matches_oracle(seed):
    lat, dom, fns = case(seed)
    res = correctness_kernel(dom, fns)
    assert res.kernel == kernel_oracle(dom, fns)
    assert res.kernel == kernel_oracle(dom, fns, over_carrier=True)


@given(seeds)
def test_kernel_keeps_approximations(seed):
    lat, dom, fns = case(seed)
    k = correctness_kernel(dom, fns).kernel
    assert k.image <= dom.image
    for f in fns:
        assert bca_extended(k, f).table == bca_extended(dom, f).table


@given(seeds)
def test_fibre_and_bound_generators_agree(seed):
    lat, dom, fns = case(seed, 1)
    (f,) = fns
    assert required_set_bounded(dom, f) == required_set_fibres(dom, f)


@given(seeds)
def test_kernel_idempotent_and_antitone_in_family(seed):
    lat, dom, fns = case(seed, 2)
    k1 = correctness_kernel(dom, fns[:1]).kernel
    k12 = correctness_kernel(dom, fns).kernel
    assert k1.image <= k12.image
    assert correctness_kernel(k12, fns).kernel == k12


@given(seeds)
def test_domains_between_kernel_and_domain_keep_approximation(seed):
    rng = random.Random(seed)
    lat, dom, fns = case(seed)
    k = correctness_kernel(dom, fns).kernel
    extra = rng.sample(sorted(dom.image - k.image), rng.randint(0, len(dom.image - k.image)))
    mid = from_image(lat, k.image | set(extra))
    assert all(bca_equal(mid, dom, f) for f in fns)


def test_join_closure_is_not_the_kernel():
    """Closing the generators under joins instead of meets goes wrong."""
    rng = random.Random(0)
    for _ in range(200):
        lat = random_lattice(rng)
        dom = random_domain(rng, lat)
        f = random_monotone(rng, lat)
        gens = required_set_fibres(dom, f)
        if lat.join_closure(gens) | {lat.top} != correctness_kernel(dom, [f]).kernel.image:
            return
    pytest.fail("join closure always coincided with the kernel")


def test_no_most_concrete_domain():
    rep = most_concrete_counterexample()
    lat = rep.mu.carrier
    assert rep.rho1_equal and rep.rho2_equal and not rep.glb_equal
    assert rep.demonstrates
    assert rep.glb.image == frozenset(lat.elements())
    assert lat.name(rep.witness) == "2"


def test_increment_kernel_is_smaller_domain():
    carrier, inc, a1, a2 = increment_fixture()
    res = correctness_kernel(a1, [inc])
    assert res.kernel.image == a2.image
    assert res.verification == "sampled"


def test_identity_function_kernel_is_top_only(sign):
    lat, _ = sign
    res = correctness_kernel(identity_domain(lat), [MonotoneFn.identity(lat)])
    # identity's approximation is mu itself, so the kernel cannot lose anything
    assert res.kernel.image == frozenset(lat.elements())


def test_oracle_size_limit():
    lat = PowersetLattice(list("abcde"))
    with pytest.raises(ValueError, match="oracle limit"):
        kernel_oracle(identity_domain(lat), [MonotoneFn.identity(lat)])
