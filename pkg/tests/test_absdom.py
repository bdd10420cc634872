import random

import pytest
from hypothesis import given, strategies as st

from egas.absdom import (
    AbstractDomain,
    MonotoneFn,
    abs_glb,
    abs_lub,
    bca,
    bca_equal,
    bca_extended,
    bca_witness,
    from_image,
    identity_domain,
    increment_fixture,
    precision_leq,
)
from egas.generators import random_domain, random_lattice, random_monotone
from egas.lattice import Lattice

seeds = st.integers(0, 10**6)


def brute_mu(lat, image, c):
    """Least image element above c, found by scanning."""
    above = [y for y in image if lat.leq(c, y)]
    (least,) = [y for y in above if all(lat.leq(y, z) for z in above)]
    return least


def case(seed):
    rng = random.Random(seed)
    lat = random_lattice(rng)
    return rng, lat, random_domain(rng, lat), random_monotone(rng, lat)


@given(seeds)
def test_closure_laws(seed):
    _, lat, dom, _ = case(seed)
    mu = dom.apply
    for x in lat.elements():
        assert lat.leq(x, mu(x))
        assert mu(mu(x)) == mu(x)
        assert mu(x) in dom
        for y in lat.upset(x):
            assert lat.leq(mu(x), mu(y))


@given(seeds)
def test_apply_matches_scan(seed):
    _, lat, dom, _ = case(seed)
    for x in lat.elements():
        assert dom.apply(x) == brute_mu(lat, dom.image, x)


@given(seeds)
def test_bca_matches_alpha_f_gamma(seed):
    _, lat, dom, f = case(seed)
    table = bca(dom, f)
    assert set(table.entries) == dom.image
    for a in dom.image:
        assert table[a] == brute_mu(lat, dom.image, f(a))
    ext = bca_extended(dom, f)
    for c in lat.elements():
        assert ext(c) == table[dom.apply(c)]


@given(seeds)
def test_adjunction(seed):
    # alpha(c) <= a  iff  c <= gamma(a), for a in the image
    _, lat, dom, _ = case(seed)
    for c in lat.elements():
        for a in dom.image:
            assert lat.leq(dom.alpha(c), a) == lat.leq(c, dom.gamma(a))


def test_sign_square_table(sign):
    lat, sq = sign
    table = bca(identity_domain(lat), sq).named()
    assert table == {
        "empty": "empty", "Z<0": "Z>0", "0": "0", "Z>0": "Z>0",
        "Z<=0": "Z>=0", "Z!=0": "Z>0", "Z>=0": "Z>=0", "Z": "Z>=0",
    }


def test_domain_must_be_meet_closed(sign):
    lat, _ = sign
    with pytest.raises(ValueError, match="meet-closed"):
        AbstractDomain(lat, lat.ids("Z<=0", "Z>=0", "Z"))
    assert from_image(lat, lat.ids("Z<=0", "Z>=0")).image == lat.ids("0", "Z<=0", "Z>=0", "Z")


def test_gamma_rejects_outside(sign):
    lat, _ = sign
    dom = from_image(lat, lat.ids("Z>=0"))
    with pytest.raises(ValueError):
        dom.gamma(lat.index("0"))


def test_non_monotone_rejected():
    lat = Lattice.chain(3)
    with pytest.raises(ValueError, match="not monotone"):
        MonotoneFn.from_callable(lat, lambda x: 2 - x)


def test_table_must_be_total():
    with pytest.raises(ValueError):
        MonotoneFn(Lattice.chain(3), (0, 1))


def test_increment_domains_agree():
    carrier, inc, a1, a2 = increment_fixture()
    assert carrier.size == 1 << 17
    assert bca_equal(a1, a2, inc)
    # distinct domains, same approximation
    assert a1.image - a2.image


def test_increment_differs_from_finer_domain():
    carrier, inc, a1, _ = increment_fixture()
    finer = from_image(carrier, a1.image | {carrier.atom("1")}, "A1+1")
    assert not bca_equal(finer, a1, inc)


def test_witness_is_least(sign):
    lat, sq = sign
    full = identity_domain(lat)
    coarse = from_image(lat, lat.ids("Z>=0"))
    w = bca_witness(coarse, full, sq)
    assert w == lat.index("empty")


def test_lub_glb_of_domains(sign):
    lat, _ = sign
    a = from_image(lat, lat.ids("Z<=0", "Z>=0"))
    b = from_image(lat, lat.ids("Z>=0", "Z>0"))
    assert abs_lub([a, b]).image == lat.ids("Z>=0", "Z")
    glb = abs_glb([a, b])
    assert glb.image == lat.meet_closure(a.image | b.image)
    assert precision_leq(glb, a) and precision_leq(glb, b)
    assert precision_leq(a, abs_lub([a, b]))
    assert not precision_leq(a, b)


@given(seeds)
def test_abs_glb_is_meet_of_abs(seed):
    rng = random.Random(seed)
    lat = random_lattice(rng)
    ds = [random_domain(rng, lat) for _ in range(3)]
    glb, lub = abs_glb(ds), abs_lub(ds)
    for d in ds:
        assert precision_leq(glb, d) and precision_leq(d, lub)
    # glb is the most abstract common refinement
    assert glb.image == lat.meet_closure(set().union(*(d.image for d in ds)))


def test_different_carriers_rejected(sign):
    lat, sq = sign
    other = Lattice.chain(8)
    with pytest.raises(ValueError):
        bca(identity_domain(other), sq)
