import numpy as np
import pytest

from snalab.arcs import ArcSet


def random_arcset(rng, max_arcs=6):
    n = rng.integers(1, max_arcs + 1)
    pairs = [(rng.random(), rng.random()) for _ in range(n)]
    return ArcSet.from_pairs(pairs)


def test_constructors():
    assert ArcSet.empty().measure() == 0.0
    assert ArcSet.full().measure() == 1.0
    a = ArcSet.from_pairs([(0.2, 0.5)])
    assert a.measure() == pytest.approx(0.3)
    assert a.ls == (0.2,) and a.rs == (0.5,)


def test_from_pairs_wrapping():
    a = ArcSet.from_pairs([(0.8, 0.2)])
    assert a.ls == (0.0, 0.8)
    assert a.rs == (0.2, 1.0)
    assert a.measure() == pytest.approx(0.4)
    comps = a.components()
    assert len(comps) == 1
    start, length = comps[0]
    assert start == 0.8
    assert length == pytest.approx(0.4)


def test_from_pairs_degenerate_is_empty():
    assert ArcSet.from_pairs([(0.3, 0.3)]) == ArcSet.empty()


def test_complement_involution_exact():
    rng = np.random.default_rng(1)
    for _ in range(200):
        a = random_arcset(rng)
        assert a.complement().complement() == a


def test_complement_partition():
    rng = np.random.default_rng(2)
    for _ in range(100):
        a = random_arcset(rng)
        c = a.complement()
        assert a.intersect(c) == ArcSet.empty()
        assert a.union(c) == ArcSet.full()
        assert a.measure() + c.measure() == pytest.approx(1.0, abs=1e-12)


def test_union_intersect_identities():
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = random_arcset(rng)
        b = random_arcset(rng)
        c = random_arcset(rng)
        assert a.intersect(a) == a
        assert a.union(a) == a
        assert a.intersect(ArcSet.full()) == a
        assert a.union(ArcSet.empty()) == a
        assert a.intersect(b) == b.intersect(a)
        assert a.union(b) == b.union(a)
        # distributivity, exact because endpoints are only copied
        lhs = a.union(b).intersect(c)
        rhs = a.intersect(c).union(b.intersect(c))
        assert lhs == rhs


def test_split_and_rejoin_exact():
    rng = np.random.default_rng(4)
    for _ in range(100):
        a = random_arcset(rng)
        b = random_arcset(rng)
        rebuilt = a.intersect(b).union(a.minus(b))
        assert rebuilt == a


def test_measure_monotone():
    rng = np.random.default_rng(5)
    for _ in range(100):
        a = random_arcset(rng)
        b = random_arcset(rng)
        i = a.intersect(b)
        u = a.union(b)
        assert i.measure() <= min(a.measure(), b.measure()) + 1e-15
        assert u.measure() >= max(a.measure(), b.measure()) - 1e-15
        assert u.measure() + i.measure() == pytest.approx(
            a.measure() + b.measure(), abs=1e-12
        )


def test_translate_preserves_measure_and_count():
    rng = np.random.default_rng(6)
    for _ in range(200):
        a = random_arcset(rng)
        s = rng.random()
        t = a.translate(s)
        assert t.measure() == pytest.approx(a.measure(), abs=1e-12)
        assert t.n_components == a.n_components
        back = t.translate(-s)
        for l1, l2 in zip(back.ls, a.ls):
            assert l1 == pytest.approx(l2, abs=1e-12)


def test_translate_zero_is_identity():
    a = ArcSet.from_pairs([(0.1, 0.4), (0.6, 0.7)])
    assert a.translate(0.0) == a
    assert a.translate(1.0) == a


def test_contains():
    a = ArcSet.from_pairs([(0.8, 0.2), (0.4, 0.5)])
    assert a.contains(0.9)
    assert a.contains(0.0)
    assert a.contains(0.1)
    assert a.contains(0.45)
    assert not a.contains(0.3)
    assert not a.contains(0.2)  # half-open: right endpoint excluded
    assert a.contains(0.8)
    got = a.contains(np.array([0.9, 0.3, 0.45, 0.75]))
    assert got.tolist() == [True, False, True, False]
    assert not ArcSet.empty().contains(0.5)
    assert ArcSet.full().contains(0.999)


def test_contains_matches_components():
    rng = np.random.default_rng(9)
    for _ in range(50):
        a = random_arcset(rng)
        for start, length in a.components():
            mid = (start + length / 2) % 1.0
            assert a.contains(mid)
        for start, length in a.complement().components():
            mid = (start + length / 2) % 1.0
            assert not a.contains(mid)


def test_components_wrap_join():
    a = ArcSet((0.0, 0.7), (0.1, 1.0))
    comps = a.components()
    assert len(comps) == 1
    assert comps[0][0] == 0.7
    assert comps[0][1] == pytest.approx(0.4)
    assert ArcSet.full().components() == [(0.0, 1.0)]
    assert ArcSet.empty().components() == []


def test_widths_and_arcs():
    a = ArcSet.from_pairs([(0.1, 0.2), (0.5, 0.8)])
    assert sorted(a.widths()) == pytest.approx([0.1, 0.3])
    assert a.arcs == ((0.1, pytest.approx(0.1)), (0.5, pytest.approx(0.3)))


def test_merge_gaps():
    a = ArcSet.from_pairs([(0.1, 0.2), (0.2001, 0.3)])
    m = a.merge_gaps(1e-3)
    assert m.n_components == 1
    # endpoints of the merged arc are copies of the originals
    assert m.ls == (0.1,)
    assert m.rs == (0.3,)
    # gap wider than eps survives
    assert a.merge_gaps(1e-5) == a


def test_merge_gaps_wrap():
    a = ArcSet.from_pairs([(0.95, 0.9999), (0.0001, 0.1)])
    m = a.merge_gaps(1e-3)
    assert m.n_components == 1
    assert m.contains(0.0)
    # one wrapped component whose only gap is interior: closing it fills
    # the circle
    single = ArcSet.from_pairs([(0.1, 0.0999)])
    assert single.merge_gaps(2e-4) == ArcSet.full()
    assert single.merge_gaps(1e-5) == single


def test_subset_of():
    rng = np.random.default_rng(10)
    for _ in range(100):
        a = random_arcset(rng)
        b = random_arcset(rng)
        assert a.intersect(b).subset_of(a)
        assert a.intersect(b).subset_of(b)
        assert a.subset_of(a.union(b))
        if a.minus(b).measure() > 1e-9:
            assert not a.subset_of(b)


def test_bool_and_eq():
    assert not ArcSet.empty()
    assert ArcSet.full()
    assert ArcSet.from_pairs([(0.1, 0.3)]) == ArcSet((0.1,), (0.3,))
