import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aasg.errors import InputError
from aasg.multiindex import (
    IndexCatalog,
    admissible_next,
    build_catalog,
    catalog_size,
    component_multiindices,
    enumerate_anova_sets,
    full_catalog,
    support,
)


def test_enumerate_sets():
    assert enumerate_anova_sets(0, 5) == [()]
    assert enumerate_anova_sets(1, 3) == [(1,), (2,), (3,)]
    assert enumerate_anova_sets(2, 4) == list(itertools.combinations(range(1, 5), 2))


def brute_component(T, p, N):
    out = []
    for e in itertools.product(range(p + 1), repeat=N):
        if sum(e) <= p and support(e) == tuple(T):
            out.append(e)
    return sorted(out, key=lambda e: (sum(e), e))


def test_component_examples():
    assert component_multiindices((), 5, 3) == [(0, 0, 0)]
    assert component_multiindices((1,), 5, 10) == [(k,) + (0,) * 9 for k in range(1, 6)]
    assert len(component_multiindices((1, 2), 6, 3)) == 15


@given(st.integers(1, 4), st.integers(0, 6), st.data())
def test_component_matches_brute_force(N, p, data):
    k = data.draw(st.integers(0, N))
    T = data.draw(st.sampled_from(enumerate_anova_sets(k, N)))
    got = component_multiindices(T, p, N)
    assert sorted(got, key=lambda e: (sum(e), e)) == brute_component(T, p, N)
    assert len(got) == (math.comb(p, len(T)) if T else 1)


def test_catalog_sizes():
    single = [enumerate_anova_sets(1, 10)]
    assert len(build_catalog(single, 5, 10)) == 51
    assert len(build_catalog(single + [enumerate_anova_sets(2, 10)], 5, 10)) == 501
    assert len(full_catalog(10, 5)) == 3003
    assert len(full_catalog(4, 6)) == 210
    assert len(full_catalog(3, 6)) == 84
    assert catalog_size([10, 45], 5) == 501


@given(st.integers(1, 6), st.integers(1, 6))
def test_vandermonde(N, p):
    cat = full_catalog(N, p)
    assert len(cat) == math.comb(N + p, N)
    assert len(cat) == sum(math.comb(N, k) * math.comb(p, k) for k in range(min(N, p) + 1))
    assert len(set(cat.entries)) == len(cat)


def test_growth_is_prefix():
    a = build_catalog([enumerate_anova_sets(1, 5)], 4, 5)
    pairs = [(1, 2), (1, 4), (2, 4)]
    b = build_catalog([enumerate_anova_sets(1, 5), pairs], 4, 5)
    c = build_catalog([enumerate_anova_sets(1, 5), pairs, admissible_next(pairs, 5)], 4, 5)
    assert len(c) == len(b) + 4  # one triple, C(4, 3) indices
    assert a.is_prefix_of(b) and b.is_prefix_of(c)
    assert not b.is_prefix_of(a)


def test_duplicates_rejected():
    with pytest.raises(InputError):
        build_catalog([[(1,), (1,)]], 3, 3)
    with pytest.raises(InputError):
        build_catalog([[(1, 2)]], 3, 3)


def test_orders_above_p_skipped():
    cat = build_catalog([enumerate_anova_sets(1, 3), enumerate_anova_sets(2, 3)], 1, 3)
    assert len(cat) == 4 and not cat.has_set((1, 2))


def test_admissible_next():
    assert admissible_next([(1,), (2,), (3,)], 3) == [(1, 2), (1, 3), (2, 3)]
    assert admissible_next([(1,)], 3) == []
    assert admissible_next([(1, 2), (1, 3), (2, 3)], 4) == [(1, 2, 3)]
    assert admissible_next([], 4) == []


@given(st.integers(2, 6), st.data())
def test_admissible_matches_brute_force(N, data):
    k = data.draw(st.integers(1, N - 1))
    pool = enumerate_anova_sets(k, N)
    kept = data.draw(st.lists(st.sampled_from(pool), unique=True))
    expect = [T for T in enumerate_anova_sets(k + 1, N) if all(S in kept for S in itertools.combinations(T, k))]
    assert admissible_next(kept, N) == expect


def test_json_round_trip():
    cat = build_catalog([enumerate_anova_sets(1, 4), [(1, 3), (2, 4)]], 3, 4)
    doc = cat.to_dict()
    assert set(doc) == {"N", "p", "orders"}
    assert doc["orders"][0] == {"set": [], "indices": [[0, 0, 0, 0]]}
    back = IndexCatalog.from_json(cat.to_json())
    assert back == cat and back.sets == cat.sets
    assert back.set_range((2, 4)) == cat.set_range((2, 4))


def test_position_lookup():
    cat = full_catalog(3, 3)
    for i, e in enumerate(cat.entries):
        assert cat.index(e) == i and e in cat
    with pytest.raises(InputError):
        cat.set_range((4,))
