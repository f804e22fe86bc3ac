import pytest

import oracles
from conftest import BITS, DIGRAPH, GRAPH, SPINS
from projcheck.errors import IndexOutOfRange, NotNested, SpaceTooLarge
from projcheck.statespace import (
    Configuration,
    IndexSet,
    SiteSpaceFamily,
    configuration_codes,
    edges_of,
    enumerate_configurations,
    extend_configuration,
    graph_from_edges,
    new_site_configurations,
    project_configuration,
    site_count,
    split_configuration,
)

PRODUCT = SiteSpaceFamily("explicit-product", (("a", "b", "c", "d"), ("i", "ii", "iii", "iv", "v")))


class TestSiteCount:
    @pytest.mark.parametrize(
        "family,n,expected",
        [(GRAPH, 3, 3), (DIGRAPH, 3, 6), (SPINS, 5, 5), (BITS, 1, 1), (GRAPH, 1, 0), (PRODUCT, 2, 2)],
    )
    def test_counts(self, family, n, expected):
        assert site_count(family, n) == expected

    def test_product_too_long(self):
        with pytest.raises(IndexOutOfRange):
            site_count(PRODUCT, 3)

    def test_index_set_validation(self):
        with pytest.raises(ValueError):
            IndexSet(0)
        assert IndexSet(2) <= IndexSet(3)

    def test_bad_family(self):
        with pytest.raises(ValueError):
            SiteSpaceFamily("hypergraph")
        with pytest.raises(ValueError):
            SiteSpaceFamily("explicit-product", ((),))
        with pytest.raises(ValueError):
            SiteSpaceFamily("explicit-product", (("a", "a"),))


class TestEnumeration:
    @pytest.mark.parametrize("family,n,size", [(BITS, 2, 4), (GRAPH, 3, 8), (PRODUCT, 2, 20), (DIGRAPH, 3, 64)])
    def test_sizes(self, family, n, size):
        xs = list(enumerate_configurations(family, n))
        assert len(xs) == size
        assert len({x.code for x in xs}) == size

    def test_canonical_order_matches_oracle(self):
        for family in (GRAPH, SPINS, PRODUCT):
            n = 2 if family is PRODUCT else 4
            lib = [family.decode(x) for x in enumerate_configurations(family, n)]
            ref = list(oracles.configurations(family.kind, n, family.alphabets or None))
            assert lib == ref

    def test_guard(self):
        with pytest.raises(SpaceTooLarge) as info:
            list(enumerate_configurations(GRAPH, 5, guard=100))
        assert info.value.size == 1024 and info.value.guard == 100

    def test_env_guard(self, monkeypatch):
        monkeypatch.setenv("PROJCHECK_GUARD", "4")
        with pytest.raises(SpaceTooLarge):
            configuration_codes(GRAPH, 3)
        monkeypatch.setenv("PROJCHECK_GUARD", "-1")
        assert configuration_codes(GRAPH, 3).size == 8

    def test_chunks_partition(self):
        parts = [configuration_codes(GRAPH, 4, chunk=(k, 5)) for k in range(5)]
        joined = [int(c) for p in parts for c in p]
        assert joined == list(range(64))


class TestProjection:
    def test_project_then_extend_is_identity(self):
        for z in enumerate_configurations(GRAPH, 4):
            x, y = split_configuration(GRAPH, z, 3)
            assert x == project_configuration(GRAPH, z, 3)
            assert extend_configuration(GRAPH, x, y) == z

    def test_product_factorization(self):
        for nA, nB in [(2, 4), (3, 5)]:
            assert GRAPH.size(nB) == GRAPH.size(nA) * len(new_site_configurations(GRAPH, nA, nB))

    def test_projection_is_prefix_restriction(self):
        z = graph_from_edges(GRAPH, 4, [(1, 2), (2, 3), (3, 4), (1, 4)])
        x = project_configuration(GRAPH, z, 3)
        assert edges_of(GRAPH, x) == [(1, 2), (2, 3)]

    def test_not_nested(self):
        z = Configuration(3, 5)
        with pytest.raises(NotNested):
            project_configuration(GRAPH, z, 4)
        with pytest.raises(NotNested):
            extend_configuration(GRAPH, Configuration(2, 1), Configuration(4, 0, base=3))

    def test_directed_arcs_round_trip(self):
        arcs = [(1, 2), (3, 1), (2, 3)]
        x = graph_from_edges(DIGRAPH, 3, arcs)
        assert edges_of(DIGRAPH, x) == sorted(arcs)
        assert set(oracles.arc_set(DIGRAPH.decode(x), 3)) == {(i - 1, j - 1) for i, j in arcs}

    def test_symbol_codec(self):
        x = PRODUCT.encode(2, ("c", "iv"))
        assert PRODUCT.decode(x) == ("c", "iv")
        assert project_configuration(PRODUCT, x, 1) == PRODUCT.encode(1, ("c",))
        with pytest.raises(ValueError):
            PRODUCT.encode(2, ("e", "i"))
