from collections import Counter

import numpy as np
import pytest

import oracles
from conftest import EDGE, EDGE_TRI, GRAPH, SPINS, ISING, oracle_kind, oracle_stat, stat_of
from projcheck.errors import SpaceTooLarge
from projcheck.statistics import DyadicTerm, EdgeCount, KStarCount
from projcheck.volume import (
    build_volume_tables,
    marginal_volume,
    marginal_volume_by_convolution,
)


def _oracle_tables(stat, family, nA, nB, cov=None):
    kind, alph = oracle_kind(family)
    fn = oracle_stat(stat, family, cov)
    joint, cond = oracles.joint_and_conditional(fn, kind, nA, nB, alph)
    return fn, joint, cond


class TestMarginal:
    def test_edge_binomial(self):
        assert marginal_volume(EDGE, GRAPH, 3).as_dict() == {(0,): 1, (1,): 3, (2,): 3, (3,): 1}

    @pytest.mark.parametrize("stat,family,n", [(EDGE_TRI, GRAPH, 5), (ISING, SPINS, 7)])
    def test_matches_oracle(self, stat, family, n):
        kind, alph = oracle_kind(family)
        ref = oracles.marginal(oracle_stat(stat, family), kind, n, alph)
        assert marginal_volume(stat, family, n).as_dict() == dict(ref)

    def test_convolution_equals_enumeration(self):
        cov = (0, 1, 1, 0, 1, 0)
        from projcheck.statistics import CovariateTable

        cv = CovariateTable(cov)
        stat = stat_of(EdgeCount(), DyadicTerm(entries=((1, (0, 1), 1),), label="between"))
        for n in (2, 4, 6):
            enum = marginal_volume(stat, GRAPH, n, cv).as_dict()
            conv = marginal_volume_by_convolution(stat, GRAPH, n, cv).as_dict()
            assert enum == conv

    def test_convolution_beyond_guard(self, monkeypatch):
        monkeypatch.setenv("PROJCHECK_GUARD", "1000")
        vol = marginal_volume(EDGE, GRAPH, 40)
        assert vol.total == 2 ** 780
        assert vol.as_dict()[(390,)] == __import__("math").comb(780, 390)
        with pytest.raises(SpaceTooLarge):
            marginal_volume(stat_of(EdgeCount(), KStarCount(2)), GRAPH, 6)


class TestTables:
    def test_counterexample_counts(self, fixture_spec):
        spec = fixture_spec("counterexample-s3.1.json")
        fam = spec.family
        tables = build_volume_tables(spec.stat, fam, 1, 2)
        assert tables.joint_dict() == {((t,), (d,)): 5 for t in (-1, 1) for d in (-1, 1)}
        assert tables.conditional_count((1,), fam.encode(1, ("a",))) == 2
        assert tables.conditional_count((1,), fam.encode(1, ("b",))) == 3
        assert tables.marginal_dict() == {(-1,): 2, (1,): 2}

    @pytest.mark.parametrize(
        "stat,family,nA,nB",
        [(EDGE, GRAPH, 3, 4), (EDGE_TRI, GRAPH, 3, 4), (ISING, SPINS, 3, 5), (stat_of(KStarCount(2)), GRAPH, 2, 4)],
    )
    def test_against_oracle(self, stat, family, nA, nB):
        fn, joint, cond = _oracle_tables(stat, family, nA, nB)
        tables = build_volume_tables(stat, family, nA, nB).validate()
        assert tables.joint_dict() == dict(joint)
        kind, alph = oracle_kind(family)
        for code, x in enumerate(oracles.configurations(kind, nA, alph)):
            row = {tuple(int(v) for v in d): int(c)
                   for d, c in zip(tables.delta_keys, tables.conditional[code]) if c}
            assert row == dict(cond[x])

    def test_sum_rules(self):
        t = build_volume_tables(EDGE_TRI, GRAPH, 3, 5)
        assert t.marginal.sum() == 8
        assert (t.conditional.sum(axis=1) == 2 ** 7).all()
        assert t.joint.sum() == 2 ** 10
        rebuilt = np.zeros_like(t.joint)
        np.add.at(rebuilt, t.t_index, t.conditional)
        assert (rebuilt == t.joint).all()

    def test_checksum_deterministic(self):
        a = build_volume_tables(EDGE_TRI, GRAPH, 3, 4).checksum()
        b = build_volume_tables(EDGE_TRI, GRAPH, 3, 4).checksum()
        assert a == b and len(a) == 64

    def test_guard_names_size(self):
        with pytest.raises(SpaceTooLarge) as info:
            build_volume_tables(EDGE, GRAPH, 3, 6, guard=1000)
        assert info.value.size == 2 ** 15

    def test_ising_conditional_is_one(self):
        t = build_volume_tables(ISING, SPINS, 4, 5)
        assert [tuple(d) for d in t.delta_keys] == [(-1,), (1,)]
        assert (t.conditional == 1).all()

    def test_marginal_counter_matches_joint_rows(self):
        t = build_volume_tables(EDGE_TRI, GRAPH, 3, 4)
        rows = Counter()
        for (tk, _), c in t.joint_dict().items():
            rows[tk] += c
        assert {k: v // t.size_new for k, v in rows.items()} == t.marginal_dict()
