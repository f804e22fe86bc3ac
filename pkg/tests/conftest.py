import numpy as np
import pytest

import oracles
from projcheck.statespace import SiteSpaceFamily
from projcheck.statistics import (
    DyadicTerm,
    EdgeCount,
    IsingNearestNeighbor,
    KStarCount,
    LookupTable,
    StatisticSpec,
    TriangleCount,
)
from projcheck.spec_io import load_spec

GRAPH = SiteSpaceFamily("undirected-graph")
DIGRAPH = SiteSpaceFamily("directed-graph")
SPINS = SiteSpaceFamily("spin-sequence")
BITS = SiteSpaceFamily("binary-sequence")


def stat_of(*components):
    return StatisticSpec(tuple(components))


EDGE = stat_of(EdgeCount())
EDGE_TRI = stat_of(EdgeCount(), TriangleCount())
ISING = stat_of(IsingNearestNeighbor())


def oracle_stat(stat, family, cov=None):
    """Oracle statistic function x -> tuple for a library StatisticSpec."""
    cov_vals = None if cov is None else list(cov.values)
    directed = family.directed
    fns = []
    for c in stat.components:
        if isinstance(c, EdgeCount):
            fns.append(lambda x, n: oracles.edges(x, n))
        elif isinstance(c, TriangleCount):
            fns.append(oracles.triangles)
        elif isinstance(c, KStarCount):
            fns.append(lambda x, n, k=c.k: oracles.kstars(x, n, k))
        elif isinstance(c, IsingNearestNeighbor):
            fns.append(oracles.ising)
        elif isinstance(c, DyadicTerm):
            fns.append(lambda x, n, e=c.entries: oracles.dyadic(x, n, e, cov_vals, directed))
        elif isinstance(c, LookupTable):
            fns.append(_lookup_fn(c, family))
        else:
            raise TypeError(c)
    return lambda x, n: tuple(f(x, n) for f in fns)


def _lookup_fn(table, family):
    alph = family.alphabets
    maps = {}
    for n, vals in table.tables:
        xs = list(oracles.configurations("explicit-product", n, alph))
        maps[n] = dict(zip(xs, vals))
    return lambda x, n: maps[n][x]


def oracle_kind(family):
    return family.kind, (family.alphabets or None)


@pytest.fixture(scope="session")
def fixture_spec():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_spec(name)[0]
        return cache[name]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
