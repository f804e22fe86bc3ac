"""Sufficient statistics with exact integer values.

A :class:`StatisticSpec` is an ordered list of components.  Every component
returns integers; a component's rational ``scale`` multiplies the integer
before it meets the parameter, so grouping configurations by statistic value
never involves floating point.

Statistic values are returned as plain tuples of Python ints ("stat
vectors"), which hash and compare exactly.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import IncompleteTable, MissingCovariates, UnsupportedStatistic
from .statespace import Configuration, extend_configuration, size_of

# rows per batch when evaluating large code ranges
CHUNK = 1 << 16


def _fraction(v):
    f = Fraction(v) if not isinstance(v, str) else Fraction(v.strip())
    if f <= 0:
        raise ValueError(f"scale must be positive, got {v}")
    return f


@dataclass(frozen=True)
class CovariateTable:
    """Per-node covariates (node 1 is ``values[0]``)."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def require(self, n):
        if len(self.values) < n:
            raise MissingCovariates(
                f"covariates cover {len(self.values)} nodes, {n} needed"
            )
        return self.values[:n]


class Component:
    """Base class; subclasses are frozen dataclasses."""

    name = "component"
    needs_covariates = False

    def check_family(self, family):
        pass

    def evaluate(self, family, n, D, codes, cov):
        raise NotImplementedError

    def dyad_values(self, family, n, cov):
        """(n_dyads, 4) per-dyad value table, or None if not dyadic."""
        return None

    def to_json(self):
        raise NotImplementedError

    def _scale_json(self, d):
        if self.scale != 1:
            d["scale"] = str(self.scale)
        return d


def _need_graph(comp, family, undirected_only=False):
    if not family.is_graph:
        raise UnsupportedStatistic(f"{comp.name} needs a graph family, got {family.kind}")
    if undirected_only and family.directed:
        raise UnsupportedStatistic(f"{comp.name} is only defined for undirected graphs")


@dataclass(frozen=True)
class EdgeCount(Component):
    scale: Fraction = field(default=Fraction(1))
    name = "edges"

    def check_family(self, family):
        _need_graph(self, family)

    def dyad_values(self, family, n, cov):
        nd = n * (n - 1) // 2
        vals = np.zeros((nd, 4), dtype=np.int64)
        # state bit k set <=> arc k present; undirected uses states 0/1 only
        vals[:, 1] = 1
        if family.directed:
            vals[:, 2] = 1
            vals[:, 3] = 2
        return vals

    def evaluate(self, family, n, D, codes, cov):
        return D.sum(axis=1, dtype=np.int64)

    def to_json(self):
        return self._scale_json({"type": "edges"})


@dataclass(frozen=True)
class TriangleCount(Component):
    """Number of 3-node cliques, each counted once."""

    scale: Fraction = field(default=Fraction(1))
    name = "triangles"

    def check_family(self, family):
        _need_graph(self, family, undirected_only=True)

    def evaluate(self, family, n, D, codes, cov):
        return kernels.triangle_counts(D, n)

    def to_json(self):
        return self._scale_json({"type": "triangles"})


@dataclass(frozen=True)
class KStarCount(Component):
    """Number of k-stars: sum over nodes of C(degree, k)."""

    k: int = 2
    scale: Fraction = field(default=Fraction(1))
    name = "kstar"

    def __post_init__(self):
        if int(self.k) < 1:
            raise ValueError("k-star order must be >= 1")

    def check_family(self, family):
        _need_graph(self, family, undirected_only=True)

    def evaluate(self, family, n, D, codes, cov):
        return kernels.kstar_counts(D, n, int(self.k))

    def to_json(self):
        return self._scale_json({"type": "kstar", "k": int(self.k)})


@dataclass(frozen=True)
class IsingNearestNeighbor(Component):
    """Sum of products of adjacent spins (free boundary)."""

    scale: Fraction = field(default=Fraction(1))
    name = "ising"

    def check_family(self, family):
        if family.kind != "spin-sequence":
            raise UnsupportedStatistic(f"ising needs a spin-sequence family, got {family.kind}")

    def evaluate(self, family, n, D, codes, cov):
        return kernels.ising_energy(D)

    def to_json(self):
        return self._scale_json({"type": "ising"})


@dataclass(frozen=True)
class DyadicTerm(Component):
    """Sum over dyads of a value depending only on that dyad.

    ``entries`` holds ``(state, types, value)`` triples.  ``state`` is the
    dyad configuration: 0/1 for undirected graphs, and for directed graphs
    ``bit0 = arc lo->hi``, ``bit1 = arc hi->lo`` where lo < hi are node ids.
    ``types`` is ``None`` (any covariates) or the covariate pair of
    (lo, hi).  Undirected pairs match in either order; a directed entry
    also matches the mirrored dyad with its arcs swapped.  Unmatched dyads
    contribute 0.
    """

    entries: tuple = ()
    label: str = "dyadic"
    scale: Fraction = field(default=Fraction(1))
    name = "dyadic"

    def __post_init__(self):
        norm = []
        for state, types, value in self.entries:
            types = None if types is None else tuple(types)
            if types is not None and len(types) != 2:
                raise ValueError("dyadic types must be a covariate pair")
            if int(value) != value:
                raise ValueError("dyadic values must be integers; use scale for fractions")
            norm.append((int(state), types, int(value)))
        object.__setattr__(self, "entries", tuple(norm))

    @property
    def needs_covariates(self):
        return any(t is not None for _, t, _ in self.entries)

    def check_family(self, family):
        _need_graph(self, family)
        top = 3 if family.directed else 1
        for state, _, _ in self.entries:
            if not 0 <= state <= top:
                raise UnsupportedStatistic(f"dyad state {state} invalid for {family.kind}")

    def dyad_values(self, family, n, cov):
        directed = family.directed
        covs = None
        if self.needs_covariates:
            if cov is None:
                raise MissingCovariates(f"dyadic term {self.label!r} needs covariates")
            covs = cov.require(n)
        table = {(state, types): value for state, types, value in self.entries}
        nd = n * (n - 1) // 2
        vals = np.zeros((nd, 4), dtype=np.int64)
        states = range(4) if directed else range(2)
        for j in range(1, n):
            for i in range(j):
                d = j * (j - 1) // 2 + i
                pair = (covs[i], covs[j]) if covs is not None else None
                for st in states:
                    vals[d, st] = self._value(table, st, pair, directed)
        return vals

    @staticmethod
    def _value(table, st, pair, directed):
        if pair is not None:
            if (st, pair) in table:
                return table[(st, pair)]
            swapped = ((st & 1) << 1 | (st >> 1)) if directed else st
            rev = (pair[1], pair[0])
            if (swapped, rev) in table:
                return table[(swapped, rev)]
        return table.get((st, None), 0)

    def evaluate(self, family, n, D, codes, cov):
        vals = self.dyad_values(family, n, cov)
        return kernels.dyadic_sum(D, vals, family.directed)

    def to_json(self):
        out = {
            "type": "dyadic",
            "label": self.label,
            "entries": [
                {"state": s, **({"types": list(t)} if t is not None else {}), "value": v}
                for s, t, v in self.entries
            ],
        }
        return self._scale_json(out)


@dataclass(frozen=True)
class LookupTable(Component):
    """Explicit statistic values for every configuration of each listed size.

    ``tables`` maps index-set size to a tuple of integers in canonical
    configuration order.  Build from symbols with :meth:`from_symbols`.
    """

    tables: tuple = ()  # ((n, values), ...) sorted by n
    label: str = "lookup"
    scale: Fraction = field(default=Fraction(1))
    name = "lookup"

    def __post_init__(self):
        items = self.tables.items() if isinstance(self.tables, dict) else self.tables
        norm = tuple(sorted((int(n), tuple(int(v) for v in vals)) for n, vals in items))
        object.__setattr__(self, "tables", norm)

    @classmethod
    def from_symbols(cls, family, tables, label="lookup", scale=1):
        """``tables``: {n: {symbol tuple: int}}; must be total on X_n."""
        out = {}
        for n, mapping in tables.items():
            n = int(n)
            N = family.size(n)
            vals = [None] * N
            for symbols, value in mapping.items():
                if not isinstance(symbols, tuple):
                    symbols = (symbols,)
                x = family.encode(n, symbols)
                if vals[x.code] is not None:
                    raise ValueError(f"duplicate lookup entry for {symbols}")
                vals[x.code] = int(value)
            missing = [i for i, v in enumerate(vals) if v is None]
            if missing:
                sym = family.decode(Configuration(n, missing[0]))
                raise IncompleteTable(
                    f"lookup table {label!r} at size {n} misses {len(missing)} "
                    f"configurations, first {sym}"
                )
            out[n] = vals
        return cls(tables=out, label=label, scale=_fraction(scale))

    def values_for(self, n):
        for m, vals in self.tables:
            if m == n:
                return vals
        raise IncompleteTable(f"lookup table {self.label!r} has no entries for size {n}")

    def check_family(self, family):
        for n, vals in self.tables:
            if len(vals) != family.size(n):
                raise IncompleteTable(
                    f"lookup table {self.label!r} at size {n} has {len(vals)} "
                    f"entries, X_{n} has {family.size(n)}"
                )

    def evaluate(self, family, n, D, codes, cov):
        if codes is None:
            raise UnsupportedStatistic("lookup tables need configuration codes")
        arr = np.asarray(self.values_for(n), dtype=np.int64)
        if arr.size != family.size(n):
            raise IncompleteTable(f"lookup table {self.label!r} is not total at size {n}")
        return arr[codes]

    def to_json_with(self, family):
        tables = {}
        for n, vals in self.tables:
            tables[str(n)] = {
                ",".join(str(s) for s in family.decode(Configuration(n, c))): v
                for c, v in enumerate(vals)
            }
        return self._scale_json({"type": "lookup", "label": self.label, "tables": tables})


@dataclass(frozen=True)
class StatisticSpec:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a statistic needs at least one component")
        object.__setattr__(self, "components", comps)

    @property
    def dimension(self):
        return len(self.components)

    @property
    def scales(self):
        return tuple(Fraction(c.scale) for c in self.components)

    def scale_vector(self):
        return np.array([float(s) for s in self.scales])

    @property
    def needs_covariates(self):
        return any(c.needs_covariates for c in self.components)

    @property
    def is_dyadic(self):
        return all(isinstance(c, (EdgeCount, DyadicTerm)) for c in self.components)

    def check_family(self, family):
        for c in self.components:
            c.check_family(family)

    def names(self):
        return [getattr(c, "label", None) or c.name for c in self.components]


def _check_cov(stat, cov, n):
    if stat.needs_covariates:
        if cov is None:
            raise MissingCovariates("statistic needs node covariates but none were given")
        cov.require(n)


def evaluate_digits(stat, family, n, D, codes=None, cov=None):
    """Integer statistics (rows, d) for a digit matrix of configurations on n."""
    n = size_of(n)
    _check_cov(stat, cov, n)
    out = np.empty((D.shape[0], stat.dimension), dtype=np.int64)
    for k, comp in enumerate(stat.components):
        out[:, k] = comp.evaluate(family, n, D, codes, cov)
    return out


def evaluate_codes(stat, family, n, codes, cov=None):
    """Integer statistics (len(codes), d) for int64 codes on {1..n}."""
    n = size_of(n)
    codes = np.asarray(codes, dtype=np.int64)
    radices = family.radices(n)
    out = np.empty((codes.size, stat.dimension), dtype=np.int64)
    for lo in range(0, codes.size, CHUNK):
        part = codes[lo : lo + CHUNK]
        D = kernels.digits_from_codes(part, radices)
        out[lo : lo + part.size] = evaluate_digits(stat, family, n, D, part, cov)
    return out


def eval_statistic(stat, family, x, cov=None):
    """Stat vector ``t_A(x)`` as a tuple of ints."""
    if x.base:
        raise ValueError("eval_statistic needs a full configuration")
    from .statespace import digits

    row = digits(family, x)[None, :]
    codes = np.array([x.code], dtype=np.int64) if x.code < 2**62 else None
    vals = evaluate_digits(stat, family, x.n, row, codes, cov)[0]
    return tuple(int(v) for v in vals)


def statistic_increment(stat, family, x_A, y, cov=None):
    """``t_B(x, y) - t_A(x)`` for y on the new sites of B."""
    x_B = extend_configuration(family, x_A, y)
    tb = eval_statistic(stat, family, x_B, cov)
    ta = eval_statistic(stat, family, x_A, cov)
    return tuple(b - a for a, b in zip(ta, tb))


def scaled(stat, t):
    """Real-valued statistic for an integer stat vector (or array of them)."""
    return np.asarray(t, dtype=float) * stat.scale_vector()
