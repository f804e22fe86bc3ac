"""Site spaces over prefix index sets and exhaustive enumeration.

An index set is a prefix ``{1..n}``.  Its configurations are assignments of
one symbol per *site*: one site per index for sequence and explicit-product
families, one site per dyad (two per dyad when directed) for graphs.

Sites are ordered so that the sites of ``{1..n}`` are exactly the first
``site_count(n)`` sites of any larger index set.  For graphs the dyad
``(i, j)`` with ``i < j`` (0-based) sits at ``j*(j-1)/2 + i``; the directed
arcs of that dyad occupy ``2*d`` (``i -> j``) and ``2*d + 1`` (``j -> i``).

A configuration is stored as a mixed-radix integer ``code`` with site 0 the
least significant digit.  Consequently, for ``A = {1..n}`` inside
``B = {1..m}``::

    code_B = code_A + |X_A| * code_new

so projection is ``code_B % |X_A|`` and canonical enumeration is
``range(|X_B|)``.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, NotNested, SpaceTooLarge

DEFAULT_GUARD = 2**26

KINDS = (
    "binary-sequence",
    "spin-sequence",
    "undirected-graph",
    "directed-graph",
    "explicit-product",
)
GRAPH_KINDS = ("undirected-graph", "directed-graph")


def enumeration_guard():
    """Current guard on |X_A|, honouring ``PROJCHECK_GUARD``."""
    raw = os.environ.get("PROJCHECK_GUARD")
    if raw:
        return int(float(raw))
    return DEFAULT_GUARD


def check_guard(size, guard=None):
    guard = enumeration_guard() if guard is None else guard
    if guard >= 0 and size > guard:
        raise SpaceTooLarge(size, guard)


@dataclass(frozen=True)
class IndexSet:
    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"index set size must be >= 1, got {self.n}")

    def __le__(self, other):
        return self.n <= other.n


def size_of(A):
    """Accept an ``IndexSet`` or a plain int."""
    n = A.n if isinstance(A, IndexSet) else int(A)
    if n < 1:
        raise ValueError(f"index set size must be >= 1, got {n}")
    return n


@dataclass(frozen=True)
class SiteSpaceFamily:
    """Per-site alphabets and how they grow with the index set.

    ``alphabets`` is only used by ``explicit-product`` families: one tuple
    of symbols per index.
    """

    kind: str
    alphabets: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "explicit-product":
            alph = tuple(tuple(a) for a in self.alphabets)
            if not alph:
                raise ValueError("explicit-product family needs at least one alphabet")
            for a in alph:
                if len(a) == 0:
                    raise ValueError("every per-site alphabet must be non-empty")
                if len(set(a)) != len(a):
                    raise ValueError(f"alphabet {a} has repeated symbols")
            object.__setattr__(self, "alphabets", alph)
        elif self.alphabets:
            raise ValueError(f"{self.kind} family takes no explicit alphabets")

    @property
    def is_graph(self):
        return self.kind in GRAPH_KINDS

    @property
    def directed(self):
        return self.kind == "directed-graph"

    @property
    def max_n(self):
        return len(self.alphabets) if self.kind == "explicit-product" else None

    def site_count(self, n):
        n = size_of(n)
        if self.kind == "explicit-product" and n > len(self.alphabets):
            raise IndexOutOfRange(
                f"index set size {n} exceeds the {len(self.alphabets)} declared alphabets"
            )
        if self.kind == "undirected-graph":
            return n * (n - 1) // 2
        if self.kind == "directed-graph":
            return n * (n - 1)
        return n

    def radices(self, n):
        S = self.site_count(n)
        if self.kind == "explicit-product":
            return tuple(len(a) for a in self.alphabets[:S])
        return (2,) * S

    def size(self, n):
        """|X_A| as an exact integer."""
        return math.prod(self.radices(n))

    def new_size(self, n_sub, n_super):
        """|X_{B minus A}|."""
        return self.size(n_super) // self.size(n_sub)

    def site_symbols(self, s):
        if self.kind == "explicit-product":
            return self.alphabets[s]
        if self.kind == "spin-sequence":
            return (-1, 1)
        return (0, 1)

    def decode(self, x):
        """Tuple of symbols, one per site covered by ``x``."""
        start = self.site_count(x.base) if x.base else 0
        stop = self.site_count(x.n)
        out = []
        rest = x.code
        for s in range(start, stop):
            sym = self.site_symbols(s)
            rest, d = divmod(rest, len(sym))
            out.append(sym[d])
        return tuple(out)

    def encode(self, n, symbols, base=0):
        """Inverse of :meth:`decode`."""
        start = self.site_count(base) if base else 0
        stop = self.site_count(n)
        symbols = tuple(symbols)
        if len(symbols) != stop - start:
            raise ValueError(f"expected {stop - start} symbols, got {len(symbols)}")
        code = 0
        place = 1
        for s, v in zip(range(start, stop), symbols):
            sym = self.site_symbols(s)
            try:
                d = sym.index(v)
            except ValueError:
                raise ValueError(f"symbol {v!r} not in alphabet {sym} of site {s}") from None
            code += d * place
            place *= len(sym)
        return Configuration(n, code, base)


@dataclass(frozen=True, order=True)
class Configuration:
    """Packed assignment for the sites of ``{1..n}`` beyond ``{1..base}``.

    ``base == 0`` is an ordinary configuration on the whole index set;
    ``base > 0`` is an assignment to the new sites only.
    """

    n: int
    code: int
    base: int = field(default=0)

    def __post_init__(self):
        if self.code < 0:
            raise ValueError("configuration code must be non-negative")
        if self.base < 0 or (self.base and self.base > self.n):
            raise ValueError("base must lie in [0, n]")


def site_count(family, A):
    return family.site_count(size_of(A))


def configuration_codes(family, A, chunk=None, guard=None):
    """Canonical-order codes of X_A as an int64 array.

    ``chunk=(k, K)`` restricts to the k-th of K contiguous, near-equal slices
    of the canonical order.
    """
    n = size_of(A)
    N = family.size(n)
    check_guard(N, guard)
    lo, hi = 0, N
    if chunk is not None:
        k, K = chunk
        if not 0 <= k < K:
            raise ValueError(f"chunk index {k} out of range for {K} chunks")
        lo, hi = k * N // K, (k + 1) * N // K
    return np.arange(lo, hi, dtype=np.int64)


def enumerate_configurations(family, A, chunk=None, guard=None):
    """Yield every configuration of X_A once, in canonical order."""
    n = size_of(A)
    for c in configuration_codes(family, n, chunk=chunk, guard=guard):
        yield Configuration(n, int(c))


def project_configuration(family, x_B, A):
    """Restriction of ``x_B`` to the sites of the prefix ``A``."""
    n = size_of(A)
    if x_B.base:
        raise ValueError("cannot project a new-sites configuration")
    if n > x_B.n:
        raise NotNested(f"index set {{1..{n}}} is not contained in {{1..{x_B.n}}}")
    return Configuration(n, x_B.code % family.size(n))


def split_configuration(family, x_B, A):
    """(x_A, y) with y the assignment to the new sites."""
    x_A = project_configuration(family, x_B, A)
    n = size_of(A)
    return x_A, Configuration(x_B.n, x_B.code // family.size(n), base=n)


def extend_configuration(family, x_A, y):
    """Compose ``x_A`` on ``{1..n}`` with ``y`` on the new sites up to ``y.n``."""
    if y.base != x_A.n:
        raise NotNested(f"new sites start after {y.base}, base configuration has n={x_A.n}")
    return Configuration(y.n, x_A.code + family.size(x_A.n) * y.code)


def new_site_configurations(family, A, B, guard=None):
    """All assignments to the sites of B not in A, canonical order."""
    nA, nB = size_of(A), size_of(B)
    if nA > nB:
        raise NotNested(f"{{1..{nA}}} is not contained in {{1..{nB}}}")
    M = family.new_size(nA, nB)
    check_guard(M, guard)
    return [Configuration(nB, y, base=nA) for y in range(M)]


def digits(family, x):
    """uint8 site digits of a single full configuration (row vector)."""
    radices = family.radices(x.n)
    if x.code < 2**62:
        from .kernels import digits_from_codes

        return digits_from_codes(np.array([x.code], dtype=np.int64), radices)[0]
    out = np.empty(len(radices), dtype=np.uint8)
    rest = x.code
    for s, r in enumerate(radices):
        rest, out[s] = divmod(rest, r)
    return out


def from_digits(family, n, row):
    """Inverse of :func:`digits` (arbitrary size, exact)."""
    radices = family.radices(n)
    code = 0
    place = 1
    for d, r in zip(row, radices):
        code += int(d) * place
        place *= r
    return Configuration(n, code)


def graph_from_edges(family, n, edges):
    """Graph configuration on n nodes from 1-based (i, j) pairs."""
    if not family.is_graph:
        raise ValueError("graph_from_edges needs a graph family")
    code = 0
    for i, j in edges:
        i0, j0 = i - 1, j - 1
        if i0 == j0 or not (0 <= i0 < n and 0 <= j0 < n):
            raise ValueError(f"bad edge ({i}, {j}) for {n} nodes")
        lo, hi = min(i0, j0), max(i0, j0)
        d = hi * (hi - 1) // 2 + lo
        s = 2 * d + (0 if i0 < j0 else 1) if family.directed else d
        code |= 1 << s
    return Configuration(n, code)


def edges_of(family, x):
    """Sorted 1-based edge (or arc) list of a graph configuration."""
    out = []
    for j in range(1, x.n):
        for i in range(j):
            d = j * (j - 1) // 2 + i
            if family.directed:
                if (x.code >> (2 * d)) & 1:
                    out.append((i + 1, j + 1))
                if (x.code >> (2 * d + 1)) & 1:
                    out.append((j + 1, i + 1))
            elif (x.code >> d) & 1:
                out.append((i + 1, j + 1))
    return sorted(out)
