"""Minimal basic cuts of the doubled recipe graph and the reduced cut matrix.

The parallelization graph is doubled into a bipartite graph (left recipes,
mirrored right recipes, one arc per direction of every edge).  A basic cut is
a vertex cover of the arcs; minimal cuts are complements of maximal
independent sets.  Each cut collapses to a per-recipe weight vector with
entries in {0, 1/2, 1} (half per selected copy); the capacity models consume
the complementary rows (1 - weight).
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import DomainError, EnumerationBudgetError
from .recipes import ParallelGraph, build_parallel_graph
from . import redundancy

DEFAULT_NODE_BUDGET = 10**7

CACHE_ENV_VAR = "CLUSTERCAP_CACHE"


@dataclass(frozen=True)
class DoubledGraph:
    """Bipartite doubling of a ParallelGraph.

    Arc (i, j) means: left copy of recipe i to right copy of recipe j.  Every
    edge {i, j} of the source graph contributes the two arcs (i, j) and (j, i).
    """

    graph: ParallelGraph
    arcs: tuple[tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.graph.recipes)


@dataclass(frozen=True)
class BasicCut:
    """A minimal vertex cover of the doubled graph.

    `left` / `right` are 0/1 indicators per recipe for the two copies.
    """

    left: tuple[int, ...]
    right: tuple[int, ...]

    def selected(self) -> frozenset[tuple[str, int]]:
        sel = {("L", i) for i, v in enumerate(self.left) if v}
        sel |= {("R", i) for i, v in enumerate(self.right) if v}
        return frozenset(sel)

    def weights(self) -> tuple[Fraction, ...]:
        """Per-recipe cut weight (0, 1/2 or 1): half per selected copy."""
        return tuple(Fraction(l + r, 2) for l, r in zip(self.left, self.right))


@dataclass(frozen=True)
class CutMatrix:
    """Deduplicated cut weight vectors for one chamber count.

    Rows are sorted lexicographically by the complementary (1 - weight)
    entries, which is also the on-disk and CLI ordering.  Entries are exact
    dyadic rationals stored as floats (0.0, 0.5, 1.0).
    """

    n: int
    labels: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    reduced: bool

    def coeff_rows(self) -> tuple[tuple[float, ...], ...]:
        """The (1 - weight) rows used as makespan coefficients."""
        return tuple(tuple(1.0 - v for v in row) for row in self.rows)

    def nonzeros(self) -> int:
        """Nonzero entries across the coefficient rows."""
        return sum(1 for row in self.rows for v in row if v != 1.0)


def double_graph(g: ParallelGraph) -> DoubledGraph:
    arcs = []
    for i, j in g.edges:
        arcs.append((i, j))
        arcs.append((j, i))
    return DoubledGraph(graph=g, arcs=tuple(arcs))


def enumerate_minimal_cuts(
    dg: DoubledGraph, node_budget: int = DEFAULT_NODE_BUDGET
) -> list[BasicCut]:
    """All minimal vertex covers of the doubled graph.

    Complements of maximal independent sets, enumerated as maximal cliques of
    the complement graph (Bron-Kerbosch with pivoting, bitmask sets).
    Vertices with no incident arc are in every independent set, hence never
    selected by a cover.  Aborts with a budget error if the recursion exceeds
    `node_budget` nodes.
    """
    m = dg.size
    nv = 2 * m
    adj = [0] * nv
    for i, j in dg.arcs:
        adj[i] |= 1 << (m + j)
        adj[m + j] |= 1 << i
    full = (1 << nv) - 1
    comp = [(~adj[v]) & full & ~(1 << v) for v in range(nv)]
    out: list[int] = []
    nodes = 0

    def expand(r: int, p: int, x: int):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise EnumerationBudgetError(nodes, node_budget)
        if p == 0 and x == 0:
            out.append(r)
            return
        pux = p | x
        pivot, best = -1, -1
        mask = pux
        while mask:
            u = (mask & -mask).bit_length() - 1
            deg = (p & comp[u]).bit_count()
            if deg > best:
                pivot, best = u, deg
            mask &= mask - 1
        cand = p & ~comp[pivot]
        mask = cand
        while mask:
            v = (mask & -mask).bit_length() - 1
            bit = 1 << v
            expand(r | bit, p & comp[v], x & comp[v])
            p &= ~bit
            x |= bit
            mask &= mask - 1

    expand(0, full, 0)
    covers = []
    for ind in out:
        cov = full & ~ind
        covers.append(
            BasicCut(
                left=tuple(cov >> i & 1 for i in range(m)),
                right=tuple(cov >> (m + i) & 1 for i in range(m)),
            )
        )
    covers.sort(key=lambda c: (c.left, c.right))
    return covers


def cuts_to_matrix(g: ParallelGraph, cuts: list[BasicCut]) -> CutMatrix:
    """Collapse covers to their weight vectors and deduplicate.

    Mirror-symmetric covers (and any other covers sharing a weight profile)
    fold into a single row here.
    """
    distinct = {cut.weights() for cut in cuts}
    rows = sorted(distinct, key=lambda w: tuple(1 - v for v in w))
    return CutMatrix(
        n=g.n,
        labels=g.labels,
        rows=tuple(tuple(float(v) for v in w) for w in rows),
        reduced=False,
    )


def _reduce(matrix: CutMatrix) -> CutMatrix:
    kept = redundancy.reduce_to_minimal([list(r) for r in matrix.rows])
    rows = sorted((tuple(r) for r in kept), key=lambda w: tuple(1 - v for v in w))
    return CutMatrix(n=matrix.n, labels=matrix.labels, rows=tuple(rows), reduced=True)


def build_cut_matrix(
    n: int,
    reduce: bool = True,
    cache_dir: str | os.PathLike | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> CutMatrix:
    """End-to-end pipeline with a per-n disk cache for reduced matrices.

    graph -> doubled graph -> minimal covers -> weight rows -> (reduction).
    Reduced matrices are cached as CSV under the cache directory (overridable
    via the CLUSTERCAP_CACHE environment variable); raw matrices are always
    recomputed.
    """
    if reduce:
        path = cache_path(n, cache_dir)
        if path.is_file():
            cached = read_matrix_csv(path, reduced=True)
            if cached.n == n:
                return cached
    g = build_parallel_graph(n)
    raw = cuts_to_matrix(g, enumerate_minimal_cuts(double_graph(g), node_budget))
    if not reduce:
        return raw
    reduced = _reduce(raw)
    path = cache_path(n, cache_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(path, render_matrix_csv(reduced))
    return reduced


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "clustercap"


def cache_path(n: int, cache_dir: str | os.PathLike | None = None) -> Path:
    base = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    return base / f"cuts_n{n}.csv"


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


_ENTRY = {0.0: "1", 0.5: "0.5", 1.0: "0"}  # weight -> rendered (1 - weight)


def render_matrix_csv(matrix: CutMatrix) -> str:
    """CSV with recipe-label header; cells are the (1 - weight) coefficients."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(matrix.labels)
    for row in matrix.rows:
        writer.writerow([_ENTRY[v] for v in row])
    return buf.getvalue()


def write_matrix_csv(matrix: CutMatrix, path: str | os.PathLike):
    _atomic_write(Path(path), render_matrix_csv(matrix))


def read_matrix_csv(path: str | os.PathLike, reduced: bool) -> CutMatrix:
    """Parse a matrix CSV back into weight rows; validates half-integrality."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            labels = tuple(next(reader))
        except StopIteration:
            raise DomainError(f"{path}: empty cut matrix file") from None
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if len(cells) != len(labels):
                raise DomainError(f"{path}:{lineno}: expected {len(labels)} cells")
            row = []
            for cell in cells:
                if cell not in ("0", "0.5", "1"):
                    raise DomainError(f"{path}:{lineno}: bad entry {cell!r}")
                row.append(1.0 - float(cell))
            rows.append(tuple(row))
    n = max(len(lbl) for lbl in labels)
    if len(labels) != 2**n - 1:
        raise DomainError(f"{path}: header does not list all {2**n - 1} recipes")
    return CutMatrix(n=n, labels=labels, rows=tuple(rows), reduced=reduced)
