"""
Counting proper colorings at desk scale
Exact counts, the ((Delta+1)/e)^n lower bound, Monte Carlo estimates, and cover sets
of colorings backing the non-deterministic protocol
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .channel import SharedRandomStream
from .graph import Coloring, Graph, PartitionedGraph, monochromatic_edges, verify_coloring
from .utils import bit_width

DEFAULT_EXACT_MAX_VERTICES = 16
DEFAULT_COVER_MAX_VERTICES = 5
DEFAULT_COVER_MAX_DELTA = 4
DEFAULT_MC_BATCH_SIZE = 4096


class CountingLimitError(ValueError):
    """The requested instance is beyond what exhaustive methods handle"""
    pass


@dataclass
class ColoringCount:
    n: int
    delta: int
    q: int
    bound: float
    exact_count: Optional[int] = None
    trials: int = 0
    mc_fraction: Optional[float] = None
    mc_std_error: Optional[float] = None

    @property
    def estimated_count(self) -> Optional[float]:
        if self.mc_fraction is None:
            return None
        return self.mc_fraction * self.q ** self.n

    def to_dict(self) -> Dict:
        """JSON-lines record; sections that were not computed are left out"""
        record = {"n": self.n, "delta": self.delta, "q": self.q, "bound": self.bound}
        if self.exact_count is not None:
            record["exact_count"] = self.exact_count
        if self.mc_fraction is not None:
            record.update({
                "trials": self.trials,
                "fraction": self.mc_fraction,
                "std_error": self.mc_std_error,
                "estimated_count": self.estimated_count,
            })
        return record


def coloring_bound(n: int, delta: int) -> float:
    """((delta+1)/e)^n in double precision"""
    return ((delta + 1) / math.e) ** n


def estimate_proper_fraction(
    g: Graph,
    q: int,
    trials: int,
    seed: int = 0,
    batch_size: int = DEFAULT_MC_BATCH_SIZE,
) -> Tuple[float, float]:
    """Fraction of uniform colorings from [q]^n that are proper, with its standard error"""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = np.random.Generator(np.random.PCG64(seed))
    edges = np.array(g.sorted_edges(), dtype=np.int64).reshape(-1, 2) - 1
    proper = 0
    remaining = trials
    while remaining:
        batch = min(batch_size, remaining)
        colors = rng.integers(1, q + 1, size=(batch, g.n))
        if len(edges):
            ok = np.all(colors[:, edges[:, 0]] != colors[:, edges[:, 1]], axis=1)
            proper += int(ok.sum())
        else:
            proper += batch
        remaining -= batch
    fraction = proper / trials
    return fraction, math.sqrt(fraction * (1.0 - fraction) / trials)


def count_report(
    g: Graph,
    q: Optional[int] = None,
    trials: int = 0,
    seed: int = 0,
    exact: bool = True,
    max_vertices: int = DEFAULT_EXACT_MAX_VERTICES,
    batch_size: int = DEFAULT_MC_BATCH_SIZE,
) -> ColoringCount:
    """Bound for one graph, plus the exact count when `exact` and a Monte Carlo estimate when trials > 0

    q defaults to max degree + 1. The exact count raises CountingLimitError above max_vertices.
    """
    q = g.max_degree + 1 if q is None else q
    report = ColoringCount(n=g.n, delta=g.max_degree, q=q, bound=coloring_bound(g.n, g.max_degree))
    if exact:
        report.exact_count = count_colorings_exact(g, q, max_vertices)
    if trials > 0:
        report.trials = trials
        report.mc_fraction, report.mc_std_error = estimate_proper_fraction(g, q, trials, seed, batch_size)
    return report


def all_graphs(n: int, max_degree: Optional[int] = None) -> List[Graph]:
    """Every labeled graph on 1..n, optionally only those with max degree <= max_degree"""
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    graphs = []
    for mask in range(1 << len(pairs)):
        edges = [pair for bit, pair in enumerate(pairs) if mask >> bit & 1]
        g = Graph.from_edges(n, edges)
        if max_degree is None or g.max_degree <= max_degree:
            graphs.append(g)
    return graphs


@dataclass
class CoverSet:
    """Colorings of [Delta+1]^n such that every graph with max degree <= Delta has a proper member"""
    n: int
    delta: int
    colorings: List[Coloring] = field(default_factory=list)
    graphs: List[Graph] = field(default_factory=list)
    witnesses: List[int] = field(default_factory=list)
    draws: int = 0

    @property
    def certificate_bits(self) -> int:
        """Bits the prover needs to name one member"""
        return bit_width(max(len(self.colorings) - 1, 0))

    def witness_for(self, g: Graph) -> Optional[int]:
        for index, coloring in enumerate(self.colorings):
            if verify_coloring(g, coloring, self.delta + 1):
                return index
        return None


def build_cover_set(
    n: int,
    delta: int,
    seed: int = 0,
    max_vertices: int = DEFAULT_COVER_MAX_VERTICES,
    max_delta: int = DEFAULT_COVER_MAX_DELTA,
) -> CoverSet:
    """Sample colorings until every graph on n vertices with max degree <= delta is covered

    A sampled coloring is kept only if it covers a graph not yet covered.
    """
    if not 1 <= n <= max_vertices:
        raise CountingLimitError(f"Cover sets are limited to 1..{max_vertices} vertices, got n={n}")
    if not 0 <= delta <= max_delta:
        raise CountingLimitError(f"Cover sets are limited to delta in 0..{max_delta}, got {delta}")
    q = delta + 1
    cover = CoverSet(n, delta, graphs=all_graphs(n, delta))
    witnesses: List[Optional[int]] = [None] * len(cover.graphs)
    uncovered = set(range(len(cover.graphs)))
    stream = SharedRandomStream(seed)
    while uncovered:
        coloring = Coloring(tuple(stream.uniform(q) + 1 for _ in range(n)))
        cover.draws += 1
        newly = [i for i in uncovered if verify_coloring(cover.graphs[i], coloring, q)]
        if not newly:
            continue
        for i in newly:
            witnesses[i] = len(cover.colorings)
        cover.colorings.append(coloring)
        uncovered.difference_update(newly)
    cover.witnesses = [int(w) for w in witnesses]
    logging.info(
        f"Cover set for n={n}, delta={delta}: {len(cover.colorings)} colorings covering "
        f"{len(cover.graphs)} graphs after {cover.draws} draws"
    )
    return cover


def verify_cover_set(cover: CoverSet) -> bool:
    """Every enumerated graph's witness is proper, and the graph list is complete"""
    if len(cover.graphs) != len(all_graphs(cover.n, cover.delta)):
        return False
    return all(
        verify_coloring(g, cover.colorings[w], cover.delta + 1)
        for g, w in zip(cover.graphs, cover.witnesses)
    )


@dataclass(frozen=True)
class NonDetRun:
    index: int
    bits: int
    alice_accepts: bool
    bob_accepts: bool

    @property
    def accepted(self) -> bool:
        return self.alice_accepts and self.bob_accepts


def nondeterministic_protocol(pg: PartitionedGraph, cover: CoverSet) -> NonDetRun:
    """A prover names a cover coloring; each party accepts iff none of its own edges is monochromatic"""
    if pg.n != cover.n or pg.delta > cover.delta:
        raise CountingLimitError(
            f"Cover set for n={cover.n}, delta={cover.delta} does not apply to n={pg.n}, delta={pg.delta}"
        )
    index = cover.witness_for(pg.base)
    if index is None:
        raise CountingLimitError("Cover set has no proper coloring for this graph")
    coloring = cover.colorings[index]
    return NonDetRun(
        index=index,
        bits=cover.certificate_bits,
        alice_accepts=not monochromatic_edges(pg.edges_a, coloring),
        bob_accepts=not monochromatic_edges(pg.edges_b, coloring),
    )
