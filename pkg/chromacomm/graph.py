"""
Graph construction, edge partitioning and coloring verification
Vertices are 1..n and colors are 1..q throughout
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

Edge = Tuple[int, int]

UNCOLORED = 0


class GraphError(ValueError):
    """Raised for invalid generator parameters or malformed graph files"""
    pass


class StructuredFamily(Enum):
    """Named deterministic graph families"""
    PATH = "path"
    CYCLE = "cycle"
    STAR = "star"
    COMPLETE_BIPARTITE = "complete_bipartite"


class PartitionMode(Enum):
    """How the edge set is split between Alice and Bob"""
    UNIFORM = "uniform"
    ALL_ALICE = "all_alice"
    ALL_BOB = "all_bob"
    INTERLEAVE = "interleave"
    OVERLAP = "overlap"  # each edge to Alice, Bob or both


def _normalize_choice(value: str) -> str:
    return value.strip().lower().replace("-", "_")


def _normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 1..n"""
    n: int
    edges: FrozenSet[Edge]
    adjacency: Tuple[FrozenSet[int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise GraphError(f"Vertex count must be non-negative, got {self.n}")
        neighbors: List[set] = [set() for _ in range(self.n + 1)]
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"Self-loop on vertex {u}")
            if u > v:
                raise GraphError(f"Edge ({u}, {v}) is not normalized (expected u < v)")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise GraphError(f"Edge ({u}, {v}) has an endpoint outside 1..{self.n}")
            neighbors[u].add(v)
            neighbors[v].add(u)
        # index 0 is an unused placeholder so adjacency[v] works for 1-based v
        object.__setattr__(self, "adjacency", tuple(frozenset(s) for s in neighbors))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        """Build a graph from unordered pairs, rejecting duplicates"""
        normalized = set()
        for u, v in edges:
            if u == v:
                raise GraphError(f"Self-loop on vertex {u}")
            edge = _normalize_edge(u, v)
            if edge in normalized:
                raise GraphError(f"Duplicate edge {edge}")
            normalized.add(edge)
        return cls(n, frozenset(normalized))

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> FrozenSet[int]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @cached_property
    def max_degree(self) -> int:
        return max((len(self.adjacency[v]) for v in range(1, self.n + 1)), default=0)

    def sorted_edges(self) -> List[Edge]:
        """Edges in lexicographic (min endpoint, max endpoint) order"""
        return sorted(self.edges)


@dataclass(frozen=True)
class PartitionedGraph:
    """A graph whose edges are split between Alice (edges_a) and Bob (edges_b)"""
    base: Graph
    edges_a: FrozenSet[Edge]
    edges_b: FrozenSet[Edge]
    delta: int
    allow_overlap: bool = False

    def __post_init__(self) -> None:
        if self.edges_a | self.edges_b != self.base.edges:
            raise GraphError("Partition does not cover exactly the edges of the base graph")
        if not self.allow_overlap and self.edges_a & self.edges_b:
            raise GraphError("Alice's and Bob's edge sets overlap")
        if self.delta != self.base.max_degree:
            raise GraphError(f"delta={self.delta} does not match max degree {self.base.max_degree}")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def is_disjoint(self) -> bool:
        return not (self.edges_a & self.edges_b)

    @cached_property
    def adjacency_a(self) -> Tuple[FrozenSet[int], ...]:
        return _adjacency(self.base.n, self.edges_a)

    @cached_property
    def adjacency_b(self) -> Tuple[FrozenSet[int], ...]:
        return _adjacency(self.base.n, self.edges_b)


def _adjacency(n: int, edges: Iterable[Edge]) -> Tuple[FrozenSet[int], ...]:
    neighbors: List[set] = [set() for _ in range(n + 1)]
    for u, v in edges:
        neighbors[u].add(v)
        neighbors[v].add(u)
    return tuple(frozenset(s) for s in neighbors)


@dataclass(frozen=True)
class Coloring:
    """Vertex colors, colors[v - 1] is the color of vertex v (UNCOLORED = 0 only mid-protocol)"""
    colors: Tuple[int, ...]

    @classmethod
    def from_sequence(cls, colors: Iterable[int]) -> "Coloring":
        return cls(tuple(int(c) for c in colors))

    def __getitem__(self, v: int) -> int:
        return self.colors[v - 1]

    def __len__(self) -> int:
        return len(self.colors)

    @property
    def is_complete(self) -> bool:
        return UNCOLORED not in self.colors


ColoringLike = Union[Coloring, Sequence[int]]


def _as_tuple(c: ColoringLike) -> Tuple[int, ...]:
    return c.colors if isinstance(c, Coloring) else tuple(c)


# Generators

def gen_clique_union(num_cliques: int, delta: int) -> Graph:
    """Disjoint union of num_cliques cliques K_{delta+1}"""
    if num_cliques < 1:
        raise GraphError(f"num_cliques must be positive, got {num_cliques}")
    if delta < 0:
        raise GraphError(f"delta must be non-negative, got {delta}")
    size = delta + 1
    edges = set()
    for index in range(num_cliques):
        offset = index * size
        for i in range(1, size + 1):
            for j in range(i + 1, size + 1):
                edges.add((offset + i, offset + j))
    return Graph(num_cliques * size, frozenset(edges))


def gen_random_bounded(n: int, delta: int, edge_prob: float, seed: int) -> Graph:
    """Sample G(n, edge_prob), then drop random edges at over-degree vertices until max degree <= delta"""
    if n < 1:
        raise GraphError(f"n must be at least 1, got {n}")
    if delta < 0:
        raise GraphError(f"delta must be non-negative, got {delta}")
    if not 0 <= edge_prob <= 1:
        raise GraphError(f"edge_prob must lie in [0, 1], got {edge_prob}")

    rng = np.random.Generator(np.random.PCG64(seed))
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < edge_prob
    edges = {(int(u) + 1, int(v) + 1) for u, v in zip(rows[keep], cols[keep])}

    degree = [0] * (n + 1)
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1

    removed = 0
    while True:
        over = {v for v in range(1, n + 1) if degree[v] > delta}
        if not over:
            break
        candidates = sorted(e for e in edges if e[0] in over or e[1] in over)
        u, v = candidates[int(rng.integers(len(candidates)))]
        edges.discard((u, v))
        degree[u] -= 1
        degree[v] -= 1
        removed += 1

    logging.debug(f"gen_random_bounded(n={n}, delta={delta}): kept {len(edges)} edges, removed {removed}")
    return Graph(n, frozenset(edges))


def gen_structured(family: Union[StructuredFamily, str], n: int) -> Graph:
    """Path, cycle, star (center 1) or complete bipartite floor(n/2) x ceil(n/2)"""
    family = StructuredFamily(_normalize_choice(family)) if isinstance(family, str) else family
    minimum = 3 if family is StructuredFamily.CYCLE else 2
    if n < minimum:
        raise GraphError(f"{family.value} needs n >= {minimum}, got {n}")

    if family is StructuredFamily.PATH:
        edges = [(i, i + 1) for i in range(1, n)]
    elif family is StructuredFamily.CYCLE:
        edges = [(i, i + 1) for i in range(1, n)] + [(1, n)]
    elif family is StructuredFamily.STAR:
        edges = [(1, i) for i in range(2, n + 1)]
    else:
        left = n // 2
        edges = [(u, v) for u in range(1, left + 1) for v in range(left + 1, n + 1)]
    return Graph.from_edges(n, edges)


# Partitioning

def partition_edges(g: Graph, mode: Union[PartitionMode, str] = PartitionMode.UNIFORM, seed: int = 0) -> PartitionedGraph:
    """Split g's edges between Alice and Bob; delta is taken from the whole graph"""
    mode = PartitionMode(_normalize_choice(mode)) if isinstance(mode, str) else mode
    ordered = g.sorted_edges()

    if mode is PartitionMode.ALL_ALICE:
        owners = [0] * len(ordered)
    elif mode is PartitionMode.ALL_BOB:
        owners = [1] * len(ordered)
    elif mode is PartitionMode.INTERLEAVE:
        owners = [index % 2 for index in range(len(ordered))]
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        high = 3 if mode is PartitionMode.OVERLAP else 2
        owners = [int(x) for x in rng.integers(0, high, size=len(ordered))]

    # owner 0 = Alice, 1 = Bob, 2 = both
    edges_a = frozenset(e for e, owner in zip(ordered, owners) if owner in (0, 2))
    edges_b = frozenset(e for e, owner in zip(ordered, owners) if owner in (1, 2))
    return PartitionedGraph(
        base=g,
        edges_a=edges_a,
        edges_b=edges_b,
        delta=g.max_degree,
        allow_overlap=mode is PartitionMode.OVERLAP,
    )


# Coloring checks and permutation statistics

def verify_coloring(g: Graph, c: ColoringLike, q: int) -> bool:
    """True iff every vertex has a color in 1..q and no edge is monochromatic"""
    colors = _as_tuple(c)
    if len(colors) != g.n:
        return False
    if any(not 1 <= color <= q for color in colors):
        return False
    return all(colors[u - 1] != colors[v - 1] for u, v in g.edges)


def monochromatic_edges(edges: Iterable[Edge], c: ColoringLike) -> List[Edge]:
    colors = _as_tuple(c)
    return sorted(e for e in edges if colors[e[0] - 1] == colors[e[1] - 1])


def positions(pi: Sequence[int]) -> Dict[int, int]:
    """Map vertex -> index in the ordering pi (pi lists vertices first to last)"""
    return {v: index for index, v in enumerate(pi)}


def left_degree(g: Graph, pi: Sequence[int], v: int) -> int:
    """Number of neighbors of v placed before v in pi"""
    pos = positions(pi)
    return sum(1 for u in g.neighbors(v) if pos[u] < pos[v])


def left_degrees(g: Graph, pi: Sequence[int]) -> List[int]:
    """left_degree for every vertex; index 0 unused"""
    pos = positions(pi)
    result = [0] * (g.n + 1)
    for u, v in g.edges:
        if pos[u] < pos[v]:
            result[v] += 1
        else:
            result[u] += 1
    return result


def slack_profile(g: Graph, pi: Sequence[int], delta: Optional[int] = None) -> List[int]:
    """k_v = delta + 1 - left_degree(v) for every vertex; index 0 unused"""
    delta = g.max_degree if delta is None else delta
    degrees = left_degrees(g, pi)
    return [0] + [delta + 1 - degrees[v] for v in range(1, g.n + 1)]


# Text files: "n m delta" header, then "u v" lines (partition files add "A", "B" or "AB")

def write_graph(g: Graph, path: Union[str, Path]) -> None:
    lines = [f"{g.n} {g.m} {g.max_degree}"]
    lines.extend(f"{u} {v}" for u, v in g.sorted_edges())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logging.info(f"Graph with {g.n} vertices and {g.m} edges saved to {path}")


def write_partition(pg: PartitionedGraph, path: Union[str, Path]) -> None:
    g = pg.base
    lines = [f"{g.n} {g.m} {pg.delta}"]
    for edge in g.sorted_edges():
        owner = ("A" if edge in pg.edges_a else "") + ("B" if edge in pg.edges_b else "")
        lines.append(f"{edge[0]} {edge[1]} {owner}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logging.info(f"Partition of {g.m} edges saved to {path}")


def _read_lines(path: Union[str, Path]) -> Tuple[Tuple[int, int, int], List[List[str]]]:
    lines = [line.split() for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines or len(lines[0]) != 3:
        raise GraphError(f"{path}: expected header 'n m delta'")
    try:
        n, m, delta = (int(token) for token in lines[0])
    except ValueError as e:
        raise GraphError(f"{path}: malformed header: {e}") from e
    body = lines[1:]
    if len(body) != m:
        raise GraphError(f"{path}: header announces {m} edges, found {len(body)}")
    return (n, m, delta), body


def _parse_edge(path: Union[str, Path], tokens: List[str]) -> Edge:
    try:
        u, v = int(tokens[0]), int(tokens[1])
    except (ValueError, IndexError) as e:
        raise GraphError(f"{path}: malformed edge line {' '.join(tokens)!r}") from e
    if u >= v:
        raise GraphError(f"{path}: edge line must have u < v, got {u} {v}")
    return (u, v)


def read_graph(path: Union[str, Path]) -> Graph:
    (n, _, delta), body = _read_lines(path)
    for tokens in body:
        if len(tokens) != 2:
            raise GraphError(f"{path}: expected 'u v', got {' '.join(tokens)!r}")
    g = Graph.from_edges(n, (_parse_edge(path, tokens) for tokens in body))
    if g.max_degree != delta:
        raise GraphError(f"{path}: header delta={delta} but max degree is {g.max_degree}")
    return g


def read_partition(path: Union[str, Path]) -> PartitionedGraph:
    (n, _, delta), body = _read_lines(path)
    edges, edges_a, edges_b = [], set(), set()
    for tokens in body:
        if len(tokens) != 3 or tokens[2] not in ("A", "B", "AB"):
            raise GraphError(f"{path}: expected 'u v A|B', got {' '.join(tokens)!r}")
        edge = _parse_edge(path, tokens)
        edges.append(edge)
        if "A" in tokens[2]:
            edges_a.add(edge)
        if "B" in tokens[2]:
            edges_b.add(edge)
    g = Graph.from_edges(n, edges)
    if g.max_degree != delta:
        raise GraphError(f"{path}: header delta={delta} but max degree is {g.max_degree}")
    return PartitionedGraph(
        base=g,
        edges_a=frozenset(edges_a),
        edges_b=frozenset(edges_b),
        delta=delta,
        allow_overlap=bool(edges_a & edges_b),
    )
