"""
Bit-string gadget reduction
Each bit becomes a 4-cycle whose proper 3-colorings reveal the bit
"""
import logging
from dataclasses import dataclass
from typing import FrozenSet, Optional, Sequence

import numpy as np

from .channel import MemorySession, SharedRandomStream
from .graph import Coloring, Graph, PartitionedGraph, partition_edges
from .protocols import color_main, greedy_oracle

GADGET_SIZE = 4

# Vertex pairs that share a color in every proper 3-coloring of the bit-0 gadget
_EQUAL_PAIRS = ((1, 4), (2, 3))


class GadgetError(ValueError):
    pass


@dataclass(frozen=True)
class GadgetGraph:
    bits: str
    graph: Graph

    @property
    def n(self) -> int:
        return len(self.bits)

    def partitioned(self) -> PartitionedGraph:
        """All edges go to Alice"""
        return partition_edges(self.graph, "all_alice")


@dataclass
class RoundtripResult:
    bits: str
    decoded: str
    method: str
    total_bits: int = 0

    @property
    def ok(self) -> bool:
        return self.bits == self.decoded


def gadget_edges(bit: int) -> FrozenSet[tuple]:
    """4-cycle on 1..4: {1,3} and {2,4} always, then {1,2},{3,4} for 0 or {1,4},{2,3} for 1"""
    if bit == 0:
        extra = {(1, 2), (3, 4)}
    elif bit == 1:
        extra = {(1, 4), (2, 3)}
    else:
        raise GadgetError(f"Gadget bit must be 0 or 1, got {bit!r}")
    return frozenset({(1, 3), (2, 4)} | extra)


def _validate_bits(bits: str) -> None:
    if not bits:
        raise GadgetError("Cannot encode an empty bit string")
    stray = set(bits) - {"0", "1"}
    if stray:
        raise GadgetError(f"Bit string may contain only 0 and 1, found {sorted(stray)}")


def encode_bits(bits: str) -> GadgetGraph:
    """Disjoint union of gadgets; gadget i uses vertices 4(i-1)+1 .. 4i"""
    _validate_bits(bits)
    edges = []
    for index, bit in enumerate(bits):
        offset = GADGET_SIZE * index
        edges.extend((u + offset, v + offset) for u, v in gadget_edges(int(bit)))
    return GadgetGraph(bits, Graph.from_edges(GADGET_SIZE * len(bits), edges))


def decode_bit(c1: int, c2: int, c3: int, c4: int) -> int:
    colors = (None, c1, c2, c3, c4)
    return 0 if any(colors[u] == colors[v] for u, v in _EQUAL_PAIRS) else 1


def decode_bits(coloring: Coloring, n: int) -> str:
    if len(coloring) != GADGET_SIZE * n:
        raise GadgetError(f"Coloring has {len(coloring)} vertices, expected {GADGET_SIZE * n} for {n} gadgets")
    colors = coloring.colors
    return "".join(
        str(decode_bit(*colors[GADGET_SIZE * i: GADGET_SIZE * (i + 1)])) for i in range(n)
    )


def parse_bits_argument(text: str, seed: int = 0) -> str:
    """Literal bit string, or 'random:n' for n bits drawn from the seed"""
    if text.startswith("random:"):
        length = int(text.split(":", 1)[1])
        if length < 1:
            raise GadgetError(f"Random bit string length must be >= 1, got {length}")
        rng = np.random.Generator(np.random.PCG64(seed))
        return "".join(str(int(b)) for b in rng.integers(0, 2, size=length))
    _validate_bits(text)
    return text


def roundtrip(bits: str, seed: int = 0, method: str = "greedy", order: Optional[Sequence[int]] = None) -> RoundtripResult:
    """Encode, 3-color with greedy (shared random order unless given) or the main protocol, decode"""
    gadgets = encode_bits(bits)
    if method == "greedy":
        pi = list(order) if order is not None else SharedRandomStream(seed).permutation(gadgets.graph.n)
        coloring = greedy_oracle(gadgets.graph, pi, 3)
        result = RoundtripResult(bits, decode_bits(coloring, gadgets.n), method)
    elif method == "main":
        run = color_main(gadgets.partitioned(), MemorySession(seed))
        result = RoundtripResult(bits, decode_bits(run.coloring, gadgets.n), method, run.total_bits)
    else:
        raise ValueError(f"Unknown roundtrip method '{method}'. Choose from: greedy, main")
    logging.info(f"Roundtrip via {method}: {'PASS' if result.ok else 'FAIL'} ({len(bits)} bits)")
    return result
