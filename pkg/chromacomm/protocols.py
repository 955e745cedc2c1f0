"""
End-to-end two-party (Delta+1)-coloring protocols

rejection      shared random color per trial, one bit per party per trial
main           sampled slack search per vertex over the palette 1..Delta+1
deterministic  binary search over the full palette, identity vertex order
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Set

from .channel import Party, Session, Transcript
from .graph import UNCOLORED, Coloring, Graph, PartitionedGraph, verify_coloring
from .slackint import (
    DEFAULT_C_SAMPLE,
    PromiseViolationError,
    binary_search_protocol,
    sampled_slack_protocol,
)
from .utils import harmonic

DEFAULT_TRIAL_CAP = 1_000_000


class ModelViolationError(RuntimeError):
    """The input breaks the communication model a protocol relies on"""
    pass


class TrialCapExceeded(RuntimeError):
    pass


class ColoringMismatchError(RuntimeError):
    """Alice's and Bob's reconstructed colorings differ"""
    pass


class PaletteTooSmallError(ValueError):
    pass


@dataclass
class ProtocolRun:
    protocol: str
    coloring: Coloring
    transcript: Transcript
    permutation: List[int]
    per_vertex_bits: List[int] = field(default_factory=list)

    @property
    def total_bits(self) -> int:
        return self.transcript.total_bits

    @property
    def rounds(self) -> int:
        return self.transcript.rounds


class PartyView:
    """What one party knows: its own edges and the coloring built so far"""

    def __init__(self, party: Party, adjacency: Sequence[frozenset], n: int):
        self.party = party
        self.adjacency = adjacency
        self.colors = [UNCOLORED] * (n + 1)

    def used_colors(self, v: int) -> Set[int]:
        """Colors already on v's neighbors across this party's edges"""
        colors = self.colors
        return {colors[u] for u in self.adjacency[v] if colors[u] != UNCOLORED}

    def assign(self, v: int, color: int) -> None:
        self.colors[v] = color

    def coloring(self) -> Coloring:
        return Coloring(tuple(self.colors[1:]))


def greedy_oracle(g: Graph, pi: Sequence[int], q: int) -> Coloring:
    """Color vertices in pi order with the smallest color free in the colored neighborhood"""
    colors = [UNCOLORED] * (g.n + 1)
    for v in pi:
        used = {colors[u] for u in g.neighbors(v)}
        color = next((c for c in range(1, q + 1) if c not in used), None)
        if color is None:
            raise PaletteTooSmallError(f"No free color for vertex {v} with q={q}")
        colors[v] = color
    return Coloring(tuple(colors[1:]))


def expected_rejection_cost(delta: int) -> Fraction:
    """Expected bits per vertex of the rejection protocol on (Delta+1)-clique unions: 2 * H_{Delta+1}"""
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta}")
    return 2 * harmonic(delta + 1)


def _views(pg: PartitionedGraph, session: Session) -> Dict[Party, PartyView]:
    if len(session.transcript):
        raise ModelViolationError("Protocol sessions must be fresh")
    views = {}
    if session.is_local(Party.ALICE):
        views[Party.ALICE] = PartyView(Party.ALICE, pg.adjacency_a, pg.n)
    if session.is_local(Party.BOB):
        views[Party.BOB] = PartyView(Party.BOB, pg.adjacency_b, pg.n)
    return views


def _require_disjoint(pg: PartitionedGraph, protocol: str) -> None:
    if not pg.is_disjoint:
        raise ModelViolationError(f"The {protocol} protocol needs disjoint edge sets for Alice and Bob")


def _used(views: Dict[Party, PartyView], party: Party, v: int) -> Optional[Set[int]]:
    view = views.get(party)
    return view.used_colors(v) if view is not None else None


def _finish(
    protocol: str,
    pg: PartitionedGraph,
    session: Session,
    views: Dict[Party, PartyView],
    order: List[int],
    per_vertex_bits: List[int],
) -> ProtocolRun:
    colorings = {party: view.coloring() for party, view in views.items()}
    if len(set(colorings.values())) > 1:
        raise ColoringMismatchError(f"{protocol}: parties hold different colorings")
    coloring = next(iter(colorings.values()))
    if len(views) == 2 and not verify_coloring(pg.base, coloring, pg.delta + 1):
        raise ModelViolationError(f"{protocol}: produced an improper coloring")
    logging.debug(f"{protocol}: {session.total_bits} bits over {pg.n} vertices")
    return ProtocolRun(protocol, coloring, session.transcript, order, per_vertex_bits)


def color_rejection(pg: PartitionedGraph, session: Session, trial_cap: int = DEFAULT_TRIAL_CAP) -> ProtocolRun:
    """Draw a shared color until neither party sees it on a colored neighbor

    Tolerates overlapping edge sets.
    """
    views = _views(pg, session)
    palette = pg.delta + 1
    order = session.permutation(pg.n)
    per_vertex_bits = []
    for v in order:
        before = session.total_bits
        for _ in range(trial_cap):
            color = session.uniform(palette) + 1
            a = session.send_uint(
                Party.ALICE, "trial-bit", lambda: int(color in views[Party.ALICE].used_colors(v)), 1
            )
            b = session.send_uint(
                Party.BOB, "trial-bit", lambda: int(color in views[Party.BOB].used_colors(v)), 1
            )
            if a == 0 and b == 0:
                break
        else:
            raise TrialCapExceeded(f"Vertex {v} found no free color in {trial_cap} trials")
        for view in views.values():
            view.assign(v, color)
        per_vertex_bits.append(session.total_bits - before)
    return _finish("rejection", pg, session, views, order, per_vertex_bits)


def color_main(pg: PartitionedGraph, session: Session, c_sample=DEFAULT_C_SAMPLE) -> ProtocolRun:
    """Per vertex, solve the slack-intersection problem on the palette with X, Y the neighbor colors

    The vertex's colored neighbors split across the two edge sets, so slack is
    Delta + 1 minus its left degree, at least 1.
    """
    _require_disjoint(pg, "main")
    views = _views(pg, session)
    palette = pg.delta + 1
    order = session.permutation(pg.n)
    per_vertex_bits = []
    for v in order:
        before = session.total_bits
        x_set = _used(views, Party.ALICE, v)
        y_set = _used(views, Party.BOB, v)
        if x_set is not None and y_set is not None and len(x_set) + len(y_set) > pg.delta:
            raise ModelViolationError(f"Vertex {v} has no slack: |X| + |Y| = {len(x_set) + len(y_set)}")
        try:
            color = sampled_slack_protocol(session, palette, x_set, y_set, c_sample)
        except PromiseViolationError as e:
            raise ModelViolationError(f"Vertex {v}: {e}") from e
        for view in views.values():
            view.assign(v, color)
        per_vertex_bits.append(session.total_bits - before)
    return _finish("main", pg, session, views, order, per_vertex_bits)


def color_deterministic(pg: PartitionedGraph, session: Session) -> ProtocolRun:
    """Binary search the full palette per vertex in identity order; uses no randomness"""
    _require_disjoint(pg, "deterministic")
    views = _views(pg, session)
    palette = list(range(1, pg.delta + 2))
    order = list(range(1, pg.n + 1))
    per_vertex_bits = []
    for v in order:
        before = session.total_bits
        try:
            color = binary_search_protocol(
                session, palette, _used(views, Party.ALICE, v), _used(views, Party.BOB, v)
            )
        except PromiseViolationError as e:
            raise ModelViolationError(f"Vertex {v}: {e}") from e
        for view in views.values():
            view.assign(v, color)
        per_vertex_bits.append(session.total_bits - before)
    return _finish("deterministic", pg, session, views, order, per_vertex_bits)


PROTOCOLS: Dict[str, Callable[..., ProtocolRun]] = {
    "rejection": color_rejection,
    "main": color_main,
    "deterministic": color_deterministic,
}


def run_protocol(
    name: str,
    pg: PartitionedGraph,
    session: Session,
    c_sample=DEFAULT_C_SAMPLE,
    trial_cap: int = DEFAULT_TRIAL_CAP,
) -> ProtocolRun:
    """Dispatch on a protocol selector string"""
    if name not in PROTOCOLS:
        raise ValueError(f"Unknown protocol '{name}'. Choose from: {', '.join(PROTOCOLS)}")
    if name == "rejection":
        return color_rejection(pg, session, trial_cap=trial_cap)
    if name == "main":
        return color_main(pg, session, c_sample=c_sample)
    return color_deterministic(pg, session)
