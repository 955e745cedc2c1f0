import pytest

from chromacomm.channel import MemorySession
from chromacomm.graph import Graph, gen_clique_union, gen_structured, partition_edges


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [(1, 2), (2, 3), (1, 3)])


@pytest.fixture
def single_edge():
    return Graph.from_edges(2, [(1, 2)])


@pytest.fixture
def path3():
    return gen_structured("path", 3)


@pytest.fixture
def k8_interleaved():
    return partition_edges(gen_clique_union(1, 7), "interleave")


@pytest.fixture
def session():
    return MemorySession(12345)

