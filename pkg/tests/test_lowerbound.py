import itertools

import pytest

from chromacomm.channel import SharedRandomStream
from chromacomm.graph import Coloring, Graph, verify_coloring
from chromacomm.lowerbound import (
    GadgetError,
    decode_bit,
    decode_bits,
    encode_bits,
    gadget_edges,
    parse_bits_argument,
    roundtrip,
)
from chromacomm.protocols import greedy_oracle


class TestGadgetEdges:
    def test_zero(self):
        assert gadget_edges(0) == {(1, 3), (2, 4), (1, 2), (3, 4)}

    def test_one(self):
        assert gadget_edges(1) == {(1, 3), (2, 4), (1, 4), (2, 3)}

    @pytest.mark.parametrize("bit", [0, 1])
    def test_four_cycle(self, bit):
        g = Graph.from_edges(4, gadget_edges(bit))
        assert all(g.degree(v) == 2 for v in range(1, 5))

    def test_bad_bit(self):
        with pytest.raises(GadgetError):
            gadget_edges(2)


class TestEncode:
    def test_single_bit(self):
        gadgets = encode_bits("0")
        assert gadgets.graph.edges == gadget_edges(0)

    def test_offsets(self):
        gadgets = encode_bits("01")
        assert gadgets.graph.n == 8
        assert gadgets.graph.m == 8
        assert (5, 8) in gadgets.graph.edges and (6, 7) in gadgets.graph.edges
        assert gadgets.graph.max_degree == 2

    def test_all_edges_to_alice(self):
        pg = encode_bits("0110").partitioned()
        assert pg.edges_a == pg.base.edges and not pg.edges_b

    @pytest.mark.parametrize("bits", ["", "012", "ab"])
    def test_rejects_bad_strings(self, bits):
        with pytest.raises(GadgetError):
            encode_bits(bits)


class TestDecode:
    def test_examples(self):
        assert decode_bit(1, 2, 2, 1) == 0
        assert decode_bit(1, 1, 2, 2) == 1
        assert decode_bit(1, 2, 3, 1) == 0

    @pytest.mark.parametrize("bit", [0, 1])
    def test_every_proper_coloring_decodes(self, bit):
        g = Graph.from_edges(4, gadget_edges(bit))
        proper = 0
        for colors in itertools.product(range(1, 4), repeat=4):
            if verify_coloring(g, colors, 3):
                proper += 1
                assert decode_bit(*colors) == bit
        assert proper > 0

    def test_decode_bits(self):
        assert decode_bits(Coloring((1, 2, 2, 1)), 1) == "0"

    def test_length_mismatch(self):
        with pytest.raises(GadgetError):
            decode_bits(Coloring((1, 2, 2, 1)), 2)


def test_greedy_identity_roundtrip():
    gadgets = encode_bits("0110")
    coloring = greedy_oracle(gadgets.graph, range(1, 17), 3)
    assert decode_bits(coloring, 4) == "0110"


def test_all_length_eight_strings():
    for value in range(256):
        bits = format(value, "08b")
        assert roundtrip(bits, order=range(1, 33)).ok
        assert roundtrip(bits, seed=value).ok


def test_roundtrip_via_main_protocol():
    for seed in range(5):
        bits = parse_bits_argument("random:32", seed)
        result = roundtrip(bits, seed=seed, method="main")
        assert result.ok
        assert result.total_bits > 0


def test_random_orders():
    stream = SharedRandomStream(17)
    gadgets = encode_bits("1100101001")
    for _ in range(50):
        coloring = greedy_oracle(gadgets.graph, stream.permutation(gadgets.graph.n), 3)
        assert decode_bits(coloring, gadgets.n) == "1100101001"


class TestParseBits:
    def test_random_is_seeded(self):
        assert parse_bits_argument("random:16", 3) == parse_bits_argument("random:16", 3)
        assert len(parse_bits_argument("random:16", 3)) == 16

    def test_literal(self):
        assert parse_bits_argument("0101") == "0101"

    def test_bad_length(self):
        with pytest.raises(GadgetError):
            parse_bits_argument("random:0")


def test_unknown_method():
    with pytest.raises(ValueError):
        roundtrip("01", method="oracle")
