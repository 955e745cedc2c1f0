"""
Utility functions for chromacomm
Contains helpers for bit widths, harmonic sums, seed handling and JSON-lines output
"""
import hashlib
import json
from fractions import Fraction
from typing import Any, Dict, List, TextIO


def bit_width(max_value: int) -> int:
    """Bits needed to send an integer known to lie in 0..max_value, i.e. ceil(log2(max_value + 1))

    A message always occupies at least one bit, so max_value = 0 still costs 1.
    """
    if max_value < 0:
        raise ValueError(f"max_value must be non-negative, got {max_value}")
    return max(1, max_value.bit_length())


def ceil_log2(value: int) -> int:
    """ceil(log2(value)) for value >= 1"""
    if value < 1:
        raise ValueError(f"ceil_log2 needs value >= 1, got {value}")
    return (value - 1).bit_length()


def harmonic(count: int) -> Fraction:
    """Exact harmonic number H_count"""
    return sum((Fraction(1, i) for i in range(1, count + 1)), Fraction(0))


def derive_seed(seed: int, purpose: str) -> int:
    """Derive an independent 64-bit seed for one purpose (graph, partition, ...) from a trial seed"""
    digest = hashlib.blake2b(f"{seed}:{purpose}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def parse_seed_range(text: str) -> List[int]:
    """Parse 'A..B' (inclusive) or a single integer into a list of seeds"""
    text = text.strip()
    if ".." in text:
        start_text, end_text = text.split("..", 1)
        start, end = int(start_text), int(end_text)
        if end < start:
            raise ValueError(f"Empty seed range: {text}")
        return list(range(start, end + 1))
    return [int(text)]


def write_jsonl_record(record: Dict[str, Any], stream: TextIO) -> None:
    """Write one JSON-lines record (sorted keys so output is reproducible)"""
    stream.write(json.dumps(record, sort_keys=True) + "\n")
