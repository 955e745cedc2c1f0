"""
Two-party channel with bit-exact transcript accounting
Provides public-coin randomness, an in-memory simulator and a TCP transport
"""
import hashlib
import logging
import socket
import struct
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

TWO_64 = 1 << 64

FRAME_HEADER = struct.Struct(">BH")  # sender id, label length
WIDTH_FIELD = struct.Struct(">I")


class ChannelError(RuntimeError):
    """Base class for channel failures"""
    pass


class ProtocolBugError(ChannelError):
    """A protocol tried to send something the channel cannot carry"""
    pass


class HandshakeError(ChannelError):
    """The two ends were configured with different shared seeds"""
    pass


class FrameError(ChannelError):
    """A wire frame was truncated, malformed or not the one the protocol expected"""
    pass


class SharedRandomnessError(ChannelError):
    """The parties' views of the public coins diverged"""
    pass


class Party(Enum):
    ALICE = 0
    BOB = 1

    @property
    def other(self) -> "Party":
        return Party.BOB if self is Party.ALICE else Party.ALICE


@dataclass(frozen=True)
class Message:
    sender: Party
    label: str
    value: int
    width: int

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ProtocolBugError(f"Message '{self.label}' has width {self.width} < 1")
        if not 0 <= self.value < (1 << self.width):
            raise ProtocolBugError(
                f"Message '{self.label}' value {self.value} does not fit in {self.width} bits"
            )


@dataclass
class Transcript:
    """Ordered record of every message; total_bits is the communication cost"""
    messages: List[Message] = field(default_factory=list)
    total_bits: int = 0

    def append(self, message: Message) -> None:
        self.messages.append(message)
        self.total_bits += message.width

    def __len__(self) -> int:
        return len(self.messages)

    @property
    def rounds(self) -> int:
        """Number of maximal runs of consecutive messages from the same sender"""
        rounds = 0
        previous: Optional[Party] = None
        for message in self.messages:
            if message.sender is not previous:
                rounds += 1
                previous = message.sender
        return rounds

    def bits_by_label(self) -> Dict[str, int]:
        totals: Dict[str, int] = {}
        for message in self.messages:
            totals[message.label] = totals.get(message.label, 0) + message.width
        return totals


class SharedRandomStream:
    """Public-coin stream both parties read in lockstep

    Backed by numpy's PCG64 bit generator seeded through SeedSequence. Only raw
    64-bit outputs are consumed and every distribution below is derived from
    them here, so a seed yields the same draws on every platform.
    """

    def __init__(self, seed: int):
        if not 0 <= seed < TWO_64:
            raise ValueError(f"Shared seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.position = 0
        self._bits = np.random.PCG64(seed)

    def _raw(self) -> int:
        self.position += 1
        return int(self._bits.random_raw())

    def uniform(self, range_size: int) -> int:
        """Uniform integer in 0..range_size-1 by rejection on raw 64-bit words"""
        if range_size < 1:
            raise ValueError(f"range_size must be >= 1, got {range_size}")
        if range_size == 1:
            return 0
        limit = TWO_64 - (TWO_64 % range_size)
        while True:
            word = self._raw()
            if word < limit:
                return word % range_size

    def permutation(self, n: int) -> List[int]:
        """Fisher-Yates shuffle of 1..n; result lists vertices first to last"""
        if n < 0:
            raise ValueError(f"n must be non-negative, got {n}")
        items = list(range(1, n + 1))
        for i in range(n - 1, 0, -1):
            j = self.uniform(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def subset_mask(self, m: int, p: Union[Fraction, float]) -> np.ndarray:
        """Boolean mask of length m, entry i set independently with probability p"""
        p = Fraction(p)
        if p >= 1:
            return np.ones(m, dtype=bool)
        if p <= 0 or m == 0:
            return np.zeros(m, dtype=bool)
        threshold = np.uint64(int(p * TWO_64))
        words = self._bits.random_raw(m)
        self.position += m
        return words < threshold

    def subset(self, m: int, p: Union[Fraction, float]) -> List[int]:
        """Sorted subset of 1..m with independent Bernoulli(p) membership"""
        return [int(i) + 1 for i in np.flatnonzero(self.subset_mask(m, p))]


Value = Union[int, Callable[[], int]]


class Session(ABC):
    """One protocol execution: a transcript plus access to the public coins

    `parties` lists the parties whose private input lives in this process. A
    value passed to send_uint may be a callable so that only the party that
    owns the input ever evaluates it.
    """

    def __init__(self, parties: Tuple[Party, ...]):
        self.parties = parties
        self.transcript = Transcript()

    @property
    def total_bits(self) -> int:
        return self.transcript.total_bits

    def is_local(self, party: Party) -> bool:
        return party in self.parties

    @abstractmethod
    def send_uint(self, sender: Party, label: str, value: Value, width: int) -> int:
        """Deliver value from sender; returns the value as the receiver sees it"""

    @abstractmethod
    def uniform(self, range_size: int) -> int:
        pass

    @abstractmethod
    def permutation(self, n: int) -> List[int]:
        pass

    @abstractmethod
    def subset(self, m: int, p: Union[Fraction, float]) -> List[int]:
        pass

    def close(self) -> None:
        pass

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def _evaluate(value: Value) -> int:
    return int(value() if callable(value) else value)


class MemorySession(Session):
    """Both parties simulated in one process

    Each party keeps its own copy of the public-coin stream; every draw is
    taken from both copies and compared.
    """

    def __init__(self, seed: int):
        super().__init__((Party.ALICE, Party.BOB))
        self.seed = seed
        self._streams = (SharedRandomStream(seed), SharedRandomStream(seed))

    def send_uint(self, sender: Party, label: str, value: Value, width: int) -> int:
        message = Message(sender, label, _evaluate(value), width)
        self.transcript.append(message)
        return message.value

    def _agree(self, alice_view, bob_view, what: str):
        if isinstance(alice_view, np.ndarray):
            same = np.array_equal(alice_view, bob_view)
        else:
            same = alice_view == bob_view
        if not same:
            raise SharedRandomnessError(f"Parties derived different {what} from the shared stream")
        return alice_view

    def uniform(self, range_size: int) -> int:
        alice, bob = self._streams
        return self._agree(alice.uniform(range_size), bob.uniform(range_size), "uniform draws")

    def permutation(self, n: int) -> List[int]:
        alice, bob = self._streams
        return self._agree(alice.permutation(n), bob.permutation(n), "permutations")

    def subset(self, m: int, p: Union[Fraction, float]) -> List[int]:
        alice, bob = self._streams
        return self._agree(alice.subset(m, p), bob.subset(m, p), "subsets")

    def subset_mask(self, m: int, p: Union[Fraction, float]) -> np.ndarray:
        alice, bob = self._streams
        return self._agree(alice.subset_mask(m, p), bob.subset_mask(m, p), "subsets")


def seed_fingerprint(seed: int) -> bytes:
    """8-byte digest of the shared seed exchanged in the handshake"""
    return hashlib.blake2b(seed.to_bytes(8, "big"), digest_size=8).digest()


def encode_frame(message: Message) -> bytes:
    """Sender id, label length + UTF-8 label, bit width, then MSB-first payload bytes"""
    label = message.label.encode("utf-8")
    payload_len = (message.width + 7) // 8
    padded = message.value << (payload_len * 8 - message.width)
    return (
        FRAME_HEADER.pack(message.sender.value, len(label))
        + label
        + WIDTH_FIELD.pack(message.width)
        + padded.to_bytes(payload_len, "big")
    )


class SocketSession(Session):
    """One party's end of a TCP connection to the other party"""

    def __init__(self, role: Party, sock: socket.socket, shared_seed: int):
        super().__init__((role,))
        self.role = role
        self.seed = shared_seed
        self.wire_bytes = 0
        self._sock = sock
        self._stream = SharedRandomStream(shared_seed)

    @property
    def payload_bytes(self) -> int:
        return sum((m.width + 7) // 8 for m in self.transcript.messages)

    @property
    def framing_bytes(self) -> int:
        """Wire bytes spent on frame headers rather than message payloads"""
        return self.wire_bytes - self.payload_bytes

    def handshake(self) -> None:
        mine = seed_fingerprint(self.seed)
        self._sock.sendall(mine)
        theirs = self._recv_exact(8)
        if theirs != mine:
            raise HandshakeError(
                f"Seed fingerprint mismatch: local {mine.hex()}, peer {theirs.hex()}"
            )
        logging.info(f"{self.role.name} handshake complete (seed fingerprint {mine.hex()})")

    def _recv_exact(self, count: int) -> bytes:
        chunks = []
        remaining = count
        while remaining:
            chunk = self._sock.recv(remaining)
            if not chunk:
                raise FrameError(f"Connection closed with {remaining} of {count} bytes outstanding")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)

    def _read_frame(self) -> Message:
        sender_id, label_len = FRAME_HEADER.unpack(self._recv_exact(FRAME_HEADER.size))
        try:
            sender = Party(sender_id)
            label = self._recv_exact(label_len).decode("utf-8")
        except (ValueError, UnicodeDecodeError) as e:
            raise FrameError(f"Corrupt frame header: {e}") from e
        (width,) = WIDTH_FIELD.unpack(self._recv_exact(WIDTH_FIELD.size))
        if width < 1:
            raise FrameError(f"Frame '{label}' announces width {width}")
        payload_len = (width + 7) // 8
        padded = int.from_bytes(self._recv_exact(payload_len), "big")
        pad_bits = payload_len * 8 - width
        if padded & ((1 << pad_bits) - 1):
            raise FrameError(f"Frame '{label}' has non-zero padding bits")
        self.wire_bytes += FRAME_HEADER.size + label_len + WIDTH_FIELD.size + payload_len
        return Message(sender, label, padded >> pad_bits, width)

    def send_uint(self, sender: Party, label: str, value: Value, width: int) -> int:
        if sender is self.role:
            message = Message(sender, label, _evaluate(value), width)
            frame = encode_frame(message)
            self._sock.sendall(frame)
            self.wire_bytes += len(frame)
        else:
            message = self._read_frame()
            if (message.sender, message.label, message.width) != (sender, label, width):
                raise FrameError(
                    f"Expected '{label}' ({width} bits) from {sender.name}, "
                    f"received '{message.label}' ({message.width} bits) from {message.sender.name}"
                )
        self.transcript.append(message)
        return message.value

    def uniform(self, range_size: int) -> int:
        return self._stream.uniform(range_size)

    def permutation(self, n: int) -> List[int]:
        return self._stream.permutation(n)

    def subset(self, m: int, p: Union[Fraction, float]) -> List[int]:
        return self._stream.subset(m, p)

    def subset_mask(self, m: int, p: Union[Fraction, float]) -> np.ndarray:
        return self._stream.subset_mask(m, p)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


def open_socket_session(
    role: Party,
    address: Tuple[str, int],
    shared_seed: int,
    listener: Optional[socket.socket] = None,
    timeout: float = 10.0,
    retries: int = 50,
) -> SocketSession:
    """Connect the two parties over TCP: Alice accepts, Bob connects

    Alice may pass an already-bound `listener` (useful with port 0).
    """
    if role is Party.ALICE:
        own_listener = listener is None
        server = socket.create_server(address) if own_listener else listener
        server.settimeout(timeout)
        try:
            conn, peer = server.accept()
        finally:
            if own_listener:
                server.close()
        logging.info(f"ALICE accepted connection from {peer}")
    else:
        conn = None
        for attempt in range(retries):
            try:
                conn = socket.create_connection(address, timeout=timeout)
                break
            except ConnectionRefusedError:
                time.sleep(0.1)
        if conn is None:
            raise ChannelError(f"BOB could not connect to {address} after {retries} attempts")
        logging.info(f"BOB connected to {address}")

    conn.settimeout(timeout)
    conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    session = SocketSession(role, conn, shared_seed)
    try:
        session.handshake()
    except Exception:
        session.close()
        raise
    return session


# Functional spellings of the session operations

def send_uint(session: Session, sender: Party, label: str, value: Value, width: int) -> int:
    return session.send_uint(sender, label, value, width)


def shared_uniform(stream, range_size: int) -> int:
    return stream.uniform(range_size)


def shared_permutation(stream, n: int) -> List[int]:
    return stream.permutation(n)


def shared_subset(stream, m: int, p: Union[Fraction, float]) -> List[int]:
    return stream.subset(m, p)


def total_bits(session: Session) -> int:
    return session.total_bits
