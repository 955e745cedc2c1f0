"""
The slack-intersection subproblem: find an element of 1..m outside X and Y
Alice holds X, Bob holds Y, and the promise is |X| + |Y| <= m - k for some k >= 1
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import AbstractSet, FrozenSet, Iterable, Iterator, List, Optional, Sequence

from .channel import Party, Session
from .utils import bit_width, ceil_log2

DEFAULT_C_SAMPLE = 150


class PromiseViolationError(ValueError):
    """The instance breaks |X| + |Y| <= m - k, or a protocol answered inside X or Y"""
    pass


class BitBoundExceeded(RuntimeError):
    """A protocol spent more bits than its worst-case bound allows"""
    pass


@dataclass(frozen=True)
class SlackIntInstance:
    m: int
    x_set: FrozenSet[int]
    y_set: FrozenSet[int]
    k: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_set", frozenset(self.x_set))
        object.__setattr__(self, "y_set", frozenset(self.y_set))
        if self.m < 1:
            raise PromiseViolationError(f"Universe size must be >= 1, got {self.m}")
        if self.k < 1:
            raise PromiseViolationError(f"Slack k must be >= 1, got {self.k}")
        for name, items in (("X", self.x_set), ("Y", self.y_set)):
            stray = [e for e in items if not 1 <= e <= self.m]
            if stray:
                raise PromiseViolationError(f"{name} has elements outside 1..{self.m}: {sorted(stray)}")
        if len(self.x_set) + len(self.y_set) > self.m - self.k:
            raise PromiseViolationError(
                f"|X| + |Y| = {len(self.x_set) + len(self.y_set)} exceeds m - k = {self.m - self.k}"
            )

    @property
    def slack(self) -> int:
        return self.m - len(self.x_set) - len(self.y_set)


def brute_force_oracle(inst: SlackIntInstance) -> int:
    """Smallest element of 1..m in neither X nor Y"""
    for element in range(1, inst.m + 1):
        if element not in inst.x_set and element not in inst.y_set:
            return element
    raise PromiseViolationError(f"X and Y cover all of 1..{inst.m}")


def binary_search_bit_bound(size: int) -> int:
    """Worst-case bits of binary_search_protocol on a universe of the given size"""
    return 2 * bit_width(size) * ceil_log2(size)


def sampled_worst_case_bits(m: int) -> int:
    """Worst-case bits of sampled_slack_protocol: every guess tested, then one full search"""
    guesses = ceil_log2(m) + 1
    return guesses * (bit_width(m) + 1) + binary_search_bit_bound(m)


def _count_in(items: Optional[AbstractSet[int]], chunk: Sequence[int]):
    return lambda: sum(1 for e in chunk if e in items)


def _check_answer(element: int, x_set: Optional[AbstractSet[int]], y_set: Optional[AbstractSet[int]]) -> None:
    for name, items in (("X", x_set), ("Y", y_set)):
        if items is not None and element in items:
            raise PromiseViolationError(f"Protocol returned {element}, which lies in {name}")


def binary_search_protocol(
    session: Session,
    universe: Sequence[int],
    x_set: Optional[AbstractSet[int]],
    y_set: Optional[AbstractSet[int]],
) -> int:
    """Halve the universe until one free element remains

    Per level Alice sends |X ∩ L| and Bob |Y ∩ L| for L the first half (rounded
    up); the search follows L while it has slack, else the right half. A party
    whose set is held elsewhere passes None.
    """
    if not universe:
        raise PromiseViolationError("Binary search over an empty universe")
    bound = binary_search_bit_bound(len(universe))
    start_bits = session.total_bits
    current = list(universe)
    while len(current) > 1:
        half = (len(current) + 1) // 2
        left = current[:half]
        width = bit_width(len(left))
        a = session.send_uint(Party.ALICE, "count-XL", _count_in(x_set, left), width)
        b = session.send_uint(Party.BOB, "count-YL", _count_in(y_set, left), width)
        current = left if a + b < len(left) else current[half:]
    spent = session.total_bits - start_bits
    if spent > bound:
        raise BitBoundExceeded(f"Binary search on {len(universe)} elements used {spent} > {bound} bits")
    element = current[0]
    _check_answer(element, x_set, y_set)
    return element


def slack_test(
    session: Session,
    s: Sequence[int],
    x_set: Optional[AbstractSet[int]],
    y_set: Optional[AbstractSet[int]],
) -> bool:
    """Both parties learn whether |S ∩ X| + |S ∩ Y| < |S|"""
    if not s:
        return False
    a = session.send_uint(Party.ALICE, "test-count-XS", _count_in(x_set, s), bit_width(len(s)))
    verdict = session.send_uint(
        Party.BOB, "test-verdict", lambda: int(a + sum(1 for e in s if e in y_set) < len(s)), 1
    )
    return bool(verdict)


def sample_probability(m: int, k_guess: int, c_sample=DEFAULT_C_SAMPLE) -> Fraction:
    """min(c_sample * m / k_guess^2, 1) as an exact fraction"""
    if not 1 <= k_guess <= m:
        raise ValueError(f"Guess must satisfy 1 <= k <= m, got k={k_guess}, m={m}")
    p = Fraction(c_sample) * m / (k_guess * k_guess)
    return min(p, Fraction(1))


def guess_sequence(m: int) -> Iterator[int]:
    """m, ceil(m/2), ..., 1"""
    k = m
    while True:
        yield k
        if k == 1:
            return
        k = max(1, (k + 1) // 2)


def sampled_slack_protocol(
    session: Session,
    m: int,
    x_set: Optional[AbstractSet[int]],
    y_set: Optional[AbstractSet[int]],
    c_sample=DEFAULT_C_SAMPLE,
) -> int:
    """Search a random sample of 1..m, guessing the slack from m downwards

    For each guess the sample keeps every element with probability
    sample_probability(m, guess); the first sample that passes slack_test is
    binary-searched. The last guess samples everything, so under the promise the
    loop always ends.
    """
    if m < 1:
        raise ValueError(f"Universe size must be >= 1, got {m}")
    if Fraction(c_sample) < 1:
        raise ValueError(f"c_sample must be >= 1 so that the final guess samples every element, got {c_sample}")
    start_bits = session.total_bits
    for guess in guess_sequence(m):
        sample = session.subset(m, sample_probability(m, guess, c_sample))
        if slack_test(session, sample, x_set, y_set):
            logging.debug(f"Slack guess {guess} passed with |S| = {len(sample)}")
            element = binary_search_protocol(session, sample, x_set, y_set)
            break
    else:
        raise PromiseViolationError(f"No free element found in 1..{m}; X and Y leave no slack")
    spent = session.total_bits - start_bits
    bound = sampled_worst_case_bits(m)
    if spent > bound:
        raise BitBoundExceeded(f"Sampled slack protocol on m={m} used {spent} > {bound} bits")
    return element


def format_instance(inst: SlackIntInstance) -> str:
    """Corpus line 'm | X csv | Y csv'"""
    x_text = ",".join(str(e) for e in sorted(inst.x_set))
    y_text = ",".join(str(e) for e in sorted(inst.y_set))
    return f"{inst.m} | {x_text} | {y_text}"


def parse_instance(line: str) -> SlackIntInstance:
    parts = [part.strip() for part in line.split("|")]
    if len(parts) != 3:
        raise ValueError(f"Expected 'm | X | Y', got: {line!r}")

    def parse_set(text: str) -> FrozenSet[int]:
        return frozenset(int(item) for item in text.split(",") if item.strip())

    return SlackIntInstance(int(parts[0]), parse_set(parts[1]), parse_set(parts[2]))


def enumerate_disjoint_instances(m: int) -> Iterator[SlackIntInstance]:
    """Every assignment of 1..m to X, Y or neither that leaves at least one element free"""
    for code in range(3 ** m):
        x_set, y_set = set(), set()
        for element in range(1, m + 1):
            code, owner = divmod(code, 3)
            if owner == 1:
                x_set.add(element)
            elif owner == 2:
                y_set.add(element)
        if len(x_set) + len(y_set) <= m - 1:
            yield SlackIntInstance(m, frozenset(x_set), frozenset(y_set))


def overlapping_instance(m: int, k: int) -> SlackIntInstance:
    """X = {1..a}, Y = {1..b} with a + b = m - k

    The sets overlap, so slack is tight against the sizes while many small
    samples still land entirely inside X ∪ Y.
    """
    total = m - k
    a = total // 2
    return SlackIntInstance(m, frozenset(range(1, a + 1)), frozenset(range(1, total - a + 1)), k)


def instances_from_lines(lines: Iterable[str]) -> List[SlackIntInstance]:
    return [parse_instance(line) for line in lines if line.strip() and not line.lstrip().startswith("#")]
