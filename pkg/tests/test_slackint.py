from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chromacomm.channel import MemorySession
from chromacomm.slackint import (
    BitBoundExceeded,
    PromiseViolationError,
    SlackIntInstance,
    binary_search_bit_bound,
    binary_search_protocol,
    brute_force_oracle,
    enumerate_disjoint_instances,
    format_instance,
    guess_sequence,
    instances_from_lines,
    overlapping_instance,
    parse_instance,
    sample_probability,
    sampled_slack_protocol,
    sampled_worst_case_bits,
    slack_test,
)
from chromacomm.utils import bit_width, ceil_log2


class TestInstance:
    def test_promise_enforced(self):
        with pytest.raises(PromiseViolationError):
            SlackIntInstance(3, {1, 2}, {3})
        with pytest.raises(PromiseViolationError):
            SlackIntInstance(3, {1}, set(), k=3)
        with pytest.raises(PromiseViolationError):
            SlackIntInstance(3, {4}, set())

    def test_slack(self):
        assert SlackIntInstance(6, {1, 2}, {3, 4}).slack == 2


class TestOracle:
    @pytest.mark.parametrize("m, x, y, expected", [
        (6, {1, 2}, {3, 4}, 5),
        (1, set(), set(), 1),
        (3, {3}, {1}, 2),
    ])
    def test_examples(self, m, x, y, expected):
        assert brute_force_oracle(SlackIntInstance(m, x, y)) == expected


class TestBinarySearch:
    def test_base_case_is_free(self, session):
        assert binary_search_protocol(session, [1], set(), set()) == 1
        assert session.total_bits == 0

    def test_right_branch(self, session):
        assert binary_search_protocol(session, [1, 2, 3, 4], {1}, {2}) == 3
        # widths 2 then 1, one count from each party per level
        assert session.total_bits == 6
        assert session.transcript.bits_by_label() == {"count-XL": 3, "count-YL": 3}

    def test_left_branch(self, session):
        assert binary_search_protocol(session, [1, 2], {2}, set()) == 1
        assert session.total_bits == 2

    def test_prefers_left_when_both_have_slack(self, session):
        assert binary_search_protocol(session, [1, 2, 3, 4], set(), set()) == 1

    def test_violation_detected(self, session):
        with pytest.raises(PromiseViolationError):
            binary_search_protocol(session, [1, 2], {1, 2}, set())

    def test_bound_values(self):
        assert binary_search_bit_bound(1) == 0
        assert binary_search_bit_bound(4) == 12
        assert binary_search_bit_bound(8) == 2 * 4 * 3


class TestSlackTest:
    def test_passes_with_slack(self, session):
        assert slack_test(session, [1, 2, 3], {1}, {2}) is True
        assert session.total_bits == 3

    def test_fails_without_slack(self, session):
        assert slack_test(session, [1, 2], {1}, {2}) is False

    def test_empty_sample(self, session):
        assert slack_test(session, [], {1}, set()) is False
        assert session.total_bits == 0


class TestSampleProbability:
    def test_examples(self):
        assert sample_probability(1000, 1000) == Fraction(3, 20)
        assert sample_probability(100, 50) == 1
        assert sample_probability(37, 1) == 1

    def test_custom_constant(self):
        assert sample_probability(128, 64, c_sample=1) == Fraction(1, 32)

    def test_guess_range(self):
        with pytest.raises(ValueError):
            sample_probability(10, 0)
        with pytest.raises(ValueError):
            sample_probability(10, 11)


class TestGuessSequence:
    def test_examples(self):
        assert list(guess_sequence(1)) == [1]
        assert list(guess_sequence(3)) == [3, 2, 1]
        assert list(guess_sequence(8)) == [8, 4, 2, 1]

    @pytest.mark.parametrize("m", range(1, 200))
    def test_length(self, m):
        assert len(list(guess_sequence(m))) == ceil_log2(m) + 1


class TestSampledProtocol:
    def test_single_element_universe(self, session):
        assert sampled_slack_protocol(session, 1, set(), set()) == 1
        assert session.total_bits == 2

    def test_answer_outside_sets(self):
        for seed in range(20):
            assert sampled_slack_protocol(MemorySession(seed), 6, {1, 2}, {3, 4}) in {5, 6}

    def test_full_universe_on_first_guess(self, session):
        sampled_slack_protocol(session, 100, {1, 2, 3}, {4})
        first = session.transcript.messages[0]
        assert first.label == "test-count-XS"
        assert first.width == bit_width(100)

    def test_promise_violation(self, session):
        with pytest.raises(PromiseViolationError):
            sampled_slack_protocol(session, 2, {1}, {2})

    def test_c_sample_below_one_rejected(self, session):
        with pytest.raises(ValueError):
            sampled_slack_protocol(session, 4, set(), set(), c_sample=0.5)

    @settings(max_examples=60, deadline=None)
    @given(data=st.data(), m=st.integers(min_value=1, max_value=300), seed=st.integers(0, 10 ** 6))
    def test_random_instances(self, data, m, seed):
        universe = list(range(1, m + 1))
        x_set = set(data.draw(st.lists(st.sampled_from(universe), max_size=m - 1)))
        y_room = m - 1 - len(x_set)
        y_set = set(data.draw(st.lists(st.sampled_from(universe), max_size=y_room))) if y_room else set()
        session = MemorySession(seed)
        element = sampled_slack_protocol(session, m, x_set, y_set, c_sample=1)
        assert element not in x_set and element not in y_set
        assert session.total_bits <= sampled_worst_case_bits(m)

    def test_mean_cost_flat_in_universe_size(self):
        # slack fixed at m/4: the sample stays near c_sample elements however large m is
        means = {}
        for exponent in range(6, 15, 2):
            m = 2 ** exponent
            inst = overlapping_instance(m, m // 4)
            bits = []
            for seed in range(30):
                session = MemorySession(seed)
                sampled_slack_protocol(session, m, inst.x_set, inst.y_set)
                bits.append(session.total_bits)
            means[m] = sum(bits) / len(bits)
        assert means[2 ** 6] <= means[2 ** 8]
        large = [means[2 ** e] for e in (8, 10, 12, 14)]
        assert max(large) <= 1.1 * min(large)
        assert max(large) < 80
        assert means[2 ** 14] < binary_search_bit_bound(2 ** 14) / 5

    def test_worst_case_formula(self):
        assert sampled_worst_case_bits(1) == 2
        assert sampled_worst_case_bits(8) == 4 * 5 + 24


@pytest.mark.slow
@pytest.mark.parametrize("m", range(1, 9))
def test_exhaustive_small_universes(m):
    for inst in enumerate_disjoint_instances(m):
        universe = list(range(1, m + 1))
        found = binary_search_protocol(MemorySession(0), universe, inst.x_set, inst.y_set)
        assert found not in inst.x_set | inst.y_set
        for seed in range(10):
            found = sampled_slack_protocol(MemorySession(seed), m, inst.x_set, inst.y_set)
            assert found not in inst.x_set | inst.y_set


def test_enumeration_counts():
    # assignments to X, Y or neither, minus those covering everything
    assert sum(1 for _ in enumerate_disjoint_instances(2)) == 9 - 4
    assert sum(1 for _ in enumerate_disjoint_instances(1)) == 1


class TestCorpusLines:
    def test_format(self):
        assert format_instance(SlackIntInstance(6, {2, 1}, {3, 4})) == "6 | 1,2 | 3,4"

    def test_parse_empty_sets(self):
        inst = parse_instance("3 |  | ")
        assert inst.m == 3 and not inst.x_set and not inst.y_set

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_instance("3 | 1")

    def test_lines_skip_comments(self):
        instances = instances_from_lines(["# corpus", "", "4 | 1 | 2"])
        assert len(instances) == 1 and instances[0].y_set == frozenset({2})


def test_overlapping_instance():
    inst = overlapping_instance(256, 64)
    assert len(inst.x_set) + len(inst.y_set) == 192
    assert inst.x_set <= inst.y_set or inst.y_set <= inst.x_set


def test_bit_bound_guard_fires(monkeypatch):
    import chromacomm.slackint as slackint

    monkeypatch.setattr(slackint, "binary_search_bit_bound", lambda size: 0)
    with pytest.raises(BitBoundExceeded):
        binary_search_protocol(MemorySession(0), [1, 2], set(), set())
