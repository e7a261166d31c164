import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mramsim.trace import (
    EVENT_STRIDE_NS,
    EventKind,
    InvalidSpec,
    MalformedLine,
    NonMonotoneTimestamp,
    SyntheticTraceSpec,
    TraceEvent,
    UnknownKind,
    generate_trace,
    parse_trace,
    serialize_trace,
)


class TestParse:
    def test_single_read(self):
        (ev,) = parse_trace(["100 R 0x1A40"])
        assert ev.timestamp == 100
        assert ev.kind is EventKind.READ
        assert ev.address == 0x1A40

    def test_writeback_letter(self):
        (ev,) = parse_trace(["5 W 0xff"])
        assert ev.kind is EventKind.WRITEBACK

    def test_empty_stream(self):
        assert parse_trace([]) == []
        assert parse_trace(io.StringIO("")) == []

    def test_comments_and_blank_lines_skipped(self):
        events = parse_trace(["# header", "", "1 R 0x0", "   ", "2 W 0x40"])
        assert [e.timestamp for e in events] == [1, 2]

    def test_non_monotone_rejected_with_line_number(self):
        with pytest.raises(NonMonotoneTimestamp) as exc:
            parse_trace(["100 R 0x10", "90 W 0x20"])
        assert exc.value.line_no == 2

    def test_equal_timestamps_allowed(self):
        assert len(parse_trace(["7 R 0x0", "7 W 0x40"])) == 2

    def test_unknown_kind(self):
        with pytest.raises(UnknownKind) as exc:
            parse_trace(["1 X 0x10"])
        assert exc.value.line_no == 1

    @pytest.mark.parametrize(
        "line",
        ["1 R", "1 R 0x10 extra", "abc R 0x10", "-5 R 0x10", "1 R 10", "1 R 0xZZ"],
    )
    def test_malformed_lines(self, line):
        with pytest.raises(MalformedLine):
            parse_trace([line])

    def test_rejects_whole_stream_on_first_error(self):
        # The good prefix must not leak out.
        with pytest.raises(MalformedLine):
            parse_trace(["1 R 0x0", "bogus", "3 R 0x40"])


class TestSerialize:
    def test_canonical_form(self):
        events = parse_trace(["# c", "1 R 0X1A40", "", "2 W 0xbeef"])
        assert serialize_trace(events) == "1 R 0x1a40\n2 W 0xbeef\n"

    def test_round_trip_of_canonical_text(self):
        text = "0 R 0x0\n10 W 0x40\n10 R 0x1a40\n"
        assert serialize_trace(parse_trace(io.StringIO(text))) == text

    def test_fill_events_have_no_text_form(self):
        with pytest.raises(ValueError):
            serialize_trace([TraceEvent(0, EventKind.WRITE_FILL, 0)])

    @given(
        st.lists(
            st.tuples(
                st.integers(min_value=0, max_value=2**30),
                st.sampled_from([EventKind.READ, EventKind.WRITEBACK]),
                st.integers(min_value=0, max_value=2**64 - 1),
            ),
            max_size=50,
        )
    )
    @settings(max_examples=50)
    def test_round_trip_any_events(self, rows):
        rows.sort(key=lambda r: r[0])
        events = [TraceEvent(ts, kind, addr) for ts, kind, addr in rows]
        parsed = parse_trace(io.StringIO(serialize_trace(events)))
        assert [(e.timestamp, e.kind, e.address) for e in parsed] == rows


class TestGenerate:
    def test_rejects_zero_events(self):
        with pytest.raises(InvalidSpec) as exc:
            generate_trace(SyntheticTraceSpec(event_count=0))
        assert exc.value.field == "event_count"

    @pytest.mark.parametrize(
        "kwargs,field",
        [
            ({"read_fraction": 1.5}, "read_fraction"),
            ({"reuse_locality": -0.1}, "reuse_locality"),
            ({"working_set_blocks": 0}, "working_set_blocks"),
            ({"window_size": 0}, "window_size"),
            ({"hot_fraction": 2.0}, "hot_fraction"),
            ({"hot_fraction": 0.5, "hot_blocks": 0}, "hot_blocks"),
        ],
    )
    def test_rejects_bad_fields(self, kwargs, field):
        with pytest.raises(InvalidSpec) as exc:
            generate_trace(SyntheticTraceSpec(event_count=10, **kwargs))
        assert exc.value.field == field

    def test_deterministic_for_seed(self):
        spec = SyntheticTraceSpec(event_count=100_000, read_fraction=0.7, seed=1)
        a = generate_trace(spec)
        b = generate_trace(spec)
        assert a == b
        assert serialize_trace(a) == serialize_trace(b)

    def test_different_seeds_differ(self):
        a = generate_trace(SyntheticTraceSpec(event_count=1000, seed=1))
        b = generate_trace(SyntheticTraceSpec(event_count=1000, seed=2))
        assert a != b

    def test_event_count_and_timestamps(self):
        events = generate_trace(SyntheticTraceSpec(event_count=500, seed=9))
        assert len(events) == 500
        assert [e.timestamp for e in events] == [i * EVENT_STRIDE_NS for i in range(500)]

    def test_read_fraction_within_two_points(self):
        events = generate_trace(
            SyntheticTraceSpec(event_count=10_000, read_fraction=0.7, seed=5)
        )
        reads = sum(e.kind is EventKind.READ for e in events)
        assert abs(reads / len(events) - 0.7) < 0.02

    def test_degenerate_locality_repeats_predecessor(self):
        events = generate_trace(
            SyntheticTraceSpec(
                event_count=2000, reuse_locality=1.0, window_size=1, seed=3
            )
        )
        addresses = [e.address for e in events]
        assert all(a == addresses[0] for a in addresses)

    def test_uniform_addresses_pass_chi_squared(self):
        from scipy.stats import chisquare

        blocks = 256
        events = generate_trace(
            SyntheticTraceSpec(
                event_count=100_000, working_set_blocks=blocks, reuse_locality=0.0, seed=11
            )
        )
        counts = [0] * blocks
        for e in events:
            counts[e.address // 64] += 1
        assert chisquare(counts).pvalue > 0.01

    def test_hot_region_sits_below_working_set(self):
        spec = SyntheticTraceSpec(
            event_count=20_000,
            working_set_blocks=1000,
            hot_fraction=0.5,
            hot_blocks=16,
            seed=2,
        )
        events = generate_trace(spec)
        hot = sum(e.address < 16 * 64 for e in events)
        assert abs(hot / len(events) - 0.5) < 0.02
        assert max(e.address for e in events) < (16 + 1000) * 64

    def test_hot_disabled_matches_legacy_stream(self):
        base = SyntheticTraceSpec(event_count=5000, reuse_locality=0.5, window_size=4, seed=7)
        with_field = SyntheticTraceSpec(
            event_count=5000, reuse_locality=0.5, window_size=4, seed=7, hot_fraction=0.0
        )
        assert generate_trace(base) == generate_trace(with_field)
