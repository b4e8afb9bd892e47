"""Tests for trust tables, fusion and link labels."""

from __future__ import annotations

import pytest

from pyhsrp.exceptions import BadWeights, ScoreOutOfRange, SelfReport, SelfTrust
from pyhsrp.kernel import fork_stream
from pyhsrp.trust import (
    NEUTRAL_PRIOR,
    LinkLabel,
    LinkQuality,
    Outcome,
    ReportKind,
    TrustClass,
    TrustConfig,
    TrustRecord,
    TrustReport,
    TrustTable,
    TrustWeights,
    classify,
    fuse,
    label_link,
)


class TestClassify:
    """Tests for the trust bands."""

    @pytest.mark.parametrize(
        ("score", "expected"),
        [
            (0.0, TrustClass.BAD),
            (0.4999999, TrustClass.BAD),
            (0.5, TrustClass.NEUTRAL),
            (0.7999999, TrustClass.NEUTRAL),
            (0.8, TrustClass.GOOD),
            (1.0, TrustClass.GOOD),
        ],
    )
    def test_band_boundaries(self, score: float, expected: TrustClass) -> None:
        """Lower bounds are inclusive."""
        assert classify(score) is expected

    @pytest.mark.parametrize("score", [-0.01, 1.01])
    def test_out_of_range(self, score: float) -> None:
        """Scores outside [0, 1] raise."""
        with pytest.raises(ScoreOutOfRange):
            classify(score)


class TestFusion:
    """Tests for fuse and the weights."""

    def test_fresh_record_is_neutral(self) -> None:
        """No evidence fuses to the neutral prior."""
        record = TrustRecord(peer=1)
        assert fuse(record, TrustWeights()) == pytest.approx(NEUTRAL_PRIOR)
        assert record.trust_class is TrustClass.NEUTRAL

    def test_weighted_sum(self) -> None:
        """Fused value is the convex combination."""
        record = TrustRecord(peer=1, reputation=0.2, recommendation=1.0)
        record.engagement.successes = 8
        expected = 0.5 * (9 / 10) + 0.3 * 0.2 + 0.2 * 1.0
        assert fuse(record, (0.5, 0.3, 0.2)) == pytest.approx(expected)

    @pytest.mark.parametrize(
        "weights", [(0.5, 0.5, 0.5), (1.2, -0.1, -0.1), (0.5, 0.5)]
    )
    def test_bad_weights(self, weights: tuple[float, ...]) -> None:
        """Weights must be three non-negative numbers summing to one."""
        with pytest.raises(BadWeights):
            fuse(TrustRecord(peer=1), weights)  # type: ignore[arg-type]

    def test_weights_dataclass_validates(self) -> None:
        """TrustWeights refuses a non-convex combination."""
        with pytest.raises(BadWeights):
            TrustWeights(0.9, 0.9, 0.0)

    def test_monotone_in_interactions(self) -> None:
        """A success never lowers and a failure never raises fused trust."""
        stream = fork_stream(77, "histories")
        table = TrustTable(0)
        for step in range(10_000):
            peer = 1 + stream.integer(0, 49)
            before = table.fused(peer)
            if stream.random() < 0.5:
                table.record_interaction(peer, Outcome.SUCCESS)
                assert table.fused(peer) >= before, step
            else:
                table.record_interaction(peer, Outcome.FAILURE)
                assert table.fused(peer) <= before, step


class TestTrustTable:
    """Tests for TrustTable."""

    def test_self_trust(self) -> None:
        """A node does not rate itself."""
        with pytest.raises(SelfTrust):
            TrustTable(4).record(4)

    def test_engagement_laplace(self) -> None:
        """Engagement is (s + 1) / (s + f + 2)."""
        table = TrustTable(0)
        table.record_interaction(1, Outcome.SUCCESS)
        table.record_interaction(1, Outcome.SUCCESS)
        assert table.record_interaction(1, Outcome.FAILURE) == pytest.approx(3 / 5)

    def test_unknown_peer_neutral(self) -> None:
        """Peers without a record are Neutral at the prior."""
        table = TrustTable(0)
        assert table.fused(7) == NEUTRAL_PRIOR
        assert table.trust_class(7) is TrustClass.NEUTRAL
        assert 7 not in table

    def test_single_failure_marks_bad(self) -> None:
        """With default weights one unbalanced failure drops a peer below Neutral."""
        table = TrustTable(0)
        table.record_interaction(3, Outcome.FAILURE)
        assert table.trust_class(3) is TrustClass.BAD

    def test_report_window(self) -> None:
        """Only the latest window reports per reporter count."""
        table = TrustTable(0, window=20)
        scores = [i / 24 for i in range(25)]
        for i, score in enumerate(scores):
            table.ingest_report(ReportKind.REPUTATION, TrustReport(5, 9, score, i))
        expected = sum(scores[-20:]) / 20
        assert table.aggregate(9, ReportKind.REPUTATION) == pytest.approx(expected)
        assert table.record(9).reputation == pytest.approx(expected)

    def test_bad_reporters_ignored(self) -> None:
        """Reports from peers this node rates Bad do not count."""
        table = TrustTable(0)
        table.record_interaction(1, Outcome.FAILURE)
        table.ingest_report(ReportKind.RECOMMENDATION, TrustReport(1, 2, 0.0, 0))
        table.ingest_report(ReportKind.RECOMMENDATION, TrustReport(3, 2, 0.9, 0))
        assert table.aggregate(2, ReportKind.RECOMMENDATION) == pytest.approx(0.9)

    def test_reporter_turning_bad_recomputes_its_targets(self) -> None:
        """A reporter dropping to Bad stops counting for peers it already rated."""
        table = TrustTable(0)
        table.ingest_report(ReportKind.REPUTATION, TrustReport(5, 7, 0.0, 0))
        assert table.record(7).reputation == pytest.approx(0.0)
        assert table.trust_class(7) is TrustClass.BAD
        table.record_interaction(5, Outcome.FAILURE)
        assert table.trust_class(5) is TrustClass.BAD
        assert table.record(7).reputation == NEUTRAL_PRIOR
        assert table.fused(7) == pytest.approx(0.5)

    def test_reporter_recovering_counts_again(self) -> None:
        table = TrustTable(0)
        table.record_interaction(5, Outcome.FAILURE)
        table.ingest_report(ReportKind.REPUTATION, TrustReport(5, 7, 0.0, 0))
        assert table.record(7).reputation == NEUTRAL_PRIOR
        table.record_interaction(5, Outcome.SUCCESS)
        table.record_interaction(5, Outcome.SUCCESS)
        assert table.trust_class(5) is TrustClass.NEUTRAL
        assert table.record(7).reputation == pytest.approx(0.0)

    def test_mutual_reports_settle(self) -> None:
        """Peers rating each other are each recomputed once per update."""
        table = TrustTable(0)
        table.ingest_report(ReportKind.REPUTATION, TrustReport(5, 7, 0.0, 0))
        table.ingest_report(ReportKind.REPUTATION, TrustReport(7, 5, 0.0, 0))
        table.record_interaction(5, Outcome.SUCCESS)
        assert 0.0 <= table.fused(5) <= 1.0
        assert 0.0 <= table.fused(7) <= 1.0

    def test_reports_about_owner_ignored(self) -> None:
        """Gossip about oneself is dropped."""
        table = TrustTable(0)
        table.ingest_report(ReportKind.REPUTATION, TrustReport(1, 0, 0.0, 0))
        assert 0 not in table

    def test_report_validation(self) -> None:
        """Self reports and out of range scores raise."""
        table = TrustTable(0)
        with pytest.raises(SelfReport):
            table.ingest_report(ReportKind.REPUTATION, TrustReport(2, 2, 0.5, 0))
        with pytest.raises(ScoreOutOfRange):
            table.ingest_report(ReportKind.REPUTATION, TrustReport(1, 2, 1.5, 0))

    def test_iteration_sorted(self) -> None:
        """Iterating yields records in peer order."""
        table = TrustTable(0)
        for peer in (5, 2, 9):
            table.record(peer)
        assert [rec.peer for rec in table] == [2, 5, 9]

    def test_config_builds_tables(self) -> None:
        """TrustConfig hands its settings to each table."""
        config = TrustConfig(window=5, bypass_threshold=2)
        table = config.table(3)
        assert (table.owner, table.window, table.bypass_threshold) == (3, 5, 2)


class TestLinkLabels:
    """Tests for bypass-based link labels."""

    @pytest.mark.parametrize(
        ("count", "expected"),
        [(0, LinkLabel.STRONG), (1, LinkLabel.NORMAL), (4, LinkLabel.NORMAL), (5, LinkLabel.WEAK)],
    )
    def test_thresholds(self, count: int, expected: LinkLabel) -> None:
        """Strong, Normal below the threshold, Weak from it."""
        assert label_link(count, 5) is expected

    def test_invalid_threshold(self) -> None:
        """Threshold must be at least one."""
        with pytest.raises(ValueError):
            label_link(0, 0)

    def test_window_slides(self) -> None:
        """Old bypasses leave the window."""
        quality = LinkQuality(window=1_000)
        for at in (0, 100, 200):
            quality.record_bypass(at)
        assert quality.bypass_count == 3
        quality.advance(1_150)
        assert quality.bypass_count == 1

    def test_table_bypass(self) -> None:
        """record_bypass returns the updated label."""
        table = TrustTable(0, bypass_threshold=2)
        assert table.record_bypass(4, 10) is LinkLabel.NORMAL
        assert table.record_bypass(4, 20) is LinkLabel.WEAK
        assert table.link_label(4, 10 + table.bypass_window) is LinkLabel.NORMAL
