import pytest

from lamkit.errors import (
    FormatError,
    InvalidK,
    MissingSeed,
    UnknownPreset,
)
from lamkit.selection import (
    PRESETS,
    AnchorPlan,
    custom_plan,
    preset,
    rank_layers,
    select,
)
from lamkit.similarity import Cell, SimilarityReport


def report_from_scores(scores, emotions=("neutral",)):
    """Utterance-level report with one similarity score per layer."""
    report = SimilarityReport(
        level="utterance", num_layers=len(scores), emotions=tuple(emotions)
    )
    for emotion in emotions:
        for layer, value in enumerate(scores, start=1):
            report.cells[(emotion, None, layer)] = Cell(value, 10, 10)
    return report


class TestRankLayers:
    def test_hand_ordering(self):
        ranking = rank_layers(report_from_scores([0.1, 0.9, 0.8, 0.85]))
        assert [layer for layer, _ in ranking] == [2, 4, 3, 1]

    def test_tie_breaks_to_lower_layer(self):
        ranking = rank_layers(report_from_scores([0.5, 0.5, 0.5]))
        assert [layer for layer, _ in ranking] == [1, 2, 3]

    def test_self_similarity_gives_identity_order(self):
        ranking = rank_layers(report_from_scores([1.0] * 6))
        assert [layer for layer, _ in ranking] == [1, 2, 3, 4, 5, 6]

    def test_empty_scope_rejected(self):
        with pytest.raises(FormatError):
            rank_layers(report_from_scores([0.5]), phone_scope="consonant")


class TestSelect:
    def test_gl_top_k(self):
        plan = select(report_from_scores([0.1, 0.9, 0.8, 0.85]), "GL", k=3)
        assert plan.layers == (2, 3, 4)
        assert plan.strategy == "GL"

    def test_wl_bottom_k(self):
        plan = select(report_from_scores([0.1, 0.9, 0.8, 0.85]), "WL", k=3)
        assert plan.layers == (1, 3, 4)

    def test_bl_is_single_best(self):
        plan = select(report_from_scores([0.1, 0.9, 0.8, 0.85]), "BL")
        assert plan.layers == (2,)
        assert plan.k == 1

    def test_rl_needs_seed(self):
        with pytest.raises(MissingSeed):
            select(report_from_scores([0.1, 0.9, 0.8]), "RL", k=2)

    def test_rl_deterministic_per_seed(self):
        report = report_from_scores([0.1, 0.9, 0.8, 0.85, 0.2])
        a = select(report, "RL", k=3, seed=12)
        b = select(report, "RL", k=3, seed=12)
        assert a == b
        assert len(a.layers) == 3

    def test_strategy_case_insensitive(self):
        plan = select(report_from_scores([0.1, 0.9, 0.8, 0.85]), "gl", k=2)
        assert plan.layers == (2, 4)

    def test_invalid_k(self):
        with pytest.raises(InvalidK):
            select(report_from_scores([0.5, 0.6]), "GL", k=3)


class TestAnchorPlan:
    def test_layers_sorted_and_validated(self):
        plan = AnchorPlan("custom", 3, (11, 8, 9))
        assert plan.layers == (8, 9, 11)

    def test_duplicates_rejected(self):
        with pytest.raises(FormatError):
            AnchorPlan("custom", 2, (3, 3))

    def test_k_mismatch_rejected(self):
        with pytest.raises(FormatError):
            AnchorPlan("GL", 2, (1, 2, 3))

    def test_json_round_trip(self):
        plan = custom_plan([4, 2], provenance="test")
        assert AnchorPlan.from_json(plan.to_json()) == plan

    def test_custom_plan_dedupes(self):
        plan = custom_plan([2, 2, 4])
        assert plan.layers == (2, 4)
        assert plan.k == 2


class TestPresets:
    @pytest.mark.parametrize(
        "name,strategy,layers",
        [
            ("wavlm-paper", "GL", (8, 9, 11)),
            ("wavlm-paper", "BL", (11,)),
            ("wavlm-paper", "WL", (5, 6, 7)),
            ("wavlm-paper", "RL1", (2, 6, 9)),
            ("wavlm-paper", "RL2", (1, 5, 12)),
            ("wavlm-paper", "RL3", (3, 7, 11)),
            ("whisper-paper", "GL", (1, 2, 3)),
            ("whisper-paper", "BL", (2,)),
            ("whisper-paper", "WL", (7, 10, 11)),
            ("whisper-paper", "RL1", (2, 6, 9)),
            ("whisper-paper", "RL2", (1, 5, 12)),
            ("whisper-paper", "RL3", (3, 7, 11)),
        ],
    )
    def test_published_layer_sets(self, name, strategy, layers):
        assert preset(name, strategy).layers == layers

    def test_unknown_preset(self):
        with pytest.raises(UnknownPreset):
            preset("nope", "GL")
        with pytest.raises(UnknownPreset):
            preset("wavlm-paper", "XXL")

    def test_preset_table_complete(self):
        assert set(PRESETS) == {"wavlm-paper", "whisper-paper"}
        for table in PRESETS.values():
            assert set(table) == {"GL", "BL", "WL", "RL1", "RL2", "RL3"}
