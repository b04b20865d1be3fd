import io
import json

import numpy as np
import pytest

from lamkit import similarity
from lamkit.errors import CorpusMismatch, EmptySelection, ZeroNorm
from lamkit.ladf import CorpusHeader, LayerFeatureRecord, utterance_segment
from lamkit.numkit import cosine
from lamkit.similarity import (
    Cell,
    SimilarityReport,
    centroid,
    export_report,
    layer_similarity,
    load_report,
    report_from_dict,
)
from lamkit.synthgen import SynthConfig, generate

from conftest import make_corpus


def single_record(utt_id, emotion, feats, split="train"):
    return LayerFeatureRecord(utt_id, split, emotion, [utterance_segment(feats)])


class TestCentroid:
    def test_single_record_is_identity(self):
        feats = np.arange(8.0).reshape(2, 4)
        c, n = centroid([single_record("u", 0, feats)], emotion=0, layer=2)
        np.testing.assert_array_equal(c, feats[1])
        assert n == 1

    def test_opposite_vectors_cancel(self):
        feats = np.ones((1, 3))
        recs = [
            single_record("a", 0, feats),
            single_record("b", 0, -feats),
        ]
        c, _ = centroid(recs, emotion=0, layer=1)
        np.testing.assert_array_equal(c, np.zeros(3))
        with pytest.raises(ZeroNorm):
            cosine(c, np.ones(3))

    def test_empty_selection(self):
        with pytest.raises(EmptySelection):
            centroid([], emotion=0, layer=1)

    def test_matches_brute_force_oracle(self):
        cfg = SynthConfig(seed=4, num_layers=3, dim=8,
                          similarity_profile=(0.3,) * 3, train_per_class=25)
        (header, records), _, _ = generate(cfg)
        emotion, layer = 2, 3
        c, n = centroid(records, emotion=emotion, layer=layer)
        matching = [
            r.utterance().features[layer - 1]
            for r in records if r.emotion == emotion
        ]
        assert n == len(matching)
        np.testing.assert_allclose(c, np.mean(matching, axis=0), atol=1e-12)


class TestLayerSimilarity:
    def test_self_similarity_is_one(self, tiny_corpus):
        report = layer_similarity(tiny_corpus, tiny_corpus)
        assert report.cells
        for cell in report.cells.values():
            assert cell.value == pytest.approx(1.0, abs=1e-12)

    def test_planted_ordering(self):
        profile = [0.2] * 4
        profile[0] = 1.0
        cfg = SynthConfig(seed=0, num_layers=4, dim=16,
                          similarity_profile=tuple(profile),
                          train_per_class=60, vowel_segments_per_utt=0)
        src, tar, _ = generate(cfg)
        report = layer_similarity(src, tar)
        for emotion in src[0].emotions:
            assert (
                report.cells[(emotion, None, 1)].value
                > report.cells[(emotion, None, 2)].value
            )

    def test_dim_mismatch_rejected(self):
        a = make_corpus(dim=4)
        b = make_corpus(dim=5)
        with pytest.raises(CorpusMismatch):
            layer_similarity(a, b)

    def test_train_only_excludes_other_splits(self):
        header, records = make_corpus(seed=3)
        train = [r for r in records if r.split == "train"]
        full = layer_similarity((header, records), (header, records), train_only=True)
        explicit = layer_similarity((header, train), (header, train), train_only=False)
        assert full.cells == explicit.cells

    def test_phone_level_has_vowel_and_consonant_cells(self):
        cfg = SynthConfig(seed=1, num_layers=2, dim=4,
                          similarity_profile=(0.5, 0.5), vowel_segments_per_utt=2)
        src, tar, _ = generate(cfg)
        report = layer_similarity(src, tar, level="phone")
        phones = {phone for (_, phone, _) in report.cells}
        assert "a" in phones  # first vowel of the inventory is always emitted


class TestExport:
    def make_report(self):
        header, records = make_corpus(num_layers=2, emotions=("neutral", "anger"))
        return layer_similarity((header, records), (header, records))

    def test_csv_row_count(self):
        report = self.make_report()
        buf = io.StringIO()
        export_report(report, "csv", buf)
        lines = buf.getvalue().splitlines()
        assert len(lines) == 1 + 2 * 2  # header + emotions x layers

    def test_empty_report_csv(self):
        report = SimilarityReport(level="utterance", num_layers=2, emotions=("n",))
        buf = io.StringIO()
        export_report(report, "csv", buf)
        assert buf.getvalue().splitlines() == [
            "level,emotion,phone,layer,similarity,n_source,n_target"
        ]

    def test_json_round_trip(self):
        report = self.make_report()
        buf = io.StringIO()
        export_report(report, "json", buf)
        loaded = report_from_dict(json.loads(buf.getvalue()))
        assert loaded.level == report.level
        assert loaded.emotions == report.emotions
        assert set(loaded.cells) == set(report.cells)
        for key, cell in report.cells.items():
            assert loaded.cells[key].value == pytest.approx(cell.value, abs=1e-15)

    def test_load_report_from_path(self, tmp_path):
        report = self.make_report()
        path = tmp_path / "sim.json"
        export_report(report, "json", str(path))
        loaded = load_report(str(path))
        assert set(loaded.cells) == set(report.cells)

    def test_csv_uses_nine_significant_digits(self):
        report = SimilarityReport(level="utterance", num_layers=1, emotions=("n",))
        report.cells[("n", None, 1)] = Cell(1.0 / 3.0, 2, 2)
        buf = io.StringIO()
        export_report(report, "csv", buf)
        assert "0.333333333" in buf.getvalue()
