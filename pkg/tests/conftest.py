"""Shared fixtures and corpus-building helpers for the test suite."""

import numpy as np
import pytest

from lamkit.ladf import (
    CorpusHeader,
    LayerFeatureRecord,
    Segment,
    utterance_segment,
)


def make_corpus(num_layers=3, dim=4, per_split=2, emotions=("neutral", "happiness"),
                seed=0, corpus_name="tiny", vowel_segments=0):
    """Small deterministic corpus for format and filter tests."""
    gen = np.random.Generator(np.random.Philox(key=seed))
    header = CorpusHeader(
        corpus_name=corpus_name,
        model_name="synthetic",
        num_layers=num_layers,
        dim=dim,
        emotions=tuple(emotions),
    )
    records = []
    for split in ("train", "validation", "test"):
        for e in range(len(emotions)):
            for j in range(per_split):
                feats = gen.standard_normal((num_layers, dim))
                segments = [utterance_segment(feats)]
                for v in range(vowel_segments):
                    segments.append(
                        Segment("a", "vowel", feats + 0.01 * (v + 1))
                    )
                records.append(
                    LayerFeatureRecord(
                        utt_id=f"{corpus_name}-{split}-e{e}-{j}",
                        split=split,
                        emotion=e,
                        segments=segments,
                    )
                )
    return header, records


@pytest.fixture
def tiny_corpus():
    return make_corpus()
