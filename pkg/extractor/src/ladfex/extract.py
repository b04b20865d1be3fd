"""Extraction pipeline: manifest -> encoder -> pooled segments -> LADF."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .audio import read_wav
from .encoder import Encoder
from .ladf_writer import OutRecord, OutSegment, write_ladf
from .manifest import ExtractionManifest, load_alignment
from .pooling import pool_interval, pool_utterance

log = logging.getLogger(__name__)

UTTERANCE_LABEL = "<utt>"


@dataclass
class SkipReport:
    skipped: list = field(default_factory=list)  # (utt_id, reason)

    def add(self, utt_id: str, reason: str):
        log.warning("skipping %s: %s", utt_id, reason)
        self.skipped.append((utt_id, reason))


def extract(manifest: ExtractionManifest, encoder: Encoder, output_path,
            corpus_name: str, expected_layers: int, expected_dim: int):
    """Write one LADF file for the manifest; returns (record count, skips).

    Unreadable audio or alignments are collected in the skip report instead
    of aborting the run. Record order follows the manifest.
    """
    encoder.check_geometry(expected_layers, expected_dim)
    skips = SkipReport()
    records = []
    for entry in manifest.entries:
        try:
            waveform, duration = read_wav(entry.audio_path)
        except (OSError, ValueError, EOFError) as e:
            skips.add(entry.utt_id, f"unreadable audio: {e}")
            continue
        states = encoder.hidden_states(waveform)

        segments = [OutSegment(UTTERANCE_LABEL, "utterance",
                               pool_utterance(states))]
        if entry.alignment_path is not None:
            try:
                intervals = load_alignment(entry.alignment_path, duration)
            except (OSError, ValueError, EOFError) as e:
                skips.add(entry.utt_id, f"unreadable alignment: {e}")
                intervals = []
            for interval in intervals:
                pooled = pool_interval(states, duration, interval.start,
                                       interval.end)
                if pooled is None:
                    log.warning(
                        "%s: interval %s [%g, %g) shorter than one frame",
                        entry.utt_id, interval.phone, interval.start,
                        interval.end,
                    )
                    continue
                segments.append(
                    OutSegment(interval.phone, interval.phone_class, pooled)
                )
        records.append(
            OutRecord(entry.utt_id, entry.split, entry.emotion, segments)
        )

    write_ladf(
        output_path,
        corpus_name=corpus_name,
        model_name=encoder.model_name,
        num_layers=expected_layers,
        dim=expected_dim,
        emotions=manifest.emotions,
        records=records,
    )
    return len(records), skips
