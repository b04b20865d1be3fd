"""Cross-corpus layer-similarity analysis.

For every (emotion, layer) cell — and every (phone, emotion, layer) cell at
phone level — the similarity is the cosine between the two corpora's class
centroids at that layer. Centroids accumulate in lexicographic utt_id order
so reports are byte-stable across runs.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import CorpusMismatch, EmptySelection, FormatError, IoError
from .ladf import filter_records
from .numkit import cosine
from .synthgen import VOWELS

log = logging.getLogger(__name__)

CONSONANT_GROUP = "<cons>"


class Cell(NamedTuple):
    value: float
    n_source: int
    n_target: int


@dataclass
class SimilarityReport:
    level: str  # "utterance" | "phone"
    num_layers: int
    emotions: tuple
    # cells[(emotion, phone, layer)] -> Cell; phone is None at utterance level
    cells: dict = field(default_factory=dict)

    def layers_present(self):
        return sorted({layer for (_, _, layer) in self.cells})


def _matching_vectors(records, emotion, layer, phone_label=None, phone_group=None):
    """Layer vectors of segments matching the selection, in utt_id order."""
    out = []
    for rec in sorted(records, key=lambda r: r.utt_id):
        if rec.emotion != emotion:
            continue
        for seg in rec.segments:
            if phone_label is None and phone_group is None:
                if seg.phone_class != "utterance":
                    continue
            elif phone_label is not None:
                if seg.phone_label != phone_label:
                    continue
            else:
                if seg.phone_class != phone_group:
                    continue
            out.append(seg.layer_vector(layer))
    return out


def centroid(records, emotion, layer, phone_label=None, phone_group=None):
    """Arithmetic mean of the matching segments' vectors at a 1-based layer."""
    vecs = _matching_vectors(records, emotion, layer, phone_label, phone_group)
    if not vecs:
        raise EmptySelection(
            f"no segments for emotion {emotion}, layer {layer}, "
            f"phone {phone_label or phone_group or '<utt>'}"
        )
    total = np.zeros_like(vecs[0])
    for v in vecs:
        total = total + v
    return total / len(vecs), len(vecs)


def layer_similarity(source, target, level="utterance", train_only=True):
    """Compute a SimilarityReport between two (header, records) corpora."""
    src_header, src_records = source
    tar_header, tar_records = target
    if (
        src_header.num_layers != tar_header.num_layers
        or src_header.dim != tar_header.dim
        or src_header.emotions != tar_header.emotions
    ):
        raise CorpusMismatch(
            f"headers disagree: L={src_header.num_layers}/{tar_header.num_layers}, "
            f"D={src_header.dim}/{tar_header.dim}, "
            f"emotions={src_header.emotions}/{tar_header.emotions}"
        )
    if level not in ("utterance", "phone"):
        raise FormatError(f"unknown similarity level {level!r}")

    if train_only:
        src_records = filter_records(src_records, split="train")
        tar_records = filter_records(tar_records, split="train")

    if level == "utterance":
        phones = [None]
    else:
        phones = list(VOWELS) + [CONSONANT_GROUP]

    report = SimilarityReport(
        level=level, num_layers=src_header.num_layers, emotions=src_header.emotions
    )
    for phone in phones:
        label = None if phone in (None, CONSONANT_GROUP) else phone
        group = "consonant" if phone == CONSONANT_GROUP else None
        for e_idx, emotion in enumerate(src_header.emotions):
            for layer in range(1, src_header.num_layers + 1):
                try:
                    c_src, n_src = centroid(src_records, e_idx, layer, label, group)
                    c_tar, n_tar = centroid(tar_records, e_idx, layer, label, group)
                except EmptySelection:
                    log.warning(
                        "omitting empty cell emotion=%s phone=%s layer=%d",
                        emotion, phone, layer,
                    )
                    continue
                value = cosine(c_src, c_tar)
                report.cells[(emotion, phone, layer)] = Cell(value, n_src, n_tar)
    return report


def _report_to_dict(report: SimilarityReport) -> dict:
    return {
        "level": report.level,
        "num_layers": report.num_layers,
        "emotions": list(report.emotions),
        "cells": [
            {
                "emotion": emotion,
                "phone": phone,
                "layer": layer,
                "similarity": cell.value,
                "n_source": cell.n_source,
                "n_target": cell.n_target,
            }
            for (emotion, phone, layer), cell in sorted(
                report.cells.items(), key=lambda kv: (kv[0][1] or "", kv[0][0], kv[0][2])
            )
        ],
    }


def report_from_dict(raw: dict) -> SimilarityReport:
    report = SimilarityReport(
        level=raw["level"],
        num_layers=int(raw["num_layers"]),
        emotions=tuple(raw["emotions"]),
    )
    for cell in raw["cells"]:
        key = (cell["emotion"], cell["phone"], int(cell["layer"]))
        report.cells[key] = Cell(
            float(cell["similarity"]), int(cell["n_source"]), int(cell["n_target"])
        )
    return report


def export_report(report: SimilarityReport, fmt: str, destination) -> None:
    """Write a report as JSON or CSV (9 significant digits in CSV)."""
    if fmt == "json":
        text = json.dumps(_report_to_dict(report), ensure_ascii=False, indent=2)
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["level", "emotion", "phone", "layer", "similarity", "n_source", "n_target"]
        )
        for row in _report_to_dict(report)["cells"]:
            writer.writerow(
                [
                    report.level,
                    row["emotion"],
                    row["phone"] or "",
                    row["layer"],
                    f"{row['similarity']:.9g}",
                    row["n_source"],
                    row["n_target"],
                ]
            )
        text = buf.getvalue()
    else:
        raise FormatError(f"unknown export format {fmt!r}")

    try:
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            with open(destination, "w", encoding="utf-8") as f:
                f.write(text)
    except OSError as e:
        raise IoError(str(e)) from e


def load_report(source) -> SimilarityReport:
    if hasattr(source, "read"):
        raw = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as f:
            raw = json.load(f)
    return report_from_dict(raw)
