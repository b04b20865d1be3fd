"""Minimal LADF serializer.

Byte layout (little-endian integers):
    magic "LADF" | version u16 = 1 | header_len u32 | header JSON (UTF-8)
    | record_count u32 | records
Record:
    utt_id (u16 length + UTF-8) | split u8 | emotion u8 | segment_count u16
    | segments
Segment:
    phone_label (u16 length + UTF-8) | phone_class u8
    | L*D float32 values, row-major, layer-major

This mirrors the downstream toolkit's on-disk contract; features are
narrowed to float32 when written.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

SPLITS = ("train", "validation", "test")
PHONE_CLASSES = ("utterance", "vowel", "consonant")
UTTERANCE_LABEL = "<utt>"
MAGIC = b"LADF"
VERSION = 1


@dataclass
class OutSegment:
    phone_label: str
    phone_class: str
    features: np.ndarray  # (L, D)


@dataclass
class OutRecord:
    utt_id: str
    split: str
    emotion: int
    segments: list = field(default_factory=list)


def header_json(corpus_name, model_name, num_layers, dim, emotions) -> bytes:
    return json.dumps(
        {
            "corpus_name": corpus_name,
            "model_name": model_name,
            "num_layers": num_layers,
            "dim": dim,
            "pooling": "mean",
            "emotions": list(emotions),
            "layer_indexing": "1-based transformer block outputs",
        },
        separators=(",", ":"),
    ).encode("utf-8")


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def write_ladf(destination, corpus_name, model_name, num_layers, dim,
               emotions, records) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<H", VERSION))
    header = header_json(corpus_name, model_name, num_layers, dim, emotions)
    buf.write(struct.pack("<I", len(header)))
    buf.write(header)
    buf.write(struct.pack("<I", len(records)))
    for rec in records:
        buf.write(_pack_str(rec.utt_id))
        buf.write(struct.pack("<BB", SPLITS.index(rec.split), rec.emotion))
        buf.write(struct.pack("<H", len(rec.segments)))
        for seg in rec.segments:
            assert seg.features.shape == (num_layers, dim)
            buf.write(_pack_str(seg.phone_label))
            buf.write(struct.pack("<B", PHONE_CLASSES.index(seg.phone_class)))
            buf.write(np.ascontiguousarray(seg.features, dtype="<f4").tobytes())
    data = buf.getvalue()
    if hasattr(destination, "write"):
        destination.write(data)
    else:
        with open(destination, "wb") as f:
            f.write(data)
