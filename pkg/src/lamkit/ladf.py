"""Layer-Anchor Dump Format (LADF): a bit-exact binary container for
per-layer, per-segment pooled features of one corpus.

Layout (integers little-endian):
    magic "LADF" | version u16 = 1 | header_len u32 | header JSON (UTF-8)
    | record_count u32 | records
Record:
    utt_id (u16 length + UTF-8) | split u8 | emotion u8 | segment_count u16
    | segments
Segment:
    phone_label (u16 length + UTF-8) | phone_class u8
    | L*D f32 values, row-major, layer-major

Features are stored as 32-bit floats on disk and widened to float64 on
load. Layer indices are 1-based everywhere in the public API.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DuplicateId,
    FormatError,
    NotLadf,
    TruncatedFile,
    UnsupportedVersion,
)

MAGIC = b"LADF"
VERSION = 1

SPLITS = ("train", "validation", "test")
PHONE_CLASSES = ("utterance", "vowel", "consonant")
DEFAULT_EMOTIONS = ("neutral", "happiness", "anger", "sadness")
LAYER_INDEXING = "1-based transformer block outputs"

UTTERANCE_LABEL = "<utt>"


@dataclass(frozen=True)
class CorpusHeader:
    corpus_name: str
    model_name: str
    num_layers: int
    dim: int
    emotions: tuple = DEFAULT_EMOTIONS
    pooling: str = "mean"
    layer_indexing: str = LAYER_INDEXING

    def __post_init__(self):
        if self.num_layers < 1 or self.dim < 1:
            raise FormatError("num_layers and dim must be >= 1")
        if len(self.emotions) == 0 or len(set(self.emotions)) != len(self.emotions):
            raise FormatError("emotions must be non-empty and unique")
        if self.pooling != "mean":
            raise FormatError(f"unsupported pooling {self.pooling!r}")
        object.__setattr__(self, "emotions", tuple(self.emotions))

    def to_json(self) -> str:
        return json.dumps(
            {
                "corpus_name": self.corpus_name,
                "model_name": self.model_name,
                "num_layers": self.num_layers,
                "dim": self.dim,
                "pooling": self.pooling,
                "emotions": list(self.emotions),
                "layer_indexing": self.layer_indexing,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "CorpusHeader":
        try:
            raw = json.loads(text)
            return cls(
                corpus_name=raw["corpus_name"],
                model_name=raw["model_name"],
                num_layers=int(raw["num_layers"]),
                dim=int(raw["dim"]),
                emotions=tuple(raw["emotions"]),
                pooling=raw["pooling"],
                layer_indexing=raw["layer_indexing"],
            )
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise FormatError(f"malformed LADF header: {e}") from e


@dataclass
class Segment:
    phone_label: str
    phone_class: str
    features: np.ndarray  # (num_layers, dim) float64

    def __eq__(self, other):
        return (
            isinstance(other, Segment)
            and self.phone_label == other.phone_label
            and self.phone_class == other.phone_class
            and np.array_equal(self.features, other.features)
        )

    def layer_vector(self, layer: int) -> np.ndarray:
        """Feature vector for a 1-based layer index."""
        return self.features[layer - 1]


def utterance_segment(features: np.ndarray) -> Segment:
    return Segment(UTTERANCE_LABEL, "utterance", features)


@dataclass
class LayerFeatureRecord:
    utt_id: str
    split: str
    emotion: int
    segments: list = field(default_factory=list)

    def __eq__(self, other):
        return (
            isinstance(other, LayerFeatureRecord)
            and self.utt_id == other.utt_id
            and self.split == other.split
            and self.emotion == other.emotion
            and self.segments == other.segments
        )

    def utterance(self) -> Segment:
        for seg in self.segments:
            if seg.phone_class == "utterance":
                return seg
        raise FormatError(f"record {self.utt_id!r} has no utterance segment")


def _check_record(header: CorpusHeader, rec: LayerFeatureRecord):
    if rec.split not in SPLITS:
        raise FormatError(f"{rec.utt_id!r}: unknown split {rec.split!r}")
    if not 0 <= rec.emotion < len(header.emotions):
        raise FormatError(f"{rec.utt_id!r}: emotion index {rec.emotion} out of range")
    utt_count = sum(1 for s in rec.segments if s.phone_class == "utterance")
    if utt_count != 1:
        raise FormatError(
            f"{rec.utt_id!r}: expected exactly 1 utterance segment, got {utt_count}"
        )
    for seg in rec.segments:
        if seg.phone_class not in PHONE_CLASSES:
            raise FormatError(f"{rec.utt_id!r}: bad phone class {seg.phone_class!r}")
        if seg.features.shape != (header.num_layers, header.dim):
            raise FormatError(
                f"{rec.utt_id!r}/{seg.phone_label!r}: features shape "
                f"{seg.features.shape} != ({header.num_layers}, {header.dim})"
            )


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise FormatError("string too long for u16 length prefix")
    return struct.pack("<H", len(raw)) + raw


def write_ladf(header: CorpusHeader, records, destination) -> None:
    """Serialize a corpus. ``destination`` is a path or binary file object."""
    seen = set()
    for rec in records:
        _check_record(header, rec)
        if rec.utt_id in seen:
            raise DuplicateId(f"duplicate utt_id {rec.utt_id!r}")
        seen.add(rec.utt_id)

    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<H", VERSION))
    header_bytes = header.to_json().encode("utf-8")
    buf.write(struct.pack("<I", len(header_bytes)))
    buf.write(header_bytes)
    buf.write(struct.pack("<I", len(records)))
    for rec in records:
        buf.write(_pack_str(rec.utt_id))
        buf.write(struct.pack("<BB", SPLITS.index(rec.split), rec.emotion))
        buf.write(struct.pack("<H", len(rec.segments)))
        for seg in rec.segments:
            buf.write(_pack_str(seg.phone_label))
            buf.write(struct.pack("<B", PHONE_CLASSES.index(seg.phone_class)))
            buf.write(np.ascontiguousarray(seg.features, dtype="<f4").tobytes())

    data = buf.getvalue()
    if hasattr(destination, "write"):
        destination.write(data)
    else:
        with open(destination, "wb") as f:
            f.write(data)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFile(
                f"need {n} bytes at offset {self.pos}, file has {len(self.data)}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def take_str(self) -> str:
        (n,) = self.unpack("<H")
        return self.take(n).decode("utf-8")


def read_ladf(source):
    """Parse a LADF stream. ``source`` is a path, file object, or bytes."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif hasattr(source, "read"):
        data = source.read()
    else:
        with open(source, "rb") as f:
            data = f.read()

    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise NotLadf("bad magic; not a LADF file")
    (version,) = r.unpack("<H")
    if version != VERSION:
        raise UnsupportedVersion(f"LADF version {version} not supported")
    (header_len,) = r.unpack("<I")
    header = CorpusHeader.from_json(r.take(header_len).decode("utf-8"))

    (record_count,) = r.unpack("<I")
    feat_bytes = header.num_layers * header.dim * 4
    records = []
    for _ in range(record_count):
        utt_id = r.take_str()
        split_code, emotion = r.unpack("<BB")
        if split_code >= len(SPLITS):
            raise FormatError(f"{utt_id!r}: bad split code {split_code}")
        (segment_count,) = r.unpack("<H")
        segments = []
        for _ in range(segment_count):
            label = r.take_str()
            (class_code,) = r.unpack("<B")
            if class_code >= len(PHONE_CLASSES):
                raise FormatError(f"{utt_id!r}: bad phone class code {class_code}")
            raw = r.take(feat_bytes)
            feats = (
                np.frombuffer(raw, dtype="<f4")
                .astype(np.float64)
                .reshape(header.num_layers, header.dim)
            )
            segments.append(Segment(label, PHONE_CLASSES[class_code], feats))
        records.append(LayerFeatureRecord(utt_id, SPLITS[split_code], emotion, segments))

    if r.pos != len(data):
        raise FormatError(f"{len(data) - r.pos} trailing bytes after last record")
    return header, records


def filter_records(records, split=None, emotion=None, phone_class=None):
    """Order-preserving subset of records.

    ``phone_class`` filters at segment level: only matching segments are
    kept, and records left with no segments are dropped.
    """
    out = []
    for rec in records:
        if split is not None and rec.split != split:
            continue
        if emotion is not None and rec.emotion != emotion:
            continue
        if phone_class is None:
            out.append(rec)
            continue
        kept = [s for s in rec.segments if s.phone_class == phone_class]
        if kept:
            out.append(replace(rec, segments=kept))
    return out


@dataclass
class Violation:
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, detail: str):
        self.violations.append(Violation(kind, detail))


def validate(source) -> ValidationReport:
    """Check a corpus, collecting all violations instead of aborting.

    ``source`` is a LADF path, file object, or bytes — or an in-memory
    (header, records) pair, which additionally lets shape faults be
    detected before serialization would reject them.
    """
    report = ValidationReport()
    if isinstance(source, tuple):
        header, records = source
    else:
        try:
            header, records = read_ladf(source)
        except Exception as e:  # unreadable file is one structural violation
            report.add("unreadable", str(e))
            return report

    seen = {}
    split_counts = {s: 0 for s in SPLITS}
    for rec in records:
        if rec.utt_id in seen:
            report.add("duplicate-id", f"utt_id {rec.utt_id!r} appears more than once")
        seen[rec.utt_id] = True
        split_counts[rec.split] += 1
        if not 0 <= rec.emotion < len(header.emotions):
            report.add("bad-emotion", f"{rec.utt_id!r}: emotion index {rec.emotion}")
        utt_count = sum(1 for s in rec.segments if s.phone_class == "utterance")
        if utt_count != 1:
            report.add(
                "segment-structure",
                f"{rec.utt_id!r}: {utt_count} utterance segments (expected 1)",
            )
        for seg_idx, seg in enumerate(rec.segments):
            if seg.features.shape != (header.num_layers, header.dim):
                report.add(
                    "shape",
                    f"{rec.utt_id!r} segment {seg_idx}: shape {seg.features.shape}",
                )
                continue
            bad = np.argwhere(~np.isfinite(seg.features))
            for layer0, _ in bad[:1]:
                report.add(
                    "nan",
                    f"{rec.utt_id!r} segment {seg_idx} ({seg.phone_label!r}) "
                    f"layer {layer0 + 1}: non-finite value",
                )
    for split, count in split_counts.items():
        if count == 0:
            report.add("empty-split", f"split {split!r} has no records")
    return report
