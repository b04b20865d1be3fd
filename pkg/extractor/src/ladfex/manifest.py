"""Extraction manifest (CSV) and phone-alignment (JSON) inputs.

Manifest columns: audio_path, utt_id, split, emotion, alignment_path.
The alignment path may be empty, in which case only the whole-utterance
segment is extracted. Alignment files are JSON lists of
``{"start": s, "end": s, "phone": str, "class": "vowel"|"consonant"}``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

from .errors import ManifestError

SPLITS = ("train", "validation", "test")
DEFAULT_EMOTIONS = ("neutral", "happiness", "anger", "sadness")
PHONE_CLASSES = ("vowel", "consonant")


@dataclass(frozen=True)
class PhoneInterval:
    start: float
    end: float
    phone: str
    phone_class: str


@dataclass(frozen=True)
class ManifestEntry:
    audio_path: str
    utt_id: str
    split: str
    emotion: int
    alignment_path: str | None = None


@dataclass
class ExtractionManifest:
    entries: list = field(default_factory=list)
    emotions: tuple = DEFAULT_EMOTIONS


def load_manifest(path, emotions=DEFAULT_EMOTIONS) -> ExtractionManifest:
    """Parse the manifest CSV; emotion labels may be class names or indices."""
    manifest = ExtractionManifest(emotions=tuple(emotions))
    seen = set()
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        required = {"audio_path", "utt_id", "split", "emotion"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ManifestError(
                f"manifest needs columns {sorted(required)}, "
                f"got {reader.fieldnames}"
            )
        for line_no, row in enumerate(reader, start=2):
            utt_id = row["utt_id"].strip()
            if not utt_id:
                raise ManifestError(f"line {line_no}: empty utt_id")
            if utt_id in seen:
                raise ManifestError(f"line {line_no}: duplicate utt_id {utt_id!r}")
            seen.add(utt_id)
            split = row["split"].strip()
            if split not in SPLITS:
                raise ManifestError(f"line {line_no}: unknown split {split!r}")
            label = row["emotion"].strip()
            if label in manifest.emotions:
                emotion = manifest.emotions.index(label)
            else:
                try:
                    emotion = int(label)
                except ValueError:
                    raise ManifestError(
                        f"line {line_no}: emotion {label!r} is neither a "
                        f"configured class name nor an index"
                    ) from None
                if not 0 <= emotion < len(manifest.emotions):
                    raise ManifestError(
                        f"line {line_no}: emotion index {emotion} out of range"
                    )
            alignment = (row.get("alignment_path") or "").strip() or None
            manifest.entries.append(
                ManifestEntry(
                    audio_path=row["audio_path"].strip(),
                    utt_id=utt_id,
                    split=split,
                    emotion=emotion,
                    alignment_path=alignment,
                )
            )
    return manifest


def load_alignment(path, duration: float) -> list:
    """Parse a phone-alignment JSON file and check its invariants."""
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, list):
        raise ManifestError(f"{path}: alignment must be a JSON list")
    intervals = []
    for item in raw:
        try:
            interval = PhoneInterval(
                start=float(item["start"]),
                end=float(item["end"]),
                phone=str(item["phone"]),
                phone_class=str(item["class"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ManifestError(f"{path}: bad interval {item!r}: {e}") from e
        if interval.phone_class not in PHONE_CLASSES:
            raise ManifestError(
                f"{path}: phone class {interval.phone_class!r} not in "
                f"{PHONE_CLASSES}"
            )
        if not 0.0 <= interval.start < interval.end:
            raise ManifestError(f"{path}: bad interval times {item!r}")
        if interval.end > duration + 1e-6:
            raise ManifestError(
                f"{path}: interval ends at {interval.end}s but audio lasts "
                f"{duration:.3f}s"
            )
        intervals.append(interval)
    intervals.sort(key=lambda iv: iv.start)
    for a, b in zip(intervals, intervals[1:]):
        if b.start < a.end - 1e-6:
            raise ManifestError(
                f"{path}: intervals overlap ({a.phone} ends {a.end}, "
                f"{b.phone} starts {b.start})"
            )
    return intervals
