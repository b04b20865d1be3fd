"""Anchor-layer selection: rank layers by cross-corpus similarity and build
selection plans (GL/BL/WL/RL), with the published WavLM/Whisper layer sets
available as named presets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InvalidK, MissingSeed, UnknownPreset
from .similarity import CONSONANT_GROUP, SimilarityReport

STRATEGIES = ("GL", "BL", "WL", "RL", "custom")

PRESETS = {
    "wavlm-paper": {
        "GL": (8, 9, 11),
        "BL": (11,),
        "WL": (5, 6, 7),
        "RL1": (2, 6, 9),
        "RL2": (1, 5, 12),
        "RL3": (3, 7, 11),
    },
    "whisper-paper": {
        "GL": (1, 2, 3),
        "BL": (2,),
        "WL": (7, 10, 11),
        "RL1": (2, 6, 9),
        "RL2": (1, 5, 12),
        "RL3": (3, 7, 11),
    },
}


@dataclass(frozen=True)
class AnchorPlan:
    strategy: str
    k: int
    layers: tuple  # sorted ascending, 1-based
    seed: int | None = None
    provenance: str = ""

    def __post_init__(self):
        layers = tuple(sorted(int(x) for x in self.layers))
        object.__setattr__(self, "layers", layers)
        if self.strategy not in STRATEGIES:
            raise FormatError(f"unknown strategy {self.strategy!r}")
        if not layers:
            raise FormatError("anchor plan needs at least one layer")
        if len(set(layers)) != len(layers):
            raise FormatError(f"duplicate anchor layers in {layers}")
        if any(x < 1 for x in layers):
            raise FormatError("anchor layers are 1-based")
        if self.k != len(layers):
            raise FormatError(f"k={self.k} but {len(layers)} layers given")

    def to_json(self) -> str:
        return json.dumps(
            {
                "strategy": self.strategy,
                "k": self.k,
                "layers": list(self.layers),
                "seed": self.seed,
                "provenance": self.provenance,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "AnchorPlan":
        raw = json.loads(text)
        return cls(
            strategy=raw["strategy"],
            k=int(raw["k"]),
            layers=tuple(raw["layers"]),
            seed=raw.get("seed"),
            provenance=raw.get("provenance", ""),
        )


def custom_plan(layers, provenance="custom") -> AnchorPlan:
    layers = tuple(sorted(set(int(x) for x in layers)))
    return AnchorPlan("custom", len(layers), layers, provenance=provenance)


def rank_layers(report: SimilarityReport, phone_scope=None):
    """Rank layers by mean similarity, descending; ties break to the lower
    layer index.

    ``phone_scope``: None averages every cell; "vowel" restricts a
    phone-level report to its vowel cells; "consonant" to the consonant
    group.
    """
    sums: dict = {}
    counts: dict = {}
    for (emotion, phone, layer), cell in report.cells.items():
        if phone_scope == "vowel" and (phone is None or phone == CONSONANT_GROUP):
            continue
        if phone_scope == "consonant" and phone != CONSONANT_GROUP:
            continue
        sums[layer] = sums.get(layer, 0.0) + cell.value
        counts[layer] = counts.get(layer, 0) + 1
    if not sums:
        raise FormatError("similarity report has no cells in scope")
    scored = [(layer, sums[layer] / counts[layer]) for layer in sorted(sums)]
    return sorted(scored, key=lambda pair: (-pair[1], pair[0]))


def select(report: SimilarityReport, strategy: str, k=None, seed=None,
           phone_scope=None) -> AnchorPlan:
    """Build an AnchorPlan from a ranked similarity report."""
    strategy = strategy.upper()
    ranking = rank_layers(report, phone_scope=phone_scope)
    if strategy == "BL":
        k = 1
    elif k is None:
        k = 3
    if k > len(ranking) or k < 1:
        raise InvalidK(f"k={k} with {len(ranking)} ranked layers")

    if strategy in ("GL", "BL"):
        chosen = [layer for layer, _ in ranking[:k]]
    elif strategy == "WL":
        chosen = [layer for layer, _ in ranking[-k:]]
    elif strategy == "RL":
        if seed is None:
            raise MissingSeed("RL selection requires a seed")
        gen = np.random.Generator(np.random.Philox(key=seed))
        pool = sorted(layer for layer, _ in ranking)
        chosen = [pool[i] for i in gen.permutation(len(pool))[:k]]
    else:
        raise FormatError(f"cannot compute strategy {strategy!r} from a report")

    return AnchorPlan(
        strategy=strategy,
        k=k,
        layers=tuple(sorted(chosen)),
        seed=seed if strategy == "RL" else None,
        provenance=f"computed:{report.level}" + (f":{phone_scope}" if phone_scope else ""),
    )


def preset(name: str, strategy: str) -> AnchorPlan:
    """Published layer sets for the WavLM and Whisper selections."""
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    table = PRESETS[name]
    key = strategy.upper()
    if key not in table:
        raise UnknownPreset(f"preset {name!r} has no strategy {strategy!r}")
    layers = table[key]
    base = "RL" if key.startswith("RL") else key
    return AnchorPlan(
        strategy=base,
        k=len(layers),
        layers=layers,
        provenance=f"preset:{name}:{key}",
    )
