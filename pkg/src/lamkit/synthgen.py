"""Synthetic paired-corpus generator with a planted per-layer cross-corpus
similarity profile.

Generative model, per corpus K, layer i, emotion class c, utterance u:

    x = g_{K,i} * ( s_i * mu_c
                    + (1 - s_i) * nu_{K,i}
                    + 4 s_i (1 - s_i) * confound_scale * eta_{K,c,i}
                    + noise_scale * eps_u )

where mu_c is a class mean shared by both corpora, nu_{K,i} is a
corpus-and-layer-specific shift, eta_{K,c,i} is a corpus-specific
class-dependent direction (a transfer confound: discriminative within a
corpus, uninformative across corpora), and eps_u is standard Gaussian
noise. The confound envelope 4 s (1 - s) peaks at half-shared layers:
fully shared layers have no corpus-specific class structure, and layers
with no shared structure carry no class information at all. g_{K,i} is a corpus-specific per-dimension gain,
exp((1 - s_i) * scale_jitter * z) with z standard normal, applied
elementwise: it plants a second-order (variance) mismatch between the
corpora that grows as s_i falls, which is exactly the structure a
covariance-alignment loss can detect and suppress. Cross-corpus centroid
similarity at layer i grows with s_i.

Randomness comes from counter-based Philox streams, never the platform
default generator. Stream key layout (128-bit Philox key):

    key = (seed << 64) | tag
    tag = corpus_id * 2^40 + split_id * 2^32 + class_id * 2^16 + kind

corpus_id: 0 source, 1 target, 2 shared. kind: 0 direction draws,
1 per-utterance noise (consumed sequentially in utterance order),
2 vowel-segment jitter. Identical config and seed give identical bytes
regardless of platform or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import InvalidConfig
from .ladf import (
    DEFAULT_EMOTIONS,
    CorpusHeader,
    LayerFeatureRecord,
    Segment,
    utterance_segment,
)

VOWELS = ("a", "ɛ", "ə", "i", "ɔ", "u")

_SOURCE, _TARGET, _SHARED = 0, 1, 2
_KIND_DIRECTIONS, _KIND_NOISE, _KIND_VOWEL = 0, 1, 2


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    num_layers: int = 12
    dim: int = 16
    num_classes: int = 4
    train_per_class: int = 50
    validation_per_class: int = 20
    test_per_class: int = 20
    similarity_profile: tuple = (0.3,) * 12
    class_separation: float = 1.0
    noise_scale: float = 0.1
    confound_scale: float = 1.0
    scale_jitter: float = 1.0
    vowel_segments_per_utt: int = 2

    def __post_init__(self):
        object.__setattr__(
            self, "similarity_profile", tuple(float(s) for s in self.similarity_profile)
        )
        if self.seed < 0:
            raise InvalidConfig("seed must be non-negative")
        if min(self.num_layers, self.dim, self.num_classes) < 1:
            raise InvalidConfig("num_layers, dim, num_classes must be >= 1")
        if len(self.similarity_profile) != self.num_layers:
            raise InvalidConfig(
                f"similarity_profile length {len(self.similarity_profile)} "
                f"!= num_layers {self.num_layers}"
            )
        if any(not 0.0 <= s <= 1.0 for s in self.similarity_profile):
            raise InvalidConfig("similarity_profile entries must be in [0, 1]")
        if self.class_separation <= 0 or self.noise_scale < 0:
            raise InvalidConfig("class_separation must be > 0, noise_scale >= 0")
        if min(self.train_per_class, self.validation_per_class, self.test_per_class) < 1:
            raise InvalidConfig("per-class utterance counts must be >= 1")

    def emotions(self) -> tuple:
        if self.num_classes == len(DEFAULT_EMOTIONS):
            return DEFAULT_EMOTIONS
        return tuple(f"class{c}" for c in range(self.num_classes))


def _stream(seed: int, corpus_id: int, split_id: int, class_id: int, kind: int):
    tag = corpus_id * 2**40 + split_id * 2**32 + class_id * 2**16 + kind
    return np.random.Generator(np.random.Philox(key=(seed << 64) | tag))


def _unit_rows(gen, shape, norm: float) -> np.ndarray:
    m = gen.standard_normal(shape)
    return m / np.linalg.norm(m, axis=-1, keepdims=True) * norm


@dataclass
class GroundTruth:
    similarity_profile: tuple
    seed: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "similarity_profile": list(self.similarity_profile),
            "seed": self.seed,
            "config": self.config,
        }


def generate(config: SynthConfig):
    """Build paired source/target corpora.

    Returns ((source_header, source_records), (target_header, target_records),
    ground_truth).
    """
    L, D, C = config.num_layers, config.dim, config.num_classes
    sep = config.class_separation
    s = np.array(config.similarity_profile)

    shared = _stream(config.seed, _SHARED, 0, 0, _KIND_DIRECTIONS)
    mu = _unit_rows(shared, (C, D), sep)  # shared class means

    corpora = []
    for corpus_id, name in ((_SOURCE, "synth-source"), (_TARGET, "synth-target")):
        dir_gen = _stream(config.seed, corpus_id, 0, 0, _KIND_DIRECTIONS)
        nu = _unit_rows(dir_gen, (L, D), sep)  # per-layer corpus shift
        eta = _unit_rows(dir_gen, (L, C, D), sep)  # per-layer per-class confound
        gain = np.exp(
            (1.0 - s[:, None])
            * config.scale_jitter
            * dir_gen.standard_normal((L, D))
        )  # per-layer per-dim corpus gain

        records = []
        split_sizes = {
            "train": config.train_per_class,
            "validation": config.validation_per_class,
            "test": config.test_per_class,
        }
        for split_id, (split, per_class) in enumerate(split_sizes.items()):
            for c in range(C):
                noise_gen = _stream(config.seed, corpus_id, split_id, c, _KIND_NOISE)
                vowel_gen = _stream(config.seed, corpus_id, split_id, c, _KIND_VOWEL)
                base = (
                    s[:, None] * mu[c]
                    + (1.0 - s[:, None]) * nu
                    + (4.0 * s * (1.0 - s))[:, None]
                    * config.confound_scale
                    * eta[:, c, :]
                )  # (L, D)
                for j in range(per_class):
                    feats = gain * (
                        base + config.noise_scale * noise_gen.standard_normal((L, D))
                    )
                    segments = [utterance_segment(feats)]
                    for v in range(config.vowel_segments_per_utt):
                        jitter = config.noise_scale * vowel_gen.standard_normal((L, D))
                        segments.append(
                            Segment(VOWELS[v % len(VOWELS)], "vowel", feats + jitter)
                        )
                    records.append(
                        LayerFeatureRecord(
                            utt_id=f"{name}-{split}-c{c}-{j:05d}",
                            split=split,
                            emotion=c,
                            segments=segments,
                        )
                    )
        header = CorpusHeader(
            corpus_name=name,
            model_name="synthetic",
            num_layers=L,
            dim=D,
            emotions=config.emotions(),
        )
        corpora.append((header, records))

    truth = GroundTruth(
        similarity_profile=config.similarity_profile,
        seed=config.seed,
        config=asdict(config),
    )
    return corpora[0], corpora[1], truth
