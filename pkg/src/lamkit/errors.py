"""Exception hierarchy shared across the toolkit.

Every error carries a stable ``category`` string so the CLI can report a
machine-readable error class on stderr.
"""


class LamkitError(Exception):
    category = "error"


class ShapeError(LamkitError):
    category = "shape"


class DegenerateBatch(LamkitError):
    category = "degenerate-batch"


class ZeroNorm(LamkitError):
    category = "zero-norm"


class FormatError(LamkitError):
    category = "format"


class DuplicateId(LamkitError):
    category = "duplicate-id"


class NotLadf(LamkitError):
    category = "not-ladf"


class TruncatedFile(LamkitError):
    category = "truncated-file"


class UnsupportedVersion(LamkitError):
    category = "unsupported-version"


class EmptySelection(LamkitError):
    category = "empty-selection"


class CorpusMismatch(LamkitError):
    category = "corpus-mismatch"


class InvalidK(LamkitError):
    category = "invalid-k"


class MissingSeed(LamkitError):
    category = "missing-seed"


class UnknownPreset(LamkitError):
    category = "unknown-preset"


class InvalidAnchor(LamkitError):
    category = "invalid-anchor"


class CacheMismatch(LamkitError):
    category = "cache-mismatch"


class EmptySplit(LamkitError):
    category = "empty-split"


class Diverged(LamkitError):
    category = "diverged"


class InvalidConfig(LamkitError):
    category = "invalid-config"


class InvalidLabel(LamkitError):
    category = "invalid-label"


class EmptyEvaluation(LamkitError):
    category = "empty-evaluation"


class IoError(LamkitError):
    category = "io"
