"""Exception types shared across the harness."""


class VowellabError(Exception):
    """Base class for all harness errors."""


class ConfigError(VowellabError):
    """Invalid or unknown configuration keys/values."""


class NearClosure(VowellabError):
    """Tract has a section below the closure threshold; prefilter was bypassed."""


class NumericalOverflow(VowellabError):
    """Chain-matrix cascade produced non-finite entries."""


class TooFewPeaks(VowellabError):
    """Fewer than two qualifying spectral peaks; candidate should be discarded."""


class SignalTooShort(VowellabError):
    """Waveform shorter than one analysis frame."""


class EmptyCorpus(VowellabError):
    """Normalization statistics requested over an empty feature corpus."""


class DimsMismatch(VowellabError):
    """Vector or matrix dimensionalities do not agree."""


class ZeroVector(VowellabError):
    """Cosine distance undefined: at least one vector has zero norm."""


class EmptyRun(VowellabError):
    """A run split contains no candidates."""


class MissingTarget(VowellabError):
    """A requested target vowel is absent from the target set."""


class IncompleteGrid(VowellabError):
    """Aggregate report requested with feature-metric pairs missing."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__("missing feature-metric pairs: " + ", ".join(map(str, self.missing)))


class NoSamples(VowellabError):
    """Error surface requested with no finite samples."""


class AllOutsideRange(VowellabError):
    """Every error-surface sample fell outside the binned z-range."""


class MissingResult(VowellabError):
    """Manifest preparation found no optimization result for a (pair, model, vowel)."""


class TooFewBins(VowellabError):
    """Too few occupied bins for scattered cubic interpolation."""


class DegenerateScreen(VowellabError):
    """A rater scored the hidden reference and the anchor identically."""
