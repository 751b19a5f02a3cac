"""Exception hierarchy shared across the codec."""


class CodecError(Exception):
    """Base class for all data-driven codec failures."""


class FormatError(CodecError):
    """Container or raw file is malformed (bad magic, bad version, bad layout)."""


class TruncatedError(FormatError):
    """File or packet ends before its declared payload."""


class InvalidSampleError(CodecError):
    """A sample marked valid is NaN or infinite."""


class MaskError(CodecError):
    """Mask leaves a component with no valid sample to interpolate from."""


class DegenerateRangeError(CodecError):
    """Field has zero dynamic range; quantizer scale cannot be derived."""


class MagnitudeOverflowError(CodecError):
    """Quantized magnitude does not fit 31 bits; the precision budget is too
    large for the data."""

    def __init__(self, subband: str, magnitude: int):
        super().__init__(
            f"quantized magnitude {magnitude} in subband {subband} exceeds 31 bits"
        )
        self.subband = subband
        self.magnitude = magnitude


class RequestError(CodecError):
    """Decode or protocol request is outside the codestream's bounds."""
