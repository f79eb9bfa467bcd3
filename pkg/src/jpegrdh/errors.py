"""Exception hierarchy shared across the package."""


class JpegError(Exception):
    """Base class for bitstream problems. ``offset`` is a byte offset or None."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class UnsupportedFormat(JpegError):
    pass


class TruncatedStream(JpegError):
    pass


class InvalidHuffmanCode(JpegError):
    pass


class MarkerSyntaxError(JpegError):
    pass


class CategoryOverflow(JpegError):
    pass


class MissingCode(JpegError):
    pass


class RdhError(Exception):
    pass


class ZeroInput(RdhError, ValueError):
    pass


class Overflow(RdhError):
    """A marked coefficient would leave the baseline AC range."""

    def __init__(self, message, component=None, block=None, index=None):
        self.component = component
        self.block = block
        self.index = index
        super().__init__(message)


class PayloadTooLarge(RdhError):
    pass


class FrameCorrupt(RdhError):
    pass


class TooLong(RdhError):
    pass


class DimensionMismatch(ValueError):
    pass


class VerificationError(RuntimeError):
    """A marked file did not round-trip to its payload and original coefficients."""
