"""Exception hierarchy shared by every ftgemm module."""


class FtGemmError(ValueError):
    """Base class for all errors raised by ftgemm."""


class DimensionMismatch(FtGemmError):
    pass


class InvalidRange(FtGemmError):
    pass


class InvalidParams(FtGemmError):
    pass


class OffsetOutOfRange(FtGemmError):
    pass


class InvalidArguments(FtGemmError):
    pass


class SEUViolation(FtGemmError):
    """More than one fault requested for a single detection interval."""


class GammaTooLarge(FtGemmError):
    """Overall error rate >= 1/2, where the offline restart expectation diverges."""


class NonTermination(FtGemmError):
    """Offline recomputation of one epoch kept failing."""


class FormatError(FtGemmError):
    """Malformed FTGM matrix file, fault plan text or config file."""
