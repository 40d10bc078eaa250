"""Exception types raised by the solvers and loaders."""


class GncError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateConfiguration(GncError):
    """The weighted measurements do not determine a unique estimate."""


class DegenerateScale(GncError):
    """A quaternion-scale vector too close to zero to recover a pose from."""


class OptimizationFailed(GncError):
    """Every start of a local minimization produced a non-finite objective."""


class NoConsensus(GncError):
    """RANSAC could not find a consensus set at least as large as a minimal sample."""


class ParseError(GncError):
    """Malformed input file. Carries the file name and 1-based line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class UnsupportedFormat(ParseError):
    """A PLY file in a format other than ascii 1.0."""
