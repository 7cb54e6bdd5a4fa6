"""Exception hierarchy shared by all tetstore modules."""


class TetStoreError(Exception):
    """Base class for every error raised by tetstore."""


class MalformedElementError(TetStoreError, ValueError):
    """An element's rows or quadruple violate the tet-vertex key constraints."""


class MeshError(TetStoreError, ValueError):
    """The mesh as a whole cannot be frozen or queried."""


class DegenerateTetError(TetStoreError, ValueError):
    """A tetrahedron has (numerically) zero volume."""


class ConnectivityError(TetStoreError):
    """A face is shared by more than two elements."""


class NotFoundError(TetStoreError, KeyError):
    """An element or vertex id is not present in the mesh."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class HilbertRangeError(TetStoreError, ValueError):
    """A lattice coordinate or Hilbert code lies outside the curve's domain."""


class TraversalStuckError(TetStoreError):
    """No face of the current element passes the exit cone test."""


class NotContainedError(TetStoreError, LookupError):
    """A query point is not contained in any element of the mesh."""


class ParseError(TetStoreError, ValueError):
    """A text input row could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class CorruptArchiveError(TetStoreError, ValueError):
    """A binary mesh archive has a bad header or is truncated."""


class PipelineError(TetStoreError):
    """A load pipeline stage failed; ``report`` names the stage and cause."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report
