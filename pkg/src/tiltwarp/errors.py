"""Exception types shared across the toolkit.

Everything raised for bad *input* (unreadable files, degenerate geometry,
malformed formats) derives from DataError so the CLI can map it to a
distinct exit code.
"""


class DataError(Exception):
    """Invalid input data or parameters."""


class DecodeError(DataError):
    """Image bytes could not be decoded."""


class DegenerateGeometryError(DataError):
    """Point configuration admits no valid projective map."""


class MeshValidityError(DataError):
    """A mesh cell is concave, folded, or degenerate."""


class FormatError(DataError):
    """A structured file (mesh, flow, manifest) failed to parse."""
