"""Error types shared across the package."""


class DgalgError(Exception):
    """Base class for all package-specific errors."""


class NoSolution(DgalgError):
    """A linear system (typically a lifting problem) has no exact solution."""


class CutoffInsufficient(DgalgError):
    """The requested computation needs data beyond the certified cutoffs."""


class InfinitePiece(DgalgError):
    """A bigraded piece of an evaluation would be infinite-dimensional."""


class NotTruncated(DgalgError):
    """An algebra expected to be n-truncated has homology above degree n."""


class NotSubmodule(DgalgError):
    """A subspace is not closed under the required module action."""


class SquareNotZero(DgalgError):
    """An ideal expected to square to zero does not (n = 0 extensions)."""


class NotSquareZero(DgalgError):
    """A map expected to be a square-zero extension fails a defining condition."""


class ThetaNotIso(DgalgError):
    """The truncated comparison map in the classification is not a homology iso."""


class UnsupportedDiagram(DgalgError):
    """A homotopy-pullback cospan outside the supported shapes."""
