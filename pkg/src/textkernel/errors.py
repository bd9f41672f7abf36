"""Exception types raised by the textkernel library."""


class TextKernelError(Exception):
    """Base class for all library errors."""


class EmptyMask(TextKernelError):
    """A mask with no foreground pixels was given where one is required."""


class EmptyRegion(TextKernelError):
    """Center-point generation needs a region with at least one foreground pixel."""


class DegeneratePolygon(TextKernelError):
    """Polygon has zero area."""


class ZeroPerimeter(TextKernelError):
    """Shrink offset is undefined for zero perimeter."""


class ShapeMismatch(TextKernelError):
    """Two rasters that must share a shape do not."""


class SingularSystem(TextKernelError):
    """The TPS linear system is singular (collinear or duplicate source points)."""


class DegenerateLine(TextKernelError):
    """Center-line has coincident consecutive points; no tangent exists."""


class InfeasibleLength(TextKernelError):
    """Label sequence cannot be aligned within the given number of timesteps."""


class EmptyReference(TextKernelError):
    """CR/AR need a non-empty reference sequence."""


class NoGroundTruth(TextKernelError):
    """Kernel-box grouping needs at least one ground-truth box."""


class SpecOutOfBounds(TextKernelError):
    """Synthetic strip spec violates its invariants."""


class OverlapDetected(TextKernelError):
    """Strips overlap when composited onto a page."""
