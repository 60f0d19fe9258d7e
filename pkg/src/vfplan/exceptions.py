"""Exception hierarchy shared by all vfplan modules."""


class VFPlanError(Exception):
    """Base class for every error raised by vfplan."""


class FloorplanParseError(VFPlanError, ValueError):
    """Malformed floorplan JSON (syntax or schema)."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class FloorplanValidationError(VFPlanError, ValueError):
    """Well-formed floorplan that violates a geometric invariant."""

    def __init__(self, message, ring=None):
        super().__init__(message)
        self.ring = ring


class DomainError(VFPlanError, ValueError):
    """A query point lies outside the floorplan interior."""


class ContractError(VFPlanError, ValueError):
    """Inputs computed against incompatible data (e.g. two boundary sets)."""


class SkeletonError(VFPlanError):
    """Skeleton extraction failed, usually because the grid is too coarse."""


class InfeasibleError(VFPlanError):
    """No viewpoint network satisfies the constraints.

    ``segment_ids`` lists boundary segments that cannot be covered, and
    ``components`` the candidate groups that cannot be joined, when known.
    """

    def __init__(self, message, segment_ids=(), components=()):
        super().__init__(message)
        self.segment_ids = list(segment_ids)
        self.components = [list(c) for c in components]

    def report(self):
        lines = [str(self)]
        if self.segment_ids:
            lines.append("uncoverable segment ids: " + ",".join(map(str, self.segment_ids)))
        for i, comp in enumerate(self.components):
            lines.append(f"component {i}: " + ",".join(map(str, comp)))
        return "\n".join(lines)


class OracleLimitError(VFPlanError, ValueError):
    """Exact enumeration refused: too many candidates."""
