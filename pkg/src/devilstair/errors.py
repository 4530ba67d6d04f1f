"""Exception types shared by the compute modules."""


class ConvergenceError(RuntimeError):
    """A lattice sum or eigensolve did not reach the requested tolerance."""


class SectorCapError(ValueError):
    """A basis or enumeration would exceed its configured size cap."""


class WindowError(ValueError):
    """A defect construction would touch the edge of its finite window."""
