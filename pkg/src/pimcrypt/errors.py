"""Exception types shared across the package."""


class PimcryptError(Exception):
    """Base class for all package-specific errors."""


class AlignmentError(PimcryptError, ValueError):
    """A byte length or offset violates an alignment constraint."""


class MramAccessError(PimcryptError, ValueError):
    """An MRAM access is misaligned or exceeds the maximum access size."""


class CapacityError(PimcryptError, ValueError):
    """A workload does not fit in WRAM or MRAM."""


class ProfileError(PimcryptError, ValueError):
    """A machine profile or config document violates its invariants."""
