"""Exception hierarchy shared by all modules."""


class EigenoverlapError(Exception):
    """Base class for all package-specific errors."""


class CoincidentPoints(EigenoverlapError):
    """Two spectral parameters coincide where a formula has a pole."""


class DegenerateConfig(EigenoverlapError):
    """A point configuration violates a pairwise-distinctness requirement."""


class NotComparable(EigenoverlapError):
    """An operation required an order relation that does not hold."""


class DegenerateSpectrum(EigenoverlapError):
    """Two diagonal values are too close for the eigenvector recursion."""


class PoleCollision(EigenoverlapError):
    """A transfer-matrix argument coincides with one of its poles."""


class ResolventPole(EigenoverlapError):
    """A resolvent argument is too close to an eigenvalue."""


class WindowOverlap(EigenoverlapError):
    """Window radius too large: spectral windows are not disjoint."""


class NearDefective(EigenoverlapError):
    """Eigenvalue gap too small to build a biorthogonal eigenbasis."""


class NonConvergence(EigenoverlapError):
    """An iterative factorization failed to converge."""


class LatticeCapExceeded(EigenoverlapError):
    """Requested lattice size is above the configured cap."""
