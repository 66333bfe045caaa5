"""Exception hierarchy shared by all modules.

The CLI maps these onto stable exit codes, so new failure modes should
subclass the closest existing class rather than ``NodalAtlasError``
directly.
"""


class NodalAtlasError(Exception):
    """Base class for all library errors."""


class GeometryError(NodalAtlasError, ValueError):
    """Invalid polygon, point, or geometric precondition."""


class MarkerInconsistencyError(GeometryError):
    """Triangle marker points do not follow the expected ordering."""


class CoupledStateError(GeometryError):
    """The two particles coincide, so the mirror line is undefined."""


class SimulationError(NodalAtlasError, RuntimeError):
    """A stochastic simulation could not advance."""


class StepTooLargeError(SimulationError):
    """A single time step needed more boundary bounces than allowed."""


class VertexHitError(SimulationError):
    """A step passed exactly through a polygon vertex."""


class MeshError(NodalAtlasError, RuntimeError):
    """The domain could not be meshed at the requested resolution."""


class SpectralError(NodalAtlasError, RuntimeError):
    """Eigensolver failure or an invalid spectral result."""


class NodalDomainError(SpectralError):
    """The computed eigenfunction does not split the domain in two."""


class SpecError(NodalAtlasError, ValueError):
    """A domain or suite specification could not be parsed."""


class ConfigError(NodalAtlasError, ValueError):
    """A suite configuration names an unknown claim or bad option."""
