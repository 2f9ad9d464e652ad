"""Exception types shared across the package."""


class PartmapError(Exception):
    """Base class for all package-specific errors."""


class OutOfRange(PartmapError):
    """A vector falls outside the encodable range of a code book."""


class UnknownNode(PartmapError):
    """A node id is not present in the memory graph."""


class SelfEdge(PartmapError):
    """An edge was requested from a node to itself."""


class PatternSpaceExhausted(PartmapError):
    """Repeated resampling failed to find a sufficiently distinct engram pattern."""


class NoActivePart(PartmapError):
    """An attention shift was requested with no part currently active."""


class NoCandidateInRange(PartmapError):
    """No code cell is consistent with the requested part location."""


class UnknownPart(PartmapError):
    """A part id is not present in the simulated world."""


class OutOfSensorRange(PartmapError):
    """The requested part is farther away than the sensor can report."""


class AgentOnPart(PartmapError):
    """The agent is exactly on top of the requested part; no direction exists."""


class PackingInfeasible(PartmapError):
    """World generation could not place parts at the requested separation."""


class ScenarioError(PartmapError):
    """A scenario file is malformed or violates the scenario schema."""
