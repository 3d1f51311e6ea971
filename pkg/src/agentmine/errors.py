"""Exception hierarchy shared by all modules."""


class AgentMineError(Exception):
    """Base class for all toolkit errors."""


class NetStructureError(AgentMineError):
    """A net violates a structural invariant (bipartiteness, isolated node, ...)."""


class InvalidMarking(AgentMineError):
    """A marking refers to unknown places or carries negative counts."""


class UnknownNode(AgentMineError):
    """A node id does not exist in the net at hand."""


class NotEnabled(AgentMineError):
    """Attempt to fire a transition that the current marking does not enable."""


class BudgetExceeded(AgentMineError):
    """A bounded search ran out of budget before reaching a verdict."""


class NotGwf(AgentMineError):
    """A net fails one of the three generalized-workflow-net clauses."""

    def __init__(self, clause: int, node: str, message: str):
        super().__init__(message)
        self.clause = clause
        self.node = node


class Unsafe(AgentMineError):
    """A construction discovered a marking with more than one token in a place."""


class UncheckedMorphism(AgentMineError):
    """An operation requires a certified refinement map but got an unchecked one."""


class MapShapeError(AgentMineError):
    """A node map is not total on the source or not surjective onto the target."""


class NotSmdSafe(AgentMineError):
    """A net required to be safe and covered by sequential components is not."""


class InvalidPartition(AgentMineError):
    """A node grouping does not partition the net or induces an invalid quotient."""


class InvalidChannelSpec(AgentMineError):
    """A channel declaration breaks the one-sender-side/one-receiver-side rule."""

    def __init__(self, channel: str, message: str):
        super().__init__(message)
        self.channel = channel


class ComponentMismatch(AgentMineError):
    """A refinement map does not target a component of the given composition."""


class MapDerivationError(AgentMineError):
    """The label-anchored map heuristic could not resolve a refinement map."""


class ParseError(AgentMineError):
    """A text input could not be parsed; carries the offending location."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.source = source


class EmptyLog(AgentMineError):
    """An event-log source contained no traces."""


class DuplicateLabel(AgentMineError):
    """Two transitions carry the same activity label; replay needs unique labels."""


class PreservationViolation(AgentMineError):
    """Replaying a source trace broke the projection contract of a refinement map."""


class SoundnessContradiction(AgentMineError):
    """A playout deadlocked before the final marking in a net claimed sound."""
