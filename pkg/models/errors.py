class PlantSpaceError(Exception):
    """Base class for all model, checker and pipeline errors."""


class UnsupportedFragment(PlantSpaceError):
    """Raised when negation or disjunction (or an unknown guard) sits above occupancy/edge facts."""


class EmptySelection(PlantSpaceError):
    """Raised when an aggregation receives no facts to work on."""


class UnknownNode(PlantSpaceError):
    """Raised when a graph or transition-system query names a node that does not exist."""

    def __init__(self, node):
        super().__init__(f"unknown node: {node}")
        self.node = node


class UnknownOwner(PlantSpaceError):
    """Raised when a query names an owner that no model defines."""

    def __init__(self, owner):
        super().__init__(f"unknown owner: {owner}")
        self.owner = owner


class UnresolvedEventTime(PlantSpaceError):
    """Raised when a TimeStamp guard is grounded without a trigger binding."""

    def __init__(self, event):
        super().__init__(f"event-relative time for '{event}' has no trigger binding")
        self.event = event


class PointOutOfBounds(PlantSpaceError):
    """Raised when a ground point falls outside the DIMACS export bounds."""
