"""Exception hierarchy shared by the geometry modules."""


class GeometryError(Exception):
    """Base class for all numerical-geometry failures."""


class DimensionError(GeometryError, ValueError):
    pass


class DegenerateInputError(GeometryError):
    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class BoundaryError(GeometryError):
    def __init__(self, message, required_margin=None):
        super().__init__(message)
        self.required_margin = required_margin


class ImmersionError(GeometryError):
    pass


class NotLagrangianError(GeometryError):
    pass


class FrameError(GeometryError):
    pass


class SingularityError(GeometryError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class DivergenceError(GeometryError):
    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class RangeError(GeometryError, ValueError):
    pass
