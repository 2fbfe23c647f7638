"""Exception types shared across the simulator."""


class SimError(Exception):
    """Base class for simulator errors."""


class ConfigurationError(SimError):
    """Invalid construction parameters or config file contents."""


class DataError(SimError):
    """Malformed or inconsistent external data (CSV streams, logs)."""


class AssignmentError(SimError):
    """Beam assignment violates the one-beam-per-UE constraint."""


class StateError(SimError):
    """Operation invoked before required state was resolved."""
