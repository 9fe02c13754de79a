"""Exception types raised across the package."""


class InvalidStateError(ValueError):
    """A matrix fails the density-matrix checks (Hermitian, unit trace, PSD)."""


class InvalidChannelError(ValueError):
    """Kraus operators do not satisfy the completeness relation."""


class PartitionError(ValueError):
    """A bipartition index does not split the subsystems."""


class PoleError(ArithmeticError):
    """A time-local rate was evaluated on (or next to) one of its poles."""

    def __init__(self, location, message=None):
        self.location = float(location)
        super().__init__(message or f"rate has a pole at t = {self.location!r}")


class ConfigurationError(ValueError):
    """Inconsistent experiment or candidate-set configuration."""


class FreshQubitsExhausted(RuntimeError):
    """The collision model ran out of fresh environment qubits."""


class ContractError(ValueError):
    """An input lacks data that the operation's contract requires."""
