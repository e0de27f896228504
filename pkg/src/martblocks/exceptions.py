"""Exception types raised by martblocks."""


class MartblocksError(Exception):
    """Base class for all library errors."""


class LevelRangeError(MartblocksError, IndexError):
    """A filtration level index is outside ``1..K``."""


class DomainError(MartblocksError, ValueError):
    """An argument violates an operation's precondition."""


class ReconstructionError(MartblocksError, ValueError):
    """A decomposition does not sum back to its target."""


class CertificateError(MartblocksError, ValueError):
    """A block or subatom fails its validity certificate."""


class SizeError(MartblocksError, ValueError):
    """The instance is too large for an exact solver."""


class ConfigurationError(MartblocksError, ValueError):
    """An experiment configuration is inconsistent."""
