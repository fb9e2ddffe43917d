"""Exception hierarchy shared by the library and the command-line driver.

Every error carries the exit code the CLI reports for it. Each class also
derives from the builtin a caller would naturally catch, so library users can
keep writing ``except ValueError``.
"""


class QRNGError(Exception):
    """Base class for all errors raised by this package."""
    exit_code = 3


class ConfigurationError(QRNGError, ValueError):
    """Malformed configuration file, mesh description or command-line usage."""
    exit_code = 2


class MeshLabelError(QRNGError, KeyError):
    """An MZI label such as ``"3E"`` does not address a cell of the mesh."""
    exit_code = 2

    def __str__(self):
        # KeyError quotes its argument; keep the plain message.
        return str(self.args[0]) if self.args else ''


class DimensionError(QRNGError, ValueError):
    exit_code = 3


class DomainError(QRNGError, ValueError):
    exit_code = 3


class SizeLimitError(QRNGError, ValueError):
    """Exponential-cost guard tripped (permanent size, state enumeration)."""
    exit_code = 3


class InsufficientDataError(QRNGError, ValueError):
    exit_code = 3


class NoEntropyError(QRNGError, RuntimeError):
    """The generator kept discarding every pair until its attempt budget ran out."""
    exit_code = 3


class NumericalIntegrityError(QRNGError, ArithmeticError):
    exit_code = 4
