"""Exception hierarchy shared by all certikit modules.

Each class maps to one CLI exit code; see ``certikit.cli``.
"""


class CertikitError(Exception):
    """Base class for all certikit errors."""

    exit_code = 1


class InputError(CertikitError):
    """Malformed input: bad indices, labels, dimensions, config keys."""

    exit_code = 2


class CapacityError(CertikitError):
    """A combinatorial guard was exceeded (enumeration would blow up)."""

    exit_code = 3


class NumericalFailureError(CertikitError):
    """The LP engine or a reduction lost numerical footing."""

    exit_code = 4


class NotCertifiableError(CertikitError):
    """The requested (test, label) pair cannot be certified from the data.

    Carries the hypothesis that breaks agreement when one is known.
    """

    exit_code = 5

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InsufficientSampleError(NotCertifiableError):
    """A sample stream ran out before enough qualifying data was seen."""

    def __init__(self, message, chunks_scanned=0):
        super().__init__(message)
        self.chunks_scanned = chunks_scanned


class UnboundableError(NotCertifiableError):
    """No finite sample size can certify (certificate coefficient is zero)."""
