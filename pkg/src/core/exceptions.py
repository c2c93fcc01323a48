"""Error hierarchy.

Every failure carries a readable ``detail`` and the process exit code the CLI
returns for it.
"""

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_CONTRACT = 5
EXIT_CHECKPOINT = 6


class QinrError(Exception):
    """Base class for all errors raised by the package."""

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ConfigurationError(QinrError):
    exit_code = EXIT_CONFIG


class ShapeError(QinrError):
    exit_code = EXIT_CONFIG


class QubitIndexError(IndexError, ShapeError):
    """Qubit index outside ``[0, n_qubits)``."""


class InvalidEdgeError(ConfigurationError):
    """Entangling edge that touches one qubit twice or leaves the register."""


class DataError(QinrError):
    exit_code = EXIT_DATA


class IdxParseError(DataError):
    pass


class BadMagicError(IdxParseError):
    pass


class TruncatedFileError(IdxParseError):
    pass


class CountMismatchError(IdxParseError):
    pass


class SampleSizeError(DataError):
    pass


class DomainError(ValueError, QinrError):
    exit_code = EXIT_DATA


class NumericError(QinrError):
    exit_code = EXIT_NUMERIC


class ContractError(QinrError):
    exit_code = EXIT_CONTRACT


class CheckpointError(QinrError):
    exit_code = EXIT_CHECKPOINT


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointCorruptError(CheckpointError):
    pass
