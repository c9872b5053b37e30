"""
Jerarquía de errores del framework EMF.

Dos ramas, una por código de salida de la CLI:
  - UsageError (exit 1): parámetros o configuración inválidos
  - DataError  (exit 2): datos, ficheros o numérica que no permiten continuar
"""


class EMFError(Exception):
    exit_code = 1


class UsageError(EMFError, ValueError):
    exit_code = 1


class DataError(EMFError, ValueError):
    exit_code = 2


# --- Uso / configuración ---

class InvalidArityError(UsageError):
    pass


class InvalidQuantifierError(UsageError):
    pass


class InvalidMeasureError(UsageError):
    pass


class ConfigError(UsageError):
    pass


# --- Datos ---

class EmptyBandError(DataError):
    pass


class TooShortError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class NumericalError(DataError):
    pass


class DimensionError(DataError):
    pass


class SplitError(DataError):
    pass


class DatasetError(DataError):
    pass


class MissingFileError(DatasetError):
    pass


class RaggedDataError(DatasetError):
    pass


class UnknownLabelError(DatasetError):
    pass


class InvalidSamplingRateError(DatasetError):
    pass


class BundleError(DataError):
    pass


class BundleVersionError(BundleError):
    pass


class CorruptBundleError(BundleError):
    pass


class OutOfRangeError(UsageError):
    pass
