"""
Errors module
-------------
Exception classes raised across csicast. Every class derives from
CsiCastError and from the closest builtin exception, so callers may catch
either.

Created: Autumn 2026
"""


class CsiCastError(Exception):
    """Base class of all csicast errors."""


# Shapes, values and configuration
class DimensionMismatch(CsiCastError, ValueError):
    pass


class NonFiniteValue(CsiCastError, ValueError):
    pass


class ConfigError(CsiCastError, ValueError):
    pass


class InvalidScenario(CsiCastError, ValueError):
    pass


class InvalidTimeAxis(CsiCastError, ValueError):
    """Time stamps not evenly spaced or not contiguous."""


# Persistence
class IoError(CsiCastError, IOError):
    pass


class BadMagic(IoError):
    pass


class VersionUnsupported(IoError):
    pass


class MissingData(IoError):
    pass


# Noise models
class ZeroSignal(CsiCastError, ArithmeticError):
    pass


class ZeroNoise(CsiCastError, ArithmeticError):
    pass


class InvalidParams(CsiCastError, ValueError):
    pass


class CalibrationDiverged(CsiCastError, RuntimeError):
    pass


# Prediction and training
class EmptyHistory(CsiCastError, ValueError):
    pass


class ZeroTarget(CsiCastError, ArithmeticError):
    pass


class NonFiniteLoss(CsiCastError, ArithmeticError):
    pass


# Evaluation
class InvalidNoiseVar(CsiCastError, ValueError):
    pass


class DuplicateModel(CsiCastError, ValueError):
    pass


class EmptySubset(CsiCastError, ValueError):
    pass


class InvalidRecord(CsiCastError, ValueError):
    pass


class AllZeroCosts(CsiCastError, ArithmeticError):
    pass


class SeriesTooShort(CsiCastError, ValueError):
    pass
