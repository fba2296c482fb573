"""Exception types raised by wavekin."""


class WavekinError(Exception):
    """Base class for all package errors."""


class DomainError(WavekinError, ValueError):
    """A frequency argument lies outside the domain of a formula."""


class GridError(WavekinError, ValueError):
    pass


class DimensionError(WavekinError, ValueError):
    pass


class NonFiniteError(WavekinError, FloatingPointError):
    """A kernel value or state component overflowed to inf/nan."""


class ConfigError(WavekinError, ValueError):
    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
