"""Exception hierarchy shared by every SPiKE module"""


class SpikeError(Exception):
    """Base class for all pipeline errors"""

    exit_code = 1


class DimensionError(SpikeError, ValueError):
    """Raised when operand shapes do not agree; reaches the shell as a data error"""

    exit_code = 3

    def __init__(self, op, *shapes):
        self.op = op
        self.shapes = tuple(tuple(s) for s in shapes)
        listed = ' vs '.join(str(s) for s in self.shapes)
        super().__init__(f'{op}: incompatible shapes {listed}')


class ConfigError(SpikeError, ValueError):
    """Invalid configuration value; names the offending key"""

    exit_code = 2

    def __init__(self, key, message):
        self.key = key
        super().__init__(f'{key}: {message}')


class DataError(SpikeError):
    """Malformed or inconsistent input data"""

    exit_code = 3

    def __init__(self, message, path=None, offset=None):
        self.path = str(path) if path is not None else None
        self.offset = offset
        where = ''
        if self.path is not None:
            where = f' [{self.path}'
            if offset is not None:
                where += f' @ {offset}'
            where += ']'
        super().__init__(f'{message}{where}')


class CheckpointError(DataError):
    """Corrupt, truncated or incompatible checkpoint file"""


class EmptySceneError(DataError):
    """No points or clusters left to work with"""


class NumericError(SpikeError, ArithmeticError):
    """Non-finite value produced during computation"""

    exit_code = 4

    def __init__(self, name, message):
        self.name = name
        super().__init__(f'{name}: {message}')
