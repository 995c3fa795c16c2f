"""
Exception hierarchy for weaktrap
"""


class WeakTrapError(Exception):
    """Base class for every error raised by the pipeline."""


class EmptySequenceError(WeakTrapError, ValueError):
    def __init__(self, message="empty sequence"):
        super().__init__(message)


class DimensionMismatchError(WeakTrapError, ValueError):
    pass


class ImageDecodeError(WeakTrapError, ValueError):
    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"Cannot decode image {self.path}: {reason}")


class MappingFileError(WeakTrapError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingLabelError(WeakTrapError, KeyError):
    def __init__(self, image_id, what="label"):
        self.image_id = image_id
        super().__init__(f"No {what} for image_id '{image_id}'")

    def __str__(self):
        return self.args[0]


class NoTrainingDataError(WeakTrapError, ValueError):
    def __init__(self, message="no training data"):
        super().__init__(message)


class PredictionFileError(WeakTrapError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IdxFormatError(WeakTrapError, ValueError):
    pass


class IdxHeaderError(IdxFormatError):
    pass


class IdxMagicError(IdxFormatError):
    def __init__(self, path, expected, found):
        self.expected = expected
        self.found = found
        super().__init__(
            f"{path}: bad magic number 0x{found:08x}, expected 0x{expected:08x} ({expected})"
        )


class IdxPayloadError(IdxFormatError):
    pass


class IdxCountMismatchError(IdxFormatError):
    pass


class TestbedError(WeakTrapError, ValueError):
    __test__ = False
