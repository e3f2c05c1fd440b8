"""Exception hierarchy shared by every admsim module."""


class AdmError(ValueError):
    """Base class for validation and domain errors."""


class EmptySignal(AdmError):
    pass


class NonFiniteSample(AdmError):
    def __init__(self, index: int):
        super().__init__(f"non-finite sample at index {index}")
        self.index = index


class InvalidSampleRate(AdmError):
    pass


class InvalidConfig(AdmError):
    pass


class InvalidGainCode(AdmError):
    pass


class LengthMismatch(AdmError):
    pass


class NonPositiveThreshold(AdmError):
    def __init__(self, index: int):
        super().__init__(f"threshold must be > 0 (index {index})")
        self.index = index


class EmptyStreamLength(AdmError):
    pass


class InvalidCutoff(AdmError):
    pass


class InvalidSpec(AdmError):
    pass


class SaturatedRegime(AdmError):
    """Raised when a rate-model sweep reaches the refractory limit."""


class EmptyRecords(AdmError):
    pass


class MalformedFile(AdmError):
    """A trace or event file that cannot be parsed; carries the 1-based line number."""

    def __init__(self, path, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line
