"""Exception types shared across the pipeline."""


class UpdateBenchError(Exception):
    """Base class for all errors raised by this package."""


class UnterminatedComment(UpdateBenchError):
    def __init__(self, offset: int):
        super().__init__(f"unterminated block comment starting at byte {offset}")
        self.offset = offset


class LexError(UpdateBenchError):
    def __init__(self, offset: int, snippet: str = ""):
        super().__init__(f"no token starts at byte {offset}: {snippet!r}")
        self.offset = offset


class ParseError(UpdateBenchError):
    pass


class RepoError(UpdateBenchError):
    pass


class DegenerateSplit(UpdateBenchError):
    pass


class UnmappableToken(UpdateBenchError):
    def __init__(self, token: str):
        super().__init__(f"abstract id {token!r} has no entry in the backward map")
        self.token = token


class VocabError(UpdateBenchError):
    pass


class LengthError(UpdateBenchError):
    pass


class TrainingDiverged(UpdateBenchError):
    """Raised when the training loss becomes non-finite.

    Carries the last finite parameter set so callers can checkpoint it.
    """

    def __init__(self, message: str, last_params=None):
        super().__init__(message)
        self.last_params = last_params


class AlignmentError(UpdateBenchError):
    def __init__(self, message: str, missing_ids=()):
        super().__init__(message)
        self.missing_ids = list(missing_ids)


class ConfigError(UpdateBenchError):
    pass
