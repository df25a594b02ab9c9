"""Exception types shared across the engine."""


class TutorError(Exception):
    """Base class for all engine errors."""


# --- word bank / resources ingestion ---

class MalformedRow(TutorError):
    def __init__(self, row_number: int, reason: str):
        self.row_number = row_number
        self.reason = reason
        super().__init__(f"row {row_number}: {reason}")


class LevelOutOfRange(TutorError):
    def __init__(self, row_number: int, word: str, level: int):
        self.row_number = row_number
        self.word = word
        self.level = level
        super().__init__(f"row {row_number}: level {level} for {word!r} outside [1, 14]")


class ConflictingDuplicate(TutorError):
    def __init__(self, word: str, levels: tuple):
        self.word = word
        self.levels = levels
        super().__init__(f"word {word!r} appears with conflicting levels {levels}")


class MissingColumn(TutorError):
    def __init__(self, columns: list):
        self.columns = columns
        super().__init__(f"missing required column(s): {', '.join(columns)}")


class RowValidation(TutorError):
    """Aggregated per-row validation report for the resources CSV."""

    def __init__(self, failures: list):
        # failures: list of (row_number, reason)
        self.failures = failures
        lines = "; ".join(f"row {n}: {reason}" for n, reason in failures)
        super().__init__(lines)


# --- scoring ---

class NoSignal(TutorError):
    """Neither the word bank nor the judge produced a level."""


class UnparsableJudgeReply(TutorError):
    def __init__(self, reply: str):
        self.reply = reply
        super().__init__(f"no numeric token in judge reply: {reply!r}")


class OutOfRange(TutorError):
    pass


# --- provider ---

class ProviderError(TutorError):
    def __init__(self, message: str, transient: bool = False):
        self.transient = transient
        super().__init__(message)


class Timeout(ProviderError):
    def __init__(self, message: str):
        super().__init__(message, transient=True)


class NoJsonFound(TutorError):
    def __init__(self, snippet: str):
        self.snippet = snippet
        super().__init__(f"no JSON array found in: {snippet[:200]!r}")


class MalformedJson(TutorError):
    def __init__(self, snippet: str, cause: str):
        self.snippet = snippet
        self.cause = cause
        super().__init__(f"malformed JSON ({cause}) in: {snippet[:200]!r}")


# --- analysis / dialogue ---

class EmptySession(TutorError):
    pass


class SessionClosed(TutorError):
    pass


class Busy(TutorError):
    """A turn is already in flight for this session."""


class UnknownLearner(TutorError):
    pass


# --- store ---

class Forbidden(TutorError):
    """Record exists but belongs to a different learner."""


class NotFound(TutorError):
    pass


class EmptyCatalog(TutorError):
    pass
