"""Exception types shared across the package."""


class SrlflowError(Exception):
    """Base class for all srlflow errors."""


class MissingRequiredColumn(SrlflowError):
    def __init__(self, name: str):
        super().__init__(f"required column missing from header: {name}")
        self.name = name


class MalformedDelimitedText(SrlflowError):
    """Input text is not well-formed delimited text (e.g. unbalanced quoting)."""


class UnparseableTimestamp(SrlflowError):
    def __init__(self, raw):
        super().__init__(f"cannot parse timestamp: {raw!r}")
        self.raw = raw


class NegativeTimestamp(SrlflowError):
    def __init__(self, raw):
        super().__init__(f"timestamp before epoch: {raw!r}")
        self.raw = raw


class MixedUsers(SrlflowError):
    def __init__(self, user_ids):
        ids = ", ".join(sorted(user_ids))
        super().__init__(f"events belong to more than one user: {ids}")
        self.user_ids = frozenset(user_ids)


class AllExcluded(SrlflowError):
    """Every chart category was excluded; nothing left to plot."""


class InvalidSpec(SrlflowError):
    """A synthetic-corpus spec violates its constraints."""
