"""Exception hierarchy shared by the library and the CLI (exit codes live here)."""


class NlpageError(Exception):
    exit_code = 1


class InputError(NlpageError, ValueError):
    """Malformed input: unknown page, bad file, invalid parameter."""

    exit_code = 3


class InstanceError(NlpageError):
    """The instance/trace pair cannot be served (e.g. only unremovable pages left to evict)."""

    exit_code = 3


class ResourceLimitError(NlpageError):
    """A brute-force routine was asked to enumerate more subsets than allowed."""

    exit_code = 4


class InvariantError(NlpageError, AssertionError):
    """A run produced output that breaks one of its certified properties."""

    exit_code = 2

    def __init__(self, invariant, detail=""):
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"{invariant}: {detail}" if detail else invariant)
