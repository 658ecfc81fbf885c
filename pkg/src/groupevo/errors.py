class GroupEvoError(Exception):
    """Base class for pipeline errors."""


class InputError(GroupEvoError, ValueError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class StageError(GroupEvoError):
    """A pipeline stage failed on valid input (CLI exit code 3)."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
