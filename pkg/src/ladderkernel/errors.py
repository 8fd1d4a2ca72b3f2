"""Exception hierarchy shared by all ladderkernel modules."""


class LadderError(Exception):
    """Base class for errors raised by ladderkernel."""


class InvalidSpecError(LadderError, ValueError):
    """A model, state or analysis parameter is outside its allowed range."""


class ContractError(LadderError, ValueError):
    """An input violates an operation's precondition (shape, hermiticity, grid)."""


class SingularDeconvolutionError(LadderError, ValueError):
    """The memory kernel cannot be extracted because a(0) vanishes."""


class ConfigError(LadderError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
