class ConvoteError(Exception):
    """Base class for every error the toolkit raises on purpose."""


class ParseError(ConvoteError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class IntegrityError(ConvoteError):
    pass


class ConfigurationError(ConvoteError):
    pass


class TrainingError(ConvoteError):
    pass


class LabelingError(ConvoteError):
    pass


class EvaluationError(ConvoteError):
    pass
