"""Exception types shared across the toolkit."""


class SeqlabError(Exception):
    """Base class for all toolkit errors."""


class ParseError(SeqlabError):
    """Malformed column input; carries the 1-based line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ConfigError(SeqlabError):
    """Invalid or inconsistent configuration."""


class EvaluationError(SeqlabError):
    """Gold/predicted mismatch during scoring; names the offending sentence."""


class ContractError(SeqlabError):
    """A caller violated an API precondition."""
