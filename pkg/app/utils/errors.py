"""
Error types shared by the services and the command layer
"""
from functools import wraps
from typing import Optional

import click


class TRSError(Exception):
    """Base class for every failure raised by the toolkit"""


class ParseError(TRSError, ValueError):
    """Malformed input text; carries the offending line when known"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class GraphError(TRSError, ValueError):
    pass


class DescriptorError(TRSError):
    pass


class ClusteringError(TRSError, ValueError):
    pass


class SelectionError(TRSError, ValueError):
    pass


class EvaluationError(TRSError, ValueError):
    pass


class ConfigError(TRSError, ValueError):
    pass


def cli_errors(f):
    """
    Decorator: map domain errors onto click exits.

    ConfigError -> usage error (exit 2), other TRSError / OSError -> exit 1.
    """
    @wraps(f)
    def decorated(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ConfigError as e:
            raise click.UsageError(str(e))
        except (TRSError, OSError) as e:
            raise click.ClickException(str(e))

    return decorated
