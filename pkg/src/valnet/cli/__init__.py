"""Textual front end: document format, runner, table rendering and the CLI."""

from .render import fmt_value, render
from .session import Session, StaleResultError, StatementError, validate_document
from .syntax import NetworkDocument, ParseError, format_document, parse

__all__ = [
    "NetworkDocument", "ParseError", "Session", "StaleResultError", "StatementError",
    "fmt_value", "format_document", "parse", "render", "validate_document",
]
