"""
Synthesis Error Types

This module defines the exception hierarchy shared by the parser, the oracles,
the extraction algorithms and the command-line driver. UNSAT answers and
unrealizable specifications are verdicts and never raise.
"""

from typing import Optional


class SynthesisError(Exception):
    """Base class for every error raised by the synthesizer."""


class AigerParseError(SynthesisError):
    """Raised when an AIGER file is malformed."""

    def __init__(self, message: str, line: Optional[int] = None):
        """
        Initialize the parse error.

        Args:
            message: Description of the problem
            line: 1-based line number in the input, if known
        """
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedGraphError(SynthesisError):
    """Raised when an and-inverter graph references undefined nodes or is cyclic."""


class UnsupportedSpecError(SynthesisError):
    """Raised when an AIGER file is not a single-bad-output safety specification."""


class ContractError(SynthesisError):
    """Raised when an oracle is called outside its precondition."""


class StrategyConflictError(SynthesisError):
    """Raised when the must-be-true and must-be-false sets of an output overlap."""


class InconsistentStrategyError(SynthesisError):
    """Raised when neither polarity of an output is allowed for some input."""


class InterfaceMismatchError(SynthesisError):
    """Raised when an implementation does not match the interface of its specification."""


class ExternalInterpolatorError(SynthesisError):
    """Raised when a method needs an interpolation hook that is not configured."""


class SelfCheckError(SynthesisError):
    """Raised when a run-time postcondition check fails."""


class SynthesisTimeout(SynthesisError):
    """Raised when the configured time budget is exhausted."""
