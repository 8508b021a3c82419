"""
Run Options

Resolved settings handed from the driver to the synthesis algorithms, and the
wall-clock deadline that bounds every learning loop.
"""

import time
from dataclasses import dataclass, field
from typing import Optional

from modules.core.errors import SynthesisTimeout
from modules.utility.config import Config


class Deadline:
    """Wall-clock budget checked once per loop iteration."""

    def __init__(self, seconds: Optional[float]):
        """
        Initialize the deadline.

        Args:
            seconds: Budget in seconds from now; None or a non-positive value means unlimited
        """
        self.seconds = seconds if seconds and seconds > 0 else None
        self.start = time.monotonic()

    @property
    def remaining(self) -> Optional[float]:
        """Seconds left, or None when unlimited."""
        if self.seconds is None:
            return None
        return self.seconds - (time.monotonic() - self.start)

    def check(self) -> None:
        """
        Raise if the budget is exhausted.

        Raises:
            SynthesisTimeout: If the deadline has passed
        """
        remaining = self.remaining
        if remaining is not None and remaining <= 0:
            raise SynthesisTimeout(f"time budget of {self.seconds:g}s exceeded")


@dataclass(frozen=True)
class SynthOptions:
    """Options shared by the winning-region computation and all extraction methods."""
    method: str = "sl"
    negw: str = "aux"
    minimize_cores: bool = True
    post_minimize: bool = True
    self_check: bool = False
    deadline: Deadline = field(default_factory=lambda: Deadline(None))

    @property
    def dependency_optimization(self) -> bool:
        """True for the interpolation variant with dependency and shared-aux optimization."""
        return self.method == "sl"

    def tick(self) -> None:
        """Check the deadline; called once per loop iteration."""
        self.deadline.check()

    @classmethod
    def from_config(cls, config: Config, timeout: Optional[float] = None) -> "SynthOptions":
        """
        Build options from a configuration.

        Args:
            config: The application configuration
            timeout: Optional time budget in seconds

        Returns:
            The resolved options
        """
        return cls(
            method=config.get("synthesis.method", "sl"),
            negw=config.get("synthesis.negw", "aux"),
            minimize_cores=bool(config.get("synthesis.minimize_cores", True)),
            post_minimize=bool(config.get("synthesis.post_minimize", True)),
            self_check=bool(config.get("checks.self_check", False)),
            deadline=Deadline(timeout),
        )


DEFAULT_OPTIONS = SynthOptions()
