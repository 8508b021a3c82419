"""
Run Statistics

One record per synthesis job, appended to a CSV file whose header is
written when the file is created.
"""

import csv
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import List, Optional

logger = logging.getLogger(__name__)

STATS_COLUMNS = (
    "benchmark",
    "method",
    "time_winning_region_s",
    "time_extraction_s",
    "time_total_s",
    "aig_and_gates",
    "per_output_iterations",
    "verified",
)


@dataclass
class SynthStats:
    """Timings and sizes of one job; fields not reached stay at their defaults."""
    benchmark: str
    method: str
    time_winning_region_s: float = 0.0
    time_extraction_s: float = 0.0
    time_total_s: float = 0.0
    aig_and_gates: Optional[int] = None
    per_output_iterations: List[int] = field(default_factory=list)
    verified: Optional[bool] = None

    def to_row(self) -> dict:
        row = asdict(self)
        for key in ("time_winning_region_s", "time_extraction_s", "time_total_s"):
            row[key] = f"{row[key]:.3f}"
        row["aig_and_gates"] = "" if self.aig_and_gates is None else self.aig_and_gates
        row["per_output_iterations"] = " ".join(str(n) for n in self.per_output_iterations)
        row["verified"] = "" if self.verified is None else str(self.verified).lower()
        return row


def append_stats(path: str, stats: SynthStats) -> None:
    """
    Append a record to a stats CSV.

    Args:
        path: CSV file; created with a header if missing or empty
        stats: The record
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=STATS_COLUMNS)
        if new_file:
            writer.writeheader()
        writer.writerow(stats.to_row())
    logger.debug("Stats for %s appended to %s", stats.benchmark, path)


def read_stats(path: str) -> List[dict]:
    """Read back every record of a stats CSV as string dictionaries."""
    with open(path, newline="") as f:
        return list(csv.DictReader(f))
