"""
Extraction results shared by all circuit-extraction methods.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple

import networkx as nx

from modules.logic.cnf import Cnf


@dataclass
class OutputStats:
    """Per-output counters of one extraction run."""
    iterations: int = 0
    clauses: int = 0
    literals: int = 0
    check_clauses_added: int = 0
    core_clauses_added: int = 0


@dataclass
class ExtractionResult:
    """
    Learned output functions.

    `circuits` lists (output variable, f_v) in the order the outputs were
    processed. An edge u -> v in `dep_graph` means f_u references output v.
    `shared_aux` holds the transition-relation auxiliaries that some f_v
    references; their definitions come from the game's gate definitions.
    """
    method: str
    circuits: List[Tuple[int, Cnf]] = field(default_factory=list)
    dep_graph: nx.DiGraph = field(default_factory=nx.DiGraph)
    shared_aux: Set[int] = field(default_factory=set)
    stats: Dict[int, OutputStats] = field(default_factory=dict)

    @property
    def total_clauses(self) -> int:
        return sum(len(f) for _, f in self.circuits)

    @property
    def total_literals(self) -> int:
        return sum(f.literal_count for _, f in self.circuits)

    def iteration_counts(self) -> List[int]:
        """Learning iterations per output in processing order."""
        return [self.stats[v].iterations if v in self.stats else 0 for v, _ in self.circuits]
