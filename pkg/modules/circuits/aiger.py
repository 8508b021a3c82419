"""
AIGER Circuits

In-memory and-inverter graphs together with readers for the ASCII (`aag`)
and binary (`aig`) AIGER formats and a writer for the ASCII format.

An AIGER literal is 2 * index + negation bit; index 0 is the constant, so
literal 0 is false and literal 1 is true. Latches always reset to 0.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Set, Tuple, Union

from modules.core.errors import AigerParseError, UnsupportedSpecError

logger = logging.getLogger(__name__)

CONTROLLABLE_PREFIX = "controllable_"


@dataclass
class Aig:
    """
    An and-inverter graph with inputs, latches and outputs.

    Equality is structural and ignores the comment section.
    """
    max_var_index: int = 0
    inputs: List[int] = field(default_factory=list)
    latches: List[Tuple[int, int]] = field(default_factory=list)
    outputs: List[int] = field(default_factory=list)
    and_gates: List[Tuple[int, int, int]] = field(default_factory=list)
    input_names: Dict[int, str] = field(default_factory=dict)
    latch_names: Dict[int, str] = field(default_factory=dict)
    output_names: Dict[int, str] = field(default_factory=dict)
    comments: List[str] = field(default_factory=list, compare=False)
    # literal driving each controllable input of the specification, by input
    # position; set by the circuit builder and not part of the file format
    controls: Dict[int, int] = field(default_factory=dict, compare=False)

    @property
    def num_ands(self) -> int:
        return len(self.and_gates)

    def input_name(self, position: int) -> str:
        """Symbol of an input, or a positional default."""
        return self.input_names.get(position, f"i{position}")

    def controllable_indices(self) -> List[int]:
        """Positions of the inputs whose name marks them as controllable."""
        return [
            pos for pos in range(len(self.inputs))
            if self.input_names.get(pos, "").startswith(CONTROLLABLE_PREFIX)
        ]

    def uncontrollable_indices(self) -> List[int]:
        controllable = set(self.controllable_indices())
        return [pos for pos in range(len(self.inputs)) if pos not in controllable]

    def gate_map(self) -> Dict[int, Tuple[int, int]]:
        """AND-gate operands by output index."""
        return {lhs >> 1: (rhs0, rhs1) for lhs, rhs0, rhs1 in self.and_gates}

    def validate(self, strict_order: bool = False, line_of: Optional[Callable[[str, int], Optional[int]]] = None) -> None:
        """
        Check that every literal is defined exactly once and every use is defined.

        Args:
            strict_order: Also require lhs > rhs0 and lhs > rhs1 for every AND gate
            line_of: Maps (section, position) to a line number for error messages

        Raises:
            AigerParseError: If the graph violates an invariant
        """
        locate = line_of or (lambda section, position: None)
        defined: Set[int] = set()

        def define(lit: int, section: str, position: int) -> None:
            line = locate(section, position)
            if lit & 1 or lit < 2:
                raise AigerParseError(f"{section} literal {lit} must be even and non-constant", line)
            if lit >> 1 > self.max_var_index:
                raise AigerParseError(
                    f"{section} literal {lit} exceeds maximum variable index {self.max_var_index}", line
                )
            if lit >> 1 in defined:
                raise AigerParseError(f"{section} literal {lit} is defined twice", line)
            defined.add(lit >> 1)

        for k, lit in enumerate(self.inputs):
            define(lit, "input", k)
        for k, (cur, _) in enumerate(self.latches):
            define(cur, "latch", k)
        for k, (lhs, rhs0, rhs1) in enumerate(self.and_gates):
            define(lhs, "and", k)
            if strict_order and not (lhs > rhs0 and lhs > rhs1):
                raise AigerParseError(f"AND gate {lhs} is not ordered", locate("and", k))

        def use(lit: int, section: str, position: int) -> None:
            if lit >> 1 != 0 and lit >> 1 not in defined:
                raise AigerParseError(f"{section} uses undefined literal {lit}", locate(section, position))

        for k, (_, nxt) in enumerate(self.latches):
            use(nxt, "latch", k)
        for k, lit in enumerate(self.outputs):
            use(lit, "output", k)
        for k, (_, rhs0, rhs1) in enumerate(self.and_gates):
            use(rhs0, "and", k)
            use(rhs1, "and", k)


class _Lines:
    """Line cursor over the text part of an AIGER file."""

    def __init__(self, lines: List[str], first_number: int = 1):
        self.lines = lines
        self.pos = 0
        self.first_number = first_number

    @property
    def number(self) -> int:
        return self.first_number + self.pos

    def at_end(self) -> bool:
        return self.pos >= len(self.lines)

    def next(self, what: str) -> str:
        if self.at_end():
            raise AigerParseError(f"unexpected end of file, expected {what}", self.number)
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def ints(self, what: str, counts: Iterable[int]) -> List[int]:
        line = self.next(what)
        tokens = line.split()
        if len(tokens) not in counts:
            raise AigerParseError(f"malformed {what} line {line!r}", self.number - 1)
        try:
            return [int(t) for t in tokens]
        except ValueError:
            raise AigerParseError(f"malformed {what} line {line!r}", self.number - 1) from None


def _parse_header(line: str, magic: str) -> Tuple[int, int, int, int, int]:
    tokens = line.split()
    if len(tokens) < 6 or tokens[0] != magic:
        raise AigerParseError(f"malformed header {line!r}", 1)
    try:
        numbers = [int(t) for t in tokens[1:]]
    except ValueError:
        raise AigerParseError(f"malformed header {line!r}", 1) from None
    if any(n < 0 for n in numbers):
        raise AigerParseError("negative count in header", 1)
    if any(numbers[5:]):
        raise UnsupportedSpecError("bad-state, constraint, justice and fairness sections are not supported")
    m, i, l, o, a = numbers[:5]
    if m < i + l + a:
        raise AigerParseError(f"maximum variable index {m} is smaller than I + L + A = {i + l + a}", 1)
    return m, i, l, o, a


def _parse_latch(values: List[int], line: int) -> Tuple[int, int]:
    if len(values) == 3 and values[2] != 0:
        raise UnsupportedSpecError(f"line {line}: latch {values[0]} has a non-zero reset value")
    return values[0], values[1]


def _parse_symbols_and_comments(aig: Aig, cursor: _Lines) -> None:
    tables = {"i": (aig.input_names, len(aig.inputs)),
              "l": (aig.latch_names, len(aig.latches)),
              "o": (aig.output_names, len(aig.outputs))}
    while not cursor.at_end():
        number = cursor.number
        line = cursor.next("symbol")
        if line.strip() == "c":
            aig.comments = cursor.lines[cursor.pos:]
            if aig.comments and aig.comments[-1] == "":
                aig.comments = aig.comments[:-1]
            return
        if line == "":
            if cursor.at_end():
                return
            raise AigerParseError("empty line in symbol table", number)
        kind = line[0]
        head, _, name = line.partition(" ")
        if kind not in tables or not head[1:].isdigit() or not name:
            raise AigerParseError(f"unexpected line {line!r}", number)
        table, count = tables[kind]
        position = int(head[1:])
        if position >= count:
            raise AigerParseError(f"symbol for non-existent {kind}{position}", number)
        table[position] = name


def _parse_ascii(text: str) -> Aig:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    cursor = _Lines(lines)
    m, i, l, o, a = _parse_header(cursor.next("header"), "aag")
    aig = Aig(max_var_index=m)
    for _ in range(i):
        aig.inputs.append(cursor.ints("input", (1,))[0])
    for _ in range(l):
        number = cursor.number
        aig.latches.append(_parse_latch(cursor.ints("latch", (2, 3)), number))
    for _ in range(o):
        aig.outputs.append(cursor.ints("output", (1,))[0])
    for _ in range(a):
        lhs, rhs0, rhs1 = cursor.ints("AND gate", (3,))
        aig.and_gates.append((lhs, rhs0, rhs1))
    _parse_symbols_and_comments(aig, cursor)
    offsets = {"input": 2, "latch": 2 + i, "output": 2 + i + l, "and": 2 + i + l + o}
    aig.validate(line_of=lambda section, position: offsets[section] + position)
    return aig


def _decode_varint(data: bytes, pos: int) -> Tuple[int, int]:
    value = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise AigerParseError("unexpected end of file in binary AND section")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7


def _parse_binary(data: bytes) -> Aig:
    end = data.find(b"\n")
    if end < 0:
        raise AigerParseError("missing header line", 1)
    m, i, l, o, a = _parse_header(data[:end].decode("ascii", "replace"), "aig")
    if m != i + l + a:
        raise AigerParseError(f"binary header requires M = I + L + A, got {m}", 1)
    aig = Aig(max_var_index=m, inputs=[2 * (k + 1) for k in range(i)])

    pos = end + 1
    number = 2
    for k in range(l + o):
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise AigerParseError("unexpected end of file", number)
        values = _Lines([data[pos:nl].decode("ascii", "replace")], number)
        pos = nl + 1
        if k < l:
            fields = values.ints("latch", (1, 2))
            cur = 2 * (i + k + 1)
            aig.latches.append(_parse_latch([cur] + fields, number))
        else:
            aig.outputs.append(values.ints("output", (1,))[0])
        number += 1

    for k in range(a):
        lhs = 2 * (i + l + k + 1)
        delta0, pos = _decode_varint(data, pos)
        delta1, pos = _decode_varint(data, pos)
        rhs0 = lhs - delta0
        rhs1 = rhs0 - delta1
        if delta0 == 0 or rhs1 < 0:
            raise AigerParseError(f"invalid delta encoding for AND gate {lhs}", number)
        aig.and_gates.append((lhs, rhs0, rhs1))

    rest = data[pos:].decode("utf-8", "replace").split("\n")
    if rest and rest[-1] == "":
        rest.pop()
    _parse_symbols_and_comments(aig, _Lines(rest, number + 1))
    offsets = {"latch": 2, "output": 2 + l}
    aig.validate(line_of=lambda section, position: offsets[section] + position if section in offsets else None)
    return aig


def parse_aiger(data: Union[bytes, str]) -> Aig:
    """
    Parse an AIGER file in ASCII or binary format.

    Args:
        data: File contents

    Returns:
        The circuit

    Raises:
        AigerParseError: On a malformed header or body, a dangling literal or a count mismatch
        UnsupportedSpecError: On AIGER 1.9 sections or non-zero latch resets
    """
    if isinstance(data, bytes) and data.startswith(b"aig"):
        aig = _parse_binary(data)
    elif isinstance(data, bytes) and data.startswith(b"aag"):
        aig = _parse_ascii(data.decode("utf-8", "replace"))
    elif isinstance(data, str) and data.startswith("aag"):
        aig = _parse_ascii(data)
    else:
        raise AigerParseError("missing 'aag' or 'aig' header", 1)
    logger.debug(
        "Parsed AIGER: M=%d I=%d L=%d O=%d A=%d",
        aig.max_var_index, len(aig.inputs), len(aig.latches), len(aig.outputs), aig.num_ands,
    )
    return aig


def load_aiger(path: str) -> Aig:
    """Read and parse an AIGER file."""
    with open(path, "rb") as f:
        return parse_aiger(f.read())


def write_aiger(aig: Aig) -> bytes:
    """
    Emit a circuit in ASCII AIGER format.

    Args:
        aig: The circuit

    Returns:
        The file contents
    """
    lines = [
        f"aag {aig.max_var_index} {len(aig.inputs)} {len(aig.latches)} {len(aig.outputs)} {aig.num_ands}"
    ]
    lines.extend(str(lit) for lit in aig.inputs)
    lines.extend(f"{cur} {nxt}" for cur, nxt in aig.latches)
    lines.extend(str(lit) for lit in aig.outputs)
    lines.extend(f"{lhs} {rhs0} {rhs1}" for lhs, rhs0, rhs1 in aig.and_gates)
    for kind, table in (("i", aig.input_names), ("l", aig.latch_names), ("o", aig.output_names)):
        lines.extend(f"{kind}{pos} {table[pos]}" for pos in sorted(table))
    if aig.comments:
        lines.append("c")
        lines.extend(aig.comments)
    return ("\n".join(lines) + "\n").encode("utf-8")


def save_aiger(aig: Aig, path: str) -> None:
    """Write a circuit to a file in ASCII AIGER format."""
    with open(path, "wb") as f:
        f.write(write_aiger(aig))
