"""
Benchmark Generator

Arithmetic safety specifications: the controller must drive its outputs to
the sum (add) or product (mult) of two n-bit operands chosen by the
environment. A reference network computes the expected value; any mismatch
raises bad and sets an absorbing error latch.

    add n:  inputs a[n], b[n], controllable_s[n]      s = (a + b) mod 2^n
    mult n: inputs a[n], b[n], controllable_s[2n]     s = a * b
"""

import logging
from typing import List

from modules.circuits.aiger import CONTROLLABLE_PREFIX, Aig
from modules.circuits.circuit import FALSE, AigBuilder

logger = logging.getLogger(__name__)

BENCHMARK_KINDS = ("add", "mult")


def benchmark_name(kind: str, bits: int) -> str:
    return f"{kind}{bits}"


def _full_adder(builder: AigBuilder, a: int, b: int, carry: int):
    partial = builder.XOR(a, b)
    total = builder.XOR(partial, carry)
    carry_out = builder.OR(builder.AND(a, b), builder.AND(partial, carry))
    return total, carry_out


def ripple_carry_add(builder: AigBuilder, x: List[int], y: List[int]) -> List[int]:
    """Sum of two equally wide vectors (LSB first), truncated to their width."""
    carry = FALSE
    result = []
    for a, b in zip(x, y):
        total, carry = _full_adder(builder, a, b, carry)
        result.append(total)
    return result


def shift_add_multiply(builder: AigBuilder, x: List[int], y: List[int]) -> List[int]:
    """Product of two vectors (LSB first) as a vector of len(x) + len(y) bits."""
    width = len(x) + len(y)
    acc = [FALSE] * width
    for shift, b in enumerate(y):
        partial = [FALSE] * shift + [builder.AND(a, b) for a in x]
        partial += [FALSE] * (width - len(partial))
        acc = ripple_carry_add(builder, acc, partial)
    return acc


def gen_benchmark(kind: str, bits: int) -> Aig:
    """
    Generate an arithmetic safety specification.

    Args:
        kind: "add" or "mult"
        bits: Operand width, at least 1

    Returns:
        The specification AIG

    Raises:
        ValueError: For an unknown kind or a width below 1
    """
    if kind not in BENCHMARK_KINDS:
        raise ValueError(f"unknown benchmark kind '{kind}', expected one of {', '.join(BENCHMARK_KINDS)}")
    if bits < 1:
        raise ValueError(f"benchmark width must be at least 1, got {bits}")

    builder = AigBuilder()
    a = [builder.add_input(f"a{k}") for k in range(bits)]
    b = [builder.add_input(f"b{k}") for k in range(bits)]
    width = bits if kind == "add" else 2 * bits
    s = [builder.add_input(f"{CONTROLLABLE_PREFIX}s{k}") for k in range(width)]
    err = builder.add_latch("err")

    reference = ripple_carry_add(builder, a, b) if kind == "add" else shift_add_multiply(builder, a, b)
    mismatch = builder.or_all(builder.XOR(out, ref) for out, ref in zip(s, reference))
    bad = builder.OR(err, mismatch)
    builder.set_latch_next(err, bad)

    aig = builder.build([bad], ["bad"])
    aig.comments = [f"{benchmark_name(kind, bits)}: {kind} of two {bits}-bit operands"]
    logger.info(
        "Generated %s: %d inputs, %d controllable, %d AND gates",
        benchmark_name(kind, bits), len(aig.inputs), width, aig.num_ands,
    )
    return aig
