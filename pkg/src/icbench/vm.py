"""A small bit-coded reference machine whose programs print action sequences.

Encoding (``A = ceil(log2(max(m, 2)))``, ``N = ceil(log2(max(n, 2)))``)::

    00                      HALT
    01 <A bits>             EMIT a
    10 gamma(c-1) gamma(L)  REPEAT the next L instructions c times (c >= 2)
    11 <N bits>             GOTO_TARGET t   (oracle regime only)

A program is valid when decoding consumes every bit and stops exactly at
its single trailing HALT.  REPEAT bodies count flat instructions and must
nest properly inside any enclosing body.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Union

from .envs import Environment, shortest_path

DEFAULT_STEP_BUDGET = 10_000


class Regime(enum.Enum):
    BARE = "bare"
    ORACLE = "oracle"


class Fault(enum.Enum):
    DECODE_ERROR = "DecodeError"
    ORACLE_IN_BARE = "OracleInBare"
    STEP_BUDGET_EXCEEDED = "StepBudgetExceeded"
    UNREACHABLE_TARGET = "UnreachableTarget"


class DecodeError(ValueError):
    def __init__(self, position: int, reason: str):
        self.position = position
        self.reason = reason
        super().__init__(f"bit {position}: {reason}")


# -- Elias gamma -------------------------------------------------------------

def gamma_encode(value: int) -> str:
    if value < 1:
        raise ValueError("Elias gamma only encodes positive integers")
    binary = bin(value)[2:]
    return "0" * (len(binary) - 1) + binary


def gamma_decode(bits: str, pos: int) -> tuple[int, int]:
    """Decode one gamma codeword at ``pos``; returns ``(value, next_pos)``."""
    zeros = 0
    while pos + zeros < len(bits) and bits[pos + zeros] == "0":
        zeros += 1
    end = pos + 2 * zeros + 1
    if end > len(bits):
        raise DecodeError(pos, "truncated gamma code")
    return int(bits[pos + zeros:end], 2), end


def gamma_length(value: int) -> int:
    return 2 * (value.bit_length() - 1) + 1


# -- instructions ------------------------------------------------------------

@dataclass(frozen=True)
class Halt:
    def __str__(self):
        return "HALT"


@dataclass(frozen=True)
class Emit:
    action: int

    def __str__(self):
        return f"EMIT {self.action}"


@dataclass(frozen=True)
class Repeat:
    count: int
    body_len: int

    def __str__(self):
        return f"REPEAT {self.count} {self.body_len}"


@dataclass(frozen=True)
class GotoTarget:
    target: int

    def __str__(self):
        return f"GOTO {self.target}"


Instruction = Union[Halt, Emit, Repeat, GotoTarget]


def action_bits(m: int) -> int:
    return (max(m, 2) - 1).bit_length()


def state_bits(n: int) -> int:
    return (max(n, 2) - 1).bit_length()


def _fixed(value: int, width: int) -> str:
    return format(value, f"0{width}b")


def encode_instruction(ins: Instruction, dims: tuple[int, int]) -> str:
    n, m = dims
    if isinstance(ins, Halt):
        return "00"
    if isinstance(ins, Emit):
        return "01" + _fixed(ins.action, action_bits(m))
    if isinstance(ins, Repeat):
        return "10" + gamma_encode(ins.count - 1) + gamma_encode(ins.body_len)
    if isinstance(ins, GotoTarget):
        return "11" + _fixed(ins.target, state_bits(n))
    raise TypeError(f"not an instruction: {ins!r}")


def encode(instructions, dims: tuple[int, int]) -> str:
    return "".join(encode_instruction(ins, dims) for ins in instructions)


def decode(bits: str, dims: tuple[int, int]) -> list[Instruction]:
    """Decode ``bits`` (a string of '0'/'1') into a flat instruction list."""
    n, m = dims
    if n < 1 or m < 1:
        raise ValueError("environment dimensions must be positive")
    if any(c not in "01" for c in bits):
        raise ValueError("bits must contain only '0' and '1'")
    abits, nbits = action_bits(m), state_bits(n)
    out: list[Instruction] = []
    open_ends: list[int] = []  # flat index of the last instruction of each open body
    pos = 0
    while True:
        if pos + 2 > len(bits):
            raise DecodeError(pos, "truncated opcode")
        op = bits[pos:pos + 2]
        start = pos
        pos += 2
        if op == "00":
            if open_ends:
                raise DecodeError(start, "REPEAT body not closed before HALT")
            if pos != len(bits):
                raise DecodeError(pos, "trailing bits after HALT")
            out.append(Halt())
            return out
        index = len(out)
        if op == "01":
            if pos + abits > len(bits):
                raise DecodeError(start, "truncated EMIT")
            a = int(bits[pos:pos + abits], 2)
            if a >= m:
                raise DecodeError(start, f"action {a} out of range")
            pos += abits
            out.append(Emit(a))
        elif op == "11":
            if pos + nbits > len(bits):
                raise DecodeError(start, "truncated GOTO_TARGET")
            t = int(bits[pos:pos + nbits], 2)
            if t >= n:
                raise DecodeError(start, f"target {t} out of range")
            pos += nbits
            out.append(GotoTarget(t))
        else:
            count_m1, pos = gamma_decode(bits, pos)
            body_len, pos = gamma_decode(bits, pos)
            end = index + body_len
            if open_ends and end > open_ends[-1]:
                raise DecodeError(start, "REPEAT body overruns enclosing body")
            out.append(Repeat(count_m1 + 1, body_len))
            open_ends.append(end)
            continue
        while open_ends and open_ends[-1] == index:
            open_ends.pop()


def disassemble(instructions) -> str:
    return "\n".join(str(ins) for ins in instructions)


@dataclass(frozen=True)
class Program:
    bits: str
    instructions: tuple

    @classmethod
    def from_bits(cls, bits: str, dims: tuple[int, int]) -> "Program":
        return cls(bits, tuple(decode(bits, dims)))

    @property
    def length(self) -> int:
        return len(self.bits)

    @property
    def uses_oracle(self) -> bool:
        return any(isinstance(ins, GotoTarget) for ins in self.instructions)

    def __str__(self):
        return "0b" + self.bits


# -- execution ---------------------------------------------------------------

@dataclass(frozen=True)
class ExecOutcome:
    actions: tuple | None
    steps_used: int
    fault: Fault | None = None
    end_state: int | None = None

    @property
    def ok(self) -> bool:
        return self.fault is None


class _Abort(Exception):
    def __init__(self, fault: Fault):
        self.fault = fault


def execute(program: Program, env: Environment, regime: Regime, start: int,
            step_budget: int = DEFAULT_STEP_BUDGET) -> ExecOutcome:
    """Run ``program`` from ``start``, simulating the environment state.

    Every instruction dispatch and every emitted action costs one step.
    """
    if step_budget < 1:
        raise ValueError("step_budget must be >= 1")
    flat = program.instructions
    actions: list[int] = []
    state = start
    steps = 0

    def tick(k=1):
        nonlocal steps
        if steps + k > step_budget:
            steps = step_budget
            raise _Abort(Fault.STEP_BUDGET_EXCEEDED)
        steps += k

    def run(lo, hi):
        nonlocal state
        i = lo
        while i < hi:
            ins = flat[i]
            tick()
            if isinstance(ins, Emit):
                tick()
                actions.append(ins.action)
                state = env.step(state, ins.action)
            elif isinstance(ins, Repeat):
                for _ in range(ins.count):
                    run(i + 1, i + 1 + ins.body_len)
                i += ins.body_len
            elif isinstance(ins, GotoTarget):
                if regime is not Regime.ORACLE:
                    raise _Abort(Fault.ORACLE_IN_BARE)
                path = shortest_path(env, state, ins.target)
                if path is None:
                    raise _Abort(Fault.UNREACHABLE_TARGET)
                for a in path:
                    tick()
                    actions.append(a)
                state = ins.target
            i += 1

    try:
        run(0, len(flat) - 1)  # last instruction is the HALT
        tick()
    except _Abort as exc:
        return ExecOutcome(None, steps, exc.fault)
    return ExecOutcome(tuple(actions), steps, None, state)


# -- enumeration -------------------------------------------------------------

def _programs_of_length(total: int, dims: tuple[int, int], regime: Regime) -> list[str]:
    n, m = dims
    abits, nbits = action_bits(m), state_bits(n)
    leaves = [("01" + _fixed(a, abits)) for a in range(m)]
    if regime is Regime.ORACLE:
        leaves += [("11" + _fixed(t, nbits)) for t in range(n)]
    min_leaf = min(len(x) for x in leaves)
    found: list[str] = []

    def grow(prefix: str, index: int, open_ends: tuple):
        remaining = total - len(prefix)
        if not open_ends and remaining == 2:
            found.append(prefix + "00")
        # every open body still needs at least one more instruction, plus HALT
        if remaining < min_leaf + 2:
            return
        for leaf in leaves:
            if len(leaf) + 2 <= remaining:
                ends = open_ends
                while ends and ends[-1] == index:
                    ends = ends[:-1]
                grow(prefix + leaf, index + 1, ends)
        c_m1 = 1
        while 2 + gamma_length(c_m1) + 1 + min_leaf + 2 <= remaining:
            head = "10" + gamma_encode(c_m1)
            body_len = 1
            while True:
                header = head + gamma_encode(body_len)
                if len(header) + body_len * min_leaf + 2 > remaining:
                    break
                end = index + body_len
                if not open_ends or end <= open_ends[-1]:
                    grow(prefix + header, index + 1, open_ends + (end,))
                body_len += 1
            c_m1 += 1

    grow("", 0, ())
    found.sort()
    return found


def enumerate_programs(dims: tuple[int, int], max_bits: int,
                       regime: Regime = Regime.BARE) -> Iterator[Program]:
    """Valid programs of 2..max_bits bits in (length, lexicographic) order.

    In the bare regime programs containing GOTO_TARGET are omitted.
    """
    if max_bits < 2:
        raise ValueError("max_bits must be >= 2")
    for length in range(2, max_bits + 1):
        for bits in _programs_of_length(length, dims, regime):
            yield Program.from_bits(bits, dims)
