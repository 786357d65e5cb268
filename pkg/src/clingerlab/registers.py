"""k-register machines with input, prime-exponent encoding, and a compiler
from register programs to two-counter machines with input (TCMI).

A register program uses ``inc rN``, ``decjz rN LABEL`` (decrement, or jump
when the register is already zero), ``jmp``, ``halt`` and wait states made
of ``on SYM goto LABEL`` lines. The compiled TCMI keeps the prime code
``p1^r1 * p2^r2 * ...`` in counter 1 and leaves counter 2 empty whenever
it is between register instructions.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from typing import Sequence

from .radix import DigitString, Radix, best_approx_fraction
from .vm import (STOP, Instruction, MachineClass, MachineProgram, ParseError, RunLimits, Status,
                 Trace, TraceEntry, TraceMode, UndefinedLabelError, UnknownMnemonicError,
                 IncompleteWaitStateError, parse_program)

R_INC, R_DECJZ, R_JMP, R_HALT, R_WAIT = range(5)


@dataclass(frozen=True)
class RegisterInstruction:
    op: int
    reg: int = 0           # 0-based register index
    target: int | None = None
    branches: tuple[tuple[int | str, int], ...] = ()


@dataclass(frozen=True)
class RegisterProgram:
    registers: int
    instructions: tuple[RegisterInstruction, ...]
    alphabet: int | None = None
    labels: dict = field(default_factory=dict, compare=False)

    @property
    def size(self) -> int:
        return len(self.instructions)

    def to_text(self) -> str:
        names: dict[int, str] = {}
        for name, idx in self.labels.items():
            names.setdefault(idx, name)
        for ins in self.instructions:
            for t in [ins.target] + [t for _, t in ins.branches]:
                if t is not None:
                    names.setdefault(t, f"L{t}")
        out = [".class REG", f".registers {self.registers}"]
        if self.alphabet:
            out.append(f".alphabet {self.alphabet}")
        for idx, ins in enumerate(self.instructions):
            if ins.op == R_INC:
                lines = [f"inc r{ins.reg + 1}"]
            elif ins.op == R_DECJZ:
                lines = [f"decjz r{ins.reg + 1} {names[ins.target]}"]
            elif ins.op == R_JMP:
                lines = [f"jmp {names[ins.target]}"]
            elif ins.op == R_HALT:
                lines = ["halt"]
            else:
                lines = [f"on {sym} goto {names[t]}" for sym, t in ins.branches]
            out.append((f"{names[idx]}: " if idx in names else "") + lines[0])
            out.extend(lines[1:])
        if len(self.instructions) in names:
            out.append(f"{names[len(self.instructions)]}: halt")
        return "\n".join(out) + "\n"


_LABEL = re.compile(r"^([A-Za-z_.$][\w.$]*)\s*:\s*(.*)$")
_REG = re.compile(r"^r(\d+)$", re.IGNORECASE)


def parse_register_program(text: str) -> RegisterProgram:
    """Parse register assembly (``.class REG``, ``.registers K``, ...)."""
    count = None
    alphabet = None
    raw = []
    pending: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("."):
            key, *rest = line.split()
            key = key.lower()
            if key == ".class" and rest and rest[0].upper() == "REG" and len(rest) == 1:
                pass
            elif key == ".class":
                raise ParseError(lineno, f"register programs use '.class REG', got {line!r}")
            elif key == ".registers" and len(rest) == 1 and rest[0].isdigit() and int(rest[0]) >= 1:
                count = int(rest[0])
            elif key == ".alphabet" and len(rest) == 1 and rest[0].isdigit() and int(rest[0]) >= 2:
                alphabet = int(rest[0])
            else:
                raise ParseError(lineno, f"bad directive {line!r}")
            continue
        while (match := _LABEL.match(line)):
            pending.append(match.group(1))
            line = match.group(2).strip()
        if not line:
            continue
        mnemonic, *args = line.split()
        raw.append((lineno, pending, mnemonic.lower(), args))
        pending = []
    if pending:
        raw.append((raw[-1][0] if raw else 1, pending, "halt", []))
    if count is None:
        raise ParseError(1, "missing '.registers K' directive")

    def register(tok, lineno):
        match = _REG.match(tok)
        if not match or not 1 <= int(match.group(1)) <= count:
            raise ParseError(lineno, f"expected a register r1..r{count}, got {tok!r}")
        return int(match.group(1)) - 1

    labels: dict[str, int] = {}
    items = []   # [lineno, op, reg, target name, branches]
    for lineno, names, mnemonic, args in raw:
        if mnemonic == "on":
            if len(args) != 3 or args[1].lower() != "goto":
                raise ParseError(lineno, "expected 'on SYM goto LABEL'")
            if alphabet is None:
                alphabet = 10
            sym = STOP if args[0].lower() == STOP else int(args[0]) if args[0].isdigit() else None
            if sym is None or (sym != STOP and sym >= alphabet):
                raise ParseError(lineno, f"bad input symbol {args[0]!r}")
            if not names and items and items[-1][1] == R_WAIT:
                block = items[-1]
            else:
                block = [lineno, R_WAIT, 0, None, []]
                items.append(block)
            if any(s == sym for s, _, _ in block[4]):
                raise ParseError(lineno, f"duplicate branch for symbol {sym}")
            block[4].append((sym, args[2], lineno))
        elif mnemonic == "inc" and len(args) == 1:
            items.append([lineno, R_INC, register(args[0], lineno), None, []])
        elif mnemonic == "decjz" and len(args) == 2:
            items.append([lineno, R_DECJZ, register(args[0], lineno), args[1], []])
        elif mnemonic == "jmp" and len(args) == 1:
            items.append([lineno, R_JMP, 0, args[0], []])
        elif mnemonic == "halt" and not args:
            items.append([lineno, R_HALT, 0, None, []])
        elif mnemonic in ("inc", "decjz", "jmp", "halt"):
            raise ParseError(lineno, f"wrong operands for {mnemonic!r}")
        else:
            raise UnknownMnemonicError(lineno, f"unknown mnemonic {mnemonic!r}")
        for name in names:
            if name in labels:
                raise ParseError(lineno, f"label {name!r} defined twice")
            labels[name] = len(items) - 1

    def resolve(name, lineno):
        if name not in labels:
            raise UndefinedLabelError(lineno, f"undefined label {name!r}")
        return labels[name]

    built = []
    for lineno, op, reg, tname, branches in items:
        if op == R_WAIT:
            have = {s for s, _, _ in branches}
            missing = [s for s in list(range(alphabet)) + [STOP] if s not in have]
            if missing:
                raise IncompleteWaitStateError(
                    lineno, "wait state lacks branches for " + ", ".join(map(str, missing)))
            built.append(RegisterInstruction(R_WAIT, branches=tuple(
                (s, resolve(t, ln)) for s, t, ln in branches)))
        else:
            built.append(RegisterInstruction(op, reg, resolve(tname, lineno) if tname else None))
    return RegisterProgram(count, tuple(built), alphabet, labels)


def load_register_program(path) -> RegisterProgram:
    with open(path) as fh:
        return parse_register_program(fh.read())


# -- macro assembler ---------------------------------------------------------------


class RegisterAssembler:
    """Builds register programs from the base instructions plus macros
    (clear, move, copy, scaling, comparison, constant add) that expand to
    them. Labels are symbolic until :meth:`build`."""

    def __init__(self, registers: int, alphabet: int | None = None):
        self.registers = registers
        self.alphabet = alphabet
        self._code: list[tuple] = []
        self._labels: dict[str, int] = {}
        self._fresh = itertools.count()

    def fresh(self, hint: str = "L") -> str:
        return f"_{hint}{next(self._fresh)}"

    def label(self, name: str) -> "RegisterAssembler":
        if name in self._labels:
            raise ValueError(f"label {name!r} defined twice")
        self._labels[name] = len(self._code)
        return self

    def inc(self, reg: int, times: int = 1):
        for _ in range(times):
            self._code.append((R_INC, reg, None, ()))
        return self

    def decjz(self, reg: int, target: str):
        self._code.append((R_DECJZ, reg, target, ()))
        return self

    def jmp(self, target: str):
        self._code.append((R_JMP, 0, target, ()))
        return self

    def halt(self):
        self._code.append((R_HALT, 0, None, ()))
        return self

    def wait(self, branches: dict):
        self._code.append((R_WAIT, 0, None, tuple(branches.items())))
        return self

    # macros

    def clear(self, reg: int):
        top, end = self.fresh("clr"), self.fresh("clr")
        self.label(top).decjz(reg, end).jmp(top).label(end)
        return self

    def move(self, src: int, *dests: tuple[int, int]):
        """src -> 0, each (dst, k) gains k*src."""
        top, end = self.fresh("mv"), self.fresh("mv")
        self.label(top).decjz(src, end)
        for dst, k in dests:
            self.inc(dst, k)
        self.jmp(top).label(end)
        return self

    def copy(self, src: int, dst: int, tmp: int):
        """dst += src, using an empty scratch register."""
        self.move(src, (dst, 1), (tmp, 1))
        self.move(tmp, (src, 1))
        return self

    def scale(self, reg: int, k: int, tmp: int):
        self.move(reg, (tmp, k))
        self.move(tmp, (reg, 1))
        return self

    def branch_less(self, a: int, b: int, if_less: str, otherwise: str, ta: int, tb: int, tmp: int):
        """Jump to ``if_less`` when a < b, else ``otherwise``; a and b kept."""
        self.copy(a, ta, tmp).copy(b, tb, tmp)
        top, less, not_less = self.fresh("lt"), self.fresh("lt"), self.fresh("lt")
        self.label(top).decjz(tb, not_less).decjz(ta, less).jmp(top)
        self.label(less).clear(tb).jmp(if_less)
        self.label(not_less).clear(ta).jmp(otherwise)
        return self

    def build(self) -> RegisterProgram:
        res = []
        end = len(self._code)
        for op, reg, target, branches in self._code:
            if not 0 <= reg < self.registers:
                raise ValueError(f"register index {reg} out of range")
            tgt = self._resolve(target) if target is not None else None
            res.append(RegisterInstruction(op, reg, tgt, tuple((s, self._resolve(t)) for s, t in branches)))
        if any(t == end for ins in res for t in [ins.target] + [t for _, t in ins.branches]) or \
                end in self._labels.values():
            res.append(RegisterInstruction(R_HALT))
        return RegisterProgram(self.registers, tuple(res), self.alphabet, dict(self._labels))

    def _resolve(self, name: str) -> int:
        if name not in self._labels:
            raise ValueError(f"undefined label {name!r}")
        return self._labels[name]


# -- prime encoding ------------------------------------------------------------------


def _primes(count: int) -> list[int]:
    found: list[int] = []
    cand = 2
    while len(found) < count:
        if all(cand % p for p in found if p * p <= cand):
            found.append(cand)
        cand += 1
    return found


@dataclass(frozen=True)
class PrimeEncoding:
    primes: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.primes)) != len(self.primes):
            raise ValueError("encoding primes must be pairwise distinct")
        for p in self.primes:
            if p < 2 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
                raise ValueError(f"{p} is not prime")

    @classmethod
    def first(cls, count: int) -> "PrimeEncoding":
        return cls(tuple(_primes(count)))

    def __len__(self):
        return len(self.primes)


def encode_state(values: Sequence[int], enc: PrimeEncoding) -> int:
    if len(values) != len(enc.primes):
        raise ValueError("one value per encoding prime expected")
    code = 1
    for v, p in zip(values, enc.primes):
        if v < 0:
            raise ValueError("register values are naturals")
        code *= p ** v
    return code


def decode_state(n: int, enc: PrimeEncoding) -> tuple[tuple[int, ...], int]:
    """Exponent of each encoding prime in ``n`` and the leftover cofactor."""
    if n < 1:
        raise ValueError("only positive codes can be decoded")
    exps = []
    for p in enc.primes:
        e = 0
        if n % p == 0:
            # peel off powers in squaring chunks so huge exponents stay fast
            chunks = [p]
            while n % (chunks[-1] * chunks[-1]) == 0:
                chunks.append(chunks[-1] * chunks[-1])
            for i in range(len(chunks) - 1, -1, -1):
                while n % chunks[i] == 0:
                    n //= chunks[i]
                    e += 1 << i
        exps.append(e)
    return tuple(exps), n


# -- reference interpreter ---------------------------------------------------------


@dataclass
class RegisterResult:
    registers: tuple[int, ...]
    status: Status
    steps: int
    pc: int
    cursor: int
    stop_step: int | None = None
    trace: Trace | None = None
    executed: int = 0


def run_register(program: RegisterProgram, input=None, limits: RunLimits | None = None, *,
                 start: Sequence[int] | None = None, partial: bool = False,
                 trace: TraceMode | str = TraceMode.NONE) -> RegisterResult:
    """Run a register program; ``limits.accelerate`` skips repeated
    additive loops with the same rule as the counter-machine interpreter."""
    from .analysis import cycle_jump

    limits = limits or RunLimits()
    mode = TraceMode(trace)
    if program.alphabet is None:
        if input:
            raise ValueError("this register program takes no input")
        syms: tuple = ()
    elif isinstance(input, DigitString):
        syms = tuple(input.digits) + (STOP,)
    else:
        syms = tuple(input or ())
    if program.alphabet is not None:
        for pos, sym in enumerate(syms):
            if sym == STOP and pos != len(syms) - 1:
                raise ValueError("the stop marker may only appear at the end of the input")
            if sym != STOP and not (isinstance(sym, int) and 0 <= sym < program.alphabet):
                raise ValueError(f"input symbol {sym!r} outside the alphabet")
        if not partial and (not syms or syms[-1] != STOP):
            raise ValueError("input must end with the stop marker")
    regs = list(start) if start is not None else [0] * program.registers
    if len(regs) != program.registers:
        raise ValueError(f"program has {program.registers} registers")
    code = program.instructions
    n = len(code)
    pc = cursor = steps = executed = 0
    stop_step = None
    status = None
    accelerate = limits.accelerate
    window: list = []
    tested: list = []
    seen: dict[int, int] = {}
    cap = max(4 * n, 64)
    rec = mode is TraceMode.FULL
    entries: list[TraceEntry] = []
    if rec:
        entries.append(TraceEntry(0, pc, tuple(regs), cursor, None))
    while True:
        if pc >= n:
            status = Status.FAULT
            break
        ins = code[pc]
        op = ins.op
        if op == R_HALT:
            status = Status.HALTED
            break
        if op == R_WAIT and cursor >= len(syms):
            status = Status.WAITING
            break
        if steps >= limits.max_steps:
            status = Status.STEP_LIMIT
            break
        if accelerate:
            here = tuple(regs)
            first = seen.get(pc)
            if first is not None:
                cycle = window[first:]
                jump = cycle_jump(cycle, here, (limits.max_steps - steps) // len(cycle),
                                  tested=tested[first:])
                if jump:
                    base = cycle[0][1]
                    regs = [h + jump * (h - b0) for h, b0 in zip(here, base)]
                    steps += jump * len(cycle)
                    window.clear()
                    tested.clear()
                    seen.clear()
                    continue
            if len(window) >= cap:
                window.clear()
                tested.clear()
                seen.clear()
            seen[pc] = len(window)
            window.append((pc, here))
            tested.append((ins.reg,) if op == R_DECJZ else ())
        consumed = None
        if op == R_INC:
            regs[ins.reg] += 1
            pc += 1
        elif op == R_DECJZ:
            if regs[ins.reg]:
                regs[ins.reg] -= 1
                pc += 1
            else:
                pc = ins.target
        elif op == R_JMP:
            pc = ins.target
        else:
            consumed = syms[cursor]
            cursor += 1
            pc = dict(ins.branches)[consumed]
            if consumed == STOP:
                stop_step = steps + 1
            window.clear()
            tested.clear()
            seen.clear()
        steps += 1
        executed += 1
        if rec:
            entries.append(TraceEntry(steps, pc, tuple(regs), cursor, consumed))
    return RegisterResult(tuple(regs), status, steps, pc, cursor, stop_step,
                          Trace(entries) if rec else None, executed)


# -- compiler -----------------------------------------------------------------------


def compile_to_tcmi(program: RegisterProgram, enc: PrimeEncoding | None = None,
                    alphabet: int | None = None) -> MachineProgram:
    """Compile to a TCMI holding ``encode_state(registers)`` in counter 1.

    ``inc r`` multiplies the code by the register's prime (shuttle c1 to
    c2, then back scaled); ``decjz r L`` divides c1 by the prime into c2,
    dispatching on the remainder, and either keeps the quotient or
    rebuilds the original code and jumps to L.
    """
    enc = enc or PrimeEncoding.first(program.registers)
    if len(enc) != program.registers:
        raise ValueError("need one prime per register")
    radix = alphabet or program.alphabet or 10
    lines: list[str] = [".class TCMI", f".alphabet {radix}", "inc c1"]
    emit = lines.append

    def rs(idx):
        return f"R{idx}"

    counter = itertools.count()
    for idx, ins in enumerate(program.instructions):
        here = rs(idx)
        nxt = rs(idx + 1)
        if ins.op == R_INC:
            p = enc.primes[ins.reg]
            u = next(counter)
            emit(f"{here}: jz c1 B{u}")
            emit("dec c1")
            emit("inc c2")
            emit(f"jmp {here}")
            emit(f"B{u}: jz c2 {nxt}")
            emit("dec c2")
            lines.extend(["inc c1"] * p)
            emit(f"jmp B{u}")
        elif ins.op == R_DECJZ:
            p = enc.primes[ins.reg]
            u = next(counter)
            emit(f"{here}: jz c1 Z{u}_0")
            for j in range(1, p):
                emit("dec c1")
                emit(f"jz c1 Z{u}_{j}")
            emit("dec c1")
            emit("inc c2")
            emit(f"jmp {here}")
            # divisible: quotient in c2 becomes the new code
            emit(f"Z{u}_0: jz c2 {nxt}")
            emit("dec c2")
            emit("inc c1")
            emit(f"jmp Z{u}_0")
            for j in range(1, p):
                emit(f"Z{u}_{j}: " + "inc c1")
                lines.extend(["inc c1"] * (j - 1))
                emit(f"jmp Y{u}")
            emit(f"Y{u}: jz c2 {rs(ins.target)}")
            emit("dec c2")
            lines.extend(["inc c1"] * p)
            emit(f"jmp Y{u}")
        elif ins.op == R_JMP:
            emit(f"{here}: jmp {rs(ins.target)}")
        elif ins.op == R_HALT:
            emit(f"{here}: halt")
        else:
            first = True
            for sym, t in ins.branches:
                emit((f"{here}: " if first else "") + f"on {sym} goto {rs(t)}")
                first = False
    emit(f"{rs(len(program.instructions))}: halt")
    return parse_program("\n".join(lines) + "\n")


def decode_counters(counters: Sequence[int], enc: PrimeEncoding) -> tuple[tuple[int, ...], int]:
    """Register vector held by a compiled machine at rest (counter 2 empty)."""
    if counters[1] != 0:
        raise ValueError("compiled machines rest with counter 2 empty")
    return decode_state(counters[0], enc)


# -- shipped constructions ------------------------------------------------------------


def reverse_counter_tcmi(b: int | Radix, unroll: int = 4) -> MachineProgram:
    """TCMI reading the digits of n most significant first and ending in
    its wait state with counter 1 = n, counter 2 = 0.

    Each digit k turns v into b*v + k: shuttle v to counter 2, bring it
    back b-fold, add k. The stop marker returns to the wait state without
    touching the counters. Shuttle loops are unrolled ``unroll`` times.
    """
    b = b.base if isinstance(b, Radix) else b
    if b < 2:
        raise ValueError("radix must be >= 2")
    if unroll < 1:
        raise ValueError("unroll must be >= 1")
    lines = [".class TCMI", f".alphabet {b}"]
    lines += [("WAIT: " if k == 0 else "") + f"on {k} goto D{k}" for k in range(b)]
    lines.append("on stop goto WAIT")
    for k in range(b):
        lines.append(f"D{k}:")
        lines += [f"jz c1 M{k}", "dec c1", "inc c2"] * unroll + [f"jmp D{k}"]
        lines.append(f"M{k}:")
        lines += ([f"jz c2 A{k}", "dec c2"] + ["inc c1"] * b) * unroll + [f"jmp M{k}"]
        lines.append(f"A{k}:")
        lines += ["inc c1"] * k + ["jmp WAIT"]
    return parse_program("\n".join(lines) + "\n")


class Significance(enum.Enum):
    MSD_FIRST = "msd"
    LSD_FIRST = "lsd"


# register roles in the Clinger program (0-based)
VALUE, DIGITS, SIGNIFICAND, POWER, SCALE, LIMIT, WEIGHT, T1, T2, T3 = range(10)
CLINGER_REGISTERS = 10


def clinger_register_program(b: int, D: int, d: int, n: int,
                             order: Significance | str = Significance.MSD_FIRST) -> RegisterProgram:
    """Register program reading an exponent e digit by digit (radix ``b``)
    and keeping, after every digit, the significand of the best n-digit
    radix-``d`` approximation of ``D**e`` in register 3 (index 2).

    Register 1 holds the exponent read so far and register 2 the number
    of digits read. After the stop marker the program halts without
    touching any register.
    """
    order = Significance(order)
    for name, val in (("b", b), ("D", D), ("d", d)):
        if val < 2:
            raise ValueError(f"radix {name} must be >= 2")
    if n < 1 or (d == 2 and n < 2):
        raise ValueError("n >= 1 required, and n >= 2 when d = 2")
    low, high = d ** (n - 1), d ** n
    asm = RegisterAssembler(CLINGER_REGISTERS, alphabet=b)
    if order is Significance.LSD_FIRST:
        asm.inc(WEIGHT)
    asm.jmp("RECOMPUTE")
    asm.label("WAIT").wait({**{k: f"DIGIT{k}" for k in range(b)}, STOP: "DONE"})
    for k in range(b):
        asm.label(f"DIGIT{k}")
        if order is Significance.MSD_FIRST:
            asm.scale(VALUE, b, T1).inc(VALUE, k)
        else:
            if k:
                asm.move(WEIGHT, (T1, 1), (VALUE, k)).move(T1, (WEIGHT, 1))
            asm.scale(WEIGHT, b, T1)
        asm.inc(DIGITS).jmp("RECOMPUTE")

    asm.label("RECOMPUTE").clear(SIGNIFICAND).clear(POWER).clear(SCALE).clear(LIMIT)
    # POWER = D ** VALUE
    asm.inc(POWER).copy(VALUE, T3, T1)
    asm.label("POWLOOP").decjz(T3, "POWDONE").scale(POWER, D, T1).jmp("POWLOOP")
    asm.label("POWDONE")
    # small powers: scale up by d until the low end of the binade is reached
    asm.inc(LIMIT, low)
    asm.label("UPCHK").branch_less(POWER, LIMIT, "UP", "UPDONE", T1, T2, T3)
    asm.label("UP").scale(POWER, d, T1).jmp("UPCHK")
    asm.label("UPDONE").clear(LIMIT)
    # SCALE = smallest power of d with POWER < d**n * SCALE
    asm.inc(SCALE).inc(LIMIT, high)
    asm.label("SCLCHK").branch_less(POWER, LIMIT, "SCLDONE", "SCLUP", T1, T2, T3)
    asm.label("SCLUP").scale(SCALE, d, T1).scale(LIMIT, d, T1).jmp("SCLCHK")
    asm.label("SCLDONE").clear(LIMIT)
    # SIGNIFICAND = POWER div SCALE; the remainder stays in POWER
    asm.label("DIVCHK").branch_less(POWER, SCALE, "DIVDONE", "DIVSUB", T1, T2, T3)
    asm.label("DIVSUB").copy(SCALE, T1, T2)
    asm.label("SUBLOOP").decjz(T1, "SUBDONE").decjz(POWER, "SUBDONE").jmp("SUBLOOP")
    asm.label("SUBDONE").inc(SIGNIFICAND).jmp("DIVCHK")
    asm.label("DIVDONE")
    # round half to even: compare 2*remainder with SCALE
    asm.move(POWER, (LIMIT, 2))
    asm.branch_less(LIMIT, SCALE, "ROUNDED", "NOTBELOW", T1, T2, T3)
    asm.label("NOTBELOW").branch_less(SCALE, LIMIT, "ROUNDUP", "HALFWAY", T1, T2, T3)
    asm.label("HALFWAY")
    # odd significand rounds up: test parity on a copy
    asm.copy(SIGNIFICAND, T3, T1)
    asm.label("PARITY").decjz(T3, "ROUNDED").decjz(T3, "ODD").jmp("PARITY")
    asm.label("ODD").jmp("ROUNDUP")
    asm.label("ROUNDUP").inc(SIGNIFICAND)
    asm.label("ROUNDED").clear(LIMIT).clear(T3).clear(SCALE)
    # a carry past d**n - 1 renormalizes to d**(n-1)
    asm.inc(LIMIT, high)
    asm.branch_less(SIGNIFICAND, LIMIT, "FINAL", "CARRY", T1, T2, T3)
    asm.label("CARRY").clear(SIGNIFICAND).inc(SIGNIFICAND, low)
    asm.label("FINAL").clear(LIMIT).jmp("WAIT")
    asm.label("DONE").halt()
    return asm.build()


DEFAULT_EXPONENT_BOUND = 10**6


class ExponentBoundError(ValueError):
    pass


def clinger_significand(program: RegisterProgram, exponent_digits: DigitString,
                        bound: int = DEFAULT_EXPONENT_BOUND,
                        limits: RunLimits | None = None) -> int:
    """Run a Clinger register program on ``exponent_digits`` and return the
    significand register. Exponents above ``bound`` are refused before
    anything runs, since the program works with D**e in unary."""
    e = exponent_digits.value
    if e > bound:
        raise ExponentBoundError(f"exponent {e} exceeds the configured bound {bound}")
    res = run_register(program, exponent_digits, limits or RunLimits(max_steps=10**40, accelerate=True))
    if res.status not in (Status.HALTED, Status.WAITING):
        raise RuntimeError(f"register program stopped with status {res.status.value}")
    return res.registers[SIGNIFICAND]


def expected_significand(e: int, D: int, d: int, n: int) -> int:
    return best_approx_fraction(D ** e, 1, d, n).m
