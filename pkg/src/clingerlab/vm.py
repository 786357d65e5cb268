"""Interpreters for two-counter machines (TCM, TCMI) and the one-register
MP1RM/MP1RMI machines, plus their assembly format.

A program is a list of *states*. Every ordinary instruction is one state;
a maximal block of ``on SYM goto LABEL`` lines is a single wait state that
consumes one input symbol. The stop marker is the symbol :data:`STOP`.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .radix import DigitString

STOP = "stop"


class MachineClass(enum.Enum):
    TCM = "TCM"
    TCMI = "TCMI"
    MP1RM = "MP1RM"
    MP1RMI = "MP1RMI"

    @property
    def with_input(self) -> bool:
        return self in (MachineClass.TCMI, MachineClass.MP1RMI)

    @property
    def counters(self) -> int:
        return 2 if self in (MachineClass.TCM, MachineClass.TCMI) else 1


# opcodes; counter forms carry the counter in the opcode for dispatch speed
INC1, INC2, DEC1, DEC2, JZ1, JZ2, JMP, HALT, WAIT, ADD, MUL, DECJZ, DIVMOD = range(13)
_END = -1  # sentinel past the last state

_COUNTER_OPS = {INC1, INC2, DEC1, DEC2, JZ1, JZ2}
_REGISTER_OPS = {ADD, MUL, DECJZ, DIVMOD}
_MNEMONIC = {INC1: "inc c1", INC2: "inc c2", DEC1: "dec c1", DEC2: "dec c2",
             JZ1: "jz c1", JZ2: "jz c2"}


@dataclass(frozen=True)
class Instruction:
    op: int
    k: int = 0
    target: int | None = None
    targets: tuple[int, ...] = ()
    branches: tuple[tuple[int | str, int], ...] = ()
    line: int = field(default=0, compare=False)

    @property
    def is_wait(self) -> bool:
        return self.op == WAIT

    def branch_map(self) -> dict:
        return dict(self.branches)


@dataclass(frozen=True)
class MachineProgram:
    cls: MachineClass
    states: tuple[Instruction, ...]
    labels: dict = field(default_factory=dict, compare=False)
    alphabet: int | None = None

    @property
    def state_count(self) -> int:
        return len(self.states)

    @property
    def wait_states(self) -> list[int]:
        return [i for i, ins in enumerate(self.states) if ins.op == WAIT]

    def symbols(self) -> list:
        return list(range(self.alphabet)) + [STOP] if self.alphabet else []

    def to_text(self) -> str:
        names = {}
        for name, idx in self.labels.items():
            names.setdefault(idx, name)

        def ref(idx):
            return names.setdefault(idx, f"L{idx}")

        body = []
        for idx, ins in enumerate(self.states):
            op = ins.op
            if op in _MNEMONIC and op not in (JZ1, JZ2):
                lines = [_MNEMONIC[op]]
            elif op in (JZ1, JZ2):
                lines = [f"{_MNEMONIC[op]} {ref(ins.target)}"]
            elif op == JMP:
                lines = [f"jmp {ref(ins.target)}"]
            elif op == HALT:
                lines = ["halt"]
            elif op == ADD:
                lines = [f"add {ins.k}"]
            elif op == MUL:
                lines = [f"mul {ins.k}"]
            elif op == DECJZ:
                lines = [f"decjz {ref(ins.target)}"]
            elif op == DIVMOD:
                lines = [f"divmod {ins.k} " + " ".join(ref(t) for t in ins.targets)]
            else:
                lines = [f"on {sym} goto {ref(t)}" for sym, t in ins.branches]
            body.append((idx, lines))
        out = [f".class {self.cls.value}"]
        if self.alphabet:
            out.append(f".alphabet {self.alphabet}")
        for idx, lines in body:
            prefix = f"{names[idx]}: " if idx in names else ""
            out.append(prefix + lines[0])
            out.extend(lines[1:])
        return "\n".join(out) + "\n"


# -- parsing -----------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownMnemonicError(ParseError):
    pass


class UndefinedLabelError(ParseError):
    pass


class ClassMismatchError(ParseError):
    pass


class IncompleteWaitStateError(ParseError):
    pass


_LABEL = re.compile(r"^([A-Za-z_.$][\w.$]*)\s*:\s*(.*)$")
_COUNTER = {"c1": 0, "c2": 1}


def _parse_int(tok: str, line: int) -> int:
    try:
        val = int(tok)
    except ValueError:
        raise ParseError(line, f"expected an integer, got {tok!r}") from None
    if val < 0:
        raise ParseError(line, f"constant must be >= 0, got {val}")
    return val


def parse_program(text: str) -> MachineProgram:
    """Parse assembly text into a validated :class:`MachineProgram`."""
    cls = MachineClass.TCM
    alphabet = None
    raw = []  # (line, labels, mnemonic, args)
    pending: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("."):
            key, *rest = line.split()
            key = key.lower()
            if key == ".class" and len(rest) == 1:
                try:
                    cls = MachineClass(rest[0].upper())
                except ValueError:
                    raise ParseError(lineno, f"unknown machine class {rest[0]!r}") from None
            elif key == ".alphabet" and len(rest) == 1:
                alphabet = _parse_int(rest[0], lineno)
                if alphabet < 2:
                    raise ParseError(lineno, "alphabet radix must be >= 2")
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
        # labels after the last instruction name an implicit halt
        raw.append((raw[-1][0] if raw else 1, pending, "halt", []))
    if cls.with_input and alphabet is None:
        alphabet = 10

    # group into states, remembering unresolved label references
    states = []  # [lineno, op, k, targets(list of names), branches(list)]
    labels: dict[str, int] = {}
    for lineno, names, mnemonic, args in raw:
        if mnemonic == "on":
            if not cls.with_input:
                raise ClassMismatchError(lineno, f"input branch in a {cls.value} program")
            if len(args) != 3 or args[1].lower() != "goto":
                raise ParseError(lineno, "expected 'on SYM goto LABEL'")
            sym_tok = args[0].lower()
            if sym_tok == STOP:
                sym = STOP
            else:
                sym = _parse_int(sym_tok, lineno)
                if sym >= alphabet:
                    raise ParseError(lineno, f"symbol {sym} outside alphabet 0..{alphabet - 1}")
            if not names and states and states[-1][1] == WAIT:
                block = states[-1]
            else:
                block = [lineno, WAIT, 0, [], []]
                states.append(block)
            if any(s == sym for s, _, _ in block[4]):
                raise ParseError(lineno, f"duplicate branch for symbol {sym}")
            block[4].append((sym, args[2], lineno))
        else:
            states.append(_parse_plain(cls, lineno, mnemonic, args))
        for name in names:
            if name in labels:
                raise ParseError(lineno, f"label {name!r} defined twice")
            labels[name] = len(states) - 1

    def resolve(name, lineno):
        if name not in labels:
            raise UndefinedLabelError(lineno, f"undefined label {name!r}")
        return labels[name]

    built = []
    for lineno, op, k, tnames, branches in states:
        if op == WAIT:
            have = {s for s, _, _ in branches}
            missing = [s for s in list(range(alphabet)) + [STOP] if s not in have]
            if missing:
                raise IncompleteWaitStateError(
                    lineno, "wait state lacks branches for " + ", ".join(map(str, missing)))
            built.append(Instruction(WAIT, branches=tuple((s, resolve(t, ln)) for s, t, ln in branches),
                                     line=lineno))
        elif op == DIVMOD:
            built.append(Instruction(op, k, targets=tuple(resolve(t, lineno) for t in tnames), line=lineno))
        else:
            target = resolve(tnames[0], lineno) if tnames else None
            built.append(Instruction(op, k, target, line=lineno))
    return MachineProgram(cls, tuple(built), labels, alphabet if cls.with_input else None)


def _parse_plain(cls: MachineClass, lineno: int, mnemonic: str, args: list[str]):
    def want(count):
        if len(args) != count:
            raise ParseError(lineno, f"{mnemonic} takes {count} operand(s), got {len(args)}")

    def counter(tok):
        idx = _COUNTER.get(tok.lower())
        if idx is None:
            raise ParseError(lineno, f"expected c1 or c2, got {tok!r}")
        return idx

    two = cls.counters == 2
    if mnemonic in ("inc", "dec", "jz"):
        if not two:
            raise ClassMismatchError(lineno, f"counter instruction {mnemonic!r} in a {cls.value} program")
        if mnemonic == "jz":
            want(2)
            return [lineno, JZ1 + counter(args[0]), 0, [args[1]], []]
        want(1)
        base = INC1 if mnemonic == "inc" else DEC1
        return [lineno, base + counter(args[0]), 0, [], []]
    if mnemonic == "jmp":
        want(1)
        return [lineno, JMP, 0, [args[0]], []]
    if mnemonic == "halt":
        want(0)
        return [lineno, HALT, 0, [], []]
    if mnemonic in ("add", "mul", "decjz", "divmod"):
        if two:
            raise ClassMismatchError(lineno, f"register instruction {mnemonic!r} in a {cls.value} program")
        if mnemonic in ("add", "mul"):
            want(1)
            return [lineno, ADD if mnemonic == "add" else MUL, _parse_int(args[0], lineno), [], []]
        if mnemonic == "decjz":
            want(1)
            return [lineno, DECJZ, 0, [args[0]], []]
        if not args:
            raise ParseError(lineno, "divmod needs a modulus")
        k = _parse_int(args[0], lineno)
        if k < 1:
            raise ParseError(lineno, "divmod modulus must be >= 1")
        if len(args) != k + 1:
            raise ParseError(lineno, f"divmod {k} needs {k} labels, got {len(args) - 1}")
        return [lineno, DIVMOD, k, args[1:], []]
    raise UnknownMnemonicError(lineno, f"unknown mnemonic {mnemonic!r}")


def load_program(path) -> MachineProgram:
    with open(path) as fh:
        return parse_program(fh.read())


# -- configurations and traces -------------------------------------------------


@dataclass(frozen=True)
class Configuration:
    pc: int
    counters: tuple[int, ...]
    cursor: int = 0

    @property
    def c1(self) -> int:
        return self.counters[0]

    @property
    def c2(self) -> int:
        return self.counters[1]

    @property
    def r(self) -> int:
        return self.counters[0]

    @property
    def n_minus(self) -> int:
        return min(self.counters)

    @property
    def n_plus(self) -> int:
        return max(self.counters)

    @property
    def minus_index(self) -> int:
        """1-based index of the smaller counter (lowest index on ties)."""
        return self.counters.index(self.n_minus) + 1

    @property
    def plus_index(self) -> int:
        """1-based index of the larger counter (highest index on ties)."""
        return len(self.counters) - self.counters[::-1].index(self.n_plus)


class TraceEntry(NamedTuple):
    step: int
    pc: int
    counters: tuple
    cursor: int
    consumed: int | str | None

    @property
    def config(self) -> Configuration:
        return Configuration(self.pc, self.counters, self.cursor)

    def to_json(self) -> dict:
        obj = {"step": self.step, "state": self.pc}
        if len(self.counters) == 2:
            obj["c1"], obj["c2"] = self.counters
        else:
            obj["r"] = self.counters[0]
        obj["consumed"] = self.consumed
        return obj


class TraceMode(enum.Enum):
    FULL = "full"
    NONE = "none"
    AFTER_STOP = "after_stop"


@dataclass
class Trace:
    entries: list[TraceEntry]
    complete: bool = True   # False when only the post-stop tail was kept

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def configs(self) -> list[Configuration]:
        return [e.config for e in self.entries]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_json()) + "\n" for e in self.entries)


class Status(enum.Enum):
    HALTED = "halted"
    WAITING = "waiting"
    STEP_LIMIT = "step_limit"
    FAULT = "fault"


@dataclass(frozen=True)
class RunLimits:
    max_steps: int = 10**7
    accelerate: bool = False

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class RunResult:
    final: Configuration
    status: Status
    steps: int
    trace: Trace | None = None
    fault: str | None = None
    stop_step: int | None = None
    executed: int = 0       # steps actually interpreted (== steps unless accelerated)
    jumps: int = 0
    boundaries: list[tuple[int, Configuration]] | None = None

    @property
    def counters(self) -> tuple[int, ...]:
        return self.final.counters


class ZeroDecrementFault(RuntimeError):
    pass


# -- execution -----------------------------------------------------------------


def _symbols(program: MachineProgram, input, partial: bool) -> tuple:
    if not program.cls.with_input:
        if input:
            raise ValueError(f"{program.cls.value} programs take no input")
        return ()
    if input is None:
        syms: tuple = ()
    elif isinstance(input, DigitString):
        syms = tuple(input.digits) + (STOP,)
    else:
        syms = tuple(input)
    for pos, sym in enumerate(syms):
        if sym == STOP:
            if pos != len(syms) - 1:
                raise ValueError("the stop marker may only appear once, at the end of the input")
        elif not (isinstance(sym, int) and 0 <= sym < program.alphabet):
            raise ValueError(f"input symbol {sym!r} outside alphabet 0..{program.alphabet - 1}")
    if not partial and (not syms or syms[-1] != STOP):
        raise ValueError("input must end with the stop marker")
    return syms


def _start(program: MachineProgram, start) -> Configuration:
    width = program.cls.counters
    if start is None:
        return Configuration(0, (0,) * width)
    if not isinstance(start, Configuration):
        start = Configuration(0, tuple(start))
    if len(start.counters) != width:
        raise ValueError(f"{program.cls.value} has {width} counter(s)")
    if any(c < 0 for c in start.counters):
        raise ValueError("counters must be non-negative")
    if not 0 <= start.pc < program.state_count:
        raise ValueError(f"start state {start.pc} out of range")
    return start


def _tables(program: MachineProgram):
    ops = [ins.op for ins in program.states]
    ks = [ins.k for ins in program.states]
    tgt = [ins.target for ins in program.states]
    extra = [ins.targets if ins.op == DIVMOD else ins.branch_map() for ins in program.states]
    return ops, ks, tgt, extra


def run(program: MachineProgram, input=None, limits: RunLimits | None = None, *,
        start: Configuration | Sequence[int] | None = None,
        trace: TraceMode | str = TraceMode.FULL, partial: bool = False) -> RunResult:
    """Run ``program`` step by step.

    With-input classes take a digit string (the stop marker is appended)
    or an explicit symbol sequence ending in :data:`STOP`. The run ends
    at ``halt``, at a wait state once the input is exhausted, on a fault
    (decrementing an empty counter, running off the program) or when the
    step budget is spent. With ``limits.accelerate`` set this delegates
    to :func:`run_accelerated`.
    """
    limits = limits or RunLimits()
    if limits.accelerate:
        return run_accelerated(program, input, limits, start=start, partial=partial)
    mode = TraceMode(trace)
    syms = _symbols(program, input, partial)
    cfg = _start(program, start)
    ops, ks, tgt, extra = _tables(program)
    nstates = len(ops)
    pc, cursor = cfg.pc, cfg.cursor
    two = len(cfg.counters) == 2
    c1 = cfg.counters[0]
    c2 = cfg.counters[1] if two else 0
    max_steps = limits.max_steps
    nsyms = len(syms)
    rec = mode is TraceMode.FULL
    tail = mode is TraceMode.AFTER_STOP
    entries = []
    append = entries.append
    if rec:
        append(TraceEntry(0, pc, (c1, c2) if two else (c1,), cursor, None))
    steps = 0
    status = None
    fault = None
    stop_step = None
    ops = ops + [_END]
    while steps < max_steps:
        op = ops[pc]
        consumed = None
        if op == INC1:
            c1 += 1
            pc += 1
        elif op == JZ1:
            pc = tgt[pc] if c1 == 0 else pc + 1
        elif op == DEC1:
            if c1 == 0:
                status, fault = Status.FAULT, f"decrement of empty counter 1 at state {pc}"
                break
            c1 -= 1
            pc += 1
        elif op == JMP:
            pc = tgt[pc]
        elif op == INC2:
            c2 += 1
            pc += 1
        elif op == JZ2:
            pc = tgt[pc] if c2 == 0 else pc + 1
        elif op == DEC2:
            if c2 == 0:
                status, fault = Status.FAULT, f"decrement of empty counter 2 at state {pc}"
                break
            c2 -= 1
            pc += 1
        elif op == WAIT:
            if cursor >= nsyms:
                status = Status.WAITING
                break
            consumed = syms[cursor]
            cursor += 1
            pc = extra[pc][consumed]
            if consumed == STOP:
                stop_step = steps + 1
                if tail:
                    rec = True
        elif op == ADD:
            c1 += ks[pc]
            pc += 1
        elif op == MUL:
            c1 *= ks[pc]
            pc += 1
        elif op == DECJZ:
            if c1 >= 1:
                c1 -= 1
                pc += 1
            else:
                pc = tgt[pc]
        elif op == DIVMOD:
            c1, rem = divmod(c1, ks[pc])
            pc = extra[pc][rem]
        elif op == HALT:
            status = Status.HALTED
            break
        else:
            status, fault = Status.FAULT, "ran past the last instruction"
            break
        steps += 1
        if rec:
            append(TraceEntry(steps, pc, (c1, c2) if two else (c1,), cursor, consumed))
    if status is None:
        # out of budget, unless the machine is already stopped here
        op = ops[pc]
        if op == HALT:
            status = Status.HALTED
        elif op == WAIT and cursor >= nsyms:
            status = Status.WAITING
        elif op == _END:
            status, fault = Status.FAULT, "ran past the last instruction"
        else:
            status = Status.STEP_LIMIT
    final = Configuration(pc, (c1, c2) if two else (c1,), cursor)
    tr = None if mode is TraceMode.NONE else Trace(entries, complete=mode is TraceMode.FULL)
    return RunResult(final, status, steps, tr, fault, stop_step, executed=steps)


def is_online_run(trace: Trace) -> bool:
    """True when no counter changes at or after the step consuming the stop marker."""
    stop_at = next((i for i, e in enumerate(trace.entries) if e.consumed == STOP), None)
    if stop_at is None:
        raise ValueError("trace never consumed the stop marker")
    ref = trace.entries[stop_at].counters
    return all(e.counters == ref for e in trace.entries[stop_at:])


# -- accelerated execution -------------------------------------------------------


def _tested(op: int) -> tuple[int, ...]:
    """Counters whose value decides the behaviour of ``op``."""
    if op in (DEC1, JZ1, DECJZ):
        return (0,)
    if op in (DEC2, JZ2):
        return (1,)
    return ()


def run_accelerated(program: MachineProgram, input=None, limits: RunLimits | None = None, *,
                    start: Configuration | Sequence[int] | None = None,
                    partial: bool = False) -> RunResult:
    """Run ``program`` with cycle fast-forwarding.

    The final configuration, status and step count equal those of
    :func:`run`. Every configuration with an empty counter that the naive
    run passes through is reported in ``boundaries``.
    """
    from .analysis import cycle_jump

    limits = limits or RunLimits()
    syms = _symbols(program, input, partial)
    cfg = _start(program, start)
    ops, ks, tgt, extra = _tables(program)
    nstates = len(ops)
    width = len(cfg.counters)
    window_cap = max(4 * nstates, 64)
    pc, cursor = cfg.pc, cfg.cursor
    cs = list(cfg.counters)
    steps = executed = jumps = 0
    max_steps = limits.max_steps
    boundaries: list[tuple[int, Configuration]] = []
    window: list[tuple[int, tuple[int, ...]]] = []
    seen: dict[int, int] = {}
    status = fault = stop_step = None
    while True:
        if pc >= nstates:
            status, fault = Status.FAULT, "ran past the last instruction"
            break
        op = ops[pc]
        if op == HALT:
            status = Status.HALTED
            break
        if op == WAIT and cursor >= len(syms):
            status = Status.WAITING
            break
        if steps >= max_steps:
            status = Status.STEP_LIMIT
            break
        here = tuple(cs)
        first = seen.get(pc)
        if first is not None:
            cycle = window[first:]
            jump = cycle_jump(cycle, here, (max_steps - steps) // len(cycle))
            if jump:
                delta = [here[k] - cycle[0][1][k] for k in range(width)]
                cs = [here[k] + jump * delta[k] for k in range(width)]
                steps += jump * len(cycle)
                jumps += 1
                window.clear()
                seen.clear()
                if min(cs) == 0:
                    boundaries.append((steps, Configuration(pc, tuple(cs), cursor)))
                continue
        if len(window) >= window_cap:
            window.clear()
            seen.clear()
        seen[pc] = len(window)
        window.append((pc, here))
        # one naive step
        if op in (INC1, INC2):
            cs[op - INC1] += 1
            pc += 1
        elif op in (DEC1, DEC2):
            k = op - DEC1
            if cs[k] == 0:
                status, fault = Status.FAULT, f"decrement of empty counter {k + 1} at state {pc}"
                break
            cs[k] -= 1
            pc += 1
        elif op in (JZ1, JZ2):
            pc = tgt[pc] if cs[op - JZ1] == 0 else pc + 1
        elif op == JMP:
            pc = tgt[pc]
        elif op == WAIT:
            sym = syms[cursor]
            cursor += 1
            pc = extra[pc][sym]
            if sym == STOP:
                stop_step = steps + 1
            window.clear()
            seen.clear()
        elif op == ADD:
            cs[0] += ks[pc]
            pc += 1
        elif op == MUL:
            cs[0] *= ks[pc]
            pc += 1
            window.clear()
            seen.clear()
        elif op == DECJZ:
            if cs[0] >= 1:
                cs[0] -= 1
                pc += 1
            else:
                pc = tgt[pc]
        else:
            cs[0], rem = divmod(cs[0], ks[pc])
            pc = extra[pc][rem]
            window.clear()
            seen.clear()
        steps += 1
        executed += 1
        if min(cs) == 0:
            boundaries.append((steps, Configuration(pc, tuple(cs), cursor)))
    final = Configuration(pc, tuple(cs), cursor)
    return RunResult(final, status, steps, None, fault, stop_step, executed, jumps, boundaries)


def stage_boundaries(trace: Trace) -> list[tuple[int, Configuration]]:
    """Trace positions (after the first) whose configuration has an empty counter."""
    return [(e.step, e.config) for e in trace.entries[1:] if min(e.counters) == 0]


def parse_counters(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(","))


def symbols_from_text(text: str, radix: int) -> tuple:
    """Digits of ``text`` followed by the stop marker."""
    return tuple(DigitString.parse(text, radix).digits) + (STOP,) if text else (STOP,)


def iter_programs(paths: Iterable) -> Iterable[MachineProgram]:
    for path in paths:
        yield load_program(path)
