"""Seeded generator of small machines with known-terminating shapes.

Random two-counter programs usually loop forever, so the corpus is built
from templates: shuttles between counters with scale factors, guarded
drains, halving loops, straight-line blocks, chains of loops, plus a few
deliberately faulting or non-terminating programs, reverse counters with
random inputs and one-register programs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .vm import STOP, Configuration, MachineProgram, parse_program


@dataclass(frozen=True)
class CorpusCase:
    name: str
    program: MachineProgram
    start: Configuration | None = None
    input: tuple | None = None
    max_steps: int = 10**6


def _guarded_dec(counter: str, times: int, exit_label: str) -> list[str]:
    return [f"jz {counter} {exit_label}", f"dec {counter}"] * times


def _shuttle(src: str, dst: str, k: int, tag: str) -> list[str]:
    return [f"{tag}: jz {src} {tag}x", f"dec {src}"] + [f"inc {dst}"] * k + [f"jmp {tag}", f"{tag}x:"]


def transfer(rng: random.Random) -> str:
    src, dst = rng.choice([("c1", "c2"), ("c2", "c1")])
    return "\n".join(_shuttle(src, dst, rng.randint(0, 4), "A") + ["halt"])


def countdown(rng: random.Random) -> str:
    lines = ["inc c2"] * rng.randint(1, 3)
    lines += ["L: jz c1 E", "dec c1", "jmp L", "E: halt"]
    return "\n".join(lines)


def drain(rng: random.Random) -> str:
    a, b = rng.randint(1, 3), rng.randint(0, 3)
    lines = ["L:"] + _guarded_dec("c1", a, "E") + ["inc c2"] * b + ["jmp L", "E: halt"]
    return "\n".join(lines)


def both_negative(rng: random.Random) -> str:
    a, b = rng.randint(1, 3), rng.randint(1, 3)
    lines = ["L:"] + _guarded_dec("c1", a, "E") + _guarded_dec("c2", b, "E") + ["jmp L", "E: halt"]
    return "\n".join(lines)


def halving(rng: random.Random) -> str:
    q = rng.randint(2, 4)
    lines = ["L: jz c1 B", "dec c1"] + _guarded_dec("c1", q - 1, "B") + ["inc c2", "jmp L"]
    lines += ["B:"] + (_shuttle("c2", "c1", rng.randint(1, 2), "C") if rng.random() < 0.5 else [])
    return "\n".join(lines + ["halt"])


def straight_line(rng: random.Random) -> str:
    lines = []
    for _ in range(rng.randint(1, 8)):
        c = rng.choice(["c1", "c2"])
        lines += [f"inc {c}"] if rng.random() < 0.5 else _guarded_dec(c, 1, "E")
    return "\n".join(lines + ["E: halt"])


def chain(rng: random.Random) -> str:
    lines: list[str] = []
    src, dst = "c1", "c2"
    for i in range(rng.randint(2, 3)):
        lines += _shuttle(src, dst, rng.randint(1, 3), f"S{i}")
        src, dst = dst, src
    if rng.random() < 0.5:
        lines += ["inc c1"] * rng.randint(1, 3)
    return "\n".join(lines + ["halt"])


def mixed_drain(rng: random.Random) -> str:
    """A loop that drains c1 while feeding c2, then drains c2 in pairs."""
    lines = ["L:"] + _guarded_dec("c1", rng.randint(1, 2), "M") + ["inc c2"] * rng.randint(1, 3) + ["jmp L"]
    lines += ["M:"] + _guarded_dec("c2", rng.randint(1, 3), "E") + ["inc c1", "jmp M", "E: halt"]
    return "\n".join(lines)


def faulting(rng: random.Random) -> str:
    return "\n".join(["L: dec c1"] + ["inc c2"] * rng.randint(0, 2) + ["jmp L"])


def diverging(rng: random.Random) -> str:
    return "\n".join(["L: inc c1"] + ["inc c2"] * rng.randint(0, 2) + ["jmp L"])


TEMPLATES = {
    "transfer": transfer, "countdown": countdown, "drain": drain, "both_negative": both_negative,
    "halving": halving, "straight": straight_line, "chain": chain, "mixed": mixed_drain,
}


def _mp1rm(rng: random.Random) -> str:
    k = rng.randint(2, 4)
    lines = [".class MP1RM", f"mul {rng.randint(1, 3)}", f"add {rng.randint(0, 3)}",
             "L: decjz E"] + ["decjz E"] * rng.randint(0, 2) + ["jmp L",
             f"E: add {rng.randint(1, 5)}", f"divmod {k} " + " ".join(["H"] * k), "H: halt"]
    return "\n".join(lines)


def generate_corpus(seed: int = 0, per_template: int = 24) -> list[CorpusCase]:
    """Deterministic corpus for ``seed``; ``per_template`` variants of
    each halting template plus extra categories."""
    from .registers import reverse_counter_tcmi

    rng = random.Random(seed)
    cases: list[CorpusCase] = []
    for name, make in TEMPLATES.items():
        for i in range(per_template):
            prog = parse_program(make(rng))
            top = rng.choice([60, 2000, 20000])
            start = Configuration(0, (rng.randint(0, top), rng.randint(0, top)))
            cases.append(CorpusCase(f"{name}-{i}", prog, start))
    for i in range(6):
        cases.append(CorpusCase(f"fault-{i}", parse_program(faulting(rng)),
                                Configuration(0, (rng.randint(0, 40), rng.randint(0, 5)))))
        cases.append(CorpusCase(f"diverge-{i}", parse_program(diverging(rng)),
                                Configuration(0, (rng.randint(0, 5), rng.randint(0, 5))),
                                max_steps=rng.randint(50, 5000)))
    for i in range(12):
        b = rng.choice([2, 3, 10])
        digits = tuple(rng.randrange(b) for _ in range(rng.randint(0, 4)))
        cases.append(CorpusCase(f"reverse{b}-{i}", reverse_counter_tcmi(b), None, digits + (STOP,)))
    for i in range(12):
        cases.append(CorpusCase(f"mp1rm-{i}", parse_program(_mp1rm(rng)),
                                Configuration(0, (rng.randint(0, 50),))))
    return cases
