"""Stage segmentation and loop analysis of two-counter machine runs.

A *stage* is a stretch of a computation during which no counter is
empty; it ends at the next configuration with an empty counter, or where
the run stops. Inside a stage the machine's path depends only on its
state, so once a state repeats the stage is periodic and its end can be
computed arithmetically. :func:`cycle_jump` is the same argument in the
form the accelerated interpreter uses.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from .vm import (HALT, WAIT, Configuration, MachineClass, MachineProgram, RunLimits, RunResult,
                 Status, Trace, TraceMode, run)


def cycle_jump(cycle: Sequence[tuple[int, tuple[int, ...]]], here: tuple[int, ...],
               max_jumps: int, tested: Sequence[tuple[int, ...]] | None = None) -> int:
    """Number of whole repetitions of an observed cycle that can be skipped.

    ``cycle`` lists the (state, counters) pairs seen on one pass through a
    loop that consumed no input and used only additive instructions;
    ``here`` are the counters on returning to its first state.

    By default every skipped configuration must keep every counter >= 1:
    then each zero test takes the branch it took on the observed pass and
    no configuration with an empty counter (a stage boundary) is jumped
    over. With ``tested`` (the counters examined at each cycle position)
    only the examined values are constrained, and counters that return
    to their old value impose nothing.
    """
    if max_jumps <= 0:
        return 0
    base = cycle[0][1]
    jumps = max_jumps
    for k, now in enumerate(here):
        delta = now - base[k]
        if tested is None:
            watched = [cfg[1][k] for cfg in cycle]
        else:
            if delta == 0:
                continue
            watched = [cfg[1][k] for cfg, idx in zip(cycle, tested) if k in idx]
            if not watched:
                if delta < 0:
                    return 0
                continue
        lowest = min(watched)
        if lowest < 1:
            return 0
        floor_now = now + lowest - base[k]
        if floor_now < 1:
            return 0
        if delta < 0:
            jumps = min(jumps, (floor_now - 1) // -delta + 1)
    return jumps


# -- stages -------------------------------------------------------------------


class BoundaryKind(enum.Enum):
    INITIAL = "initial"
    ZERO_COUNTER = "zero_counter"
    HALT = "halt"
    INPUT_EXHAUSTED = "input_exhausted"
    STEP_LIMIT = "step_limit"
    FAULT = "fault"


_END_KIND = {Status.HALTED: BoundaryKind.HALT, Status.WAITING: BoundaryKind.INPUT_EXHAUSTED,
             Status.STEP_LIMIT: BoundaryKind.STEP_LIMIT, Status.FAULT: BoundaryKind.FAULT}


@dataclass(frozen=True)
class StageRecord:
    start_step: int
    end_step: int
    start: Configuration
    end: Configuration
    boundary_kind: BoundaryKind

    def to_dict(self) -> dict:
        return {"start_step": self.start_step, "end_step": self.end_step,
                "start": _cfg_dict(self.start), "end": _cfg_dict(self.end),
                "kind": self.boundary_kind.value}

    @classmethod
    def from_dict(cls, obj: dict) -> "StageRecord":
        return cls(obj["start_step"], obj["end_step"], _cfg_from(obj["start"]),
                   _cfg_from(obj["end"]), BoundaryKind(obj["kind"]))


def _cfg_dict(cfg: Configuration) -> dict:
    return {"state": cfg.pc, "counters": list(cfg.counters), "cursor": cfg.cursor}


def _cfg_from(obj: dict) -> Configuration:
    return Configuration(obj["state"], tuple(obj["counters"]), obj["cursor"])


def segment_stages(trace: Trace | RunResult, status: Status | None = None) -> list[StageRecord]:
    """Split a trace at every configuration with an empty counter.

    The last stage ends where the run stopped; its kind comes from the
    run status (``HALTED`` when only a bare trace is given).
    """
    if isinstance(trace, RunResult):
        status = trace.status if status is None else status
        trace = trace.trace
    if trace is None or not len(trace):
        raise ValueError("segment_stages needs a non-empty trace")
    entries = trace.entries
    final_kind = _END_KIND[status or Status.HALTED]
    if len(entries) == 1:
        cfg = entries[0].config
        kind = BoundaryKind.INITIAL if status is None else final_kind
        return [StageRecord(entries[0].step, entries[0].step, cfg, cfg, kind)]
    stages = []
    begin = entries[0]
    last = len(entries) - 1
    for idx in range(1, len(entries)):
        ent = entries[idx]
        if idx == last:
            stages.append(StageRecord(begin.step, ent.step, begin.config, ent.config, final_kind))
        elif min(ent.counters) == 0:
            stages.append(StageRecord(begin.step, ent.step, begin.config, ent.config,
                                      BoundaryKind.ZERO_COUNTER))
            begin = ent
    return stages


def final_stage_bound(result: RunResult, state_count: int) -> bool | None:
    """Check that a halting run whose last stage starts with an empty
    counter ends with its smaller counter below ``state_count + 1``.

    Returns None when the check does not apply.
    """
    if result.status is not Status.HALTED or result.trace is None:
        return None
    stages = segment_stages(result)
    last = stages[-1]
    if last.start.n_minus != 0 or last.start_step == last.end_step:
        return None
    return last.end.n_minus < state_count + 1


# -- loop extraction ------------------------------------------------------------


class LoopCase(enum.Enum):
    STRAIGHT = "1"
    OPPOSITE = "2a"      # omega1*omega2 <= 0, one counter drains
    BOTH_NEGATIVE = "2b"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class LoopSummary:
    """Shape of the path from ``start`` until some counter empties.

    ``prefix``/``cycle`` hold (state, counter offsets) pairs: offsets of the
    prefix are relative to ``start``, those of the cycle relative to
    the cycle's entry. ``delta`` is the per-cycle change ``(omega1, omega2)``.
    """

    start: Configuration
    state_count: int
    omega0: int
    omega: int
    delta: tuple[int, ...]
    prefix: tuple[tuple[int, tuple[int, ...]], ...]
    cycle: tuple[tuple[int, tuple[int, ...]], ...]
    entry_offset: tuple[int, ...]

    @property
    def omega1(self) -> int:
        return self.delta[0]

    @property
    def omega2(self) -> int:
        return self.delta[1]

    @property
    def case(self) -> LoopCase:
        if all(x >= 0 for x in self.delta):
            return LoopCase.DIVERGENT
        if self.omega1 * self.omega2 > 0:
            return LoopCase.BOTH_NEGATIVE
        return LoopCase.OPPOSITE

    def to_dict(self) -> dict:
        return {"omega0": self.omega0, "omega": self.omega, "omega1": self.omega1,
                "omega2": self.omega2, "case": self.case.value}


@dataclass(frozen=True)
class StraightLine:
    """The machine stops (halts or waits) before any state repeats."""

    start: Configuration
    state_count: int
    steps: int
    r: tuple[int, ...]
    end_state: int
    status: Status

    case = LoopCase.STRAIGHT

    def to_dict(self) -> dict:
        return {"case": "1", "steps": self.steps, "r": list(self.r), "end_state": self.end_state,
                "status": self.status.value}


class InconclusiveAnalysis(RuntimeError):
    pass


class PredictionRefused(ValueError):
    pass


def _valid_start(program: MachineProgram, start) -> Configuration:
    if program.cls.counters != 2:
        raise ValueError("loop analysis is defined for two-counter machines")
    if not isinstance(start, Configuration):
        start = Configuration(0, tuple(start))
    return start


def extract_loop(program: MachineProgram, start, budget: int | None = None):
    """Find the loop a two-counter machine enters from ``start``.

    Needs both counters above ``s + 1`` (``s`` the state count), which
    keeps them non-empty until a state repeats. Returns a
    :class:`StraightLine` if the machine stops first, else a
    :class:`LoopSummary`.
    """
    start = _valid_start(program, start)
    s = program.state_count
    if min(start.counters) <= s + 1:
        raise ValueError(f"both counters must exceed s+1 = {s + 1}")
    budget = s + 2 if budget is None else budget
    res = run(program, None if not program.cls.with_input else (), RunLimits(max_steps=budget),
              start=start, partial=True)
    entries = res.trace.entries
    first: dict[int, int] = {}
    for idx, ent in enumerate(entries):
        if idx == len(entries) - 1 and res.status in (Status.HALTED, Status.WAITING):
            r = tuple(a - b for a, b in zip(ent.counters, start.counters))
            return StraightLine(start, s, ent.step, r, ent.pc, res.status)
        if ent.pc in first:
            t0 = first[ent.pc]
            entry = entries[t0].counters
            prefix = tuple((e.pc, _offset(e.counters, start.counters)) for e in entries[:t0])
            cycle = tuple((e.pc, _offset(e.counters, entry)) for e in entries[t0:idx])
            return LoopSummary(start, s, t0, idx - t0, _offset(ent.counters, entry), prefix, cycle,
                               _offset(entry, start.counters))
        first[ent.pc] = idx
    raise InconclusiveAnalysis(f"no repetition or halt within {budget} steps ({res.status.value})")


def _offset(a, b) -> tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


@dataclass(frozen=True)
class StagePrediction:
    end: Configuration
    steps: int
    halted: bool = False
    u: int | None = None            # 1-based index of the counter left non-empty
    residue: int | None = None      # r in m_+ = m_u + omega_u*floor(m_{3-u}/|omega_{3-u}|) + r
    wide_margin: bool = False  # start satisfies the magnitude hypotheses (> s+1)

    def residue_bounded(self, state_count: int) -> bool | None:
        if self.residue is None:
            return None
        return abs(self.residue) < 3 * state_count


def predict_stage_end(summary, start) -> StagePrediction:
    """Predict the first configuration with an empty counter reached from
    ``start`` without simulating the loop.

    ``start`` must sit in the summary's starting state with both counters
    non-empty; the path then coincides with the summarised one until a
    counter empties. A straight-line summary needs counters above ``s`` so
    its bounded changes cannot empty them.
    """
    start = Configuration(start.pc, tuple(start.counters), start.cursor) \
        if isinstance(start, Configuration) else Configuration(summary.start.pc, tuple(start))
    if start.pc != summary.start.pc:
        raise PredictionRefused(f"start state {start.pc} differs from summary state {summary.start.pc}")
    s = summary.state_count
    wide = min(start.counters) > s + 1
    if isinstance(summary, StraightLine):
        if min(start.counters) <= s:
            raise PredictionRefused(f"straight-line prediction needs counters above s = {s}")
        end = Configuration(summary.end_state, tuple(a + b for a, b in zip(start.counters, summary.r)),
                            start.cursor)
        return StagePrediction(end, summary.steps, halted=True, wide_margin=wide)
    if min(start.counters) < 1:
        raise PredictionRefused("prediction needs both counters non-empty at the start")

    # the prefix may already empty a counter
    for t, (pc, off) in enumerate(summary.prefix):
        vals = tuple(a + b for a, b in zip(start.counters, off))
        if t and min(vals) <= 0:
            return _finish(summary, start, Configuration(pc, vals, start.cursor), t, wide)
    entry = tuple(a + b for a, b in zip(start.counters, summary.entry_offset))
    if summary.omega0 and min(entry) <= 0:
        pc = summary.cycle[0][0]
        return _finish(summary, start, Configuration(pc, entry, start.cursor), summary.omega0, wide)
    best = None
    for t, (pc, off) in enumerate(summary.cycle):
        for k, d in enumerate(summary.delta):
            v = entry[k] + off[k]
            if v <= 0:
                j = 0
            elif d < 0:
                j = -(-v // -d)
            else:
                continue
            if (j, t) == (0, 0) and summary.omega0 == 0:
                continue
            if best is None or (j, t) < best:
                best = (j, t)
    if best is None:
        raise PredictionRefused("the loop never empties a counter: the stage does not end")
    j, t = best
    pc, off = summary.cycle[t]
    vals = tuple(entry[k] + j * summary.delta[k] + off[k] for k in range(len(entry)))
    steps = summary.omega0 + j * summary.omega + t
    return _finish(summary, start, Configuration(pc, vals, start.cursor), steps, wide)


def _finish(summary, start, end, steps, wide) -> StagePrediction:
    u = end.plus_index
    other = 3 - u
    w_other = summary.delta[other - 1]
    residue = None
    if w_other != 0:
        residue = end.n_plus - (start.counters[u - 1]
                                + summary.delta[u - 1] * (start.counters[other - 1] // abs(w_other)))
    return StagePrediction(end, steps, False, u, residue, wide)


def simulate_stage_end(program: MachineProgram, start: Configuration,
                       max_steps: int = 10**7) -> tuple[Configuration, int, Status | None]:
    """Naive reference for :func:`predict_stage_end`: step until a counter
    empties (or the machine stops)."""
    res = run(program, None if not program.cls.with_input else (), RunLimits(max_steps=max_steps),
              start=start, partial=True)
    for ent in res.trace.entries[1:]:
        if min(ent.counters) == 0:
            return ent.config, ent.step, None
    return res.final, res.steps, res.status


# -- affine stage maps ----------------------------------------------------------


@dataclass(frozen=True)
class AffineFamily:
    """Start configurations ``(state, ...)`` with counter ``zero_counter``
    empty and the other holding ``base + j*step``."""

    state: int
    zero_counter: int
    base: int
    step: int
    count: int = 8
    holdout: int = 4

    def member(self, j: int) -> Configuration:
        val = self.base + j * self.step
        counters = (0, val) if self.zero_counter == 1 else (val, 0)
        return Configuration(self.state, counters)


@dataclass(frozen=True)
class AffineStageMap:
    P: int
    Q: int
    R: int
    D: int

    def apply(self, m_plus: int) -> int:
        return self.P * (m_plus // self.Q) + self.R

    def to_dict(self) -> dict:
        return {"P": self.P, "Q": self.Q, "R": self.R, "D": self.D}


class AffineFitError(ValueError):
    pass


def _family_output(program, cfg, max_steps, accelerate):
    res = run(program, None if not program.cls.with_input else (),
              RunLimits(max_steps=max_steps, accelerate=accelerate), start=cfg, partial=True,
              trace=TraceMode.FULL)
    if res.status not in (Status.HALTED, Status.WAITING):
        raise AffineFitError(f"member {cfg.counters} did not stop ({res.status.value})")
    if accelerate:
        path = tuple(c.pc for _, c in res.boundaries)
    else:
        path = tuple(e.pc for e in res.trace.entries[1:] if min(e.counters) == 0)
    return res.final.n_plus, path, res.final.pc


def fit_affine_map(program: MachineProgram, family: AffineFamily, max_q: int = 64,
                   max_steps: int = 10**7, accelerate: bool = False) -> AffineStageMap:
    """Fit ``m_+ -> P*floor(m_+/Q) + R`` over a family of runs and check it
    on held-out members. Raises :class:`AffineFitError` if no map with
    ``Q <= max_q`` reproduces every member or the members take different
    paths through their stage boundaries."""
    s = program.state_count
    if family.base <= s:
        raise ValueError(f"family values must exceed s = {s}")
    if family.count < 2 or family.step < 1:
        raise ValueError("need at least two fitting members and a positive step")
    xs, ys, paths = [], [], set()
    for j in range(family.count + family.holdout):
        cfg = family.member(j)
        y, path, end = _family_output(program, cfg, max_steps, accelerate)
        xs.append(cfg.n_plus)
        ys.append(y)
        paths.add((path, end))
    if len(paths) != 1:
        raise AffineFitError("family members pass through different stage states")
    fit_x, fit_y = xs[:family.count], ys[:family.count]
    for Q in range(1, max_q + 1):
        ts = [x // Q for x in fit_x]
        if ts[0] == ts[-1]:
            continue
        num, den = fit_y[-1] - fit_y[0], ts[-1] - ts[0]
        if num % den:
            continue
        P = num // den
        R = fit_y[0] - P * ts[0]
        cand = AffineStageMap(P, Q, R, family.step)
        if all(cand.apply(x) == y for x, y in zip(fit_x, fit_y)):
            if all(cand.apply(x) == y for x, y in zip(xs[family.count:], ys[family.count:])):
                return cand
            raise AffineFitError(f"map {cand} fits the family but fails on held-out members")
    raise AffineFitError(f"no affine map with Q <= {max_q} fits the family")


# -- reports ---------------------------------------------------------------------


@dataclass
class AnalysisReport:
    stages: list[StageRecord] = field(default_factory=list)
    loop: LoopSummary | StraightLine | None = None
    affine: AffineStageMap | None = None

    def to_dict(self) -> dict:
        obj = {"stages": [st.to_dict() for st in self.stages]}
        if self.loop is not None:
            obj["loop"] = self.loop.to_dict()
        if self.affine is not None:
            obj["affine"] = self.affine.to_dict()
        return obj


def state_count(program: MachineProgram) -> int:
    return program.state_count
