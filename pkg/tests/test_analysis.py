import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clingerlab.analysis import (
    AffineFamily, AffineFitError, AnalysisReport, BoundaryKind, InconclusiveAnalysis, LoopCase,
    LoopSummary, PredictionRefused, StageRecord, StraightLine, extract_loop, final_stage_bound,
    fit_affine_map, predict_stage_end, segment_stages, simulate_stage_end,
)
from clingerlab.corpus import TEMPLATES
from clingerlab.radix import DigitString
from clingerlab.registers import reverse_counter_tcmi
from clingerlab.vm import Configuration, RunLimits, Status, parse_program, run
from oracles import naive_stage_end

DRAIN = "L: dec c1\ninc c2\ninc c2\njz c1 E\njmp L\nE: halt"
BOTH = "L: dec c1\ndec c2\njz c1 E\njz c2 E\njmp L\nE: halt"
DOUBLER = "L: jz c1 E\ndec c1\ninc c2\ninc c2\njmp L\nE: halt"
HALVER = "L: jz c1 E\ndec c1\njz c1 E\ndec c1\ninc c2\njmp L\nE: halt"
MOVER = "L: jz c1 E\ndec c1\ninc c2\njmp L\nE: halt"


def check_partition(result):
    stages = segment_stages(result)
    entries = result.trace.entries
    assert stages[0].start_step == entries[0].step
    assert stages[-1].end_step == entries[-1].step
    for a, b in zip(stages, stages[1:]):
        assert a.end_step == b.start_step and a.end == b.start
        assert a.boundary_kind is BoundaryKind.ZERO_COUNTER and min(a.end.counters) == 0
    by_step = {e.step: e for e in entries}
    for stg in stages:
        for step in range(stg.start_step + 1, stg.end_step):
            assert min(by_step[step].counters) > 0
    return stages


class TestStages:
    def test_never_zero_is_one_halt_stage(self):
        res = run(parse_program("inc c1\ninc c2\nhalt"), start=(5, 5))
        stages = segment_stages(res)
        assert len(stages) == 1 and stages[0].boundary_kind is BoundaryKind.HALT

    def test_constructed_zero_at_five_halt_at_nine(self):
        prog = parse_program("\n".join(["inc c1"] * 3 + ["dec c2"] * 2 + ["inc c2"] * 4 + ["halt"]))
        res = run(prog, start=(1, 2))
        stages = check_partition(res)
        assert [(s.start_step, s.end_step) for s in stages] == [(0, 5), (5, 9)]
        assert [s.boundary_kind for s in stages] == [BoundaryKind.ZERO_COUNTER, BoundaryKind.HALT]

    def test_reverse_counter_shuttles(self):
        prog = reverse_counter_tcmi(10)
        res = run(prog, DigitString.parse("17"))
        stages = check_partition(res)
        assert stages[-1].boundary_kind is BoundaryKind.INPUT_EXHAUSTED
        pcs = {s.end.pc for s in stages[:-1]}
        d7, m7, a7 = prog.labels["D7"], prog.labels["M7"], prog.labels["A7"]
        # the digit-7 block empties c1 while shuttling out and c2 while shuttling back
        assert any(d7 <= pc < m7 for pc in pcs) and any(m7 <= pc < a7 for pc in pcs)

    def test_fault_and_limit_kinds(self):
        res = run(parse_program("dec c1"), start=(0, 0))
        assert segment_stages(res)[-1].boundary_kind is BoundaryKind.FAULT
        res = run(parse_program("L: inc c1\njmp L"), start=(1, 1), limits=RunLimits(max_steps=10))
        assert segment_stages(res)[-1].boundary_kind is BoundaryKind.STEP_LIMIT

    def test_record_round_trip(self):
        res = run(parse_program(DRAIN), start=(10, 5))
        for stage in segment_stages(res):
            assert StageRecord.from_dict(json.loads(json.dumps(stage.to_dict()))) == stage

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from(sorted(TEMPLATES)), st.integers(0, 10**6), st.integers(0, 300), st.integers(0, 300))
    def test_partition_on_templates(self, name, seed, a, b):
        prog = parse_program(TEMPLATES[name](random.Random(seed)))
        check_partition(run(prog, start=(a, b)))


class TestFinalStageBound:
    def test_holds_for_drain(self):
        prog = parse_program(DRAIN)
        assert final_stage_bound(run(prog, start=(10, 5)), prog.state_count) is True

    def test_not_applicable_without_empty_start(self):
        prog = parse_program("inc c1\nhalt")
        assert final_stage_bound(run(prog, start=(3, 3)), prog.state_count) is None
        assert final_stage_bound(run(parse_program("L: inc c1\njmp L"), limits=RunLimits(max_steps=5)), 2) is None

    def test_violation_detected(self):
        # a straight line that ends with a large smaller counter after an empty one
        prog = parse_program("dec c2\n" + "inc c2\n" * 3 + "halt")
        res = run(prog, start=(100, 1))
        assert final_stage_bound(res, 1) is False


class TestExtractLoop:
    def test_drain_deltas(self):
        summary = extract_loop(parse_program(DRAIN), Configuration(0, (50, 50)))
        assert isinstance(summary, LoopSummary)
        assert (summary.omega1, summary.omega2, summary.case) == (-1, 2, LoopCase.OPPOSITE)
        assert (summary.omega0, summary.omega) == (0, 5)

    def test_both_negative(self):
        summary = extract_loop(parse_program(BOTH), Configuration(0, (50, 50)))
        assert (summary.omega1, summary.omega2, summary.case) == (-1, -1, LoopCase.BOTH_NEGATIVE)

    def test_straight_line(self):
        summary = extract_loop(parse_program("inc c1\nhalt"), Configuration(0, (10, 10)))
        assert isinstance(summary, StraightLine) and summary.r == (1, 0) and summary.case is LoopCase.STRAIGHT

    def test_divergent_loop(self):
        summary = extract_loop(parse_program("L: inc c1\ninc c2\njmp L"), (10, 10))
        assert summary.case is LoopCase.DIVERGENT
        with pytest.raises(PredictionRefused):
            predict_stage_end(summary, Configuration(0, (10, 10)))

    def test_small_counters_rejected(self):
        with pytest.raises(ValueError):
            extract_loop(parse_program(DRAIN), (7, 50))

    def test_budget_exhaustion_is_inconclusive(self):
        with pytest.raises(InconclusiveAnalysis):
            extract_loop(parse_program(DRAIN), (50, 50), budget=3)

    def test_deltas_bounded_by_cycle_length(self):
        for name, make in TEMPLATES.items():
            for seed in range(5):
                prog = parse_program(make(random.Random(seed)))
                s = prog.state_count
                summary = extract_loop(prog, (s + 50, s + 50))
                if isinstance(summary, LoopSummary):
                    assert max(abs(x) for x in summary.delta) <= summary.omega <= s


class TestPrediction:
    @pytest.mark.parametrize("text,start", [(DRAIN, (10, 5)), (BOTH, (10, 20)), (BOTH, (20, 10)), (DRAIN, (1000, 1))])
    def test_matches_naive(self, text, start):
        prog = parse_program(text)
        summary = extract_loop(prog, Configuration(0, (50, 50)))
        pred = predict_stage_end(summary, Configuration(0, start))
        ent = naive_stage_end(prog, Configuration(0, start))
        assert (pred.end, pred.steps) == (ent.config, ent.step)

    def test_both_negative_first_counter_empties(self):
        prog = parse_program(BOTH)
        summary = extract_loop(prog, (50, 50))
        pred = predict_stage_end(summary, Configuration(0, (10, 20)))
        # c1 empties right after its decrement, before that round's dec c2
        assert pred.end.counters == (0, 11) and pred.u == 2

    def test_straight_line_prediction(self):
        prog = parse_program("inc c1\nhalt")
        summary = extract_loop(prog, (10, 10))
        pred = predict_stage_end(summary, Configuration(0, (7, 4)))
        assert pred.halted and pred.end.counters == (8, 4)
        with pytest.raises(PredictionRefused):
            predict_stage_end(summary, Configuration(0, (1, 4)))

    def test_refusals(self):
        prog = parse_program(DRAIN)
        summary = extract_loop(prog, (50, 50))
        with pytest.raises(PredictionRefused):
            predict_stage_end(summary, Configuration(1, (50, 50)))
        with pytest.raises(PredictionRefused):
            predict_stage_end(summary, Configuration(0, (0, 50)))

    def test_residue_reported_and_bounded(self):
        prog = parse_program(DRAIN)
        summary = extract_loop(prog, (50, 50))
        pred = predict_stage_end(summary, Configuration(0, (40, 30)))
        assert pred.wide_margin and pred.residue_bounded(prog.state_count)

    @settings(max_examples=80, deadline=None)
    @given(st.sampled_from(sorted(TEMPLATES)), st.integers(0, 10**6), st.integers(1, 5000), st.integers(1, 5000))
    def test_soundness_on_templates(self, name, seed, a, b):
        prog = parse_program(TEMPLATES[name](random.Random(seed)))
        s = prog.state_count
        try:
            summary = extract_loop(prog, (s + 2 + a % 7, s + 2 + b % 7))
            pred = predict_stage_end(summary, Configuration(0, (a, b)))
        except PredictionRefused:
            return
        end, steps, status = simulate_stage_end(prog, Configuration(0, (a, b)))
        assert (pred.end, pred.steps) == (end, steps)


class TestAffine:
    @pytest.mark.parametrize("text,step,expected", [(DOUBLER, 1, (2, 1, 0)), (HALVER, 2, (1, 2, 0)),
                                                    (MOVER, 1, (1, 1, 0)), (MOVER, 3, (1, 1, 0))])
    def test_fits(self, text, step, expected):
        prog = parse_program(text)
        fam = AffineFamily(0, 2, 20, step)
        fit = fit_affine_map(prog, fam)
        assert (fit.P, fit.Q, fit.R) == expected and fit.D == step
        assert fit_affine_map(prog, fam, accelerate=True) == fit

    def test_halving_with_mixed_parity_is_inconsistent(self):
        # odd members leave through the second jz: a different boundary path
        with pytest.raises(AffineFitError):
            fit_affine_map(parse_program(HALVER), AffineFamily(0, 2, 21, 1))

    def test_inconsistent_paths(self):
        prog = parse_program("L: jz c1 E\ndec c1\njz c1 F\ndec c1\ninc c2\njmp L\nE: halt\nF: halt")
        with pytest.raises(AffineFitError):
            fit_affine_map(prog, AffineFamily(0, 2, 20, 1))

    def test_quotient_beyond_search(self):
        text = "L: jz c1 E\n" + "dec c1\njz c1 E\n" * 4 + "dec c1\ninc c2\njmp L\nE: halt"
        with pytest.raises(AffineFitError):
            fit_affine_map(parse_program(text), AffineFamily(0, 2, 30, 5), max_q=4)
        assert fit_affine_map(parse_program(text), AffineFamily(0, 2, 30, 5)).Q == 5

    def test_report_json(self):
        prog = parse_program(DRAIN)
        res = run(prog, start=(50, 50))
        report = AnalysisReport(segment_stages(res), extract_loop(prog, (50, 50)),
                                fit_affine_map(parse_program(MOVER), AffineFamily(0, 2, 20, 1)))
        obj = json.loads(json.dumps(report.to_dict()))
        assert set(obj) == {"stages", "loop", "affine"}
        assert obj["loop"]["omega1"] == -1 and obj["affine"]["P"] == 1
