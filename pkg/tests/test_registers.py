from importlib.resources import files

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clingerlab.radix import ConversionInput, DigitString, Order, Radix, best_approx
from clingerlab.registers import (
    SIGNIFICAND, ExponentBoundError, PrimeEncoding, RegisterAssembler, Significance,
    clinger_register_program, clinger_significand, compile_to_tcmi, decode_counters,
    decode_state, encode_state, load_register_program, parse_register_program,
    reverse_counter_tcmi, run_register,
)
from clingerlab.vm import STOP, ParseError, RunLimits, Status, is_online_run, run

ENC3 = PrimeEncoding((2, 3, 5))
HUGE = RunLimits(max_steps=10**1000, accelerate=True)
PROGRAMS = files("clingerlab") / "programs"


def significand_of(e, D, d, n):
    return best_approx(ConversionInput(1, e, Radix(D)), Radix(d), n).m


class TestEncoding:
    @pytest.mark.parametrize("values,code", [([1, 0, 0], 2), ([2, 1, 0], 12), ([0, 0, 0], 1)])
    def test_encode(self, values, code):
        assert encode_state(values, ENC3) == code

    @pytest.mark.parametrize("code,values,leftover", [(12, (2, 1, 0), 1), (7, (0, 0, 0), 7), (2, (1, 0, 0), 1)])
    def test_decode(self, code, values, leftover):
        assert decode_state(code, ENC3) == (values, leftover)

    def test_decode_zero_rejected(self):
        with pytest.raises(ValueError):
            decode_state(0, ENC3)

    def test_encoding_validation(self):
        with pytest.raises(ValueError):
            PrimeEncoding((2, 4))
        with pytest.raises(ValueError):
            PrimeEncoding((3, 3))
        assert PrimeEncoding.first(5).primes == (2, 3, 5, 7, 11)

    @given(st.lists(st.integers(0, 20), min_size=1, max_size=8))
    def test_round_trip(self, values):
        enc = PrimeEncoding.first(len(values))
        assert decode_state(encode_state(values, enc), enc) == (tuple(values), 1)

    def test_huge_exponent_decodes(self):
        assert decode_state(3 * 2**5000, ENC3) == ((5000, 1, 0), 1)


class TestRegisterParser:
    def test_parse_and_text_round_trip(self):
        prog = parse_register_program(".class REG\n.registers 2\nL: decjz r1 E\ninc r2\njmp L\nE: halt")
        assert prog.registers == 2 and prog.size == 4
        assert parse_register_program(prog.to_text()) == prog

    @pytest.mark.parametrize("text", [
        ".class REG\ninc r1",                        # missing register count
        ".class REG\n.registers 1\ninc r2",          # register out of range
        ".class REG\n.registers 1\nfrob r1",
        ".class REG\n.registers 1\ndecjz r1 NOWHERE",
        ".class TCM\n.registers 1\nhalt",
    ])
    def test_errors(self, text):
        with pytest.raises(ParseError):
            parse_register_program(text)

    def test_shipped_programs_round_trip(self):
        for name in ("inc1.reg", "clinger_b10_D2_d10_n1.reg", "clinger_b2_D2_d3_n1.reg"):
            prog = load_register_program(PROGRAMS / name)
            assert parse_register_program(prog.to_text()) == prog
        assert load_register_program(PROGRAMS / "clinger_b2_D2_d3_n1.reg") == clinger_register_program(2, 2, 3, 1)


class TestRunRegister:
    def test_inc_halt(self):
        res = run_register(parse_register_program(".class REG\n.registers 1\ninc r1\nhalt"))
        assert res.registers == (1,) and res.status is Status.HALTED

    # 16 rounds to 2e1 with one decimal digit (error -0.4 against +0.6 for 1e1)
    @pytest.mark.parametrize("e,expected", [(0, 1), (4, 2), (10, 1)])
    def test_clinger_examples(self, e, expected):
        prog = clinger_register_program(10, 2, 10, 1)
        assert clinger_significand(prog, DigitString.of_int(e, 10)) == expected

    def test_accelerated_matches_naive(self):
        prog = clinger_register_program(10, 2, 10, 1)
        naive = run_register(prog, DigitString.parse("7"), RunLimits(max_steps=10**7))
        fast = run_register(prog, DigitString.parse("7"), HUGE)
        assert naive.registers == fast.registers and naive.steps == fast.steps

    def test_exponent_guard(self):
        prog = clinger_register_program(10, 2, 10, 1)
        with pytest.raises(ExponentBoundError):
            clinger_significand(prog, DigitString.parse("1000001"))
        with pytest.raises(ExponentBoundError):
            clinger_significand(prog, DigitString.parse("20"), bound=19)

    @pytest.mark.parametrize("b", [2, 10])
    @pytest.mark.parametrize("D,d,n", [(2, 10, 1), (2, 3, 1), (10, 2, 2)])
    @pytest.mark.parametrize("order", list(Significance))
    def test_clinger_prefixes(self, b, D, d, n, order):
        """The significand register tracks every prefix of the exponent."""
        prog = clinger_register_program(b, D, d, n, order)
        digits = DigitString.of_int(13, b).digits
        if order is Significance.LSD_FIRST:
            digits = digits[::-1]
        sord = Order.MSD_FIRST if order is Significance.MSD_FIRST else Order.LSD_FIRST
        for k in range(1, len(digits) + 1):
            prefix = DigitString(digits[:k], Radix(b), sord)
            res = run_register(prog, prefix.digits, HUGE, partial=True)
            assert res.status is Status.WAITING
            assert res.registers[SIGNIFICAND] == significand_of(prefix.value, D, d, n)


def _random_register_program(draw_ops):
    asm = RegisterAssembler(3)
    for op in draw_ops:
        kind = op[0]
        if kind == "inc":
            asm.inc(op[1], op[2])
        elif kind == "move":
            asm.move(op[1], (op[2], op[3]))
        elif kind == "clear":
            asm.clear(op[1])
        else:
            asm.copy(op[1], op[2], 3 - op[1] - op[2])
    return asm.halt().build()


_reg = st.integers(0, 2)
_op = st.one_of(
    st.tuples(st.just("inc"), _reg, st.integers(1, 3)),
    st.tuples(st.just("clear"), _reg),
    st.tuples(st.just("move"), _reg, _reg, st.integers(0, 2)).filter(lambda t: t[1] != t[2]),
    st.tuples(st.just("copy"), _reg, _reg).filter(lambda t: t[1] != t[2]),
)


class TestCompiler:
    def test_inc1(self):
        tcmi = compile_to_tcmi(load_register_program(PROGRAMS / "inc1.reg"))
        res = run(tcmi, (), partial=True)
        assert res.status is Status.HALTED and res.counters == (2, 0)

    def test_two_registers(self):
        tcmi = compile_to_tcmi(parse_register_program(".class REG\n.registers 2\ninc r1\ninc r2\nhalt"))
        res = run(tcmi, (), partial=True)
        assert res.counters == (6, 0)

    def test_custom_encoding(self):
        prog = parse_register_program(".class REG\n.registers 2\ninc r1\ninc r2\ninc r2\nhalt")
        enc = PrimeEncoding((5, 7))
        res = run(compile_to_tcmi(prog, enc), (), partial=True)
        assert decode_counters(res.counters, enc) == ((1, 2), 1)
        with pytest.raises(ValueError):
            compile_to_tcmi(prog, ENC3)

    def test_output_reparses(self):
        from clingerlab.vm import parse_program
        tcmi = compile_to_tcmi(clinger_register_program(2, 2, 3, 1))
        assert parse_program(tcmi.to_text()) == tcmi

    @settings(max_examples=40, deadline=None)
    @given(st.lists(_op, max_size=6))
    def test_compiler_correctness(self, ops):
        prog = _random_register_program(ops)
        ref = run_register(prog, limits=RunLimits(max_steps=10**6))
        res = run(compile_to_tcmi(prog), (), HUGE, partial=True)
        assert res.status is Status.HALTED
        assert decode_counters(res.counters, PrimeEncoding.first(3)) == (ref.registers, 1)
        assert res.counters[1] == 0

    def test_input_program_compiles(self):
        text = """.class REG
.registers 2
.alphabet 2
W: on 0 goto Z
on 1 goto O
on stop goto H
Z: inc r1
jmp W
O: inc r2
jmp W
H: halt
"""
        prog = parse_register_program(text)
        tcmi = compile_to_tcmi(prog)
        inp = (1, 0, 1, 1, STOP)
        ref = run_register(prog, inp)
        res = run(tcmi, inp, RunLimits(max_steps=10**6))
        assert ref.registers == (1, 3)
        assert decode_counters(res.counters, PrimeEncoding.first(2)) == (ref.registers, 1)
        assert is_online_run(res.trace)

    @pytest.mark.parametrize("e", range(0, 6))
    def test_compiled_clinger(self, e):
        prog = clinger_register_program(10, 2, 3, 1)
        tcmi = compile_to_tcmi(prog)
        res = run(tcmi, DigitString.of_int(e, 10), HUGE)
        regs, leftover = decode_counters(res.counters, PrimeEncoding.first(prog.registers))
        assert leftover == 1 and regs[SIGNIFICAND] == significand_of(e, 2, 3, 1)
        assert regs[0] == e


class TestReverseCounter:
    def test_examples(self):
        assert run(reverse_counter_tcmi(10), (1, 0, 2, STOP)).counters == (102, 0)
        assert run(reverse_counter_tcmi(2), (1, 1, STOP)).counters == (3, 0)
        for b in (2, 3, 10, 16):
            res = run(reverse_counter_tcmi(b), (STOP,))
            assert res.counters == (0, 0) and is_online_run(res.trace)

    @pytest.mark.parametrize("unroll", [1, 2, 3, 7])
    def test_unroll_preserves_behaviour(self, unroll):
        for n in (0, 1, 5, 17, 100, 999):
            res = run(reverse_counter_tcmi(3, unroll), DigitString.of_int(n, 3))
            assert res.counters == (n, 0)

    def test_leading_zeros_count_by_value(self):
        assert run(reverse_counter_tcmi(10), (0, 0, 4, 2, STOP)).counters == (42, 0)

    def test_golden_file(self):
        from clingerlab.vm import load_program
        assert load_program(PROGRAMS / "reverse10.tcmi") == reverse_counter_tcmi(10)
