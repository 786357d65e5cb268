"""Command-line front end: ``clingerlab {convert,member,machine,compile,lab}``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import analysis, numlab, radix, registers, vm

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_CERT = 0, 2, 3, 4

NAIVE_BUDGET = 10**7
# accelerated steps are counted as skipped cycles times their length, which
# for compiled machines is astronomically large
ACCELERATED_BUDGET = 10**1000


class UsageError(Exception):
    pass


def program_path(name: str) -> Path:
    """A path as given, or else a program shipped with the package."""
    path = Path(name)
    if path.exists():
        return path
    shipped = resources.files("clingerlab") / "programs" / name
    if shipped.is_file():
        return Path(str(shipped))
    raise UsageError(f"no such program file: {name}")


def _emit(args, obj: dict, text: str):
    if args.json:
        print(json.dumps(obj, sort_keys=True, indent=2))
    else:
        print(text)


# -- convert / member ---------------------------------------------------------------


def cmd_convert(args) -> int:
    res = radix.best_approx(radix.ConversionInput(args.f, args.e, radix.Radix(args.D)),
                            radix.Radix(args.d), args.n)
    text = f"m={res.m} q={res.q}" + (" tie=even" if res.tie is radix.Tie.HALF_RESOLVED_TO_EVEN else "")
    _emit(args, res.to_dict(), text)
    return EXIT_OK


def cmd_member(args) -> int:
    spec = radix.LanguageSpec(radix.LanguageKind(args.kind), args.b, args.D, args.d, args.n, args.target)
    z = radix.DigitString.parse(args.z, args.b, radix.Order(args.order))
    verdict = radix.language_member(z, spec)
    _emit(args, {"member": verdict, "z": str(z), "kind": args.kind, "target": args.target},
          "true" if verdict else "false")
    return EXIT_OK


# -- machines -----------------------------------------------------------------------


def _input_for(program: vm.MachineProgram, text: str | None):
    if not program.cls.with_input:
        if text:
            raise UsageError(f"{program.cls.value} programs take no input")
        return None
    return vm.symbols_from_text(text or "", program.alphabet)


def _online(program, syms, limits) -> bool | None:
    """Online check that also works for accelerated runs: run up to the
    stop marker, then step through its processing naively."""
    before = vm.run(program, syms[:-1], limits, partial=True, trace="none")
    if before.status is not vm.Status.WAITING:
        return None
    tail = vm.run(program, (vm.STOP,), vm.RunLimits(max_steps=limits.max_steps),
                  start=vm.Configuration(before.final.pc, before.final.counters), trace="after_stop")
    return vm.is_online_run(tail.trace) if tail.stop_step else None


def _counter_text(cfg: vm.Configuration) -> str:
    if len(cfg.counters) == 1:
        return f"r={cfg.r}"
    return f"c1={cfg.c1} c2={cfg.c2}"


def cmd_machine_run(args) -> int:
    program = vm.load_program(program_path(args.program))
    syms = _input_for(program, args.input)
    start = vm.parse_counters(args.start) if args.start else None
    budget = args.max_steps or (ACCELERATED_BUDGET if args.accelerate else NAIVE_BUDGET)
    limits = vm.RunLimits(max_steps=budget, accelerate=args.accelerate)
    res = vm.run(program, syms, limits, start=start, trace="none" if args.accelerate else "full")
    if args.trace and res.trace is not None:
        sys.stdout.write(res.trace.to_jsonl())
    text = _counter_text(res.final)
    obj = {"status": res.status.value, "steps": res.steps, "state": res.final.pc,
           "counters": list(res.final.counters)}
    if program.cls.with_input:
        online = vm.is_online_run(res.trace) if res.trace is not None and res.stop_step else \
            _online(program, syms, limits)
        obj["online"] = online
        if online is not None:
            text += f" online={'true' if online else 'false'}"
    if args.decode:
        if args.decode < 1:
            raise UsageError("--decode needs a positive register count")
        enc = registers.PrimeEncoding.first(args.decode)
        regs, left = registers.decode_counters(res.final.counters, enc)
        obj["registers"], obj["leftover"] = list(regs), left
        text += "\nregisters=" + ",".join(map(str, regs)) + f" leftover={left}"
    if res.status not in (vm.Status.HALTED, vm.Status.WAITING):
        print(f"warning: run ended with status {res.status.value}" +
              (f" ({res.fault})" if res.fault else ""), file=sys.stderr)
    _emit(args, obj, text)
    return EXIT_OK


def cmd_machine_analyze(args) -> int:
    program = vm.load_program(program_path(args.program))
    syms = _input_for(program, args.input)
    start = vm.Configuration(0, vm.parse_counters(args.start)) if args.start else None
    res = vm.run(program, syms, vm.RunLimits(max_steps=args.max_steps or NAIVE_BUDGET), start=start)
    report = analysis.AnalysisReport(stages=analysis.segment_stages(res))
    lines = [f"stages={len(report.stages)} status={res.status.value}"]
    if start is not None and program.cls is vm.MachineClass.TCM:
        try:
            report.loop = analysis.extract_loop(program, start)
        except (ValueError, analysis.InconclusiveAnalysis) as exc:
            lines.append(f"loop: not extracted ({exc})")
    if isinstance(report.loop, analysis.LoopSummary):
        lp = report.loop
        lines.append(f"loop: omega0={lp.omega0} omega={lp.omega} omega1={lp.omega1:+d} "
                     f"omega2={lp.omega2:+d} case={lp.case.value}")
    elif isinstance(report.loop, analysis.StraightLine):
        lines.append("straight line: r=(" + ",".join(f"{x:+d}" for x in report.loop.r) + ")")
    _emit(args, report.to_dict(), "\n".join(lines))
    return EXIT_OK


def cmd_compile(args) -> int:
    path = program_path(args.program)
    prog = registers.load_register_program(path)
    enc = registers.PrimeEncoding(tuple(int(p) for p in args.primes.split(","))) if args.primes \
        else None
    sys.stdout.write(registers.compile_to_tcmi(prog, enc).to_text())
    return EXIT_OK


# -- lab ------------------------------------------------------------------------------


def _report(args, report: numlab.WitnessReport, lines: list[str], uncertified: str | None = None) -> int:
    if args.json:
        print(report.to_json())
    else:
        print(f"# {report.kind} seed={report.seed} status={report.status}")
        for line in lines:
            print(line)
    if uncertified and report.unknown:
        print(f"certification failure: {uncertified} " + " ".join(map(str, report.unknown)), file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


def cmd_lab_kronecker(args) -> int:
    rep = numlab.kronecker_density(numlab.parse_theta(args.theta), args.N, args.bins)
    ex = rep.extra
    return _report(args, rep, [f"occupied={ex['occupied']}/{args.bins} min_gap={ex['min_gap']:.6g} "
                               f"max_gap={ex['max_gap']:.6g}"])


def cmd_lab_window(args) -> int:
    rep = numlab.ecli_witnesses(numlab.parse_theta(args.theta), args.C, args.mmax)
    lines = ["witnesses: " + " ".join(str(w["m"]) for w in rep.witnesses)]
    if rep.unknown:
        lines.append("unknown: " + " ".join(map(str, rep.unknown)))
    return _report(args, rep, lines, uncertified="window distance at m =")


def cmd_lab_qrational(args) -> int:
    rep = numlab.qrational_search(numlab.parse_theta(args.theta), args.C, args.mmax, args.kmax,
                                  Fraction(args.tol), args.members)
    if rep.ok:
        lim = numlab.Enclosure.from_dict(rep.extra["limit"])
        lines = [f"K={rep.extra['K']} bracket=[{rep.extra['bracket'][0]},{rep.extra['bracket'][1]}] "
                 f"members={len(rep.witnesses)} limit={lim}",
                 "m: " + " ".join(str(w["m"]) for w in rep.witnesses)]
    else:
        lines = [rep.extra.get("reason", "search failed")]
    return _report(args, rep, lines, uncertified="window distance at m =")


def cmd_lab_mixing(args) -> int:
    rep = numlab.mixing_bound(numlab.parse_theta(args.theta), Fraction(args.epsilon), Fraction(args.a),
                              Fraction(args.b), args.trials, args.kmax, args.seed)
    lines = [f"n_estimate={rep.extra['n_estimate']} pairs={len(rep.witnesses)} "
             f"preserved={sum(p['preserved'] for p in rep.witnesses)} over_ceiling={len(rep.unknown)}"]
    return _report(args, rep, lines)


def cmd_lab_pumping(args) -> int:
    rep = numlab.pdacs_witness_search(args.b, args.D, args.d, args.n, args.pmax, args.dmax)
    lines = ["p\tstring\tm\tmethod"]
    lines += [f"{w['p']}\t{w['string']}\t{w['m']}\t{w['method']}" for w in rep.witnesses]
    for delta, ps in rep.extra["divergence"].items():
        lines.append(f"delta={delta}: " + (" ".join(f"(p={p})" for p in ps) if ps else "none"))
    if rep.unknown:
        lines.append("unknown p: " + " ".join(map(str, rep.unknown)))
    return _report(args, rep, lines, uncertified="significand of 1 0{p} for p =")


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clingerlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = common(sub.add_parser("convert", help="best n-digit approximation of f*D^e"))
    for flag, kind in (("--f", int), ("--e", int), ("--D", int), ("--d", int), ("--n", int)):
        p.add_argument(flag, type=kind, required=True)
    p.set_defaults(func=cmd_convert)

    p = common(sub.add_parser("member", help="language membership of a digit string"))
    p.add_argument("--z", required=True)
    p.add_argument("--kind", choices=["P", "L", "M"], required=True)
    for flag in ("--b", "--D", "--d", "--n", "--target"):
        p.add_argument(flag, type=int, required=True)
    p.add_argument("--order", choices=["msd", "lsd"], default="msd")
    p.set_defaults(func=cmd_member)

    machine = sub.add_parser("machine", help="run or analyze a machine program")
    msub = machine.add_subparsers(dest="action", required=True)
    for action, func in (("run", cmd_machine_run), ("analyze", cmd_machine_analyze)):
        p = common(msub.add_parser(action))
        p.add_argument("program")
        p.add_argument("--input", help="input digits (MSD first), stop marker appended")
        p.add_argument("--start", help="initial counters, e.g. 50,50")
        p.add_argument("--max-steps", type=int, default=None,
                       help=f"step budget (default {NAIVE_BUDGET}; effectively unbounded with --accelerate)")
        if action == "run":
            p.add_argument("--accelerate", action="store_true")
            p.add_argument("--trace", action="store_true", help="emit one JSON object per step")
            p.add_argument("--decode", type=int, default=0, metavar="K",
                           help="decode counter 1 as a prime code over K registers")
        p.set_defaults(func=func)

    p = sub.add_parser("compile", help="compile a register program to TCMI assembly")
    p.add_argument("program")
    p.add_argument("--primes", help="comma-separated encoding primes")
    p.set_defaults(func=cmd_compile)

    lab = sub.add_parser("lab", help="number-theoretic witness searches")
    lsub = lab.add_subparsers(dest="experiment", required=True)
    theta_help = "angle: 'log D0 D1' (log base D0 of D1), 'sqrt2', 'rational 3/2'"

    p = common(lsub.add_parser("kronecker"))
    p.add_argument("--theta", nargs="+", required=True, help=theta_help)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--bins", type=int, default=100)
    p.set_defaults(func=cmd_lab_kronecker)

    p = common(lsub.add_parser("window"))
    p.add_argument("--theta", nargs="+", required=True, help=theta_help)
    p.add_argument("--C", type=int, required=True)
    p.add_argument("--mmax", type=int, default=50)
    p.set_defaults(func=cmd_lab_window)

    p = common(lsub.add_parser("qrational"))
    p.add_argument("--theta", nargs="+", required=True, help=theta_help)
    p.add_argument("--C", type=int, required=True)
    p.add_argument("--mmax", type=int, default=50)
    p.add_argument("--kmax", type=int, default=100)
    p.add_argument("--tol", default="1/1000")
    p.add_argument("--members", type=int, default=5)
    p.set_defaults(func=cmd_lab_qrational)

    p = common(lsub.add_parser("mixing"))
    p.add_argument("--theta", nargs="+", required=True, help=theta_help)
    p.add_argument("--epsilon", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--kmax", type=int, default=numlab.DEFAULT_K_CEILING)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lab_mixing)

    p = common(lsub.add_parser("pumping"))
    for flag in ("--b", "--D", "--d", "--n", "--pmax", "--dmax"):
        p.add_argument(flag, type=int, required=True)
    p.set_defaults(func=cmd_lab_pumping)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except vm.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except numlab.CertificationError as exc:
        print(f"certification failure: {exc} (query {exc.query})", file=sys.stderr)
        return EXIT_CERT
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
