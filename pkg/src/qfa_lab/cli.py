"""Command-line front end: ``qfa-lab {check,run,convert,scan}``.

Exit status is 0 on success, 1 on a semantic failure (failed check, scan
disagreement or undecided verdict) and 2 on usage or parse errors.
"""
import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import convert
from .classical import classify_all, run_gfa, run_rtpfa
from .errors import InputError, MachineFileError, QfaLabError, WellformednessError
from .linalg import GS_REJECT_TOL, RunOutcome, WELLFORMED_TOL, unitarity_defect
from .machinefile import build_machine, completed_unitaries, machine_type, parse_machine, save_machine
from .machines import encoding_audit, fixture_names, fixture_text, oracle, strings_upto
from .quantum_rt import run_rtkwqfa, run_rtqfa
from .twoway import format_trace, path_trace, run_twoway
from .wellformed import (CheckReport, Violation, check_local_unidirectional, check_stochastic,
                         check_superop, check_unitary, delta_from_unitaries)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_TOL = 1e-12
DEFAULT_MAX_STEPS = 100_000
CUTPOINT = 0.5
BUILTIN = "builtin:"


def resolve(path: str) -> str:
    """File path, or ``builtin:NAME`` for a shipped fixture (``builtin:lnh``)."""
    if path.startswith(BUILTIN):
        name = path[len(BUILTIN):]
        try:
            return fixture_text(name if name.endswith(".yaml") else name + ".yaml")
        except FileNotFoundError:
            raise InputError(f"no built-in machine {name!r}; available: {fixture_names()}") from None
    return path


def header(command: str, **extra) -> str:
    fields = {"wellformed_tol": WELLFORMED_TOL, "gs_reject_tol": GS_REJECT_TOL, **extra}
    return f"# qfa-lab {command} " + " ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                                              for k, v in fields.items())


# ------------------------------------------------------------------ check


def _check_specified_columns(spec) -> CheckReport:
    out = []
    for s, m in spec.matrices.items():
        cols = sorted(spec.specified[s])
        if not cols:
            continue
        sub = m[:, cols]
        gram = np.conj(sub).T @ sub - np.eye(len(cols))
        for a, b in np.argwhere(np.abs(gram) > WELLFORMED_TOL):
            if a <= b:
                out.append(Violation("unitary.specified_columns",
                                     (s, spec.states[cols[a]], spec.states[cols[b]]),
                                     float(abs(gram[a, b])), WELLFORMED_TOL))
    return CheckReport(tuple(out), ("specified_columns",))


def check_spec(spec) -> tuple:
    """Run every check that applies to the parsed machine; returns (report, notes)."""
    symbols = list(spec.matrices)
    notes = []
    if spec.mtype == "gfa":
        return CheckReport((), ("gfa: no wellformedness condition",)), notes
    if spec.mtype == "rt-pfa":
        return check_stochastic([spec.matrices[s] for s in symbols], labels=symbols), notes
    if spec.mtype == "rt-qfa":
        report = CheckReport()
        for s in symbols:
            report = report + check_superop(spec.matrices[s], WELLFORMED_TOL, label=s)
        return report, notes
    report = _check_specified_columns(spec)
    if not report.passed:
        return report, notes
    try:
        us = completed_unitaries(spec)
    except WellformednessError as exc:
        notes.append(str(exc))
        return report, notes
    report = report + check_unitary([us[s] for s in symbols], WELLFORMED_TOL, labels=symbols)
    report = report + check_local_unidirectional(delta_from_unitaries([us[s] for s in symbols]),
                                                 spec.directions or None, WELLFORMED_TOL,
                                                 symbols=symbols, states=spec.states)
    if report.passed and spec.mtype != "rt-kwqfa":
        audit = encoding_audit(build_machine(spec), max_len=4)
        for state, s in audit.unspecified:
            notes.append(f"note: reachable completed column: state {state} under {s}")
        for state in audit.unreferenced:
            notes.append(f"note: state {state} appears in no specified transition")
    return report, notes


def cmd_check(args) -> int:
    spec = parse_machine(resolve(args.path))
    report, notes = check_spec(spec)
    print(header("check", type=spec.mtype, states=len(spec.states)))
    print(report.to_json() if args.json else report.render())
    for line in notes:
        print(line)
    return EXIT_OK if report.passed else EXIT_FAIL


# -------------------------------------------------------------------- run


def evaluate(machine, w: str, tol: float = DEFAULT_TOL, max_steps: int = DEFAULT_MAX_STEPS):
    """``RunOutcome`` for measured-every-step models, a float otherwise."""
    mtype = machine_type(machine)
    if mtype == "rt-pfa":
        return run_rtpfa(machine, w)
    if mtype == "gfa":
        return run_gfa(machine, w)
    if mtype == "rt-qfa":
        return run_rtqfa(machine, w)
    if mtype == "rt-kwqfa":
        return run_rtkwqfa(machine, w)
    return run_twoway(machine, w, tol=tol, max_steps=max_steps)


def verdict(result, tol: float = WELLFORMED_TOL) -> str:
    if isinstance(result, RunOutcome):
        return result.decide(CUTPOINT, tol)
    return "member" if result > CUTPOINT + tol else "non-member"


def cmd_run(args) -> int:
    machine = build_machine(parse_machine(resolve(args.path)))
    result = evaluate(machine, args.input, args.tol, args.max_steps)
    print(header("run", tol=args.tol, max_steps=args.max_steps, cutpoint=CUTPOINT))
    print(f"input {args.input!r}")
    if isinstance(result, RunOutcome):
        shown = result.reported()
        print(f"p_acc {result.p_acc!r}")
        print(f"p_rej {result.p_rej!r}")
        print(f"residual {result.residual!r}")
        print(f"steps {result.steps}")
        print(f"converged {str(result.converged).lower()}")
        value = shown.p_acc
    else:
        value = result
        print(f"{'value' if machine_type(machine) == 'gfa' else 'p_acc'} {result!r}")
    for mode, flag in classify_all(value, CUTPOINT).items():
        print(f"{mode} {str(flag).lower()}")
    print(f"verdict {verdict(result)}")
    if args.trace:
        if machine_type(machine) not in ("kwqfa-1way", "kwqfa-2way"):
            raise InputError("--trace is only available for kwqfa-1way and kwqfa-2way machines")
        print(format_trace(path_trace(machine, args.input, args.trace_steps)))
    return EXIT_OK


# ---------------------------------------------------------------- convert

CONVERSIONS = {
    "rtqfa-to-gfa": (("rt-qfa",), convert.rtqfa_to_gfa),
    "rtpfa-to-kwqfa": (("rt-pfa",), convert.rtpfa_to_rtkwqfa),
    "rtpfa-to-rtqfa": (("rt-pfa",), convert.rtpfa_to_rtqfa),
    "union": (("rt-kwqfa", "rt-kwqfa"), convert.equiprobable_union),
}


def cmd_convert(args) -> int:
    wanted, fn = CONVERSIONS[args.kind]
    if len(args.inputs) != len(wanted):
        raise InputError(f"{args.kind} takes {len(wanted)} input file(s), got {len(args.inputs)}")
    machines = []
    for path, t in zip(args.inputs, wanted):
        m = build_machine(parse_machine(resolve(path)))
        if machine_type(m) != t:
            raise InputError(f"{path}: {args.kind} expects {t}, got {machine_type(m)}")
        machines.append(m)
    out = fn(*machines)
    save_machine(out, args.output)
    print(header("convert", kind=args.kind))
    print(f"input_states {' '.join(str(m.n) for m in machines)}")
    print(f"output_states {out.n}")
    print(f"output_type {machine_type(out)}")
    if args.kind == "rtpfa-to-kwqfa":
        print(f"l {2 * machines[0].n + 7}")
    if hasattr(out, "unitaries"):
        print(f"max_unitarity_defect {max(unitarity_defect(u) for u in out.unitaries.values()):.3g}")
    print(f"written {args.output}")
    return EXIT_OK


# ------------------------------------------------------------------- scan

_WORKER = {}


def _init_worker(path, tol, max_steps):
    _WORKER["machine"] = build_machine(parse_machine(path))
    _WORKER["tol"] = tol
    _WORKER["max_steps"] = max_steps


def _scan_one(w):
    return w, evaluate(_WORKER["machine"], w, _WORKER["tol"], _WORKER["max_steps"])


def thread_count() -> int:
    raw = os.environ.get("QFA_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"QFA_LAB_THREADS must be an integer, got {raw!r}") from None


def scan(path, name: str, max_len: int, tol: float = DEFAULT_TOL,
         max_steps: int = DEFAULT_MAX_STEPS, workers: int = 1):
    """Yield ``(word, result, verdict, oracle verdict)`` in shortlex order."""
    lang = oracle(name)
    path = resolve(path)
    machine = build_machine(parse_machine(path))
    words = list(strings_upto(machine.alphabet, max_len))
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker,
                                 initargs=(path, tol, max_steps)) as pool:
            # map preserves input order
            results = pool.map(_scan_one, words, chunksize=64)
            for w, r in results:
                yield w, r, verdict(r), lang(w)
        return
    for w in words:
        r = evaluate(machine, w, tol, max_steps)
        yield w, r, verdict(r), lang(w)


def cmd_scan(args) -> int:
    print(header("scan", tol=args.tol, max_steps=args.max_steps, cutpoint=CUTPOINT,
                 oracle=args.oracle, max_len=args.max_len))
    print("# input p_acc residual verdict oracle agree")
    disagree = undecided = total = 0
    for w, r, v, truth in scan(args.path, args.oracle, args.max_len, args.tol, args.max_steps,
                               thread_count()):
        p = r.p_acc if isinstance(r, RunOutcome) else r
        res = r.residual if isinstance(r, RunOutcome) else 0.0
        expected = "member" if truth else "non-member"
        agree = v == expected
        total += 1
        undecided += v == "undecided"
        disagree += not agree and v != "undecided"
        print(f"{w or '-'} {p!r} {res:.3g} {v} {expected} {'yes' if agree else 'no'}")
    print(f"# strings {total} disagreements {disagree} undecided {undecided}")
    return EXIT_OK if disagree == 0 and undecided == 0 else EXIT_FAIL


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qfa-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run the wellformedness checks that apply to a machine file")
    c.add_argument("path")
    c.add_argument("--json", action="store_true", help="machine-readable report")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("run", help="run a machine on one input (use '' for the empty string)")
    r.add_argument("path")
    r.add_argument("input")
    r.add_argument("--tol", type=float, default=DEFAULT_TOL)
    r.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    r.add_argument("--trace", action="store_true", help="dump the nonhalting superposition per step")
    r.add_argument("--trace-steps", type=int, default=50)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("convert", help="apply a machine reduction")
    v.add_argument("kind", choices=sorted(CONVERSIONS))
    v.add_argument("inputs", nargs="+")
    v.add_argument("-o", "--output", required=True)
    v.set_defaults(func=cmd_convert)

    s = sub.add_parser("scan", help="compare a machine with a membership oracle on all short strings")
    s.add_argument("path")
    s.add_argument("--oracle", required=True)
    s.add_argument("--max-len", type=int, required=True)
    s.add_argument("--tol", type=float, default=DEFAULT_TOL)
    s.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    s.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (MachineFileError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WellformednessError as exc:
        print(f"wellformedness error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except QfaLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
