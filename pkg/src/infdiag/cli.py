"""Command-line interface.

Exit codes: 0 success, 1 validation or model error, 2 I/O or parse error,
3 joint-size cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import io
from .analysis import evpi, fix_below_threshold, tornado
from .diagram import validate
from .engine import expected_utility, joint_size, simulate, solve
from .errors import ModelError, ResourceError, ValidationError
from .mrma import build_mrma_diagram, reference_config

EXIT_OK, EXIT_MODEL, EXIT_IO, EXIT_RESOURCE = 0, 1, 2, 3


def _parse_decisions(diagram, text):
    out = {}
    for part in filter(None, (text or "").split(",")):
        if "=" not in part:
            raise ModelError("BAD_ARGUMENT", f"expected NAME=ALTERNATIVE, got {part!r}")
        name, label = (s.strip() for s in part.split("=", 1))
        if name not in diagram or diagram[name].kind != "decision":
            raise ModelError("BAD_ARGUMENT", f"{name!r} is not a decision")
        try:
            out[name] = diagram.state_index(name, label)
        except ModelError:
            if not label.isdigit():
                raise
            out[name] = int(label)
    return out


def cmd_validate(args):
    diagram = io.load_model(args.model, augment=args.augment, check=False)
    report = validate(diagram)
    print(report)
    return EXIT_OK if report.ok else EXIT_MODEL


def cmd_solve(args):
    diagram = io.load_model(args.model, augment=args.augment)
    policy = solve(diagram)
    print(io.render_policy(diagram, policy, reachable_only=not args.all_states))
    if args.output:
        io.save_policy(diagram, policy, args.output)
    return EXIT_OK


def cmd_tornado(args):
    diagram = io.load_model(args.model, augment=args.augment)
    report = tornado(diagram, _parse_decisions(diagram, args.decisions))
    if args.render == "ascii":
        print(io.render_tornado_ascii(report, width=args.width))
    else:
        print(io.render_tornado_data(report))
    return EXIT_OK


def cmd_fix(args):
    diagram = io.load_model(args.model, augment=args.augment)
    reduced = fix_below_threshold(diagram, args.threshold, _parse_decisions(diagram, args.decisions))
    io.save_model(reduced.diagram, args.output)
    full, small = solve(diagram).meu, solve(reduced.diagram).meu
    print("fixed: " + (", ".join(reduced.fixed) if reduced.fixed else "(none)"))
    print(f"joint entries: {joint_size(diagram)} -> {joint_size(reduced.diagram)}")
    print(f"MEU full {full:.10g}, reduced {small:.10g}, delta {small - full:.10g}")
    return EXIT_OK


def cmd_evpi(args):
    diagram = io.load_model(args.model, augment=args.augment)
    print(f"{evpi(diagram, args.var, args.decision):.10g}")
    return EXIT_OK


def cmd_simulate(args):
    diagram = io.load_model(args.model, augment=args.augment)
    policy = io.load_policy(diagram, args.policy) if args.policy else solve(diagram)
    rep = simulate(diagram, policy, args.runs, args.seed)
    print(f"runs {rep.runs}  seed {rep.seed}")
    print(f"mean {rep.mean_utility:.10g}  std_error {rep.std_error:.6g}")
    return EXIT_OK


def _mrma_config(args):
    return io.load_config(args.config) if getattr(args, "config", None) else reference_config()


def cmd_mrma_emit(args):
    io.save_model(build_mrma_diagram(_mrma_config(args)), args.output)
    return EXIT_OK


def cmd_mrma_config(args):
    if args.output:
        io.save_config(reference_config(), args.output)
    else:
        sys.stdout.write(io.dumps_canonical({"format_version": io.FORMAT_VERSION, **reference_config().to_dict()}))
    return EXIT_OK


def mrma_demo_report(config=None, runs: int = 200_000, seed: int = 20240611) -> tuple[str, bool]:
    """Run the whole scenario pipeline; returns the report and whether consulting is mixed."""
    started = time.perf_counter()
    config = reference_config() if config is None else config
    diagram = build_mrma_diagram(config)
    report = validate(diagram)
    out = ["== Path-deviation scenario ==", f"validation: {report}"]
    policy = solve(diagram)
    out.append(f"joint entries: {joint_size(diagram)}")
    out.append(io.render_policy(diagram, policy))

    consult = policy.rules["Consult"]
    reach = sorted(policy.reachable["Consult"])
    picks = {consult[s] for s in reach}
    mixed = len(picks) > 1
    out.append("\nConsult value by associate reading (consult minus act alone):")
    for s in reach:
        v = policy.values["Consult"][s]
        label = ", ".join(diagram[x].states[i].label for x, i in zip(policy.info["Consult"], s))
        out.append(f"  {label:<12} {v[1] - v[0]:+.6g} s")
    out.append("behaviour: " + ("mixed (autonomous and consulting)" if mixed else "constant"))

    no_dev = {"Consult": 0, "Deviation": 0}
    tor = tornado(diagram, no_dev)
    out.append("\nTornado at Consult=no, Deviation=0m:")
    out.append(io.render_tornado_ascii(tor))
    gain = evpi(diagram, "FieldWidth", "Deviation")
    out.append(f"\nEVPI(FieldWidth -> Deviation): {gain:.6g} s")

    reduced = fix_below_threshold(diagram, 0.95, no_dev)
    small = solve(reduced.diagram).meu
    out.append(
        f"fix at 95%: fixed {', '.join(reduced.fixed)}; joint {joint_size(diagram)} -> "
        f"{joint_size(reduced.diagram)}; MEU delta {small - policy.meu:+.6g}"
    )
    sim = simulate(diagram, policy, runs, seed)
    eu = expected_utility(diagram, policy)
    out.append(
        f"simulate: mean {sim.mean_utility:.6f} +- {sim.std_error:.4f} over {runs} runs "
        f"(seed {seed}); exact {eu:.6f}"
    )
    out.append(f"elapsed {time.perf_counter() - started:.2f} s")
    return "\n".join(out), mixed


def cmd_mrma_demo(args):
    text, _ = mrma_demo_report(_mrma_config(args), args.runs, args.seed)
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infdiag", description="Exact influence-diagram decision engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_cmd(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("model")
        p.add_argument("--augment", action="store_true", help="add information arcs required by no-forgetting")
        p.set_defaults(func=func)
        return p

    model_cmd("validate", cmd_validate, "check a model and print the report")
    p = model_cmd("solve", cmd_solve, "maximum expected utility policy")
    p.add_argument("-o", "--output", help="write the policy document here")
    p.add_argument("--all-states", action="store_true", help="also list unreachable information states")
    p = model_cmd("tornado", cmd_tornado, "deterministic sensitivity for one decision combination")
    p.add_argument("--decisions", required=True, help="e.g. Consult=no,Deviation=0m")
    p.add_argument("--render", choices=("ascii", "data"), default="data")
    p.add_argument("--width", type=int, default=40)
    p = model_cmd("fix", cmd_fix, "fix low-variance chance nodes at their base case")
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--decisions", required=True)
    p.add_argument("-o", "--output", required=True)
    p = model_cmd("evpi", cmd_evpi, "expected value of perfect information")
    p.add_argument("--var", required=True)
    p.add_argument("--decision", required=True)
    p = model_cmd("simulate", cmd_simulate, "Monte Carlo check of a policy")
    p.add_argument("--policy", help="policy document (default: the optimal policy)")
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)

    mrma = sub.add_parser("mrma", help="rover path-deviation scenario")
    msub = mrma.add_subparsers(dest="mrma_command", required=True)
    p = msub.add_parser("emit", help="write the compiled scenario model")
    p.add_argument("--config")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mrma_emit)
    p = msub.add_parser("demo", help="emit, solve, analyse and simulate the scenario")
    p.add_argument("--config")
    p.add_argument("--runs", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=20240611)
    p.set_defaults(func=cmd_mrma_demo)
    p = msub.add_parser("config", help="print or write the reference scenario config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_mrma_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(exc.report, file=sys.stderr)
        return EXIT_MODEL
    except io.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
