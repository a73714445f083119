"""Command-line front end.

Exit status: 0 when a feasible schedule was produced (or the command
succeeded), 2 when the problem was infeasible or the solver failed, 1 on
usage errors. All messages go to standard error; ``export`` without
``--out`` writes the file body to standard output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .annealing import DEFAULTS as SA_DEFAULTS
from .annealing import simulated_annealing
from .constraints import build_constraints
from .diagram import schedule_diagram, timetable_diagram
from .heuristics import HEURISTICS, heuristic_report
from .io import DocumentError, ising_to_text, load_instance, qubo_to_text
from .model import InstanceError, fmt_time
from .ordering import exact_order_solver
from .qubo import Schedule, build_qubo, equivalence_signature
from .report import Infeasible, SolverReport, report_from_bits
from .spectrum import SearchSpaceTooLarge, enumerate_spectrum, search_space_size

METHODS = ("enumerate", "sa", "order", *HEURISTICS)
EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
GROUND_CHECK_LIMIT = 10**6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _say(msg):
    print(msg, file=sys.stderr)


def _instance(args):
    inst = load_instance(args.instance)
    if getattr(args, "d_max", None) is not None:
        inst = inst.with_d_max(args.d_max)
    return inst


def _qubo(inst, args):
    return build_qubo(inst, args.p_sum, args.p_pair)


def _add_instance_args(p, penalties=True):
    p.add_argument("--instance", required=True, help="instance file or fixture name")
    p.add_argument("--d-max", type=int, help="override the delay bound of every train")
    if penalties:
        p.add_argument("--p-sum", type=float, help="one-hot penalty weight")
        p.add_argument("--p-pair", type=float, help="forbidden-pair penalty weight")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="railqubo", description="Single-track dispatching as a QUBO.")
    parser.add_argument("--version", action="version", version=f"railqubo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve an instance and write a report")
    _add_instance_args(p)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--seed", type=int, default=SA_DEFAULTS["seed"])
    p.add_argument("--sweeps", type=int, default=SA_DEFAULTS["sweeps"])
    p.add_argument("--restarts", type=int, default=SA_DEFAULTS["restarts"])
    p.add_argument("--levels", type=int, default=10, help="spectrum levels to keep (enumerate)")
    p.add_argument("--out", type=Path, help="directory for report, schedule and diagram files")

    p = sub.add_parser("export", help="write the QUBO or its Ising form as a coordinate file")
    _add_instance_args(p)
    p.add_argument("--format", required=True, choices=("qubo", "ising"))
    p.add_argument("--out", type=Path, help="output file (default: standard output)")

    p = sub.add_parser("diagram", help="draw a train diagram as SVG and CSV")
    _add_instance_args(p, penalties=False)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--report", type=Path, help="report.json written by 'solve'")
    src.add_argument("--disturbed", action="store_true", help="apply initial delays without resolving conflicts")
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("info", help="summarise an instance and its QUBO size")
    _add_instance_args(p, penalties=False)
    p.add_argument("--pairs", action="store_true", help="list every forbidden pair")
    return parser


# ----------------------------------------------------------------------
# solve


def _attach_energy(rep: SolverReport, qubo):
    sch = rep.schedule
    if sch is None or rep.best_configs or not sch.within_bounds():
        return
    x = qubo.encode(sch)
    rep.best_configs = [(x, qubo.decompose(x))]
    rep.offset_L = qubo.offset_L


def _solve_enumerate(inst, args):
    qubo = _qubo(inst, args)
    sp = enumerate_spectrum(qubo, limit=args.levels)
    ground = sp.ground
    rep = report_from_bits("enumerate", qubo, ground.configs, {"levels": args.levels})
    sigs = {equivalence_signature(qubo.decode(x)) for x, ok in zip(ground.configs, ground.config_feasible) if ok}
    rep.ground_equivalent = len(sigs) == 1 if sigs else None
    rep.notes["degeneracy"] = ground.degeneracy
    rep.notes["spectrum"] = [
        {"energy": lv.energy, "degeneracy": lv.degeneracy, "feasible": lv.n_feasible} for lv in sp.levels
    ]
    return rep, sp


def _solve_sa(inst, args):
    qubo = _qubo(inst, args)
    rep = simulated_annealing(qubo, seed=args.seed, sweeps=args.sweeps, restarts=args.restarts)
    if rep.schedule is not None and search_space_size(qubo, "one_hot") <= GROUND_CHECK_LIMIT:
        ground = enumerate_spectrum(qubo, limit=1, keep=10**6).ground
        ground_sigs = {equivalence_signature(qubo.decode(x)) for x, ok in zip(ground.configs, ground.config_feasible) if ok}
        rep.ground_equivalent = rep.order_signature in ground_sigs
    return rep


def _write_spectrum(sp, path):
    lines = ["# format railqubo-spectrum version 1", "energy,degeneracy,n_feasible"]
    lines += [f"{e!r},{g},{f}" for e, g, f in sp.as_rows()]
    path.write_text("\n".join(lines) + "\n")


def _write_schedule(sch: Schedule, path):
    lines = ["# format railqubo-schedule version 1", "train,station,delay,secondary,departure"]
    for (j, s), d in sch.delays.items():
        lines.append(f"{j},{s},{d},{sch.secondary_delay(j, s)},{fmt_time(sch.departure(j, s))}")
    path.write_text("\n".join(lines) + "\n")


def _write_diagram(data, out: Path):
    (out / "diagram.csv").write_text(data.to_csv())
    (out / "conflicts.csv").write_text(data.conflicts_csv())
    (out / "diagram.svg").write_text(data.to_svg())


def _summary(rep: SolverReport) -> str:
    parts = [f"method {rep.method}: {'feasible' if rep.feasible else 'NOT feasible'}"]
    if rep.energy is not None:
        parts.append(f"energy {rep.energy.total:.6g}")
    if "degeneracy" in rep.notes:
        parts.append(f"degeneracy {rep.notes['degeneracy']}")
    if rep.schedule is not None:
        sch = rep.schedule
        parts.append(f"objective {sch.objective():.6g}")
        parts.append(f"max secondary delay {sch.max_secondary_delay()}")
        parts.append(f"final delay sum {sch.final_secondary_sum()}")
    if rep.capacity_violations:
        parts.append(f"{len(rep.capacity_violations)} capacity violations")
    return ", ".join(parts)


def cmd_solve(args) -> int:
    inst = _instance(args)
    sp = None
    try:
        if args.method == "enumerate":
            rep, sp = _solve_enumerate(inst, args)
        elif args.method == "sa":
            rep = _solve_sa(inst, args)
        elif args.method == "order":
            rep = exact_order_solver(inst)
        else:
            rep = heuristic_report(inst, args.method)
    except Infeasible as exc:
        _say(f"infeasible: {exc}")
        return EXIT_FAIL
    except SearchSpaceTooLarge as exc:
        _say(f"enumeration refused: {exc}")
        return EXIT_FAIL
    if args.method in HEURISTICS or args.method == "order":
        _attach_energy(rep, _qubo(inst, args))
    _say(_summary(rep))
    for s, t, js in rep.capacity_violations:
        _say(f"  capacity exceeded at station {s}, {fmt_time(t)}: {' '.join(js)}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        doc = rep.to_dict()
        doc["instance"] = inst.name
        (args.out / "report.json").write_text(json.dumps(doc, indent=1, default=str) + "\n")
        if sp is not None:
            _write_spectrum(sp, args.out / "spectrum.csv")
        if rep.schedule is not None:
            _write_schedule(rep.schedule, args.out / "schedule.csv")
            _write_diagram(schedule_diagram(rep.schedule, f"{inst.name}: {rep.method}"), args.out)
        _say(f"wrote {args.out}")
    return EXIT_OK if rep.feasible else EXIT_FAIL


# ----------------------------------------------------------------------
# export / diagram / info


def cmd_export(args) -> int:
    inst = _instance(args)
    qubo = _qubo(inst, args)
    text = qubo_to_text(qubo) if args.format == "qubo" else ising_to_text(qubo.to_ising())
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
        _say(f"wrote {args.out} ({qubo.n} variables)")
    return EXIT_OK


def schedule_from_report(inst, doc) -> Schedule:
    """Rebuild a schedule from the ``schedule`` table of a report document."""
    if doc.get("format") != "railqubo-report":
        raise ValueError("not a railqubo report")
    try:
        delays = {(row["train"], int(row["station"])): int(row["delay"]) for row in doc["schedule"]}
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed schedule table: {exc}") from None
    expected = {(j, s) for j in inst.trains for s in inst.decision_stations(j)}
    if set(delays) != expected:
        extra, missing = sorted(set(delays) - expected), sorted(expected - set(delays))
        raise ValueError(f"schedule does not match the instance (unknown {extra}, missing {missing})")
    return Schedule(inst, delays)


def cmd_diagram(args) -> int:
    inst = _instance(args)
    if args.report is not None:
        try:
            sch = schedule_from_report(inst, json.loads(args.report.read_text()))
        except ValueError as exc:
            _say(f"{args.report}: {exc}")
            return EXIT_FAIL
        data = schedule_diagram(sch, f"{inst.name}: {args.report.parent.name or 'schedule'}")
    else:
        data = timetable_diagram(inst, disturbed=args.disturbed)
    args.out.mkdir(parents=True, exist_ok=True)
    _write_diagram(data, args.out)
    for c in data.conflicts:
        _say(f"conflict at block {c.block} {fmt_time(c.start)}-{fmt_time(c.end)}: {' '.join(c.trains)}")
    _say(f"wrote {args.out}")
    return EXIT_OK


def cmd_info(args) -> int:
    inst = _instance(args)
    cs = build_constraints(inst)
    _say(f"{inst.name}: {len(inst.trains)} trains, {len(inst.blocks)} blocks")
    for j in inst.trains:
        dus = ", ".join(f"{s}:{inst.d_u(j, s)}" for s in inst.decision_stations(j))
        _say(f"  {j}: d_max {inst.d_max[j]}, unavoidable delays {dus}")
    groups = cs.one_hot_groups
    intra = sum(len(g) * (len(g) - 1) // 2 for g in groups)
    _say(f"  {len(cs.index)} variables in {len(groups)} one-hot groups ({intra} intra-group couplings)")
    for kind, pairs in sorted(cs.pairs_by_condition().items()):
        _say(f"  {kind}: {len(pairs)} forbidden pairs")
    if args.pairs:
        _say(cs.describe())
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "export": cmd_export, "diagram": cmd_diagram, "info": cmd_info}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        _say(str(exc))
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (DocumentError, InstanceError, FileNotFoundError, ValueError) as exc:
        _say(f"error: {exc}")
        return EXIT_FAIL
    except OSError as exc:
        _say(f"I/O error: {exc}")
        return EXIT_FAIL
