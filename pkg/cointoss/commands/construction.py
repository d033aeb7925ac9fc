"""construct and kinks."""
import argparse
from pathlib import Path

from cointoss import emit
from cointoss.commands import CommandResult, floats, grid
from cointoss.errors import ConfigError
from cointoss.spectrum import TauCurve
from cointoss.transitions import (ConstructionState, SupTau, build_dense_transitions,
                                  detect_kinks)


def register(subparsers, common) -> None:
    construct = subparsers.add_parser("construct", parents=[common],
                                      help="build a maximum of L^q spectra with kinks at targets")
    construct.add_argument("--targets", type=floats, help="nested targets q1,q2,q3,...")
    construct.add_argument("--stages", type=int, help="number of curves M")
    construct.add_argument("--palette", type=floats)
    construct.add_argument("--horizon", type=float)
    construct.add_argument("--resume", type=Path, help="saved ConstructionState JSON")
    construct.add_argument("--nesting", choices=["chain", "dense"],
                           help="target layout: nested chain (default) or separated pairs")
    construct.set_defaults(handler=run_construct)

    kinks = subparsers.add_parser("kinks", parents=[common],
                                  help="kinks of a constructed maximum or of single-p curves")
    source = kinks.add_mutually_exclusive_group()
    source.add_argument("--state", type=Path, help="ConstructionState JSON from construct")
    source.add_argument("--p", type=floats, help="parameters p of single-level curves")
    kinks.add_argument("--q-grid", dest="kink_grid", type=grid, metavar="START:STOP:STEP")
    kinks.set_defaults(handler=run_kinks)


def read_state(path: Path) -> ConstructionState:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return ConstructionState.model_validate_json(text)
    except ValueError as exc:
        raise ConfigError(f"{path} does not hold a construction state: {exc}") from exc


def run_construct(args, config) -> CommandResult:
    options, tol = config.construction, config.tolerances
    resume = read_state(options.resume) if options.resume else None
    state = build_dense_transitions(
        options.targets, options.stages, palette=options.palette, blocks=options.blocks,
        horizon=options.horizon, resume=resume, slope_tolerance=tol.slope,
        location_tolerance=tol.kink_location, case_two_budget=options.case_two_budget,
        nesting=options.nesting)
    emit.write_json(state, config.output)
    cases = [record.case for record in state.stages]
    kinks = ", ".join(f"{q:.6g}" for q in state.kink_targets) or "none"
    return CommandResult(0, f"construct: {state.stage_count} curves, cases {cases}, "
                            f"kinks at {kinks}", artifact=state)


def run_kinks(args, config) -> CommandResult:
    if args.state is not None:
        sup = read_state(args.state).sup_tau()
    elif args.p:
        sup = SupTau(curves=tuple(TauCurve.single(p) for p in args.p))
    else:
        raise ConfigError("kinks needs --state or --p")
    report = detect_kinks(sup, config.kink_grid.values())
    emit.write_csv(emit.frame(report.to_rows(),
                              ["q_loc", "left_slope", "right_slope", "gap"]), config.output)
    where = ", ".join(f"{q:.6g}" for q in report.locations) or "none"
    return CommandResult(0, f"kinks: {len(report.kinks)} found at {where}", artifact=report)
