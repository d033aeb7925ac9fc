"""tau, limits, legendre and entropy."""
import numpy as np

from cointoss import emit, spectrum
from cointoss.commands import CommandResult, depth_list, grid


def register(subparsers, common) -> None:
    tau = subparsers.add_parser("tau", parents=[common], help="tau_n(q) over a q grid and depths")
    tau.add_argument("--q-grid", dest="q_grid", type=grid, metavar="START:STOP:STEP")
    tau.add_argument("--depths", type=depth_list)
    tau.set_defaults(handler=run_tau)

    limits = subparsers.add_parser("limits", parents=[common],
                                   help="tail limsup / liminf of tau_n(q)")
    limits.add_argument("--q-grid", dest="q_grid", type=grid, metavar="START:STOP:STEP")
    limits.add_argument("--depths", type=depth_list)
    limits.add_argument("--tail-fraction", dest="tail_fraction", type=float)
    limits.set_defaults(handler=run_limits)

    legendre = subparsers.add_parser("legendre", parents=[common],
                                     help="Legendre transform of the limsup spectrum")
    legendre.add_argument("--q-grid", dest="legendre_q_grid", type=grid,
                          metavar="START:STOP:STEP")
    legendre.add_argument("--alpha-grid", dest="alpha_grid", type=grid,
                          metavar="START:STOP:STEP")
    legendre.add_argument("--depths", type=depth_list)
    legendre.set_defaults(handler=run_legendre)

    entropy = subparsers.add_parser("entropy", parents=[common],
                                    help="-tau_n'(1) along the depth schedule")
    entropy.add_argument("--depths", type=depth_list)
    entropy.set_defaults(handler=run_entropy)


def run_tau(args, config) -> CommandResult:
    w = config.sequence
    depths = config.depths.resolve(w)
    result = spectrum.empirical_tau(w, config.q_grid.values(), depths)
    emit.write_csv(result.to_frame(), config.output)
    return CommandResult(0, f"tau: {len(result.q_grid)} q values x {len(depths)} depths "
                            f"for a {w.kind} sequence (max depth {depths[-1]})")


def run_limits(args, config) -> CommandResult:
    w = config.sequence
    depths = config.depths.resolve(w)
    estimates = [spectrum.tau_limits(w, float(q), depths, config.tail_fraction)
                 for q in config.q_grid.values()]
    rows = [{"q": e.q, "limsup": e.limsup, "liminf": e.liminf} for e in estimates]
    emit.write_csv(emit.frame(rows, ["q", "limsup", "liminf"]), config.output)
    settled = sum(spectrum.limit_exists(e, config.tolerances.limit_gap) for e in estimates)
    tail = estimates[0].tail_depths
    return CommandResult(0, f"limits: tail depths {tail[0]}..{tail[-1]} ({len(tail)}); "
                            f"{settled}/{len(estimates)} q values settled, "
                            f"largest gap {max(e.gap for e in estimates):.3e}")


def run_legendre(args, config) -> CommandResult:
    w = config.sequence
    depths = config.depths.resolve(w)
    q_grid = config.legendre_q_grid.values()
    upper = spectrum.empirical_tau(w, q_grid, depths).tail(config.tail_fraction).max(axis=1)
    points = spectrum.legendre_curve(q_grid, upper, config.alpha_grid.values())
    rows = [{"alpha": pt.alpha, "value": pt.value, "argmin_q": pt.argmin_q} for pt in points]
    emit.write_csv(emit.frame(rows, ["alpha", "value", "argmin_q"]), config.output)
    boundary = sum(pt.on_boundary for pt in points)
    best = max(points, key=lambda pt: pt.value)
    return CommandResult(0, f"legendre: {len(points)} alpha values, maximum "
                            f"{best.value:.6f} at alpha={best.alpha:.4f}, "
                            f"{boundary} on the q-grid boundary")


def run_entropy(args, config) -> CommandResult:
    w = config.sequence
    depths = np.asarray(config.depths.resolve(w))
    profile = spectrum.entropy_profile(w, int(depths[-1]))
    rows = [{"depth": int(d), "entropy": float(profile[d - 1])} for d in depths]
    emit.write_csv(emit.frame(rows, ["depth", "entropy"]), config.output)
    low, high = spectrum.entropy_dimension(w, depths.tolist(), config.tail_fraction)
    return CommandResult(0, f"entropy: liminf {low:.6f}, limsup {high:.6f} over the tail "
                            f"of {len(depths)} depths")
