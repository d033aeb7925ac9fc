"""gibbs: reweight the configured sequence and check the identities it must satisfy."""
from cointoss import emit, gibbs
from cointoss.commands import CommandResult, depth_list


def register(subparsers, common) -> None:
    parser = subparsers.add_parser("gibbs", parents=[common],
                                   help="Gibbs reweighting at q with identity checks")
    parser.add_argument("--q", type=float)
    parser.add_argument("--s", type=float, help="second parameter of the composition check")
    parser.add_argument("--enumeration-depth", dest="enumeration_depth", type=int)
    parser.add_argument("--depths", type=depth_list)
    parser.set_defaults(handler=run_gibbs)


def run_gibbs(args, config) -> CommandResult:
    config.check_budget()
    w, q, tol = config.sequence, config.q, config.tolerances
    n = config.enumeration_depth
    reweighted = gibbs.gibbs_reweight(w, q)

    consistency = gibbs.verify_consistency(w, q, n - 1)
    composition = gibbs.verify_tau_composition(w, q, config.s, n)
    low, high = gibbs.gibbs_dimension(w, q, config.depths.resolve(w), config.tail_fraction)
    ok = (consistency.max_discrepancy <= tol.identity
          and composition.residual <= tol.composition)

    emit.write_json(reweighted, config.output)
    return CommandResult(
        0 if ok else 1,
        f"gibbs: q={q}, consistency {consistency.max_discrepancy:.2e}, "
        f"composition {composition.residual:.2e} (s={config.s}), "
        f"dimension [{low:.6f}, {high:.6f}]" + ("" if ok else "; identity check FAILED"),
        artifact=reweighted)
