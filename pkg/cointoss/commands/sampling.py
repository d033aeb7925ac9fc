"""sample and coarse-spectrum."""
import numpy as np

from cointoss import analysis, emit
from cointoss.commands import CommandResult
from cointoss.gibbs import gibbs_reweight
from cointoss.measure import sample_digits


def register(subparsers, common) -> None:
    sample = subparsers.add_parser("sample", parents=[common],
                                   help="sample paths and their local exponents")
    sample.add_argument("--depth", dest="sample_depth", type=int)
    sample.add_argument("--samples", type=int)
    sample.add_argument("--q", dest="sample_q", type=float,
                        help="draw paths from the Gibbs reweighting at q")
    sample.set_defaults(handler=run_sample)

    coarse = subparsers.add_parser("coarse-spectrum", parents=[common],
                                   help="histogram of local exponents over all cylinders")
    coarse.add_argument("--depth", dest="enumeration_depth", type=int)
    coarse.add_argument("--bins", type=int)
    coarse.set_defaults(handler=run_coarse_spectrum)


def run_sample(args, config) -> CommandResult:
    w, options = config.sequence, config.sampling
    sampler = gibbs_reweight(w, options.q)
    digits = sample_digits(sampler, options.depth, options.samples, config.seed)
    exponents = analysis.path_exponents(w, digits)
    rows = [{"sample": i, "path": "".join(map(str, row.tolist())), "local_exponent": float(a)}
            for i, (row, a) in enumerate(zip(digits, exponents))]
    emit.write_csv(emit.frame(rows, ["sample", "path", "local_exponent"]), config.output)

    stats = analysis.exponent_statistics(w, options.depth, options.samples, config.seed,
                                         q=options.q)
    return CommandResult(0, f"sample: {options.samples} paths of depth {options.depth}, "
                            f"mean exponent {np.mean(exponents):.6f} "
                            f"(expected {stats.expected_mean:.6f}, z={stats.z_score:.2f})",
                         artifact=stats)


def run_coarse_spectrum(args, config) -> CommandResult:
    config.check_budget()
    n = config.enumeration_depth
    result = analysis.coarse_spectrum(config.sequence, n, bins=config.coarse_bins)
    emit.write_csv(emit.frame(result.to_rows(), ["alpha_bin", "count", "normalized"]),
                   config.output)
    occupied = result.to_rows()
    peak = max(occupied, key=lambda row: row["count"])
    return CommandResult(0, f"coarse-spectrum: depth {n}, {len(occupied)} occupied bins, "
                            f"most populated at alpha={peak['alpha_bin']:.4f}", artifact=result)
