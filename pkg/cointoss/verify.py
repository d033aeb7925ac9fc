"""Registered identity checks and the suite that runs them.

Every check returns a measured residual and the tolerance it is held to. The
registry records which package operations each check exercises, so coverage of
the analytical operations can be asserted.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from pydantic import BaseModel, computed_field

from cointoss import analysis, gibbs, measure, spectrum, transitions
from cointoss.config import RunConfig
from cointoss.errors import AnalysisError, LegendreBoundaryWarning, PositivityError


logger = logging.getLogger(__name__)

# Operations with a closed form or a proven property behind them; each must be
# exercised by at least one registered check.
ANCHORED_OPERATIONS = (
    "measure.weight_at",
    "measure.cylinder_measure",
    "measure.local_exponent",
    "measure.enumerate_cylinders",
    "measure.sample_path",
    "spectrum.tau_single",
    "spectrum.tau_single_d1",
    "spectrum.tau_single_d2",
    "spectrum.tau_n",
    "spectrum.tau_limits",
    "spectrum.limit_exists",
    "spectrum.legendre",
    "spectrum.entropy_dimension",
    "spectrum.level_set_lower_bound",
    "spectrum.subsequence_derivative_bracket",
    "gibbs.gibbs_reweight",
    "gibbs.verify_consistency",
    "gibbs.verify_tau_composition",
    "gibbs.gibbs_dimension",
    "transitions.ratio_is_decreasing",
    "transitions.single_crossing",
    "transitions.find_matching_p",
    "transitions.solve_three_point_system",
    "transitions.split_combination",
    "transitions.realize_curve",
    "transitions.realize_sup",
    "transitions.build_dense_transitions",
    "transitions.detect_kinks",
    "analysis.coarse_spectrum",
    "analysis.exponent_range",
    "analysis.exponent_statistics",
    "analysis.empty_level_interval",
)


class Measured(NamedTuple):
    residual: float
    tolerance: float
    detail: str = ""
    passed: Optional[bool] = None


@dataclass(frozen=True)
class Check:
    name: str
    identity: str
    covers: tuple[str, ...]
    run: Callable[[RunConfig], Measured]


REGISTRY: dict[str, Check] = {}


def register_check(name: str, identity: str, covers: Sequence[str]):
    def decorator(fn: Callable[[RunConfig], Measured]):
        if name in REGISTRY:
            raise ValueError(f"check {name!r} is already registered")
        REGISTRY[name] = Check(name=name, identity=identity, covers=tuple(covers), run=fn)
        return fn
    return decorator


def covered_operations() -> set[str]:
    return {op for check in REGISTRY.values() for op in check.covers}


class CheckResult(BaseModel):
    name: str
    identity: str
    covers: list[str]
    passed: bool
    residual: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""


class VerifyReport(BaseModel):
    seed: int
    checks: list[CheckResult]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @computed_field
    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def summary(self) -> str:
        good = sum(c.passed for c in self.checks)
        line = f"verify: {good}/{len(self.checks)} checks passed"
        return line if self.passed else f"{line}; failed: {', '.join(self.failures)}"


def _rng(config: RunConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, salt])


def _random_explicit(rng: np.random.Generator, length: int,
                     low: float = 0.05, high: float = 0.95) -> measure.Explicit:
    return measure.Explicit(weights=tuple(rng.uniform(low, high, length).tolist()))


def _alternating_blocks(p: float = 0.3, p_tilde: float = 0.4) -> measure.BlockSchedule:
    return transitions.realize_sup([measure.Constant(p=p), measure.Constant(p=p_tilde)])


_ALTERNATING_MAX_DEPTH = 100_000

_SETTLED_DEPTHS = spectrum.geometric_depths(10, 10_000, 25)

# Deepest level the diagonal realization of the construction is evaluated at.
_REALIZATION_DEPTH = 1_100_000


def _alternating_depths(w: measure.WeightSequence) -> list[int]:
    ends = measure.block_end_depths(w, _ALTERNATING_MAX_DEPTH)
    return ends if ends[-1] == _ALTERNATING_MAX_DEPTH else ends + [_ALTERNATING_MAX_DEPTH]


@register_check("tau_oracle", "tau_n equals the running mean of single-level spectra",
                ["spectrum.tau_n", "spectrum.tau_single"])
def check_tau_oracle(config: RunConfig) -> Measured:
    rng = _rng(config, 1)
    n = min(12, config.enumeration_depth)
    worst = 0.0
    for _ in range(20):
        w = _random_explicit(rng, n)
        for q in (-2.0, -0.5, 0.5, 1.0, 2.0, 3.0):
            worst = max(worst, abs(spectrum.tau_n(w, q, n) - spectrum.tau_n_enumerated(w, q, n)))
    return Measured(worst, config.tolerances.oracle, f"20 sequences, depth {n}")


@register_check("cylinder_conservation", "cylinder measures sum to one at every depth",
                ["measure.enumerate_cylinders", "measure.cylinder_measure",
                 "measure.local_exponent", "measure.weight_at"])
def check_cylinder_conservation(config: RunConfig) -> Measured:
    rng = _rng(config, 2)
    depth = config.enumeration_depth
    worst = 0.0
    for _ in range(5):
        w = _random_explicit(rng, depth)
        for n in range(depth + 1):
            worst = max(worst, abs(float(measure.cylinder_masses(w, n).sum()) - 1.0))
        m = min(depth, 6)
        for path, mass in measure.enumerate_cylinders(w, m):
            worst = max(worst, abs(measure.cylinder_measure(w, path) - mass))
            if m:
                alpha = -math.log2(mass) / m
                worst = max(worst, abs(measure.local_exponent(w, path) - alpha))
        worst = max(worst, abs(measure.weight_at(w, depth) - w.weights[-1]))
    return Measured(worst, config.tolerances.identity, f"5 sequences, depths 0..{depth}")


@register_check("derivative_bounds",
                "d2 <= [4p(1-p)]^q0 (log2 p/(1-p))^2 for q >= q0; d1, d2 match finite differences",
                ["spectrum.tau_single_d1", "spectrum.tau_single_d2", "spectrum.tau_single"])
def check_derivative_bounds(config: RunConfig) -> Measured:
    ps = np.round(0.01 * np.arange(1, 100), 12)
    ps = ps[ps != 0.5][:, None]
    excess = 0.0
    for q0 in (0.5, 1.0, 2.0):
        qs = q0 + 0.25 * np.arange(41)[None, :]
        bound = (4.0 * ps * (1.0 - ps)) ** q0 * np.log2(ps / (1.0 - ps)) ** 2
        d2 = spectrum.tau_single_d2(ps, qs)
        excess = max(excess, float(np.max(d2 - bound * (1.0 + 1e-12))))
    if excess > 0.0:
        return Measured(excess, 0.0, "second derivative exceeds its bound", passed=False)

    h = 1e-5
    grid_p = np.array([0.05, 0.2, 0.3, 0.45, 0.7, 0.9])[:, None]
    grid_q = np.linspace(-3.0, 3.0, 25)[None, :]
    fd1 = (spectrum.tau_single(grid_p, grid_q + h) - spectrum.tau_single(grid_p, grid_q - h)) / (2 * h)
    fd2 = (spectrum.tau_single_d1(grid_p, grid_q + h)
           - spectrum.tau_single_d1(grid_p, grid_q - h)) / (2 * h)
    residual = max(float(np.max(np.abs(fd1 - spectrum.tau_single_d1(grid_p, grid_q)))),
                   float(np.max(np.abs(fd2 - spectrum.tau_single_d2(grid_p, grid_q)))))
    return Measured(residual, config.tolerances.finite_difference,
                    "bound holds; residual is the finite-difference error")


@register_check("gibbs_consistency",
                "normalized mu^q of a cylinder equals the sum over its children",
                ["gibbs.verify_consistency", "gibbs.gibbs_reweight"])
def check_gibbs_consistency(config: RunConfig) -> Measured:
    rng = _rng(config, 4)
    depth = min(10, config.enumeration_depth - 1)
    w = _random_explicit(rng, depth + 1)
    worst = 0.0
    for q in (-1.0, 0.0, 0.5, 1.0, 2.0, 3.0):
        for n in range(depth + 1):
            worst = max(worst, gibbs.verify_consistency(w, q, n).max_discrepancy)
    tilted = gibbs.gibbs_reweight(measure.Constant(p=0.3), 2.0)
    worst = max(worst, abs(measure.weight_at(tilted, 1) - 0.09 / 0.58))
    uniform = gibbs.gibbs_reweight(w, 0.0)
    worst = max(worst, float(np.max(np.abs(uniform.prefix(depth) - 0.5))))
    return Measured(worst, config.tolerances.identity, f"depths 0..{depth}")


@register_check("tau_composition", "tau_nu,n(s) = tau_mu,n(qs) - s tau_mu,n(q)",
                ["gibbs.verify_tau_composition", "gibbs.gibbs_reweight"])
def check_tau_composition(config: RunConfig) -> Measured:
    rng = _rng(config, 5)
    w = _random_explicit(rng, 10)
    pairs = [(config.q, config.s)] + [tuple(pair) for pair in rng.uniform(-3.0, 3.0, (20, 2))]
    worst = max(gibbs.verify_tau_composition(w, q, s, 10).residual for q, s in pairs)
    return Measured(worst, config.tolerances.composition, f"{len(pairs)} (q, s) pairs")


@register_check("gibbs_dimension",
                "-tau_nu,n'(1) = -q tau_mu,n'(q) + tau_mu,n(q); entropy of Constant(p) is h(p)",
                ["gibbs.gibbs_dimension", "spectrum.level_set_lower_bound",
                 "spectrum.entropy_dimension"])
def check_gibbs_dimension(config: RunConfig) -> Measured:
    rng = _rng(config, 6)
    depths = spectrum.geometric_depths(10, 2000, 12)
    constant = measure.Constant(p=0.3)
    entropy = spectrum.entropy_dimension(constant, depths)
    worst = max(abs(v - spectrum.binary_entropy(0.3)) for v in entropy)
    for w in (_random_explicit(rng, depths[-1]), measure.Periodic(weights=(0.2, 0.35, 0.45))):
        for q in (-1.0, 0.0, 0.5, 2.0, 3.0):
            low, _ = gibbs.gibbs_dimension(w, q, depths)
            worst = max(worst, abs(low - spectrum.level_set_lower_bound(w, q, depths)))
        worst = max(worst, abs(gibbs.gibbs_dimension(w, 0.0, depths).limsup - 1.0))
    return Measured(worst, config.tolerances.composition,
                    f"h(0.3) = {spectrum.binary_entropy(0.3):.6f}")


@register_check("alternating_limits",
                "alternating blocks: tau_n(2) oscillates between tau(p~, 2) and tau(p, 2)",
                ["spectrum.tau_limits", "spectrum.limit_exists", "transitions.realize_sup",
                 "spectrum.tau_n"])
def check_alternating_limits(config: RunConfig) -> Measured:
    w = _alternating_blocks()
    estimate = spectrum.tau_limits(w, 2.0, _alternating_depths(w))
    residual = max(abs(estimate.limsup - spectrum.tau_single(0.3, 2.0)),
                   abs(estimate.liminf - spectrum.tau_single(0.4, 2.0)))
    constant = spectrum.tau_limits(measure.Constant(p=0.3), 2.0, _SETTLED_DEPTHS)
    settled = (spectrum.limit_exists(constant, config.tolerances.limit_gap)
               and not spectrum.limit_exists(estimate, config.tolerances.limit_gap))
    identical = transitions.realize_sup([measure.Constant(p=0.3)] * 2)
    profile_gap = float(np.max(np.abs(spectrum.tau_profile(identical, 2.0, 1000)
                                      - spectrum.tau_single(0.3, 2.0))))
    return Measured(max(residual, profile_gap), config.tolerances.counterexample,
                    f"liminf {estimate.liminf:.6f}, limsup {estimate.limsup:.6f}",
                    passed=settled and max(residual, profile_gap) <= config.tolerances.counterexample)


@register_check("alternating_kinks",
                "max(tau(0.3, .), tau(0.4, .)) has kinks at 0 and 1 with gap h(0.4) - h(0.3) at 1",
                ["transitions.detect_kinks", "analysis.empty_level_interval"])
def check_alternating_kinks(config: RunConfig) -> Measured:
    sup = transitions.SupTau(curves=(spectrum.TauCurve.single(0.3),
                                     spectrum.TauCurve.single(0.4)))
    grid = np.round(-2.0 + 0.01 * np.arange(601), 12)
    report = transitions.detect_kinks(sup, grid)
    if len(report.kinks) != 2:
        return Measured(math.inf, config.tolerances.finite_difference,
                        f"kinks at {report.locations}", passed=False)
    expected_gap = spectrum.binary_entropy(0.4) - spectrum.binary_entropy(0.3)
    residual = max(abs(report.locations[0]), abs(report.locations[1] - 1.0),
                   abs(report.kinks[1].gap - expected_gap))
    witness = analysis.empty_level_interval(0.3, 0.4, config.legendre_q_grid.values())
    return Measured(residual, config.tolerances.finite_difference,
                    f"gap at q=1: {report.kinks[1].gap:.6f}; formalism fails on "
                    f"({witness.low:.4f}, {witness.high:.4f}): {witness.formalism_fails}",
                    passed=witness.formalism_fails and residual <= config.tolerances.finite_difference)


@register_check("derivative_bracket",
                "subsequence derivatives follow the dominating branch; bracket width at a kink",
                ["spectrum.subsequence_derivative_bracket"])
def check_derivative_bracket(config: RunConfig) -> Measured:
    tol = config.tolerances
    w = _alternating_blocks()
    depths = _alternating_depths(w)
    smooth = spectrum.subsequence_derivative_bracket(w, 2.0, depths, eps_q=tol.eps_q,
                                                     tolerance=tol.bracket)
    kink = spectrum.subsequence_derivative_bracket(w, 1.0, depths, eps_q=tol.eps_q,
                                                   tolerance=tol.bracket)
    constant = spectrum.subsequence_derivative_bracket(measure.Constant(p=0.3), 2.0,
                                                       _SETTLED_DEPTHS, eps_q=tol.eps_q)
    d1 = spectrum.tau_single_d1(0.3, 2.0)
    residual = max(
        abs(smooth.derivative_max - d1),
        abs(kink.width - (spectrum.binary_entropy(0.4) - spectrum.binary_entropy(0.3))),
        max(abs(v - d1) for v in (constant.derivative_min, constant.derivative_max,
                                  constant.left_derivative, constant.right_derivative)),
    )
    return Measured(residual, tol.bracket, f"bracket width at q=1: {kink.width:.4f}",
                    passed=not kink.violated and residual <= tol.bracket)


@register_check("legendre_transform", "tau*(alpha) = alpha q + tau(q) at alpha = -tau'(q)",
                ["spectrum.legendre"])
def check_legendre(config: RunConfig) -> Measured:
    grid = config.legendre_q_grid.values()
    alpha = -spectrum.tau_single_d1(0.3, 2.0)
    point = spectrum.legendre(grid, spectrum.tau_single(0.3, grid), alpha)
    flat = spectrum.legendre(grid, spectrum.tau_single(0.5, grid), 1.0)
    residual = max(abs(point.value - (2.0 * alpha + spectrum.tau_single(0.3, 2.0))),
                   abs(flat.value - 1.0))
    return Measured(residual, config.tolerances.oracle,
                    f"tau*({alpha:.6f}) = {point.value:.6f} at q = {point.argmin_q}")


@register_check("ratio_monotonicity",
                "(tau(p1,.) - tau(p2,.)) / (tau(p2,.) - tau(p3,.)) decreases on (1, inf)",
                ["transitions.ratio_is_decreasing"])
def check_ratio_monotonicity(config: RunConfig) -> Measured:
    rng = _rng(config, 11)
    grid = np.round(1.01 + 0.01 * np.arange(700), 12)
    violations = 0
    tried = 0
    while tried < 200:
        triple = np.sort(rng.uniform(0.01, 0.49, 3))
        if np.min(np.diff(triple)) < 0.005:
            continue
        tried += 1
        violations += len(transitions.ratio_is_decreasing(*triple.tolist(), grid).violations)
    return Measured(float(violations), 0.0, f"{tried} random triples",
                    passed=violations == 0)


@register_check("single_crossing",
                "a two-component curve meets tau(p0, .) at most once on (1, inf)",
                ["transitions.single_crossing", "transitions.find_matching_p"])
def check_single_crossing(config: RunConfig) -> Measured:
    curve = spectrum.TauCurve.of([(0.5, 0.2), (0.5, 0.4)])
    grid = np.round(1.1 + 0.01 * np.arange(491), 12)
    inside = transitions.single_crossing(curve, 0.29, grid)
    outside = [transitions.single_crossing(curve, p0, grid).crossing for p0 in (0.2, 0.45)]
    p4 = transitions.find_matching_p(curve, 1.5)
    residual = max(inside.residual if inside.crossing else math.inf,
                   abs(spectrum.tau_single(p4, 1.5) - curve.value(1.5)))
    ok = inside.crossing and not any(outside) and 0.2 < p4 < 0.4
    return Measured(residual, config.tolerances.equality,
                    f"q0 = {inside.q0}, p4 = {p4:.10f}",
                    passed=ok and residual <= config.tolerances.equality)


@register_check("three_point_system",
                "positive weights interpolate tau at q1 and q2; p5 -> p2 gives (l1, 0, l2)",
                ["transitions.solve_three_point_system", "transitions.find_matching_p"])
def check_three_point_system(config: RunConfig) -> Measured:
    rng = _rng(config, 13)
    worst = 0.0
    failures = 0
    for _ in range(100):
        p1 = float(rng.uniform(0.05, 0.3))
        p2 = p1 + float(rng.uniform(0.05, 0.15))
        lam = float(rng.uniform(0.2, 0.8))
        q1 = float(rng.uniform(1.2, 3.0))
        q2 = q1 + float(rng.uniform(0.5, 3.0))
        head = spectrum.TauCurve.of([(lam, p1), (1.0 - lam, p2)])
        p4 = transitions.find_matching_p(head, q1)
        p5 = transitions.default_p5(p2)
        for _ in range(30):
            try:
                solution = transitions.solve_three_point_system(
                    p1, p4, p5, q1, q2, (head.value(q1), head.value(q2)))
                worst = max(worst, solution.residual, abs(sum(solution.weights) - 1.0))
                break
            except PositivityError:
                p5 = p2 + (p5 - p2) / 2.0
        else:
            failures += 1

    head = spectrum.TauCurve.of([(0.5, 0.2), (0.5, 0.4)])
    p4 = transitions.find_matching_p(head, 1.5)
    try:
        limit = transitions.solve_three_point_system(
            0.2, p4, 0.4 + 1e-5, 1.5, 3.0, (head.value(1.5), head.value(3.0))).weights
    except PositivityError as exc:
        limit = exc.solution
    deviation = float(np.max(np.abs(np.asarray(limit) - (0.5, 0.0, 0.5))))
    ok = failures == 0 and worst < config.tolerances.equality and deviation < 1e-3
    return Measured(worst, config.tolerances.equality,
                    f"{failures} non-positive instances; p5 -> p2 deviation {deviation:.2e}",
                    passed=ok)


@register_check("split_and_realize",
                "split curves agree at the targets with different slopes; realizations "
                "track their curves",
                ["transitions.split_combination", "transitions.realize_curve",
                 "transitions.realize_sup"])
def check_split_and_realize(config: RunConfig) -> Measured:
    curve = spectrum.TauCurve.of([(0.5, 0.2), (0.5, 0.4)])
    split = transitions.split_combination(curve, 1.5, 3.0, p5=0.45)
    worst = max(abs(split.value(q) - curve.value(q)) for q in (1.5, 3.0))

    thirds = spectrum.TauCurve.of([(1.0 / 3.0, 0.2), (2.0 / 3.0, 0.4)])
    realized = transitions.realize_curve(thirds, 9)
    worst = max(worst, abs(spectrum.tau_n(realized, config.q, 9) - thirds.value(config.q)))

    three = spectrum.TauCurve.of([(0.25, 0.1), (0.35, 0.25), (0.4, 0.45)])
    lazy = transitions.interleave(three)
    n = np.arange(1, 2001)
    tau = spectrum.tau_single(three.ps, config.q)
    envelope = 2 * len(three.components) * np.max(np.abs(tau)) / n
    excess = spectrum.tau_profile(lazy, config.q, 2000) - float(np.dot(three.weights, tau))
    inside = bool(np.all(np.abs(excess) <= envelope))
    return Measured(worst, config.tolerances.equality, f"envelope respected: {inside}",
                    passed=inside and worst <= config.tolerances.equality)


@register_check("dense_construction",
                "the constructed maximum has kinks at the active targets; the diagonal "
                "sequence realizes it",
                ["transitions.build_dense_transitions", "transitions.detect_kinks",
                 "transitions.realize_sup", "transitions.realize_curve"])
def check_dense_construction(config: RunConfig) -> Measured:
    options = config.construction
    tol = config.tolerances
    state = transitions.build_dense_transitions(
        options.targets, options.stages, palette=options.palette, blocks=options.blocks,
        horizon=options.horizon, slope_tolerance=tol.slope,
        location_tolerance=tol.kink_location, case_two_budget=options.case_two_budget,
        nesting=options.nesting)
    report = transitions.detect_kinks(state.sup_tau(), transitions.verification_grid(state.horizon))
    expected = state.kink_targets
    if len(report.kinks) < len(expected) or len(report.kinks) < 2 * options.stages - 2:
        return Measured(math.inf, tol.kink_location,
                        f"found kinks {report.locations}, expected {expected}", passed=False)
    worst = max((min(abs(k.q_loc - t) for t in expected) for k in report.kinks), default=0.0)
    gaps_ok = all(k.gap > tol.slope for k in report.kinks)

    realization = 0.0
    diagonal = state.diagonal()
    ends = [d for d in diagonal.block_ends(_REALIZATION_DEPTH) if d >= 10_000]
    if ends:
        sup = state.sup_tau()
        for q in (1.2, 1.75, 6.0):
            top = float(np.max(spectrum.empirical_tau(diagonal, [q], ends).values))
            realization = max(realization, abs(top - sup.value(q)))
    cases = [record.case for record in state.stages]
    return Measured(worst, tol.kink_location,
                    f"{len(report.kinks)} kinks, cases {cases}, realization error {realization:.2e}",
                    passed=(worst <= tol.kink_location and gaps_ok
                            and realization <= tol.realization))


@register_check("monte_carlo_exponents",
                "sampled local exponents have mean -(1/n) sum d1(p_i, q) within the CLT band",
                ["analysis.exponent_statistics", "measure.sample_path"])
def check_monte_carlo(config: RunConfig) -> Measured:
    sampling = config.sampling
    stats = analysis.exponent_statistics(measure.Constant(p=0.3), sampling.depth,
                                         sampling.samples, config.seed, q=sampling.q)
    first = measure.sample_path(measure.Constant(p=0.3), 64, config.seed)
    second = measure.sample_path(measure.Constant(p=0.3), 64, config.seed)
    return Measured(abs(stats.z_score), config.tolerances.sigmas,
                    f"mean {stats.sample_mean:.6f} vs {stats.expected_mean:.6f}",
                    passed=first == second and abs(stats.z_score) <= config.tolerances.sigmas)


@register_check("coarse_spectrum",
                "log2 N_n(alpha) / n stays below the Legendre transform of tau",
                ["analysis.coarse_spectrum", "analysis.exponent_range"])
def check_coarse_spectrum(config: RunConfig) -> Measured:
    n = min(14, config.enumeration_depth)
    tol = config.tolerances

    uniform = analysis.coarse_spectrum(measure.Constant(p=0.5), n)
    occupied = [v for v in uniform.normalized if v is not None]
    worst = abs(occupied[0] - 1.0) if len(occupied) == 1 else math.inf

    w = measure.Constant(p=0.3)
    result = analysis.coarse_spectrum(w, n, bins=n + 1)
    exponents = np.unique(np.round(analysis.local_exponents(w, n), 12))
    grid = config.legendre_q_grid.values()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LegendreBoundaryWarning)
        bound = [pt.value for pt in spectrum.legendre_curve(grid, spectrum.tau_single(0.3, grid),
                                                            exponents)]
    edges = np.asarray(result.edges)
    for alpha, limit in zip(exponents, bound):
        j = int(np.clip(np.searchsorted(edges, alpha, side="right") - 1, 0, len(result.counts) - 1))
        value = result.normalized[j]
        if value is not None:
            worst = max(worst, value - limit)

    alternating = measure.Periodic(weights=(0.3, 0.4))
    spread = analysis.coarse_spectrum(alternating, n)
    extremes = analysis.exponent_range(alternating, n)
    worst = max(worst, abs(spread.edges[0] - extremes.low), abs(spread.edges[-1] - extremes.high))
    return Measured(max(worst, 0.0), tol.oracle, f"depth {n}")


def run_verify_suite(config: RunConfig, names: Optional[Sequence[str]] = None) -> VerifyReport:
    """Run the registered checks in registration order.

    The enumeration budget is checked before anything runs; analysis errors inside
    a check mark that check failed.
    """
    config.check_budget()
    selected = list(REGISTRY.values()) if names is None else [REGISTRY[n] for n in names]
    results = []
    for check in selected:
        try:
            measured = check.run(config)
        except AnalysisError as exc:
            logger.warning("Check %s raised %s: %s", check.name, type(exc).__name__, exc)
            results.append(CheckResult(name=check.name, identity=check.identity,
                                       covers=list(check.covers), passed=False,
                                       detail=f"{type(exc).__name__}: {exc}"))
            continue
        passed = measured.passed
        if passed is None:
            passed = measured.residual <= measured.tolerance
        if passed:
            logger.info("Check %s passed (residual %.3e)", check.name, measured.residual)
        else:
            logger.warning("Check %s failed (residual %.3e, tolerance %.1e): %s", check.name,
                           measured.residual, measured.tolerance, measured.detail)
        results.append(CheckResult(
            name=check.name, identity=check.identity, covers=list(check.covers),
            passed=bool(passed),
            residual=measured.residual if math.isfinite(measured.residual) else None,
            tolerance=measured.tolerance, detail=measured.detail))
    return VerifyReport(seed=config.seed, checks=results)
