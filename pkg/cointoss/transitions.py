"""Phase transitions of maxima of L^q spectra.

Convex combinations of single-level spectra tau(p, .) can be split: a second
combination agrees with the first at two chosen points q1 < q2 and crosses it
there with different slopes. Taking pointwise maxima of such curves, realizing
each curve by an interleaved weight sequence and each maximum by a block
schedule gives product measures whose spectrum has kinks at prescribed points.
"""
import logging
from typing import Callable, Literal, NamedTuple, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field
from scipy.optimize import bisect, brentq

from cointoss.errors import (AmbiguousCaseError, AnalysisError, CaseTwoError,
                             ConstructionError, GridTooCoarseError, NoSignChangeError,
                             PositivityError, PreconditionError, SingularSystemError,
                             SplitError)
from cointoss.measure import (BlockRule, BlockSchedule, Constant, Diagonal, Explicit,
                              Interleaved, WeightSequence)
from cointoss.spectrum import TauCurve, tau_single


logger = logging.getLogger(__name__)

BISECT_XTOL = 1e-13
DEFAULT_HORIZON = 8.0

# chain: 1 < q1 < q3 < ... < q4 < q2; dense: each pair clear of the earlier targets
Nesting = Literal["chain", "dense"]


def _root(fn: Callable[[float], float], a: float, b: float, what: str) -> float:
    fa, fb = fn(a), fn(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise NoSignChangeError(
            f"{what}: no sign change on [{a:.12g}, {b:.12g}] (values {fa:.3e}, {fb:.3e})")
    return bisect(fn, a, b, xtol=BISECT_XTOL, maxiter=500)


def _check_ordered_below_half(*ps: float) -> None:
    if not (ps[0] > 0.0 and all(a < b for a, b in zip(ps, ps[1:]))) or ps[-1] >= 0.5:
        raise PreconditionError(f"expected 0 < {' < '.join(map(str, ps))} < 1/2")


def _grid_above_one(q_grid: Sequence[float]) -> np.ndarray:
    q_grid = np.asarray(q_grid, dtype=float)
    if q_grid.size and q_grid.min() <= 1.0:
        raise PreconditionError("the q grid must lie inside (1, inf)")
    return q_grid


class RatioReport(BaseModel):
    q_grid: list[float]
    ratios: list[float]
    violations: list[int]

    @property
    def decreasing(self) -> bool:
        return not self.violations


def ratio_is_decreasing(p1: float, p2: float, p3: float, q_grid: Sequence[float],
                        tolerance: float = 1e-12) -> RatioReport:
    """(tau(p1,.) - tau(p2,.)) / (tau(p2,.) - tau(p3,.)) on the grid; a violation
    is an adjacent increase by more than ``tolerance``."""
    _check_ordered_below_half(p1, p2, p3)
    q_grid = _grid_above_one(q_grid)
    t1, t2, t3 = (tau_single(p, q_grid) for p in (p1, p2, p3))
    below = np.asarray(t2 - t3, dtype=float)
    if np.any(np.abs(below) < 1e-300):
        raise PreconditionError("tau(p2, q) - tau(p3, q) vanishes on the grid")
    ratios = np.atleast_1d((t1 - t2) / below)
    violations = np.flatnonzero(np.diff(ratios) > tolerance)
    return RatioReport(q_grid=q_grid.tolist(), ratios=ratios.tolist(),
                       violations=violations.tolist())


class CrossingReport(BaseModel):
    crossing: bool
    q0: Optional[float] = None
    residual: Optional[float] = None


def single_crossing(curve: TauCurve, p0: float, q_grid: Sequence[float]) -> CrossingReport:
    """Locate the unique q0 > 1 where a two-component curve meets tau(p0, .), if any."""
    if len(curve.components) != 2:
        raise PreconditionError("single_crossing expects a curve with two components")
    p1, p2 = sorted(curve.ps.tolist())
    _check_ordered_below_half(p1, p2)
    _check_ordered_below_half(p0)
    q_grid = _grid_above_one(q_grid)
    if q_grid.size < 2:
        raise PreconditionError("the q grid needs at least two points")

    def diff(q):
        return curve.value(q) - tau_single(p0, q)

    values = np.asarray(diff(q_grid))
    signs = np.sign(values)
    if signs[0] == signs[-1] or 0.0 in (signs[0], signs[-1]):
        return CrossingReport(crossing=False)

    changes = np.flatnonzero(signs[:-1] * signs[1:] <= 0)
    if changes.size == 0:
        raise GridTooCoarseError(
            "endpoint signs differ but no grid cell brackets the crossing",
            (float(q_grid[0]), float(q_grid[-1])))
    j = int(changes[0])
    q0 = _root(diff, float(q_grid[j]), float(q_grid[j + 1]), "single crossing")
    return CrossingReport(crossing=True, q0=q0, residual=abs(float(diff(q0))))


def find_matching_p(curve: TauCurve, q1: float) -> float:
    """p4 with tau(p4, q1) = curve(q1); tau(., q1) is strictly decreasing on
    (0, 1/2) for q1 > 1, so the root is unique."""
    if q1 <= 1.0:
        raise PreconditionError(f"q1 must exceed 1, got {q1}")
    target = curve.value(q1)
    lo, hi = float(curve.ps.min()), float(curve.ps.max())

    def diff(p):
        return tau_single(p, q1) - target

    if lo == hi:
        if abs(diff(lo)) > 1e-12:
            raise NoSignChangeError(f"single-parameter curve does not reach {target} at q={q1}")
        return lo
    f_lo, f_hi = diff(lo), diff(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoSignChangeError(
            f"tau(p, {q1}) - {target:.12g} keeps its sign on [{lo}, {hi}]")
    return brentq(diff, lo, hi, xtol=1e-16, maxiter=500)


class ThreePointSolution(BaseModel):
    ps: tuple[float, float, float]
    weights: tuple[float, float, float]
    determinant: float
    residual: float

    def curve(self) -> TauCurve:
        return TauCurve.of(list(zip(self.weights, self.ps)))


def solve_three_point_system(p1: float, p4: float, p5: float, q1: float, q2: float,
                             targets: tuple[float, float],
                             determinant_floor: float = 1e-14,
                             residual_tolerance: float = 1e-10) -> ThreePointSolution:
    """Weights (l3, l4, l5) with l3 tau(p1,.) + l4 tau(p4,.) + l5 tau(p5,.) equal
    to ``targets`` at q1 and q2 and l3 + l4 + l5 = 1."""
    _check_ordered_below_half(p1, p4, p5)
    if not 1.0 < q1 < q2:
        raise PreconditionError(f"need 1 < q1 < q2, got {q1}, {q2}")

    ps = np.array([p1, p4, p5])
    matrix = np.vstack([tau_single(ps, q1), tau_single(ps, q2), np.ones(3)])
    rhs = np.array([targets[0], targets[1], 1.0])
    determinant = float(np.linalg.det(matrix))
    if abs(determinant) < determinant_floor:
        raise SingularSystemError(determinant)

    weights = np.linalg.solve(matrix, rhs)
    residual = float(np.abs(matrix @ weights - rhs).max())
    if residual >= residual_tolerance:
        raise AnalysisError(f"three-point system residual {residual:.3e} is too large")
    if np.any(weights <= 0.0):
        raise PositivityError(weights.tolist())
    return ThreePointSolution(ps=(p1, p4, p5), weights=tuple(weights.tolist()),
                              determinant=determinant, residual=residual)


class Split(BaseModel):
    """A split of a curve at (q1, q2) with the parameters it used."""
    curve: TauCurve
    q1: float
    q2: float
    p4: float
    p5: float
    slope_gap_left: float
    slope_gap_right: float


def default_p5(p2: float) -> float:
    return p2 + 0.6 * (0.5 - p2)


def _check_sign_structure(curve: TauCurve, split: TauCurve, q1: float, q2: float,
                          horizon: float, neighbourhood: float = 1e-3) -> None:
    grid = np.linspace(1.0, max(horizon, 2.0 * q2), 2001)[1:]
    grid = grid[(np.abs(grid - q1) > neighbourhood) & (np.abs(grid - q2) > neighbourhood)]
    signs = np.sign(np.asarray(split.value(grid)) - np.asarray(curve.value(grid)))
    pieces = [signs[grid < q1], signs[(grid > q1) & (grid < q2)], signs[grid > q2]]
    for piece in pieces:
        if piece.size and (np.any(piece == 0) or np.any(piece != piece[0])):
            raise SplitError(f"split curve meets the original away from q1={q1}, q2={q2}")
    firsts = [piece[0] for piece in pieces if piece.size]
    if any(a == b for a, b in zip(firsts, firsts[1:])):
        raise SplitError(f"split curve does not cross the original at q1={q1}, q2={q2}")


def split_details(curve: TauCurve, q1: float, q2: float, p5: Optional[float] = None,
                  horizon: float = DEFAULT_HORIZON, slope_tolerance: float = 1e-8,
                  equality_tolerance: float = 1e-10, shrink_budget: int = 30) -> Split:
    """Split the first two components of ``curve`` at (q1, q2), keeping the rest.

    With the default p5 a non-positive solution shrinks p5 halfway towards p2
    and retries; an explicit p5 is used as given.
    """
    if not 1.0 < q1 < q2:
        raise PreconditionError(f"need 1 < q1 < q2, got {q1}, {q2}")
    if len(curve.components) < 2:
        raise PreconditionError("splitting needs a curve with at least two components")

    first, second, *rest = curve.components
    p1, p2 = first.p, second.p
    _check_ordered_below_half(p1, p2)
    scale = first.weight + second.weight
    head = TauCurve.of([(first.weight / scale, p1), (second.weight / scale, p2)])
    targets = (head.value(q1), head.value(q2))
    p4 = find_matching_p(head, q1)

    shrinkable = p5 is None
    p5 = default_p5(p2) if p5 is None else p5
    if not p2 < p5 < 0.5:
        raise PreconditionError(f"p5 must lie in ({p2}, 1/2), got {p5}")

    for attempt in range(shrink_budget + 1):
        try:
            solution = solve_three_point_system(p1, p4, p5, q1, q2, targets)
            break
        except PositivityError:
            if not shrinkable or attempt == shrink_budget:
                raise
            p5 = p2 + (p5 - p2) / 2.0
            logger.info("Non-positive split weights; shrinking p5 to %.12g", p5)

    l3, l4, l5 = solution.weights
    split = TauCurve.of(
        [(scale * l3, p1), (scale * l4, p4), (scale * l5, p5)]
        + [(c.weight, c.p) for c in rest])

    for q in (q1, q2):
        gap = abs(split.value(q) - curve.value(q))
        if gap >= equality_tolerance:
            raise SplitError(f"split curve misses the original at q={q} by {gap:.3e}")
    gaps = [split.derivative(q) - curve.derivative(q) for q in (q1, q2)]
    if min(abs(g) for g in gaps) <= slope_tolerance:
        raise SplitError(
            f"slope gaps {gaps[0]:.3e}, {gaps[1]:.3e} at q1={q1}, q2={q2} are below "
            f"{slope_tolerance:.1e}")
    _check_sign_structure(curve, split, q1, q2, horizon)

    return Split(curve=split, q1=q1, q2=q2, p4=p4, p5=p5,
                 slope_gap_left=gaps[0], slope_gap_right=gaps[1])


def split_combination(curve: TauCurve, q1: float, q2: float,
                      p5: Optional[float] = None, **kwargs) -> TauCurve:
    return split_details(curve, q1, q2, p5=p5, **kwargs).curve


def interleave(curve: TauCurve) -> WeightSequence:
    """Lazy realization of ``curve``: component i occupies a deterministic set of
    positions with frequency weight_i."""
    if len(curve.components) == 1:
        return Constant(p=curve.components[0].p)
    return Interleaved(fractions=tuple(c.weight for c in curve.components),
                       weights=tuple(c.p for c in curve.components))


def realize_curve(curve: TauCurve, horizon: int) -> WeightSequence:
    if horizon < len(curve.components):
        raise PreconditionError(
            f"horizon {horizon} is shorter than the {len(curve.components)} components")
    lazy = interleave(curve)
    if isinstance(lazy, Constant):
        return lazy
    return Explicit(weights=tuple(lazy.prefix(horizon).tolist()))


def realize_sup(measures: Sequence[WeightSequence],
                blocks: BlockRule = BlockRule()) -> BlockSchedule:
    if len(measures) < 2:
        raise PreconditionError("realize_sup needs at least two sequences")
    return BlockSchedule(sequences=tuple(measures), blocks=blocks)


class SupTau(BaseModel):
    """Pointwise maximum of finitely many curves."""
    model_config = ConfigDict(frozen=True)

    curves: tuple[TauCurve, ...] = Field(min_length=1)

    def values(self, q) -> np.ndarray:
        return np.vstack([np.atleast_1d(c.value(q)) for c in self.curves])

    def value(self, q):
        top = self.values(q).max(axis=0)
        return float(top[0]) if np.ndim(q) == 0 else top

    def owner(self, q) -> int:
        return int(np.argmax(self.values(q)[:, 0]))


class Kink(BaseModel):
    q_loc: float
    left_slope: float
    right_slope: float
    owners: tuple[int, int]

    @computed_field
    @property
    def gap(self) -> float:
        return self.right_slope - self.left_slope


class TransitionReport(BaseModel):
    kinks: list[Kink]

    @property
    def locations(self) -> list[float]:
        return [k.q_loc for k in self.kinks]

    def to_rows(self) -> list[dict]:
        return [{"q_loc": k.q_loc, "left_slope": k.left_slope,
                 "right_slope": k.right_slope, "gap": k.gap} for k in self.kinks]


def detect_kinks(sup: SupTau, q_grid: Sequence[float],
                 dominance_tolerance: float = 1e-10) -> TransitionReport:
    """Kinks of the maximum: argmax changes between grid points, refined by
    bisection on the difference of the two owning curves."""
    q_grid = np.asarray(q_grid, dtype=float)
    if q_grid.size < 3 or np.any(np.diff(q_grid) <= 0):
        raise PreconditionError("the q grid must be strictly increasing with >= 3 points")

    values = sup.values(q_grid)
    owners = np.argmax(values, axis=0)
    kinks = []
    for j in np.flatnonzero(owners[:-1] != owners[1:]):
        a, b = int(owners[j]), int(owners[j + 1])
        cell = (float(q_grid[j]), float(q_grid[j + 1]))
        left, right = sup.curves[a], sup.curves[b]

        def diff(q, left=left, right=right):
            return left.value(q) - right.value(q)

        try:
            q_loc = _root(diff, *cell, what="kink")
        except NoSignChangeError as exc:
            raise GridTooCoarseError(
                f"argmax changes from curve {a} to {b} on {cell} without a crossing", cell
            ) from exc

        for point in (q_loc, 0.5 * (cell[0] + cell[1])):
            column = sup.values(point)[:, 0]
            pair = max(column[a], column[b])
            others = np.delete(column, [a, b])
            if others.size and others.max() > pair + dominance_tolerance:
                raise GridTooCoarseError(
                    f"a third curve dominates inside the grid cell {cell}", cell)

        kinks.append(Kink(q_loc=q_loc, left_slope=left.derivative(q_loc),
                          right_slope=right.derivative(q_loc), owners=(a, b)))
    return TransitionReport(kinks=kinks)


class StageRecord(BaseModel):
    stage: int
    targets: tuple[float, float]
    owner: int
    case: Literal[1, 2]
    p4: float
    p5: float
    slope_gap_left: float
    slope_gap_right: float
    adjusted: dict[int, float] = Field(default_factory=dict)


class ConstructionState(BaseModel):
    """Curves tau_1..tau_M of the dense construction, with the targets (possibly
    adjusted in Case 2) where rho_M = max(tau_1, ..., tau_M) has its kinks."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["construction"] = "construction"
    targets: tuple[float, ...]
    active_targets: tuple[float, ...]
    curves: tuple[TauCurve, ...] = Field(min_length=1)
    stages: tuple[StageRecord, ...] = ()
    blocks: BlockRule = BlockRule()
    horizon: float = DEFAULT_HORIZON
    nesting: Nesting = "chain"

    @property
    def stage_count(self) -> int:
        return len(self.curves)

    @property
    def kink_targets(self) -> list[float]:
        return sorted(self.active_targets[:2 * len(self.stages)])

    def sup_tau(self, stages: Optional[int] = None) -> SupTau:
        return SupTau(curves=self.curves[:stages or len(self.curves)])

    def realized(self, stage: int) -> WeightSequence:
        """nu_stage: the curves tau_1..tau_stage spliced on blocks."""
        parts = [interleave(c) for c in self.curves[:stage]]
        return parts[0] if len(parts) == 1 else realize_sup(parts, self.blocks)

    def diagonal(self) -> Diagonal:
        return Diagonal(stages=tuple(self.realized(k) for k in range(1, self.stage_count + 1)),
                        blocks=self.blocks)


def check_nested(targets: Sequence[float], horizon: float, nesting: Nesting = "chain") -> None:
    """``chain``: 1 < q1 < q3 < q5 < ... < q6 < q4 < q2 < horizon.

    ``dense``: every pair satisfies 1 < q_{2n+1} < q_{2n+2} < horizon, and no
    earlier target lies in [q_{2n+1} - 2^-n, q_{2n+2} + 2^-n].
    """
    targets = [float(q) for q in targets]
    if len(targets) % 2:
        raise ConstructionError(f"targets come in pairs, got {targets}")
    if nesting == "chain":
        chain = [1.0] + targets[0::2] + targets[1::2][::-1] + [horizon]
        if any(a >= b for a, b in zip(chain, chain[1:])):
            raise ConstructionError(f"targets {targets} are not nested inside (1, {horizon})")
        return

    for n in range(len(targets) // 2):
        low, high = targets[2 * n], targets[2 * n + 1]
        if not 1.0 < low < high < horizon:
            raise ConstructionError(
                f"pair {n + 1} ({low}, {high}) is not ordered inside (1, {horizon})")
        reach = 2.0 ** -n
        clash = [q for q in targets[:2 * n] if low - reach <= q <= high + reach]
        if clash:
            raise ConstructionError(
                f"earlier targets {clash} lie within {reach} of the pair ({low}, {high})")


def verification_grid(horizon: float, step: float = 0.01) -> np.ndarray:
    count = int(round((horizon - 1.0) / step))
    return 1.0 + step * np.arange(1, count + 1)


def _classify(left_gap: float, right_gap: float, tolerance: float) -> int:
    if left_gap > tolerance and right_gap < -tolerance:
        return 1
    if left_gap < -tolerance and right_gap > tolerance:
        return 2
    raise AmbiguousCaseError(
        f"slope differences {left_gap:.3e} and {right_gap:.3e} do not decide the case "
        f"at tolerance {tolerance:.1e}")


class Neighbour(NamedTuple):
    """An earlier target next to the pair being split."""
    index: int              # 1-based position among the active targets
    q: float
    mid: float              # halfway to the next target further out (or to 1 / the horizon)
    outer: TauCurve         # owner of rho_n on the far side of q
    side: Literal["left", "right"]


def neighbours(rho: SupTau, previous: Sequence[float], q_a: float, q_b: float,
               horizon: float) -> list[Neighbour]:
    """Closest earlier targets left of q_a and right of q_b; 1 and the horizon
    stand in for missing outer targets."""
    previous = list(previous)
    found = []
    left = sorted(q for q in previous if q < q_a)
    if left:
        mid = 0.5 * (left[-1] + (left[-2] if len(left) > 1 else 1.0))
        found.append(Neighbour(previous.index(left[-1]) + 1, left[-1], mid,
                               rho.curves[rho.owner(mid)], "left"))
    right = sorted(q for q in previous if q > q_b)
    if right:
        mid = 0.5 * (right[0] + (right[1] if len(right) > 1 else horizon))
        found.append(Neighbour(previous.index(right[0]) + 1, right[0], mid,
                               rho.curves[rho.owner(mid)], "right"))
    return found


def _slope_jump(side: str, outer: TauCurve, inner: TauCurve, q: float) -> float:
    """Right minus left derivative of max(outer, inner) at q."""
    if side == "left":
        return inner.derivative(q) - outer.derivative(q)
    return outer.derivative(q) - inner.derivative(q)


def replacement_target(new: TauCurve, rho: SupTau, base: TauCurve, neighbour: Neighbour,
                       reach: float, spacing: float) -> Optional[float]:
    """Where ``new`` crosses rho_n between the neighbour and its midpoint, if the
    crossing moves the target by less than reach * spacing and changes its slope
    jump by less than reach times the old jump; None otherwise."""
    def excess(q):
        return new.value(q) - rho.value(q)

    if excess(neighbour.mid) >= 0:
        return None
    a, b = sorted((neighbour.mid, neighbour.q))
    try:
        moved = _root(excess, a, b, f"replacement of target {neighbour.q:.6g}")
    except NoSignChangeError:
        return None

    before = _slope_jump(neighbour.side, neighbour.outer, base, neighbour.q)
    after = _slope_jump(neighbour.side, neighbour.outer, new, moved)
    if abs(moved - neighbour.q) < reach * spacing and abs(before - after) < reach * before:
        return moved
    return None


def _case_two(curves: Sequence[TauCurve], owner: int, n: int, split: Split,
              active: list[float], horizon: float, slope_tolerance: float,
              budget: int) -> tuple[Split, int, dict[int, float]]:
    """Shrink p5 towards p2 until the new curve stays below rho_n at the midpoints
    beyond the neighbouring targets, then move those targets to the new crossings."""
    rho = SupTau(curves=tuple(curves))
    base = curves[owner]
    q_a, q_b = split.q1, split.q2
    beside = neighbours(rho, active[:2 * n - 2], q_a, q_b, horizon)
    if not beside:
        logger.info("Stage %d fell in Case 2 with no earlier target beside (%.6g, %.6g)",
                    n, q_a, q_b)
        return split, 2, {}

    p2 = base.components[1].p
    reach = 2.0 ** -n
    known = sorted(active[:2 * n])
    spacing = min(b - a for a, b in zip(known, known[1:]))

    p5 = split.p5
    for attempt in range(budget):
        p5 = p2 + (p5 - p2) / 2.0
        try:
            split = split_details(base, q_a, q_b, p5=p5, horizon=horizon,
                                  slope_tolerance=slope_tolerance)
        except (PositivityError, SplitError) as exc:
            logger.info("Stage %d, Case 2 retry %d: p5=%.12g rejected: %s",
                        n, attempt + 1, p5, exc)
            continue
        case = _classify(split.slope_gap_left, split.slope_gap_right, slope_tolerance)
        logger.info("Stage %d, Case 2 retry %d: p5=%.12g gives case %d", n, attempt + 1, p5, case)
        if case == 1:
            return split, 1, {}

        moved = {}
        for neighbour in beside:
            q = replacement_target(split.curve, rho, base, neighbour, reach, spacing)
            if q is None:
                break
            moved[neighbour.index] = q
        else:
            return split, 2, moved

    raise CaseTwoError(
        f"stage {n}: Case 2 conditions still fail after shrinking p5 {budget} times "
        f"(last p5={p5:.12g})")


def _verify_stage(state: ConstructionState, location_tolerance: float,
                  gap_floor: float) -> None:
    report = detect_kinks(state.sup_tau(), verification_grid(state.horizon))
    expected = state.kink_targets
    found = report.locations
    if len(found) != len(expected):
        raise ConstructionError(
            f"stage {len(state.stages)}: expected kinks at {expected}, found {found}")
    for kink, target in zip(report.kinks, expected):
        if abs(kink.q_loc - target) > location_tolerance or kink.gap <= gap_floor:
            raise ConstructionError(
                f"stage {len(state.stages)}: kink at {kink.q_loc:.10g} (gap {kink.gap:.3e}) "
                f"does not certify the target {target:.10g}")


def initial_curve(palette: Sequence[float]) -> TauCurve:
    if len(palette) < 2:
        raise PreconditionError("the palette needs at least two parameters")
    _check_ordered_below_half(*palette)
    return TauCurve.of([(1.0 / len(palette), p) for p in palette])


def build_dense_transitions(targets: Sequence[float], stages: int,
                            palette: Sequence[float] = (0.2, 0.4),
                            blocks: BlockRule = BlockRule(),
                            horizon: float = DEFAULT_HORIZON,
                            resume: Optional[ConstructionState] = None,
                            slope_tolerance: float = 1e-8,
                            location_tolerance: float = 1e-4,
                            gap_floor: float = 1e-8,
                            case_two_budget: int = 40,
                            nesting: Optional[Nesting] = None) -> ConstructionState:
    """Run the construction up to ``stages`` curves.

    Stage n splits the curve owning rho_n on (q_{2n-1}, q_{2n}), wherever that
    pair lies; the new maximum is checked to have kinks exactly at the active
    targets before moving on. ``nesting`` defaults to "chain", or to the saved
    mode when resuming.
    """
    if stages < 1:
        raise PreconditionError(f"stages must be >= 1, got {stages}")
    targets = tuple(float(q) for q in targets)

    if resume is None:
        state = ConstructionState(targets=targets, active_targets=targets,
                                  curves=(initial_curve(palette),),
                                  blocks=blocks, horizon=horizon, nesting=nesting or "chain")
    else:
        if nesting is not None and nesting != resume.nesting:
            raise ConstructionError(
                f"cannot resume a {resume.nesting!r} construction with {nesting!r} nesting")
        known = resume.targets
        if targets[:len(known)] != known[:len(targets)]:
            raise ConstructionError("resumed targets do not extend the saved ones")
        merged = targets if len(targets) > len(known) else known
        state = resume.model_copy(update={
            "targets": merged,
            "active_targets": resume.active_targets + merged[len(resume.active_targets):],
        })
        horizon = state.horizon
        logger.info("Resuming construction at stage %d", state.stage_count)

    if len(state.targets) < 2 * (stages - 1):
        raise PreconditionError(
            f"{stages} stages need {2 * (stages - 1)} targets, got {len(state.targets)}")
    check_nested(state.targets[:2 * (stages - 1)], horizon, state.nesting)

    while state.stage_count < stages:
        n = state.stage_count
        active = list(state.active_targets)
        check_nested(active[:2 * n], horizon, state.nesting)
        q_a, q_b = active[2 * n - 2], active[2 * n - 1]
        rho = state.sup_tau()
        owner = rho.owner(0.5 * (q_a + q_b))
        base = state.curves[owner]
        for q in (q_a, q_b):
            if rho.value(q) - base.value(q) > 1e-12:
                raise ConstructionError(
                    f"stage {n}: curve {owner} does not own rho_{n} on [{q_a}, {q_b}]")

        split = split_details(base, q_a, q_b, horizon=horizon, slope_tolerance=slope_tolerance)
        case = _classify(split.slope_gap_left, split.slope_gap_right, slope_tolerance)
        adjusted: dict[int, float] = {}
        if case == 2:
            split, case, adjusted = _case_two(state.curves, owner, n, split, active,
                                              horizon, slope_tolerance, case_two_budget)
        logger.info("Stage %d: split curve %d at (%.6g, %.6g), Case %d", n, owner, q_a, q_b, case)

        for index, value in adjusted.items():
            active[index - 1] = value
        if adjusted:
            check_nested(active[:2 * n], horizon, state.nesting)

        record = StageRecord(stage=n, targets=(q_a, q_b), owner=owner, case=case,
                             p4=split.p4, p5=split.p5,
                             slope_gap_left=split.slope_gap_left,
                             slope_gap_right=split.slope_gap_right, adjusted=adjusted)
        state = state.model_copy(update={
            "curves": state.curves + (split.curve,),
            "stages": state.stages + (record,),
            "active_targets": tuple(active),
        })
        _verify_stage(state, location_tolerance, gap_floor)

    return state
