import numpy as np
import pytest

from cointoss import transitions
from cointoss.errors import CaseTwoError, ConstructionError, PositivityError, PreconditionError
from cointoss.measure import BlockSchedule, Constant, Explicit, Interleaved
from cointoss.spectrum import (TauCurve, binary_entropy, tau_limits, tau_n, tau_single,
                               tau_single_d1)
from cointoss.transitions import (ConstructionState, Neighbour, Split, SupTau,
                                  build_dense_transitions, check_nested, default_p5, detect_kinks,
                                  find_matching_p, interleave, neighbours, ratio_is_decreasing,
                                  realize_curve, realize_sup, replacement_target, single_crossing,
                                  solve_three_point_system, split_combination, split_details)


ABOVE_ONE = np.round(1.01 + 0.01 * np.arange(500), 12)
AROUND_ZERO = np.round(-2 + 0.01 * np.arange(601), 12)


def _system(two_curve, p5):
    p4 = find_matching_p(two_curve, 1.5)
    targets = (two_curve.value(1.5), two_curve.value(3.0))
    return solve_three_point_system(0.2, p4, p5, 1.5, 3.0, targets)


@pytest.mark.parametrize("ps", [(0.1, 0.2, 0.3), (0.05, 0.25, 0.45), (0.3, 0.35, 0.4)])
def test_ratio_is_decreasing(ps):
    report = ratio_is_decreasing(*ps, ABOVE_ONE)
    assert report.decreasing
    assert len(report.ratios) == ABOVE_ONE.size


def test_ratio_falls_across_the_grid():
    report = ratio_is_decreasing(0.2, 0.3, 0.4, ABOVE_ONE)
    assert report.ratios[0] > report.ratios[-1]


def test_ratio_on_a_single_point():
    report = ratio_is_decreasing(0.1, 0.2, 0.3, [2.0])
    assert report.decreasing and report.violations == []


def test_ratio_preconditions():
    with pytest.raises(PreconditionError):
        ratio_is_decreasing(0.3, 0.2, 0.4, ABOVE_ONE)
    with pytest.raises(PreconditionError):
        ratio_is_decreasing(0.1, 0.2, 0.3, [0.5, 2.0])


def test_parameter_ordering():
    assert ratio_is_decreasing(0.2, 0.4, 0.45, [2.0]).decreasing
    for ps in [(0.0, 0.2, 0.3), (0.2, 0.2, 0.3), (0.1, 0.2, 0.5), (-0.1, 0.2, 0.3)]:
        with pytest.raises(PreconditionError):
            ratio_is_decreasing(*ps, [2.0])


def test_ratio_decreases_for_random_triples(rng):
    grid = np.round(1.01 + 0.01 * np.arange(700), 12)
    assert grid[-1] == 8.0
    tried = 0
    while tried < 200:
        triple = np.sort(rng.uniform(0.01, 0.49, 3))
        if np.min(np.diff(triple)) < 0.005:
            continue
        tried += 1
        assert ratio_is_decreasing(*triple.tolist(), grid).decreasing, triple


@pytest.mark.parametrize("p0", [0.2, 0.1, 0.45])
def test_no_crossing(two_curve, p0):
    assert not single_crossing(two_curve, p0, ABOVE_ONE).crossing


def test_single_crossing_inside_the_components(two_curve):
    grid = np.round(1.1 + 0.01 * np.arange(491), 12)
    report = single_crossing(two_curve, 0.29, grid)
    assert report.crossing
    assert 1.1 < report.q0 < 6.0
    assert report.residual < 1e-10
    assert two_curve.value(report.q0) == pytest.approx(tau_single(0.29, report.q0), abs=1e-10)


def test_single_crossing_needs_two_components():
    with pytest.raises(PreconditionError):
        single_crossing(TauCurve.single(0.3), 0.2, ABOVE_ONE)


def test_tau_is_decreasing_in_p_below_half():
    p = np.linspace(0.01, 0.49, 97)
    for q in (1.2, 1.5, 3.0):
        assert np.all(np.diff(tau_single(p, q)) < 0)


def test_find_matching_p(two_curve):
    p4 = find_matching_p(two_curve, 1.5)
    assert 0.2 < p4 < 0.4
    assert abs(tau_single(p4, 1.5) - two_curve.value(1.5)) < 1e-12
    assert find_matching_p(TauCurve.single(0.3), 2.0) == 0.3


def test_find_matching_p_needs_q_above_one(two_curve):
    with pytest.raises(PreconditionError):
        find_matching_p(two_curve, 1.0)


def test_three_point_system(two_curve):
    solution = _system(two_curve, 0.45)
    assert all(w > 0 for w in solution.weights)
    assert sum(solution.weights) == pytest.approx(1.0, abs=1e-12)
    assert solution.residual < 1e-10
    assert abs(solution.determinant) > 1e-14
    curve = solution.curve()
    for q in (1.5, 3.0):
        assert curve.value(q) == pytest.approx(two_curve.value(q), abs=1e-10)


def test_three_point_system_approaches_the_original_weights(two_curve):
    distances = []
    for k in range(2, 7):
        weights = np.array(_system(two_curve, 0.4 + 10.0 ** -k).weights)
        distances.append(np.abs(weights - [0.5, 0.0, 0.5]).max())
    assert all(b < a for a, b in zip(distances, distances[1:]))
    assert distances[-1] < 1e-3


def test_three_point_system_preconditions(two_curve):
    with pytest.raises(PreconditionError):
        solve_three_point_system(0.2, 0.3, 0.45, 3.0, 1.5, (0.0, 0.0))
    with pytest.raises(PreconditionError):
        solve_three_point_system(0.2, 0.45, 0.3, 1.5, 3.0, (0.0, 0.0))


def test_split_combination(two_curve):
    split = split_details(two_curve, 1.5, 3.0, p5=0.45)
    tilde = split.curve
    for q in (1.5, 3.0):
        assert abs(tilde.value(q) - two_curve.value(q)) < 1e-10
    assert abs(split.slope_gap_left) > 1e-8 and abs(split.slope_gap_right) > 1e-8
    assert tilde.value(2.0) > two_curve.value(2.0)
    assert tilde.value(1.2) < two_curve.value(1.2)
    assert tilde.value(5.0) < two_curve.value(5.0)


def test_split_keeps_trailing_components():
    curve = TauCurve.of([(0.25, 0.2), (0.25, 0.4), (0.3, 0.1), (0.2, 0.35)])
    tilde = split_combination(curve, 1.5, 3.0)
    assert tilde.components[3:] == curve.components[2:]
    assert len(tilde.components) == 5
    assert sum(c.weight for c in tilde.components[:3]) == pytest.approx(0.5)


def test_default_p5():
    assert default_p5(0.4) == pytest.approx(0.46)


def test_split_rejects_bad_p5(two_curve):
    with pytest.raises(PreconditionError):
        split_details(two_curve, 1.5, 3.0, p5=0.35)


def test_realize_single_component():
    assert realize_curve(TauCurve.single(0.3), 10) == Constant(p=0.3)


def test_realize_halves_exactly(two_curve):
    w = realize_curve(two_curve, 40)
    assert isinstance(w, Explicit)
    assert sum(p == 0.2 for p in w.weights) == 20
    for n in range(2, 41, 2):
        assert tau_n(w, 2.5, n) == pytest.approx(two_curve.value(2.5), abs=1e-12)


def test_realize_thirds():
    curve = TauCurve.of([(1 / 3, 0.2), (2 / 3, 0.4)])
    w = realize_curve(curve, 9)
    assert sum(p == 0.2 for p in w.weights) == 3
    for q in (-1.0, 0.5, 3.0):
        assert tau_n(w, q, 9) == pytest.approx(curve.value(q), abs=1e-12)


def test_realize_envelope():
    curve = TauCurve.of([(0.2, 0.1), (0.5, 0.25), (0.3, 0.45)])
    lazy = interleave(curve)
    assert isinstance(lazy, Interleaved)
    q_grid = np.linspace(-3, 6, 37)
    bound = np.max(np.abs([tau_single(p, q_grid) for p in (0.1, 0.25, 0.45)]), axis=0)
    for n in (10, 100, 1000, 5000):
        gap = np.abs([tau_n(lazy, q, n) for q in q_grid] - curve.value(q_grid))
        assert np.all(gap <= 2 * 3 * bound / n + 1e-12)


def test_realize_needs_room(two_curve):
    with pytest.raises(PreconditionError):
        realize_curve(TauCurve.of([(0.2, 0.1), (0.5, 0.25), (0.3, 0.45)]), 2)


def test_realize_sup_of_identical_inputs():
    w = realize_sup([Constant(p=0.3), Constant(p=0.3)])
    for n in (1, 7, 530, 2000):
        assert tau_n(w, 2.0, n) == pytest.approx(tau_single(0.3, 2.0), abs=1e-12)


def test_realize_sup_alternates_between_branches(alternating_depths):
    w = realize_sup([Constant(p=0.3), Constant(p=0.4)])
    assert isinstance(w, BlockSchedule)
    estimate = tau_limits(w, 2.0, alternating_depths)
    top = max(tau_single(0.3, 2.0), tau_single(0.4, 2.0))
    assert estimate.limsup == pytest.approx(top, abs=1e-2)


def test_realize_sup_needs_two_inputs():
    with pytest.raises(PreconditionError):
        realize_sup([Constant(p=0.3)])


def test_sup_tau_is_midpoint_convex(two_curve):
    sup = SupTau(curves=(TauCurve.single(0.3), TauCurve.single(0.4), two_curve))
    q = np.linspace(-3, 6, 91)
    values = sup.value(q)
    assert np.all(values[1:-1] <= 0.5 * (values[:-2] + values[2:]) + 1e-12)


def test_kinks_of_two_single_curves():
    sup = SupTau(curves=(TauCurve.single(0.3), TauCurve.single(0.4)))
    report = detect_kinks(sup, AROUND_ZERO)
    assert report.locations == [0.0, 1.0]
    kink = report.kinks[1]
    assert kink.gap == pytest.approx(binary_entropy(0.4) - binary_entropy(0.3), abs=1e-12)
    assert kink.gap == pytest.approx(0.089660, abs=1e-6)
    assert kink.left_slope == pytest.approx(tau_single_d1(0.4, 1.0))
    assert report.kinks[0].gap > 0
    assert list(report.to_rows()[1]) == ["q_loc", "left_slope", "right_slope", "gap"]


def test_single_curve_has_no_kinks():
    sup = SupTau(curves=(TauCurve.single(0.3),))
    assert detect_kinks(sup, AROUND_ZERO).kinks == []


def test_kink_grid_needs_three_points():
    sup = SupTau(curves=(TauCurve.single(0.3), TauCurve.single(0.4)))
    with pytest.raises(PreconditionError):
        detect_kinks(sup, [0.0, 1.0])


def test_nesting():
    check_nested([1.5, 5.0, 2.0, 4.0], 8.0)
    with pytest.raises(ConstructionError):
        check_nested([1.5, 5.0, 6.0, 4.0], 8.0)
    with pytest.raises(ConstructionError):
        check_nested([1.5, 9.0], 8.0)
    with pytest.raises(ConstructionError):
        check_nested([1.5, 5.0, 2.0], 8.0)


def test_dense_nesting():
    check_nested([1.5, 5.0, 6.0, 7.0], 8.0, "dense")
    check_nested([3.0, 4.0, 1.2, 2.0], 8.0, "dense")
    with pytest.raises(ConstructionError):
        check_nested([1.5, 5.0, 6.0, 7.0], 8.0)
    # 5.0 lies within 1/2 of the second pair
    with pytest.raises(ConstructionError):
        check_nested([1.5, 5.0, 5.2, 7.0], 8.0, "dense")
    with pytest.raises(ConstructionError):
        check_nested([2.0, 3.0, 1.5, 1.8], 8.0, "dense")
    with pytest.raises(ConstructionError):
        check_nested([1.5, 5.0, 7.0, 6.0], 8.0, "dense")
    with pytest.raises(ConstructionError):
        check_nested([1.5, 5.0, 6.0, 8.5], 8.0, "dense")


def test_dense_targets_are_rejected_by_the_chain_construction():
    with pytest.raises(ConstructionError):
        build_dense_transitions([1.5, 5.0, 6.0, 7.0], 3)


def test_resume_keeps_the_nesting():
    first = build_dense_transitions([1.5, 5.0], 1, nesting="dense")
    assert first.nesting == "dense"
    saved = ConstructionState.model_validate_json(first.model_dump_json())
    assert saved.nesting == "dense"
    with pytest.raises(ConstructionError):
        build_dense_transitions([1.5, 5.0], 2, resume=saved, nesting="chain")


@pytest.mark.slow
def test_dense_construction_outside_the_chain():
    state = build_dense_transitions([1.5, 5.0, 6.0, 7.0], 3, nesting="dense")
    report = detect_kinks(state.sup_tau(), np.round(1.01 + 0.01 * np.arange(700), 12))
    assert len(report.kinks) == 4
    assert report.locations == pytest.approx(state.kink_targets, abs=1e-4)
    assert all(k.gap > 1e-8 for k in report.kinks)


@pytest.fixture
def crossing_pair(two_curve):
    """two_curve owns rho on (1, 2), a single-level curve matched at q = 2 owns it above."""
    p0 = find_matching_p(two_curve, 2.0)
    single = TauCurve.single(p0)
    return p0, single, SupTau(curves=(two_curve, single))


def test_crossing_pair_layout(two_curve, crossing_pair):
    _, single, rho = crossing_pair
    assert rho.owner(1.5) == 0
    assert rho.owner(4.5) == 1
    assert single.derivative(2.0) > two_curve.derivative(2.0)


def test_neighbours(two_curve, crossing_pair):
    _, single, rho = crossing_pair
    assert neighbours(rho, [2.0, 7.0], 1.2, 1.8, 8.0) == [
        Neighbour(1, 2.0, 4.5, single, "right")]
    assert neighbours(rho, [2.0, 7.0], 3.0, 5.0, 8.0) == [
        Neighbour(1, 2.0, 1.5, two_curve, "left"), Neighbour(2, 7.0, 7.5, single, "right")]
    assert neighbours(rho, [], 3.0, 5.0, 8.0) == []


def test_replacement_target_on_the_left(two_curve, crossing_pair):
    p0, single, rho = crossing_pair
    lifted = TauCurve.single(p0 - 1e-5)
    neighbour = Neighbour(1, 2.0, 1.5, two_curve, "left")
    moved = replacement_target(lifted, rho, single, neighbour, reach=0.25, spacing=1.0)
    assert moved is not None
    assert 1.99 < moved < 2.0
    assert abs(moved - 2.0) < 0.25 * 1.0
    assert lifted.value(moved) == pytest.approx(two_curve.value(moved), abs=1e-9)


def test_replacement_target_rejections(two_curve, crossing_pair):
    p0, single, rho = crossing_pair
    neighbour = Neighbour(1, 2.0, 1.5, two_curve, "left")
    # above rho at the midpoint
    far = TauCurve.single(p0 - 0.02)
    assert replacement_target(far, rho, single, neighbour, reach=0.25, spacing=1.0) is None
    # the crossing moves by about 1e-3, more than reach * spacing
    near = TauCurve.single(p0 - 1e-5)
    assert replacement_target(near, rho, single, neighbour, reach=1e-6, spacing=1.0) is None


def _lifted_split():
    lifted = TauCurve.of([(0.5, 0.2 - 1e-5), (0.5, 0.4 - 1e-5)])
    return Split(curve=lifted, q1=1.2, q2=1.8, p4=0.3, p5=0.46,
                 slope_gap_left=-1.0, slope_gap_right=1.0)


def test_case_two_moves_the_neighbouring_target(monkeypatch, two_curve, crossing_pair):
    _, single, _ = crossing_pair
    split = _lifted_split()
    monkeypatch.setattr(transitions, "split_details", lambda *args, **kwargs: split)
    monkeypatch.setattr(transitions, "_classify", lambda *args: 2)
    active = [2.0, 7.0, 1.2, 1.8]

    result, case, adjusted = transitions._case_two(
        (two_curve, single), 0, 2, split, active, 8.0, 1e-8, 5)
    assert case == 2
    assert result is split
    assert list(adjusted) == [1]
    moved = adjusted[1]
    # reach 2^-2 times the smallest spacing 0.2 of {1.2, 1.8, 2, 7}
    assert 2.0 < moved < 2.0 + 0.25 * 0.2
    assert split.curve.value(moved) == pytest.approx(single.value(moved), abs=1e-9)
    jump_before = single.derivative(2.0) - two_curve.derivative(2.0)
    jump_after = single.derivative(moved) - split.curve.derivative(moved)
    assert abs(jump_before - jump_after) < 0.25 * jump_before
    check_nested([moved, 7.0], 8.0)


def test_case_two_without_neighbours_is_accepted(two_curve, crossing_pair):
    _, single, _ = crossing_pair
    split = _lifted_split()
    result = transitions._case_two((two_curve, single), 0, 1, split, [1.2, 1.8], 8.0, 1e-8, 5)
    assert result == (split, 2, {})


def test_case_two_gives_up_when_every_retry_fails(monkeypatch, two_curve, crossing_pair):
    _, single, _ = crossing_pair

    def refuse(*args, **kwargs):
        raise PositivityError([0.6, -0.1, 0.5])

    monkeypatch.setattr(transitions, "split_details", refuse)
    with pytest.raises(CaseTwoError):
        transitions._case_two((two_curve, single), 0, 2, _lifted_split(),
                              [2.0, 7.0, 1.2, 1.8], 8.0, 1e-8, 3)


def test_case_two_returns_to_case_one(monkeypatch, two_curve, crossing_pair):
    _, single, _ = crossing_pair
    split = _lifted_split()
    monkeypatch.setattr(transitions, "split_details", lambda *args, **kwargs: split)
    monkeypatch.setattr(transitions, "_classify", lambda *args: 1)
    result = transitions._case_two((two_curve, single), 0, 2, split,
                                   [2.0, 7.0, 1.2, 1.8], 8.0, 1e-8, 3)
    assert result == (split, 1, {})


def test_construction_with_one_stage():
    state = build_dense_transitions([1.5, 5.0], 1)
    assert state.stage_count == 1
    assert state.stages == ()
    assert detect_kinks(state.sup_tau(), np.round(1.01 + 0.01 * np.arange(700), 12)).kinks == []


def test_construction_with_two_stages():
    state = build_dense_transitions([1.5, 5.0], 2)
    assert state.stage_count == 2
    record = state.stages[0]
    assert record.case in (1, 2)
    report = detect_kinks(state.sup_tau(), np.round(1.01 + 0.01 * np.arange(700), 12))
    assert report.locations == pytest.approx([1.5, 5.0], abs=1e-4)
    assert all(k.gap > 1e-8 for k in report.kinks)


def test_construction_state_resumes():
    first = build_dense_transitions([1.5, 5.0], 1)
    saved = ConstructionState.model_validate_json(first.model_dump_json())
    resumed = build_dense_transitions([1.5, 5.0], 2, resume=saved)
    assert resumed == build_dense_transitions([1.5, 5.0], 2)


def test_construction_needs_enough_targets():
    with pytest.raises(PreconditionError):
        build_dense_transitions([1.5, 5.0], 3)


@pytest.mark.slow
def test_construction_with_three_stages():
    state = build_dense_transitions([1.5, 5.0, 2.0, 4.0], 3)
    report = detect_kinks(state.sup_tau(), np.round(1.01 + 0.01 * np.arange(700), 12))
    assert report.locations == pytest.approx(state.kink_targets, abs=1e-4)
    assert len(report.kinks) == 4
    assert all(k.gap > 1e-8 for k in report.kinks)
    diagonal = state.diagonal()
    assert len(diagonal.stages) == 3
    assert diagonal.prefix(1000).shape == (1000,)
